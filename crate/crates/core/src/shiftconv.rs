//! The q²-shift T_ξ, its conjugate T*_ξ, δ_{q²}, and the q²-convolution.
//!
//! For ξ = ±q^{2t} the shift acts on lattice samples through the closed form
//!
//!   T_ξψ(s) = Σ_k ξ^k q^{2k²}/(q²;q²)_k · s^{−k} E_{q²}(−q²ξ/s) ⋯ ψ(q^{−2k}s),
//!
//! with the E-factor evaluated at the k-dependent argument −q^{2(k+1)}ξ/s.
//! When ξ and s have the same sign the factor vanishes for the first
//! n − t terms at s = ±q^{2n}, all weights are nonnegative and the sum is a
//! contraction. With opposite signs the weights alternate and reach
//! e^{(n−t)² ln(1/q)}, so those sites are only computed when the result is
//! representable and their conditioning is reported.

use serde::Serialize;

use crate::error::{QError, QResult};
use crate::lattice::{jackson_integral, q_derivative, LatticeFunction, LatticeGrid, Sign};
use crate::qcore::{log_q_pochhammer_inf, qfact, QParams, C64};

pub const DEFAULT_ORDER_CAP: usize = 48;

/// A conjugate-shift series that runs into rounding is accepted when the
/// rounding level is below this fraction of the partial sum.
pub const ROUNDING_ACCEPT: f64 = 1e-10;

const LOG_MAX: f64 = 709.0;

/// ξ = sign · q^{2t}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShiftSpec {
    pub t: i64,
    pub sign: Sign,
    /// Number of nonvanishing terms kept in the k-series.
    pub order_cap: usize,
}

impl ShiftSpec {
    pub fn new(t: i64, sign: Sign, order_cap: usize) -> QResult<Self> {
        if order_cap < 1 {
            return Err(QError::Domain("order_cap must be at least 1".into()));
        }
        Ok(ShiftSpec { t, sign, order_cap })
    }

    pub fn with_default_cap(t: i64, sign: Sign) -> Self {
        ShiftSpec { t, sign, order_cap: DEFAULT_ORDER_CAP }
    }

    pub fn xi(&self, params: &QParams) -> f64 {
        self.sign.value() * params.lat(self.t)
    }
}

/// A shifted function plus per-site diagnostics.
#[derive(Debug, Clone)]
pub struct ShiftOutput {
    pub values: LatticeFunction,
    /// Σ|w_k ψ_k| / |Σ w_k ψ_k| per site; 1 when nothing cancels.
    pub condition: LatticeFunction,
    /// Largest dropped weight times sup|ψ|, over all computed sites.
    pub tail: f64,
    /// Sites whose series stopped because rounding overtook the terms
    /// (conjugate shift only).
    pub rounding_limited: usize,
}

/// ln|w_k| and the sign of w_k at s = σq^{2n}, or None when w_k = 0.
fn shift_weight(params: &QParams, rho: f64, t: i64, n: i64, k: i64) -> QResult<Option<(f64, f64)>> {
    let p = params.p();
    let j = t + k + 1 - n;
    if rho > 0.0 && j <= 0 {
        return Ok(None);
    }
    // E(−ρ q^{2j}) = (ρ q^{2j}; q²)_∞
    let le = log_q_pochhammer_inf(C64::new(rho * p.powi(j as i32), 0.0), params)?;
    if le.re == f64::NEG_INFINITY {
        return Ok(None);
    }
    let lw = (k * (k + t - n)) as f64 * p.ln() - qfact(k as usize, params).ln() + le.re;
    // the E-factor is positive whenever it is nonzero
    let sign = if rho < 0.0 && k % 2 == 1 { -1.0 } else { 1.0 };
    Ok(Some((lw, sign)))
}

/// One output site of T_ξψ. Returns (value, Σ|terms|, dropped weight).
/// A missing sample beyond the large-|s| edge is estimated by the edge
/// value itself, so decaying ψ may be shifted past the window.
fn shift_site(psi: &LatticeFunction, spec: &ShiftSpec, site: Sign, n: i64, sup: f64) -> QResult<(C64, f64, f64)> {
    let params = psi.grid.params;
    let g = psi.grid;
    let rho = spec.sign.value() * site.value();
    let k0 = if rho > 0.0 { (n - spec.t).max(0) } else { 0 };
    let k1 = k0 + spec.order_cap as i64 - 1;
    let mut acc = C64::new(0.0, 0.0);
    let mut mass = 0.0;
    for k in k0..=k1 {
        let Some((lw, sgn)) = shift_weight(&params, rho, spec.t, n, k)? else { continue };
        if lw > LOG_MAX {
            return Err(QError::Range { m: n, n: k, detail: format!("shift weight e^{lw:.0} at t={} overflows", spec.t) });
        }
        let w = sgn * lw.exp();
        match psi.get(site, n - k) {
            Some(v) => {
                acc += v * w;
                mass += (v * w).norm();
            }
            None => {
                let edge = psi.at(site, g.m_min).norm();
                if w.abs() * edge > params.series_tol * sup {
                    return Err(QError::Coverage(format!(
                        "T_xi at t={} needs psi(q^{{2({})}}) outside [{}, {}] with weight {w:.3e}",
                        spec.t,
                        n - k,
                        g.m_min,
                        g.m_max
                    )));
                }
            }
        }
    }
    let dropped = match shift_weight(&params, rho, spec.t, n, k1 + 1)? {
        Some((lw, _)) => lw.exp() * sup,
        None => 0.0,
    };
    Ok((acc, mass, dropped))
}

fn shift_on(psi: &LatticeFunction, spec: &ShiftSpec, branches: &[Sign]) -> QResult<ShiftOutput> {
    let g = psi.grid;
    let sup = psi.sup_norm();
    let mut values = LatticeFunction::zeros(g);
    let mut condition = LatticeFunction::zeros(g);
    let mut tail: f64 = 0.0;
    for &site in branches {
        for n in g.indices() {
            let (v, mass, dropped) = shift_site(psi, spec, site, n, sup)?;
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(QError::Range { m: n, n: 0, detail: "shifted value is not finite".into() });
            }
            values.set(site, n, v);
            let c = if mass == 0.0 { 1.0 } else { mass / v.norm() };
            condition.set(site, n, C64::new(c, 0.0));
            tail = tail.max(dropped);
        }
    }
    Ok(ShiftOutput { values, condition, tail, rounding_limited: 0 })
}

/// T_ξψ on both branches with diagnostics.
pub fn shift_apply_detailed(psi: &LatticeFunction, spec: &ShiftSpec) -> QResult<ShiftOutput> {
    shift_on(psi, spec, &Sign::BOTH)
}

/// T_ξψ on both branches.
pub fn shift_apply(psi: &LatticeFunction, spec: &ShiftSpec) -> QResult<LatticeFunction> {
    Ok(shift_apply_detailed(psi, spec)?.values)
}

/// T_ξψ on one branch only; the other branch of the result is zero.
pub fn shift_apply_branch(psi: &LatticeFunction, spec: &ShiftSpec, branch: Sign) -> QResult<ShiftOutput> {
    shift_on(psi, spec, &[branch])
}

/// k-fold q-derivatives of g with running rounding bounds. Entry k lives on
/// [m_min, m_max − k].
pub struct DerivativeTable {
    pub derivs: Vec<LatticeFunction>,
    pub rounding: Vec<LatticeFunction>,
}

impl DerivativeTable {
    pub fn new(g: &LatticeFunction, max_order: usize) -> QResult<Self> {
        let max_order = max_order.min(g.grid.len() - 1);
        let eps = f64::EPSILON;
        let alpha = g.grid.params.alpha();
        let mut derivs = vec![g.clone()];
        let mut rounding = vec![g.map(|_, v| C64::new(eps * v.norm(), 0.0))];
        for k in 1..=max_order {
            let prev = &derivs[k - 1];
            let d = q_derivative(prev, 1)?;
            let pe = &rounding[k - 1];
            let mut e = LatticeFunction::zeros(d.grid);
            for s in Sign::BOTH {
                for m in d.grid.indices() {
                    let x = d.grid.point(s, m).abs();
                    let v = (pe.at(s, m).re + pe.at(s, m + 1).re) / (alpha * x) + eps * d.at(s, m).norm();
                    e.set(s, m, C64::new(v, 0.0));
                }
            }
            derivs.push(d);
            rounding.push(e);
        }
        Ok(DerivativeTable { derivs, rounding })
    }

    fn get(&self, k: usize, s: Sign, m: i64) -> Option<(C64, f64)> {
        let d = self.derivs.get(k)?;
        Some((d.get(s, m)?, self.rounding[k].get(s, m)?.re))
    }
}

/// T*_ξ g(s) = Σ_k (−(1−q²)q²ξ)^k/(q²;q²)_k ∂^k g(s) at one site.
/// Returns (value, stopped by rounding).
fn conjugate_site(table: &DerivativeTable, grid: LatticeGrid, xi: f64, spec: &ShiftSpec, site: Sign, n: i64, sup: f64) -> QResult<(C64, bool)> {
    let params = grid.params;
    let (a, p) = (params.alpha(), params.p());
    let s_abs = grid.point(site, n).abs();
    let mut acc = C64::new(0.0, 0.0);
    let mut coeff = 1.0;
    let mut k = 0usize;
    loop {
        // weight that the next order puts on its deepest sample g(q^{2k}s)
        let missing_weight = |k: usize| (p * xi.abs() / s_abs).powi(k as i32) / qfact(k, &params);
        if k > spec.order_cap {
            if missing_weight(k) * sup > params.series_tol * sup.max(acc.norm()) {
                return Err(QError::Coverage(format!("T*_xi at site {n} needs more than {} orders", spec.order_cap)));
            }
            return Ok((acc, false));
        }
        let Some((d, err)) = table.get(k, site, n) else {
            if missing_weight(k) > params.series_tol {
                return Err(QError::Coverage(format!(
                    "T*_xi at xi={xi:.3e} needs g beyond the grid at site {n} (order {k})"
                )));
            }
            return Ok((acc, false));
        };
        let term = d * coeff;
        let noise = coeff.abs() * err;
        if k >= 1 && noise > term.norm() {
            // the term is at rounding level; accept only if that level is small
            if noise <= ROUNDING_ACCEPT * acc.norm().max(sup * params.series_tol) {
                return Ok((acc, true));
            }
            return Err(QError::Convergence(format!(
                "T*_xi at xi={xi:.3e}, site {n}: order-{k} term lost in rounding ({noise:.1e})"
            )));
        }
        acc += term;
        if k >= 1 && term.norm() <= params.series_tol * acc.norm() {
            return Ok((acc, false));
        }
        k += 1;
        coeff *= -a * p * xi / (1.0 - p.powi(k as i32));
    }
}

/// T*_ξ g from a precomputed derivative table. With `covered_only` the
/// output window ends before the first site (from large |s| inward) that
/// would need samples beyond the grid; otherwise such a site is an error.
pub fn shift_conjugate_with_table(g: &LatticeFunction, table: &DerivativeTable, spec: &ShiftSpec, covered_only: bool) -> QResult<ShiftOutput> {
    let grid = g.grid;
    let xi = spec.xi(&grid.params);
    let sup = g.sup_norm();
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    let mut limited = 0;
    'sites: for n in grid.indices() {
        let mut pair = [C64::new(0.0, 0.0); 2];
        for (i, site) in Sign::BOTH.into_iter().enumerate() {
            match conjugate_site(table, grid, xi, spec, site, n, sup) {
                Ok((v, lim)) => {
                    pair[i] = v;
                    limited += lim as usize;
                }
                Err(QError::Coverage(_) | QError::Convergence(_)) if covered_only => break 'sites,
                Err(e) => return Err(e),
            }
        }
        pos.push(pair[0]);
        neg.push(pair[1]);
    }
    if pos.is_empty() {
        return Err(QError::Coverage(format!("T*_xi at xi={xi:.3e} covers no site of the grid")));
    }
    let out_grid = LatticeGrid::new(grid.params, grid.m_min, grid.m_min + pos.len() as i64 - 1)?;
    let values = LatticeFunction { grid: out_grid, pos, neg };
    let condition = LatticeFunction::from_fn(out_grid, |_| C64::new(1.0, 0.0));
    Ok(ShiftOutput { values, condition, tail: 0.0, rounding_limited: limited })
}

/// T*_ξ g by the direct derivative series. The series is reliable where
/// |ξ| ≪ |s|; it stops early where rounding in ∂^k g overtakes the terms.
pub fn shift_conjugate_apply_detailed(g: &LatticeFunction, spec: &ShiftSpec) -> QResult<ShiftOutput> {
    let table = DerivativeTable::new(g, spec.order_cap)?;
    shift_conjugate_with_table(g, &table, spec, false)
}

pub fn shift_conjugate_apply(g: &LatticeFunction, spec: &ShiftSpec) -> QResult<LatticeFunction> {
    Ok(shift_conjugate_apply_detailed(g, spec)?.values)
}

/// Options for the convolution sums.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvOptions {
    pub order_cap: usize,
    /// Output branch; None computes both.
    pub branch: Option<Sign>,
}

impl Default for ConvOptions {
    fn default() -> Self {
        ConvOptions { order_cap: DEFAULT_ORDER_CAP, branch: None }
    }
}

impl ConvOptions {
    pub fn positive() -> Self {
        ConvOptions { branch: Some(Sign::Pos), ..Default::default() }
    }
}

/// ξ-samples whose Jackson weight |ξ||r(ξ)| is at most this are left out of
/// a convolution sum: series_tol relative to the largest weight.
fn negligible_below(r: &LatticeFunction) -> f64 {
    let g = r.grid;
    let top = g
        .indices()
        .flat_map(|t| Sign::BOTH.map(|s| r.at(s, t).norm() * g.params.lat(t)))
        .fold(0.0, f64::max);
    top * g.params.series_tol
}

/// (r*ψ)(s) = ∫ conj(r(ξ)) T_ξψ(s) d_{q²}ξ, ξ over the grid of r. Samples
/// with negligible weight |ξ||r(ξ)| are skipped. With a branch selected the other
/// branch of the result is left at zero.
pub fn convolve(r: &LatticeFunction, psi: &LatticeFunction, opts: &ConvOptions) -> QResult<LatticeFunction> {
    let params = psi.grid.params;
    let alpha = params.alpha();
    let mut out = LatticeFunction::zeros(psi.grid);
    let cut = negligible_below(r);
    for xs in Sign::BOTH {
        for t in r.grid.indices() {
            let rv = r.at(xs, t);
            if rv.norm() * params.lat(t) <= cut {
                continue;
            }
            let spec = ShiftSpec::new(t, xs, opts.order_cap)?;
            let shifted = match opts.branch {
                Some(b) => shift_apply_branch(psi, &spec, b)?.values,
                None => shift_apply(psi, &spec)?,
            };
            let w = rv.conj() * alpha * params.lat(t);
            for s in Sign::BOTH {
                for n in psi.grid.indices() {
                    let v = out.at(s, n) + w * shifted.at(s, n);
                    out.set(s, n, v);
                }
            }
        }
    }
    Ok(out)
}

/// (g*r)(s) = ∫ r(ξ) T*_ξ g(s) d_{q²}ξ, the form in which δ_{q²} acts as
/// the identity. The result lives on the window every ξ-term covers, which
/// ends where |s| stops dominating the support of r.
pub fn convolve_conjugate(g: &LatticeFunction, r: &LatticeFunction, order_cap: usize) -> QResult<LatticeFunction> {
    let params = g.grid.params;
    let alpha = params.alpha();
    let table = DerivativeTable::new(g, order_cap)?;
    let cut = negligible_below(r);
    let mut acc: Option<LatticeFunction> = None;
    for xs in Sign::BOTH {
        for t in r.grid.indices() {
            let rv = r.at(xs, t);
            if rv.norm() * params.lat(t) <= cut {
                continue;
            }
            let spec = ShiftSpec::new(t, xs, order_cap)?;
            let shifted = shift_conjugate_with_table(g, &table, &spec, true)?.values;
            let w = rv * alpha * params.lat(t);
            let term = shifted.scale(w);
            acc = Some(match acc {
                None => term,
                Some(a) => a.zip(&term, |x, y| x + y)?,
            });
        }
    }
    Ok(acc.unwrap_or_else(|| LatticeFunction::zeros(g.grid)))
}

/// Σ_k ∂^k f_k, a distribution with a singularity of finite multiplicity.
#[derive(Debug, Clone)]
pub struct SingularPart {
    pub terms: Vec<(usize, LatticeFunction)>,
}

pub const SINGULAR_ORDER_CAP: usize = 8;

impl SingularPart {
    pub fn new(terms: Vec<(usize, LatticeFunction)>) -> QResult<Self> {
        let mut seen = Vec::new();
        for (k, _) in &terms {
            if *k > SINGULAR_ORDER_CAP {
                return Err(QError::Domain(format!("derivative order {k} above the cap {SINGULAR_ORDER_CAP}")));
            }
            if seen.contains(k) {
                return Err(QError::Domain(format!("derivative order {k} listed twice")));
            }
            seen.push(*k);
        }
        Ok(SingularPart { terms })
    }

    /// Convolution with ψ, moving each ∂^k onto ψ:
    /// ∫ conj(∂^k f) T_ξψ = (−1)^k q^{k(k−1)} ∫ conj(f) T_ξ[(∂^kψ)(q^{−2k}·)].
    /// The result lives on [m_min + K, m_max] for the largest order K.
    pub fn convolve(&self, psi: &LatticeFunction, opts: &ConvOptions) -> QResult<LatticeFunction> {
        let params = psi.grid.params;
        let k_max = self.terms.iter().map(|(k, _)| *k).max().unwrap_or(0) as i64;
        let out_grid = LatticeGrid::new(params, psi.grid.m_min + k_max, psi.grid.m_max)?;
        let mut out = LatticeFunction::zeros(out_grid);
        for (k, f) in &self.terms {
            let k = *k;
            let d = q_derivative(psi, k)?;
            // χ(s) = (∂^kψ)(q^{−2k}s): the sample at index n is ∂^kψ at n − k
            let chi_grid = LatticeGrid::new(params, d.grid.m_min + k as i64, d.grid.m_max + k as i64)?;
            let chi = LatticeFunction { grid: chi_grid, pos: d.pos.clone(), neg: d.neg.clone() };
            let conv = convolve(f, &chi, opts)?;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let pref = sign * params.q.powi((k * (k.saturating_sub(1))) as i32);
            for s in Sign::BOTH {
                for n in out_grid.indices() {
                    if let Some(v) = conv.get(s, n) {
                        out.set(s, n, out.at(s, n) + v * pref);
                    }
                }
            }
        }
        Ok(out)
    }
}

/// δ_{q²} paired with φ: the mean of the two branch values nearest the
/// origin, checked for stability against the next index out.
pub fn delta_pair(phi: &LatticeFunction) -> QResult<C64> {
    let g = phi.grid;
    if g.len() < 3 {
        return Err(QError::Size("delta_pair needs at least three indices".into()));
    }
    let mean = |m: i64| (phi.at(Sign::Pos, m) + phi.at(Sign::Neg, m)) / 2.0;
    let (a, b, c) = (mean(g.m_max), mean(g.m_max - 1), mean(g.m_max - 2));
    let d1 = (a - b).norm();
    let d2 = (b - c).norm();
    let scale = a.norm().max(1.0);
    // a converging sequence has shrinking differences; allow a flat one
    if d1 > d2 * 1.5 + 1e-12 * scale && d1 > 1e-8 * scale {
        return Err(QError::NoLimit(format!("branch means near 0 drift: |Δ|={d1:.3e} after {d2:.3e}")));
    }
    Ok(a)
}

/// sup over sites of |T_ξψ| − sup|ψ|; nonpositive for a contraction.
pub fn contraction_excess(psi: &LatticeFunction, spec: &ShiftSpec, branch: Sign) -> QResult<f64> {
    let out = shift_apply_branch(psi, spec, branch)?;
    Ok(out.values.branch_sup(branch) - psi.sup_norm())
}

/// |∫T_ξψ − ∫ψ| / |∫ψ| over both branches.
pub fn integral_invariance_residual(psi: &LatticeFunction, spec: &ShiftSpec) -> QResult<f64> {
    let shifted = shift_apply(psi, spec)?;
    let a = jackson_integral(&shifted);
    let b = jackson_integral(psi);
    Ok((a - b).norm() / b.norm().max(f64::MIN_POSITIVE))
}

/// Jackson pairing ⟨a, b⟩ = ∫ conj(a) b on the common window.
pub fn pairing(a: &LatticeFunction, b: &LatticeFunction) -> QResult<C64> {
    Ok(jackson_integral(&a.zip(b, |x, y| x.conj() * y)?))
}
