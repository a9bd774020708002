//! Fractional q²-derivatives and primitives.
//!
//! Convolution with s₊^{ν−1}/Γ_{q²}(ν) has the closed lattice form
//!
//!   (∂^{−ν}g)(s) = ((1−q²)s)^ν Σ_{m≥0} q^{2m}(q^{2ν};q²)_m/(q²;q²)_m · g(q^{2m}s),
//!
//! which only reads g at points below s. Only the positive branch carries
//! data; functions with samples on the negative branch are rejected.

use serde::Serialize;

use crate::braided::checks::vandermonde_symbolic;
use crate::error::{QError, QResult};
use crate::lattice::{q_derivative, LatticeFunction, LatticeGrid, Sign};
use crate::qcore::{a_nu, gamma_q2_residue, q_binomial, q_pochhammer, qfact, theta0, Order, QParams, C64};

/// Highest Taylor order the regularized pairing subtracts.
pub const MAX_JET_ORDER: usize = 4;

/// Order of a fractional operator: a derivative of order −ν for ν < 0 and a
/// primitive of order ν for ν > 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FracOrder {
    pub nu: f64,
}

impl FracOrder {
    pub fn new(nu: f64) -> QResult<Self> {
        if !nu.is_finite() {
            return Err(QError::Domain(format!("fractional order must be finite, got {nu}")));
        }
        Ok(FracOrder { nu })
    }

    /// The k with ν = −k, if ν is a nonpositive integer.
    pub fn pole_index(&self) -> Option<usize> {
        let k = (-self.nu).round();
        (k >= 0.0 && (self.nu + k).abs() < 1e-12).then_some(k as usize)
    }
}

/// The first `count` weights q^{2m}(q^{2ν};q²)_m/(q²;q²)_m, fewer when the
/// Pochhammer factor vanishes (ν a nonpositive integer) or the weights
/// underflow.
pub fn frac_weights(nu: f64, count: usize, params: &QParams) -> QResult<Vec<f64>> {
    let p = params.p();
    let mut w = Vec::with_capacity(count.min(1024));
    let mut cur = 1.0f64;
    for m in 0..count {
        if cur == 0.0 || cur.abs() < f64::MIN_POSITIVE {
            break;
        }
        if !cur.is_finite() {
            return Err(QError::Range { m: m as i64, n: 0, detail: format!("fractional weight overflow at nu={nu}") });
        }
        w.push(cur);
        // written so that integer ν gives exact zeros and w₁ = −1 at ν = −1
        cur *= (p - p.powf(nu + (m + 1) as f64)) / (1.0 - p.powi(m as i32 + 1));
    }
    Ok(w)
}

/// Sum Σ_m w_m g(q^{2m}s)·((1−q²)s)^ν over every sample below each site.
/// Sites are kept from the top of the grid down while the first omitted
/// term times sup|g|, with a geometric tail, stays under series_tol.
fn lattice_series(g: &LatticeFunction, w: &[f64], nu: f64, what: &str) -> QResult<LatticeFunction> {
    check_positive_support(g)?;
    let params = g.grid.params;
    let (lo, hi) = (g.grid.m_min, g.grid.m_max);
    let sup = g.branch_sup(Sign::Pos);
    let mut last = None;
    for n in lo..=hi {
        let avail = (hi - n + 1) as usize;
        let tail = if avail >= w.len() { 0.0 } else { w[avail].abs() * sup / params.alpha() };
        if tail >= params.series_tol {
            break;
        }
        last = Some(n);
    }
    let Some(top) = last else {
        return Err(QError::Coverage(format!(
            "{what}: grid [{lo}, {hi}] is too shallow for the series to reach series_tol"
        )));
    };
    let grid = LatticeGrid::new(params, lo, top)?;
    let mut out = LatticeFunction::zeros(grid);
    let alpha = params.alpha();
    for n in grid.indices() {
        let s = params.lat(n);
        let terms = w.len().min((hi - n + 1) as usize);
        let acc: C64 = (0..terms).map(|m| g.at(Sign::Pos, n + m as i64) * w[m]).sum();
        let scale = if nu.fract() == 0.0 { (alpha * s).powi(nu as i32) } else { (alpha * s).powf(nu) };
        out.set(Sign::Pos, n, acc * scale);
    }
    Ok(out)
}

fn check_positive_support(g: &LatticeFunction) -> QResult<()> {
    if g.branch(Sign::Neg).iter().any(|v| *v != C64::new(0.0, 0.0)) {
        return Err(QError::Domain("fractional operators need data on the positive branch only".into()));
    }
    Ok(())
}

/// ∂^{−ν}g on the positive branch. Each site sums every sample below it;
/// sites whose omitted tail could exceed series_tol are dropped from the
/// deep end. For ν = −k the sum has k + 1 terms and the window loses k
/// points.
pub fn frac_apply(g: &LatticeFunction, nu: f64) -> QResult<LatticeFunction> {
    FracOrder::new(nu)?;
    let w = frac_weights(nu, g.grid.len() + 1, &g.grid.params)?;
    lattice_series(g, &w, nu, &format!("order {nu}"))
}

/// Jackson primitive (1−q²)s Σ q^{2m} g(q^{2m}s), on the window frac_apply(g, 1) uses.
pub fn jackson_primitive(g: &LatticeFunction) -> QResult<LatticeFunction> {
    let params = g.grid.params;
    let w: Vec<f64> = (0..=g.grid.len()).map(|m| params.lat(m as i64)).collect();
    lattice_series(g, &w, 1.0, "primitive")
}

/// max|a − b| / max|b| over the shared window of two positive-branch functions.
pub fn relative_sup_difference(a: &LatticeFunction, b: &LatticeFunction) -> QResult<f64> {
    let grid = a.grid.intersect(&b.grid)?;
    let mut diff = 0.0f64;
    let mut scale = 0.0f64;
    for m in grid.indices() {
        let bv = b.at(Sign::Pos, m);
        diff = diff.max((a.at(Sign::Pos, m) - bv).norm());
        scale = scale.max(bv.norm());
    }
    if scale == 0.0 {
        return Ok(diff);
    }
    Ok(diff / scale)
}

/// ∂^{−μ}∂^{−ν}g against ∂^{−ν−μ}g, relative to the sup of the latter.
pub fn frac_semigroup_residual(g: &LatticeFunction, nu: f64, mu: f64) -> QResult<f64> {
    let lhs = frac_apply(&frac_apply(g, nu)?, mu)?;
    let rhs = frac_apply(g, nu + mu)?;
    relative_sup_difference(&lhs, &rhs)
}

/// Largest |Σ_l q^{2νl}[k,l](q^{2μ};q²)_l(q^{2ν};q²)_{k−l} − (q^{2μ+2ν};q²)_k| over k ≤ k_max,
/// relative to the size of the largest term (the sum cancels heavily for ν < 0).
pub fn q_vandermonde_residual(nu: f64, mu: f64, k_max: usize, params: &QParams) -> QResult<f64> {
    let p = params.p();
    let (a, b) = (C64::new(p.powf(mu), 0.0), C64::new(p.powf(nu), 0.0));
    let mut worst = 0.0f64;
    for k in 0..=k_max {
        let mut lhs = C64::new(0.0, 0.0);
        let mut scale = 1.0f64;
        for l in 0..=k {
            let pa = q_pochhammer(a, Order::Finite(l), params)?;
            let pb = q_pochhammer(b, Order::Finite(k - l), params)?;
            let term = pa * pb * p.powf(nu * l as f64) * q_binomial(k as i64, l as i64, params);
            scale = scale.max(term.norm());
            lhs += term;
        }
        let rhs = q_pochhammer(a * b, Order::Finite(k), params)?;
        worst = worst.max((lhs - rhs).norm() / scale.max(rhs.norm()));
    }
    Ok(worst)
}

/// The q-Vandermonde sum holds exactly in the symbolic engine and to 1e−12
/// at the given (ν, μ) for every k ≤ k_max.
pub fn q_vandermonde_check(nu: f64, mu: f64, k_max: usize, params: &QParams) -> QResult<bool> {
    if k_max < 1 {
        return Err(QError::Domain("k_max must be at least 1".into()));
    }
    let exact = (0..=k_max as i64).all(vandermonde_symbolic);
    Ok(exact && q_vandermonde_residual(nu, mu, k_max, params)? < 1e-12)
}

/// Taylor coefficients ψ^{(l)}(0)/l! for l ≤ n, read from lattice
/// q-derivatives on the positive branch.
///
/// ∂^lψ(q^{2m}) = Σ_j b_j q^{2mj}, so extrapolating along m with the factors
/// q^{2j} removes one power per level (Richardson on geometric nodes). Deep
/// nodes carry rounding of order ε/s^l, so the start depth and the number of
/// levels are picked where successive diagonal entries agree best. Then
/// ψ^{(l)}(0)/l! = (1−q²)^l ∂^lψ(0)/(q²;q²)_l.
pub fn taylor_jet(psi: &LatticeFunction, n: usize) -> QResult<Vec<C64>> {
    let params = psi.grid.params;
    let mut out = Vec::with_capacity(n + 1);
    for l in 0..=n {
        let d = q_derivative(psi, l)?;
        let (lo, hi) = (d.grid.m_min.max(0), d.grid.m_max);
        if hi < lo + 1 {
            return Err(QError::Coverage(format!("no room below s=1 for a order-{l} jet")));
        }
        let scale = psi.branch_sup(Sign::Pos);
        let at_zero = richardson_at_zero(&d, l, scale, lo, hi, &params);
        out.push(at_zero * params.alpha().powi(l as i32) / qfact(l, &params));
    }
    Ok(out)
}

/// Most stable diagonal entry of the extrapolation tables started at each
/// depth in [lo, hi). The error of an entry is the change from the previous
/// diagonal plus the rounding carried by its deepest node, about
/// ε·2^l·sup|ψ| / ((1−q²)s)^l / (q²;q²)_l.
fn richardson_at_zero(d: &LatticeFunction, l: usize, scale: f64, lo: i64, hi: i64, params: &QParams) -> C64 {
    const LEVELS: usize = 10;
    let p = params.p();
    let rounding = |m: i64| {
        f64::EPSILON * 2f64.powi(l as i32) * scale / (params.alpha() * params.lat(m)).powi(l as i32) / qfact(l, params)
    };
    let mut best = (f64::INFINITY, d.at(Sign::Pos, hi));
    for m0 in lo..hi {
        let nodes: Vec<C64> = (m0..=hi.min(m0 + LEVELS as i64)).map(|m| d.at(Sign::Pos, m)).collect();
        // row holds T_{i,j} for the current j, i ≥ j
        let mut row = nodes.clone();
        let mut prev_diag = row[0];
        for j in 1..nodes.len() {
            let pj = p.powi(j as i32);
            for i in (j..nodes.len()).rev() {
                row[i] = (row[i] - row[i - 1] * pj) / (1.0 - pj);
            }
            let diag = row[j];
            let err = (diag - prev_diag).norm() + rounding(m0 + j as i64);
            if err < best.0 {
                best = (err, diag);
            }
            prev_diag = diag;
        }
    }
    best.1
}

/// The regularized pairing ⟨s₊^{ν−1}, ψ⟩:
///
///   ∫₀¹ s^{ν−1}[ψ(s) − Σ_{k≤n} ψ^{(k)}(0)s^k/k!] + ∫₁^∞ s^{ν−1}ψ(s)
///     + (1−q²) Σ_{k≤n} ψ^{(k)}(0)/(k!(1−q^{2(ν+k)})),
///
/// all integrals in the Jackson sense on the positive branch of the grid.
///
/// The subtracted sum stops at q^{2M} = ε^{1/(n+1)}: below that the
/// remainder ψ − jet is O(s^{n+1}) and under rounding, while each sample
/// carries an absolute rounding error ε that s^ν would amplify for ν < 0.
pub fn splus_pairing(nu: f64, psi: &LatticeFunction, n_reg: usize) -> QResult<C64> {
    let order = FracOrder::new(nu)?;
    if n_reg > MAX_JET_ORDER {
        return Err(QError::Domain(format!("jet order {n_reg} exceeds {MAX_JET_ORDER}")));
    }
    if nu <= -(n_reg as f64) - 1.0 {
        return Err(QError::Domain(format!("nu={nu} needs a jet of order above {n_reg}")));
    }
    if let Some(k) = order.pole_index() {
        return Err(QError::Pole(format!("s_+^(nu-1) has a pole at nu=-{k}")));
    }
    let g = psi.grid;
    if g.m_min > 0 || g.m_max < 0 {
        return Err(QError::Coverage(format!("grid [{}, {}] must contain s=1", g.m_min, g.m_max)));
    }
    let params = g.params;
    let p = params.p();
    let alpha = params.alpha();
    let jet = taylor_jet(psi, n_reg)?;
    let cut = (f64::EPSILON.ln() / ((n_reg + 1) as f64 * p.ln())).ceil() as i64;
    let mut acc = C64::new(0.0, 0.0);
    for m in g.m_min..=g.m_max.min(cut) {
        let s = params.lat(m);
        let mut v = psi.at(Sign::Pos, m);
        if m >= 0 {
            v -= jet.iter().enumerate().map(|(k, c)| c * s.powi(k as i32)).sum::<C64>();
        }
        acc += v * s.powf(nu);
    }
    acc *= alpha;
    for (k, c) in jet.iter().enumerate() {
        acc += c * alpha / (1.0 - p.powf(nu + k as f64));
    }
    Ok(acc)
}

/// ε · 2ln(1/q) · ⟨s₊^{ν−1}, ψ⟩ at ν = −k + ε. The factor 2ln(1/q) turns
/// 1 − q^{2(ν+k)} into ν + k, so this tends to the residue as ε → 0.
pub fn splus_residue_probe(k: usize, eps: f64, psi: &LatticeFunction) -> QResult<C64> {
    let params = psi.grid.params;
    let pairing = splus_pairing(-(k as f64) + eps, psi, k)?;
    Ok(pairing * eps * 2.0 * (1.0 / params.q).ln())
}

/// The residue of s₊^{ν−1} at ν = −k paired with ψ, written as
/// (−1)^k q^{k(k+1)}(1−q²)^{k+1}/(q²;q²)_k · ⟨∂^kδ, ψ⟩, where
/// ⟨∂^kδ, ψ⟩ = (−1)^k q^{−k(k+1)} ∂^kψ(0).
pub fn splus_residue(k: usize, d_k_at_zero: C64, params: &QParams) -> C64 {
    let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    let delta_k = d_k_at_zero * sign * params.q.powi(-((k * (k + 1)) as i32));
    delta_k * gamma_q2_residue(k, params)
}

/// |2Θ₀ A_ν A_μ / A_{ν+μ} − 1|.
pub fn addition_theorem_residual(nu: f64, mu: f64, params: &QParams) -> QResult<f64> {
    for (name, v) in [("nu", nu), ("mu", mu), ("nu+mu", nu + mu)] {
        if !(v > 0.0 && v < 1.0) {
            return Err(QError::Domain(format!("{name}={v} must lie in (0, 1)")));
        }
    }
    let ratio = a_nu(nu, params)? * a_nu(mu, params)? * 2.0 * theta0(params)? / a_nu(nu + mu, params)?;
    Ok((ratio - 1.0).norm())
}
