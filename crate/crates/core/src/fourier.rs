//! The q²-Fourier pair on lattice functions.
//!
//! Both kernels depend on z and s only through zs = ±q^{2(m+n)}, so each
//! transform evaluates one logarithmic kernel value per diagonal m+n and
//! reuses it. Terms are combined in log-modulus form: a kernel that would
//! overflow on its own is fine as long as the product with the sample is
//! representable.
//!
//! The inverse kernel defaults to e_{q²}(−i(1−q²)zs). With that kernel the
//! commutation relations of the inverse transform hold exactly and the
//! orthogonality sum at z = 1 is a closed form; E_{q²}(−i(1−q²)zs) is kept
//! as [`InverseKernel::Literal`] for comparison.

use serde::Serialize;

use crate::error::{QError, QResult};
use crate::lattice::{LatticeFunction, LatticeGrid, Sign};
use crate::qcore::{kernel_phi01, log_big_e_q2, log_e_q2, theta0, QParams, C64, KERNEL_SERIES_RADIUS};

/// exp() of anything above this overflows f64.
const LOG_MAX: f64 = 709.0;
/// exp() of anything below this is zero in f64.
const LOG_MIN: f64 = -745.0;

/// Partial sums above this modulus are left out of the ε-table: the
/// Shanks step loses about |S|·1e−16 absolutely.
pub const WYNN_GROWTH_CAP: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum InverseKernel {
    /// e_{q²}(−i(1−q²)zs)
    Reciprocal,
    /// E_{q²}(−i(1−q²)zs)
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransformPlan {
    pub z_grid: LatticeGrid,
    pub s_grid: LatticeGrid,
    pub params: QParams,
    pub inverse_kernel: InverseKernel,
}

impl TransformPlan {
    pub fn new(z_grid: LatticeGrid, s_grid: LatticeGrid) -> QResult<Self> {
        if z_grid.params.q != s_grid.params.q {
            return Err(QError::Domain(format!(
                "z and s grids use different q ({} vs {})",
                z_grid.params.q, s_grid.params.q
            )));
        }
        Ok(TransformPlan { z_grid, s_grid, params: z_grid.params, inverse_kernel: InverseKernel::Reciprocal })
    }

    /// Same window on both sides.
    pub fn square(grid: LatticeGrid) -> Self {
        TransformPlan { z_grid: grid, s_grid: grid, params: grid.params, inverse_kernel: InverseKernel::Reciprocal }
    }

    pub fn with_inverse_kernel(mut self, k: InverseKernel) -> Self {
        self.inverse_kernel = k;
        self
    }
}

/// A transform together with its conditioning data.
#[derive(Debug, Clone)]
pub struct TransformOutput {
    pub values: LatticeFunction,
    /// Σ|term| per output site (real part). Rounding in a value is about
    /// 1e−16 times this.
    pub abs_sum: LatticeFunction,
    /// Smallest and largest input index that contributed a nonzero term.
    pub used: Option<(i64, i64)>,
}

impl TransformOutput {
    /// |value| / Σ|term| at one site; tiny ratios mean heavy cancellation.
    pub fn retained(&self, sign: Sign, m: i64) -> f64 {
        let a = self.abs_sum.at(sign, m).re;
        if a == 0.0 {
            1.0
        } else {
            self.values.at(sign, m).norm() / a
        }
    }
}

/// Log-kernel values indexed by (sign of zs, m+n).
struct KernelTable {
    d_min: i64,
    pos: Vec<C64>,
    neg: Vec<C64>,
}

impl KernelTable {
    fn build(d_min: i64, d_max: i64, f: impl Fn(f64, i64) -> QResult<C64>) -> QResult<Self> {
        let mut pos = Vec::with_capacity((d_max - d_min + 1) as usize);
        let mut neg = Vec::with_capacity(pos.capacity());
        for d in d_min..=d_max {
            pos.push(f(1.0, d)?);
            neg.push(f(-1.0, d)?);
        }
        Ok(KernelTable { d_min, pos, neg })
    }

    fn get(&self, sign: f64, d: i64) -> C64 {
        let i = (d - self.d_min) as usize;
        if sign > 0.0 {
            self.pos[i]
        } else {
            self.neg[i]
        }
    }
}

fn log_forward_kernel(x: C64, params: &QParams) -> QResult<C64> {
    if x.norm() <= KERNEL_SERIES_RADIUS {
        Ok(kernel_phi01(x, params)?.ln())
    } else {
        log_big_e_q2(x, params)
    }
}

/// out(σ', n) = pref · Σ_{σ,m} q^{2m} f(σ, m) · exp(L(σσ', m+n)).
fn lattice_transform(
    f: &LatticeFunction,
    out_grid: LatticeGrid,
    pref: f64,
    table: &KernelTable,
    swap_indices: bool,
) -> QResult<TransformOutput> {
    let params = f.grid.params;
    let mut values = LatticeFunction::zeros(out_grid);
    let mut abs_sum = LatticeFunction::zeros(out_grid);
    let mut used: Option<(i64, i64)> = None;
    for so in Sign::BOTH {
        for n in out_grid.indices() {
            let mut acc = C64::new(0.0, 0.0);
            let mut mass = 0.0;
            let mut biggest = (0.0f64, 0i64);
            for si in Sign::BOTH {
                for m in f.grid.indices() {
                    let v = f.at(si, m);
                    if v.re == 0.0 && v.im == 0.0 {
                        continue;
                    }
                    let lk = table.get(si.value() * so.value(), m + n);
                    let lmod = lk.re + v.norm().ln() + pref.ln() + params.lat(m).ln();
                    if lmod > LOG_MAX || lmod.is_nan() {
                        let (mm, nn) = if swap_indices { (n, m) } else { (m, n) };
                        return Err(QError::Range {
                            m: mm,
                            n: nn,
                            detail: format!("kernel term of modulus e^{lmod:.0} overflows"),
                        });
                    }
                    if lmod < LOG_MIN {
                        continue;
                    }
                    let term = v * (lk + C64::new(pref.ln() + params.lat(m).ln(), 0.0)).exp();
                    acc += term;
                    mass += term.norm();
                    if term.norm() > biggest.0 {
                        biggest = (term.norm(), m);
                    }
                    used = Some(match used {
                        None => (m, m),
                        Some((a, b)) => (a.min(m), b.max(m)),
                    });
                }
            }
            if !(acc.re.is_finite() && acc.im.is_finite() && mass.is_finite()) {
                let (mm, nn) = if swap_indices { (n, biggest.1) } else { (biggest.1, n) };
                return Err(QError::Range { m: mm, n: nn, detail: "sum of kernel terms overflows".into() });
            }
            values.set(so, n, acc);
            abs_sum.set(so, n, C64::new(mass, 0.0));
        }
    }
    Ok(TransformOutput { values, abs_sum, used })
}

/// ψ(s) = (1−q²) Σ_z |z| φ(z) ₀Φ₁(−;0;q², i(1−q²)q²zs) on the s-grid.
pub fn fourier_forward_detailed(phi: &LatticeFunction, plan: &TransformPlan) -> QResult<TransformOutput> {
    check_grid(phi, plan.z_grid, "fourier_forward")?;
    let params = plan.params;
    let (a, p) = (params.alpha(), params.p());
    let table = KernelTable::build(plan.z_grid.m_min + plan.s_grid.m_min, plan.z_grid.m_max + plan.s_grid.m_max, |sg, d| {
        log_forward_kernel(C64::new(0.0, a * p * sg * params.lat(d)), &params)
    })?;
    lattice_transform(phi, plan.s_grid, a, &table, false)
}

pub fn fourier_forward(phi: &LatticeFunction, plan: &TransformPlan) -> QResult<LatticeFunction> {
    Ok(fourier_forward_detailed(phi, plan)?.values)
}

/// φ(z) = (1/2Θ₀)(1−q²) Σ_s |s| ψ(s) K(−i(1−q²)zs) on the z-grid.
pub fn fourier_inverse_detailed(psi: &LatticeFunction, plan: &TransformPlan) -> QResult<TransformOutput> {
    check_grid(psi, plan.s_grid, "fourier_inverse")?;
    let params = plan.params;
    let a = params.alpha();
    let th = theta0(&params)?;
    let kind = plan.inverse_kernel;
    let table = KernelTable::build(plan.z_grid.m_min + plan.s_grid.m_min, plan.z_grid.m_max + plan.s_grid.m_max, |sg, d| {
        let x = C64::new(0.0, -a * sg * params.lat(d));
        match kind {
            InverseKernel::Reciprocal => log_e_q2(x, &params),
            InverseKernel::Literal => log_big_e_q2(x, &params),
        }
    })?;
    lattice_transform(psi, plan.z_grid, a / (2.0 * th), &table, true)
}

pub fn fourier_inverse(psi: &LatticeFunction, plan: &TransformPlan) -> QResult<LatticeFunction> {
    Ok(fourier_inverse_detailed(psi, plan)?.values)
}

/// h(z) = ∫ r(ξ) ₀Φ₁(−;0;q², −i(1−q²)q²zξ) d_{q²}ξ, the inverse transform
/// on the distribution side. `r` lives on the s-grid, h on the z-grid.
pub fn dual_inverse(r: &LatticeFunction, plan: &TransformPlan) -> QResult<LatticeFunction> {
    check_grid(r, plan.s_grid, "dual_inverse")?;
    let params = plan.params;
    let (a, p) = (params.alpha(), params.p());
    let table = KernelTable::build(plan.z_grid.m_min + plan.s_grid.m_min, plan.z_grid.m_max + plan.s_grid.m_max, |sg, d| {
        log_forward_kernel(C64::new(0.0, -a * p * sg * params.lat(d)), &params)
    })?;
    Ok(lattice_transform(r, plan.z_grid, a, &table, true)?.values)
}

fn check_grid(f: &LatticeFunction, g: LatticeGrid, what: &str) -> QResult<()> {
    if f.grid.m_min != g.m_min || f.grid.m_max != g.m_max || f.grid.params.q != g.params.q {
        return Err(QError::Size(format!(
            "{what}: input window [{}, {}] does not match plan window [{}, {}]",
            f.grid.m_min, f.grid.m_max, g.m_min, g.m_max
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Regularized {
    pub value: C64,
    pub error_estimate: f64,
}

/// Wynn's ε-algorithm. Returns the even-column entry whose last two
/// entries agree best, with that difference as the error estimate.
pub fn wynn_epsilon(partial_sums: &[C64]) -> Option<Regularized> {
    let n = partial_sums.len();
    if n == 0 {
        return None;
    }
    let mut best = Regularized {
        value: partial_sums[n - 1],
        error_estimate: if n >= 2 { (partial_sums[n - 1] - partial_sums[n - 2]).norm() } else { f64::INFINITY },
    };
    let mut prev: Vec<C64> = vec![C64::new(0.0, 0.0); n + 1];
    let mut cur: Vec<C64> = partial_sums.to_vec();
    let mut col = 0usize;
    while cur.len() >= 2 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for i in 0..cur.len() - 1 {
            let d = cur[i + 1] - cur[i];
            if d.norm() == 0.0 || !d.re.is_finite() || !d.im.is_finite() {
                // the column has converged exactly; deeper columns are noise
                return Some(best);
            }
            next.push(prev[i + 1] + d.inv());
        }
        prev = cur;
        cur = next;
        col += 1;
        if col.is_multiple_of(2) && cur.len() >= 2 {
            let k = cur.len();
            let err = (cur[k - 1] - cur[k - 2]).norm();
            if err.is_finite() && err < best.error_estimate {
                best = Regularized { value: cur[k - 1], error_estimate: err };
            }
        }
    }
    Some(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrthogonalitySum {
    /// Plain Jackson sum over the whole s-grid.
    pub raw: C64,
    /// Wynn-regularized value of the partial sums taken from small |s|
    /// outward.
    pub regularized: C64,
    pub error_estimate: f64,
    /// Partial sums fed to the ε-table.
    pub terms_used: usize,
}

/// Jackson sum over s of K(−i(1−q²)zs)·E_{q²}(i(1−q²)q²s), where K is the
/// plan's inverse kernel. The sum need not converge for z ≠ 1, so the
/// partial sums from m_max toward m_min are also regularized.
pub fn orthogonality_sum(z: C64, plan: &TransformPlan) -> QResult<OrthogonalitySum> {
    let params = plan.params;
    let (a, p) = (params.alpha(), params.p());
    let g = plan.s_grid;
    let integrand = |s: f64| -> QResult<C64> {
        let x = C64::new(0.0, -a) * z * s;
        let lk = match plan.inverse_kernel {
            InverseKernel::Reciprocal => log_e_q2(x, &params)?,
            InverseKernel::Literal => log_big_e_q2(x, &params)?,
        };
        let le = log_big_e_q2(C64::new(0.0, a * p * s), &params)?;
        Ok((lk + le).exp())
    };
    let mut partial = Vec::with_capacity(g.len());
    let mut acc = C64::new(0.0, 0.0);
    let mut capped = false;
    for m in g.indices().rev() {
        let w = params.lat(m);
        acc += (integrand(w)? + integrand(-w)?) * (a * w);
        if !capped && acc.norm() <= WYNN_GROWTH_CAP {
            partial.push(acc);
        } else {
            capped = true;
        }
    }
    let reg = wynn_epsilon(&partial).unwrap_or(Regularized { value: acc, error_estimate: f64::INFINITY });
    Ok(OrthogonalitySum { raw: acc, regularized: reg.value, error_estimate: reg.error_estimate, terms_used: partial.len() })
}

/// The value the orthogonality sum takes at z = 1: 2Θ₀/(1−q²).
pub fn orthogonality_scale(params: &QParams) -> QResult<f64> {
    Ok(2.0 * theta0(params)? / params.alpha())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan(q: f64, lo: i64, hi: i64) -> TransformPlan {
        TransformPlan::square(LatticeGrid::new(QParams::new(q).unwrap(), lo, hi).unwrap())
    }

    #[test]
    fn wynn_sums_geometric_series_exactly() {
        // Σ 2^j diverges; its Shanks value is −1
        let mut s = Vec::new();
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..8 {
            acc += C64::new(2f64.powi(j), 0.0);
            s.push(acc);
        }
        let r = wynn_epsilon(&s).unwrap();
        assert!((r.value - C64::new(-1.0, 0.0)).norm() < 1e-12, "{:?}", r);
    }

    #[test]
    fn wynn_alternating_log2() {
        let mut s = Vec::new();
        let mut acc = 0.0;
        for k in 1..=14 {
            acc += if k % 2 == 1 { 1.0 } else { -1.0 } / k as f64;
            s.push(C64::new(acc, 0.0));
        }
        let r = wynn_epsilon(&s).unwrap();
        assert!((r.value.re - 2f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn orthogonality_at_one_is_closed_form() {
        for q in [0.4, 0.6] {
            let pl = plan(q, -40, 60);
            let r = orthogonality_sum(C64::new(1.0, 0.0), &pl).unwrap();
            let want = orthogonality_scale(&pl.params).unwrap();
            assert!((r.raw.re - want).abs() < 1e-10 * want, "q={q}: {} vs {want}", r.raw);
        }
    }

    #[test]
    fn forward_of_real_function_is_conjugate_symmetric() {
        let pl = plan(0.5, -10, 30);
        let phi = LatticeFunction::from_fn(pl.z_grid, |z| C64::new((-z * z).exp() * (1.0 + z), 0.0));
        let psi = fourier_forward(&phi, &pl).unwrap();
        for n in -2..=30 {
            let d = psi.at(Sign::Neg, n) - psi.at(Sign::Pos, n).conj();
            assert!(d.norm() <= 1e-12 * psi.at(Sign::Pos, n).norm().max(1.0));
        }
    }

    #[test]
    fn plan_rejects_mixed_q() {
        let a = LatticeGrid::new(QParams::new(0.5).unwrap(), 0, 4).unwrap();
        let b = LatticeGrid::new(QParams::new(0.6).unwrap(), 0, 4).unwrap();
        assert!(TransformPlan::new(a, b).is_err());
    }

    #[test]
    fn overflow_names_the_pair() {
        let pl = plan(0.3, -60, 10);
        let phi = LatticeFunction::from_fn(pl.z_grid, |_| C64::new(1.0, 0.0));
        match fourier_forward(&phi, &pl) {
            Err(QError::Range { .. }) => {}
            other => panic!("expected a range error, got {other:?}"),
        }
    }
}
