//! Scalar q-special functions in base q².
//!
//! Every routine takes the deformation parameter `q` through [`QParams`] and
//! works with `p = q²` internally. Infinite products are truncated once the
//! next factor differs from 1 by less than `series_tol`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{QError, QResult};

pub type C64 = Complex64;

/// Beyond this modulus [`kernel_phi01`] switches from the power series to the
/// product, which does not suffer from cancellation.
pub const KERNEL_SERIES_RADIUS: f64 = 16.0;

/// Deformation parameter plus the numerical policy shared by all modules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QParams {
    pub q: f64,
    pub series_tol: f64,
    pub max_terms: usize,
    pub sum_halfwidth: i64,
}

impl QParams {
    pub fn new(q: f64) -> QResult<Self> {
        Self::with_policy(q, 1e-14, 512, 64)
    }

    pub fn with_policy(q: f64, series_tol: f64, max_terms: usize, sum_halfwidth: i64) -> QResult<Self> {
        if !q.is_finite() || q <= 0.0 || q >= 1.0 {
            return Err(QError::Domain(format!("q out of range: {q} (need 0 < q < 1)")));
        }
        if !series_tol.is_finite() || series_tol <= 0.0 {
            return Err(QError::Domain(format!("series_tol must be positive, got {series_tol}")));
        }
        if max_terms < 1 {
            return Err(QError::Domain("max_terms must be at least 1".into()));
        }
        if sum_halfwidth < 1 {
            return Err(QError::Domain("sum_halfwidth must be at least 1".into()));
        }
        Ok(QParams { q, series_tol, max_terms, sum_halfwidth })
    }

    /// The base of every series, q².
    #[inline]
    pub fn p(&self) -> f64 {
        self.q * self.q
    }

    /// 1 − q², the lattice measure factor.
    #[inline]
    pub fn alpha(&self) -> f64 {
        1.0 - self.q * self.q
    }

    /// q^{2m} for any integer m.
    #[inline]
    pub fn lat(&self, m: i64) -> f64 {
        self.p().powi(m as i32)
    }
}

/// Length of a q-Pochhammer product.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    Finite(usize),
    Infinite,
}

fn check_finite(z: C64, what: &str) -> QResult<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(QError::Domain(format!("{what}: non-finite argument {z}")))
    }
}

/// (a; q²)_n = Π_{k<n} (1 − a q^{2k}).
pub fn q_pochhammer(a: C64, n: Order, params: &QParams) -> QResult<C64> {
    check_finite(a, "q_pochhammer")?;
    let p = params.p();
    match n {
        Order::Finite(n) => {
            let mut acc = C64::new(1.0, 0.0);
            let mut pk = 1.0;
            for _ in 0..n {
                acc *= C64::new(1.0, 0.0) - a * pk;
                pk *= p;
            }
            Ok(acc)
        }
        Order::Infinite => {
            let mut acc = C64::new(1.0, 0.0);
            let mut pk = 1.0;
            for _ in 0..params.max_terms {
                let w = a * pk;
                if w.norm() < params.series_tol {
                    return finite_or_range(acc, "q_pochhammer");
                }
                acc *= C64::new(1.0, 0.0) - w;
                pk *= p;
            }
            Err(QError::Convergence(format!(
                "(a;q^2)_inf with |a|={} needs more than {} factors",
                a.norm(),
                params.max_terms
            )))
        }
    }
}

fn finite_or_range(z: C64, what: &str) -> QResult<C64> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(QError::Range { m: 0, n: 0, detail: format!("{what} overflowed f64") })
    }
}

/// ln(1 − w) with a short series near w = 0.
fn ln_one_minus(w: C64) -> C64 {
    if w.norm() < 1e-3 {
        let mut acc = C64::new(0.0, 0.0);
        let mut wk = w;
        for k in 1..=6 {
            acc -= wk / k as f64;
            wk *= w;
        }
        acc
    } else {
        (C64::new(1.0, 0.0) - w).ln()
    }
}

/// Σ_k ln(1 − a q^{2k}): a logarithm of (a; q²)_∞, usable where the product
/// itself would overflow. The imaginary part is not reduced modulo 2π.
pub fn log_q_pochhammer_inf(a: C64, params: &QParams) -> QResult<C64> {
    check_finite(a, "log_q_pochhammer_inf")?;
    let p = params.p();
    let mut acc = C64::new(0.0, 0.0);
    let mut pk = 1.0;
    for _ in 0..params.max_terms {
        let w = a * pk;
        if w.norm() < params.series_tol {
            return Ok(acc);
        }
        if (C64::new(1.0, 0.0) - w).norm() == 0.0 {
            return Ok(C64::new(f64::NEG_INFINITY, 0.0));
        }
        acc += ln_one_minus(w);
        pk *= p;
    }
    Err(QError::Convergence(format!(
        "log (a;q^2)_inf with |a|={} needs more than {} factors",
        a.norm(),
        params.max_terms
    )))
}

/// Gaussian binomial [l, i] in base q², evaluated numerically.
pub fn q_binomial(l: i64, i: i64, params: &QParams) -> f64 {
    if l < 0 || i < 0 || i > l {
        return 0.0;
    }
    let p = params.p();
    let i = i.min(l - i);
    let mut acc = 1.0;
    for j in 0..i {
        acc *= (1.0 - p.powi((l - j) as i32)) / (1.0 - p.powi((j + 1) as i32));
    }
    acc
}

/// (q²; q²)_n as a real number.
pub fn qfact(n: usize, params: &QParams) -> f64 {
    let p = params.p();
    let mut acc = 1.0;
    let mut pk = p;
    for _ in 0..n {
        acc *= 1.0 - pk;
        pk *= p;
    }
    acc
}

/// e_{q²}(z) = 1/(z; q²)_∞.
pub fn e_q2(z: C64, params: &QParams) -> QResult<C64> {
    check_finite(z, "e_q2")?;
    let p = params.p();
    let mut pk = 1.0;
    for k in 0..params.max_terms {
        let w = z * pk;
        if w.norm() < params.series_tol {
            break;
        }
        if (C64::new(1.0, 0.0) - w).norm() < params.series_tol {
            return Err(QError::Pole(format!("e_q2 at z={z}: factor {k} vanishes")));
        }
        pk *= p;
    }
    let prod = q_pochhammer(z, Order::Infinite, params)?;
    finite_or_range(prod.inv(), "e_q2")
}

/// E_{q²}(z) = (−z; q²)_∞, an entire function.
pub fn big_e_q2(z: C64, params: &QParams) -> QResult<C64> {
    q_pochhammer(-z, Order::Infinite, params)
}

/// ln E_{q²}(z), finite unless z sits on a zero −q^{−2k}.
pub fn log_big_e_q2(z: C64, params: &QParams) -> QResult<C64> {
    log_q_pochhammer_inf(-z, params)
}

/// ln e_{q²}(z) = −ln (z; q²)_∞.
pub fn log_e_q2(z: C64, params: &QParams) -> QResult<C64> {
    let l = log_q_pochhammer_inf(z, params)?;
    if l.re == f64::NEG_INFINITY {
        return Err(QError::Pole(format!("e_q2 at z={z}")));
    }
    Ok(-l)
}

/// Power-series form Σ q^{n(n−1)} zⁿ/(q²;q²)_n of E_{q²}, kept as an oracle.
pub fn big_e_q2_series(z: C64, params: &QParams) -> QResult<C64> {
    check_finite(z, "big_e_q2_series")?;
    let p = params.p();
    let mut term = C64::new(1.0, 0.0);
    let mut acc = term;
    let mut pn = 1.0; // p^n
    for n in 0..params.max_terms {
        // term_{n+1} = term_n · p^n z / (1 − p^{n+1})
        term = term * z * pn / (1.0 - pn * p);
        acc += term;
        pn *= p;
        if term.norm() < params.series_tol && (z * pn).norm() < 0.5 {
            return finite_or_range(acc, "big_e_q2_series");
        }
        if n + 1 == params.max_terms {
            break;
        }
    }
    Err(QError::Convergence(format!("E_q2 series at z={z} did not settle")))
}

/// The ₀Φ₁(−; 0; q², x) kernel of the forward transform. Numerically it
/// coincides with E_{q²}(x); the series is summed for |x| ≤
/// [`KERNEL_SERIES_RADIUS`] and the product is used beyond.
pub fn kernel_phi01(x: C64, params: &QParams) -> QResult<C64> {
    if x.norm() <= KERNEL_SERIES_RADIUS {
        big_e_q2_series(x, params)
    } else {
        big_e_q2(x, params)
    }
}

/// Sums f(m) over a symmetric window, widening it past `sum_halfwidth` until
/// both end terms fall below `series_tol` (capped by `max_terms`).
fn bilateral_sum<F>(params: &QParams, what: &str, f: F) -> QResult<C64>
where
    F: Fn(i64) -> C64,
{
    let mut acc = f(0);
    let hard_cap = params.max_terms.max(params.sum_halfwidth as usize) as i64;
    let mut m = 1i64;
    loop {
        let a = f(m);
        let b = f(-m);
        acc += a + b;
        let small = a.norm() < params.series_tol && b.norm() < params.series_tol;
        if m >= params.sum_halfwidth && small {
            return Ok(acc);
        }
        if m >= hard_cap {
            return Err(QError::Convergence(format!(
                "{what}: tail still above {} at |m|={m}",
                params.series_tol
            )));
        }
        m += 1;
    }
}

/// Q(z, q) = (1 − q²) Σ_m 1/(z q^{2m} + z^{−1} q^{−2m}) for real z > 0.
pub fn q_series_q(z: f64, params: &QParams) -> QResult<f64> {
    if !z.is_finite() || z <= 0.0 {
        return Err(QError::Domain(format!("Q(z,q) needs z > 0, got {z}")));
    }
    let p = params.p();
    let alpha = params.alpha();
    let s = bilateral_sum(params, "Q(z,q)", |m| {
        let n = m.unsigned_abs() as i32;
        let pn = p.powi(n);
        // divide through by the dominant power so nothing overflows
        let v = if m >= 0 { pn / (z * pn * pn + 1.0 / z) } else { pn / (z + pn * pn / z) };
        C64::new(v, 0.0)
    })?;
    Ok(alpha * s.re)
}

/// Θ₀ = Q(1 − q², q), the normalisation of the inverse transform.
pub fn theta0(params: &QParams) -> QResult<f64> {
    q_series_q(params.alpha(), params)
}

fn near_nonpositive_integer(nu: C64, tol: f64) -> Option<i64> {
    if nu.im.abs() > tol || nu.re > tol {
        return None;
    }
    let k = (-nu.re).round();
    if (nu.re + k).abs() <= tol.max(1e-12) {
        Some(k as i64)
    } else {
        None
    }
}

/// Γ_{q²}(ν) = (q²;q²)_∞ / (q^{2ν};q²)_∞ · (1 − q²)^{1−ν}, principal branch.
pub fn gamma_q2(nu: C64, params: &QParams) -> QResult<C64> {
    check_finite(nu, "gamma_q2")?;
    if let Some(k) = near_nonpositive_integer(nu, params.series_tol) {
        return Err(QError::Pole(format!("gamma_q2 has a pole at nu=-{k}")));
    }
    let lnp = params.p().ln();
    let p_nu = (nu * lnp).exp();
    let num = q_pochhammer(C64::new(params.p(), 0.0), Order::Infinite, params)?;
    let den = q_pochhammer(p_nu, Order::Infinite, params)?;
    if den.norm() < params.series_tol {
        return Err(QError::Pole(format!("gamma_q2 denominator vanishes at nu={nu}")));
    }
    let pow = ((C64::new(1.0, 0.0) - nu) * params.alpha().ln()).exp();
    finite_or_range(num / den * pow, "gamma_q2")
}

/// The residue of Γ_{q²} at ν = −k in closed form: (−1)^k q^{k(k+1)} (1−q²)^{k+1}/(q²;q²)_k.
pub fn gamma_q2_residue(k: usize, params: &QParams) -> f64 {
    let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * params.q.powi((k * (k + 1)) as i32) * params.alpha().powi(k as i32 + 1) / qfact(k, params)
}

/// Ratio between ε·2ln(1/q)·Γ_{q²}(−k+ε) and the closed-form residue. The
/// factor 2ln(1/q) converts the vanishing factor 1 − q^{2(ν+k)} into ν + k.
pub fn gamma_q2_residue_ratio(k: usize, eps: f64, params: &QParams) -> QResult<f64> {
    let g = gamma_q2(C64::new(-(k as f64) + eps, 0.0), params)?;
    let scale = eps * 2.0 * (1.0 / params.q).ln();
    Ok((g * scale).re / gamma_q2_residue(k, params))
}

/// c_ν = Σ_m (q^{−2νm} + i(1−q²)q^{2(1−ν)m}) / ((1−q²)^{−1}q^{−2m} + (1−q²)q^{2m}).
pub fn c_nu(nu: f64, params: &QParams) -> QResult<C64> {
    if !(nu > 0.0 && nu < 1.0) {
        return Err(QError::Domain(format!(
            "c_nu: the bilateral series diverges unless 0 < nu < 1 (nu={nu})"
        )));
    }
    let p = params.p();
    let alpha = params.alpha();
    bilateral_sum(params, "c_nu", |m| {
        let n = m.unsigned_abs() as f64;
        if m >= 0 {
            let num = C64::new(p.powf((1.0 - nu) * n), alpha * p.powf((2.0 - nu) * n));
            num / (1.0 / alpha + alpha * p.powf(2.0 * n))
        } else {
            let num = C64::new(p.powf((1.0 + nu) * n), alpha * p.powf(nu * n));
            num / (p.powf(2.0 * n) / alpha + alpha)
        }
    })
}

/// A_ν = c_ν (1−q²)^{ν−1} / (c_ν² − c̄_ν²).
pub fn a_nu(nu: f64, params: &QParams) -> QResult<C64> {
    let c = c_nu(nu, params)?;
    let den = c * c - c.conj() * c.conj();
    if den.norm() < params.series_tol {
        return Err(QError::Degenerate(format!("c_nu^2 - conj(c_nu)^2 = {den} at nu={nu}")));
    }
    Ok(c * params.alpha().powf(nu - 1.0) / den)
}
