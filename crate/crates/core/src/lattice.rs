//! Functions sampled on the two-branch lattice {±q^{2m} : m_min ≤ m ≤ m_max}.
//!
//! Index `m` grows toward the origin: the point q^{2m} shrinks as `m` grows.
//! Operators that consume the sample at q²z (index m+1) shrink the window
//! instead of inventing values outside it.

use std::io::{Read, Write};

use serde::Serialize;

use crate::error::{QError, QResult};
use crate::qcore::{QParams, C64};

/// Which half of the lattice a sample lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Sign {
    Pos,
    Neg,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Pos => 1.0,
            Sign::Neg => -1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Pos => Sign::Neg,
            Sign::Neg => Sign::Pos,
        }
    }

    pub const BOTH: [Sign; 2] = [Sign::Pos, Sign::Neg];
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LatticeGrid {
    pub params: QParams,
    pub m_min: i64,
    pub m_max: i64,
}

impl LatticeGrid {
    pub fn new(params: QParams, m_min: i64, m_max: i64) -> QResult<Self> {
        if m_min > m_max {
            return Err(QError::Size(format!("empty grid [{m_min}, {m_max}]")));
        }
        Ok(LatticeGrid { params, m_min, m_max })
    }

    pub fn len(&self) -> usize {
        (self.m_max - self.m_min + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, m: i64) -> bool {
        m >= self.m_min && m <= self.m_max
    }

    /// The lattice point ±q^{2m}.
    pub fn point(&self, sign: Sign, m: i64) -> f64 {
        sign.value() * self.params.lat(m)
    }

    pub fn indices(&self) -> std::ops::RangeInclusive<i64> {
        self.m_min..=self.m_max
    }

    /// The overlap of two windows.
    pub fn intersect(&self, other: &LatticeGrid) -> QResult<LatticeGrid> {
        LatticeGrid::new(self.params, self.m_min.max(other.m_min), self.m_max.min(other.m_max))
    }
}

/// The half-line indicators θ±, 1 on their own branch and 0 on the other.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HalfLineIndicator {
    pub sign: Sign,
}

impl HalfLineIndicator {
    pub fn eval(&self, x: f64) -> f64 {
        if (x > 0.0) == (self.sign == Sign::Pos) {
            1.0
        } else {
            0.0
        }
    }

    pub fn sample(&self, grid: LatticeGrid) -> LatticeFunction {
        LatticeFunction::from_fn(grid, |x| C64::new(self.eval(x), 0.0))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeFunction {
    pub grid: LatticeGrid,
    pub pos: Vec<C64>,
    pub neg: Vec<C64>,
}

impl LatticeFunction {
    pub fn zeros(grid: LatticeGrid) -> Self {
        let n = grid.len();
        LatticeFunction { grid, pos: vec![C64::new(0.0, 0.0); n], neg: vec![C64::new(0.0, 0.0); n] }
    }

    pub fn from_fn<F: Fn(f64) -> C64>(grid: LatticeGrid, f: F) -> Self {
        let pos = grid.indices().map(|m| f(grid.point(Sign::Pos, m))).collect();
        let neg = grid.indices().map(|m| f(grid.point(Sign::Neg, m))).collect();
        LatticeFunction { grid, pos, neg }
    }

    pub fn from_branches(grid: LatticeGrid, pos: Vec<C64>, neg: Vec<C64>) -> QResult<Self> {
        if pos.len() != grid.len() || neg.len() != grid.len() {
            return Err(QError::Size(format!(
                "branch lengths {}/{} do not match grid length {}",
                pos.len(),
                neg.len(),
                grid.len()
            )));
        }
        let f = LatticeFunction { grid, pos, neg };
        f.ensure_finite()?;
        Ok(f)
    }

    pub fn ensure_finite(&self) -> QResult<()> {
        for s in Sign::BOTH {
            for (i, v) in self.branch(s).iter().enumerate() {
                if !(v.re.is_finite() && v.im.is_finite()) {
                    let m = self.grid.m_min + i as i64;
                    return Err(QError::Range { m, n: 0, detail: format!("non-finite sample at sign {:?}", s) });
                }
            }
        }
        Ok(())
    }

    pub fn branch(&self, sign: Sign) -> &[C64] {
        match sign {
            Sign::Pos => &self.pos,
            Sign::Neg => &self.neg,
        }
    }

    pub fn branch_mut(&mut self, sign: Sign) -> &mut Vec<C64> {
        match sign {
            Sign::Pos => &mut self.pos,
            Sign::Neg => &mut self.neg,
        }
    }

    pub fn get(&self, sign: Sign, m: i64) -> Option<C64> {
        if self.grid.contains(m) {
            Some(self.branch(sign)[(m - self.grid.m_min) as usize])
        } else {
            None
        }
    }

    pub fn at(&self, sign: Sign, m: i64) -> C64 {
        self.get(sign, m).expect("lattice index outside grid")
    }

    pub fn set(&mut self, sign: Sign, m: i64, v: C64) {
        let i = (m - self.grid.m_min) as usize;
        self.branch_mut(sign)[i] = v;
    }

    pub fn map<F: Fn(f64, C64) -> C64>(&self, f: F) -> LatticeFunction {
        let g = self.grid;
        let mut out = LatticeFunction::zeros(g);
        for s in Sign::BOTH {
            for m in g.indices() {
                out.set(s, m, f(g.point(s, m), self.at(s, m)));
            }
        }
        out
    }

    /// Pointwise combination on the common window.
    pub fn zip<F: Fn(C64, C64) -> C64>(&self, other: &LatticeFunction, f: F) -> QResult<LatticeFunction> {
        let g = self.grid.intersect(&other.grid)?;
        let mut out = LatticeFunction::zeros(g);
        for s in Sign::BOTH {
            for m in g.indices() {
                out.set(s, m, f(self.at(s, m), other.at(s, m)));
            }
        }
        Ok(out)
    }

    pub fn restrict(&self, m_min: i64, m_max: i64) -> QResult<LatticeFunction> {
        let g = LatticeGrid::new(self.grid.params, m_min.max(self.grid.m_min), m_max.min(self.grid.m_max))?;
        let mut out = LatticeFunction::zeros(g);
        for s in Sign::BOTH {
            for m in g.indices() {
                out.set(s, m, self.at(s, m));
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: C64) -> LatticeFunction {
        self.map(|_, v| v * c)
    }

    pub fn sup_norm(&self) -> f64 {
        self.pos.iter().chain(self.neg.iter()).map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn branch_sup(&self, sign: Sign) -> f64 {
        self.branch(sign).iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Zero out one branch, e.g. to restrict to the positive half-line.
    pub fn with_branch_zeroed(&self, sign: Sign) -> LatticeFunction {
        let mut out = self.clone();
        for v in out.branch_mut(sign).iter_mut() {
            *v = C64::new(0.0, 0.0);
        }
        out
    }

    pub fn conj(&self) -> LatticeFunction {
        self.map(|_, v| v.conj())
    }
}

/// (1 − q²) Σ_m q^{2m} [f(q^{2m}) + f(−q^{2m})] over the grid window.
pub fn jackson_integral(f: &LatticeFunction) -> C64 {
    let g = f.grid;
    let alpha = g.params.alpha();
    let mut acc = C64::new(0.0, 0.0);
    for m in g.indices() {
        acc += (f.at(Sign::Pos, m) + f.at(Sign::Neg, m)) * g.params.lat(m);
    }
    acc * alpha
}

/// Σ_m q^{2m} (|f(q^{2m})| + |f(−q^{2m})|); compare across widening windows.
pub fn abs_integrable(f: &LatticeFunction) -> f64 {
    let g = f.grid;
    g.indices().map(|m| g.params.lat(m) * (f.at(Sign::Pos, m).norm() + f.at(Sign::Neg, m).norm())).sum()
}

/// k-fold q²-derivative. The output window is [m_min, m_max − k].
pub fn q_derivative(f: &LatticeFunction, k: usize) -> QResult<LatticeFunction> {
    if k == 0 {
        return Ok(f.clone());
    }
    if f.grid.len() < k + 1 {
        return Err(QError::Size(format!(
            "{k}-th q-derivative needs {} points per branch, grid has {}",
            k + 1,
            f.grid.len()
        )));
    }
    let mut cur = f.clone();
    let alpha = f.grid.params.alpha();
    for _ in 0..k {
        let g = LatticeGrid::new(cur.grid.params, cur.grid.m_min, cur.grid.m_max - 1)?;
        let mut out = LatticeFunction::zeros(g);
        for s in Sign::BOTH {
            for m in g.indices() {
                let x = g.point(s, m);
                out.set(s, m, (cur.at(s, m) - cur.at(s, m + 1)) / (alpha * x));
            }
        }
        cur = out;
    }
    Ok(cur)
}

/// Λ^p f(x) = f(q^{2p} x): value at index m is the old value at m + p.
pub fn lambda_scale(f: &LatticeFunction, p: i64) -> LatticeFunction {
    let g = LatticeGrid { params: f.grid.params, m_min: f.grid.m_min - p, m_max: f.grid.m_max - p };
    LatticeFunction { grid: g, pos: f.pos.clone(), neg: f.neg.clone() }
}

/// The telescoped value of ∫∂f over a window: the four end samples that
/// bound how far the Jackson integral of a derivative can sit from zero.
pub fn boundary_residual_bound(f: &LatticeFunction) -> f64 {
    let g = f.grid;
    let mut b = 0.0;
    for s in Sign::BOTH {
        b += f.at(s, g.m_min).norm() + f.at(s, g.m_max).norm();
    }
    b
}

/// |∫φ ∂^kψ − (−1)^k q^{−k(k−1)} ∫∂^kφ(z) ψ(q^{2k}z)| on the shared window.
pub fn integrate_by_parts_residual(phi: &LatticeFunction, psi: &LatticeFunction, k: usize) -> QResult<f64> {
    if k == 0 {
        return Ok(0.0);
    }
    let g = phi.grid.intersect(&psi.grid)?;
    let phi = phi.restrict(g.m_min, g.m_max)?;
    let psi = psi.restrict(g.m_min, g.m_max)?;
    let d_psi = q_derivative(&psi, k)?;
    let d_phi = q_derivative(&phi, k)?;
    let psi_scaled = lambda_scale(&psi, k as i64);
    let lhs = jackson_integral(&phi.zip(&d_psi, |a, b| a * b)?);
    let rhs_inner = d_phi.zip(&psi_scaled, |a, b| a * b)?;
    let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    let rhs = jackson_integral(&rhs_inner) * sign * g.params.q.powi(-((k * (k - 1)) as i32));
    Ok((lhs - rhs).norm())
}

/// max over the grid of |z^k ∂^l f(z)|.
pub fn seminorm(f: &LatticeFunction, k: i32, l: usize) -> QResult<f64> {
    let d = q_derivative(f, l)?;
    let g = d.grid;
    let mut best = 0.0f64;
    for s in Sign::BOTH {
        for m in g.indices() {
            best = best.max(g.point(s, m).abs().powi(k) * d.at(s, m).norm());
        }
    }
    Ok(best)
}

#[derive(serde::Deserialize)]
struct CsvRow {
    sign: i64,
    m: i64,
    re: f64,
    im: f64,
}

/// Reads the `sign,m,re,im` format. Every index of the window must appear
/// exactly once on each branch.
pub fn read_csv<R: Read>(reader: R, params: QParams) -> QResult<LatticeFunction> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| QError::Format(e.to_string()))?.clone();
    let expected = ["sign", "m", "re", "im"];
    if headers.len() != 4 || headers.iter().zip(expected).any(|(h, e)| h != e) {
        return Err(QError::Format(format!("expected header sign,m,re,im, got {:?}", headers)));
    }
    let mut rows = Vec::new();
    for rec in rdr.deserialize::<CsvRow>() {
        let row = rec.map_err(|e| QError::Format(e.to_string()))?;
        if row.sign != 1 && row.sign != -1 {
            return Err(QError::Format(format!("sign must be +1 or -1, got {}", row.sign)));
        }
        if !row.re.is_finite() || !row.im.is_finite() {
            return Err(QError::Format(format!("non-finite value at m={}", row.m)));
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(QError::Format("no samples".into()));
    }
    let m_min = rows.iter().map(|r| r.m).min().unwrap();
    let m_max = rows.iter().map(|r| r.m).max().unwrap();
    let grid = LatticeGrid::new(params, m_min, m_max)?;
    let n = grid.len();
    let mut seen = vec![[false; 2]; n];
    let mut f = LatticeFunction::zeros(grid);
    for r in rows {
        let (sign, slot) = if r.sign == 1 { (Sign::Pos, 0) } else { (Sign::Neg, 1) };
        let i = (r.m - m_min) as usize;
        if seen[i][slot] {
            return Err(QError::Format(format!("duplicate sample sign={} m={}", r.sign, r.m)));
        }
        seen[i][slot] = true;
        f.set(sign, r.m, C64::new(r.re, r.im));
    }
    if let Some(i) = seen.iter().position(|s| !(s[0] && s[1])) {
        return Err(QError::Format(format!("missing sample at m={}", m_min + i as i64)));
    }
    Ok(f)
}

pub fn write_csv<W: Write>(writer: W, f: &LatticeFunction) -> QResult<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| QError::Format(e.to_string());
    w.write_record(["sign", "m", "re", "im"]).map_err(io)?;
    for (s, label) in [(Sign::Pos, "1"), (Sign::Neg, "-1")] {
        for m in f.grid.indices() {
            let v = f.at(s, m);
            w.write_record([label.to_string(), m.to_string(), format!("{:e}", v.re), format!("{:e}", v.im)])
                .map_err(io)?;
        }
    }
    w.flush().map_err(|e| QError::Format(e.to_string()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(q: f64, a: i64, b: i64) -> LatticeGrid {
        LatticeGrid::new(QParams::new(q).unwrap(), a, b).unwrap()
    }

    fn gauss(x: f64) -> C64 {
        C64::new((-x * x).exp(), 0.0)
    }

    #[test]
    fn odd_function_integrates_to_zero() {
        let f = LatticeFunction::from_fn(grid(0.5, -10, 30), |x| C64::new(x * (-x * x).exp(), 0.0));
        assert_eq!(jackson_integral(&f).norm(), 0.0);
    }

    #[test]
    fn geometric_half_line() {
        // f = θ+ · x on [0, 40]: (1-p) Σ_{m=0}^{40} p^{2m}
        let g = grid(0.5, 0, 40);
        let f = LatticeFunction::from_fn(g, |x| C64::new(HalfLineIndicator { sign: Sign::Pos }.eval(x) * x, 0.0));
        let p: f64 = 0.25;
        let expect = (1.0 - p) * (1.0 - p.powi(2 * 41)) / (1.0 - p * p);
        assert!((jackson_integral(&f).re - expect).abs() < 1e-15);
    }

    #[test]
    fn derivative_of_identity() {
        let f = LatticeFunction::from_fn(grid(0.5, -5, 10), |x| C64::new(x, 0.0));
        let d = q_derivative(&f, 1).unwrap();
        assert_eq!(d.grid.m_max, 9);
        for s in Sign::BOTH {
            for m in d.grid.indices() {
                assert!((d.at(s, m) - C64::new(1.0, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn derivative_needs_points() {
        let f = LatticeFunction::zeros(grid(0.5, 0, 1));
        assert!(matches!(q_derivative(&f, 2), Err(QError::Size(_))));
    }

    #[test]
    fn lambda_round_trip() {
        let f = LatticeFunction::from_fn(grid(0.5, -3, 12), gauss);
        assert_eq!(lambda_scale(&f, 0), f);
        let back = lambda_scale(&lambda_scale(&f, 1), -1);
        assert_eq!(back, f);
        let l = lambda_scale(&f, 2);
        assert_eq!(l.at(Sign::Pos, 0), f.at(Sign::Pos, 2));
    }

    #[test]
    fn lambda_rescales_integral() {
        let f = LatticeFunction::from_fn(grid(0.5, -24, 40), gauss);
        let lf = lambda_scale(&f, 1);
        let r = jackson_integral(&lf) - jackson_integral(&f) / 0.25;
        assert!(r.norm() < 1e-14);
    }

    #[test]
    fn integration_by_parts() {
        let g = grid(0.5, -24, 40);
        let phi = LatticeFunction::from_fn(g, gauss);
        let psi = LatticeFunction::from_fn(g, |x| C64::new((-(x - 0.3) * (x - 0.3) / 2.0).exp(), 0.0));
        assert_eq!(integrate_by_parts_residual(&phi, &psi, 0).unwrap(), 0.0);
        assert!(integrate_by_parts_residual(&phi, &psi, 1).unwrap() < 1e-10);
        assert!(integrate_by_parts_residual(&phi, &psi, 2).unwrap() < 1e-9);
    }

    #[test]
    fn abs_integrable_diagnostics() {
        assert_eq!(abs_integrable(&LatticeFunction::zeros(grid(0.5, -4, 4))), 0.0);
        let a = abs_integrable(&LatticeFunction::from_fn(grid(0.5, -12, 40), gauss));
        let b = abs_integrable(&LatticeFunction::from_fn(grid(0.5, -20, 40), gauss));
        assert!((a - b).abs() < 1e-14);
        let one = |x: f64| {
            let _ = x;
            C64::new(1.0, 0.0)
        };
        let c = abs_integrable(&LatticeFunction::from_fn(grid(0.5, -4, 40), one));
        let d = abs_integrable(&LatticeFunction::from_fn(grid(0.5, -8, 40), one));
        assert!(d > 200.0 * c);
    }

    #[test]
    fn seminorm_basics() {
        let g = grid(0.5, -10, 30);
        assert_eq!(seminorm(&LatticeFunction::zeros(g), 2, 1).unwrap(), 0.0);
        let f = LatticeFunction::from_fn(g, gauss);
        for k in 0..=4 {
            for l in 0..=4 {
                let v = seminorm(&f, k, l).unwrap();
                assert!(v.is_finite());
                let sub = seminorm(&f.restrict(-5, 25).unwrap(), k, l).unwrap();
                assert!(sub <= v);
            }
        }
    }

    #[test]
    fn csv_round_trip() {
        let f = LatticeFunction::from_fn(grid(0.5, -3, 5), |x| C64::new(x.sin(), x.cos()));
        let mut buf = Vec::new();
        write_csv(&mut buf, &f).unwrap();
        let back = read_csv(&buf[..], f.grid.params).unwrap();
        assert_eq!(back.grid.m_min, -3);
        for s in Sign::BOTH {
            for m in f.grid.indices() {
                assert!((back.at(s, m) - f.at(s, m)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn csv_rejects_bad_input() {
        let p = QParams::new(0.5).unwrap();
        assert!(matches!(read_csv(&b""[..], p), Err(QError::Format(_))));
        assert!(matches!(read_csv(&b"sign,m,re,im\n"[..], p), Err(QError::Format(_))));
        assert!(matches!(read_csv(&b"sign,m,re,im\n1,0,1.0,0\n"[..], p), Err(QError::Format(_))));
        assert!(matches!(read_csv(&b"sign,m,re,im\n2,0,1,0\n-1,0,1,0\n"[..], p), Err(QError::Format(_))));
        assert!(matches!(read_csv(&b"a,b\n1,2\n"[..], p), Err(QError::Format(_))));
    }
}
