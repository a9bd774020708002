//! Exact Laurent polynomials in q.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};

use crate::qcore::C64;

/// Exact coefficient field. Implemented for the rationals and for the
/// Gaussian rationals (needed by kernels that carry powers of i).
pub trait Coeff: Clone + PartialEq + fmt::Debug + Num + Neg<Output = Self> {
    fn from_i64(n: i64) -> Self;
    fn to_c64(&self) -> C64;
    fn render(&self) -> String;
    /// True when the printed form needs parentheses before a q-power.
    fn is_compound(&self) -> bool;
}

pub type Rational = BigRational;
pub type GaussRational = Complex<BigRational>;

impl Coeff for BigRational {
    fn from_i64(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
    fn to_c64(&self) -> C64 {
        C64::new(self.to_f64().unwrap_or(f64::NAN), 0.0)
    }
    fn render(&self) -> String {
        self.to_string()
    }
    fn is_compound(&self) -> bool {
        false
    }
}

impl Coeff for GaussRational {
    fn from_i64(n: i64) -> Self {
        Complex::new(BigRational::from_i64(n), BigRational::zero())
    }
    fn to_c64(&self) -> C64 {
        C64::new(self.re.to_f64().unwrap_or(f64::NAN), self.im.to_f64().unwrap_or(f64::NAN))
    }
    fn render(&self) -> String {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => self.re.to_string(),
            (true, false) => {
                if self.im.is_one() {
                    "i".into()
                } else if (-self.im.clone()).is_one() {
                    "-i".into()
                } else {
                    format!("{}i", self.im)
                }
            }
            _ => format!("({}{}{}i)", self.re, if self.im.is_negative() { "" } else { "+" }, self.im),
        }
    }
    fn is_compound(&self) -> bool {
        !self.re.is_zero() && !self.im.is_zero()
    }
}

/// The imaginary unit in the Gaussian rationals.
pub fn gauss_i() -> GaussRational {
    Complex::new(BigRational::zero(), BigRational::one())
}

/// Σ c_e q^e with only non-zero coefficients stored.
#[derive(Clone, PartialEq, Debug)]
pub struct LaurentPoly<C: Coeff> {
    terms: BTreeMap<i64, C>,
}

pub type LaurentPolyQ = LaurentPoly<Rational>;


impl<C: Coeff> LaurentPoly<C> {
    pub fn zero() -> Self {
        LaurentPoly { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Self::monomial(C::one(), 0)
    }

    pub fn constant(c: C) -> Self {
        Self::monomial(c, 0)
    }

    pub fn from_int(n: i64) -> Self {
        Self::constant(C::from_i64(n))
    }

    /// c q^e.
    pub fn monomial(c: C, e: i64) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(e, c);
        }
        LaurentPoly { terms }
    }

    /// q^e.
    pub fn q_pow(e: i64) -> Self {
        Self::monomial(C::one(), e)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&i64, &C)> {
        self.terms.iter()
    }

    pub fn coeff(&self, e: i64) -> C {
        self.terms.get(&e).cloned().unwrap_or_else(C::zero)
    }

    pub fn min_exp(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    pub fn max_exp(&self) -> Option<i64> {
        self.terms.keys().next_back().copied()
    }

    fn add_term(&mut self, e: i64, c: C) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(e).or_insert_with(C::zero);
        *entry = entry.clone() + c;
        if entry.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn scale(&self, c: &C) -> Self {
        let mut out = Self::zero();
        for (e, v) in &self.terms {
            out.add_term(*e, v.clone() * c.clone());
        }
        out
    }

    /// Multiply by q^e.
    pub fn shift(&self, e: i64) -> Self {
        LaurentPoly { terms: self.terms.iter().map(|(k, v)| (k + e, v.clone())).collect() }
    }

    /// Substitute q → q^k (k may be negative).
    pub fn substitute_power(&self, k: i64) -> Self {
        let mut out = Self::zero();
        for (e, v) in &self.terms {
            out.add_term(e * k, v.clone());
        }
        out
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Exact quotient self / d, or `None` when d does not divide self.
    pub fn div_exact(&self, d: &Self) -> Option<Self> {
        let dhi = d.max_exp()?;
        let dlo = d.min_exp()?;
        let lead = d.terms[&dhi].clone();
        let mut rem = self.clone();
        let mut quot = Self::zero();
        while let (Some(rhi), Some(rlo)) = (rem.max_exp(), rem.min_exp()) {
            if rhi - rlo < dhi - dlo {
                return None;
            }
            let c = rem.terms[&rhi].clone() / lead.clone();
            let e = rhi - dhi;
            quot.add_term(e, c.clone());
            let sub = d.shift(e).scale(&c);
            rem = &rem - &sub;
        }
        Some(quot)
    }

    pub fn eval(&self, q: f64) -> C64 {
        self.terms.iter().map(|(e, c)| c.to_c64() * q.powi(*e as i32)).sum()
    }
}

impl<C: Coeff> Default for LaurentPoly<C> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<'a, C: Coeff> Add<&'a LaurentPoly<C>> for &'a LaurentPoly<C> {
    type Output = LaurentPoly<C>;
    fn add(self, rhs: &LaurentPoly<C>) -> LaurentPoly<C> {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, c.clone());
        }
        out
    }
}

impl<C: Coeff> AddAssign<&LaurentPoly<C>> for LaurentPoly<C> {
    fn add_assign(&mut self, rhs: &LaurentPoly<C>) {
        for (e, c) in &rhs.terms {
            self.add_term(*e, c.clone());
        }
    }
}

impl<'a, C: Coeff> Sub<&'a LaurentPoly<C>> for &'a LaurentPoly<C> {
    type Output = LaurentPoly<C>;
    fn sub(self, rhs: &LaurentPoly<C>) -> LaurentPoly<C> {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, -c.clone());
        }
        out
    }
}

impl<'a, C: Coeff> Mul<&'a LaurentPoly<C>> for &'a LaurentPoly<C> {
    type Output = LaurentPoly<C>;
    fn mul(self, rhs: &LaurentPoly<C>) -> LaurentPoly<C> {
        let mut out = LaurentPoly::zero();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                out.add_term(e1 + e2, c1.clone() * c2.clone());
            }
        }
        out
    }
}

impl<C: Coeff> Neg for LaurentPoly<C> {
    type Output = LaurentPoly<C>;
    fn neg(self) -> LaurentPoly<C> {
        LaurentPoly { terms: self.terms.into_iter().map(|(e, c)| (e, -c)).collect() }
    }
}

impl<C: Coeff> fmt::Display for LaurentPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            let mut s = c.render();
            let negative = s.starts_with('-') && !c.is_compound();
            if negative {
                s.remove(0);
            }
            if first {
                if negative {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if negative { "-" } else { "+" })?;
            }
            first = false;
            let unit = s == "1";
            match (*e, unit) {
                (0, _) => write!(f, "{s}")?,
                (e, true) => write!(f, "q^{e}")?,
                (e, false) => write!(f, "{s}*q^{e}")?,
            }
        }
        Ok(())
    }
}

/// [n]_{q²} = (1 − q^{2n})/(1 − q²) for any integer n.
pub fn q_number<C: Coeff>(n: i64) -> LaurentPoly<C> {
    let mut out = LaurentPoly::zero();
    if n > 0 {
        for j in 0..n {
            out.add_term(2 * j, C::one());
        }
    } else if n < 0 {
        for j in 1..=(-n) {
            out.add_term(-2 * j, -C::one());
        }
    }
    out
}

/// [n]_{q²}! = Π_{j=1}^{n} [j]_{q²}, equal to (q²;q²)_n/(1−q²)^n.
pub fn q_factorial<C: Coeff>(n: usize) -> LaurentPoly<C> {
    let mut acc = LaurentPoly::one();
    for j in 1..=n as i64 {
        acc = &acc * &q_number::<C>(j);
    }
    acc
}

/// Gaussian binomial [l, i] in base q², exactly; zero outside 0 ≤ i ≤ l.
pub fn gaussian_binomial<C: Coeff>(l: i64, i: i64) -> LaurentPoly<C> {
    if l < 0 || i < 0 || i > l {
        return LaurentPoly::zero();
    }
    let num = q_factorial::<C>(l as usize);
    let den = &q_factorial::<C>(i as usize) * &q_factorial::<C>((l - i) as usize);
    num.div_exact(&den).expect("Gaussian binomial is a polynomial")
}

/// (q^{2a}; q²)_n as an exact Laurent polynomial, for integer a.
pub fn pochhammer_qpow<C: Coeff>(a: i64, n: usize) -> LaurentPoly<C> {
    let mut acc = LaurentPoly::one();
    for k in 0..n as i64 {
        let factor = &LaurentPoly::one() - &LaurentPoly::q_pow(2 * (a + k));
        acc = &acc * &factor;
    }
    acc
}
