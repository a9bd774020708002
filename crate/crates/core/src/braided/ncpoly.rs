//! Normal-ordered polynomials in the q-commuting generators ξ₂, ξ₁, z, s.
//!
//! Monomials are stored with generators in canonical order, so the
//! subordinate generator always stands to the right. Every product is
//! reordered on construction and the transpositions are paid for in powers
//! of q.

use std::collections::BTreeMap;
use std::fmt;

use super::laurent::{Coeff, LaurentPoly, Rational};
use crate::error::{QError, QResult};

pub const NGEN: usize = 4;

/// Generator indices in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Gen {
    Xi2 = 0,
    Xi1 = 1,
    Z = 2,
    S = 3,
}

impl Gen {
    pub const ALL: [Gen; NGEN] = [Gen::Xi2, Gen::Xi1, Gen::Z, Gen::S];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Exchange data: g_i g_j = q^{2θ(i,j)} g_j g_i for every pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorTable {
    pub names: [&'static str; NGEN],
    pub theta: [[i64; NGEN]; NGEN],
}

/// zs = q²sz, ξs = q²sξ for both ξ, ξ₁ξ₂ = q²ξ₂ξ₁.
/// zξ = q²ξz is a convention; no identity checked here mixes z with ξ.
pub const STANDARD: GeneratorTable = GeneratorTable {
    names: ["xi2", "xi1", "z", "s"],
    theta: [
        // xi2  xi1   z   s
        [0, -1, -1, 1],
        [1, 0, -1, 1],
        [1, 1, 0, 1],
        [-1, -1, -1, 0],
    ],
};

impl GeneratorTable {
    pub fn standard() -> Self {
        STANDARD
    }

    pub fn validate(&self) -> QResult<()> {
        for i in 0..NGEN {
            for j in 0..NGEN {
                if self.theta[i][j] != -self.theta[j][i] {
                    return Err(QError::Table(format!("theta not antisymmetric at ({i},{j})")));
                }
            }
        }
        Ok(())
    }

    pub fn lookup(&self, name: &str) -> QResult<Gen> {
        self.names
            .iter()
            .position(|n| *n == name)
            .map(|i| Gen::ALL[i])
            .ok_or_else(|| QError::Table(format!("unknown generator '{name}'")))
    }

    pub fn theta(&self, a: Gen, b: Gen) -> i64 {
        self.theta[a.index()][b.index()]
    }

    /// q-exponent picked up when the canonical monomial `a` is multiplied
    /// on the right by the canonical monomial `b`.
    fn product_exponent(&self, a: &Exps, b: &Exps) -> i64 {
        let mut e = 0;
        for (i, ai) in a.iter().enumerate() {
            for (j, bj) in b.iter().enumerate().take(i) {
                e += 2 * self.theta[i][j] * ai * bj;
            }
        }
        e
    }
}

pub type Exps = [i64; NGEN];

/// Exact element of the braided algebra in normal form.
#[derive(Clone, PartialEq, Debug)]
pub struct NCPolynomial<C: Coeff = Rational> {
    terms: BTreeMap<Exps, LaurentPoly<C>>,
}

impl<C: Coeff> NCPolynomial<C> {
    pub fn zero() -> Self {
        NCPolynomial { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Self::monomial(LaurentPoly::one(), [0; NGEN])
    }

    pub fn monomial(c: LaurentPoly<C>, exps: Exps) -> Self {
        let mut p = Self::zero();
        p.add_term(exps, &c);
        p
    }

    pub fn gen(g: Gen, e: i64) -> Self {
        let mut exps = [0; NGEN];
        exps[g.index()] = e;
        Self::monomial(LaurentPoly::one(), exps)
    }

    pub fn scalar(c: LaurentPoly<C>) -> Self {
        Self::monomial(c, [0; NGEN])
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exps, &LaurentPoly<C>)> {
        self.terms.iter()
    }

    pub fn coeff(&self, exps: &Exps) -> LaurentPoly<C> {
        self.terms.get(exps).cloned().unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, exps: Exps, c: &LaurentPoly<C>) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(exps).or_default();
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&exps);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(*e, c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&LaurentPoly::from_int(-1))
    }

    pub fn scale(&self, c: &LaurentPoly<C>) -> Self {
        let mut out = Self::zero();
        for (e, v) in &self.terms {
            out.add_term(*e, &(v * c));
        }
        out
    }

    /// Normal-ordered product self·other.
    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let shift = STANDARD.product_exponent(a, b);
                let mut e = *a;
                for i in 0..NGEN {
                    e[i] += b[i];
                }
                out.add_term(e, &(ca * cb).shift(shift));
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// Keep only the terms accepted by `keep`.
    pub fn filter(&self, keep: impl Fn(&Exps) -> bool) -> Self {
        NCPolynomial { terms: self.terms.iter().filter(|(e, _)| keep(e)).map(|(e, c)| (*e, c.clone())).collect() }
    }

    /// Drop terms whose total ξ-degree exceeds `k`.
    pub fn truncate_xi(&self, k: i64) -> Self {
        self.filter(|e| e[Gen::Xi1.index()] + e[Gen::Xi2.index()] <= k)
    }

    /// Map coefficients into another field.
    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&LaurentPoly<C>) -> LaurentPoly<D>) -> NCPolynomial<D> {
        let mut out = NCPolynomial::zero();
        for (e, c) in &self.terms {
            out.add_term(*e, &f(c));
        }
        out
    }
}

/// Normal form of a word of generator powers, read left to right.
pub fn normal_order<C: Coeff>(word: &[(Gen, i64)]) -> NCPolynomial<C> {
    word.iter().fold(NCPolynomial::one(), |acc, (g, e)| acc.mul(&NCPolynomial::gen(*g, *e)))
}

/// Normal form of a word given by generator names.
pub fn normal_order_named<C: Coeff>(table: &GeneratorTable, word: &[(&str, i64)]) -> QResult<NCPolynomial<C>> {
    let gens = word.iter().map(|(n, e)| table.lookup(n).map(|g| (g, *e))).collect::<QResult<Vec<_>>>()?;
    Ok(normal_order(&gens))
}

impl<C: Coeff> fmt::Display for NCPolynomial<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let mono: Vec<String> = (0..NGEN)
                .filter(|i| e[*i] != 0)
                .map(|i| if e[i] == 1 { STANDARD.names[i].to_string() } else { format!("{}^{}", STANDARD.names[i], e[i]) })
                .collect();
            let cs = c.to_string();
            if mono.is_empty() {
                write!(f, "({cs})")?;
            } else if cs == "1" {
                write!(f, "{}", mono.join("*"))?;
            } else {
                write!(f, "({cs})*{}", mono.join("*"))?;
            }
        }
        Ok(())
    }
}
