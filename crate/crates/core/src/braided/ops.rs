//! Operators acting on normal-ordered polynomials.
//!
//! A word of operators is applied rightmost first, like a composition.
//! Left derivatives travel past the generators that precede their variable
//! and pay q²-factors on the way; right derivatives act on the trailing
//! generator only.

use super::laurent::{q_factorial, q_number, Coeff, LaurentPoly, Rational};
use super::ncpoly::{Exps, Gen, NCPolynomial, NGEN, STANDARD};
use crate::error::{QError, QResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Op<C: Coeff = Rational> {
    Scalar(LaurentPoly<C>),
    Mul { poly: NCPolynomial<C>, side: Side },
    D { gen: Gen, side: Side },
    /// Λ_g^power: g → q^{2·power} g.
    Lam { gen: Gen, power: i64 },
    Series(OperatorSeries<C>),
}

/// Truncated series Σ_{k≤K} scale^k / [k]_{q²}! · mult^k · A₁^k A₂^k ⋯ for ops = [A₁, A₂, …].
///
/// The multiplier stands to the left of the operator powers, which is the
/// normal-ordered reading of e_{q²} applied to an operator argument.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSeries<C: Coeff = Rational> {
    pub scale: LaurentPoly<C>,
    pub mult: NCPolynomial<C>,
    pub ops: Vec<Op<C>>,
    pub order_cap: usize,
}

impl<C: Coeff> OperatorSeries<C> {
    /// T_ξ = e_{q²}((1−q²)ξΛ_s^{−1}∂_s) for ξ any polynomial in ξ₁, ξ₂.
    pub fn shift(xi: NCPolynomial<C>, order_cap: usize) -> Self {
        OperatorSeries {
            scale: LaurentPoly::one(),
            mult: xi,
            ops: vec![Op::Lam { gen: Gen::S, power: -1 }, Op::D { gen: Gen::S, side: Side::Left }],
            order_cap,
        }
    }

    /// T*_ξ = e_{q²}(−(1−q²)q²ξ∂_s).
    pub fn conjugate_shift(xi: NCPolynomial<C>, order_cap: usize) -> Self {
        OperatorSeries {
            scale: -LaurentPoly::q_pow(2),
            mult: xi,
            ops: vec![Op::D { gen: Gen::S, side: Side::Left }],
            order_cap,
        }
    }

    /// The operator part of the k-th term: each listed operator raised to
    /// the k-th power, in order.
    fn word(&self, k: usize) -> Vec<Op<C>> {
        self.ops.iter().flat_map(|op| std::iter::repeat_n(op.clone(), k)).collect()
    }

    pub fn apply(&self, p: &NCPolynomial<C>) -> QResult<NCPolynomial<C>> {
        let mut out = p.clone();
        let mut mult_k = NCPolynomial::one();
        let mut scale_k = LaurentPoly::one();
        for k in 1..=self.order_cap {
            let power = apply_word(&self.word(k), p)?;
            if power.is_zero() {
                break;
            }
            mult_k = mult_k.mul(&self.mult);
            scale_k = &scale_k * &self.scale;
            let fact = q_factorial::<C>(k);
            let mut term = NCPolynomial::zero();
            for (e, c) in mult_k.mul(&power).terms() {
                let c = (c * &scale_k)
                    .div_exact(&fact)
                    .ok_or_else(|| QError::Domain(format!("order-{k} coefficient not divisible by [k]!")))?;
                term.add_term(*e, &c);
            }
            out = out.add(&term);
        }
        Ok(out)
    }
}

impl<C: Coeff> Op<C> {
    pub fn mul_left(poly: NCPolynomial<C>) -> Self {
        Op::Mul { poly, side: Side::Left }
    }

    pub fn mul_right(poly: NCPolynomial<C>) -> Self {
        Op::Mul { poly, side: Side::Right }
    }

    pub fn gen(g: Gen) -> Self {
        Op::mul_left(NCPolynomial::gen(g, 1))
    }

    pub fn d(gen: Gen) -> Self {
        Op::D { gen, side: Side::Left }
    }

    pub fn d_right(gen: Gen) -> Self {
        Op::D { gen, side: Side::Right }
    }

    pub fn lam(gen: Gen, power: i64) -> Self {
        Op::Lam { gen, power }
    }

    pub fn scalar(c: LaurentPoly<C>) -> Self {
        Op::Scalar(c)
    }

    pub fn apply(&self, p: &NCPolynomial<C>) -> QResult<NCPolynomial<C>> {
        match self {
            Op::Scalar(c) => Ok(p.scale(c)),
            Op::Mul { poly, side: Side::Left } => Ok(poly.mul(p)),
            Op::Mul { poly, side: Side::Right } => Ok(p.mul(poly)),
            Op::D { gen, side } => derivative(p, *gen, *side),
            Op::Lam { gen, power } => {
                let mut out = NCPolynomial::zero();
                for (e, c) in p.terms() {
                    out.add_term(*e, &c.shift(2 * power * e[gen.index()]));
                }
                Ok(out)
            }
            Op::Series(s) => s.apply(p),
        }
    }
}

fn derivative<C: Coeff>(p: &NCPolynomial<C>, g: Gen, side: Side) -> QResult<NCPolynomial<C>> {
    let gi = g.index();
    let mut out = NCPolynomial::zero();
    for (e, c) in p.terms() {
        let n = e[gi];
        if n == 0 {
            continue;
        }
        let passed = match side {
            Side::Left => (0..gi).map(|h| -2 * STANDARD.theta[gi][h] * e[h]).sum::<i64>(),
            Side::Right => {
                if (gi + 1..NGEN).any(|h| e[h] != 0) {
                    return Err(QError::Domain(format!("right derivative in {} blocked by a later generator", STANDARD.names[gi])));
                }
                0
            }
        };
        let mut ne: Exps = *e;
        ne[gi] -= 1;
        out.add_term(ne, &(&q_number::<C>(n) * c).shift(passed));
    }
    Ok(out)
}

/// Apply a word of operators, rightmost first.
pub fn apply_word<C: Coeff>(word: &[Op<C>], p: &NCPolynomial<C>) -> QResult<NCPolynomial<C>> {
    word.iter().rev().try_fold(p.clone(), |acc, op| op.apply(&acc))
}

/// T_ξ applied to a polynomial with series order cap K.
pub fn shift_series_apply<C: Coeff>(p: &NCPolynomial<C>, xi: Gen, order_cap: usize) -> QResult<NCPolynomial<C>> {
    OperatorSeries::shift(NCPolynomial::gen(xi, 1), order_cap).apply(p)
}

/// Outcome of comparing two operator words on a family of inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct RelationOutcome {
    pub checked: usize,
    pub mismatches: Vec<String>,
}

impl RelationOutcome {
    pub fn holds(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Compare `lhs` and `rhs` on every z^a s^b with |a|, |b| ≤ degree_cap.
/// With `xi_order = Some(K)`, terms of total ξ-degree above K are dropped
/// on both sides before comparison.
pub fn verify_relation<C: Coeff>(lhs: &[Op<C>], rhs: &[Op<C>], degree_cap: i64, xi_order: Option<i64>) -> QResult<RelationOutcome> {
    let mut inputs = Vec::new();
    for a in -degree_cap..=degree_cap {
        for b in -degree_cap..=degree_cap {
            inputs.push(NCPolynomial::monomial(LaurentPoly::one(), [0, 0, a, b]));
        }
    }
    verify_relation_on(lhs, rhs, &inputs, xi_order)
}

pub fn verify_relation_on<C: Coeff>(lhs: &[Op<C>], rhs: &[Op<C>], inputs: &[NCPolynomial<C>], xi_order: Option<i64>) -> QResult<RelationOutcome> {
    let mut mismatches = Vec::new();
    for p in inputs {
        let mut l = apply_word(lhs, p)?;
        let mut r = apply_word(rhs, p)?;
        if let Some(k) = xi_order {
            l = l.truncate_xi(k);
            r = r.truncate_xi(k);
        }
        if l != r {
            mismatches.push(format!("on {p}: {l}  vs  {r}"));
        }
    }
    Ok(RelationOutcome { checked: inputs.len(), mismatches })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::braided::laurent::gaussian_binomial;

    type P = NCPolynomial<Rational>;
    type L = LaurentPoly<Rational>;

    fn z(n: i64) -> P {
        P::gen(Gen::Z, n)
    }

    #[test]
    fn dz_z_cubed() {
        let r = Op::d(Gen::Z).apply(&z(3)).unwrap();
        let want = &(&L::one() + &L::q_pow(2)) + &L::q_pow(4);
        assert_eq!(r, P::monomial(want, [0, 0, 2, 0]));
    }

    #[test]
    fn dz_inverse() {
        let r = Op::d(Gen::Z).apply(&z(-1)).unwrap();
        assert_eq!(r, P::monomial(-L::q_pow(-2), [0, 0, -2, 0]));
    }

    #[test]
    fn d_const_zero() {
        assert!(Op::d(Gen::S).apply(&P::one()).unwrap().is_zero());
    }

    #[test]
    fn ds_z_commutation() {
        // ∂_s z = q² z ∂_s
        let lhs = vec![Op::d(Gen::S), Op::gen(Gen::Z)];
        let rhs = vec![Op::scalar(L::q_pow(2)), Op::gen(Gen::Z), Op::d(Gen::S)];
        assert!(verify_relation(&lhs, &rhs, 6, None).unwrap().holds());
    }

    #[test]
    fn shift_on_s_squared() {
        let r = shift_series_apply(&P::gen(Gen::S, 2), Gen::Xi1, 8).unwrap();
        let s_plus_xi = P::gen(Gen::S, 1).add(&P::gen(Gen::Xi1, 1));
        assert_eq!(r, s_plus_xi.pow(2));
        let c = r.coeff(&[0, 1, 0, 1]);
        assert_eq!(c, &L::q_pow(-2) + &L::one());
    }

    #[test]
    fn shift_on_powers() {
        for n in 0..=8 {
            let r = shift_series_apply(&P::gen(Gen::S, n), Gen::Xi1, 12).unwrap();
            let mut want = P::zero();
            for k in 0..=n {
                // s^{n−k} ξ^k = q^{−2k(n−k)} ξ^k s^{n−k}
                want.add_term([0, k, 0, n - k], &gaussian_binomial::<Rational>(n, k).shift(-2 * k * (n - k)));
            }
            assert_eq!(r, want, "n={n}");
        }
    }

    #[test]
    fn right_derivative_blocked() {
        let p = P::gen(Gen::S, 1).mul(&P::gen(Gen::Z, 1));
        assert!(Op::d_right(Gen::Z).apply(&p).is_err());
    }
}
