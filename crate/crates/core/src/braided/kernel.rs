//! Truncated transform kernels as exact elements of the algebra.
//!
//! The forward kernel E_{q²}(i(1−q²)q²zs) and the inverse kernel
//! e_{q²}(−i(1−q²)zs) are normal-ordered series Σ c_n zⁿsⁿ. Multiplying by
//! [N]_{q²}! clears every denominator up to order N so the truncations have
//! Laurent-polynomial coefficients over the Gaussian rationals.

use num_traits::One;

use super::laurent::{gauss_i, q_factorial, GaussRational, LaurentPoly};
use super::ncpoly::{Gen, NCPolynomial};
use super::ops::{apply_word, Op};
use crate::error::QResult;

pub type GPoly = NCPolynomial<GaussRational>;
type GL = LaurentPoly<GaussRational>;

fn i_pow(n: i64) -> GaussRational {
    let mut acc = GaussRational::one();
    for _ in 0..n.rem_euclid(4) {
        acc *= gauss_i();
    }
    acc
}

fn scaled_series(order: usize, coeff: impl Fn(i64) -> GL) -> GPoly {
    let full = q_factorial::<GaussRational>(order);
    let mut out = GPoly::zero();
    for n in 0..=order as i64 {
        let ratio = full.div_exact(&q_factorial::<GaussRational>(n as usize)).expect("[N]! divisible by [n]!");
        out.add_term([0, 0, n, n], &(&coeff(n) * &ratio));
    }
    out
}

/// [N]! · Σ_{n≤N} q^{n(n−1)} (iq²)ⁿ/[n]! zⁿsⁿ.
pub fn forward_kernel(order: usize) -> GPoly {
    scaled_series(order, |n| GL::monomial(i_pow(n), n * (n - 1) + 2 * n))
}

/// [N]! · Σ_{n≤N} (−i)ⁿ/[n]! zⁿsⁿ.
pub fn inverse_kernel(order: usize) -> GPoly {
    scaled_series(order, |n| GL::constant(i_pow(-n)))
}

/// One commutation relation of the transform pair, read on its kernel.
pub struct KernelRelation {
    pub id: &'static str,
    pub forward: bool,
    pub lhs: Vec<Op<GaussRational>>,
    pub rhs: Vec<Op<GaussRational>>,
}

fn scalar(c: GaussRational, qe: i64) -> Op<GaussRational> {
    Op::scalar(GL::monomial(c, qe))
}

fn one() -> GaussRational {
    GaussRational::one()
}

/// The six relations moved onto the kernels by Jackson summation by parts.
/// Operators in s act from the right on the forward kernel, matching the
/// right-module structure in s.
pub fn kernel_relations() -> Vec<KernelRelation> {
    let i = gauss_i();
    let s = GPoly::gen(Gen::S, 1);
    let z = GPoly::gen(Gen::Z, 1);
    vec![
        KernelRelation {
            id: "F.Lambda_z",
            forward: true,
            lhs: vec![scalar(one(), -2), Op::lam(Gen::Z, -1)],
            rhs: vec![scalar(one(), -2), Op::lam(Gen::S, -1)],
        },
        KernelRelation {
            id: "F.d_z",
            forward: true,
            lhs: vec![scalar(-one(), 0), Op::d(Gen::Z), Op::lam(Gen::Z, -1)],
            rhs: vec![scalar(-i.clone(), 0), Op::mul_right(s.clone())],
        },
        KernelRelation {
            id: "F.z",
            forward: true,
            lhs: vec![Op::mul_left(z.clone())],
            rhs: vec![scalar(-i.clone(), -2), Op::lam(Gen::S, -1), Op::d_right(Gen::S)],
        },
        KernelRelation {
            id: "Finv.Lambda_s",
            forward: false,
            lhs: vec![scalar(one(), -2), Op::lam(Gen::S, -1)],
            rhs: vec![scalar(one(), -2), Op::lam(Gen::Z, -1)],
        },
        KernelRelation {
            id: "Finv.d_s",
            forward: false,
            lhs: vec![scalar(-one(), 0), Op::d_right(Gen::S), Op::lam(Gen::S, -1)],
            rhs: vec![scalar(i.clone(), 0), Op::lam(Gen::Z, -1), Op::mul_left(z)],
        },
        KernelRelation {
            id: "Finv.s",
            forward: false,
            lhs: vec![Op::mul_right(s)],
            rhs: vec![scalar(i, 0), Op::d(Gen::Z)],
        },
    ]
}

/// Check one relation on the kernel truncated at `order`. Only monomials
/// zᵃsᵇ with 0 ≤ a, b < order are compared; the top order is polluted by
/// the truncation itself.
pub fn check_kernel_relation(rel: &KernelRelation, order: usize) -> QResult<Option<String>> {
    let k = if rel.forward { forward_kernel(order) } else { inverse_kernel(order) };
    let inside = |e: &[i64; 4]| (0..order as i64).contains(&e[2]) && (0..order as i64).contains(&e[3]);
    let l = apply_word(&rel.lhs, &k)?.filter(inside);
    let r = apply_word(&rel.rhs, &k)?.filter(inside);
    if l == r {
        Ok(None)
    } else {
        let diff = l.sub(&r);
        let (e, c) = diff.terms().next().map(|(e, c)| (*e, c.clone())).unwrap_or(([0; 4], GL::zero()));
        Ok(Some(format!("first mismatch at z^{} s^{}: {}", e[2], e[3], c)))
    }
}

/// The literal inverse kernel E_{q²}(−i(1−q²)zs), scaled the same way.
pub fn literal_inverse_kernel(order: usize) -> GPoly {
    scaled_series(order, |n| GL::monomial(i_pow(-n), n * (n - 1)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_six_relations_hold() {
        for rel in kernel_relations() {
            assert_eq!(check_kernel_relation(&rel, 8).unwrap(), None, "{}", rel.id);
        }
    }

    #[test]
    fn literal_inverse_kernel_breaks_the_inverse_relations() {
        let rels = kernel_relations();
        let rel = rels.iter().find(|r| r.id == "Finv.s").unwrap();
        let k = literal_inverse_kernel(6);
        let inside = |e: &[i64; 4]| (0..6).contains(&e[2]) && (0..6).contains(&e[3]);
        let l = apply_word(&rel.lhs, &k).unwrap().filter(inside);
        let r = apply_word(&rel.rhs, &k).unwrap().filter(inside);
        assert_ne!(l, r);
    }

    #[test]
    fn kernels_start_at_one() {
        let k = forward_kernel(4);
        assert_eq!(k.coeff(&[0, 0, 0, 0]), q_factorial::<GaussRational>(4));
    }
}
