//! Exact identity checks for the operator algebra.

use std::collections::BTreeMap;

use super::kernel::{check_kernel_relation, kernel_relations};
use super::laurent::{gaussian_binomial, q_factorial, LaurentPolyQ, Rational};
use super::ncpoly::{normal_order, Gen, NCPolynomial};
use super::ops::{apply_word, shift_series_apply, verify_relation, verify_relation_on, Op, OperatorSeries};
use crate::error::QResult;

type P = NCPolynomial<Rational>;
type L = LaurentPolyQ;

/// Result of one exact check.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolicCheck {
    pub id: String,
    pub holds: bool,
    pub checked: usize,
    pub detail: String,
}

impl SymbolicCheck {
    fn new(id: impl Into<String>, checked: usize, mismatches: Vec<String>) -> Self {
        SymbolicCheck {
            id: id.into(),
            holds: mismatches.is_empty(),
            checked,
            detail: mismatches.into_iter().next().unwrap_or_default(),
        }
    }
}

fn q2(e: i64) -> Op {
    Op::scalar(L::q_pow(e))
}

fn relation(id: &str, lhs: Vec<Op>, rhs: Vec<Op>, cap: i64) -> QResult<SymbolicCheck> {
    let out = verify_relation(&lhs, &rhs, cap, None)?;
    Ok(SymbolicCheck::new(id, out.checked, out.mismatches))
}

/// zs = q²sz, the three derivative exchanges, and the Λ_z rules.
pub fn commutation_checks(cap: i64) -> QResult<Vec<SymbolicCheck>> {
    let (z, s) = (Op::gen(Gen::Z), Op::gen(Gen::S));
    let (dz, ds) = (Op::d(Gen::Z), Op::d(Gen::S));
    let lz = Op::lam(Gen::Z, 1);
    let xi = Op::gen(Gen::Xi1);
    let mut out = vec![
        relation("braid.zs", vec![z.clone(), s.clone()], vec![q2(2), s.clone(), z.clone()], cap)?,
        relation("braid.dz_s", vec![dz.clone(), s.clone()], vec![q2(-2), s.clone(), dz.clone()], cap)?,
        relation("braid.ds_z", vec![ds.clone(), z.clone()], vec![q2(2), z.clone(), ds.clone()], cap)?,
        relation("braid.dz_ds", vec![dz.clone(), ds.clone()], vec![q2(2), ds.clone(), dz.clone()], cap)?,
        relation("braid.Lz_z", vec![lz.clone(), z.clone()], vec![q2(2), z.clone(), lz.clone()], cap)?,
        relation("braid.dz_Lz", vec![dz.clone(), lz.clone()], vec![q2(2), lz, dz], cap)?,
        relation("shift.xi_s", vec![xi.clone(), s.clone()], vec![q2(2), s, xi.clone()], cap)?,
        relation("shift.xi_ds", vec![xi.clone(), ds.clone()], vec![q2(-2), ds, xi.clone()], cap)?,
        relation("shift.Ls_xi", vec![Op::lam(Gen::S, 1), xi.clone()], vec![xi, Op::lam(Gen::S, 1)], cap)?,
    ];
    // The normal-order examples.
    let sz: P = normal_order(&[(Gen::S, 1), (Gen::Z, 1)]);
    let zszs: P = normal_order(&[(Gen::Z, 1), (Gen::S, 1), (Gen::Z, 1), (Gen::S, 1)]);
    let mut bad = Vec::new();
    if sz != P::monomial(L::q_pow(-2), [0, 0, 1, 1]) {
        bad.push(format!("s*z -> {sz}"));
    }
    if zszs != P::monomial(L::q_pow(-2), [0, 0, 2, 2]) {
        bad.push(format!("(zs)^2 -> {zszs}"));
    }
    out.push(SymbolicCheck::new("braid.normal_order", 2, bad));
    Ok(out)
}

/// ∂^k zⁿ and ∂^k z^{−n−1} against their closed forms, n, k ≤ `max`.
pub fn power_rule_checks(max: i64) -> QResult<Vec<SymbolicCheck>> {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    let mut count = 0;
    for n in 0..=max {
        for k in 1..=max {
            count += 1;
            let word = vec![Op::d(Gen::Z); k as usize];
            // [n]!/[n−k]! zⁿ⁻ᵏ, zero for k > n.
            let got = apply_word(&word, &P::gen(Gen::Z, n))?;
            let want = if k > n {
                P::zero()
            } else {
                let c = q_factorial::<Rational>(n as usize).div_exact(&q_factorial::<Rational>((n - k) as usize)).unwrap();
                P::monomial(c, [0, 0, n - k, 0])
            };
            if got != want {
                pos.push(format!("d^{k} z^{n}: {got} vs {want}"));
            }
            // (−1)^k q^{−k(2n+k+1)} [n+k]!/[n]! z^{−n−k−1}
            let got = apply_word(&word, &P::gen(Gen::Z, -n - 1))?;
            let c = q_factorial::<Rational>((n + k) as usize).div_exact(&q_factorial::<Rational>(n as usize)).unwrap();
            let sign = if k % 2 == 0 { 1 } else { -1 };
            let want = P::monomial(c.shift(-k * (2 * n + k + 1)).scale(&Rational::from_integer(sign.into())), [0, 0, -n - k - 1, 0]);
            if got != want {
                neg.push(format!("d^{k} z^-{}: {got} vs {want}", n + 1));
            }
        }
    }
    Ok(vec![SymbolicCheck::new("power_rule.positive", count, pos), SymbolicCheck::new("power_rule.negative", count, neg)])
}

/// (s + ξ₁)ⁿ as a normal-ordered polynomial.
fn binomial_power(n: i64) -> P {
    P::gen(Gen::S, 1).add(&P::gen(Gen::Xi1, 1)).pow(n as u32)
}

/// Inverse of (s+ξ₁)^{m} as a power series in ξ₁, truncated at order K.
/// Writes (s+ξ)^m = s^m(1+U) and sums the geometric series in −U.
pub fn binomial_inverse(m: i64, order: i64) -> P {
    let x = binomial_power(m);
    let u = P::gen(Gen::S, -m).mul(&x).sub(&P::one());
    let mut term = P::one();
    let mut acc = P::one();
    for _ in 0..order {
        term = term.mul(&u.neg()).truncate_xi(order);
        acc = acc.add(&term);
    }
    acc.mul(&P::gen(Gen::S, -m)).truncate_xi(order)
}

/// The naive inverse-power expansion Σ_k (−1)^k [n+k, k] s^{−n−k−1} ξ^k,
/// normal-ordered, with no q-power for moving ξ past s.
pub fn naive_inverse_series(n: i64, order: i64) -> P {
    let mut out = P::zero();
    for k in 0..=order {
        let sign = if k % 2 == 0 { 1 } else { -1 };
        let c = gaussian_binomial::<Rational>(n + k, k).scale(&Rational::from_integer(sign.into()));
        let word: P = normal_order(&[(Gen::S, -n - k - 1), (Gen::Xi1, k)]);
        out = out.add(&word.scale(&c));
    }
    out
}

/// T_ξ sⁿ = (s+ξ)ⁿ for 0 ≤ n ≤ `max_pos`, and T_ξ s^{−n−1} = (s+ξ)^{−n−1}
/// through ξ-order `order` for 0 ≤ n < `max_neg`.
pub fn shift_polynomial_checks(max_pos: i64, max_neg: i64, order: i64) -> QResult<Vec<SymbolicCheck>> {
    let mut bad_pos = Vec::new();
    for n in 0..=max_pos {
        let got = shift_series_apply(&P::gen(Gen::S, n), Gen::Xi1, order as usize)?;
        let want = binomial_power(n);
        if got != want {
            bad_pos.push(format!("n={n}: {got} vs {want}"));
        }
    }
    let mut bad_neg = Vec::new();
    for n in 0..max_neg {
        let got = shift_series_apply(&P::gen(Gen::S, -n - 1), Gen::Xi1, order as usize)?.truncate_xi(order);
        let inv = binomial_inverse(n + 1, order);
        // The oracle really is a two-sided inverse.
        let one_l = inv.mul(&binomial_power(n + 1)).truncate_xi(order);
        let one_r = binomial_power(n + 1).mul(&inv).truncate_xi(order);
        if one_l != P::one() || one_r != P::one() {
            bad_neg.push(format!("oracle for n={n} is not an inverse"));
        }
        if got != inv {
            bad_neg.push(format!("n={n}: {got} vs {inv}"));
        }
    }
    Ok(vec![
        SymbolicCheck::new("shift.positive_powers", (max_pos + 1) as usize, bad_pos),
        SymbolicCheck::new("shift.negative_powers", max_neg as usize, bad_neg),
    ])
}

/// T_{ξ₂}T_{ξ₁} = T_{ξ₁+ξ₂} on s^n, |n| ≤ `max_n`, through ξ-order `order`.
pub fn composition_check(max_n: i64, order: i64) -> QResult<SymbolicCheck> {
    let cap = order as usize;
    let t1 = Op::Series(OperatorSeries::shift(P::gen(Gen::Xi1, 1), cap));
    let t2 = Op::Series(OperatorSeries::shift(P::gen(Gen::Xi2, 1), cap));
    let t12 = Op::Series(OperatorSeries::shift(P::gen(Gen::Xi1, 1).add(&P::gen(Gen::Xi2, 1)), cap));
    let inputs: Vec<P> = (-max_n..=max_n).map(|n| P::gen(Gen::S, n)).collect();
    let out = verify_relation_on(&[t2, t1], &[t12], &inputs, Some(order))?;
    Ok(SymbolicCheck::new("shift.composition", out.checked, out.mismatches))
}

/// ∂^m[hφ] = Σ_i [m,i] q^{−2i(m−i)} ∂^{m−i}[h(q^{2i}z)] ∂^iφ(z) on monomials.
/// The derivative ∂^{m−i} acts on the rescaled function z ↦ h(q^{2i}z).
pub fn leibniz_check(max_deg: i64) -> QResult<SymbolicCheck> {
    let mut bad = Vec::new();
    let mut count = 0;
    for a in -max_deg..=max_deg {
        for b in -max_deg..=max_deg {
            let (h, phi) = (P::gen(Gen::Z, a), P::gen(Gen::Z, b));
            for m in 0..=max_deg {
                count += 1;
                let lhs = apply_word(&vec![Op::d(Gen::Z); m as usize], &h.mul(&phi))?;
                let mut rhs = P::zero();
                for i in 0..=m {
                    let mut word = vec![Op::d(Gen::Z); (m - i) as usize];
                    word.push(Op::lam(Gen::Z, i));
                    let dh = apply_word(&word, &h)?;
                    let dphi = apply_word(&vec![Op::d(Gen::Z); i as usize], &phi)?;
                    let c = gaussian_binomial::<Rational>(m, i).shift(-2 * i * (m - i));
                    rhs = rhs.add(&dh.mul(&dphi).scale(&c));
                }
                if lhs != rhs {
                    bad.push(format!("h=z^{a}, phi=z^{b}, m={m}: {lhs} vs {rhs}"));
                }
            }
        }
    }
    Ok(SymbolicCheck::new("leibniz", count, bad))
}

/// The six transform relations on the truncated kernels.
pub fn kernel_checks(order: usize) -> QResult<Vec<SymbolicCheck>> {
    kernel_relations()
        .iter()
        .map(|rel| {
            let miss = check_kernel_relation(rel, order)?;
            Ok(SymbolicCheck::new(format!("transform.{}", rel.id), 1, miss.into_iter().collect()))
        })
        .collect()
}

/// Commutative polynomials in a = q^{2μ}, b = q^{2ν} with Laurent-in-q
/// coefficients.
type Biv = BTreeMap<(u32, u32), L>;

fn biv_mul(x: &Biv, y: &Biv) -> Biv {
    let mut out = Biv::new();
    for ((i1, j1), c1) in x {
        for ((i2, j2), c2) in y {
            let e = out.entry((i1 + i2, j1 + j2)).or_default();
            *e += &(c1 * c2);
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn biv_add(x: &mut Biv, y: &Biv) {
    for (k, c) in y {
        let e = x.entry(*k).or_default();
        *e += c;
    }
    x.retain(|_, c| !c.is_zero());
}

fn biv_one() -> Biv {
    Biv::from([((0, 0), L::one())])
}

/// (x;q²)_n where x = a^i b^j.
fn biv_poch(i: u32, j: u32, n: i64) -> Biv {
    let mut acc = biv_one();
    for k in 0..n {
        let factor = Biv::from([((0, 0), L::one()), ((i, j), -L::q_pow(2 * k))]);
        acc = biv_mul(&acc, &factor);
    }
    acc
}

/// Σ_l b^l [k,l] (a;q²)_l (b;q²)_{k−l} = (ab;q²)_k as polynomials in a, b.
pub fn vandermonde_symbolic(k: i64) -> bool {
    let mut lhs = Biv::new();
    for l in 0..=k {
        let bl = Biv::from([((0, l as u32), gaussian_binomial::<Rational>(k, l))]);
        let term = biv_mul(&biv_mul(&bl, &biv_poch(1, 0, l)), &biv_poch(0, 1, k - l));
        biv_add(&mut lhs, &term);
    }
    lhs == biv_poch(1, 1, k)
}

pub fn vandermonde_checks(k_max: i64) -> SymbolicCheck {
    let bad = (0..=k_max).filter(|k| !vandermonde_symbolic(*k)).map(|k| format!("k={k}")).collect();
    SymbolicCheck::new("vandermonde", (k_max + 1) as usize, bad)
}

/// Every exact check with the default caps.
pub fn all_symbolic_checks() -> QResult<Vec<SymbolicCheck>> {
    let mut out = commutation_checks(6)?;
    out.extend(power_rule_checks(8)?);
    out.extend(kernel_checks(10)?);
    out.extend(shift_polynomial_checks(8, 4, 12)?);
    out.push(composition_check(4, 10)?);
    out.push(leibniz_check(6)?);
    out.push(vandermonde_checks(12));
    Ok(out)
}
