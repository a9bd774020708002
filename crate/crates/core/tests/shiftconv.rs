use proptest::prelude::*;
use qlattice::lattice::{LatticeFunction, LatticeGrid, Sign};
use qlattice::qcore::{QParams, C64};
use qlattice::shiftconv::*;
use qlattice::verify::{
    commutativity_residual, convolution_theorem_forward, delta_identity_residual, derivative_exchange_residual,
    derivative_transfer_residual, theorem_pairs,
};
use qlattice::QError;

fn grid(q: f64, lo: i64, hi: i64) -> LatticeGrid {
    LatticeGrid::new(QParams::new(q).unwrap(), lo, hi).unwrap()
}

/// (a;p)_∞ by direct multiplication.
fn poch_inf(a: f64, p: f64) -> f64 {
    let (mut acc, mut pk) = (1.0, 1.0);
    while (a * pk).abs() > 1e-18 {
        acc *= 1.0 - a * pk;
        pk *= p;
    }
    acc
}

/// (p;p)_k.
fn poch(k: i32, p: f64) -> f64 {
    (1..=k).map(|i| 1.0 - p.powi(i)).product()
}

/// Weight of ψ(q^{−2k}s) in T_ξψ(s): ξ^k q^{2k²}/(q²;q²)_k · s^{−k} · (q^{2(k+1)}ξ/s; q²)_∞.
fn shift_weight_oracle(xi: f64, s: f64, k: i32, p: f64) -> f64 {
    xi.powi(k) * p.powi(k * k) / poch(k, p) * s.powi(-k) * poch_inf(p.powi(k + 1) * xi / s, p)
}

/// Gaussian binomial in p by products.
fn gauss_binom(n: i32, k: i32, p: f64) -> f64 {
    poch(n, p) / (poch(k, p) * poch(n - k, p))
}

#[test]
fn shift_of_point_mass_matches_weight_oracle() {
    let q = 0.5;
    let p = q * q;
    let g = grid(q, 0, 14);
    let m0 = 2;
    let mut delta = LatticeFunction::zeros(g);
    delta.set(Sign::Pos, m0, C64::new(1.0, 0.0));
    for (t, sg) in [(3, Sign::Pos), (6, Sign::Pos), (-1, Sign::Pos), (5, Sign::Neg), (9, Sign::Neg)] {
        let spec = ShiftSpec::with_default_cap(t, sg);
        let xi = spec.xi(&g.params);
        let out = shift_apply_branch(&delta, &spec, Sign::Pos).unwrap().values;
        for n in g.indices() {
            let s = g.point(Sign::Pos, n);
            let k = (n - m0) as i32;
            let want = if k >= 0 { shift_weight_oracle(xi, s, k, p) } else { 0.0 };
            let got = out.at(Sign::Pos, n).re;
            assert!((got - want).abs() <= 1e-12 * want.abs().max(1e-300), "t={t} {sg:?} n={n}: {got} vs {want}");
        }
    }
}

#[test]
fn same_sign_weights_vanish_before_the_shift_index() {
    // E(−q^{2j}) = 0 for j ≤ 0 kills the first n − t terms, so a point
    // mass nearer the origin than |ξ| never reaches the same-sign branch
    let g = grid(0.5, 0, 12);
    let spec = ShiftSpec::with_default_cap(2, Sign::Pos);
    for m0 in 3..7 {
        let mut delta = LatticeFunction::zeros(g);
        delta.set(Sign::Pos, m0, C64::new(1.0, 0.0));
        let out = shift_apply_branch(&delta, &spec, Sign::Pos).unwrap().values;
        for n in g.indices() {
            assert_eq!(out.at(Sign::Pos, n), C64::new(0.0, 0.0), "m0={m0} n={n}");
        }
    }
}

#[test]
fn conjugate_shift_of_monomials() {
    // T*_ξ sⁿ = Σ_k [n,k] (−q²ξ)^k s^{n−k}
    for q in [0.4, 0.6] {
        let p = q * q;
        let g = grid(q, -2, 12);
        for n in 0..=3 {
            let f = LatticeFunction::from_fn(g, |x| C64::new(x.powi(n), 0.0));
            for (t, sg) in [(4, Sign::Pos), (6, Sign::Neg)] {
                let spec = ShiftSpec::with_default_cap(t, sg);
                let xi = spec.xi(&g.params);
                let table = DerivativeTable::new(&f, spec.order_cap).unwrap();
                let out = shift_conjugate_with_table(&f, &table, &spec, true).unwrap().values;
                assert!(out.grid.len() > 3);
                for s in Sign::BOTH {
                    for m in out.grid.indices() {
                        let x = out.grid.point(s, m);
                        let want: f64 = (0..=n).map(|k| gauss_binom(n, k, p) * (-p * xi).powi(k) * x.powi(n - k)).sum();
                        let got = out.at(s, m).re;
                        assert!((got - want).abs() <= 1e-9 * want.abs().max(1.0), "q={q} n={n} t={t} m={m}: {got} vs {want}");
                    }
                }
            }
        }
    }
}

#[test]
fn polynomial_needs_samples_past_the_window() {
    let g = grid(0.5, 0, 10);
    let f = LatticeFunction::from_fn(g, |_| C64::new(1.0, 0.0));
    let spec = ShiftSpec::with_default_cap(0, Sign::Pos);
    assert!(matches!(shift_apply(&f, &spec), Err(QError::Coverage(_))));
}

#[test]
fn forward_convolution_theorem() {
    for q in [0.4, 0.6] {
        let params = QParams::new(q).unwrap();
        for (name, r, phi) in theorem_pairs() {
            let (e, _) = convolution_theorem_forward(&params, &r, &phi).unwrap();
            assert!(e < 1e-6, "q={q} {name}: {e}");
        }
    }
}

#[test]
fn commutativity_and_delta() {
    for q in [0.4, 0.5, 0.6] {
        let params = QParams::new(q).unwrap();
        let c = commutativity_residual(&params).unwrap();
        assert!(c < 1e-6, "q={q}: {c}");
        let (d, _) = delta_identity_residual(&params).unwrap();
        assert!(d < 1e-6, "q={q}: {d}");
    }
}

#[test]
fn delta_pairs_to_value_at_origin() {
    let g = grid(0.5, -4, 40);
    let f = LatticeFunction::from_fn(g, |x| C64::new((x + 2.0).cos(), x));
    let v = delta_pair(&f).unwrap();
    assert!((v - C64::new(2f64.cos(), 0.0)).norm() < 1e-12);
    let blowup = LatticeFunction::from_fn(g, |x| C64::new(1.0 / x.abs(), 0.0));
    assert!(matches!(delta_pair(&blowup), Err(QError::NoLimit(_))));
}

#[test]
fn derivative_moves_through_convolution_with_sign() {
    for q in [0.4, 0.6] {
        let params = QParams::new(q).unwrap();
        let signed = derivative_exchange_residual(&params, true).unwrap();
        assert!(signed < 1e-6, "q={q}: {signed}");
        // without the minus sign the two sides differ at order one
        assert!(derivative_exchange_residual(&params, false).unwrap() > 1e-2);
    }
}

#[test]
fn derivative_transfer_in_lattice_form() {
    for q in [0.4, 0.6] {
        let r = derivative_transfer_residual(&QParams::new(q).unwrap(), true).unwrap();
        assert!(r < 1e-8, "q={q}: {r}");
    }
}

#[test]
fn singular_part_rejects_bad_orders() {
    let f = LatticeFunction::zeros(grid(0.5, 0, 4));
    assert!(SingularPart::new(vec![(SINGULAR_ORDER_CAP + 1, f.clone())]).is_err());
    assert!(SingularPart::new(vec![(1, f.clone()), (1, f)]).is_err());
}

proptest! {
    #[test]
    fn shift_is_a_contraction(
        q in 0.3f64..0.7,
        a in -1.0f64..1.0,
        b in -1.0f64..1.0,
        t in -6i64..=6,
        neg in any::<bool>(),
    ) {
        let g = grid(q, -8, 40);
        let psi = LatticeFunction::from_fn(g, |x| C64::new((-x * x).exp() * (a + b * x), 0.0));
        prop_assume!(psi.sup_norm() > 1e-3);
        let sign = if neg { Sign::Neg } else { Sign::Pos };
        let excess = contraction_excess(&psi, &ShiftSpec::with_default_cap(t, sign), sign).unwrap();
        prop_assert!(excess <= 1e-10 * psi.sup_norm(), "excess {}", excess);
    }
}
