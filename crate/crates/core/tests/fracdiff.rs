use proptest::prelude::*;
use qlattice::fracdiff::*;
use qlattice::lattice::{LatticeFunction, LatticeGrid, Sign};
use qlattice::qcore::{QParams, C64};
use qlattice::verify::{integer_order_residual, FRAC_GRID};
use qlattice::QError;

fn positive_fn(q: f64, lo: i64, hi: i64, f: impl Fn(f64) -> f64) -> LatticeFunction {
    let g = LatticeGrid::new(QParams::new(q).unwrap(), lo, hi).unwrap();
    LatticeFunction::from_fn(g, |x| C64::new(if x > 0.0 { f(x) } else { 0.0 }, 0.0))
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

#[test]
fn order_minus_one_is_the_difference_quotient() {
    for q in [0.4, 0.6] {
        let (p, a) = (q * q, 1.0 - q * q);
        let g = positive_fn(q, -6, 120, |x| (-x * x).exp() * (1.0 + x));
        let d = frac_apply(&g, -1.0).unwrap();
        for m in d.grid.indices() {
            let s = p.powi(m as i32);
            let want = ((-s * s).exp() * (1.0 + s) - (-(p * s).powi(2)).exp() * (1.0 + p * s)) / (a * s);
            assert!((d.at(Sign::Pos, m).re - want).abs() < 1e-12 * want.abs().max(1.0), "q={q} m={m}");
        }
    }
}

#[test]
fn order_plus_one_is_the_jackson_primitive() {
    for q in [0.4, 0.6] {
        let (p, a) = (q * q, 1.0 - q * q);
        let g = positive_fn(q, -6, 200, |x| (-x).exp());
        let f = frac_apply(&g, 1.0).unwrap();
        for m in f.grid.indices().step_by(7) {
            let s = p.powi(m as i32);
            let want: f64 = a * s * (0..400).map(|j| p.powi(j) * (-s * p.powi(j)).exp()).sum::<f64>();
            assert!((f.at(Sign::Pos, m).re - want).abs() < 1e-12 * want.max(1e-300), "q={q} m={m}");
        }
    }
}

#[test]
fn integer_orders_match_repeated_operators() {
    for q in [0.4, 0.6] {
        let g = positive_fn(q, FRAC_GRID.0, FRAC_GRID.1, |x| (-x * x).exp());
        for k in -3..=3 {
            let r = integer_order_residual(&g, k).unwrap();
            assert!(r < 1e-10, "q={q} k={k}: {r}");
        }
    }
}

#[test]
fn semigroup_examples() {
    let g = positive_fn(0.5, FRAC_GRID.0, FRAC_GRID.1, |x| (1.0 + x) * (-x).exp());
    for (nu, mu) in [(0.3, 0.5), (0.5, 0.5), (1.0, -1.0), (0.7, -0.2)] {
        let r = frac_semigroup_residual(&g, nu, mu).unwrap();
        assert!(r < 1e-8, "({nu}, {mu}): {r}");
    }
}

#[test]
fn negative_branch_data_rejected() {
    let g = LatticeGrid::new(QParams::new(0.5).unwrap(), 0, 40).unwrap();
    let f = LatticeFunction::from_fn(g, |x| C64::new(x, 0.0));
    assert!(matches!(frac_apply(&f, 0.5), Err(QError::Domain(_))));
}

#[test]
fn shallow_grid_is_a_coverage_error() {
    let g = positive_fn(0.7, 0, 5, |x| (-x).exp());
    assert!(matches!(frac_apply(&g, 0.5), Err(QError::Coverage(_))));
}

#[test]
fn weights_terminate_for_integer_orders() {
    let params = QParams::new(0.5).unwrap();
    for k in 0..5 {
        let w = frac_weights(-(k as f64), 50, &params).unwrap();
        assert_eq!(w.len(), k + 1, "k={k}");
    }
    assert_eq!(frac_weights(0.5, 30, &params).unwrap().len(), 30);
}

#[test]
fn pairing_of_function_vanishing_near_origin_is_plain_sum() {
    // no jet to subtract: ⟨s₊^{ν−1}, ψ⟩ = (1−q²) Σ s^ν ψ(s)
    let q = 0.5;
    let (p, a) = (q * q, 1.0 - q * q);
    let grid = LatticeGrid::new(QParams::new(q).unwrap(), -10, 60).unwrap();
    let bump = |x: f64| if x > p.powi(4) { (-x * x).exp() * (x - p.powi(4)).powi(6) } else { 0.0 };
    let psi = LatticeFunction::from_fn(grid, |x| C64::new(bump(x), 0.0));
    for (nu, n_reg) in [(0.5, 0), (-0.5, 1), (-1.5, 2)] {
        let got = splus_pairing(nu, &psi, n_reg).unwrap();
        let want: f64 = a * (-10..=60).map(|m: i32| p.powi(m).powf(nu) * bump(p.powi(m))).sum::<f64>();
        assert!((got.re - want).abs() < 1e-9 * want.abs(), "nu={nu}: {} vs {want}", got.re);
    }
}

#[test]
fn pairing_independent_of_regularization_order() {
    let grid = LatticeGrid::new(QParams::new(0.5).unwrap(), -10, 60).unwrap();
    let psi = LatticeFunction::from_fn(grid, |x| C64::new((-x * x).exp() * (1.0 + x), 0.0));
    for (nu, a, b) in [(0.5, 0, 3), (-0.5, 1, 3), (0.3, 0, 2)] {
        let (u, v) = (splus_pairing(nu, &psi, a).unwrap(), splus_pairing(nu, &psi, b).unwrap());
        assert!((u - v).norm() < 1e-9 * v.norm(), "nu={nu}");
    }
    assert!(matches!(splus_pairing(-1.0, &psi, 2), Err(QError::Pole(_))));
    assert!(matches!(splus_pairing(-2.5, &psi, 1), Err(QError::Domain(_))));
}

#[test]
fn residues_at_poles() {
    for q in [0.4, 0.6] {
        let params = QParams::new(q).unwrap();
        let grid = LatticeGrid::new(params, -10, 60).unwrap();
        // ψ(0) = 1, ψ′(0) = 1
        let psi = LatticeFunction::from_fn(grid, |x| C64::new((-x * x).exp() * (1.0 + x), 0.0));
        for k in 0..=1 {
            let probe = splus_residue_probe(k, 1e-7, &psi).unwrap();
            let exact = splus_residue(k, C64::new(1.0, 0.0), &params);
            assert!((probe / exact - 1.0).norm() < 1e-4, "q={q} k={k}: {probe} vs {exact}");
        }
    }
}

#[test]
fn taylor_jet_of_known_function() {
    let grid = LatticeGrid::new(QParams::new(0.5).unwrap(), 0, 60).unwrap();
    let psi = LatticeFunction::from_fn(grid, |x| C64::new(x.exp(), 0.0));
    let jet = taylor_jet(&psi, 3).unwrap();
    for (l, want) in [1.0, 1.0, 0.5, 1.0 / 6.0].iter().enumerate() {
        assert!((jet[l].re - want).abs() < 1e-5, "l={l}: {}", jet[l]);
    }
}

#[test]
fn vandermonde_symbolic_and_numeric() {
    let params = QParams::new(0.5).unwrap();
    assert!(q_vandermonde_check(0.3, -1.2, 12, &params).unwrap());
}

proptest! {
    #[test]
    fn primitive_of_power(q in 0.3f64..0.7, nu in -0.9f64..2.0, a in 0i32..3) {
        // ∂^{−ν}s^a = (1−q²)^ν (q^{2(ν+a+1)};q²)_∞/(q^{2(a+1)};q²)_∞ · s^{a+ν}
        let p = q * q;
        let g = positive_fn(q, -4, 160, |x| x.powi(a));
        let f = frac_apply(&g, nu).unwrap();
        let c = (1.0 - p).powf(nu) * poch_inf(p.powf(nu + a as f64 + 1.0), p) / poch_inf(p.powi(a + 1), p);
        // below ≈ 1e−280 samples or results turn subnormal and lose digits
        let normal = |m: i64| p.powf(m as f64 * (a as f64 + nu.max(0.0))) > 1e-280;
        for m in f.grid.indices().step_by(5).filter(|&m| normal(m)) {
            let s = p.powi(m as i32);
            let want = c * s.powf(a as f64 + nu);
            let got = f.at(Sign::Pos, m).re;
            prop_assert!((got - want).abs() <= 1e-11 * want.abs(), "m={} {} vs {}", m, got, want);
        }
    }

    #[test]
    fn vandermonde_numeric(nu in -2.0f64..2.0, mu in -2.0f64..2.0, q in 0.3f64..0.7) {
        let r = q_vandermonde_residual(nu, mu, 8, &QParams::new(q).unwrap()).unwrap();
        prop_assert!(r < 1e-12, "{}", r);
    }
}
