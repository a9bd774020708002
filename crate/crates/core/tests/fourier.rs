use proptest::prelude::*;
use qlattice::fourier::*;
use qlattice::lattice::{LatticeFunction, LatticeGrid, Sign};
use qlattice::qcore::{theta0, QParams, C64};
use qlattice::verify::{commutation_residuals, roundtrip_error, Sample, ORTHOGONALITY_GRID, ROUNDTRIP_GRID};
use qlattice::QError;

fn grid(q: f64, lo: i64, hi: i64) -> LatticeGrid {
    LatticeGrid::new(QParams::new(q).unwrap(), lo, hi).unwrap()
}

/// Σ_n q^{n(n−1)} xⁿ / (q²;q²)_n, the big exponential by its series.
fn big_e_series(x: C64, q: f64) -> C64 {
    let p = q * q;
    let (mut acc, mut term) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
    for n in 0..300 {
        acc += term;
        term = term * x * p.powi(n) / (1.0 - p.powi(n + 1));
    }
    acc
}

#[test]
fn forward_of_point_mass_matches_series_kernel() {
    // φ = δ at +q^{2m}: ψ(s) = (1−q²) q^{2m} E(i(1−q²)q² q^{2m} s)
    let q = 0.5;
    let (p, a) = (q * q, 1.0 - q * q);
    let g = grid(q, -4, 12);
    let m = 3;
    let mut phi = LatticeFunction::zeros(g);
    phi.set(Sign::Pos, m, C64::new(1.0, 0.0));
    let psi = fourier_forward(&phi, &TransformPlan::square(g)).unwrap();
    for s in Sign::BOTH {
        for n in g.indices() {
            let x = g.point(s, n);
            let want = big_e_series(C64::new(0.0, a * p * p.powi(m as i32) * x), q) * (a * p.powi(m as i32));
            let got = psi.at(s, n);
            assert!((got - want).norm() <= 1e-12 * want.norm().max(1e-3), "n={n}: {got} vs {want}");
        }
    }
}

#[test]
fn inverse_of_point_mass_uses_reciprocal_kernel() {
    // ψ = δ at +q^{2m}: φ(z) = (1−q²)q^{2m}/(2Θ₀) · 1/E(i(1−q²)q^{2m}z)
    let q = 0.6;
    let params = QParams::new(q).unwrap();
    let (p, a) = (q * q, 1.0 - q * q);
    let g = grid(q, -2, 10);
    let m = 4;
    let mut psi = LatticeFunction::zeros(g);
    psi.set(Sign::Pos, m, C64::new(1.0, 0.0));
    let phi = fourier_inverse(&psi, &TransformPlan::square(g)).unwrap();
    let th = theta0(&params).unwrap();
    for s in Sign::BOTH {
        for n in g.indices() {
            let x = g.point(s, n);
            let want = C64::new(a * p.powi(m as i32) / (2.0 * th), 0.0)
                / big_e_series(C64::new(0.0, a * p.powi(m as i32) * x), q);
            assert!((phi.at(s, n) - want).norm() <= 1e-12 * want.norm(), "n={n}");
        }
    }
}

#[test]
fn six_commutation_relations() {
    for q in [0.4, 0.5, 0.6] {
        for (name, r) in commutation_residuals(&QParams::new(q).unwrap()) {
            let r = r.unwrap();
            assert!(r < 1e-8, "q={q} {name}: {r}");
        }
    }
}

#[test]
fn orthogonality() {
    for q in [0.4, 0.6] {
        let params = QParams::new(q).unwrap();
        let p = params.p();
        let plan = TransformPlan::square(grid(q, ORTHOGONALITY_GRID.0, ORTHOGONALITY_GRID.1));
        let scale = orthogonality_scale(&params).unwrap();
        let one = orthogonality_sum(C64::new(1.0, 0.0), &plan).unwrap();
        assert!((one.regularized - scale).norm() / scale < 1e-6, "q={q}");
        for z in [p, 1.0 / p, -1.0] {
            let v = orthogonality_sum(C64::new(z, 0.0), &plan).unwrap();
            assert!(v.regularized.norm() / scale < 1e-6, "q={q} z={z}: {}", v.regularized);
        }
    }
}

#[test]
fn wynn_accelerates_alternating_series() {
    // partial sums of ln 2 = 1 − 1/2 + 1/3 − …
    let mut acc = 0.0;
    let sums: Vec<C64> = (1..=20)
        .map(|k| {
            acc += if k % 2 == 1 { 1.0 } else { -1.0 } / k as f64;
            C64::new(acc, 0.0)
        })
        .collect();
    let r = wynn_epsilon(&sums).unwrap();
    assert!((r.value.re - 2f64.ln()).abs() < 1e-10, "{}", r.value);
}

#[test]
fn indicator_round_trip() {
    for q in [0.3, 0.5, 0.7] {
        let g = grid(q, ROUNDTRIP_GRID.0, ROUNDTRIP_GRID.1);
        let e = roundtrip_error(&Sample::Indicator(3).on(g), &TransformPlan::square(g)).unwrap();
        assert!(e < 1e-6, "q={q}: {e}");
    }
}

#[test]
fn mismatched_window_is_a_size_error() {
    let g = grid(0.5, 0, 10);
    let plan = TransformPlan::square(grid(0.5, 0, 12));
    let f = LatticeFunction::zeros(g);
    assert!(matches!(fourier_forward(&f, &plan), Err(QError::Size(_))));
    let other = TransformPlan::new(grid(0.5, 0, 3), grid(0.4, 0, 3));
    assert!(matches!(other, Err(QError::Domain(_))));
}

#[test]
fn deep_negative_grid_reports_range() {
    let g = grid(0.5, -60, 0);
    let f = Sample::Gaussian.on(g);
    assert!(matches!(fourier_forward(&f, &TransformPlan::square(g)), Err(QError::Range { .. })));
}

proptest! {
    #[test]
    fn forward_is_linear(
        q in 0.3f64..0.7,
        a in prop::collection::vec(-1.0f64..1.0, 14),
        b in prop::collection::vec(-1.0f64..1.0, 14),
        k in -2.0f64..2.0,
    ) {
        let g = grid(q, 0, 6);
        let from = |v: &[f64]| LatticeFunction::from_branches(
            g,
            v[..7].iter().map(|&x| C64::new(x, 0.0)).collect(),
            v[7..].iter().map(|&x| C64::new(x, 0.0)).collect(),
        ).unwrap();
        let (fa, fb) = (from(&a), from(&b));
        let plan = TransformPlan::square(g);
        let sum = fa.zip(&fb.scale(C64::new(k, 0.0)), |x, y| x + y).unwrap();
        let lhs = fourier_forward(&sum, &plan).unwrap();
        let (ta, tb) = (fourier_forward(&fa, &plan).unwrap(), fourier_forward(&fb, &plan).unwrap());
        for s in Sign::BOTH {
            for n in g.indices() {
                let want = ta.at(s, n) + tb.at(s, n) * k;
                let scale = ta.at(s, n).norm() + tb.at(s, n).norm() * k.abs() + 1e-300;
                prop_assert!((lhs.at(s, n) - want).norm() <= 1e-12 * scale.max(1.0));
            }
        }
    }
}
