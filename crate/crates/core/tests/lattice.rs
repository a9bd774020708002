use proptest::prelude::*;
use qlattice::lattice::*;
use qlattice::qcore::{QParams, C64};

fn grid(q: f64, lo: i64, hi: i64) -> LatticeGrid {
    LatticeGrid::new(QParams::new(q).unwrap(), lo, hi).unwrap()
}

fn gauss(x: f64) -> C64 {
    C64::new((-x * x).exp(), 0.0)
}

/// (1 − p^n)/(1 − p) for any integer n, summed directly.
fn q_int(n: i32, p: f64) -> f64 {
    (1.0 - p.powi(n)) / (1.0 - p)
}

#[test]
fn power_rule_positive_and_negative_exponents() {
    for q in [0.4, 0.6] {
        let g = grid(q, -3, 10);
        let (p, alpha) = (q * q, 1.0 - q * q);
        for n in -8i32..=8 {
            let f = LatticeFunction::from_fn(g, |x| C64::new(x.powi(n), 0.0));
            for k in 1..=8usize {
                let d = q_derivative(&f, k).unwrap();
                let coeff: f64 = (0..k as i32).map(|i| q_int(n - i, p)).product();
                for s in Sign::BOTH {
                    for m in d.grid.indices() {
                        let x = d.grid.point(s, m);
                        let want = coeff * x.powi(n - k as i32);
                        let got = d.at(s, m).re;
                        // the k-th quotient divides by αxpⁱ for i < k, so it rounds at that size
                        let divisor: f64 = (0..k as i32).map(|i| alpha * x.abs() * p.powi(i)).product();
                        let sample = (0..=k as i32).map(|i| (x.abs() * p.powi(i)).powi(n)).fold(0.0, f64::max);
                        let scale = want.abs().max(sample / divisor).max(1.0);
                        assert!(
                            (got - want).abs() <= 1e-12 * scale,
                            "q={q} n={n} k={k} m={m}: {got} vs {want}"
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn derivative_shrinks_window() {
    let g = grid(0.5, 0, 10);
    let d = q_derivative(&LatticeFunction::from_fn(g, gauss), 3).unwrap();
    assert_eq!((d.grid.m_min, d.grid.m_max), (0, 7));
    assert!(q_derivative(&LatticeFunction::from_fn(grid(0.5, 0, 1), gauss), 2).is_err());
}

#[test]
fn derivative_at_origin_approaches_classical() {
    // ∂ sin at deep index tends to cos(0) = 1
    let g = grid(0.5, 0, 40);
    let f = LatticeFunction::from_fn(g, |x| C64::new(x.sin(), 0.0));
    let d = q_derivative(&f, 1).unwrap();
    assert!((d.at(Sign::Pos, 39).re - 1.0).abs() < 1e-12);
}

#[test]
fn lambda_scaling_of_integral() {
    // ∫ f(q^{2k} z) dz = q^{−2k} ∫ f
    let g = grid(0.5, -40, 120);
    let f = LatticeFunction::from_fn(g, gauss);
    let base = jackson_integral(&f);
    for k in [-2i64, 1, 3] {
        let scaled = jackson_integral(&lambda_scale(&f, k));
        let want = base * 0.25f64.powi(-(k as i32));
        assert!((scaled - want).norm() < 1e-12 * want.norm(), "k={k}");
    }
}

#[test]
fn jackson_integral_of_gaussian() {
    // Σ α p^m (e^{−p^{2m}}·2) over a wide window against a direct sum
    let q: f64 = 0.5;
    let (p, a) = (q * q, 1.0 - q * q);
    let g = grid(q, -20, 200);
    let got = jackson_integral(&LatticeFunction::from_fn(g, gauss)).re;
    let want: f64 = (-20..=200).map(|m: i32| 2.0 * a * p.powi(m) * (-p.powi(2 * m)).exp()).sum();
    assert!((got - want).abs() < 1e-14 * want);
}

#[test]
fn integration_by_parts() {
    for q in [0.4, 0.6] {
        let g = grid(q, -20, 160);
        let phi = LatticeFunction::from_fn(g, |x| C64::new((-x * x).exp() * (1.0 + x), 0.0));
        let psi = LatticeFunction::from_fn(g, |x| C64::new((-(x - 0.3).powi(2)).exp(), 0.1 * x));
        assert!(integrate_by_parts_residual(&phi, &psi, 1).unwrap() < 1e-10, "q={q}");
        assert!(integrate_by_parts_residual(&phi, &psi, 2).unwrap() < 1e-9, "q={q}");
    }
}

#[test]
fn integral_of_derivative_bounded_by_ends() {
    let g = grid(0.5, -6, 60);
    let f = LatticeFunction::from_fn(g, |x| C64::new((-x * x / 4.0).exp(), 0.0));
    let d = q_derivative(&f, 1).unwrap();
    let i = jackson_integral(&d).norm();
    assert!(i <= boundary_residual_bound(&f) + 1e-14);
}

#[test]
fn csv_rejects_malformed() {
    let params = QParams::new(0.5).unwrap();
    assert!(read_csv("".as_bytes(), params).is_err());
    assert!(read_csv("a,b,c,d\n1,0,1,0\n".as_bytes(), params).is_err());
    // missing the negative branch
    assert!(read_csv("sign,m,re,im\n1,0,1,0\n".as_bytes(), params).is_err());
}

fn lattice_fn() -> impl Strategy<Value = LatticeFunction> {
    (0.2f64..0.8, -5i64..5, 1i64..12).prop_flat_map(|(q, lo, n)| {
        let len = (n + 1) as usize;
        (
            Just(grid(q, lo, lo + n)),
            prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), len * 2),
        )
            .prop_map(move |(g, v)| {
                let c: Vec<C64> = v.into_iter().map(|(a, b)| C64::new(a, b)).collect();
                LatticeFunction::from_branches(g, c[..len].to_vec(), c[len..].to_vec()).unwrap()
            })
    })
}

proptest! {
    #[test]
    fn csv_round_trip(f in lattice_fn()) {
        let mut buf = Vec::new();
        write_csv(&mut buf, &f).unwrap();
        let back = read_csv(buf.as_slice(), f.grid.params).unwrap();
        prop_assert_eq!(back.grid.m_min, f.grid.m_min);
        prop_assert_eq!(back.grid.m_max, f.grid.m_max);
        for s in Sign::BOTH {
            prop_assert_eq!(back.branch(s), f.branch(s));
        }
    }

    #[test]
    fn seminorm_monotone_under_restriction(f in lattice_fn(), k in -2i32..3, cut in 0i64..3) {
        prop_assume!(f.grid.len() as i64 > cut + 2);
        let full = seminorm(&f, k, 1).unwrap();
        let part = seminorm(&f.restrict(f.grid.m_min + cut, f.grid.m_max).unwrap(), k, 1).unwrap();
        prop_assert!(part <= full);
    }

    #[test]
    fn derivative_is_linear(f in lattice_fn(), a in -3f64..3.0) {
        let d = q_derivative(&f, 1).unwrap();
        let ds = q_derivative(&f.scale(C64::new(a, 0.0)), 1).unwrap();
        for s in Sign::BOTH {
            for m in d.grid.indices() {
                let want = d.at(s, m) * a;
                prop_assert!((ds.at(s, m) - want).norm() <= 1e-12 * want.norm().max(1.0));
            }
        }
    }
}
