use proptest::prelude::*;
use qlattice::braided::checks::{all_symbolic_checks, vandermonde_checks};
use qlattice::braided::kernel::{check_kernel_relation, kernel_relations};
use qlattice::braided::laurent::pochhammer_qpow;
use qlattice::braided::parse::evaluate;
use qlattice::braided::{gaussian_binomial, q_factorial, q_number, LaurentPolyQ};
use qlattice::qcore::{q_binomial, QParams};

fn nf(expr: &str) -> String {
    evaluate(expr).unwrap().to_string()
}

#[test]
fn every_symbolic_identity_holds() {
    let start = std::time::Instant::now();
    let checks = all_symbolic_checks().unwrap();
    assert!(!checks.is_empty());
    for c in &checks {
        assert!(c.holds, "{}: {}", c.id, c.detail);
        assert!(c.checked > 0, "{} checked nothing", c.id);
    }
    assert!(start.elapsed().as_secs_f64() < 30.0);
}

#[test]
fn kernel_relations_hold_on_truncated_kernels() {
    let rels = kernel_relations();
    assert_eq!(rels.len(), 6);
    for rel in &rels {
        assert_eq!(check_kernel_relation(rel, 10).unwrap(), None, "{}", rel.id);
    }
}

#[test]
fn expression_normal_forms() {
    assert_eq!(nf("z s"), "z*s");
    // zs = q²sz
    assert_eq!(nf("s z"), "(q^-2)*z*s");
    assert_eq!(nf("Ls s"), "(q^2)*s");
    assert_eq!(nf("ds s^3"), "(1 + q^2 + q^4)*s^2");
    assert_eq!(nf("dz z^-1"), "(-q^-2)*z^-2");
    assert_eq!(nf("T[xi1] s"), "s + xi1");
    assert_eq!(nf("Tstar[xi1] s"), "s + (-q^2)*xi1");
}

#[test]
fn malformed_expressions_rejected() {
    for bad in ["", "ds^", "w", "T[xi3] s", "z^x"] {
        assert!(evaluate(bad).is_err(), "{bad:?}");
    }
}

#[test]
fn vandermonde_exact_through_twelve() {
    let c = vandermonde_checks(12);
    assert!(c.holds, "{}", c.detail);
    assert_eq!(c.checked, 13);
}

#[test]
fn q_numbers_of_negative_argument() {
    // [−n] = −q^{−2n}[n]
    for n in 1..8 {
        let lhs = q_number::<qlattice::braided::Rational>(-n);
        let rhs = q_number::<qlattice::braided::Rational>(n).shift(-2 * n).scale(&(-num_one()));
        assert_eq!(lhs, rhs, "n={n}");
    }
}

fn num_one() -> qlattice::braided::Rational {
    qlattice::braided::Rational::from_integer(1.into())
}

#[test]
fn factorial_matches_pochhammer() {
    // [n]! (1−q²)^n = (q²;q²)_n
    for n in 0..8usize {
        let one_minus = &LaurentPolyQ::one() - &LaurentPolyQ::q_pow(2);
        let lhs = &q_factorial::<qlattice::braided::Rational>(n) * &one_minus.pow(n as u32);
        assert_eq!(lhs, pochhammer_qpow(1, n), "n={n}");
    }
}

proptest! {
    #[test]
    fn gaussian_binomial_pascal(l in 1i64..13, i in 0i64..13) {
        let g = |l, i| gaussian_binomial::<qlattice::braided::Rational>(l, i);
        let first = &g(l - 1, i - 1) + &g(l - 1, i).shift(2 * i);
        prop_assert_eq!(g(l, i), first);
        if i <= l {
            let second = &g(l - 1, i - 1).shift(2 * (l - i)) + &g(l - 1, i);
            prop_assert_eq!(g(l, i), second);
        }
    }

    #[test]
    fn exact_binomial_matches_float(l in 0i64..14, i in 0i64..14, q in 0.2f64..0.9) {
        let exact = gaussian_binomial::<qlattice::braided::Rational>(l, i).eval(q).re;
        let float = q_binomial(l, i, &QParams::new(q).unwrap());
        prop_assert!((exact - float).abs() <= 1e-12 * float.abs().max(1.0));
    }
}
