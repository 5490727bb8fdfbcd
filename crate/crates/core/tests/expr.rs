use num_complex::Complex64;
use proptest::prelude::*;

use modflow::elliptic::{invariants_of, wp, wp_prime, LatticeInvariants, TruncationSpec};
use modflow::expr::{eval_expr, parse_expr, EllipticExpr, RationalFunction};
use modflow::{make_lattice, solve_periodic_orbit, ExtComplex, Lattice, UnimodularMatrix};

const CORPUS: [&str; 50] = [
    "P",
    "P'",
    "sigma",
    "zeta",
    "cn",
    "1",
    "0",
    "i",
    "-i",
    "2.5e-3",
    "1+2i",
    "(1-2i)*P",
    "P^2",
    "P^3 - 2*P + 1",
    "P^-1",
    "1/P",
    "(P^2+1)/(P-3) + P'*(1/P)",
    "P' * P",
    "P'*(P^2 - i)",
    "P + P'",
    "P - P'",
    "-P'",
    "P'/P",
    "P'/(P^2 + 1)",
    "(P + 1)*(P - 1)",
    "(P+1)^3",
    "(P - 1e2)^2 / (P + 0.5i)",
    "2*P*3*P",
    "P/(P-1)/(P+1)",
    "((P))",
    "P^0",
    "P^10 + 1",
    "(3+4i)/(1-i)",
    "1/(P^2 - 4)",
    "P^2 + P' * (2i)",
    "(P^2 + P + 1) / (P^2 - P + 1)",
    "0.5*P' + 0.25*P",
    "P'*P + P'*P^2",
    "(1+i)*P^2 - (1-i)*P + 2",
    "P - P",
    "P'-P'",
    "P * (1/(P+2))",
    "(P^2 - 1)/(P - 1)",
    "1e-3 * P^4",
    "(P-2i)^-2",
    "P' / (P - 2) + 1/(P + 2)",
    "3.25i*P",
    "-(P^2)",
    "P*P*P*P - P'",
    "(P + i)/(P - i) + P'*(P + i)/(P - i)",
];

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn golden() -> (Lattice, LatticeInvariants) {
    let l = solve_periodic_orbit(UnimodularMatrix { a: 2, b: 1, c: 1, d: 1 }).unwrap().lattice();
    let inv = invariants_of(&l, &TruncationSpec::default()).unwrap();
    (l, inv)
}

fn poly(coeffs: &[(f64, f64)]) -> Vec<Complex64> {
    coeffs.iter().map(|&(re, im)| c(re, im)).collect()
}

#[test]
fn corpus_round_trips() {
    for text in CORPUS {
        let e = parse_expr(text).unwrap_or_else(|err| panic!("{text}: {err}"));
        let printed = e.to_string();
        let again = parse_expr(&printed).unwrap_or_else(|err| panic!("{text} -> {printed}: {err}"));
        assert_eq!(again, e, "{text} -> {printed}");
    }
}

#[test]
fn grammar_example_has_expected_parts() {
    let e = parse_expr("(P^2+1)/(P-3) + P'*(1/P)").unwrap();
    let r1 =
        RationalFunction::new(poly(&[(1.0, 0.0), (0.0, 0.0), (1.0, 0.0)]), poly(&[(-3.0, 0.0), (1.0, 0.0)])).unwrap();
    let r2 = RationalFunction::new(poly(&[(1.0, 0.0)]), poly(&[(0.0, 0.0), (1.0, 0.0)])).unwrap();
    assert_eq!(e, EllipticExpr::WeierstrassCombo { r1, r2 });
}

#[test]
fn nonlinear_derivative_is_rejected() {
    for text in ["P'^2", "P'*P'", "1/P'", "(P')^3", "P' + ", "P +* 2", "sigma + 1", "Q"] {
        assert!(parse_expr(text).is_err(), "{text}");
    }
    let err = parse_expr("P' + ").unwrap_err();
    assert_eq!(err.offset, 5);
}

#[test]
fn presets_evaluate_to_their_functions() {
    let (_, inv) = golden();
    let z = c(0.31, 0.12);
    assert_eq!(eval_expr(&parse_expr("P").unwrap(), z, &inv), ExtComplex::Finite(wp(z, &inv).unwrap()));
    assert_eq!(eval_expr(&parse_expr("P'").unwrap(), z, &inv), ExtComplex::Finite(wp_prime(z, &inv).unwrap()));
    assert_eq!(eval_expr(&EllipticExpr::wp(), c(0.0, 0.0), &inv), ExtComplex::Infinity);
}

#[test]
fn flow_action_closes_the_loop() {
    let orbit = solve_periodic_orbit(UnimodularMatrix { a: 3, b: 2, c: 1, d: 1 }).unwrap();
    let l = orbit.lattice();
    let spec = TruncationSpec::default();
    let (start, end) = (invariants_of(&l, &spec).unwrap(), invariants_of(&l.flow(orbit.t0), &spec).unwrap());
    let e = parse_expr("(P^2+1)/(P-3) + P'*(1/P)").unwrap();
    for z in [c(0.3, 0.1), c(-0.42, 0.77), c(1.3, -0.2)] {
        let (a, b) = (eval_expr(&e, z, &start).finite().unwrap(), eval_expr(&e, z, &end).finite().unwrap());
        assert!((a - b).norm() <= 1e-7 * a.norm().max(1.0));
    }
}

fn coeff() -> impl Strategy<Value = Complex64> {
    (-3.0f64..3.0, -3.0f64..3.0).prop_map(|(re, im)| c(re, im))
}

fn rational() -> impl Strategy<Value = RationalFunction> {
    (prop::collection::vec(coeff(), 1..4), prop::collection::vec(coeff(), 1..3))
        .prop_filter_map("zero denominator", |(num, den)| RationalFunction::new(num, den).ok())
}

fn combo() -> impl Strategy<Value = EllipticExpr> {
    (rational(), rational()).prop_map(|(r1, r2)| EllipticExpr::WeierstrassCombo { r1, r2 })
}

fn random_lattice() -> impl Strategy<Value = Lattice> {
    (-0.5f64..0.5, 0.8f64..1.8, 0.0f64..std::f64::consts::TAU).prop_map(|(re, im, angle)| {
        let r = Complex64::from_polar(1.0, angle);
        make_lattice(r, r * c(re, im)).unwrap().lattice
    })
}

fn is_total(v: ExtComplex) -> bool {
    match v {
        ExtComplex::Finite(w) => w.re.is_finite() && w.im.is_finite(),
        ExtComplex::Infinity => true,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn printing_round_trips(e in combo()) {
        let printed = e.to_string();
        prop_assert_eq!(parse_expr(&printed).unwrap(), e);
    }

    #[test]
    fn evaluation_is_total(
        e in combo(), l in random_lattice(), m in -2i64..=2, n in -2i64..=2,
        eps_exp in -16i32..0, angle in 0.0f64..std::f64::consts::TAU, a in -1.0f64..1.0, b in -1.0f64..1.0,
    ) {
        let inv = invariants_of(&l, &TruncationSpec::default()).unwrap();
        let near_pole = l.point(m, n) + Complex64::from_polar(10f64.powi(eps_exp), angle);
        let generic = l.omega1() * a + l.omega2() * b;
        for z in [near_pole, generic, l.point(m, n), l.omega1() * 0.5] {
            prop_assert!(is_total(eval_expr(&e, z, &inv)));
        }
        for preset in [EllipticExpr::Sigma, EllipticExpr::Zeta, EllipticExpr::JacobiCn] {
            prop_assert!(is_total(eval_expr(&preset, near_pole, &inv)));
        }
    }

    #[test]
    fn combos_are_doubly_periodic(e in combo(), l in random_lattice(), a in 0.1f64..0.9, b in 0.1f64..0.9) {
        let inv = invariants_of(&l, &TruncationSpec::default()).unwrap();
        let z = l.omega1() * a + l.omega2() * b;
        let base = eval_expr(&e, z, &inv);
        let Some(w) = base.finite() else { return Ok(()) };
        prop_assume!(w.norm() < 1e4);
        for shift in [l.omega1(), l.omega2(), -l.omega1() + 2.0 * l.omega2()] {
            let moved = eval_expr(&e, z + shift, &inv).finite().unwrap();
            prop_assert!((moved - w).norm() <= 1e-6 * w.norm().max(1.0));
        }
    }
}
