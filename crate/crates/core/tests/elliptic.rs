use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;

use modflow::elliptic::{
    eisenstein, invariants_from_generators, invariants_of, jacobi_cn, modulus_from_tau, sigma_w, wp, wp_direct,
    wp_prime, zeta_w, EllipticError, TruncationSpec,
};
use modflow::{make_lattice, solve_periodic_orbit, Lattice, UnimodularMatrix};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

fn unit_lattice(re: f64, im: f64, angle: f64) -> Lattice {
    let r = Complex64::from_polar(1.0, angle);
    make_lattice(r, r * c(re, im)).unwrap().lattice
}

#[test]
fn symmetric_lattices_kill_one_invariant() {
    let spec = TruncationSpec::default();
    let sq = invariants_of(&Lattice::square(), &spec).unwrap();
    let hex = invariants_of(&Lattice::hexagonal(), &spec).unwrap();
    assert!(sq.g3.norm() < 1e-9, "g3(square) = {}", sq.g3);
    assert!(hex.g2.norm() < 1e-9, "g2(hex) = {}", hex.g2);
    assert!(sq.g2.norm() > 1.0 && hex.g3.norm() > 1.0);
}

#[test]
fn invariants_match_eisenstein_sums() {
    let spec = TruncationSpec::default();
    for (re, im, angle) in [(0.1, 1.2, 0.3), (-0.4, 0.95, 2.0), (0.0, 2.5, -1.0)] {
        let l = unit_lattice(re, im, angle);
        let inv = invariants_of(&l, &spec).unwrap();
        let g4 = eisenstein(&l, 4, &spec).unwrap();
        let g6 = eisenstein(&l, 6, &spec).unwrap();
        assert!(rel(inv.g2, 60.0 * g4) < 1e-8);
        assert!(rel(inv.g3, 140.0 * g6) < 1e-8);
    }
}

#[test]
fn half_period_values_are_roots_of_the_cubic() {
    let inv = invariants_of(&unit_lattice(0.2, 1.1, 0.7), &TruncationSpec::default()).unwrap();
    let sum = inv.e1 + inv.e2 + inv.e3;
    assert!(sum.norm() < 1e-10);
    for e in [inv.e1, inv.e2, inv.e3] {
        let cubic = 4.0 * e * e * e - inv.g2 * e - inv.g3;
        assert!(cubic.norm() < 1e-9 * (1.0 + e.norm().powi(3)));
    }
}

#[test]
fn homogeneity_under_scaling() {
    let spec = TruncationSpec::default();
    let (w1, w2) = (c(1.0, 0.0), c(0.3, 1.1));
    let base = invariants_from_generators(w1, w2, &spec).unwrap();
    let lambda = c(1.7, -0.6);
    let scaled = invariants_from_generators(lambda * w1, lambda * w2, &spec).unwrap();
    assert!(rel(scaled.g2, base.g2 / lambda.powi(4)) < 1e-12);
    assert!(rel(scaled.g3, base.g3 / lambda.powi(6)) < 1e-12);
    let z = c(0.23, 0.41);
    let p = wp(z, &base).unwrap();
    assert!(rel(wp(lambda * z, &scaled).unwrap(), p / (lambda * lambda)) < 1e-12);
}

#[test]
fn flow_returns_to_the_same_functions_after_one_period() {
    let spec = TruncationSpec::default();
    for b in [UnimodularMatrix { a: 2, b: 1, c: 1, d: 1 }, UnimodularMatrix { a: 5, b: 2, c: 12, d: 5 }] {
        let orbit = solve_periodic_orbit(b).unwrap();
        let l = orbit.lattice();
        let start = invariants_of(&l, &spec).unwrap();
        let end = invariants_of(&l.flow(orbit.t0), &spec).unwrap();
        let close = |a: Complex64, b: Complex64| (a - b).norm() < 1e-9 * (1.0 + b.norm());
        assert!(close(end.g2, start.g2) && close(end.g3, start.g3));
        let middle = invariants_of(&l.flow(orbit.t0 / 2.0), &spec).unwrap();
        assert!(!close(middle.g2, start.g2) || !close(middle.g3, start.g3));
    }
}

#[test]
fn zeta_is_quasi_periodic() {
    let inv = invariants_of(&unit_lattice(0.3, 1.4, 0.2), &TruncationSpec::default()).unwrap();
    let (w1, w2) = inv.reduction().generators();
    let (eta1, eta2) = inv.quasi_periods();
    let z = c(0.137, 0.291);
    let z0 = zeta_w(z, &inv).unwrap();
    assert!((zeta_w(z + w1, &inv).unwrap() - z0 - eta1).norm() < 1e-9);
    assert!((zeta_w(z + w2, &inv).unwrap() - z0 - eta2).norm() < 1e-9);
}

#[test]
fn sigma_is_odd_with_unit_slope() {
    let inv = invariants_of(&unit_lattice(-0.2, 1.3, 1.1), &TruncationSpec::default()).unwrap();
    let z = c(0.21, -0.17);
    assert!((sigma_w(-z, &inv) + sigma_w(z, &inv)).norm() < 1e-12);
    let h = c(1e-6, 0.0);
    assert!((sigma_w(h, &inv) / h - 1.0).norm() < 1e-9);
}

#[test]
fn poles_are_reported() {
    let l = Lattice::square();
    let inv = invariants_of(&l, &TruncationSpec::default()).unwrap();
    assert!(matches!(wp(l.point(2, -1), &inv), Err(EllipticError::PoleAt { .. })));
    assert!(matches!(wp_prime(c(0.0, 0.0), &inv), Err(EllipticError::PoleAt { .. })));
}

#[test]
fn modulus_and_cn_special_values() {
    assert!((modulus_from_tau(c(0.0, 1.0)).unwrap() - 0.5).norm() < 1e-14);
    let k = 1.854_074_677_301_372;
    let m = c(0.5, 0.0);
    assert!(jacobi_cn(c(k, 0.0), m).norm() < 1e-12);
    assert!((jacobi_cn(c(2.0 * k, 0.0), m) + 1.0).norm() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn wp_is_even_and_doubly_periodic(
        re in -0.5f64..0.5, im in 0.7f64..2.0, angle in 0.0f64..(2.0 * PI),
        a in -1.0f64..1.0, b in -1.0f64..1.0, m in -3i64..=3, n in -3i64..=3,
    ) {
        let l = unit_lattice(re, im, angle);
        let inv = invariants_of(&l, &TruncationSpec::default()).unwrap();
        let z = l.omega1() * a + l.omega2() * b;
        let (fa, fb) = (a - a.round(), b - b.round());
        prop_assume!(fa.abs() > 0.05 || fb.abs() > 0.05);
        let p = wp(z, &inv).unwrap();
        let shifted = wp(z + l.point(m, n), &inv).unwrap();
        prop_assert!(rel(shifted, p) < 1e-9);
        prop_assert!(rel(wp(-z, &inv).unwrap(), p) < 1e-12);
        let dp = wp_prime(z, &inv).unwrap();
        prop_assert!((wp_prime(-z, &inv).unwrap() + dp).norm() <= 1e-9 * (1.0 + dp.norm()));
    }

    #[test]
    fn fast_wp_agrees_with_direct_sum(
        re in -0.5f64..0.5, im in 0.8f64..1.6, a in 0.1f64..0.9, b in 0.1f64..0.9,
    ) {
        let l = unit_lattice(re, im, 0.0);
        let spec = TruncationSpec::default();
        let inv = invariants_of(&l, &spec).unwrap();
        let z = l.omega1() * a + l.omega2() * b;
        prop_assert!(rel(wp(z, &inv).unwrap(), wp_direct(z, &l, &spec).unwrap()) < 1e-6);
    }

    #[test]
    fn cn_is_even(
        ur in -2.0f64..2.0, ui in -0.5f64..0.5, mr in 0.05f64..0.95, mi in -0.2f64..0.2,
    ) {
        let (u, m) = (c(ur, ui), c(mr, mi));
        let v = jacobi_cn(u, m);
        prop_assert!((jacobi_cn(-u, m) - v).norm() < 1e-10 * (1.0 + v.norm()));
    }
}
