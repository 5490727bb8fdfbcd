//! Cross-validation suites for the numerical stack.
//!
//! Each suite reports the largest residual it saw against a fixed threshold.
//! Random inputs come from a seeded generator so runs are repeatable.

use std::f64::consts::PI;
use std::fmt;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::elliptic::{
    invariants_of, sigma_w, wp, wp_direct, wp_prime, wp_prime_direct, EllipticError, LatticeInvariants, TruncationSpec,
};
use crate::lattice::{make_lattice, Lattice, UnimodularMatrix};
use crate::orbit::{closure_matrix, solve_periodic_orbit, verify_closure};

const SEED: u64 = 0x006d_6f64_666c_6f77;

pub const CLOSURE_TOL: f64 = 1e-9;
pub const ORACLE_TOL: f64 = 1e-6;
pub const DE_TOL: f64 = 1e-6;
pub const LEGENDRE_TOL: f64 = 1e-8;
pub const SIGMA_TOL: f64 = 1e-4;
pub const LOOP_TOL: f64 = 1e-7;
/// Sample points keep this fraction of `|omega1|` away from the lattice.
pub const POLE_CLEARANCE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Quick,
    Full,
}

impl Level {
    fn pick(self, quick: usize, full: usize) -> usize {
        match self {
            Level::Quick => quick,
            Level::Full => full,
        }
    }
}

/// Deliberate defects for checking that the suites catch them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Fault {
    /// Scales the first coefficient of the P q-series.
    WpCoefficient(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub name: &'static str,
    pub samples: usize,
    pub max_residual: f64,
    pub threshold: f64,
    pub elapsed: Duration,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.max_residual < self.threshold
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<20} max residual {:.3e} (threshold {:.0e}, {} samples, {:.2?})",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.max_residual,
            self.threshold,
            self.samples,
            self.elapsed
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub suites: Vec<SuiteReport>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(SuiteReport::passed)
    }

    pub fn suite(&self, name: &str) -> Option<&SuiteReport> {
        self.suites.iter().find(|s| s.name == name)
    }
}

/// A random unit-area lattice, sometimes pushed far along the flow.
pub fn random_lattice(rng: &mut StdRng) -> Lattice {
    let tau = Complex64::new(rng.random_range(-0.5..0.5), rng.random_range(0.6..2.5));
    let rot = Complex64::from_polar(1.0, rng.random_range(0.0..2.0 * PI));
    let l = make_lattice(rot, rot * tau).expect("independent generators").lattice;
    if rng.random_bool(0.5) {
        l.flow(rng.random_range(-3.0..3.0))
    } else {
        l
    }
}

/// Distance from `z` to the nearest lattice point.
pub fn distance_to_lattice(z: Complex64, inv: &LatticeInvariants) -> f64 {
    let s = inv.scale();
    let (z0, _, _) = crate::reduce::split_point(z / s, inv.tau);
    let mut best = f64::INFINITY;
    for m in -1..=1 {
        for n in -1..=1 {
            best = best.min((z0 - m as f64 - inv.tau * n as f64).norm());
        }
    }
    best * s.norm()
}

/// A random point of the cell `[-1.5, 1.5]^2` in lattice coordinates, clear of the poles.
pub fn random_point(rng: &mut StdRng, lattice: &Lattice, inv: &LatticeInvariants) -> Complex64 {
    loop {
        let z = lattice.omega1() * rng.random_range(-1.5..1.5) + lattice.omega2() * rng.random_range(-1.5..1.5);
        if distance_to_lattice(z, inv) > POLE_CLEARANCE * inv.scale().norm() {
            return z;
        }
    }
}

fn invariants(lattice: &Lattice, fault: Option<Fault>) -> Result<LatticeInvariants, EllipticError> {
    let mut inv = invariants_of(lattice, &TruncationSpec::default())?;
    if let Some(Fault::WpCoefficient(factor)) = fault {
        inv.perturb_wp_coefficient(1, factor);
    }
    Ok(inv)
}

fn timed(name: &'static str, threshold: f64, body: impl FnOnce() -> (usize, f64)) -> SuiteReport {
    let start = Instant::now();
    let (samples, max_residual) = body();
    SuiteReport { name, samples, max_residual, threshold, elapsed: start.elapsed() }
}

/// Every hyperbolic `B` with entries in `[-r, r]` and determinant 1.
pub fn hyperbolic_matrices(r: i64) -> Vec<UnimodularMatrix> {
    let mut out = Vec::new();
    for a in -r..=r {
        for b in -r..=r {
            for c in -r..=r {
                for d in -r..=r {
                    if a * d - b * c == 1 && (a + d).abs() > 2 {
                        out.push(UnimodularMatrix { a, b, c, d });
                    }
                }
            }
        }
    }
    out
}

/// Worst distance of the closure matrix from the integers; failures count as infinite.
pub fn orbit_closure_suite(level: Level) -> SuiteReport {
    let r = level.pick(6, 20) as i64;
    timed("orbit-closure", CLOSURE_TOL, || {
        let ms = hyperbolic_matrices(r);
        let mut worst: f64 = 0.0;
        for b in &ms {
            let residual = match solve_periodic_orbit(*b) {
                Ok(orbit) => match verify_closure(&orbit, CLOSURE_TOL) {
                    Ok(cert) if cert.trace() == orbit.solved_matrix().trace() => {
                        closure_matrix(&orbit).iter().flatten().map(|v| (v - v.round()).abs()).fold(0.0, f64::max)
                    }
                    _ => f64::INFINITY,
                },
                Err(_) => f64::INFINITY,
            };
            worst = worst.max(residual);
        }
        (ms.len(), worst)
    })
}

fn relative(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

/// Fast P and P' against the direct lattice sums.
///
/// P is compared relatively; P' is measured against `max(|P'|, |P|^1.5)`.
pub fn oracle_suite(level: Level, fault: Option<Fault>) -> SuiteReport {
    let (lattices, points) = (level.pick(3, 10), level.pick(20, 100));
    timed("oracle-equivalence", ORACLE_TOL, || {
        let mut rng = StdRng::seed_from_u64(SEED ^ 1);
        let spec = TruncationSpec::default();
        let mut worst: f64 = 0.0;
        for _ in 0..lattices {
            let l = random_lattice(&mut rng);
            let Ok(inv) = invariants(&l, fault) else { return (0, f64::INFINITY) };
            for _ in 0..points {
                let z = random_point(&mut rng, &l, &inv);
                let residual =
                    match (wp(z, &inv), wp_direct(z, &l, &spec), wp_prime(z, &inv), wp_prime_direct(z, &l, &spec)) {
                        (Ok(p), Ok(p_ref), Ok(dp), Ok(dp_ref)) => {
                            let weight = dp_ref.norm().max(p_ref.norm().powf(1.5));
                            relative(p, p_ref).max((dp - dp_ref).norm() / weight)
                        }
                        _ => f64::INFINITY,
                    };
                worst = worst.max(residual);
            }
        }
        (lattices * points, worst)
    })
}

/// `P'^2 = 4P^3 - g2 P - g3`, scaled by `1 + |P|^3`.
pub fn de_residual(z: Complex64, inv: &LatticeInvariants) -> Result<f64, EllipticError> {
    let p = wp(z, inv)?;
    let dp = wp_prime(z, inv)?;
    let rhs = 4.0 * p * p * p - inv.g2 * p - inv.g3;
    Ok((dp * dp - rhs).norm() / (1.0 + p.norm().powi(3)))
}

pub fn de_suite(level: Level, fault: Option<Fault>) -> SuiteReport {
    let (lattices, points) = (level.pick(4, 10), level.pick(25, 50));
    timed("differential-eq", DE_TOL, || {
        let mut rng = StdRng::seed_from_u64(SEED ^ 2);
        let mut worst: f64 = 0.0;
        for _ in 0..lattices {
            let l = random_lattice(&mut rng);
            let Ok(inv) = invariants(&l, fault) else { return (0, f64::INFINITY) };
            for _ in 0..points {
                let z = random_point(&mut rng, &l, &inv);
                worst = worst.max(de_residual(z, &inv).unwrap_or(f64::INFINITY));
            }
        }
        (lattices * points, worst)
    })
}

/// `|eta1 omega2 - eta2 omega1 - 2 pi i|` for the reduced basis.
pub fn legendre_residual(inv: &LatticeInvariants) -> f64 {
    let (w1, w2) = inv.reduction().generators();
    let (eta1, eta2) = inv.quasi_periods();
    (eta1 * w2 - eta2 * w1 - Complex64::new(0.0, 2.0 * PI)).norm()
}

pub fn legendre_suite(level: Level) -> SuiteReport {
    let lattices = level.pick(10, 50);
    timed("legendre", LEGENDRE_TOL, || {
        let mut rng = StdRng::seed_from_u64(SEED ^ 3);
        let mut worst: f64 = 0.0;
        for _ in 0..lattices {
            let l = random_lattice(&mut rng);
            worst = worst.max(invariants(&l, None).map_or(f64::INFINITY, |inv| legendre_residual(&inv)));
        }
        (lattices, worst)
    })
}

/// Relative mismatch between the second difference of `ln sigma` and `-P` at `z`.
pub fn sigma_residual(z: Complex64, inv: &LatticeInvariants) -> Result<f64, EllipticError> {
    let h = 2e-4 * inv.scale().norm();
    let s0 = sigma_w(z, inv);
    let up = (sigma_w(z + h, inv) / s0).ln();
    let down = (sigma_w(z - h, inv) / s0).ln();
    let second = (up + down) / (h * h);
    let p = wp(z, inv)?;
    Ok(relative(second, -p))
}

pub fn sigma_suite(level: Level) -> SuiteReport {
    let (lattices, points) = (level.pick(2, 5), 20);
    timed("sigma-equation", SIGMA_TOL, || {
        let mut rng = StdRng::seed_from_u64(SEED ^ 4);
        let mut worst: f64 = 0.0;
        for _ in 0..lattices {
            let l = random_lattice(&mut rng);
            let Ok(inv) = invariants(&l, None) else { return (0, f64::INFINITY) };
            for _ in 0..points {
                let z = random_point(&mut rng, &l, &inv);
                worst = worst.max(sigma_residual(z, &inv).unwrap_or(f64::INFINITY));
            }
        }
        (lattices * points, worst)
    })
}

/// P on `t0 . L` against P on `L` for lattices on closed orbits.
pub fn loop_closure_suite(level: Level, fault: Option<Fault>) -> SuiteReport {
    let matrices: Vec<UnimodularMatrix> = match level {
        Level::Quick => vec![UnimodularMatrix { a: 2, b: 1, c: 1, d: 1 }, UnimodularMatrix { a: 5, b: 2, c: 12, d: 5 }],
        Level::Full => hyperbolic_matrices(3),
    };
    timed("loop-closure", LOOP_TOL, || {
        let mut rng = StdRng::seed_from_u64(SEED ^ 5);
        let mut worst: f64 = 0.0;
        let mut samples = 0;
        for b in &matrices {
            let Ok(orbit) = solve_periodic_orbit(*b) else { return (samples, f64::INFINITY) };
            let l = orbit.lattice();
            let (Ok(start), Ok(end)) = (invariants(&l, fault), invariants(&l.flow(orbit.t0), fault)) else {
                return (samples, f64::INFINITY);
            };
            for _ in 0..10 {
                let z = random_point(&mut rng, &l, &start);
                worst = worst.max(match (wp(z, &start), wp(z, &end)) {
                    (Ok(a), Ok(b)) => relative(b, a),
                    _ => f64::INFINITY,
                });
                samples += 1;
            }
        }
        (samples, worst)
    })
}

/// Runs every suite.
pub fn run_validation(level: Level, fault: Option<Fault>) -> ValidationReport {
    ValidationReport {
        suites: vec![
            orbit_closure_suite(level),
            oracle_suite(level, fault),
            de_suite(level, fault),
            legendre_suite(level),
            sigma_suite(level),
            loop_closure_suite(level, fault),
        ],
    }
}
