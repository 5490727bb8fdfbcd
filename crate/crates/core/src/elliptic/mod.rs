//! Weierstrass elliptic functions attached to a lattice.
//!
//! Two evaluation routes exist side by side:
//!
//! * [`direct`] sums the defining lattice series shell by shell. It is slow but
//!   transparent and serves as the oracle.
//! * The functions in this module reduce the lattice to a basis `(1, tau)` with
//!   `Im tau >= sqrt(3)/2`, rescale by homogeneity, and evaluate trigonometric
//!   q-series in the nome `Q = q^2 = exp(2 pi i tau)`:
//!
//! ```text
//! P(z)     = pi^2 / sin^2(pi z) - eta1 - 8 pi^2 sum n Q^n/(1-Q^n) cos(2 pi n z)
//! P'(z)    = -2 pi^3 cos(pi z)/sin^3(pi z) + 16 pi^3 sum n^2 Q^n/(1-Q^n) sin(2 pi n z)
//! zeta(z)  = pi cot(pi z) + eta1 z + 4 pi sum Q^n/(1-Q^n) sin(2 pi n z)
//! sigma(z) = sin(pi z)/pi * exp(eta1 z^2 / 2) * prod (1 - 2 Q^n cos(2 pi z) + Q^2n)/(1-Q^n)^2
//! ```
//!
//! where `eta1 = 2 zeta(1/2) = pi^2 E2(tau) / 3`. The half-nome `q = exp(i pi tau)`
//! is the convention used for theta functions and reported in [`LatticeInvariants`].

pub mod direct;
pub mod theta;

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::lattice::{Lattice, LatticeError};
use crate::reduce::{reduce_generators, split_point, TauReduction};

pub use direct::{eisenstein, wp_direct, wp_prime_direct};
pub use theta::{jacobi_cn, jacobi_cn_checked, modulus_from_tau};

/// Distance from a lattice point (relative to the shortest period) treated as a pole.
pub const POLE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EllipticError {
    #[error("pole at z = {z}")]
    PoleAt { z: Complex64 },
    #[error("degenerate Jacobi parameter m = {m}")]
    ParameterDegenerate { m: Complex64 },
    #[error("tau = {tau} is not in the upper half-plane")]
    InvalidTau { tau: Complex64 },
    #[error("q-series tail bound {bound:e} after {qterms} terms exceeds tolerance {tol:e}")]
    TruncationInsufficient { qterms: usize, bound: f64, tol: f64 },
    #[error("invalid truncation: {0}")]
    InvalidTruncation(&'static str),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// Truncation parameters for lattice sums and q-series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationSpec {
    /// Shells `max(|m|, |n|) <= shells` visited by the direct sums.
    pub shells: usize,
    /// Maximum number of q-series terms.
    pub qterms: usize,
    /// Required bound on the omitted q-series tail.
    pub tol: f64,
}

impl Default for TruncationSpec {
    fn default() -> Self {
        TruncationSpec { shells: 60, qterms: 24, tol: 1e-9 }
    }
}

impl TruncationSpec {
    pub fn new(shells: usize, qterms: usize, tol: f64) -> Result<Self, EllipticError> {
        let spec = TruncationSpec { shells, qterms, tol };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), EllipticError> {
        if self.shells < 2 {
            return Err(EllipticError::InvalidTruncation("shells must be >= 2"));
        }
        if self.qterms < 4 {
            return Err(EllipticError::InvalidTruncation("qterms must be >= 4"));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(EllipticError::InvalidTruncation("tol must be positive"));
        }
        Ok(())
    }
}

/// Per-lattice precomputation shared by every evaluation on that lattice.
///
/// Immutable after construction; one instance can serve any number of threads.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeInvariants {
    pub g2: Complex64,
    pub g3: Complex64,
    /// `P(omega1/2)`, `P(omega2/2)`, `P((omega1 + omega2)/2)` of the reduced basis.
    pub e1: Complex64,
    pub e2: Complex64,
    pub e3: Complex64,
    /// Reduced period ratio.
    pub tau: Complex64,
    /// Half-period nome `exp(i pi tau)`.
    pub q: Complex64,
    reduction: TauReduction,
    /// Quasi-periods of the normalized lattice `(1, tau)`: `eta_k = 2 zeta(omega_k / 2)`.
    eta1: Complex64,
    eta2: Complex64,
    /// `Q^n` for n = 1..=nterms.
    q2_pow: Vec<Complex64>,
    /// `8 pi^2 n Q^n / (1 - Q^n)`
    wp_coeff: Vec<Complex64>,
    /// `16 pi^3 n^2 Q^n / (1 - Q^n)`
    wp_prime_coeff: Vec<Complex64>,
    /// `4 pi Q^n / (1 - Q^n)`
    zeta_coeff: Vec<Complex64>,
    /// `1 / (1 - Q^n)^2`
    sigma_norm: Vec<Complex64>,
    theta_nulls: theta::ThetaNulls,
}

/// Number of q-series terms at which `n^5 exp(-pi n Im tau)` drops below double precision.
fn terms_needed(tau_im: f64) -> usize {
    (1..512)
        .find(|&n| {
            let n = n as f64;
            n.powi(5) * (-PI * n * tau_im).exp() < 1e-17
        })
        .unwrap_or(512)
}

/// Computes `g2`, `g3`, the half-period values, and the series tables for `lattice`.
pub fn invariants_of(lattice: &Lattice, spec: &TruncationSpec) -> Result<LatticeInvariants, EllipticError> {
    invariants_from_generators(lattice.omega1(), lattice.omega2(), spec)
}

/// [`invariants_of`] for an arbitrary positively oriented generator pair, of any area.
pub fn invariants_from_generators(
    g1: Complex64,
    g2: Complex64,
    spec: &TruncationSpec,
) -> Result<LatticeInvariants, EllipticError> {
    spec.validate()?;
    let reduction = reduce_generators(g1, g2)?;
    let tau = reduction.tau;
    let nterms = terms_needed(tau.im).min(spec.qterms);
    let next = (nterms + 1) as f64;
    let tail = next.powi(5) * (-PI * next * tau.im).exp();
    if tail > spec.tol {
        return Err(EllipticError::TruncationInsufficient { qterms: spec.qterms, bound: tail, tol: spec.tol });
    }

    let big_q = (Complex64::i() * 2.0 * PI * tau).exp();
    let mut q2_pow = Vec::with_capacity(nterms);
    let mut wp_coeff = Vec::with_capacity(nterms);
    let mut wp_prime_coeff = Vec::with_capacity(nterms);
    let mut zeta_coeff = Vec::with_capacity(nterms);
    let mut sigma_norm = Vec::with_capacity(nterms);
    let (mut e2_sum, mut e4_sum, mut e6_sum) = (Complex64::default(), Complex64::default(), Complex64::default());
    let mut qn = Complex64::new(1.0, 0.0);
    for n in 1..=nterms {
        let nf = n as f64;
        qn *= big_q;
        let one_minus = 1.0 - qn;
        let a = qn / one_minus;
        q2_pow.push(qn);
        wp_coeff.push(a * (8.0 * PI * PI * nf));
        wp_prime_coeff.push(a * (16.0 * PI.powi(3) * nf * nf));
        zeta_coeff.push(a * (4.0 * PI));
        sigma_norm.push((one_minus * one_minus).inv());
        e2_sum += a * nf;
        e4_sum += a * nf.powi(3);
        e6_sum += a * nf.powi(5);
    }
    let e2 = 1.0 - 24.0 * e2_sum;
    let e4 = 1.0 + 240.0 * e4_sum;
    let e6 = 1.0 - 504.0 * e6_sum;
    let eta1 = e2 * (PI * PI / 3.0);

    let mut inv = LatticeInvariants {
        g2: Complex64::default(),
        g3: Complex64::default(),
        e1: Complex64::default(),
        e2: Complex64::default(),
        e3: Complex64::default(),
        tau,
        q: (Complex64::i() * PI * tau).exp(),
        reduction,
        eta1,
        eta2: Complex64::default(),
        q2_pow,
        wp_coeff,
        wp_prime_coeff,
        zeta_coeff,
        sigma_norm,
        theta_nulls: theta::ThetaNulls::new(tau),
    };
    // eta2 straight from the series at the cell edge, independent of the Legendre relation
    inv.eta2 = inv.zeta_normalized(tau / 2.0) * 2.0;

    let s = reduction.scale;
    inv.g2 = e4 * (4.0 * PI.powi(4) / 3.0) / s.powi(4);
    inv.g3 = e6 * (8.0 * PI.powi(6) / 27.0) / s.powi(6);
    let s2 = s * s;
    inv.e1 = inv.wp_normalized(Complex64::new(0.5, 0.0)) / s2;
    inv.e2 = inv.wp_normalized(tau / 2.0) / s2;
    inv.e3 = inv.wp_normalized((1.0 + tau) / 2.0) / s2;
    Ok(inv)
}

impl LatticeInvariants {
    /// The reduction used for every evaluation.
    pub fn reduction(&self) -> &TauReduction {
        &self.reduction
    }

    /// The reduced first generator (a shortest nonzero lattice vector).
    pub fn scale(&self) -> Complex64 {
        self.reduction.scale
    }

    /// Number of q-series terms in use.
    pub fn nterms(&self) -> usize {
        self.wp_coeff.len()
    }

    /// Full-period quasi-periods `(eta1, eta2)` of the reduced generator pair.
    pub fn quasi_periods(&self) -> (Complex64, Complex64) {
        let s = self.reduction.scale;
        (self.eta1 / s, self.eta2 / s)
    }

    /// Multiplies one coefficient of the P q-series by `factor`.
    ///
    /// Only for exercising the validation suites; an instance modified this way
    /// no longer computes P.
    #[doc(hidden)]
    pub fn perturb_wp_coefficient(&mut self, n: usize, factor: f64) {
        if let Some(c) = self.wp_coeff.get_mut(n.saturating_sub(1)) {
            *c *= factor;
        }
    }

    fn normalize(&self, z: Complex64) -> Complex64 {
        z / self.reduction.scale
    }

    /// P on the lattice `(1, tau)`; `z0` must lie in the centered rectangle.
    fn wp_normalized(&self, z0: Complex64) -> Complex64 {
        let s = (z0 * PI).sin();
        let u = (Complex64::i() * 2.0 * PI * z0).exp();
        let u_inv = u.inv();
        let (mut un, mut un_inv) = (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0));
        let mut sum = Complex64::default();
        for c in &self.wp_coeff {
            un *= u;
            un_inv *= u_inv;
            sum += c * (un + un_inv) * 0.5;
        }
        PI * PI / (s * s) - self.eta1 - sum
    }

    fn wp_prime_normalized(&self, z0: Complex64) -> Complex64 {
        let (s, c) = ((z0 * PI).sin(), (z0 * PI).cos());
        let u = (Complex64::i() * 2.0 * PI * z0).exp();
        let u_inv = u.inv();
        let (mut un, mut un_inv) = (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0));
        let mut sum = Complex64::default();
        for k in &self.wp_prime_coeff {
            un *= u;
            un_inv *= u_inv;
            sum += k * (un - un_inv) / Complex64::new(0.0, 2.0);
        }
        -2.0 * PI.powi(3) * c / (s * s * s) + sum
    }

    /// zeta on `(1, tau)` from the series, valid for `|Im z| <= Im tau / 2`.
    fn zeta_normalized(&self, z0: Complex64) -> Complex64 {
        let (s, c) = ((z0 * PI).sin(), (z0 * PI).cos());
        let u = (Complex64::i() * 2.0 * PI * z0).exp();
        let u_inv = u.inv();
        let (mut un, mut un_inv) = (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0));
        let mut sum = Complex64::default();
        for k in &self.zeta_coeff {
            un *= u;
            un_inv *= u_inv;
            sum += k * (un - un_inv) / Complex64::new(0.0, 2.0);
        }
        PI * c / s + self.eta1 * z0 + sum
    }

    fn sigma_normalized(&self, z0: Complex64) -> Complex64 {
        let s = (z0 * PI).sin();
        let cos2 = (z0 * 2.0 * PI).cos();
        let mut prod = Complex64::new(1.0, 0.0);
        for (qn, norm) in self.q2_pow.iter().zip(&self.sigma_norm) {
            prod *= (1.0 - 2.0 * qn * cos2 + qn * qn) * norm;
        }
        s / PI * (self.eta1 * z0 * z0 * 0.5).exp() * prod
    }

    /// Splits normalized `zn`, failing on a lattice point.
    fn split_checked(&self, z: Complex64) -> Result<(Complex64, i64, i64), EllipticError> {
        let (z0, m, n) = split_point(self.normalize(z), self.tau);
        if !(z0.re.is_finite() && z0.im.is_finite()) {
            return Err(EllipticError::PoleAt { z });
        }
        if z0.norm() < POLE_TOL {
            return Err(EllipticError::PoleAt { z });
        }
        Ok((z0, m, n))
    }
}

/// Weierstrass P.
pub fn wp(z: Complex64, inv: &LatticeInvariants) -> Result<Complex64, EllipticError> {
    let (z0, _, _) = inv.split_checked(z)?;
    let s = inv.reduction.scale;
    Ok(inv.wp_normalized(z0) / (s * s))
}

/// Derivative of Weierstrass P.
pub fn wp_prime(z: Complex64, inv: &LatticeInvariants) -> Result<Complex64, EllipticError> {
    let (z0, _, _) = inv.split_checked(z)?;
    let s = inv.reduction.scale;
    Ok(inv.wp_prime_normalized(z0) / (s * s * s))
}

/// Weierstrass zeta, `zeta' = -P`; quasi-periodic with increments `eta1`, `eta2`.
pub fn zeta_w(z: Complex64, inv: &LatticeInvariants) -> Result<Complex64, EllipticError> {
    let (z0, m, n) = inv.split_checked(z)?;
    let zn = inv.zeta_normalized(z0) + inv.eta1 * m as f64 + inv.eta2 * n as f64;
    Ok(zn / inv.reduction.scale)
}

/// Weierstrass sigma, entire, with `sigma(z) / z -> 1` at the origin.
///
/// Arguments outside the central cell are brought back with
/// `sigma(z + w) = (-1)^(m + n + mn) exp(eta(w) (z + w/2)) sigma(z)` for `w = m + n tau`.
/// Very large arguments overflow to a non-finite value.
pub fn sigma_w(z: Complex64, inv: &LatticeInvariants) -> Complex64 {
    let (z0, m, n) = split_point(inv.normalize(z), inv.tau);
    let mut val = inv.sigma_normalized(z0);
    if m != 0 || n != 0 {
        let w = inv.tau * n as f64 + m as f64;
        let eta = inv.eta1 * m as f64 + inv.eta2 * n as f64;
        val *= (eta * (z0 + w * 0.5)).exp();
        if (m + n + m * n).rem_euclid(2) == 1 {
            val = -val;
        }
    }
    val * inv.reduction.scale
}

/// Jacobi cn attached to the lattice: `cn(2K z / omega1, m(tau))` with `omega1`
/// the reduced first generator, so the quarter period `K` sits at `omega1 / 2`.
pub fn cn_on_lattice(z: Complex64, inv: &LatticeInvariants) -> Complex64 {
    let zn = inv.normalize(z);
    theta::cn_theta(zn * PI, inv.tau, &inv.theta_nulls)
}
