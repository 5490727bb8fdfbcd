//! Jacobi theta functions in the half-period nome `q = exp(i pi tau)`, the
//! modulus `m = theta2^4 / theta3^4`, and Jacobi cn as a theta quotient.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::EllipticError;

const MAX_THETA_TERMS: usize = 10_000;
const DEGENERATE_M_TOL: f64 = 1e-12;

/// Theta constants `theta2(0)`, `theta3(0)`, `theta4(0)` for one `tau`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaNulls {
    pub theta2: Complex64,
    pub theta3: Complex64,
    pub theta4: Complex64,
}

impl ThetaNulls {
    pub fn new(tau: Complex64) -> Self {
        let [_, theta2, theta3, theta4] = thetas(Complex64::default(), tau);
        ThetaNulls { theta2, theta3, theta4 }
    }

    /// The parameter `m = (theta2 / theta3)^4`.
    pub fn modulus(&self) -> Complex64 {
        (self.theta2 / self.theta3).powi(4)
    }
}

/// `[theta1, theta2, theta3, theta4](v | tau)`, summed until terms fall below
/// double precision. Intended for `|Im v| <= pi Im(tau) / 2`.
pub fn thetas(v: Complex64, tau: Complex64) -> [Complex64; 4] {
    let i = Complex64::i();
    let q = (i * PI * tau).exp();
    let q_quarter = (i * PI * tau / 4.0).exp();
    let growth = (2.0 * v.im.abs()).exp();

    // theta3/theta4: 1 + 2 sum (+-1)^n q^(n^2) cos(2 n v)
    // theta1/theta2: 2 q^(1/4) sum (+-1)^n q^(n(n+1)) {sin, cos}((2n+1) v)
    let mut t1 = Complex64::default();
    let mut t2 = Complex64::default();
    let mut t3 = Complex64::new(1.0, 0.0);
    let mut t4 = Complex64::new(1.0, 0.0);

    let mut q_nn = Complex64::new(1.0, 0.0); // q^(n^2)
    let mut q_n_n1 = Complex64::new(1.0, 0.0); // q^(n(n+1))
    let mut q_odd = q; // q^(2n+1) for n = 0
    let mut q_even = q * q; // q^(2n+2) for n = 0
    let mut sign = 1.0;
    let mut grow = 1.0f64;
    for n in 0..MAX_THETA_TERMS {
        let nf = n as f64;
        let odd = v * (2.0 * nf + 1.0);
        t1 += q_n_n1 * odd.sin() * sign;
        t2 += q_n_n1 * odd.cos();
        if n > 0 {
            let c = (v * (2.0 * nf)).cos();
            t3 += 2.0 * q_nn * c;
            t4 += 2.0 * q_nn * c * sign;
        }
        let size = (q_nn.norm() + q_n_n1.norm()) * grow * growth;
        if n > 1 && size < 1e-18 {
            break;
        }
        // advance n -> n + 1
        q_nn *= q_odd;
        q_n_n1 *= q_even;
        q_odd *= q * q;
        q_even *= q * q;
        sign = -sign;
        grow *= growth;
        if !grow.is_finite() {
            break;
        }
    }
    [t1 * 2.0 * q_quarter, t2 * 2.0 * q_quarter, t3, t4]
}

/// `m(tau) = theta2(0)^4 / theta3(0)^4`.
pub fn modulus_from_tau(tau: Complex64) -> Result<Complex64, EllipticError> {
    if !tau.im.is_finite() || tau.im <= 0.0 || !tau.re.is_finite() {
        return Err(EllipticError::InvalidTau { tau });
    }
    Ok(ThetaNulls::new(tau).modulus())
}

/// Arithmetic-geometric mean with the "right" square root at every step.
fn agm(mut a: Complex64, mut b: Complex64) -> Complex64 {
    for _ in 0..64 {
        let a1 = (a + b) * 0.5;
        let mut b1 = (a * b).sqrt();
        if (a1 - b1).norm() > (a1 + b1).norm() {
            b1 = -b1;
        }
        a = a1;
        b = b1;
        if (a - b).norm() <= 1e-16 * a.norm() {
            break;
        }
    }
    (a + b) * 0.5
}

/// Period ratio `tau = i K(1 - m) / K(m)` for a Jacobi parameter `m`.
pub fn tau_from_modulus(m: Complex64) -> Result<Complex64, EllipticError> {
    let one = Complex64::new(1.0, 0.0);
    let k = agm(one, (one - m).sqrt()).inv();
    let k_prime = agm(one, m.sqrt()).inv();
    let tau = Complex64::i() * k_prime / k;
    if tau.im.is_nan() || tau.im <= 0.0 || !tau.re.is_finite() {
        return Err(EllipticError::ParameterDegenerate { m });
    }
    Ok(tau)
}

/// Brings `v` into `|Re v| <= pi/2`, `|Im v| <= pi Im(tau)/2`; returns the reduced
/// argument and the shifts `(k, j)` with `v = v0 + k pi + j pi tau`.
fn reduce_argument(v: Complex64, tau: Complex64) -> (Complex64, i64, i64) {
    let j = (v.im / (PI * tau.im)).round();
    let v1 = v - tau * (PI * j);
    let k = (v1.re / PI).round();
    (Complex64::new(v1.re - k * PI, v1.im), k as i64, j as i64)
}

/// cn as the theta quotient `theta4(0) theta2(v) / (theta2(0) theta4(v))` with
/// `v = u / theta3(0)^2`; here the argument is `v` itself.
pub(crate) fn cn_theta(v: Complex64, tau: Complex64, nulls: &ThetaNulls) -> Complex64 {
    if v == Complex64::default() {
        return Complex64::new(1.0, 0.0);
    }
    // cn(v + pi) = -cn(v), cn(v + pi tau) = -cn(v)
    let (v0, k, j) = reduce_argument(v, tau);
    let [_, t2, _, t4] = thetas(v0, tau);
    let val = nulls.theta4 * t2 / (nulls.theta2 * t4);
    if (k + j).rem_euclid(2) == 1 {
        -val
    } else {
        val
    }
}

#[cfg(test)]
/// sn as `theta3(0) theta1(v) / (theta2(0) theta4(v))`; used to cross-check cn.
pub(crate) fn sn_theta(v: Complex64, tau: Complex64, nulls: &ThetaNulls) -> Complex64 {
    // sn(v + pi) = -sn(v), sn(v + pi tau) = sn(v)
    let (v0, k, _) = reduce_argument(v, tau);
    let [t1, _, _, t4] = thetas(v0, tau);
    let val = nulls.theta3 * t1 / (nulls.theta2 * t4);
    if k.rem_euclid(2) == 1 {
        -val
    } else {
        val
    }
}

fn is_degenerate(m: Complex64) -> bool {
    m.norm() < DEGENERATE_M_TOL || (m - 1.0).norm() < DEGENERATE_M_TOL
}

/// Jacobi cn, failing with [`EllipticError::ParameterDegenerate`] at `m = 0` or `m = 1`.
pub fn jacobi_cn_checked(u: Complex64, m: Complex64) -> Result<Complex64, EllipticError> {
    if is_degenerate(m) {
        return Err(EllipticError::ParameterDegenerate { m });
    }
    if u == Complex64::default() {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let tau = tau_from_modulus(m)?;
    let nulls = ThetaNulls::new(tau);
    Ok(cn_theta(u / (nulls.theta3 * nulls.theta3), tau, &nulls))
}

/// Jacobi cn; the degenerate parameters use the limits `cos(u)` (m = 0) and `sech(u)` (m = 1).
pub fn jacobi_cn(u: Complex64, m: Complex64) -> Complex64 {
    if m.norm() < DEGENERATE_M_TOL {
        return u.cos();
    }
    if (m - 1.0).norm() < DEGENERATE_M_TOL {
        return u.cosh().inv();
    }
    jacobi_cn_checked(u, m).unwrap_or(Complex64::new(f64::NAN, f64::NAN))
}

#[cfg(test)]
pub(crate) fn jacobi_sn(u: Complex64, m: Complex64) -> Complex64 {
    let tau = tau_from_modulus(m).unwrap();
    let nulls = ThetaNulls::new(tau);
    sn_theta(u / (nulls.theta3 * nulls.theta3), tau, &nulls)
}
