//! Elliptic expressions `f = R1(P) + P' * R2(P)` with rational `R1`, `R2`,
//! plus the quasi-elliptic presets sigma, zeta and Jacobi cn.

mod parse;

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::elliptic::{cn_on_lattice, sigma_w, wp, wp_prime, zeta_w, LatticeInvariants};
use crate::ext::ExtComplex;

pub use parse::{parse_complex, parse_expr, ParseError};

/// Relative size of the step used when a product `0 * inf` shows up.
pub const PERTURBATION: f64 = 1e-9;

fn trim(mut c: Vec<Complex64>) -> Vec<Complex64> {
    while c.last().is_some_and(|v| *v == Complex64::default()) {
        c.pop();
    }
    c
}

fn poly_mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Complex64::default(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(out)
}

fn poly_add(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    let mut out = long.to_vec();
    for (o, s) in out.iter_mut().zip(short) {
        *o += s;
    }
    trim(out)
}

/// Horner evaluation with a running rounding-error bound for the result.
fn horner(c: &[Complex64], w: Complex64) -> (Complex64, f64) {
    let Some((last, rest)) = c.split_last() else {
        return (Complex64::default(), 0.0);
    };
    let mut b = *last;
    let mut bound = b.norm() / 2.0;
    let aw = w.norm();
    for a in rest.iter().rev() {
        b = b * w + a;
        bound = bound * aw + b.norm();
    }
    // complex multiply-add roughly doubles the real-arithmetic constant
    let err = 4.0 * f64::EPSILON * (2.0 * bound - b.norm()).max(0.0);
    (b, err)
}

/// Divides `c` by `(x - root)` and drops the remainder.
fn deflate(c: &[Complex64], root: Complex64) -> Vec<Complex64> {
    if c.len() <= 1 {
        return c.to_vec();
    }
    let mut out = vec![Complex64::default(); c.len() - 1];
    let mut carry = Complex64::default();
    for k in (1..c.len()).rev() {
        carry = c[k] + carry * root;
        out[k - 1] = carry;
    }
    trim(out)
}

/// A quotient of two polynomials with complex coefficients in ascending degree.
///
/// Trailing zero coefficients are trimmed and a constant denominator is folded
/// into the numerator, so `denominator() == [1]` for polynomials.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalFunction {
    num: Vec<Complex64>,
    den: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("denominator is identically zero")]
pub struct ZeroDenominator;

impl RationalFunction {
    pub fn new(num: Vec<Complex64>, den: Vec<Complex64>) -> Result<Self, ZeroDenominator> {
        let num = trim(num);
        let den = trim(den);
        if den.is_empty() {
            return Err(ZeroDenominator);
        }
        let one = Complex64::new(1.0, 0.0);
        if num.is_empty() {
            return Ok(RationalFunction { num, den: vec![one] });
        }
        if den.len() == 1 {
            let d = den[0];
            let num = if d == one { num } else { trim(num.into_iter().map(|c| c / d).collect()) };
            return Ok(RationalFunction { num, den: vec![one] });
        }
        Ok(RationalFunction { num, den })
    }

    pub fn polynomial(coeffs: Vec<Complex64>) -> Self {
        RationalFunction { num: trim(coeffs), den: vec![Complex64::new(1.0, 0.0)] }
    }

    pub fn constant(c: Complex64) -> Self {
        Self::polynomial(vec![c])
    }

    pub fn zero() -> Self {
        Self::polynomial(Vec::new())
    }

    /// The identity `w -> w`.
    pub fn identity() -> Self {
        Self::polynomial(vec![Complex64::default(), Complex64::new(1.0, 0.0)])
    }

    pub fn numerator(&self) -> &[Complex64] {
        &self.num
    }

    pub fn denominator(&self) -> &[Complex64] {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_empty()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.len() == 1
    }

    /// The value if this is a constant.
    pub fn as_constant(&self) -> Option<Complex64> {
        match (self.num.len(), self.is_polynomial()) {
            (0, _) => Some(Complex64::default()),
            (1, true) => Some(self.num[0]),
            _ => None,
        }
    }

    /// Sum; fails only if a product of denominators underflows to zero.
    pub fn checked_add(&self, rhs: &Self) -> Result<Self, ZeroDenominator> {
        if rhs.is_zero() {
            return Ok(self.clone());
        }
        if self.is_zero() {
            return Ok(rhs.clone());
        }
        if self.den == rhs.den {
            return RationalFunction::new(poly_add(&self.num, &rhs.num), self.den.clone());
        }
        RationalFunction::new(
            poly_add(&poly_mul(&self.num, &rhs.den), &poly_mul(&rhs.num, &self.den)),
            poly_mul(&self.den, &rhs.den),
        )
    }

    pub fn checked_mul(&self, rhs: &Self) -> Result<Self, ZeroDenominator> {
        RationalFunction::new(poly_mul(&self.num, &rhs.num), poly_mul(&self.den, &rhs.den))
    }

    pub fn powi(&self, k: i32) -> Result<Self, ZeroDenominator> {
        let mut acc = RationalFunction::constant(Complex64::new(1.0, 0.0));
        for _ in 0..k.unsigned_abs() {
            acc = acc.checked_mul(self)?;
        }
        if k < 0 {
            RationalFunction::constant(Complex64::new(1.0, 0.0)).checked_div(&acc)
        } else {
            Ok(acc)
        }
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self, ZeroDenominator> {
        if rhs.is_zero() {
            return Err(ZeroDenominator);
        }
        RationalFunction::new(poly_mul(&self.num, &rhs.den), poly_mul(&self.den, &rhs.num))
    }
}

impl Add for &RationalFunction {
    type Output = RationalFunction;
    fn add(self, rhs: &RationalFunction) -> RationalFunction {
        self.checked_add(rhs).expect("denominator underflowed to zero")
    }
}

impl Neg for &RationalFunction {
    type Output = RationalFunction;
    fn neg(self) -> RationalFunction {
        RationalFunction { num: self.num.iter().map(|c| -c).collect(), den: self.den.clone() }
    }
}

impl Sub for &RationalFunction {
    type Output = RationalFunction;
    fn sub(self, rhs: &RationalFunction) -> RationalFunction {
        self + &(-rhs)
    }
}

impl Mul for &RationalFunction {
    type Output = RationalFunction;
    fn mul(self, rhs: &RationalFunction) -> RationalFunction {
        self.checked_mul(rhs).expect("denominator underflowed to zero")
    }
}

impl Div for &RationalFunction {
    type Output = Result<RationalFunction, ZeroDenominator>;
    fn div(self, rhs: &RationalFunction) -> Self::Output {
        self.checked_div(rhs)
    }
}

/// Evaluates `R` on the Riemann sphere.
///
/// At infinity the degrees decide. A denominator that vanishes (within the
/// Horner rounding bound) gives infinity unless the numerator vanishes too;
/// then one shared root is divided out and the quotient is tried again.
pub fn eval_rational(r: &RationalFunction, w: ExtComplex) -> ExtComplex {
    if r.is_zero() {
        return ExtComplex::ZERO;
    }
    let w = match w {
        ExtComplex::Infinity => {
            let (dn, dd) = (r.num.len(), r.den.len());
            return match dn.cmp(&dd) {
                std::cmp::Ordering::Greater => ExtComplex::Infinity,
                std::cmp::Ordering::Less => ExtComplex::ZERO,
                std::cmp::Ordering::Equal => ExtComplex::new(r.num[dn - 1] / r.den[dd - 1]),
            };
        }
        ExtComplex::Finite(w) => w,
    };
    if r.is_polynomial() {
        return ExtComplex::new(horner(&r.num, w).0);
    }
    eval_quotient(&r.num, &r.den, w, true)
}

fn eval_quotient(num: &[Complex64], den: &[Complex64], w: Complex64, may_deflate: bool) -> ExtComplex {
    let (n, n_err) = horner(num, w);
    let (d, d_err) = horner(den, w);
    let den_zero = d.norm() <= d_err;
    if !den_zero {
        return ExtComplex::new(n / d);
    }
    let num_zero = n.norm() <= n_err;
    if !num_zero {
        return ExtComplex::Infinity;
    }
    if may_deflate && den.len() > 1 && num.len() > 1 {
        return eval_quotient(&deflate(num, w), &deflate(den, w), w, false);
    }
    ExtComplex::Infinity
}

/// An elliptic expression or one of the named presets.
#[derive(Debug, Clone, PartialEq)]
pub enum EllipticExpr {
    /// `R1(P) + P' * R2(P)`.
    WeierstrassCombo {
        r1: RationalFunction,
        r2: RationalFunction,
    },
    Sigma,
    Zeta,
    JacobiCn,
}

impl EllipticExpr {
    /// `P` itself.
    pub fn wp() -> Self {
        EllipticExpr::WeierstrassCombo { r1: RationalFunction::identity(), r2: RationalFunction::zero() }
    }

    /// `P'` itself.
    pub fn wp_prime() -> Self {
        EllipticExpr::WeierstrassCombo {
            r1: RationalFunction::zero(),
            r2: RationalFunction::constant(Complex64::new(1.0, 0.0)),
        }
    }

    pub fn constant(c: Complex64) -> Self {
        EllipticExpr::WeierstrassCombo { r1: RationalFunction::constant(c), r2: RationalFunction::zero() }
    }
}

fn combo_at(r1: &RationalFunction, r2: &RationalFunction, z: Complex64, inv: &LatticeInvariants) -> Option<ExtComplex> {
    let p = wp(z, inv).map(ExtComplex::new).unwrap_or(ExtComplex::Infinity);
    let first = eval_rational(r1, p);
    if r2.is_zero() {
        return Some(first);
    }
    let dp = wp_prime(z, inv).map(ExtComplex::new).unwrap_or(ExtComplex::Infinity);
    let second = dp.checked_mul(eval_rational(r2, p))?;
    Some(first + second)
}

/// Evaluates `e` at `z` on the lattice described by `inv`; poles come back as infinity.
///
/// The flowed function is obtained by passing the invariants of the flowed lattice.
pub fn eval_expr(e: &EllipticExpr, z: Complex64, inv: &LatticeInvariants) -> ExtComplex {
    match e {
        EllipticExpr::WeierstrassCombo { r1, r2 } => combo_at(r1, r2, z, inv).unwrap_or_else(|| {
            let step = inv.scale().norm() * PERTURBATION * Complex64::new(1.0, 1.0) / 2f64.sqrt();
            combo_at(r1, r2, z + step, inv).unwrap_or(ExtComplex::Infinity)
        }),
        EllipticExpr::Sigma => ExtComplex::new(sigma_w(z, inv)),
        EllipticExpr::Zeta => zeta_w(z, inv).map(ExtComplex::new).unwrap_or(ExtComplex::Infinity),
        EllipticExpr::JacobiCn => ExtComplex::new(cn_on_lattice(z, inv)),
    }
}

fn write_coeff(f: &mut fmt::Formatter<'_>, c: Complex64) -> fmt::Result {
    let sign = if c.im.is_sign_negative() { '-' } else { '+' };
    write!(f, "({:?}{}{:?}i)", c.re, sign, c.im.abs())
}

fn write_poly(f: &mut fmt::Formatter<'_>, c: &[Complex64]) -> fmt::Result {
    if c.is_empty() {
        return write!(f, "0");
    }
    let mut first = true;
    for (k, coeff) in c.iter().enumerate().rev() {
        if *coeff == Complex64::default() {
            continue;
        }
        if !first {
            write!(f, " + ")?;
        }
        first = false;
        write_coeff(f, *coeff)?;
        match k {
            0 => {}
            1 => write!(f, "*P")?,
            _ => write!(f, "*P^{k}")?,
        }
    }
    Ok(())
}

impl fmt::Display for RationalFunction {
    /// Prints a form that parses back to identical coefficients.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        write_poly(f, &self.num)?;
        write!(f, ")")?;
        if !self.is_polynomial() {
            write!(f, "/(")?;
            write_poly(f, &self.den)?;
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for EllipticExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EllipticExpr::Sigma => write!(f, "sigma"),
            EllipticExpr::Zeta => write!(f, "zeta"),
            EllipticExpr::JacobiCn => write!(f, "cn"),
            EllipticExpr::WeierstrassCombo { r1, r2 } => {
                write!(f, "{r1}")?;
                if !r2.is_zero() {
                    write!(f, " + P'*{r2}")?;
                }
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rf(num: &[(f64, f64)], den: &[(f64, f64)]) -> RationalFunction {
        RationalFunction::new(num.iter().map(|&(a, b)| c(a, b)).collect(), den.iter().map(|&(a, b)| c(a, b)).collect())
            .unwrap()
    }

    #[test]
    fn normalization() {
        let r = rf(&[(2.0, 0.0), (4.0, 0.0), (0.0, 0.0)], &[(2.0, 0.0), (0.0, 0.0)]);
        assert_eq!(r.numerator(), &[c(1.0, 0.0), c(2.0, 0.0)]);
        assert_eq!(r.denominator(), &[c(1.0, 0.0)]);
        assert!(RationalFunction::new(vec![c(1.0, 0.0)], vec![c(0.0, 0.0)]).is_err());
        let z = rf(&[(0.0, 0.0)], &[(1.0, 0.0), (1.0, 0.0)]);
        assert!(z.is_zero());
    }

    #[test]
    fn identity_evaluation() {
        let w = ExtComplex::new(c(5.0, 2.0));
        assert_eq!(eval_rational(&RationalFunction::identity(), w), w);
    }

    #[test]
    fn degree_rule_at_infinity() {
        let inv_w = rf(&[(1.0, 0.0)], &[(0.0, 0.0), (1.0, 0.0)]);
        assert_eq!(eval_rational(&inv_w, ExtComplex::Infinity), ExtComplex::ZERO);
        let same = rf(&[(1.0, 0.0), (3.0, 0.0)], &[(1.0, 0.0), (2.0, 0.0)]);
        assert_eq!(eval_rational(&same, ExtComplex::Infinity), ExtComplex::new(c(1.5, 0.0)));
        assert!(eval_rational(&RationalFunction::identity(), ExtComplex::Infinity).is_infinite());
    }

    #[test]
    fn simple_pole() {
        let r = rf(&[(1.0, 0.0), (0.0, 0.0), (1.0, 0.0)], &[(-3.0, 0.0), (1.0, 0.0)]);
        assert!(eval_rational(&r, ExtComplex::new(c(3.0, 0.0))).is_infinite());
    }

    #[test]
    fn removable_singularity_is_deflated() {
        // (w^2 - 1) / (w - 1) = w + 1
        let r = rf(&[(-1.0, 0.0), (0.0, 0.0), (1.0, 0.0)], &[(-1.0, 0.0), (1.0, 0.0)]);
        assert_eq!(eval_rational(&r, ExtComplex::new(c(1.0, 0.0))), ExtComplex::new(c(2.0, 0.0)));
        // (w - 1) / (w - 1)^2 has a genuine pole left after one deflation
        let p = rf(&[(-1.0, 0.0), (1.0, 0.0)], &[(1.0, 0.0), (-2.0, 0.0), (1.0, 0.0)]);
        assert!(eval_rational(&p, ExtComplex::new(c(1.0, 0.0))).is_infinite());
    }

    #[test]
    fn arithmetic() {
        let w = RationalFunction::identity();
        let one = RationalFunction::constant(c(1.0, 0.0));
        let r = (&(&w * &w) + &one).checked_div(&(&w - &RationalFunction::constant(c(3.0, 0.0)))).unwrap();
        assert_eq!(r.numerator(), &[c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(r.denominator(), &[c(-3.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(w.powi(-2).unwrap().denominator(), &[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(one.checked_div(&RationalFunction::zero()).is_err());
    }

    #[test]
    fn display_forms() {
        assert_eq!(EllipticExpr::wp().to_string(), "((1.0+0.0i)*P)");
        assert_eq!(EllipticExpr::wp_prime().to_string(), "(0) + P'*((1.0+0.0i))");
        assert_eq!(EllipticExpr::Sigma.to_string(), "sigma");
    }
}
