//! Values on the Riemann sphere: a finite complex number or the single point at infinity.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_complex::Complex64;

/// A point of the extended complex plane.
///
/// Every non-finite float result (overflow, `inf - inf`, NaN) collapses onto
/// [`ExtComplex::Infinity`]; a `Finite` value never holds a NaN or infinite part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtComplex {
    Finite(Complex64),
    Infinity,
}

impl ExtComplex {
    pub const ZERO: ExtComplex = ExtComplex::Finite(Complex64::new(0.0, 0.0));
    pub const ONE: ExtComplex = ExtComplex::Finite(Complex64::new(1.0, 0.0));

    /// Wraps a complex number, mapping anything non-finite to infinity.
    pub fn new(w: Complex64) -> Self {
        if w.re.is_finite() && w.im.is_finite() {
            ExtComplex::Finite(w)
        } else {
            ExtComplex::Infinity
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtComplex::Infinity)
    }

    pub fn finite(&self) -> Option<Complex64> {
        match *self {
            ExtComplex::Finite(w) => Some(w),
            ExtComplex::Infinity => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ExtComplex::Finite(w) if w.re == 0.0 && w.im == 0.0)
    }

    /// Product, or `None` for the indeterminate form `0 * inf`.
    pub fn checked_mul(self, rhs: ExtComplex) -> Option<ExtComplex> {
        match (self, rhs) {
            (ExtComplex::Finite(a), ExtComplex::Finite(b)) => Some(ExtComplex::new(a * b)),
            (ExtComplex::Infinity, other) | (other, ExtComplex::Infinity) => {
                if other.is_zero() {
                    None
                } else {
                    Some(ExtComplex::Infinity)
                }
            }
        }
    }

    /// Quotient with `w / 0 = inf` for `w != 0`, `w / inf = 0`, or `None` for `0/0` and `inf/inf`.
    pub fn checked_div(self, rhs: ExtComplex) -> Option<ExtComplex> {
        match (self, rhs) {
            (ExtComplex::Infinity, ExtComplex::Infinity) => None,
            (ExtComplex::Infinity, _) => Some(ExtComplex::Infinity),
            (ExtComplex::Finite(_), ExtComplex::Infinity) => Some(ExtComplex::ZERO),
            (ExtComplex::Finite(a), ExtComplex::Finite(b)) => {
                if b.re == 0.0 && b.im == 0.0 {
                    if a.re == 0.0 && a.im == 0.0 {
                        None
                    } else {
                        Some(ExtComplex::Infinity)
                    }
                } else {
                    Some(ExtComplex::new(a / b))
                }
            }
        }
    }
}

impl From<Complex64> for ExtComplex {
    fn from(w: Complex64) -> Self {
        ExtComplex::new(w)
    }
}

impl Add for ExtComplex {
    type Output = ExtComplex;

    /// `inf + anything = inf`; there is a single infinity so `inf + inf = inf`.
    fn add(self, rhs: ExtComplex) -> ExtComplex {
        match (self, rhs) {
            (ExtComplex::Finite(a), ExtComplex::Finite(b)) => ExtComplex::new(a + b),
            _ => ExtComplex::Infinity,
        }
    }
}

impl Sub for ExtComplex {
    type Output = ExtComplex;

    fn sub(self, rhs: ExtComplex) -> ExtComplex {
        self + (-rhs)
    }
}

impl Neg for ExtComplex {
    type Output = ExtComplex;

    fn neg(self) -> ExtComplex {
        match self {
            ExtComplex::Finite(a) => ExtComplex::Finite(-a),
            ExtComplex::Infinity => ExtComplex::Infinity,
        }
    }
}

impl fmt::Display for ExtComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtComplex::Finite(w) => write!(f, "{}", w),
            ExtComplex::Infinity => write!(f, "inf"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn non_finite_collapses_to_infinity() {
        assert!(ExtComplex::new(Complex64::new(f64::NAN, 0.0)).is_infinite());
        assert!(ExtComplex::new(Complex64::new(1.0, f64::INFINITY)).is_infinite());
        let big = ExtComplex::new(Complex64::new(1e308, 0.0));
        assert!((big + big).is_infinite());
    }

    #[test]
    fn zero_times_infinity_is_indeterminate() {
        assert_eq!(ExtComplex::ZERO.checked_mul(ExtComplex::Infinity), None);
        assert_eq!(ExtComplex::ONE.checked_mul(ExtComplex::Infinity), Some(ExtComplex::Infinity));
        assert_eq!(ExtComplex::ZERO.checked_div(ExtComplex::ZERO), None);
        assert_eq!(ExtComplex::ONE.checked_div(ExtComplex::ZERO), Some(ExtComplex::Infinity));
        assert_eq!(ExtComplex::ONE.checked_div(ExtComplex::Infinity), Some(ExtComplex::ZERO));
    }

    #[test]
    fn infinity_absorbs_addition() {
        let w = ExtComplex::new(Complex64::new(2.0, -1.0));
        assert!((w + ExtComplex::Infinity).is_infinite());
        assert!((ExtComplex::Infinity + ExtComplex::Infinity).is_infinite());
        assert!((ExtComplex::Infinity - ExtComplex::Infinity).is_infinite());
    }
}
