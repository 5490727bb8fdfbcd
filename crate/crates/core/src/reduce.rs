//! Reduction of a period ratio into the standard fundamental domain of SL2(Z).
//!
//! Flowed lattices have long, thin bases; every series evaluation goes through
//! the reduced basis `(1, tau)` with `|Re tau| <= 1/2` and `|tau| >= 1`, which
//! guarantees `Im tau >= sqrt(3)/2`.

use num_complex::Complex64;

use crate::lattice::{Lattice, LatticeError, UnimodularMatrix};

/// Hard cap on translate/invert steps.
pub const MAX_REDUCTION_STEPS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauReduction {
    /// Reduced period ratio.
    pub tau: Complex64,
    /// Change of basis: `transform.apply_to_basis(omega1, omega2) = (scale, scale * tau)`.
    pub transform: UnimodularMatrix,
    /// The reduced first generator; dividing the reduced basis by it yields `(1, tau)`.
    pub scale: Complex64,
}

impl TauReduction {
    /// The reduced generator pair `(scale, scale * tau)`.
    pub fn generators(&self) -> (Complex64, Complex64) {
        (self.scale, self.scale * self.tau)
    }
}

/// Reduces the period ratio of `lattice`.
pub fn reduce_tau(lattice: &Lattice) -> Result<TauReduction, LatticeError> {
    reduce_generators(lattice.omega1(), lattice.omega2())
}

/// Same as [`reduce_tau`] for an arbitrary positively oriented generator pair
/// (no unit-area requirement).
pub fn reduce_generators(g1: Complex64, g2: Complex64) -> Result<TauReduction, LatticeError> {
    let finite = [g1.re, g1.im, g2.re, g2.im].iter().all(|v| v.is_finite());
    if !finite || g1 == Complex64::new(0.0, 0.0) {
        return Err(LatticeError::ReductionDiverged { steps: 0 });
    }
    let mut transform = UnimodularMatrix::IDENTITY;
    let (mut w1, mut w2) = (g1, g2);
    let mut steps = 0;
    loop {
        let tau = w2 / w1;
        if !(tau.re.is_finite() && tau.im.is_finite()) || tau.im <= 0.0 {
            return Err(LatticeError::ReductionDiverged { steps });
        }
        if tau.re.abs() > 0.5 {
            let n = tau.re.round();
            if n.abs() > 1e15 {
                return Err(LatticeError::ReductionDiverged { steps });
            }
            let shift = UnimodularMatrix { a: 1, b: -(n as i64), c: 0, d: 1 };
            transform = transform * shift;
        } else if tau.norm_sqr() < 1.0 - 1e-15 {
            // tau -> -1/tau, i.e. (w1, w2) -> (w2, -w1)
            let invert = UnimodularMatrix { a: 0, b: -1, c: 1, d: 0 };
            transform = transform * invert;
        } else {
            break;
        }
        // rebuild from the integer transform so rounding does not accumulate
        (w1, w2) = transform.apply_to_basis(g1, g2);
        steps += 1;
        if steps >= MAX_REDUCTION_STEPS {
            return Err(LatticeError::ReductionDiverged { steps });
        }
    }
    Ok(TauReduction { tau: w2 / w1, transform, scale: w1 })
}

/// Splits `z` (in units where the periods are `1` and `tau`) as
/// `z0 + m + n*tau` with `|Im z0| <= Im(tau)/2` and `|Re z0| <= 1/2`.
///
/// The rectangle is a fundamental domain centered at the origin; for reduced
/// `tau` every nonzero lattice point is at distance > 0.4 from it.
pub fn split_point(z: Complex64, tau: Complex64) -> (Complex64, i64, i64) {
    let n = (z.im / tau.im).round();
    let z1 = z - tau * n;
    let m = z1.re.round();
    let z0 = Complex64::new(z1.re - m, z1.im);
    (z0, m as i64, n as i64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::make_lattice;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn is_reduced(tau: Complex64) -> bool {
        tau.im > 0.0 && tau.re.abs() <= 0.5 + 1e-15 && tau.norm() >= 1.0 - 1e-12
    }

    #[test]
    fn square_lattice_is_already_reduced() {
        let r = reduce_tau(&Lattice::square()).unwrap();
        assert_eq!(r.tau, c(0.0, 1.0));
        assert_eq!(r.transform, UnimodularMatrix::IDENTITY);
    }

    #[test]
    fn strip_point_above_unit_circle_is_unchanged() {
        let l = make_lattice(c(1.0, 0.0), c(0.4, 2.0)).unwrap().lattice;
        let r = reduce_tau(&l).unwrap();
        assert_eq!(r.transform, UnimodularMatrix::IDENTITY);
        assert!((r.tau - c(0.4, 2.0)).norm() < 1e-15);
    }

    /// Integer coordinates of `z` in basis `(g1, g2)` if it is a lattice point.
    fn integer_coords(z: Complex64, g1: Complex64, g2: Complex64) -> Option<(i64, i64)> {
        let area = (g1.conj() * g2).im;
        let a = (z.conj() * g2).im / area;
        let b = (g1.conj() * z).im / area;
        let (ra, rb) = (a.round(), b.round());
        ((a - ra).abs() < 1e-9 && (b - rb).abs() < 1e-9).then_some((ra as i64, rb as i64))
    }

    #[test]
    fn far_translate_reduces_to_same_point_set() {
        let l = make_lattice(c(1.0, 0.0), c(5.3, 0.9)).unwrap().lattice;
        let r = reduce_tau(&l).unwrap();
        assert!(is_reduced(r.tau), "{}", r.tau);
        let (h1, h2) = r.generators();
        // every window point of one basis is a lattice point of the other, both ways
        for m in -2..=2i64 {
            for n in -2..=2i64 {
                let p = h1 * m as f64 + h2 * n as f64;
                assert!(integer_coords(p, l.omega1(), l.omega2()).is_some());
                let q = l.point(m, n);
                assert!(integer_coords(q, h1, h2).is_some());
            }
        }
        // the reduced basis is the image of the original under the transform
        let (t1, t2) = r.transform.apply_to_basis(l.omega1(), l.omega2());
        assert!((t1 / r.scale - 1.0).norm() < 1e-12);
        assert!((t2 / r.scale - r.tau).norm() < 1e-12);
    }

    #[test]
    fn reduction_is_idempotent() {
        for (re, im) in [(0.3, 1.1), (-0.5, 0.9), (0.1, 4.0), (0.5, 0.866_025_403_784_438_7)] {
            let tau = c(re, im);
            let r = reduce_generators(c(1.0, 0.0), tau).unwrap();
            assert_eq!(r.transform, UnimodularMatrix::IDENTITY);
            assert_eq!(r.tau, tau);
        }
    }

    #[test]
    fn thin_flowed_lattice_reduces() {
        let l = make_lattice(c(1.0, 0.0), c(0.3, 1.0)).unwrap().lattice.flow(4.5);
        let r = reduce_tau(&l).unwrap();
        assert!(is_reduced(r.tau), "{}", r.tau);
        assert!(r.tau.im >= 3f64.sqrt() / 2.0 - 1e-12);
    }

    #[test]
    fn non_finite_input_diverges() {
        assert!(matches!(
            reduce_generators(c(f64::NAN, 0.0), c(0.0, 1.0)),
            Err(LatticeError::ReductionDiverged { .. })
        ));
    }

    #[test]
    fn split_point_lands_in_rectangle() {
        let tau = c(0.31, 1.2);
        for z in [c(3.7, -5.2), c(-0.49, 0.59), c(10.0, 10.0)] {
            let (z0, m, n) = split_point(z, tau);
            assert!(z0.re.abs() <= 0.5 && z0.im.abs() <= tau.im / 2.0 + 1e-12);
            let back = z0 + m as f64 + tau * n as f64;
            assert!((back - z).norm() < 1e-12);
        }
    }
}
