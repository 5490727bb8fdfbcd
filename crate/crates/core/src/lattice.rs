//! Unit-area planar lattices and the modular flow acting on them.

use std::fmt;
use std::ops::Mul;

use num_complex::Complex64;
use thiserror::Error;

/// Relative threshold below which two generators are treated as collinear.
pub const DEGENERACY_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LatticeError {
    #[error("degenerate generators {g1} and {g2}: they do not span the plane")]
    DegenerateGenerators { g1: Complex64, g2: Complex64 },
    #[error("matrix is not unimodular (det = {det})")]
    NotUnimodular { det: i64 },
    #[error("not hyperbolic (|trace| <= 2, trace = {trace}): no periodic orbit with positive period")]
    NotHyperbolic { trace: i64 },
    #[error("closure check failed: max entrywise deviation {max_deviation:e} from an integer matrix")]
    ClosureFailed { max_deviation: f64 },
    #[error("tau reduction did not terminate after {steps} steps (non-finite input?)")]
    ReductionDiverged { steps: usize },
}

/// A unit-area lattice `{a*omega1 + b*omega2 : a, b in Z}` in the complex plane,
/// with generators oriented so that `Im(omega2 / omega1) > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lattice {
    omega1: Complex64,
    omega2: Complex64,
}

/// Result of [`make_lattice`]: the lattice plus the normalization that was applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizedLattice {
    pub lattice: Lattice,
    /// Positive factor the input generators were multiplied by.
    pub rescale: f64,
    /// Whether the generators were exchanged to fix the orientation.
    pub swapped: bool,
}

/// Oriented area `Im(conj(g1) * g2)` of the parallelogram spanned by two generators.
pub fn signed_area(g1: Complex64, g2: Complex64) -> f64 {
    (g1.conj() * g2).im
}

/// Builds a unit-area, positively oriented lattice from two generators.
pub fn make_lattice(g1: Complex64, g2: Complex64) -> Result<NormalizedLattice, LatticeError> {
    let finite = [g1.re, g1.im, g2.re, g2.im].iter().all(|v| v.is_finite());
    let area = signed_area(g1, g2);
    if !finite || area.is_nan() || area.abs() < DEGENERACY_TOL * g1.norm() * g2.norm() || area == 0.0 {
        return Err(LatticeError::DegenerateGenerators { g1, g2 });
    }
    let (g1, g2, swapped) = if area < 0.0 { (g2, g1, true) } else { (g1, g2, false) };
    let rescale = 1.0 / area.abs().sqrt();
    Ok(NormalizedLattice { lattice: Lattice { omega1: g1 * rescale, omega2: g2 * rescale }, rescale, swapped })
}

impl Lattice {
    /// The square lattice generated by `1` and `i`.
    pub fn square() -> Lattice {
        Lattice { omega1: Complex64::new(1.0, 0.0), omega2: Complex64::new(0.0, 1.0) }
    }

    /// The hexagonal lattice with `omega2 / omega1 = exp(i*pi/3)`, scaled to unit area.
    pub fn hexagonal() -> Lattice {
        make_lattice(Complex64::new(1.0, 0.0), Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_3))
            .expect("hexagonal generators are independent")
            .lattice
    }

    pub fn omega1(&self) -> Complex64 {
        self.omega1
    }

    pub fn omega2(&self) -> Complex64 {
        self.omega2
    }

    pub fn area(&self) -> f64 {
        signed_area(self.omega1, self.omega2)
    }

    /// The period ratio `omega2 / omega1` (upper half-plane).
    pub fn tau(&self) -> Complex64 {
        self.omega2 / self.omega1
    }

    /// The lattice point `m*omega1 + n*omega2`.
    pub fn point(&self, m: i64, n: i64) -> Complex64 {
        self.omega1 * m as f64 + self.omega2 * n as f64
    }

    /// Real coordinates `(a, b)` with `z = a*omega1 + b*omega2`.
    pub fn coords(&self, z: Complex64) -> (f64, f64) {
        let area = self.area();
        (signed_area(z, self.omega2) / area, signed_area(self.omega1, z) / area)
    }

    /// Applies the modular flow for time `t`: every point `x + iy` goes to `e^t x + i e^-t y`.
    pub fn flow(&self, t: f64) -> Lattice {
        flow(self, t)
    }
}

impl fmt::Display for Lattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}, {}>", self.omega1, self.omega2)
    }
}

/// The modular flow `t . (x, y) = (e^t x, e^-t y)` applied to both generators.
///
/// The map has determinant one, so area and orientation are preserved and no
/// renormalization happens; `flow(l, 0.0)` returns `l` bit-for-bit.
pub fn flow(lattice: &Lattice, t: f64) -> Lattice {
    let stretch = t.exp();
    let squeeze = (-t).exp();
    let act = |w: Complex64| Complex64::new(stretch * w.re, squeeze * w.im);
    let out = Lattice { omega1: act(lattice.omega1), omega2: act(lattice.omega2) };
    debug_assert!(
        (out.area() - lattice.area()).abs() <= 1e-12 * lattice.area().abs().max(1.0),
        "flow must preserve area"
    );
    out
}

/// A 2x2 integer matrix `[[a, b], [c, d]]` with determinant +1 or -1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct UnimodularMatrix {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl UnimodularMatrix {
    pub const IDENTITY: UnimodularMatrix = UnimodularMatrix { a: 1, b: 0, c: 0, d: 1 };
    /// Exchanges the two basis vectors.
    pub const SWAP: UnimodularMatrix = UnimodularMatrix { a: 0, b: 1, c: 1, d: 0 };

    /// Row-major constructor; rejects matrices whose determinant is not +-1.
    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Result<Self, LatticeError> {
        let det = a * d - b * c;
        if det.abs() != 1 {
            return Err(LatticeError::NotUnimodular { det });
        }
        Ok(UnimodularMatrix { a, b, c, d })
    }

    pub fn det(&self) -> i64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> i64 {
        self.a + self.d
    }

    pub fn transpose(&self) -> Self {
        UnimodularMatrix { a: self.a, b: self.c, c: self.b, d: self.d }
    }

    pub fn inverse(&self) -> Self {
        let det = self.det();
        UnimodularMatrix { a: self.d * det, b: -self.b * det, c: -self.c * det, d: self.a * det }
    }

    pub fn negate(&self) -> Self {
        UnimodularMatrix { a: -self.a, b: -self.b, c: -self.c, d: -self.d }
    }

    /// Applies the matrix to a generator pair as a column change of basis:
    /// returns `(a*g1 + c*g2, b*g1 + d*g2)`.
    pub fn apply_to_basis(&self, g1: Complex64, g2: Complex64) -> (Complex64, Complex64) {
        (g1 * self.a as f64 + g2 * self.c as f64, g1 * self.b as f64 + g2 * self.d as f64)
    }
}

impl Mul for UnimodularMatrix {
    type Output = UnimodularMatrix;

    fn mul(self, o: UnimodularMatrix) -> UnimodularMatrix {
        UnimodularMatrix {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }
}

impl fmt::Display for UnimodularMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}
