//! Periodic orbits of the modular flow.
//!
//! A lattice with generator matrix `U` (generators as columns) returns to itself
//! after time `t0` exactly when `U * B = diag(e^t0, e^-t0) * U` for some
//! `B` in SL2(Z). Transposing shows the rows of `U` are eigenvectors of `B^T`
//! with eigenvalues `e^t0` and `e^-t0`, so a hyperbolic `B` determines both
//! the period and the lattice in closed form.

use num_complex::Complex64;

use crate::lattice::{make_lattice, Lattice, LatticeError, UnimodularMatrix};

/// A lattice on a closed orbit of the modular flow, with its period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodicOrbit {
    /// Row-major generator matrix; its columns are the generators `(Re, Im)`.
    pub u: [[f64; 2]; 2],
    /// Period of the orbit, `ln(lambda1) > 0`.
    pub t0: f64,
    /// The matrix the orbit was requested for.
    pub b: UnimodularMatrix,
    /// Dominant eigenvalue of the solved matrix (`> 1`).
    pub lambda1: f64,
    /// `B` had negative trace and `-B` was solved instead (`-L = L` for every lattice).
    pub negated: bool,
    /// Generator columns were exchanged to make the lattice positively oriented.
    pub swapped: bool,
}

impl PeriodicOrbit {
    /// The matrix that was actually solved: `B` or `-B`.
    pub fn solved_matrix(&self) -> UnimodularMatrix {
        if self.negated {
            self.b.negate()
        } else {
            self.b
        }
    }

    /// The integer matrix `verify_closure` should recover, accounting for the
    /// column swap (conjugation by the swap matrix).
    pub fn expected_certificate(&self) -> UnimodularMatrix {
        let m = self.solved_matrix();
        if self.swapped {
            UnimodularMatrix::SWAP * m * UnimodularMatrix::SWAP
        } else {
            m
        }
    }

    pub fn generators(&self) -> (Complex64, Complex64) {
        (Complex64::new(self.u[0][0], self.u[1][0]), Complex64::new(self.u[0][1], self.u[1][1]))
    }

    /// The lattice spanned by the columns of `u`.
    pub fn lattice(&self) -> Lattice {
        let (g1, g2) = self.generators();
        make_lattice(g1, g2).expect("orbit generators are independent by construction").lattice
    }
}

/// Eigenvector of `B^T` for eigenvalue `lambda`, via the closed 2x2 formula.
fn transpose_eigenvector(b: &UnimodularMatrix, lambda: f64) -> [f64; 2] {
    // B^T = [[a, c], [b, d]]
    let (a, bb, c, d) = (b.a as f64, b.b as f64, b.c as f64, b.d as f64);
    if b.c != 0 {
        [c, lambda - a]
    } else {
        assert!(b.b != 0, "hyperbolic integer matrix cannot be diagonal");
        [lambda - d, bb]
    }
}

fn normalized(v: [f64; 2]) -> [f64; 2] {
    let n = v[0].hypot(v[1]);
    [v[0] / n, v[1] / n]
}

/// Solves `U * B = diag(e^t0, e^-t0) * U` for a hyperbolic `B` with determinant one.
///
/// Rows of `U` are normalized to equal length (any other row scaling is a
/// time shift along the same orbit), then `U` is scaled to `|det U| = 1`.
pub fn solve_periodic_orbit(b: UnimodularMatrix) -> Result<PeriodicOrbit, LatticeError> {
    let det = b.det();
    if det != 1 {
        return Err(LatticeError::NotUnimodular { det });
    }
    let trace = b.trace();
    if trace.abs() <= 2 {
        return Err(LatticeError::NotHyperbolic { trace });
    }
    let negated = trace < 0;
    let solved = if negated { b.negate() } else { b };
    let tr = solved.trace() as f64;
    let lambda1 = (tr + (tr * tr - 4.0).sqrt()) / 2.0;
    // 1/lambda1 without the cancellation in (tr - sqrt(tr^2 - 4)) / 2
    let lambda2 = 1.0 / lambda1;

    let row1 = normalized(transpose_eigenvector(&solved, lambda1));
    let row2 = normalized(transpose_eigenvector(&solved, lambda2));
    let mut u = [row1, row2];
    let det_u = u[0][0] * u[1][1] - u[0][1] * u[1][0];
    let s = det_u.abs().sqrt().recip();
    for row in u.iter_mut() {
        for v in row.iter_mut() {
            *v *= s;
        }
    }
    let swapped = det_u < 0.0;
    if swapped {
        for row in u.iter_mut() {
            row.swap(0, 1);
        }
    }
    Ok(PeriodicOrbit { u, t0: lambda1.ln(), b, lambda1, negated, swapped })
}

/// Computes `M = U^-1 diag(e^t0, e^-t0) U`, checks it is an integer matrix with
/// determinant +-1 to within `tol`, and returns it. This certifies `t0 . L = L`.
pub fn verify_closure(orbit: &PeriodicOrbit, tol: f64) -> Result<UnimodularMatrix, LatticeError> {
    let m = closure_matrix(orbit);
    let mut max_deviation: f64 = 0.0;
    let mut rounded = [[0i64; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let r = m[i][j].round();
            max_deviation = max_deviation.max((m[i][j] - r).abs());
            if !r.is_finite() || r.abs() > 1e15 {
                return Err(LatticeError::ClosureFailed { max_deviation: f64::INFINITY });
            }
            rounded[i][j] = r as i64;
        }
    }
    if max_deviation.is_nan() || max_deviation >= tol {
        return Err(LatticeError::ClosureFailed { max_deviation });
    }
    UnimodularMatrix::new(rounded[0][0], rounded[0][1], rounded[1][0], rounded[1][1])
        .map_err(|_| LatticeError::ClosureFailed { max_deviation })
}

/// The real matrix `U^-1 diag(e^t0, e^-t0) U` before rounding.
pub fn closure_matrix(orbit: &PeriodicOrbit) -> [[f64; 2]; 2] {
    let u = &orbit.u;
    let (e_plus, e_minus) = (orbit.t0.exp(), (-orbit.t0).exp());
    let du = [[e_plus * u[0][0], e_plus * u[0][1]], [e_minus * u[1][0], e_minus * u[1][1]]];
    let det = u[0][0] * u[1][1] - u[0][1] * u[1][0];
    let inv = [[u[1][1] / det, -u[0][1] / det], [-u[1][0] / det, u[0][0] / det]];
    let mut m = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            m[i][j] = inv[i][0] * du[0][j] + inv[i][1] * du[1][j];
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    const PHI: f64 = 1.618_033_988_749_895;

    fn m(a: i64, b: i64, c: i64, d: i64) -> UnimodularMatrix {
        UnimodularMatrix::new(a, b, c, d).unwrap()
    }

    #[test]
    fn golden_ratio_orbit() {
        let orbit = solve_periodic_orbit(m(2, 1, 1, 1)).unwrap();
        assert!((orbit.t0 - (1.0 + PHI).ln()).abs() < 1e-12);
        assert!((orbit.t0 - 0.9624).abs() < 1e-4);
        assert!((orbit.lambda1 - (PHI + 1.0)).abs() < 1e-12);
        // U is proportional to [[phi, 1], [1, -phi]] (columns possibly exchanged)
        let mut u = orbit.u;
        if orbit.swapped {
            for row in u.iter_mut() {
                row.swap(0, 1);
            }
        }
        let k = u[0][1];
        let expect = [[PHI, 1.0], [1.0, -PHI]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((u[i][j] - k * expect[i][j]).abs() < 1e-12);
            }
        }
        let cert = verify_closure(&orbit, 1e-9).unwrap();
        assert_eq!(cert, orbit.expected_certificate());
        assert_eq!(cert.trace(), 3);
        assert_eq!(cert.det(), 1);
    }

    #[test]
    fn trace_ten_period() {
        let orbit = solve_periodic_orbit(m(5, 2, 12, 5)).unwrap();
        let expect = (5.0 + 2.0 * 6f64.sqrt()).ln();
        assert!((orbit.t0 - expect).abs() < 1e-12);
        assert!((orbit.t0 - 2.292).abs() < 1e-3);
    }

    #[test]
    fn parabolic_and_elliptic_are_rejected() {
        assert_eq!(solve_periodic_orbit(m(1, 1, 0, 1)), Err(LatticeError::NotHyperbolic { trace: 2 }));
        assert_eq!(solve_periodic_orbit(m(0, -1, 1, 0)), Err(LatticeError::NotHyperbolic { trace: 0 }));
        assert_eq!(solve_periodic_orbit(m(0, 1, 1, 0)), Err(LatticeError::NotUnimodular { det: -1 }));
    }

    #[test]
    fn negative_trace_is_negated() {
        let orbit = solve_periodic_orbit(m(-2, -1, -1, -1)).unwrap();
        assert!(orbit.negated);
        assert!((orbit.t0 - (1.0 + PHI).ln()).abs() < 1e-12);
        let cert = verify_closure(&orbit, 1e-9).unwrap();
        assert_eq!(cert.trace(), 3);
    }

    #[test]
    fn perturbed_period_fails_closure() {
        let mut orbit = solve_periodic_orbit(m(2, 1, 1, 1)).unwrap();
        orbit.t0 += 1e-3;
        assert!(matches!(verify_closure(&orbit, 1e-9), Err(LatticeError::ClosureFailed { .. })));
    }

    #[test]
    fn orbit_lattice_is_unit_area_and_oriented() {
        let orbit = solve_periodic_orbit(m(3, 2, 1, 1)).unwrap();
        let det = orbit.u[0][0] * orbit.u[1][1] - orbit.u[0][1] * orbit.u[1][0];
        assert!((det - 1.0).abs() < 1e-12);
        assert!(orbit.lattice().tau().im > 0.0);
    }

    #[test]
    fn closure_sweep_small_entries() {
        let mut count = 0;
        for a in -20..=20i64 {
            for b in -20..=20i64 {
                for c in -20..=20i64 {
                    // d is forced by det = 1 when b*c + 1 is divisible by a
                    if a == 0 {
                        continue;
                    }
                    if (1 + b * c) % a != 0 {
                        continue;
                    }
                    let d = (1 + b * c) / a;
                    if d.abs() > 20 || (a + d).abs() <= 2 {
                        continue;
                    }
                    let bm = m(a, b, c, d);
                    let orbit = solve_periodic_orbit(bm).unwrap();
                    let cert = verify_closure(&orbit, 1e-9).unwrap_or_else(|e| panic!("{bm}: {e}"));
                    assert_eq!(cert.trace(), orbit.solved_matrix().trace());
                    assert_eq!(cert.trace().abs(), bm.trace().abs());
                    assert_eq!(cert, orbit.expected_certificate());
                    count += 1;
                }
            }
        }
        assert!(count > 1000, "only {count} matrices");
    }

    #[test]
    fn eigen_consistency() {
        // U * round(M) = diag(e^t0, e^-t0) * U
        for bm in [m(2, 1, 1, 1), m(5, 2, 12, 5), m(1, 3, 2, 7), m(-4, 1, -1, 0)] {
            let orbit = solve_periodic_orbit(bm).unwrap();
            let cert = verify_closure(&orbit, 1e-9).unwrap();
            let u = orbit.u;
            let mm = [[cert.a as f64, cert.b as f64], [cert.c as f64, cert.d as f64]];
            let scale = [orbit.t0.exp(), (-orbit.t0).exp()];
            for i in 0..2 {
                for j in 0..2 {
                    let lhs = u[i][0] * mm[0][j] + u[i][1] * mm[1][j];
                    let rhs = scale[i] * u[i][j];
                    assert!((lhs - rhs).abs() < 1e-9, "{bm}: {lhs} vs {rhs}");
                }
            }
        }
    }
}
