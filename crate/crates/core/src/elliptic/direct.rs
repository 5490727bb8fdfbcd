//! Direct lattice sums: the defining series, summed shell by shell.
//!
//! Shell `r` holds the points `m*w1 + n*w2` with `max(|m|, |n|) = r` of the
//! reduced basis, visited in a fixed order so results are bit-reproducible.
//! For the absolutely convergent sums used here the shell totals behave like
//! `s_r = a0 r^-p + a1 r^-(p+2) + a2 r^-(p+4) + ...` (odd powers of `w` cancel
//! between `w` and `-w`; the even corrections come from Euler-Maclaurin along
//! each side). The omitted tail `sum_{r > R} s_r` is estimated by fitting
//! `a0..a2` to three outer shells and summing the model with Hurwitz zeta
//! values. Without this the truncation error decays only like `R^-2`.

use num_complex::Complex64;

use super::{EllipticError, TruncationSpec, POLE_TOL};
use crate::lattice::Lattice;
use crate::reduce::{reduce_tau, split_point};

/// Visits the points of shell `r` in a fixed order.
fn for_each_in_shell(w1: Complex64, w2: Complex64, r: i64, mut f: impl FnMut(Complex64)) {
    let rf = r as f64;
    for m in -r..=r {
        let mf = m as f64;
        f(w1 * mf + w2 * rf);
        f(w1 * mf - w2 * rf);
    }
    for n in (1 - r)..r {
        let nf = n as f64;
        f(w1 * rf + w2 * nf);
        f(-w1 * rf + w2 * nf);
    }
}

/// Sums `term` over shells 1..=shells and adds the fitted tail. `lead_power`
/// is the decay exponent `p` of the shell totals.
fn shell_sum(
    w1: Complex64,
    w2: Complex64,
    shells: usize,
    lead_power: i32,
    mut term: impl FnMut(Complex64) -> Complex64,
) -> Complex64 {
    let mut totals = Vec::with_capacity(shells);
    for r in 1..=shells as i64 {
        let mut s = Complex64::default();
        for_each_in_shell(w1, w2, r, |w| s += term(w));
        totals.push(s);
    }
    let head: Complex64 = totals.iter().sum();
    head + fitted_tail(&totals, lead_power)
}

/// Estimates `sum_{r > R} s_r` from the outer shell totals (`totals[r - 1] = s_r`).
fn fitted_tail(totals: &[Complex64], p: i32) -> Complex64 {
    let big_r = totals.len();
    let nfit = 3.min(big_r - 1).max(1);
    let step = (big_r / (2 * nfit)).max(1);
    let picks: Vec<usize> = (0..nfit).map(|i| big_r - i * step).collect();
    let rr = big_r as f64;
    // unknowns x_j = a_j R^-(p+2j); basis (R/r)^(p+2j) keeps the system O(1)
    let mut mat = vec![vec![0.0; nfit]; nfit];
    let mut rhs = vec![Complex64::default(); nfit];
    for (row, &r) in picks.iter().enumerate() {
        for (j, cell) in mat[row].iter_mut().enumerate() {
            *cell = (rr / r as f64).powi(p + 2 * j as i32);
        }
        rhs[row] = totals[r - 1];
    }
    let x = solve_small(mat, rhs);
    x.iter()
        .enumerate()
        .map(|(j, xj)| {
            let s = p + 2 * j as i32;
            xj * (rr.powi(s) * hurwitz_zeta(s, big_r + 1))
        })
        .sum()
}

/// Gaussian elimination with partial pivoting for a tiny real system with complex right-hand side.
fn solve_small(mut a: Vec<Vec<f64>>, mut b: Vec<Complex64>) -> Vec<Complex64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            let (upper, lower) = a.split_at_mut(row);
            for (x, p) in lower[0][col..n].iter_mut().zip(&upper[col][col..n]) {
                *x -= f * p;
            }
            let bc = b[col];
            b[row] -= bc * f;
        }
    }
    let mut x = vec![Complex64::default(); n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= x[k] * a[row][k];
        }
        x[row] = acc / a[row][row];
    }
    x
}

/// Hurwitz zeta `sum_{r >= start} r^-s` for integer `s >= 2`, via Euler-Maclaurin.
pub(crate) fn hurwitz_zeta(s: i32, start: usize) -> f64 {
    // B_2k / (2k)!
    const BERNOULLI_OVER_FACT: [f64; 6] =
        [1.0 / 12.0, -1.0 / 720.0, 1.0 / 30240.0, -1.0 / 1_209_600.0, 1.0 / 47_900_160.0, -691.0 / 1_307_674_368_000.0];
    let sf = s as f64;
    let direct_terms = 10;
    let mut sum = 0.0;
    for r in start..start + direct_terms {
        sum += (r as f64).powi(-s);
    }
    let a = (start + direct_terms) as f64;
    sum += a.powf(1.0 - sf) / (sf - 1.0) + 0.5 * a.powi(-s);
    // rising factorial s (s+1) ... (s + 2k - 2)
    let mut rising = sf;
    let mut power = a.powi(-s - 1);
    for (k, coef) in BERNOULLI_OVER_FACT.iter().enumerate() {
        sum += coef * rising * power;
        let k2 = 2 * k as i32 + 2;
        rising *= (sf + k2 as f64 - 1.0) * (sf + k2 as f64);
        power /= a * a;
    }
    sum
}

/// The reduced basis; any basis spans the same point set.
fn reduced_basis(lattice: &Lattice) -> Result<(Complex64, Complex64, Complex64), EllipticError> {
    let red = reduce_tau(lattice)?;
    let (w1, w2) = red.generators();
    Ok((w1, w2, red.tau))
}

/// Eisenstein series `G_k = sum_{w != 0} w^-k` as a truncated lattice sum (even `k >= 4`).
pub fn eisenstein(lattice: &Lattice, k: u32, spec: &TruncationSpec) -> Result<Complex64, EllipticError> {
    spec.validate()?;
    assert!(k >= 4 && k.is_multiple_of(2), "eisenstein weight must be even and >= 4");
    let (w1, w2, _) = reduced_basis(lattice)?;
    Ok(shell_sum(w1, w2, spec.shells, k as i32 - 1, |w| w.powi(-(k as i32))))
}

/// Moves `z` by a lattice vector into the rectangle centered at 0; `Err` on a lattice point.
fn center(z: Complex64, w1: Complex64, tau: Complex64) -> Result<Complex64, EllipticError> {
    let (z0, _, _) = split_point(z / w1, tau);
    if !(z0.re.is_finite() && z0.im.is_finite()) || z0.norm() < POLE_TOL {
        return Err(EllipticError::PoleAt { z });
    }
    Ok(z0 * w1)
}

/// `P(z) = 1/z^2 + sum_{w != 0} (1/(z - w)^2 - 1/w^2)` summed directly.
pub fn wp_direct(z: Complex64, lattice: &Lattice, spec: &TruncationSpec) -> Result<Complex64, EllipticError> {
    spec.validate()?;
    let (w1, w2, tau) = reduced_basis(lattice)?;
    let z0 = center(z, w1, tau)?;
    // 1/(z-w)^2 - 1/w^2 = z (2w - z) / (w^2 (z - w)^2), free of cancellation for large w
    let sum = shell_sum(w1, w2, spec.shells, 3, |w| {
        let d = z0 - w;
        z0 * (2.0 * w - z0) / (w * w * d * d)
    });
    Ok((z0 * z0).inv() + sum)
}

/// `P'(z) = -2 sum_{w} 1/(z - w)^3` summed directly (the `w = 0` term included).
pub fn wp_prime_direct(z: Complex64, lattice: &Lattice, spec: &TruncationSpec) -> Result<Complex64, EllipticError> {
    spec.validate()?;
    let (w1, w2, tau) = reduced_basis(lattice)?;
    let z0 = center(z, w1, tau)?;
    let sum = shell_sum(w1, w2, spec.shells, 3, |w| {
        let d = z0 - w;
        (d * d * d).inv()
    });
    Ok(-2.0 * ((z0 * z0 * z0).inv() + sum))
}
