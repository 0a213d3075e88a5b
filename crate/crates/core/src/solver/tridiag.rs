//! Complex tridiagonal (Thomas) solve for the implicit diffusion step.

use num_complex::Complex64;

/// Solve the tridiagonal system with sub/main/super diagonals (a, b, c)
/// in place: on return `rhs` holds the solution. `a[0]` and `c[n−1]` are
/// ignored. The scratch buffer must have length n.
pub fn solve_in_place(
    a: &[Complex64],
    b: &[Complex64],
    c: &[Complex64],
    rhs: &mut [Complex64],
    scratch: &mut [Complex64],
) {
    let n = b.len();
    debug_assert!(a.len() == n && c.len() == n && rhs.len() == n && scratch.len() == n);
    // forward sweep
    let mut beta = b[0];
    rhs[0] /= beta;
    for i in 1..n {
        scratch[i] = c[i - 1] / beta;
        beta = b[i] - a[i] * scratch[i];
        rhs[i] = (rhs[i] - a[i] * rhs[i - 1]) / beta;
    }
    // back substitution
    for i in (0..n - 1).rev() {
        let next = rhs[i + 1];
        rhs[i] -= scratch[i + 1] * next;
    }
}
