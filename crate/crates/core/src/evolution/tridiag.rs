//! Direct solver for cyclic tridiagonal systems.
//!
//! The two corner entries coupling the first and last unknowns are removed
//! by a rank-one correction: the plain tridiagonal system is solved twice
//! (once for the right-hand side, once for the correction vector) and the
//! results are combined. Exact in O(n), no iteration.

use super::EvolutionError;

/// Pivots below this are treated as breakdown rather than divided by.
const PIVOT_FLOOR: f64 = 1e-300;

/// Thomas algorithm for a plain tridiagonal system.
///
/// `sub[i]` multiplies x[i-1] in row i (sub[0] unused), `sup[i]`
/// multiplies x[i+1] (sup[n-1] unused).
fn solve_tridiagonal(
    sub: &[f64],
    diag: &[f64],
    sup: &[f64],
    rhs: &[f64],
) -> Result<Vec<f64>, EvolutionError> {
    let n = diag.len();
    let mut scratch = vec![0.0; n];
    let mut x = vec![0.0; n];

    let mut pivot = diag[0];
    if pivot.abs() < PIVOT_FLOOR {
        return Err(EvolutionError::NumericalBreakdown { index: 0, pivot });
    }
    x[0] = rhs[0] / pivot;
    for i in 1..n {
        scratch[i] = sup[i - 1] / pivot;
        pivot = diag[i] - sub[i] * scratch[i];
        if pivot.abs() < PIVOT_FLOOR {
            return Err(EvolutionError::NumericalBreakdown { index: i, pivot });
        }
        x[i] = (rhs[i] - sub[i] * x[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        let ahead = x[i + 1];
        x[i] -= scratch[i + 1] * ahead;
    }
    Ok(x)
}

/// Solves the cyclic system with corner entries `top_right` (row 0,
/// column n-1) and `bottom_left` (row n-1, column 0).
///
/// # Errors
///
/// [`EvolutionError::NumericalBreakdown`] when a pivot vanishes; cannot
/// happen for strictly diagonally dominant input.
pub fn solve_cyclic(
    sub: &[f64],
    diag: &[f64],
    sup: &[f64],
    top_right: f64,
    bottom_left: f64,
    rhs: &[f64],
) -> Result<Vec<f64>, EvolutionError> {
    let n = diag.len();
    assert!(n >= 3, "cyclic solve needs at least 3 unknowns, got {n}");
    assert_eq!(sub.len(), n);
    assert_eq!(sup.len(), n);
    assert_eq!(rhs.len(), n);

    // Deflate the corners: A = A' + u v^T with u supported on rows 0 and
    // n-1. gamma is a free scaling; -diag[0] keeps A' well conditioned.
    let gamma = -diag[0];
    let mut modified_diag = diag.to_vec();
    modified_diag[0] = diag[0] - gamma;
    modified_diag[n - 1] = diag[n - 1] - top_right * bottom_left / gamma;

    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = bottom_left;

    let y = solve_tridiagonal(sub, &modified_diag, sup, rhs)?;
    let z = solve_tridiagonal(sub, &modified_diag, sup, &u)?;

    // v = (1, 0, ..., 0, top_right/gamma).
    let v_dot_y = y[0] + top_right / gamma * y[n - 1];
    let v_dot_z = z[0] + top_right / gamma * z[n - 1];
    let denom = 1.0 + v_dot_z;
    if denom.abs() < PIVOT_FLOOR {
        return Err(EvolutionError::NumericalBreakdown {
            index: 0,
            pivot: denom,
        });
    }
    let factor = v_dot_y / denom;

    Ok(y.iter().zip(&z).map(|(yi, zi)| yi - factor * zi).collect())
}
