//! Matrix exponential by scaling and squaring around a Taylor core.

use super::{ComplexMatrix, NumericsError};

/// Largest accepted input 1-norm. The squaring chain stays comfortably
/// accurate up to here; anything larger signals a misconfigured generator.
pub const MAX_EXPM_NORM: f64 = 1e3;

/// Scale target for the Taylor core: `‖A/2^s‖₁ ≤ TAYLOR_NORM`.
const TAYLOR_NORM: f64 = 0.25;

/// Term-size cutoff for the Taylor series at scaled norm ≤ 0.25; terms
/// decay faster than 4^-k/k!, so this converges in ~15 terms.
const TERM_TOL: f64 = 1e-18;
const MAX_TERMS: usize = 64;

/// `exp(a)` for square `a`.
pub fn matrix_exponential(a: &ComplexMatrix) -> Result<ComplexMatrix, NumericsError> {
    if !a.is_square() {
        return Err(NumericsError::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    let norm = a.one_norm();
    if !norm.is_finite() || norm > MAX_EXPM_NORM {
        return Err(NumericsError::NormOverflow { norm, max: MAX_EXPM_NORM });
    }
    let n = a.rows();
    let squarings = if norm <= TAYLOR_NORM {
        0
    } else {
        (norm / TAYLOR_NORM).log2().ceil() as u32
    };
    let scaled = a.scaled_re(0.5f64.powi(squarings as i32));

    let mut result = ComplexMatrix::identity(n);
    let mut term = ComplexMatrix::identity(n);
    let mut converged = false;
    for k in 1..=MAX_TERMS {
        term = term.matmul(&scaled).scaled_re(1.0 / k as f64);
        result = &result + &term;
        if term.max_abs() <= TERM_TOL {
            converged = true;
            break;
        }
    }
    debug_assert!(converged, "Taylor core failed to converge at norm {norm}");

    for _ in 0..squarings {
        result = result.matmul(&result);
    }
    if !result.all_finite() {
        return Err(NumericsError::NonFinite { op: "matrix_exponential" });
    }
    Ok(result)
}
