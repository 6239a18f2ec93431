//! Self-contained dense complex linear algebra.
//!
//! Everything downstream (operators, superoperators, density matrices) is
//! built on [`ComplexMatrix`]. Conventions fixed here and inherited by the
//! rest of the crate: row-major element storage, column-stacking for
//! vectorized density matrices.
//!
//! The problem sizes in this crate are small (at most a few thousand on a
//! side for superoperators, a few dozen for states), so the kernels favor
//! robustness over asymptotic speed: cyclic Jacobi for Hermitian
//! eigenvalues, LU with partial pivoting for solves, scaling-and-squaring
//! for the matrix exponential.

mod eigen;
mod expm;
mod matrix;
mod solve;

pub use eigen::{
    hermitian_eigen, hermitian_eigenvalues, Spectrum, DEFAULT_JACOBI_TOL, HERMITICITY_TOL,
    MAX_JACOBI_SWEEPS,
};
pub use expm::{matrix_exponential, MAX_EXPM_NORM};
pub use matrix::{kron, kron_add_scaled_into, ComplexMatrix, MAX_KRON_DIM};
pub use solve::solve_linear;

pub type C64 = num_complex::Complex64;

#[derive(Debug, Clone, thiserror::Error)]
pub enum NumericsError {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("Kronecker product dimension {dim} exceeds maximum {max} (cutoff too large?)")]
    DimensionOverflow { dim: usize, max: usize },
    #[error("matrix not Hermitian: max |A - A^H| element = {deviation:.3e}")]
    NotHermitian { deviation: f64 },
    #[error("Jacobi eigensolver did not converge within {sweeps} sweeps (off-diagonal {off:.3e})")]
    NoConvergence { sweeps: usize, off: f64 },
    #[error("numerically singular pivot {pivot:.3e} at elimination step {step}")]
    SingularMatrix { pivot: f64, step: usize },
    #[error("linear solve residual {residual:.3e} exceeds bound {bound:.3e}")]
    SolveResidual { residual: f64, bound: f64 },
    #[error("matrix norm {norm:.3e} exceeds exponential bound {max:.0e}")]
    NormOverflow { norm: f64, max: f64 },
    #[error("non-finite entries after {op}")]
    NonFinite { op: &'static str },
}
