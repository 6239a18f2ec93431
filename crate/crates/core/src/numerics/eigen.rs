//! Hermitian eigendecomposition by cyclic Jacobi rotations.
//!
//! Matrices diagonalized here are density-matrix sized (≤ ~64), where
//! Jacobi's unconditional convergence on Hermitian input outweighs the
//! asymptotic advantage of QR. Each rotation annihilates one off-diagonal
//! pair: the complex phase of `a_pq` is absorbed first, then a real Givens
//! rotation zeroes the remaining symmetric 2x2 block.

use super::{C64, ComplexMatrix, NumericsError};

/// Default off-diagonal convergence threshold.
pub const DEFAULT_JACOBI_TOL: f64 = 1e-12;

/// Sweep limit before giving up.
pub const MAX_JACOBI_SWEEPS: usize = 100;

/// Max elementwise deviation from `A = A^H` accepted as Hermitian input.
pub const HERMITICITY_TOL: f64 = 1e-10;

/// Real spectrum of a Hermitian matrix, eigenvalues sorted ascending.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// Unitary of eigenvectors (as columns), in eigenvalue order.
    pub eigenvectors: Option<ComplexMatrix>,
}

impl Spectrum {
    /// Sum of absolute eigenvalues. For a Hermitian matrix this is the
    /// trace norm (singular values coincide with |eigenvalues|).
    pub fn trace_norm(&self) -> f64 {
        self.eigenvalues.iter().map(|l| l.abs()).sum()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }
}

/// Eigenvalues only.
pub fn hermitian_eigenvalues(a: &ComplexMatrix, tol: f64) -> Result<Spectrum, NumericsError> {
    jacobi(a, tol, false)
}

/// Eigenvalues and eigenvectors.
pub fn hermitian_eigen(a: &ComplexMatrix, tol: f64) -> Result<Spectrum, NumericsError> {
    jacobi(a, tol, true)
}

fn jacobi(a: &ComplexMatrix, tol: f64, want_vectors: bool) -> Result<Spectrum, NumericsError> {
    if !a.is_square() {
        return Err(NumericsError::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    let dev = a.hermiticity_error();
    if dev > HERMITICITY_TOL {
        return Err(NumericsError::NotHermitian { deviation: dev });
    }
    let n = a.rows();
    let mut m = a.data().to_vec();
    let mut v = want_vectors.then(|| ComplexMatrix::identity(n));

    if n <= 1 {
        let eigenvalues = m.first().map(|z| z.re).into_iter().collect();
        return Ok(Spectrum { eigenvalues, eigenvectors: v });
    }

    let mut converged = false;
    let mut off_max = 0.0;
    for _sweep in 0..MAX_JACOBI_SWEEPS {
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = m[p * n + q];
                let mag = apq.norm();
                if mag <= tol {
                    continue;
                }
                rotate(&mut m, v.as_mut(), n, p, q, apq, mag);
            }
        }
        off_max = (0..n - 1)
            .flat_map(|p| (p + 1..n).map(move |q| (p, q)))
            .map(|(p, q)| m[p * n + q].norm())
            .fold(0.0, f64::max);
        if off_max <= tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(NumericsError::NoConvergence { sweeps: MAX_JACOBI_SWEEPS, off: off_max });
    }

    // Sort ascending, permuting eigenvector columns to match.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i * n + i].re.total_cmp(&m[j * n + j].re));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| m[i * n + i].re).collect();
    let eigenvectors = v.map(|v| {
        ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])])
    });
    Ok(Spectrum { eigenvalues, eigenvectors })
}

/// One Jacobi rotation annihilating the (p,q) element of `m`
/// (`apq = m[p,q]`, `mag = |apq| > 0`), accumulating into `v` if present.
fn rotate(
    m: &mut [C64],
    v: Option<&mut ComplexMatrix>,
    n: usize,
    p: usize,
    q: usize,
    apq: C64,
    mag: f64,
) {
    let app = m[p * n + p].re;
    let aqq = m[q * n + q].re;
    let w = apq / mag; // phase e^{iθ} of the off-diagonal element
    let wc = w.conj();
    let tau = (aqq - app) / (2.0 * mag);
    // Smaller-angle root of t² + 2τt − 1 = 0 for stability.
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    // Columns: [col_p, col_q] ← [c·col_p − s·w̄·col_q, s·col_p + c·w̄·col_q]
    for j in 0..n {
        let mjp = m[j * n + p];
        let mjq = wc * m[j * n + q];
        m[j * n + p] = mjp * c - mjq * s;
        m[j * n + q] = mjp * s + mjq * c;
    }
    // Rows with the conjugate phase: U† acting from the left.
    for j in 0..n {
        let mpj = m[p * n + j];
        let mqj = w * m[q * n + j];
        m[p * n + j] = mpj * c - mqj * s;
        m[q * n + j] = mpj * s + mqj * c;
    }
    // Clean up rounding in the rotated pair; exactness here is what the
    // convergence test relies on.
    m[p * n + q] = C64::new(0.0, 0.0);
    m[q * n + p] = C64::new(0.0, 0.0);
    m[p * n + p] = C64::new(m[p * n + p].re, 0.0);
    m[q * n + q] = C64::new(m[q * n + q].re, 0.0);

    if let Some(v) = v {
        for j in 0..n {
            let vjp = v[(j, p)];
            let vjq = wc * v[(j, q)];
            v[(j, p)] = vjp * c - vjq * s;
            v[(j, q)] = vjp * s + vjq * c;
        }
    }
}
