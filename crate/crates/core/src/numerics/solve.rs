//! Linear solves by LU factorization with partial pivoting.

use super::{C64, ComplexMatrix, NumericsError};

/// Pivot magnitudes below `SINGULAR_PIVOT_REL * max|a_ij|` signal a
/// numerically degenerate system.
const SINGULAR_PIVOT_REL: f64 = 1e-13;

/// Residual bound `max|a·x − b| ≤ SOLVE_RESIDUAL_REL * (1 + max|b|)`
/// verified on every solve.
const SOLVE_RESIDUAL_REL: f64 = 1e-9;

/// Solve `a · x = b` by Gaussian elimination with partial pivoting.
pub fn solve_linear(a: &ComplexMatrix, b: &[C64]) -> Result<Vec<C64>, NumericsError> {
    if !a.is_square() {
        return Err(NumericsError::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    let n = a.rows();
    if b.len() != n {
        return Err(NumericsError::DimensionMismatch(format!(
            "rhs length {} vs matrix dimension {n}",
            b.len()
        )));
    }
    let pivot_floor = (SINGULAR_PIVOT_REL * a.max_abs()).max(f64::MIN_POSITIVE);

    let mut m = a.data().to_vec();
    let mut rhs = b.to_vec();
    for k in 0..n {
        let pivot_row = (k..n)
            .max_by(|&i, &j| m[i * n + k].norm().total_cmp(&m[j * n + k].norm()))
            .unwrap();
        let pivot = m[pivot_row * n + k];
        if pivot.norm() < pivot_floor {
            return Err(NumericsError::SingularMatrix { pivot: pivot.norm(), step: k });
        }
        if pivot_row != k {
            for j in k..n {
                m.swap(k * n + j, pivot_row * n + j);
            }
            rhs.swap(k, pivot_row);
        }
        for i in k + 1..n {
            let factor = m[i * n + k] / pivot;
            if factor.re == 0.0 && factor.im == 0.0 {
                continue;
            }
            m[i * n + k] = C64::new(0.0, 0.0);
            let (head, tail) = m.split_at_mut(i * n);
            let krow = &head[k * n + k + 1..k * n + n];
            let irow = &mut tail[k + 1..n];
            for (x, p) in irow.iter_mut().zip(krow) {
                *x -= factor * p;
            }
            rhs[i] = rhs[i] - factor * rhs[k];
        }
    }

    let mut x = vec![C64::new(0.0, 0.0); n];
    for k in (0..n).rev() {
        let mut acc = rhs[k];
        for j in k + 1..n {
            acc -= m[k * n + j] * x[j];
        }
        x[k] = acc / m[k * n + k];
    }

    let residual = a
        .matvec(&x)
        .iter()
        .zip(b)
        .map(|(l, r)| (l - r).norm())
        .fold(0.0, f64::max);
    let b_max = b.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let bound = SOLVE_RESIDUAL_REL * (1.0 + b_max);
    if !residual.is_finite() {
        return Err(NumericsError::NonFinite { op: "solve_linear" });
    }
    if residual > bound {
        return Err(NumericsError::SolveResidual { residual, bound });
    }
    Ok(x)
}
