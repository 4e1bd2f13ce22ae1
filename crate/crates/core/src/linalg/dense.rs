//! Dense helpers on top of nalgebra.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use super::LinalgError;

/// Solves `a x = b` by LU with partial pivoting.
pub fn solve(a: &DMatrix<f64>, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
    let lu = a.clone().lu();
    let x = lu
        .solve(&DVector::from_column_slice(b))
        .ok_or(LinalgError::Singular { column: 0 })?;
    Ok(x.as_slice().to_vec())
}

/// Eigenvalues of the symmetric-definite pencil `(m, n)`: `m x = λ n x`,
/// via `n = L Lᵀ` and the standard problem for `L⁻¹ m L⁻ᵀ`. Sorted ascending.
pub fn generalized_symmetric_eigenvalues(m: &DMatrix<f64>, n: &DMatrix<f64>) -> Result<Vec<f64>, LinalgError> {
    let dim = m.nrows();
    if m.ncols() != dim || n.nrows() != dim || n.ncols() != dim {
        return Err(LinalgError::DimensionMismatch { expected: dim, found: n.nrows() });
    }
    if dim == 0 {
        return Ok(Vec::new());
    }
    let l = n.clone().cholesky().ok_or(LinalgError::NotSpd)?.l();
    let x = l.solve_lower_triangular(m).ok_or(LinalgError::NotSpd)?;
    let h = l.solve_lower_triangular(&x.transpose()).ok_or(LinalgError::NotSpd)?;
    let hs = (&h + h.transpose()) * 0.5;
    let mut ev: Vec<f64> = hs.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    Ok(ev)
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_symmetric_eigenvalue(a: &DMatrix<f64>) -> f64 {
    if a.nrows() == 0 {
        return f64::INFINITY;
    }
    let s = (a + a.transpose()) * 0.5;
    s.symmetric_eigenvalues().min()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pencil_with_identity() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let ev = generalized_symmetric_eigenvalues(&m, &DMatrix::identity(2, 2)).unwrap();
        assert!((ev[0] - 1.0).abs() < 1e-14 && (ev[1] - 3.0).abs() < 1e-14);
        let n = DMatrix::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 1.0]);
        let d = DMatrix::from_row_slice(2, 2, &[8.0, 0.0, 0.0, -3.0]);
        let ev = generalized_symmetric_eigenvalues(&d, &n).unwrap();
        assert!((ev[0] + 3.0).abs() < 1e-14 && (ev[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn indefinite_norm_rejected() {
        let n = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert_eq!(
            generalized_symmetric_eigenvalues(&DMatrix::identity(2, 2), &n),
            Err(LinalgError::NotSpd)
        );
    }
}
