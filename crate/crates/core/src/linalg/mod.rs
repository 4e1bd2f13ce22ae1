//! Sparse storage, direct solves with residual verification, and inf-sup
//! constants from generalized eigenvalue problems.

pub mod dense;
pub mod infsup;
pub mod lu;
pub mod ordering;
pub mod sparse;

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use thiserror::Error;

pub use infsup::{infsup_constant, EigenMethod, InfSupReport};
pub use lu::SparseLu;
pub use sparse::{dot, norm2, CsrMatrix, Triplets};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is singular (zero pivot at step {column})")]
    Singular { column: usize },
    #[error("relative residual {residual:e} exceeds {tolerance:e}")]
    ResidualTooLarge { residual: f64, tolerance: f64 },
    #[error("norm matrix is not symmetric positive definite")]
    NotSpd,
    #[error("eigenvalue iteration did not converge after {0} steps")]
    NoConvergence(usize),
}

/// Residual bound `‖Ax − b‖ / ‖b‖` accepted by [`solve_direct`].
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

/// Diagonal-preference threshold for partial pivoting.
pub const PIVOT_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub solution: Vec<f64>,
    /// `‖Ax − b‖ / ‖b‖`, recomputed from the returned solution.
    pub relative_residual: f64,
    pub min_pivot: f64,
    pub max_pivot: f64,
    pub off_diagonal_pivots: usize,
    pub fill: usize,
}

/// Factors `a` with a nested-dissection order (fill-reducing).
pub fn factor(a: &CsrMatrix) -> Result<SparseLu, LinalgError> {
    let q = ordering::nested_dissection(a);
    SparseLu::factor(a, &q, PIVOT_THRESHOLD)
}

/// As [`solve_direct`], ordering the unknowns by dissecting the graph of
/// `groups` (one id per row; unknowns of a group are eliminated together,
/// lowest index first).
pub fn solve_direct_grouped(a: &CsrMatrix, b: &[f64], groups: &[usize]) -> Result<SolveReport, LinalgError> {
    if groups.len() != a.nrows() {
        return Err(LinalgError::DimensionMismatch { expected: a.nrows(), found: groups.len() });
    }
    solve_ordered(a, b, |a| ordering::nested_dissection_grouped(a, groups))
}

/// Symmetric Ruiz scaling: `D` with every row and column of `D A D` having
/// max-norm close to one. Keeps diagonal pivots acceptable when the blocks
/// of a saddle-point system scale with different powers of `h`.
fn equilibrate(a: &CsrMatrix) -> Vec<f64> {
    let n = a.nrows();
    let mut d = vec![1.0; n];
    for _ in 0..EQUILIBRATION_SWEEPS {
        let mut m = vec![0.0f64; n];
        for (i, j, v) in a.iter() {
            m[i] = m[i].max((d[i] * v * d[j]).abs());
        }
        for (di, mi) in d.iter_mut().zip(&m) {
            if *mi > 0.0 {
                *di /= mi.sqrt();
            }
        }
    }
    d
}

const EQUILIBRATION_SWEEPS: usize = 5;
const MAX_REFINEMENT_STEPS: usize = 6;
const REFINEMENT_TARGET: f64 = 1e-14;

/// `b − Ax` accumulated in double-double arithmetic and rounded once, so
/// refinement keeps converging when `Ax` and `b` nearly cancel.
fn residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> Vec<f64> {
    (0..a.nrows())
        .map(|i| {
            let (cols, vals) = a.row(i);
            let (mut hi, mut lo) = (b[i], 0.0);
            for (&j, &v) in cols.iter().zip(vals) {
                let (p, pe) = two_prod(-v, x[j]);
                let (s, se) = two_sum(hi, p);
                hi = s;
                lo += se + pe;
            }
            hi + lo
        })
        .collect()
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// Dekker's exact product via Veltkamp splitting.
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    const SPLIT: f64 = 134217729.0; // 2^27 + 1
    let p = a * b;
    if !p.is_finite() {
        return (p, 0.0);
    }
    let split = |v: f64| {
        let c = SPLIT * v;
        let hi = c - (c - v);
        (hi, v - hi)
    };
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    (p, ((ah * bh - p) + ah * bl + al * bh) + al * bl)
}

fn relative_residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> (Vec<f64>, f64) {
    let r = residual(a, x, b);
    let nb = sparse::norm2(b);
    let nr = sparse::norm2(&r);
    let rel = if nb == 0.0 { nr } else { nr / nb };
    (r, rel)
}

/// Direct sparse solve with a few steps of iterative refinement. Fails rather
/// than returning a solution whose residual exceeds [`RESIDUAL_TOLERANCE`].
pub fn solve_direct(a: &CsrMatrix, b: &[f64]) -> Result<SolveReport, LinalgError> {
    solve_ordered(a, b, ordering::nested_dissection)
}

fn solve_ordered(
    a: &CsrMatrix,
    b: &[f64],
    order: impl FnOnce(&CsrMatrix) -> Vec<usize>,
) -> Result<SolveReport, LinalgError> {
    if a.nrows() != a.ncols() || b.len() != a.nrows() {
        return Err(LinalgError::DimensionMismatch { expected: a.nrows(), found: b.len() });
    }
    if a.nrows() == 0 {
        return Ok(SolveReport {
            solution: Vec::new(),
            relative_residual: 0.0,
            min_pivot: 0.0,
            max_pivot: 0.0,
            off_diagonal_pivots: 0,
            fill: 0,
        });
    }
    // Factor the equilibrated D A D; x = D (D A D)⁻¹ D b.
    let d = equilibrate(a);
    let scaled = a.scaled_rows_cols(&d, &d);
    let lu = SparseLu::factor(&scaled, &order(a), PIVOT_THRESHOLD)?;
    let apply = |rhs: &[f64]| -> Vec<f64> {
        let db: Vec<f64> = rhs.iter().zip(&d).map(|(v, s)| v * s).collect();
        lu.solve(&db).iter().zip(&d).map(|(v, s)| v * s).collect()
    };
    let mut x = apply(b);
    let (mut r, mut rel) = relative_residual(a, &x, b);
    // iterative refinement while it keeps paying off
    for _ in 0..MAX_REFINEMENT_STEPS {
        if rel <= REFINEMENT_TARGET {
            break;
        }
        let dx = apply(&r);
        let trial: Vec<f64> = x.iter().zip(&dx).map(|(xi, d)| xi + d).collect();
        let (tr, trel) = relative_residual(a, &trial, b);
        if !(trel < 0.5 * rel) {
            break;
        }
        x = trial;
        r = tr;
        rel = trel;
    }
    if !(rel <= RESIDUAL_TOLERANCE) {
        return Err(LinalgError::ResidualTooLarge { residual: rel, tolerance: RESIDUAL_TOLERANCE });
    }
    Ok(SolveReport {
        solution: x,
        relative_residual: rel,
        min_pivot: lu.min_pivot,
        max_pivot: lu.max_pivot,
        off_diagonal_pivots: lu.off_diagonal_pivots,
        fill: lu.fill(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_exact() {
        let b = alloc::vec![1.0, -2.0, 3.5];
        let r = solve_direct(&CsrMatrix::identity(3), &b).unwrap();
        assert_eq!(r.solution, b);
    }

    #[test]
    fn swap_needs_pivoting() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 1, 1.0), (1, 0, 1.0)]);
        let r = solve_direct(&a, &[1.0, 2.0]).unwrap();
        assert!((r.solution[0] - 2.0).abs() < 1e-15 && (r.solution[1] - 1.0).abs() < 1e-15);
        assert_eq!(r.off_diagonal_pivots, 2);
    }

    #[test]
    fn singular_reported() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)]);
        assert!(solve_direct(&a, &[1.0, 0.0]).is_err());
        let z = CsrMatrix::from_triplets(3, 3, &[(0, 0, 1.0), (1, 1, 1.0)]);
        assert!(matches!(solve_direct(&z, &[1.0, 1.0, 1.0]), Err(LinalgError::Singular { .. })));
    }

    #[test]
    fn random_sparse_indefinite_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..20 {
            let n = 5 + trial * 13;
            let mut t = Vec::new();
            for i in 0..n {
                // saddle structure: zero diagonal on the second half
                if i < n / 2 {
                    t.push((i, i, 1.0 + rng.random::<f64>()));
                }
                for _ in 0..3 {
                    let j = rng.random_range(0..n);
                    let v: f64 = rng.random::<f64>() - 0.5;
                    t.push((i, j, v));
                    t.push((j, i, v));
                }
            }
            let a = CsrMatrix::from_triplets(n, n, &t);
            let b: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            let d = a.to_dense();
            let Some(xd) = d.clone().lu().solve(&DVector::from_vec(b.clone())) else { continue };
            if d.clone().lu().determinant().abs() < 1e-8 {
                continue;
            }
            let r = solve_direct(&a, &b).unwrap();
            let scale = xd.amax().max(1.0);
            for i in 0..n {
                assert!((r.solution[i] - xd[i]).abs() < 1e-8 * scale, "trial {trial}");
            }
            assert!(r.relative_residual <= RESIDUAL_TOLERANCE);
        }
        let _ = DMatrix::<f64>::zeros(1, 1);
    }
}
