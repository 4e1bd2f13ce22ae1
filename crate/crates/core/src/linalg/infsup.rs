//! Discrete inf-sup constants of a symmetric operator in a given norm.
//!
//! For symmetric `M` and SPD `N`, `inf_x sup_y yᵀMx / (‖x‖_N ‖y‖_N)` equals the
//! smallest `|λ|` of `M x = λ N x`. Small problems use a dense eigensolve;
//! larger ones use Lanczos in the `N` inner product on `M⁻¹N` (shift-invert
//! at zero), whose largest `|θ|` is `1 / β`.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use super::sparse::{dot, CsrMatrix};
use super::{dense, factor, LinalgError};

/// Problems up to this size use the dense generalized eigensolver.
pub const DENSE_LIMIT: usize = 900;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigenMethod {
    Dense,
    Lanczos,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfSupReport {
    /// Smallest `|λ|`: the inf-sup constant.
    pub beta: f64,
    /// Largest `|λ|`: the continuity constant.
    pub lambda_max: f64,
    pub dim: usize,
    pub method: EigenMethod,
}

impl InfSupReport {
    pub fn condition(&self) -> f64 {
        self.lambda_max / self.beta
    }
}

/// β for `(m, n)`, choosing dense or Lanczos by size.
pub fn infsup_constant(m: &CsrMatrix, n: &CsrMatrix) -> Result<InfSupReport, LinalgError> {
    if m.nrows() <= DENSE_LIMIT {
        infsup_dense(m, n)
    } else {
        infsup_lanczos(m, n)
    }
}

pub fn infsup_dense(m: &CsrMatrix, n: &CsrMatrix) -> Result<InfSupReport, LinalgError> {
    check_dims(m, n)?;
    let ev = dense::generalized_symmetric_eigenvalues(&m.to_dense(), &n.to_dense())?;
    let beta = ev.iter().fold(f64::INFINITY, |a, v| a.min(v.abs()));
    let lambda_max = ev.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    Ok(InfSupReport { beta, lambda_max, dim: m.nrows(), method: EigenMethod::Dense })
}

fn check_dims(m: &CsrMatrix, n: &CsrMatrix) -> Result<(), LinalgError> {
    let d = m.nrows();
    if m.ncols() != d || n.nrows() != d || n.ncols() != d {
        return Err(LinalgError::DimensionMismatch { expected: d, found: n.nrows() });
    }
    Ok(())
}

pub fn infsup_lanczos(m: &CsrMatrix, n: &CsrMatrix) -> Result<InfSupReport, LinalgError> {
    check_dims(m, n)?;
    let lu_m = factor(m)?;
    let lu_n = factor(n)?;
    let inv_beta = lanczos_max_abs(n, |v| lu_m.solve(&n.mul_vec(v)))?;
    let lambda_max = lanczos_max_abs(n, |v| lu_n.solve(&m.mul_vec(v)))?;
    Ok(InfSupReport { beta: 1.0 / inv_beta, lambda_max, dim: m.nrows(), method: EigenMethod::Lanczos })
}

const MAX_LANCZOS: usize = 400;
const LANCZOS_TOL: f64 = 1e-10;

/// Largest `|θ|` of an `n`-self-adjoint operator via Lanczos with full
/// reorthogonalization in the `n` inner product.
fn lanczos_max_abs<F>(n: &CsrMatrix, apply: F) -> Result<f64, LinalgError>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let dim = n.nrows();
    if dim == 0 {
        return Ok(0.0);
    }
    // deterministic, non-degenerate start vector
    let mut v: Vec<f64> = (0..dim).map(|i| 1.0 + 0.5 * ((i as f64) * 0.7548776662466927).sin()).collect();
    let nv = n.mul_vec(&v);
    let s = dot(&v, &nv);
    if !(s > 0.0) {
        return Err(LinalgError::NotSpd);
    }
    let s = s.sqrt();
    v.iter_mut().for_each(|x| *x /= s);
    let mut basis: Vec<Vec<f64>> = vec![v];
    let mut nbasis: Vec<Vec<f64>> = vec![nv.iter().map(|x| x / s).collect()];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut last = f64::NAN;
    let steps = MAX_LANCZOS.min(dim);
    for j in 0..steps {
        let mut z = apply(&basis[j]);
        let a = dot(&nbasis[j], &z);
        alpha.push(a);
        for _ in 0..2 {
            for (b, nb) in basis.iter().zip(&nbasis) {
                let c = dot(nb, &z);
                z.iter_mut().zip(b).for_each(|(zi, bi)| *zi -= c * bi);
            }
        }
        let nz = n.mul_vec(&z);
        let bz2 = dot(&z, &nz);
        if !(bz2 >= 0.0) {
            return Err(LinalgError::NotSpd);
        }
        let bz = bz2.sqrt();
        let k = alpha.len();
        let check = k % 5 == 0 || k == steps || bz <= 1e-13 * a.abs().max(1e-300);
        if check {
            let (theta, resid) = tridiagonal_extreme(&alpha, &beta, bz);
            if resid <= LANCZOS_TOL * theta.abs() || bz <= 1e-13 * theta.abs() || k == steps {
                return Ok(theta.abs());
            }
            if (theta.abs() - last).abs() <= 1e-14 * theta.abs() && resid <= 1e-7 * theta.abs() {
                return Ok(theta.abs());
            }
            last = theta.abs();
        }
        beta.push(bz);
        basis.push(z.iter().map(|x| x / bz).collect());
        nbasis.push(nz.iter().map(|x| x / bz).collect());
    }
    Err(LinalgError::NoConvergence(steps))
}

/// Ritz value of largest magnitude of the Lanczos tridiagonal and its residual estimate.
fn tridiagonal_extreme(alpha: &[f64], beta: &[f64], next_beta: f64) -> (f64, f64) {
    let k = alpha.len();
    let t = DMatrix::from_fn(k, k, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    let eig = t.symmetric_eigen();
    let mut best = 0;
    for i in 0..k {
        if eig.eigenvalues[i].abs() > eig.eigenvalues[best].abs() {
            best = i;
        }
    }
    let resid = (next_beta * eig.eigenvectors[(k - 1, best)]).abs();
    (eig.eigenvalues[best], resid)
}
