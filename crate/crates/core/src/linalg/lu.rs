//! Left-looking sparse LU (Gilbert–Peierls) with threshold partial pivoting
//! that prefers the diagonal, after a symmetric fill-reducing column order.
//!
//! Computes `P A Q = L U` with unit lower `L`; `Q` is the supplied column order.

use alloc::vec;
use alloc::vec::Vec;

use super::sparse::CsrMatrix;
use super::LinalgError;

/// Compressed-column storage.
#[derive(Debug, Clone, Default)]
struct Csc {
    ptr: Vec<usize>,
    idx: Vec<usize>,
    val: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SparseLu {
    n: usize,
    l: Csc,
    u: Csc,
    /// `pinv[row] = pivot step`
    pinv: Vec<usize>,
    q: Vec<usize>,
    pub min_pivot: f64,
    pub max_pivot: f64,
    pub off_diagonal_pivots: usize,
}

const UNSET: usize = usize::MAX;

impl SparseLu {
    /// Factors the square matrix `a` with column order `q` (`new -> old`).
    pub fn factor(a: &CsrMatrix, q: &[usize], tol: f64) -> Result<Self, LinalgError> {
        let n = a.nrows();
        if a.ncols() != n || q.len() != n {
            return Err(LinalgError::DimensionMismatch { expected: n, found: a.ncols() });
        }
        // Columns of `a` are the rows of its transpose.
        let at = a.transpose();
        let mut l = Csc { ptr: vec![0; n + 1], ..Default::default() };
        let mut u = Csc { ptr: vec![0; n + 1], ..Default::default() };
        let cap = 4 * a.nnz() + n;
        l.idx.reserve(cap);
        l.val.reserve(cap);
        u.idx.reserve(cap);
        u.val.reserve(cap);

        let mut pinv = vec![UNSET; n];
        let mut x = vec![0.0; n];
        let mut xi = vec![0usize; n];
        let mut mark = vec![false; n];
        let mut stack = vec![0usize; n];
        let mut pstack = vec![0usize; n];
        let mut min_pivot = f64::INFINITY;
        let mut max_pivot = 0.0f64;
        let mut off_diag = 0;

        for k in 0..n {
            l.ptr[k] = l.idx.len();
            u.ptr[k] = u.idx.len();
            let col = q[k];
            let (bi, bx) = at.row(col);

            // Symbolic: reach of the column's pattern through the columns of L.
            let mut top = n;
            for &r in bi {
                if !mark[r] {
                    top = dfs(r, &l, &pinv, top, &mut xi, &mut mark, &mut stack, &mut pstack);
                }
            }
            for &r in &xi[top..n] {
                mark[r] = false;
            }
            // Numeric: sparse triangular solve x = L \ A(:, col).
            for &r in &xi[top..n] {
                x[r] = 0.0;
            }
            for (&r, &v) in bi.iter().zip(bx) {
                x[r] = v;
            }
            for px in top..n {
                let j = xi[px];
                let jj = pinv[j];
                if jj == UNSET {
                    continue;
                }
                let xj = x[j];
                for p in l.ptr[jj] + 1..l.ptr[jj + 1] {
                    x[l.idx[p]] -= l.val[p] * xj;
                }
            }
            // Pivot choice.
            let mut ipiv = UNSET;
            let mut amax = -1.0;
            for &i in &xi[top..n] {
                if pinv[i] == UNSET {
                    let t = x[i].abs();
                    if t > amax {
                        amax = t;
                        ipiv = i;
                    }
                } else {
                    u.idx.push(pinv[i]);
                    u.val.push(x[i]);
                }
            }
            if ipiv == UNSET || amax <= 0.0 || !amax.is_finite() {
                return Err(LinalgError::Singular { column: k });
            }
            if pinv[col] == UNSET && x[col].abs() >= amax * tol {
                ipiv = col;
            }
            if ipiv != col {
                off_diag += 1;
            }
            let pivot = x[ipiv];
            min_pivot = min_pivot.min(pivot.abs());
            max_pivot = max_pivot.max(pivot.abs());
            u.idx.push(k);
            u.val.push(pivot);
            pinv[ipiv] = k;
            l.idx.push(ipiv);
            l.val.push(1.0);
            for &i in &xi[top..n] {
                if pinv[i] == UNSET {
                    l.idx.push(i);
                    l.val.push(x[i] / pivot);
                }
                x[i] = 0.0;
            }
        }
        l.ptr[n] = l.idx.len();
        u.ptr[n] = u.idx.len();
        for r in l.idx.iter_mut() {
            *r = pinv[*r];
        }
        Ok(SparseLu {
            n,
            l,
            u,
            pinv,
            q: q.to_vec(),
            min_pivot,
            max_pivot,
            off_diagonal_pivots: off_diag,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Stored entries of `L + U`.
    pub fn fill(&self) -> usize {
        self.l.idx.len() + self.u.idx.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = vec![0.0; n];
        for i in 0..n {
            y[self.pinv[i]] = b[i];
        }
        for j in 0..n {
            let yj = y[j];
            if yj != 0.0 {
                for p in self.l.ptr[j] + 1..self.l.ptr[j + 1] {
                    y[self.l.idx[p]] -= self.l.val[p] * yj;
                }
            }
        }
        for j in (0..n).rev() {
            let last = self.u.ptr[j + 1] - 1;
            y[j] /= self.u.val[last];
            let yj = y[j];
            if yj != 0.0 {
                for p in self.u.ptr[j]..last {
                    y[self.u.idx[p]] -= self.u.val[p] * yj;
                }
            }
        }
        let mut x = vec![0.0; n];
        for k in 0..n {
            x[self.q[k]] = y[k];
        }
        x
    }
}

/// Non-recursive depth-first search from row `j` through the columns of `L`
/// already computed; writes the reach in topological order into `xi[top..]`.
#[allow(clippy::too_many_arguments)]
fn dfs(
    j: usize,
    l: &Csc,
    pinv: &[usize],
    mut top: usize,
    xi: &mut [usize],
    mark: &mut [bool],
    stack: &mut [usize],
    pstack: &mut [usize],
) -> usize {
    let mut head = 0usize;
    stack[0] = j;
    loop {
        let j = stack[head];
        let jnew = pinv[j];
        if !mark[j] {
            mark[j] = true;
            pstack[head] = if jnew == UNSET { 0 } else { l.ptr[jnew] };
        }
        let end = if jnew == UNSET { 0 } else { l.ptr[jnew + 1] };
        let mut done = true;
        let mut p = pstack[head];
        while p < end {
            let i = l.idx[p];
            p += 1;
            if mark[i] {
                continue;
            }
            pstack[head] = p;
            head += 1;
            stack[head] = i;
            done = false;
            break;
        }
        if done {
            top -= 1;
            xi[top] = j;
            if head == 0 {
                break;
            }
            head -= 1;
        }
    }
    top
}
