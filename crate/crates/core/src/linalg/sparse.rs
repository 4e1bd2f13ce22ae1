//! Compressed sparse row matrices assembled from triplets.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use nalgebra::DMatrix;

/// Unsorted `(row, col, value)` accumulator; duplicates are summed on conversion.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Triplets {
    pub nrows: usize,
    pub ncols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl Triplets {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Triplets { nrows, ncols, entries: Vec::new() }
    }

    pub fn push(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.nrows && j < self.ncols);
        self.entries.push((i, j, v));
    }

    /// Adds `scale * a_i * b_j` for every pair of sparse vector entries.
    pub fn push_outer(&mut self, a: &[(usize, f64)], b: &[(usize, f64)], scale: f64) {
        for &(i, ai) in a {
            for &(j, bj) in b {
                self.entries.push((i, j, scale * ai * bj));
            }
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn extend(&mut self, other: &Triplets, row_offset: usize, col_offset: usize) {
        for &(i, j, v) in &other.entries {
            self.push(i + row_offset, j + col_offset, v);
        }
    }

    pub fn to_csr(&self) -> CsrMatrix {
        CsrMatrix::from_triplets(self.nrows, self.ncols, &self.entries)
    }
}

/// Row-compressed sparse matrix with sorted, unique column indices and no
/// stored exact zeros.
#[derive(Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl fmt::Debug for CsrMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CsrMatrix({}x{}, nnz={})", self.nrows, self.ncols, self.nnz())
    }
}

impl CsrMatrix {
    pub fn from_triplets(nrows: usize, ncols: usize, entries: &[(usize, usize, f64)]) -> Self {
        let mut counts = vec![0usize; nrows + 1];
        for &(i, _, _) in entries {
            counts[i + 1] += 1;
        }
        for i in 0..nrows {
            counts[i + 1] += counts[i];
        }
        let mut cols = vec![0usize; entries.len()];
        let mut vals = vec![0.0; entries.len()];
        let mut next = counts.clone();
        for &(i, j, v) in entries {
            cols[next[i]] = j;
            vals[next[i]] = v;
            next[i] += 1;
        }
        let mut row_ptr = Vec::with_capacity(nrows + 1);
        let mut col_idx = Vec::with_capacity(entries.len());
        let mut values = Vec::with_capacity(entries.len());
        row_ptr.push(0);
        let mut perm: Vec<usize> = Vec::new();
        for i in 0..nrows {
            let (s, e) = (counts[i], counts[i + 1]);
            perm.clear();
            perm.extend(s..e);
            perm.sort_unstable_by_key(|&p| cols[p]);
            let mut k = 0;
            while k < perm.len() {
                let c = cols[perm[k]];
                let mut sum = 0.0;
                while k < perm.len() && cols[perm[k]] == c {
                    sum += vals[perm[k]];
                    k += 1;
                }
                if sum != 0.0 {
                    col_idx.push(c);
                    values.push(sum);
                }
            }
            row_ptr.push(col_idx.len());
        }
        CsrMatrix { nrows, ncols, row_ptr, col_idx, values }
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        CsrMatrix { nrows, ncols, row_ptr: vec![0; nrows + 1], col_idx: Vec::new(), values: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![1.0; n])
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        let t: Vec<_> = d.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
        Self::from_triplets(d.len(), d.len(), &t)
    }

    pub fn from_dense(a: &DMatrix<f64>) -> Self {
        let mut t = Vec::new();
        for i in 0..a.nrows() {
            for j in 0..a.ncols() {
                if a[(i, j)] != 0.0 {
                    t.push((i, j, a[(i, j)]));
                }
            }
        }
        Self::from_triplets(a.nrows(), a.ncols(), &t)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (c, v) = self.row(i);
        match c.binary_search(&j) {
            Ok(p) => v[p],
            Err(_) => 0.0,
        }
    }

    /// Iterates `(row, col, value)` over stored entries in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| {
            let r = self.row_ptr[i]..self.row_ptr[i + 1];
            r.map(move |p| (i, self.col_idx[p], self.values[p]))
        })
    }

    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        self.iter().collect()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows)
            .map(|i| {
                let (c, v) = self.row(i);
                c.iter().zip(v).map(|(&j, a)| a * x[j]).sum()
            })
            .collect()
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut counts = vec![0usize; self.ncols + 1];
        for &j in &self.col_idx {
            counts[j + 1] += 1;
        }
        for j in 0..self.ncols {
            counts[j + 1] += counts[j];
        }
        let mut next = counts.clone();
        let mut col_idx = vec![0; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for i in 0..self.nrows {
            let (c, v) = self.row(i);
            for (&j, &a) in c.iter().zip(v) {
                col_idx[next[j]] = i;
                values[next[j]] = a;
                next[j] += 1;
            }
        }
        CsrMatrix { nrows: self.ncols, ncols: self.nrows, row_ptr: counts, col_idx, values }
    }

    /// Sparse product `self * b`.
    pub fn matmul(&self, b: &CsrMatrix) -> CsrMatrix {
        assert_eq!(self.ncols, b.nrows);
        let mut acc = vec![0.0; b.ncols];
        let mut seen = vec![usize::MAX; b.ncols];
        let mut cols: Vec<usize> = Vec::new();
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for i in 0..self.nrows {
            cols.clear();
            let (ca, va) = self.row(i);
            for (&k, &a) in ca.iter().zip(va) {
                let (cb, vb) = b.row(k);
                for (&j, &bv) in cb.iter().zip(vb) {
                    if seen[j] != i {
                        seen[j] = i;
                        acc[j] = 0.0;
                        cols.push(j);
                    }
                    acc[j] += a * bv;
                }
            }
            cols.sort_unstable();
            for &j in &cols {
                if acc[j] != 0.0 {
                    col_idx.push(j);
                    values.push(acc[j]);
                }
            }
            row_ptr.push(col_idx.len());
        }
        CsrMatrix { nrows: self.nrows, ncols: b.ncols, row_ptr, col_idx, values }
    }

    /// `self + s * b`
    pub fn add_scaled(&self, b: &CsrMatrix, s: f64) -> CsrMatrix {
        assert_eq!((self.nrows, self.ncols), (b.nrows, b.ncols));
        let mut t = self.triplets();
        t.extend(b.iter().map(|(i, j, v)| (i, j, s * v)));
        CsrMatrix::from_triplets(self.nrows, self.ncols, &t)
    }

    /// `diag(r) · A · diag(c)`.
    pub fn scaled_rows_cols(&self, r: &[f64], c: &[f64]) -> CsrMatrix {
        let mut m = self.clone();
        for i in 0..m.nrows {
            for p in m.row_ptr[i]..m.row_ptr[i + 1] {
                m.values[p] *= r[i] * c[m.col_idx[p]];
            }
        }
        m
    }

    pub fn scaled(&self, s: f64) -> CsrMatrix {
        let mut m = self.clone();
        for v in m.values.iter_mut() {
            *v *= s;
        }
        m
    }

    /// Submatrix on the given row and column index lists (in that order).
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> CsrMatrix {
        let mut col_map = vec![usize::MAX; self.ncols];
        for (new, &old) in cols.iter().enumerate() {
            col_map[old] = new;
        }
        let mut t = Vec::new();
        for (ni, &i) in rows.iter().enumerate() {
            let (c, v) = self.row(i);
            for (&j, &a) in c.iter().zip(v) {
                if col_map[j] != usize::MAX {
                    t.push((ni, col_map[j], a));
                }
            }
        }
        CsrMatrix::from_triplets(rows.len(), cols.len(), &t)
    }

    /// Symmetric permutation `P A Pᵀ` with `new[i] = old[perm[i]]`.
    pub fn permute_symmetric(&self, perm: &[usize]) -> CsrMatrix {
        self.select(perm, perm)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max |A - Aᵀ| / max |A|` over the stored pattern (0 for the zero matrix).
    pub fn asymmetry(&self) -> f64 {
        if self.nrows != self.ncols {
            return f64::INFINITY;
        }
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let t = self.transpose();
        let d = self.add_scaled(&t, -1.0);
        d.max_abs() / scale
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.asymmetry() <= tol
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    /// True if every stored off-diagonal entry is zero.
    pub fn is_diagonal(&self) -> bool {
        self.iter().all(|(i, j, _)| i == j)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.iter() {
            d[(i, j)] = v;
        }
        d
    }

    /// Block-diagonal matrix `diag(a, b)`.
    pub fn block_diag(a: &CsrMatrix, b: &CsrMatrix) -> CsrMatrix {
        let mut t = a.triplets();
        t.extend(b.iter().map(|(i, j, v)| (i + a.nrows, j + a.ncols, v)));
        CsrMatrix::from_triplets(a.nrows + b.nrows, a.ncols + b.ncols, &t)
    }

    /// Writes `row col value` lines (0-based indices) with a `% rows cols nnz` header.
    pub fn write_coo<W: fmt::Write>(&self, w: &mut W) -> fmt::Result {
        writeln!(w, "% {} {} {}", self.nrows, self.ncols, self.nnz())?;
        for (i, j, v) in self.iter() {
            writeln!(w, "{} {} {:.17e}", i, j, v)?;
        }
        Ok(())
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    #[allow(unused_imports)] // shadowed by inherent methods when std is linked
    use num_traits::Float;
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_summed_and_zeros_dropped() {
        let m = CsrMatrix::from_triplets(2, 3, &[(0, 2, 1.0), (0, 0, 2.0), (0, 2, 3.0), (1, 1, 1.0), (1, 1, -1.0)]);
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.get(0, 2), 4.0);
        assert_eq!(m.get(1, 1), 0.0);
        assert_eq!(m.row(0).0, &[0, 2]);
    }

    #[test]
    fn transpose_matmul_select() {
        let a = CsrMatrix::from_triplets(2, 3, &[(0, 0, 1.0), (0, 2, 2.0), (1, 1, 3.0)]);
        let at = a.transpose();
        assert_eq!(at.get(2, 0), 2.0);
        let p = a.matmul(&at);
        assert_eq!(p.to_dense(), a.to_dense() * at.to_dense());
        let s = a.select(&[1], &[1, 2]);
        assert_eq!(s.get(0, 0), 3.0);
        assert_eq!(s.ncols(), 2);
        assert_eq!(a.mul_vec(&[1.0, 1.0, 1.0]), alloc::vec![3.0, 3.0]);
    }

    #[test]
    fn symmetry_measure() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 1, 1.0), (1, 0, 1.0 + 1e-13)]);
        assert!(a.is_symmetric(1e-12));
        let b = CsrMatrix::from_triplets(2, 2, &[(0, 1, 1.0)]);
        assert!(!b.is_symmetric(1e-12));
    }

    #[test]
    fn coo_dump() {
        let a = CsrMatrix::identity(2);
        let mut s = alloc::string::String::new();
        a.write_coo(&mut s).unwrap();
        assert!(s.starts_with("% 2 2 2\n0 0 1"));
    }
}
