//! Modal polynomial bases on the reference triangle and on edges.
//!
//! The scalar basis of `P_k` is L²-orthonormal on the reference triangle and
//! hierarchical: its first `dim P_j` members span `P_j`. Vector bases are built
//! from it, and the broken Raviart–Thomas space `P_k² + x P̃_k` adds `x φ` for
//! the top-degree scalar functions.

pub mod quadrature;

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use thiserror::Error;

use crate::mesh::Point;

pub use quadrature::{quad_edge, quad_triangle, EdgeRule, QuadRule};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BasisError {
    #[error("quadrature exactness {degree} unsupported (max {max})")]
    UnsupportedQuadrature { degree: usize, max: usize },
    #[error("degenerate cell: det J = {0:e}")]
    DegenerateCell(f64),
    #[error("monomial Gram matrix is not positive definite at degree {0}")]
    GramBreakdown(usize),
    #[error("polynomial degree {0} exceeds the supported maximum {max}", max = MAX_DEGREE)]
    DegreeTooHigh(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    ScalarPk,
    VectorPk,
    BrokenRT,
}

impl Family {
    pub fn dimension(self, k: usize) -> usize {
        match self {
            Family::ScalarPk => (k + 1) * (k + 2) / 2,
            Family::VectorPk => (k + 1) * (k + 2),
            Family::BrokenRT => (k + 1) * (k + 3),
        }
    }

    pub fn is_vector(self) -> bool {
        self != Family::ScalarPk
    }
}

/// `dim P_k` in two variables.
pub fn scalar_dim(k: usize) -> usize {
    (k + 1) * (k + 2) / 2
}

/// Affine map `x = origin + J x̂` from the reference triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap {
    pub origin: Point,
    pub jac: [[f64; 2]; 2],
    pub inv: [[f64; 2]; 2],
    pub det: f64,
}

impl AffineMap {
    pub fn from_triangle(v: &[Point; 3]) -> Result<Self, BasisError> {
        let jac = [[v[1][0] - v[0][0], v[2][0] - v[0][0]], [v[1][1] - v[0][1], v[2][1] - v[0][1]]];
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det <= 0.0 || !det.is_finite() {
            return Err(BasisError::DegenerateCell(det));
        }
        let inv = [[jac[1][1] / det, -jac[0][1] / det], [-jac[1][0] / det, jac[0][0] / det]];
        Ok(AffineMap { origin: v[0], jac, inv, det })
    }

    pub fn to_physical(&self, xh: Point) -> Point {
        [
            self.origin[0] + self.jac[0][0] * xh[0] + self.jac[0][1] * xh[1],
            self.origin[1] + self.jac[1][0] * xh[0] + self.jac[1][1] * xh[1],
        ]
    }

    pub fn to_reference(&self, x: Point) -> Point {
        let d = [x[0] - self.origin[0], x[1] - self.origin[1]];
        [self.inv[0][0] * d[0] + self.inv[0][1] * d[1], self.inv[1][0] * d[0] + self.inv[1][1] * d[1]]
    }

    /// `J^{-T} g`
    fn covariant(&self, g: Point) -> Point {
        [self.inv[0][0] * g[0] + self.inv[1][0] * g[1], self.inv[0][1] * g[0] + self.inv[1][1] * g[1]]
    }

    /// `J v / det J`
    fn piola(&self, v: Point) -> Point {
        [
            (self.jac[0][0] * v[0] + self.jac[0][1] * v[1]) / self.det,
            (self.jac[1][0] * v[0] + self.jac[1][1] * v[1]) / self.det,
        ]
    }
}

/// Orthonormal hierarchical basis of `P_k` on the reference triangle,
/// stored as coefficients over the Dubiner functions
/// `ψ_ab = (1−y)^a P_a((2x−1+y)/(1−y)) P_b^{(2a+1,0)}(2y−1)`, which are
/// already orthogonal; a Gram–Schmidt pass fixes the normalization and
/// removes rounding.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarPk {
    degree: usize,
    powers: Vec<(usize, usize)>,
    /// Row `i` holds the seed coefficients of `φ_i` (lower triangular).
    coeffs: Vec<f64>,
}

/// Highest polynomial degree of the modal bases.
pub const MAX_DEGREE: usize = 10;

/// Scaled Legendre `Q_a = (1−y)^a P_a((2x−1+y)/(1−y))` and its gradient, `a ≤ k`.
fn scaled_legendre(k: usize, x: f64, y: f64, q: &mut [f64], g: &mut [Point]) {
    q[0] = 1.0;
    g[0] = [0.0, 0.0];
    if k == 0 {
        return;
    }
    let q1 = 2.0 * x - 1.0 + y;
    let s = (1.0 - y) * (1.0 - y);
    let sy = -2.0 * (1.0 - y);
    q[1] = q1;
    g[1] = [2.0, 1.0];
    for n in 1..k {
        let nf = n as f64;
        let a = (2.0 * nf + 1.0) / (nf + 1.0);
        let b = nf / (nf + 1.0);
        q[n + 1] = a * q1 * q[n] - b * s * q[n - 1];
        g[n + 1] = [
            a * (2.0 * q[n] + q1 * g[n][0]) - b * s * g[n - 1][0],
            a * (q[n] + q1 * g[n][1]) - b * (sy * q[n - 1] + s * g[n - 1][1]),
        ];
    }
}

/// Jacobi `P_n^{(α,0)}(t)` and derivative for `n ≤ k`.
fn jacobi(k: usize, alpha: f64, t: f64, p: &mut [f64], dp: &mut [f64]) {
    p[0] = 1.0;
    dp[0] = 0.0;
    if k == 0 {
        return;
    }
    p[1] = 0.5 * alpha + 0.5 * (alpha + 2.0) * t;
    dp[1] = 0.5 * (alpha + 2.0);
    for n in 2..=k {
        let nf = n as f64;
        let c = 2.0 * nf + alpha;
        let a1 = 2.0 * nf * (nf + alpha) * (c - 2.0);
        let a2 = (c - 1.0) * alpha * alpha;
        let a3 = (c - 2.0) * (c - 1.0) * c;
        let a4 = 2.0 * (nf + alpha - 1.0) * (nf - 1.0) * c;
        p[n] = ((a2 + a3 * t) * p[n - 1] - a4 * p[n - 2]) / a1;
        dp[n] = (a3 * p[n - 1] + (a2 + a3 * t) * dp[n - 1] - a4 * dp[n - 2]) / a1;
    }
}

const NSEED: usize = (MAX_DEGREE + 1) * (MAX_DEGREE + 2) / 2;

impl ScalarPk {
    pub fn new(degree: usize) -> Result<Self, BasisError> {
        if degree > MAX_DEGREE {
            return Err(BasisError::DegreeTooHigh(degree));
        }
        let mut powers = Vec::new();
        for t in 0..=degree {
            for b in 0..=t {
                powers.push((t - b, b));
            }
        }
        let n = powers.len();
        let mut pk = ScalarPk { degree, powers, coeffs: vec![0.0; n * n] };
        let rule = quad_triangle(2 * degree)?;
        let mut gram = DMatrix::<f64>::zeros(n, n);
        let mut s = [0.0; NSEED];
        for (x, w) in rule.points.iter().zip(&rule.weights) {
            pk.seeds(*x, &mut s, None);
            for i in 0..n {
                for j in 0..n {
                    gram[(i, j)] += w * s[i] * s[j];
                }
            }
        }
        // Cholesky–Gram–Schmidt, repeated once to clean up rounding.
        let mut c = DMatrix::<f64>::identity(n, n);
        for _ in 0..2 {
            let g = &c * &gram * c.transpose();
            let l = g.cholesky().ok_or(BasisError::GramBreakdown(degree))?.l();
            let linv = l
                .solve_lower_triangular(&DMatrix::identity(n, n))
                .ok_or(BasisError::GramBreakdown(degree))?;
            c = linv * c;
        }
        for i in 0..n {
            for j in 0..=i {
                pk.coeffs[i * n + j] = c[(i, j)];
            }
        }
        Ok(pk)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.powers.len()
    }

    fn seeds(&self, xh: Point, m: &mut [f64], grads: Option<(&mut [f64], &mut [f64])>) {
        let k = self.degree;
        let mut q = [0.0f64; MAX_DEGREE + 1];
        let mut gq = [[0.0f64; 2]; MAX_DEGREE + 1];
        scaled_legendre(k, xh[0], xh[1], &mut q, &mut gq);
        let mut jp = [[0.0f64; MAX_DEGREE + 1]; MAX_DEGREE + 1];
        let mut jd = [[0.0f64; MAX_DEGREE + 1]; MAX_DEGREE + 1];
        let t = 2.0 * xh[1] - 1.0;
        for a in 0..=k {
            jacobi(k - a, (2 * a + 1) as f64, t, &mut jp[a], &mut jd[a]);
        }
        for (j, &(a, b)) in self.powers.iter().enumerate() {
            m[j] = q[a] * jp[a][b];
        }
        if let Some((mx, my)) = grads {
            for (j, &(a, b)) in self.powers.iter().enumerate() {
                mx[j] = gq[a][0] * jp[a][b];
                my[j] = gq[a][1] * jp[a][b] + q[a] * 2.0 * jd[a][b];
            }
        }
    }

    /// Values and (optionally) reference gradients at a reference point.
    pub fn eval(&self, xh: Point, vals: &mut [f64], grads: Option<&mut [Point]>) {
        let n = self.dim();
        let mut m = [0.0f64; NSEED];
        let mut mx = [0.0f64; NSEED];
        let mut my = [0.0f64; NSEED];
        let want = grads.is_some();
        self.seeds(xh, &mut m, want.then_some((&mut mx[..], &mut my[..])));
        for i in 0..n {
            let row = &self.coeffs[i * n..i * n + i + 1];
            vals[i] = row.iter().zip(&m[..=i]).map(|(c, v)| c * v).sum();
        }
        if let Some(g) = grads {
            for i in 0..n {
                let row = &self.coeffs[i * n..i * n + i + 1];
                let gx: f64 = row.iter().zip(&mx[..=i]).map(|(c, v)| c * v).sum();
                let gy: f64 = row.iter().zip(&my[..=i]).map(|(c, v)| c * v).sum();
                g[i] = [gx, gy];
            }
        }
    }
}

/// Basis evaluations at a set of points, row-major `[point * dim + i]`.
///
/// Scalar families fill `values`/`grads`; vector families fill `vectors`/`divs`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BasisTable {
    pub dim: usize,
    pub npts: usize,
    pub values: Vec<f64>,
    pub grads: Vec<Point>,
    pub vectors: Vec<Point>,
    pub divs: Vec<f64>,
}

impl BasisTable {
    pub fn value(&self, pt: usize, i: usize) -> f64 {
        self.values[pt * self.dim + i]
    }
    pub fn grad(&self, pt: usize, i: usize) -> Point {
        self.grads[pt * self.dim + i]
    }
    pub fn vector(&self, pt: usize, i: usize) -> Point {
        self.vectors[pt * self.dim + i]
    }
    pub fn div(&self, pt: usize, i: usize) -> f64 {
        self.divs[pt * self.dim + i]
    }
}

/// A polynomial family of fixed degree on the reference triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisSet {
    family: Family,
    degree: usize,
    scalar: ScalarPk,
}

/// Builds the basis of `family` at degree `k`.
pub fn make_basis(family: Family, k: usize) -> Result<BasisSet, BasisError> {
    Ok(BasisSet { family, degree: k, scalar: ScalarPk::new(k)? })
}

impl BasisSet {
    pub fn family(&self) -> Family {
        self.family
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.family.dimension(self.degree)
    }

    pub fn scalar(&self) -> &ScalarPk {
        &self.scalar
    }

    /// Evaluation on the reference triangle.
    pub fn eval_reference(&self, points: &[Point]) -> BasisTable {
        self.tabulate(None, points)
    }

    /// Evaluation at physical points of the affine cell `map`.
    pub fn eval_mapped(&self, map: &AffineMap, points: &[Point]) -> BasisTable {
        let refs: Vec<Point> = points.iter().map(|&x| map.to_reference(x)).collect();
        self.tabulate(Some(map), &refs)
    }

    /// Evaluation of the physical basis at the images of reference points.
    pub fn eval_mapped_reference(&self, map: &AffineMap, ref_points: &[Point]) -> BasisTable {
        self.tabulate(Some(map), ref_points)
    }

    fn tabulate(&self, map: Option<&AffineMap>, refs: &[Point]) -> BasisTable {
        let ns = self.scalar.dim();
        let dim = self.dim();
        let mut t = BasisTable { dim, npts: refs.len(), ..Default::default() };
        let mut v = vec![0.0; ns];
        let mut g = vec![[0.0; 2]; ns];
        let scale = map.map_or(1.0, |m| 1.0 / m.det.sqrt());
        match self.family {
            Family::ScalarPk => {
                t.values.reserve(dim * refs.len());
                t.grads.reserve(dim * refs.len());
                for &xh in refs {
                    self.scalar.eval(xh, &mut v, Some(&mut g));
                    for i in 0..ns {
                        t.values.push(v[i] * scale);
                        let gi = match map {
                            Some(m) => {
                                let c = m.covariant(g[i]);
                                [c[0] * scale, c[1] * scale]
                            }
                            None => g[i],
                        };
                        t.grads.push(gi);
                    }
                }
            }
            Family::VectorPk => {
                for &xh in refs {
                    self.scalar.eval(xh, &mut v, Some(&mut g));
                    for d in 0..2 {
                        for i in 0..ns {
                            let val = v[i] * scale;
                            let gi = match map {
                                Some(m) => m.covariant(g[i]),
                                None => g[i],
                            };
                            let mut e = [0.0; 2];
                            e[d] = val;
                            t.vectors.push(e);
                            t.divs.push(gi[d] * scale);
                        }
                    }
                }
            }
            Family::BrokenRT => {
                let top = scalar_dim(self.degree) - (self.degree + 1);
                let det = map.map_or(1.0, |m| m.det);
                for &xh in refs {
                    self.scalar.eval(xh, &mut v, Some(&mut g));
                    let mut push = |vec_ref: Point, div_ref: f64| {
                        let vv = match map {
                            Some(m) => m.piola(vec_ref),
                            None => vec_ref,
                        };
                        t.vectors.push(vv);
                        t.divs.push(div_ref / det);
                    };
                    for d in 0..2 {
                        for i in 0..ns {
                            let mut e = [0.0; 2];
                            e[d] = v[i];
                            push(e, g[i][d]);
                        }
                    }
                    for i in top..ns {
                        let div = 2.0 * v[i] + xh[0] * g[i][0] + xh[1] * g[i][1];
                        push([xh[0] * v[i], xh[1] * v[i]], div);
                    }
                }
            }
        }
        t
    }
}

/// Legendre-orthonormal basis of `P_k(e)`: `√(2j+1) P_j(2s − 1) / √h_e`,
/// with `s ∈ [0, 1]` measured from the edge's first vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeBasis {
    pub degree: usize,
}

impl EdgeBasis {
    pub fn new(degree: usize) -> Self {
        EdgeBasis { degree }
    }

    pub fn dim(&self) -> usize {
        self.degree + 1
    }

    /// Values orthonormal on `[0, 1]` (reference segment).
    pub fn eval_reference(&self, s: f64, out: &mut [f64]) {
        let z = 2.0 * s - 1.0;
        let mut p0 = 1.0;
        let mut p1 = z;
        for j in 0..=self.degree {
            let pj = match j {
                0 => 1.0,
                1 => z,
                _ => {
                    let jf = j as f64;
                    let p2 = ((2.0 * jf - 1.0) * z * p1 - (jf - 1.0) * p0) / jf;
                    p0 = p1;
                    p1 = p2;
                    p2
                }
            };
            out[j] = (2.0 * j as f64 + 1.0).sqrt() * pj;
        }
    }

    /// Values orthonormal on a physical edge of length `h`.
    pub fn eval(&self, s: f64, h: f64, out: &mut [f64]) {
        self.eval_reference(s, out);
        let scale = 1.0 / h.sqrt();
        for v in out.iter_mut().take(self.dim()) {
            *v *= scale;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ref_gram(b: &BasisSet, deg: usize) -> DMatrix<f64> {
        let q = quad_triangle(deg).unwrap();
        let t = b.eval_reference(&q.points);
        let n = b.dim();
        DMatrix::from_fn(n, n, |i, j| {
            (0..q.len())
                .map(|p| {
                    q.weights[p]
                        * if b.family() == Family::ScalarPk {
                            t.value(p, i) * t.value(p, j)
                        } else {
                            let (a, c) = (t.vector(p, i), t.vector(p, j));
                            a[0] * c[0] + a[1] * c[1]
                        }
                })
                .sum()
        })
    }

    #[test]
    fn dimensions() {
        for k in 0..5 {
            for f in [Family::ScalarPk, Family::VectorPk, Family::BrokenRT] {
                assert_eq!(make_basis(f, k).unwrap().dim(), f.dimension(k));
            }
        }
        assert_eq!(make_basis(Family::BrokenRT, 0).unwrap().dim(), 3);
        assert_eq!(make_basis(Family::VectorPk, 1).unwrap().dim(), 6);
    }

    #[test]
    fn constant_is_sqrt2() {
        let b = make_basis(Family::ScalarPk, 0).unwrap();
        let t = b.eval_reference(&[[0.2, 0.3], [0.0, 0.0]]);
        assert!((t.value(0, 0) - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(t.grad(1, 0), [0.0, 0.0]);
    }

    #[test]
    fn scalar_orthonormal() {
        for k in 0..=6 {
            let b = make_basis(Family::ScalarPk, k).unwrap();
            let g = ref_gram(&b, 2 * k);
            let err = (g - DMatrix::identity(b.dim(), b.dim())).abs().max();
            assert!(err < 1e-12, "k={k} err={err:e}");
        }
    }

    #[test]
    fn hierarchical_gradients_by_finite_differences() {
        let b = make_basis(Family::ScalarPk, 3).unwrap();
        let x = [0.31, 0.22];
        let hstep = 1e-6;
        let t = b.eval_reference(&[x, [x[0] + hstep, x[1]], [x[0] - hstep, x[1]], [x[0], x[1] + hstep], [x[0], x[1] - hstep]]);
        for i in 0..b.dim() {
            let gx = (t.value(1, i) - t.value(2, i)) / (2.0 * hstep);
            let gy = (t.value(3, i) - t.value(4, i)) / (2.0 * hstep);
            assert!((gx - t.grad(0, i)[0]).abs() < 1e-6);
            assert!((gy - t.grad(0, i)[1]).abs() < 1e-6);
        }
    }

    #[test]
    fn rt_divergence_lies_in_pk() {
        for k in 0..=3 {
            let rt = make_basis(Family::BrokenRT, k).unwrap();
            let s = make_basis(Family::ScalarPk, k).unwrap();
            let q = quad_triangle(2 * k + 2).unwrap();
            let tr = rt.eval_reference(&q.points);
            let ts = s.eval_reference(&q.points);
            for i in 0..rt.dim() {
                // residual ‖div − Π_k div‖² with the orthonormal P_k basis
                let norm2: f64 = (0..q.len()).map(|p| q.weights[p] * tr.div(p, i).powi(2)).sum();
                let proj2: f64 = (0..s.dim())
                    .map(|j| (0..q.len()).map(|p| q.weights[p] * tr.div(p, i) * ts.value(p, j)).sum::<f64>())
                    .map(|c| c * c)
                    .sum();
                assert!((norm2 - proj2).abs() < 1e-12, "k={k} i={i}");
            }
        }
    }

    #[test]
    fn rt_spans_full_space() {
        // the Gram matrix of the RT basis must be nonsingular
        for k in 0..=2 {
            let b = make_basis(Family::BrokenRT, k).unwrap();
            let g = ref_gram(&b, 2 * k + 2);
            let e = g.symmetric_eigenvalues();
            assert!(e.min() > 1e-6, "k={k}");
        }
    }

    #[test]
    fn rt0_piola_divergence_constant() {
        let map = AffineMap::from_triangle(&[[0.3, 0.1], [1.4, 0.4], [0.2, 0.9]]).unwrap();
        let rt = make_basis(Family::BrokenRT, 0).unwrap();
        let q = quad_triangle(3).unwrap();
        let t = rt.eval_mapped_reference(&map, &q.points);
        // third function is √2 x̂, div = 2√2 on the reference triangle
        let d0 = 2.0 * 2f64.sqrt();
        let tr = rt.eval_reference(&[[0.1, 0.1]]);
        assert!((tr.div(0, 2) - d0).abs() < 1e-14);
        for p in 0..q.len() {
            assert!((t.div(p, 2) - d0 / map.det).abs() < 1e-14);
        }
        // divergence theorem on the physical cell for the mapped field
        let area = 0.5 * map.det;
        let int_div: f64 = (0..q.len()).map(|p| q.weights[p] * map.det * t.div(p, 2)).sum();
        assert!((int_div - d0 / map.det * area).abs() < 1e-14);
    }

    #[test]
    fn mapped_scalar_gradients_match_finite_differences() {
        let map = AffineMap::from_triangle(&[[0.3, 0.1], [1.4, 0.4], [0.2, 0.9]]).unwrap();
        let b = make_basis(Family::ScalarPk, 2).unwrap();
        let x = map.to_physical([0.3, 0.3]);
        let hs = 1e-6;
        let t = b.eval_mapped(&map, &[x, [x[0] + hs, x[1]], [x[0] - hs, x[1]], [x[0], x[1] + hs], [x[0], x[1] - hs]]);
        for i in 0..b.dim() {
            let gx = (t.value(1, i) - t.value(2, i)) / (2.0 * hs);
            let gy = (t.value(3, i) - t.value(4, i)) / (2.0 * hs);
            assert!((gx - t.grad(0, i)[0]).abs() < 1e-5);
            assert!((gy - t.grad(0, i)[1]).abs() < 1e-5);
        }
    }

    #[test]
    fn identity_map_is_bitwise() {
        let map = AffineMap::from_triangle(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        let pts = [[0.1, 0.2], [0.5, 0.25], [0.0, 1.0]];
        for f in [Family::ScalarPk, Family::VectorPk, Family::BrokenRT] {
            let b = make_basis(f, 2).unwrap();
            assert_eq!(b.eval_reference(&pts), b.eval_mapped(&map, &pts));
        }
    }

    #[test]
    fn degenerate_map() {
        assert!(AffineMap::from_triangle(&[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]).is_err());
        assert!(AffineMap::from_triangle(&[[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]]).is_err());
    }

    #[test]
    fn edge_basis_orthonormal() {
        for k in 0..6 {
            let eb = EdgeBasis::new(k);
            let q = quad_edge(2 * k).unwrap();
            let h = 0.37;
            let mut v = vec![0.0; k + 1];
            let mut g = DMatrix::<f64>::zeros(k + 1, k + 1);
            for (s, w) in q.points.iter().zip(&q.weights) {
                eb.eval(*s, h, &mut v);
                for i in 0..=k {
                    for j in 0..=k {
                        g[(i, j)] += w * h * v[i] * v[j];
                    }
                }
            }
            assert!((g - DMatrix::identity(k + 1, k + 1)).abs().max() < 1e-12);
        }
    }
}
