//! Gauss–Legendre rules on `[0, 1]` and collapsed (Duffy) rules on the
//! reference triangle `{x, y >= 0, x + y <= 1}`.

use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use super::BasisError;
use crate::mesh::Point;

/// Highest exactness degree offered on the reference triangle.
pub const MAX_TRIANGLE_DEGREE: usize = 40;
/// Highest exactness degree offered on segments.
pub const MAX_EDGE_DEGREE: usize = 60;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

/// Quadrature on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl QuadRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

impl EdgeRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// `n`-point Gauss–Legendre nodes and weights on `[-1, 1]`, by Newton
/// iteration on the three-term recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = alloc::vec![0.0; n];
    let mut w = alloc::vec![0.0; n];
    let pi = core::f64::consts::PI;
    for i in 0..n.div_ceil(2) {
        let mut z = (pi * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// `(P_n(z), P_n'(z))`.
fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p0 = 1.0;
    let mut p1 = z;
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * z * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Rule on `[0, 1]` exact for polynomials of degree `degree`.
pub fn quad_edge(degree: usize) -> Result<EdgeRule, BasisError> {
    if degree > MAX_EDGE_DEGREE {
        return Err(BasisError::UnsupportedQuadrature { degree, max: MAX_EDGE_DEGREE });
    }
    let n = degree / 2 + 1;
    let (x, w) = gauss_legendre(n);
    Ok(EdgeRule {
        points: x.iter().map(|t| 0.5 * (t + 1.0)).collect(),
        weights: w.iter().map(|t| 0.5 * t).collect(),
        degree,
    })
}

/// Rule on the reference triangle exact for polynomials of total degree `degree`.
///
/// Collapsed tensor rule `x = s (1 - t)`, `y = t` with Jacobian `1 - t`; the
/// extra factor raises the `t`-degree by one.
pub fn quad_triangle(degree: usize) -> Result<QuadRule, BasisError> {
    if degree > MAX_TRIANGLE_DEGREE {
        return Err(BasisError::UnsupportedQuadrature { degree, max: MAX_TRIANGLE_DEGREE });
    }
    let ns = degree / 2 + 1;
    let nt = (degree + 1) / 2 + 1;
    let (xs, ws) = gauss_legendre(ns);
    let (xt, wt) = gauss_legendre(nt);
    let mut points = Vec::with_capacity(ns * nt);
    let mut weights = Vec::with_capacity(ns * nt);
    for (ti, &t) in xt.iter().enumerate() {
        let t = 0.5 * (t + 1.0);
        for (si, &s) in xs.iter().enumerate() {
            let s = 0.5 * (s + 1.0);
            points.push([s * (1.0 - t), t]);
            weights.push(0.25 * ws[si] * wt[ti] * (1.0 - t));
        }
    }
    Ok(QuadRule { points, weights, degree })
}
