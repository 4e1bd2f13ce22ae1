//! Manufactured solutions of `−div(α∇u) = f` on the unit square.

use core::f64::consts::PI;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::assembly::ProblemData;
use crate::mesh::{neumann_right_top, BoundaryKind, Mesh2D, MeshError, Point};

/// Exact `(p, u)` with `p = −α∇u`.
pub trait ExactSolution {
    fn u(&self, x: Point) -> f64;
    fn grad_u(&self, x: Point) -> Point;
    fn p(&self, x: Point) -> Point;
    fn div_p(&self, x: Point) -> f64;
    fn alpha(&self, x: Point) -> [[f64; 2]; 2];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CaseId {
    /// `u = sin(πx) sin(πy)`, `α = I`.
    C1,
    /// `u = x² + xy`, `α = I`.
    C2,
    /// `u = sin(πx) sin(πy)`, `α = diag(1 + x², 1 + y²)`.
    C3,
    /// `u = cos(πx) cos(πy)`, `α = I`; `∂_n u = 0` on `x = 1` and `y = 1`.
    C4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Boundary {
    Dirichlet,
    /// Neumann on `x = 1` and `y = 1`.
    NeumannRightTop,
}

impl Boundary {
    fn kind(self, x: Point) -> BoundaryKind {
        match self {
            Boundary::Dirichlet => BoundaryKind::Dirichlet,
            Boundary::NeumannRightTop => neumann_right_top(x),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Smoothness {
    Analytic,
    /// Polynomial of the given degree.
    Polynomial(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ManufacturedCase {
    pub id: CaseId,
    pub boundary: Boundary,
}

impl ManufacturedCase {
    pub fn new(id: CaseId, boundary: Boundary) -> Self {
        ManufacturedCase { id, boundary }
    }

    pub fn name(&self) -> &'static str {
        match self.id {
            CaseId::C1 => "C1",
            CaseId::C2 => "C2",
            CaseId::C3 => "C3",
            CaseId::C4 => "C4",
        }
    }

    pub fn smoothness(&self) -> Smoothness {
        match self.id {
            CaseId::C2 => Smoothness::Polynomial(2),
            _ => Smoothness::Analytic,
        }
    }

    /// `n × n` structured mesh tagged with this case's boundary split.
    pub fn mesh(&self, n: usize) -> Result<Mesh2D, MeshError> {
        let b = self.boundary;
        Mesh2D::structured_unit_square(n)?.tag_boundary(move |x| b.kind(x))
    }

    fn hessian(&self, x: Point) -> [[f64; 2]; 2] {
        let [a, b] = x;
        match self.id {
            CaseId::C1 | CaseId::C3 => {
                let (sx, cx, sy, cy) = ((PI * a).sin(), (PI * a).cos(), (PI * b).sin(), (PI * b).cos());
                let p2 = PI * PI;
                [[-p2 * sx * sy, p2 * cx * cy], [p2 * cx * cy, -p2 * sx * sy]]
            }
            CaseId::C2 => [[2.0, 1.0], [1.0, 0.0]],
            CaseId::C4 => {
                let (sx, cx, sy, cy) = ((PI * a).sin(), (PI * a).cos(), (PI * b).sin(), (PI * b).cos());
                let p2 = PI * PI;
                [[-p2 * cx * cy, p2 * sx * sy], [p2 * sx * sy, -p2 * cx * cy]]
            }
        }
    }
}

/// The required cases C1–C3 plus C4, each with both boundary splits.
pub fn builtin_cases() -> alloc::vec::Vec<ManufacturedCase> {
    let mut v = alloc::vec::Vec::new();
    for id in [CaseId::C1, CaseId::C2, CaseId::C3, CaseId::C4] {
        for b in [Boundary::Dirichlet, Boundary::NeumannRightTop] {
            v.push(ManufacturedCase::new(id, b));
        }
    }
    v
}

impl ExactSolution for ManufacturedCase {
    fn u(&self, x: Point) -> f64 {
        let [a, b] = x;
        match self.id {
            CaseId::C1 | CaseId::C3 => (PI * a).sin() * (PI * b).sin(),
            CaseId::C2 => a * a + a * b,
            CaseId::C4 => (PI * a).cos() * (PI * b).cos(),
        }
    }

    fn grad_u(&self, x: Point) -> Point {
        let [a, b] = x;
        match self.id {
            CaseId::C1 | CaseId::C3 => {
                [PI * (PI * a).cos() * (PI * b).sin(), PI * (PI * a).sin() * (PI * b).cos()]
            }
            CaseId::C2 => [2.0 * a + b, a],
            CaseId::C4 => {
                [-PI * (PI * a).sin() * (PI * b).cos(), -PI * (PI * a).cos() * (PI * b).sin()]
            }
        }
    }

    fn p(&self, x: Point) -> Point {
        let g = self.grad_u(x);
        let al = ExactSolution::alpha(self, x);
        [-(al[0][0] * g[0] + al[0][1] * g[1]), -(al[1][0] * g[0] + al[1][1] * g[1])]
    }

    fn div_p(&self, x: Point) -> f64 {
        let g = self.grad_u(x);
        let h = self.hessian(x);
        match self.id {
            // −∂_x((1+x²) u_x) − ∂_y((1+y²) u_y)
            CaseId::C3 => {
                -(2.0 * x[0] * g[0] + (1.0 + x[0] * x[0]) * h[0][0] + 2.0 * x[1] * g[1]
                    + (1.0 + x[1] * x[1]) * h[1][1])
            }
            _ => -(h[0][0] + h[1][1]),
        }
    }

    fn alpha(&self, x: Point) -> [[f64; 2]; 2] {
        match self.id {
            CaseId::C3 => [[1.0 + x[0] * x[0], 0.0], [0.0, 1.0 + x[1] * x[1]]],
            _ => [[1.0, 0.0], [0.0, 1.0]],
        }
    }
}

impl ProblemData for ManufacturedCase {
    fn alpha(&self, x: Point) -> [[f64; 2]; 2] {
        ExactSolution::alpha(self, x)
    }
    /// `f = −div(α∇u) = div p`.
    fn source(&self, x: Point) -> f64 {
        self.div_p(x)
    }
    fn dirichlet(&self, x: Point) -> f64 {
        self.u(x)
    }
    fn neumann(&self, x: Point, n: Point) -> f64 {
        let p = self.p(x);
        p[0] * n[0] + p[1] * n[1]
    }
}

/// Keeps only the selected parts of another problem's data (α is kept).
pub struct DataPart<'a> {
    pub base: &'a dyn ProblemData,
    pub source: bool,
    pub dirichlet: bool,
    pub neumann: bool,
}

impl<'a> DataPart<'a> {
    pub fn source(base: &'a dyn ProblemData) -> Self {
        DataPart { base, source: true, dirichlet: false, neumann: false }
    }
    pub fn dirichlet(base: &'a dyn ProblemData) -> Self {
        DataPart { base, source: false, dirichlet: true, neumann: false }
    }
    pub fn neumann(base: &'a dyn ProblemData) -> Self {
        DataPart { base, source: false, dirichlet: false, neumann: true }
    }
}

impl ProblemData for DataPart<'_> {
    fn alpha(&self, x: Point) -> [[f64; 2]; 2] {
        self.base.alpha(x)
    }
    fn source(&self, x: Point) -> f64 {
        if self.source { self.base.source(x) } else { 0.0 }
    }
    fn dirichlet(&self, x: Point) -> f64 {
        if self.dirichlet { self.base.dirichlet(x) } else { 0.0 }
    }
    fn neumann(&self, x: Point, n: Point) -> f64 {
        if self.neumann { self.base.neumann(x, n) } else { 0.0 }
    }
}

/// `s ·` another exact solution.
pub struct Scaled<'a>(pub &'a dyn ExactSolution, pub f64);

impl ExactSolution for Scaled<'_> {
    fn u(&self, x: Point) -> f64 {
        self.1 * self.0.u(x)
    }
    fn grad_u(&self, x: Point) -> Point {
        let g = self.0.grad_u(x);
        [self.1 * g[0], self.1 * g[1]]
    }
    fn p(&self, x: Point) -> Point {
        let g = self.0.p(x);
        [self.1 * g[0], self.1 * g[1]]
    }
    fn div_p(&self, x: Point) -> f64 {
        self.1 * self.0.div_p(x)
    }
    fn alpha(&self, x: Point) -> [[f64; 2]; 2] {
        self.0.alpha(x)
    }
}

/// The zero solution with `α = I`.
pub struct ZeroSolution;

impl ExactSolution for ZeroSolution {
    fn u(&self, _: Point) -> f64 {
        0.0
    }
    fn grad_u(&self, _: Point) -> Point {
        [0.0, 0.0]
    }
    fn p(&self, _: Point) -> Point {
        [0.0, 0.0]
    }
    fn div_p(&self, _: Point) -> f64 {
        0.0
    }
    fn alpha(&self, _: Point) -> [[f64; 2]; 2] {
        [[1.0, 0.0], [0.0, 1.0]]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fd_grad(f: impl Fn(Point) -> f64, x: Point, h: f64) -> Point {
        [
            (f([x[0] + h, x[1]]) - f([x[0] - h, x[1]])) / (2.0 * h),
            (f([x[0], x[1] + h]) - f([x[0], x[1] - h])) / (2.0 * h),
        ]
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let h = 1e-5;
        for case in builtin_cases() {
            for _ in 0..20 {
                let x = [rng.random_range(0.05..0.95), rng.random_range(0.05..0.95)];
                let g = case.grad_u(x);
                let gf = fd_grad(|y| case.u(y), x, h);
                assert!((g[0] - gf[0]).abs() < 1e-6 && (g[1] - gf[1]).abs() < 1e-6, "{:?}", case.id);
                // div p by differencing the analytic flux
                let dpx = fd_grad(|y| case.p(y)[0], x, h)[0];
                let dpy = fd_grad(|y| case.p(y)[1], x, h)[1];
                assert!((case.div_p(x) - (dpx + dpy)).abs() < 1e-6, "{:?}", case.id);
            }
        }
    }

    #[test]
    fn c1_source_and_boundary() {
        let c = ManufacturedCase::new(CaseId::C1, Boundary::Dirichlet);
        let x = [0.3, 0.7];
        let expect = 2.0 * PI * PI * (PI * 0.3).sin() * (PI * 0.7).sin();
        assert!((c.source(x) - expect).abs() < 1e-12);
        for &b in &[[0.0, 0.4], [1.0, 0.2], [0.6, 0.0], [0.3, 1.0]] {
            assert!(c.dirichlet(b).abs() < 1e-15);
        }
    }

    #[test]
    fn c2_flux_and_source() {
        let c = ManufacturedCase::new(CaseId::C2, Boundary::Dirichlet);
        let x = [0.25, 0.5];
        assert_eq!(c.source(x), -2.0);
        assert_eq!(c.p(x), [-(2.0 * 0.25 + 0.5), -0.25]);
    }

    #[test]
    fn c4_has_no_flux_on_right_and_top() {
        let c = ManufacturedCase::new(CaseId::C4, Boundary::NeumannRightTop);
        for s in [0.1, 0.5, 0.9] {
            assert!(c.neumann([1.0, s], [1.0, 0.0]).abs() < 1e-14);
            assert!(c.neumann([s, 1.0], [0.0, 1.0]).abs() < 1e-14);
        }
    }
}
