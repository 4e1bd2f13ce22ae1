//! Random broken polynomials, perturbed meshes and the two sides of the
//! DG trace identity, shared by the identity and acceptance tests.

#![allow(dead_code)]

use rand::Rng;
use xg_core::assembly::{assemble_b_div, assemble_b_grad, dg_average_jump, MethodConfig, Penalty, SideValues};
use xg_core::mesh::{neumann_right_top, BoundaryKind, Mesh2D, Point};
use xg_core::polybasis::{quad_edge, quad_triangle};
use xg_core::presets::classical_schemes;

/// `Σ c_ij x^i y^j` with `i + j ≤ k`.
#[derive(Debug, Clone)]
pub struct Poly {
    pub terms: Vec<(i32, i32, f64)>,
}

impl Poly {
    pub fn random(rng: &mut impl Rng, k: i32) -> Self {
        let mut terms = Vec::new();
        for i in 0..=k {
            for j in 0..=k - i {
                terms.push((i, j, rng.random_range(-1.0..1.0)));
            }
        }
        Poly { terms }
    }

    pub fn value(&self, x: Point) -> f64 {
        self.terms.iter().map(|&(i, j, c)| c * x[0].powi(i) * x[1].powi(j)).sum()
    }

    pub fn grad(&self, x: Point) -> Point {
        let dx = self.terms.iter().filter(|t| t.0 > 0).map(|&(i, j, c)| c * i as f64 * x[0].powi(i - 1) * x[1].powi(j));
        let dy = self.terms.iter().filter(|t| t.1 > 0).map(|&(i, j, c)| c * j as f64 * x[0].powi(i) * x[1].powi(j - 1));
        [dx.sum(), dy.sum()]
    }
}

/// Broken scalar `v` and vector `q` of degree ≤ `k` on every cell.
pub struct Broken {
    pub v: Vec<Poly>,
    pub q: Vec<[Poly; 2]>,
}

impl Broken {
    pub fn random(rng: &mut impl Rng, cells: usize, k: i32) -> Self {
        let v = (0..cells).map(|_| Poly::random(rng, k)).collect();
        let q = (0..cells).map(|_| [Poly::random(rng, k), Poly::random(rng, k)]).collect();
        Broken { v, q }
    }

    fn side(&self, c: usize, x: Point) -> SideValues {
        SideValues { v: self.v[c].value(x), q: [self.q[c][0].value(x), self.q[c][1].value(x)] }
    }
}

/// Structured mesh with interior vertices moved by up to `jitter · h`.
pub fn perturbed_mesh(rng: &mut impl Rng, n: usize, jitter: f64) -> Mesh2D {
    let base = Mesh2D::structured_unit_square(n).unwrap();
    let h = 1.0 / n as f64;
    let vertices = base
        .vertices()
        .iter()
        .map(|&[x, y]| {
            let inner = |s: f64| s > 1e-12 && s < 1.0 - 1e-12;
            let (dx, dy) = (rng.random_range(-jitter..jitter) * h, rng.random_range(-jitter..jitter) * h);
            [if inner(x) { x + dx } else { x }, if inner(y) { y + dy } else { y }]
        })
        .collect();
    Mesh2D::from_triangles(vertices, base.cells().to_vec()).unwrap()
}

pub fn split(x: Point) -> BoundaryKind {
    neumann_right_top(x)
}

/// `Σ_K ∫_∂K v q·n_K`, `Σ_e ∫_e ([v]{q} + {v}[q])` and `Σ_K ∫_K (∇v·q + v div q)`.
pub fn trace_sides(mesh: &Mesh2D, f: &Broken, deg: usize) -> (f64, f64, f64) {
    let er = quad_edge(2 * deg).unwrap();
    let tr = quad_triangle(2 * deg).unwrap();
    let mut by_cell = 0.0;
    for c in 0..mesh.num_cells() {
        for (local, &e) in mesh.cell_edges(c).iter().enumerate() {
            let info = mesh.edge(e);
            let n = mesh.outward_normal(c, local);
            for (&s, &w) in er.points.iter().zip(&er.weights) {
                let x = mesh.edge_point(e, s);
                let sv = f.side(c, x);
                by_cell += w * info.length * sv.v * (sv.q[0] * n[0] + sv.q[1] * n[1]);
            }
        }
    }
    let mut by_edge = 0.0;
    for (e, info) in mesh.edges().iter().enumerate() {
        for (&s, &w) in er.points.iter().zip(&er.weights) {
            let x = mesh.edge_point(e, s);
            let plus = f.side(info.plus.cell, x);
            let minus = info.minus.map(|m| f.side(m.cell, x));
            let t = dg_average_jump(info.tag, info.normal, plus, minus).unwrap();
            by_edge += w * info.length * (t.v_jump * t.q_avg + t.v_avg * t.q_jump);
        }
    }
    let mut green = 0.0;
    for c in 0..mesh.num_cells() {
        let [a, b, d] = mesh.cell_vertices(c);
        let area = mesh.cell_area(c);
        for (&[s, t], &w) in tr.points.iter().zip(&tr.weights) {
            let x = [a[0] + s * (b[0] - a[0]) + t * (d[0] - a[0]), a[1] + s * (b[1] - a[1]) + t * (d[1] - a[1])];
            let g = f.v[c].grad(x);
            let q = [f.q[c][0].value(x), f.q[c][1].value(x)];
            let div = f.q[c][0].grad(x)[0] + f.q[c][1].grad(x)[1];
            green += 2.0 * area * w * (g[0] * q[0] + g[1] * q[1] + f.v[c].value(x) * div);
        }
    }
    (by_cell, by_edge, green)
}

/// Relative defect `‖B_grad − B_div‖_max / ‖B_grad‖_max` for a classical-scheme row.
pub fn b_identity_defect(mesh: &Mesh2D, k: usize, which: usize) -> f64 {
    let preset = &classical_schemes(k)[which];
    let spaces = xg_core::spaces::build_spaces(mesh, preset.spec).unwrap();
    let config = MethodConfig::new(preset.spec, Penalty::grad(1.0));
    let bg = assemble_b_grad(mesh, &spaces, &config).unwrap();
    let bd = assemble_b_div(mesh, &spaces, &config).unwrap();
    let scale = bg.max_abs().max(f64::MIN_POSITIVE);
    bg.add_scaled(&bd, -1.0).max_abs() / scale
}

/// Worst relative defect of the trace identity (and Green's formula) over
/// `trials` random broken polynomials of degree `trial mod 4`.
pub fn trace_identity_worst(rng: &mut impl Rng, trials: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for trial in 0..trials {
        let k = trial % 4;
        let n = 1 + trial % 3;
        let mesh = perturbed_mesh(rng, n, 0.2).tag_boundary(split).unwrap();
        let f = Broken::random(rng, mesh.num_cells(), k as i32);
        let (lhs, rhs, green) = trace_sides(&mesh, &f, k);
        let scale = lhs.abs().max(1.0);
        worst = worst.max((lhs - rhs).abs() / scale).max((lhs - green).abs() / scale);
    }
    worst
}
