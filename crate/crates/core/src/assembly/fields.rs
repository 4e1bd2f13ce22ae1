//! Discrete solution `(p_h, p̌_h, u_h, ǔ_h)` and its point/edge evaluators.

use alloc::vec::Vec;

use crate::mesh::{Mesh2D, Point};
use crate::polybasis::AffineMap;
use crate::spaces::{FieldKind, Layout, Spaces};

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionFields {
    pub p: Vec<f64>,
    pub pcheck: Vec<f64>,
    pub u: Vec<f64>,
    pub ucheck: Vec<f64>,
}

impl SolutionFields {
    /// Splits a vector in the global four-field layout.
    pub fn from_global(layout: &Layout, x: &[f64]) -> Self {
        let part = |f: FieldKind| x[layout.range(f)].to_vec();
        SolutionFields {
            p: part(FieldKind::P),
            pcheck: part(FieldKind::Pcheck),
            u: part(FieldKind::U),
            ucheck: part(FieldKind::Ucheck),
        }
    }

    pub fn zeros(spaces: &Spaces) -> Self {
        SolutionFields {
            p: alloc::vec![0.0; spaces.p.total()],
            pcheck: alloc::vec![0.0; spaces.pcheck.total()],
            u: alloc::vec![0.0; spaces.u.total()],
            ucheck: alloc::vec![0.0; spaces.ucheck.total()],
        }
    }

    pub fn to_global(&self) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.p.len() + self.pcheck.len() + self.u.len() + self.ucheck.len());
        x.extend_from_slice(&self.p);
        x.extend_from_slice(&self.pcheck);
        x.extend_from_slice(&self.u);
        x.extend_from_slice(&self.ucheck);
        x
    }

    pub fn field(&self, f: FieldKind) -> &[f64] {
        match f {
            FieldKind::P => &self.p,
            FieldKind::Pcheck => &self.pcheck,
            FieldKind::U => &self.u,
            FieldKind::Ucheck => &self.ucheck,
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        let m = |v: &Vec<f64>| v.iter().map(|x| s * x).collect();
        SolutionFields { p: m(&self.p), pcheck: m(&self.pcheck), u: m(&self.u), ucheck: m(&self.ucheck) }
    }

    /// `u_h(x)` and `∇u_h(x)` on `cell`.
    pub fn u_at(&self, mesh: &Mesh2D, spaces: &Spaces, cell: usize, x: Point) -> (f64, Point) {
        let map = cell_map(mesh, cell);
        let t = spaces.u_basis.eval_mapped(&map, &[x]);
        let off = spaces.u.offset(cell);
        let mut v = 0.0;
        let mut g = [0.0; 2];
        for i in 0..t.dim {
            let c = self.u[off + i];
            v += c * t.value(0, i);
            let gi = t.grad(0, i);
            g[0] += c * gi[0];
            g[1] += c * gi[1];
        }
        (v, g)
    }

    /// `p_h(x)` and `div p_h(x)` on `cell`.
    pub fn p_at(&self, mesh: &Mesh2D, spaces: &Spaces, cell: usize, x: Point) -> (Point, f64) {
        let map = cell_map(mesh, cell);
        let t = spaces.q_basis.eval_mapped(&map, &[x]);
        let off = spaces.p.offset(cell);
        let mut q = [0.0; 2];
        let mut d = 0.0;
        for i in 0..t.dim {
            let c = self.p[off + i];
            let v = t.vector(0, i);
            q[0] += c * v[0];
            q[1] += c * v[1];
            d += c * t.div(0, i);
        }
        (q, d)
    }

    pub fn pcheck_at(&self, mesh: &Mesh2D, spaces: &Spaces, e: usize, s: f64) -> f64 {
        spaces.projector(FieldKind::Pcheck).evaluate(mesh, &self.pcheck, e, s)
    }

    pub fn ucheck_at(&self, mesh: &Mesh2D, spaces: &Spaces, e: usize, s: f64) -> f64 {
        spaces.projector(FieldKind::Ucheck).evaluate(mesh, &self.ucheck, e, s)
    }

    /// `{u_h}` on edge `e` at parameter `s`.
    pub fn u_avg_at(&self, mesh: &Mesh2D, spaces: &Spaces, e: usize, s: f64) -> f64 {
        let info = mesh.edge(e);
        let x = mesh.edge_point(e, s);
        let vals: Vec<f64> = info.sides().map(|sd| self.u_at(mesh, spaces, sd.cell, x).0).collect();
        vals.iter().sum::<f64>() / vals.len() as f64
    }

    /// `{p_h}_e` on edge `e` at parameter `s`.
    pub fn p_avg_at(&self, mesh: &Mesh2D, spaces: &Spaces, e: usize, s: f64) -> f64 {
        let info = mesh.edge(e);
        let x = mesh.edge_point(e, s);
        let vals: Vec<f64> = info
            .sides()
            .map(|sd| {
                let q = self.p_at(mesh, spaces, sd.cell, x).0;
                q[0] * info.normal[0] + q[1] * info.normal[1]
            })
            .collect();
        vals.iter().sum::<f64>() / vals.len() as f64
    }

    /// Coefficients of `û_h = Q̌^u{u_h} + ǔ_h` in the `V̌_h` basis.
    pub fn uhat(&self, mesh: &Mesh2D, spaces: &Spaces) -> Vec<f64> {
        let proj = spaces.projector(FieldKind::Ucheck);
        let q = spaces.default_quad_degree();
        let avg = proj
            .project(mesh, q, |e, x| {
                let info = mesh.edge(e);
                let vals: Vec<f64> = info.sides().map(|sd| self.u_at(mesh, spaces, sd.cell, x).0).collect();
                vals.iter().sum::<f64>() / vals.len() as f64
            })
            .unwrap_or_default();
        avg.iter().zip(&self.ucheck).map(|(a, b)| a + b).collect()
    }

    /// Coefficients of `p̂_h = Q̌^p{p_h}_e + p̌_h` in the `Q̌_h` basis.
    pub fn phat(&self, mesh: &Mesh2D, spaces: &Spaces) -> Vec<f64> {
        let proj = spaces.projector(FieldKind::Pcheck);
        let q = spaces.default_quad_degree();
        let avg = proj
            .project(mesh, q, |e, x| {
                let info = mesh.edge(e);
                let vals: Vec<f64> = info
                    .sides()
                    .map(|sd| {
                        let p = self.p_at(mesh, spaces, sd.cell, x).0;
                        p[0] * info.normal[0] + p[1] * info.normal[1]
                    })
                    .collect();
                vals.iter().sum::<f64>() / vals.len() as f64
            })
            .unwrap_or_default();
        avg.iter().zip(&self.pcheck).map(|(a, b)| a + b).collect()
    }
}

fn cell_map(mesh: &Mesh2D, cell: usize) -> AffineMap {
    AffineMap::from_triangle(&mesh.cell_vertices(cell)).expect("mesh cells are non-degenerate")
}
