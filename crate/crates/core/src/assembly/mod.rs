//! Assembly of the bilinear forms `a`, `b`, `c`, the right-hand side and the
//! symmetric block system `[[A, Bᵀ], [B, −C]]` over `[P | P̌ | U | Ǔ]`.
//!
//! * `a(p̃, q̃) = (c p, q) + ⟨τ⁻¹ p̌, q̌⟩`
//! * `c(ũ, ṽ) = ⟨η⁻¹ ǔ, v̌⟩`
//! * `b(q̃, ũ) = (∇_h u, q) − ⟨[u]_e, {q}_e⟩ + ⟨ǔ, [q]⟩ − ⟨[u]_e, q̌⟩`
//!   `= −(u, div_h q) + ⟨{u}, [q]⟩ + ⟨ǔ, [q]⟩ − ⟨[u]_e, q̌⟩`
//!
//! The right-hand side is `−⟨g_D, q·n + q̌⟩_{Γ_D}` for the flux rows and
//! `−(f, v) + ⟨g_N, v + v̌⟩_{Γ_N}` for the scalar rows.

pub mod config;
pub mod dg;
pub mod fields;
pub mod norms;

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

pub use config::{Elimination, MethodConfig, Penalty, Regime};
pub use dg::{dg_average_jump, DgTraces, EdgeData, EdgePoint, SideValues};
pub use fields::SolutionFields;
pub use norms::{assemble_norm_grams, assemble_norm_grams_at, NormMatrices};

use crate::linalg::{CsrMatrix, Triplets};
use crate::mesh::{EdgeTag, Mesh2D, Point};
use crate::polybasis::{quad_edge, quad_triangle, AffineMap, BasisError, BasisTable, EdgeRule, QuadRule};
use crate::spaces::{FieldKind, Layout, Spaces};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AssemblyError {
    #[error("interior edge is missing its minus-side data")]
    MissingSide,
    #[error("{param} = {value:e} is not positive and finite on active edge {edge}")]
    NonPositivePenalty { param: &'static str, edge: usize, value: f64 },
    #[error("coefficient α is not symmetric positive definite at ({0}, {1})")]
    CoefficientNotSpd(f64, f64),
    #[error("norm regime {requested:?} does not match the penalty regime {configured:?}")]
    RegimeMismatch { requested: Regime, configured: Option<Regime> },
    #[error("spaces were built for a different configuration")]
    SpaceMismatch,
    #[error(transparent)]
    Basis(#[from] BasisError),
}

/// Coefficient and data of `−div(α ∇u) = f`, `u = g_D` on `Γ_D`,
/// `−α∇u·n = g_N` on `Γ_N` (so `p = −α∇u`, `c p + ∇u = 0`, `div p = f`).
pub trait ProblemData {
    fn alpha(&self, x: Point) -> [[f64; 2]; 2];
    fn source(&self, x: Point) -> f64;
    fn dirichlet(&self, x: Point) -> f64;
    /// Neumann datum `p·n` at `x` with outward normal `n`.
    fn neumann(&self, x: Point, n: Point) -> f64;
}

/// Problem data given by closures, `α = I`.
pub struct FnProblem<F, G, H> {
    pub f: F,
    pub g_d: G,
    pub g_n: H,
}

impl<F, G, H> ProblemData for FnProblem<F, G, H>
where
    F: Fn(Point) -> f64,
    G: Fn(Point) -> f64,
    H: Fn(Point, Point) -> f64,
{
    fn alpha(&self, _x: Point) -> [[f64; 2]; 2] {
        [[1.0, 0.0], [0.0, 1.0]]
    }
    fn source(&self, x: Point) -> f64 {
        (self.f)(x)
    }
    fn dirichlet(&self, x: Point) -> f64 {
        (self.g_d)(x)
    }
    fn neumann(&self, x: Point, n: Point) -> f64 {
        (self.g_n)(x, n)
    }
}

/// Zero data with `α = I`.
pub struct ZeroData;

impl ProblemData for ZeroData {
    fn alpha(&self, _x: Point) -> [[f64; 2]; 2] {
        [[1.0, 0.0], [0.0, 1.0]]
    }
    fn source(&self, _x: Point) -> f64 {
        0.0
    }
    fn dirichlet(&self, _x: Point) -> f64 {
        0.0
    }
    fn neumann(&self, _x: Point, _n: Point) -> f64 {
        0.0
    }
}

/// `c = α⁻¹`, after checking that `α` is SPD.
pub fn inverse_coefficient(alpha: [[f64; 2]; 2], x: Point) -> Result<[[f64; 2]; 2], AssemblyError> {
    let [[a, b], [b2, d]] = alpha;
    let det = a * d - b * b2;
    let sym = (b - b2).abs() <= 1e-12 * (a.abs() + d.abs());
    if !(a > 0.0 && det > 0.0 && sym) {
        return Err(AssemblyError::CoefficientNotSpd(x[0], x[1]));
    }
    Ok([[d / det, -b / det], [-b2 / det, a / det]])
}

/// Shared geometry and quadrature for one `(mesh, spaces)` pair.
pub struct AssemblyContext<'a> {
    pub mesh: &'a Mesh2D,
    pub spaces: &'a Spaces,
    pub layout: Layout,
    pub cell_rule: QuadRule,
    pub edge_rule: EdgeRule,
    pub maps: Vec<AffineMap>,
}

/// Basis tables of one cell at the cell quadrature points.
pub struct CellData {
    pub cell: usize,
    pub u: BasisTable,
    pub q: BasisTable,
    /// Physical weights.
    pub w: Vec<f64>,
    pub x: Vec<Point>,
}

impl<'a> AssemblyContext<'a> {
    pub fn new(mesh: &'a Mesh2D, spaces: &'a Spaces, quad_degree: usize) -> Result<Self, AssemblyError> {
        let maps = (0..mesh.num_cells())
            .map(|c| AffineMap::from_triangle(&mesh.cell_vertices(c)))
            .collect::<Result<Vec<_>, _>>()?;
        if spaces.u.num_entities() != mesh.num_cells() || spaces.pcheck.num_entities() != mesh.num_edges() {
            return Err(AssemblyError::SpaceMismatch);
        }
        Ok(AssemblyContext {
            mesh,
            spaces,
            layout: spaces.layout(),
            cell_rule: quad_triangle(quad_degree)?,
            edge_rule: quad_edge(quad_degree)?,
            maps,
        })
    }

    pub fn for_config(mesh: &'a Mesh2D, spaces: &'a Spaces, config: &MethodConfig) -> Result<Self, AssemblyError> {
        if spaces.spec != config.spaces {
            return Err(AssemblyError::SpaceMismatch);
        }
        Self::new(mesh, spaces, config.quad_degree())
    }

    pub fn cell_data(&self, c: usize) -> CellData {
        let map = &self.maps[c];
        let pts = &self.cell_rule.points;
        CellData {
            cell: c,
            u: self.spaces.u_basis.eval_mapped_reference(map, pts),
            q: self.spaces.q_basis.eval_mapped_reference(map, pts),
            w: self.cell_rule.weights.iter().map(|w| w * map.det).collect(),
            x: pts.iter().map(|&p| map.to_physical(p)).collect(),
        }
    }

    pub(crate) fn u_dof(&self, c: usize, i: usize) -> usize {
        self.layout.start(FieldKind::U) + self.spaces.u.offset(c) + i
    }

    pub(crate) fn p_dof(&self, c: usize, i: usize) -> usize {
        self.layout.start(FieldKind::P) + self.spaces.p.offset(c) + i
    }

    /// Checks τ > 0 on Q̌-active edges and η > 0 on V̌-active edges.
    pub fn check_penalty(&self, penalty: &Penalty) -> Result<(), AssemblyError> {
        for (e, info) in self.mesh.edges().iter().enumerate() {
            if self.spaces.pcheck.count(e) > 0 {
                let t = penalty.tau(e, info.length);
                if !(t > 0.0 && t.is_finite()) {
                    return Err(AssemblyError::NonPositivePenalty { param: "tau", edge: e, value: t });
                }
            }
            if self.spaces.ucheck.count(e) > 0 {
                let t = penalty.eta(e, info.length);
                if !(t > 0.0 && t.is_finite()) {
                    return Err(AssemblyError::NonPositivePenalty { param: "eta", edge: e, value: t });
                }
            }
        }
        Ok(())
    }

    /// Weighted flux mass `(c p, q)` in global layout.
    pub(crate) fn flux_mass(&self, data: &dyn ProblemData, t: &mut Triplets) -> Result<(), AssemblyError> {
        let nq = self.spaces.q_basis.dim();
        for c in 0..self.mesh.num_cells() {
            let cd = self.cell_data(c);
            for (k, (&w, &x)) in cd.w.iter().zip(&cd.x).enumerate() {
                let cm = inverse_coefficient(data.alpha(x), x)?;
                for j in 0..nq {
                    let qj = cd.q.vector(k, j);
                    let cq = [cm[0][0] * qj[0] + cm[0][1] * qj[1], cm[1][0] * qj[0] + cm[1][1] * qj[1]];
                    for i in 0..nq {
                        let qi = cd.q.vector(k, i);
                        t.push(self.p_dof(c, i), self.p_dof(c, j), w * (qi[0] * cq[0] + qi[1] * cq[1]));
                    }
                }
            }
        }
        Ok(())
    }

    /// `diag(value(e))` on the DOFs of an edge field, in global layout.
    pub(crate) fn edge_diagonal<F: Fn(usize, f64) -> f64>(&self, field: FieldKind, value: F, t: &mut Triplets) {
        let map = self.spaces.dofmap(field);
        let start = self.layout.start(field);
        for (e, info) in self.mesh.edges().iter().enumerate() {
            let v = value(e, info.length);
            for d in map.range(e) {
                t.push(start + d, start + d, v);
            }
        }
    }

    /// Coupling `b(q̃, ũ)` stored at `(v-row, q-col)` in global layout.
    fn coupling(&self, divergence_form: bool, t: &mut Triplets) {
        let nu = self.spaces.u_basis.dim();
        let nq = self.spaces.q_basis.dim();
        for c in 0..self.mesh.num_cells() {
            let cd = self.cell_data(c);
            for (k, &w) in cd.w.iter().enumerate() {
                for i in 0..nu {
                    for j in 0..nq {
                        let v = if divergence_form {
                            -cd.u.value(k, i) * cd.q.div(k, j)
                        } else {
                            let g = cd.u.grad(k, i);
                            let q = cd.q.vector(k, j);
                            g[0] * q[0] + g[1] * q[1]
                        };
                        t.push(self.u_dof(c, i), self.p_dof(c, j), w * v);
                    }
                }
            }
        }
        for e in 0..self.mesh.num_edges() {
            let ed = self.edge_data(e);
            for pt in &ed.points {
                if divergence_form {
                    t.push_outer(&pt.avg_u, &pt.jump_q, pt.w);
                } else {
                    t.push_outer(&pt.jump_u, &pt.avg_q, -pt.w);
                }
                t.push_outer(&pt.ucheck, &pt.jump_q, pt.w);
                t.push_outer(&pt.jump_u, &pt.pcheck, -pt.w);
            }
        }
    }
}

fn shifted(t: &Triplets, nrows: usize, ncols: usize, row_off: usize, col_off: usize) -> CsrMatrix {
    let mut out = Triplets::new(nrows, ncols);
    let m = t.to_csr();
    for (i, j, v) in m.iter() {
        out.push(i - row_off, j - col_off, v);
    }
    out.to_csr()
}

/// `A = (c p, q) ⊕ ⟨τ⁻¹ p̌, q̌⟩` on `P ∪ P̌`.
pub fn assemble_a(
    mesh: &Mesh2D,
    spaces: &Spaces,
    data: &dyn ProblemData,
    config: &MethodConfig,
) -> Result<CsrMatrix, AssemblyError> {
    let ctx = AssemblyContext::for_config(mesh, spaces, config)?;
    ctx.check_penalty(&config.penalty)?;
    let n = ctx.layout.flux_len();
    let mut t = Triplets::new(ctx.layout.total(), ctx.layout.total());
    ctx.flux_mass(data, &mut t)?;
    ctx.edge_diagonal(FieldKind::Pcheck, |e, h| 1.0 / config.penalty.tau(e, h), &mut t);
    Ok(shifted(&t, n, n, 0, 0))
}

/// `C = ⟨η⁻¹ ǔ, v̌⟩` on `Ǔ`.
pub fn assemble_c(mesh: &Mesh2D, spaces: &Spaces, config: &MethodConfig) -> Result<CsrMatrix, AssemblyError> {
    let ctx = AssemblyContext::for_config(mesh, spaces, config)?;
    ctx.check_penalty(&config.penalty)?;
    let start = ctx.layout.start(FieldKind::Ucheck);
    let n = ctx.layout.len(FieldKind::Ucheck);
    let mut t = Triplets::new(ctx.layout.total(), ctx.layout.total());
    ctx.edge_diagonal(FieldKind::Ucheck, |e, h| 1.0 / config.penalty.eta(e, h), &mut t);
    Ok(shifted(&t, n, n, start, start))
}

fn assemble_b(mesh: &Mesh2D, spaces: &Spaces, config: &MethodConfig, div: bool) -> Result<CsrMatrix, AssemblyError> {
    let ctx = AssemblyContext::for_config(mesh, spaces, config)?;
    let nf = ctx.layout.flux_len();
    let ns = ctx.layout.total() - nf;
    let mut t = Triplets::new(ctx.layout.total(), ctx.layout.total());
    ctx.coupling(div, &mut t);
    Ok(shifted(&t, ns, nf, nf, 0))
}

/// `B` from the gradient form of `b`: rows `U ∪ Ǔ`, columns `P ∪ P̌`.
pub fn assemble_b_grad(mesh: &Mesh2D, spaces: &Spaces, config: &MethodConfig) -> Result<CsrMatrix, AssemblyError> {
    assemble_b(mesh, spaces, config, false)
}

/// `B` from the divergence form of `b`; equal to [`assemble_b_grad`] up to rounding.
pub fn assemble_b_div(mesh: &Mesh2D, spaces: &Spaces, config: &MethodConfig) -> Result<CsrMatrix, AssemblyError> {
    assemble_b(mesh, spaces, config, true)
}

/// Right-hand side in global layout.
pub fn assemble_rhs(
    mesh: &Mesh2D,
    spaces: &Spaces,
    data: &dyn ProblemData,
    config: &MethodConfig,
) -> Result<Vec<f64>, AssemblyError> {
    let ctx = AssemblyContext::for_config(mesh, spaces, config)?;
    Ok(ctx.rhs(data))
}

impl AssemblyContext<'_> {
    pub(crate) fn rhs(&self, data: &dyn ProblemData) -> Vec<f64> {
        let mut b = vec![0.0; self.layout.total()];
        let nu = self.spaces.u_basis.dim();
        for c in 0..self.mesh.num_cells() {
            let cd = self.cell_data(c);
            for (k, (&w, &x)) in cd.w.iter().zip(&cd.x).enumerate() {
                let f = data.source(x);
                for i in 0..nu {
                    b[self.u_dof(c, i)] -= w * f * cd.u.value(k, i);
                }
            }
        }
        for e in 0..self.mesh.num_edges() {
            let tag = self.mesh.edge(e).tag;
            if tag == EdgeTag::Interior {
                continue;
            }
            let ed = self.edge_data(e);
            for pt in &ed.points {
                match tag {
                    EdgeTag::Dirichlet => {
                        let g = data.dirichlet(pt.x);
                        // on Γ_D, {q}_e = q·n
                        for &(i, v) in pt.avg_q.iter().chain(&pt.pcheck) {
                            b[i] -= pt.w * g * v;
                        }
                    }
                    EdgeTag::Neumann => {
                        let g = data.neumann(pt.x, ed.normal);
                        // on Γ_N, {v} = v
                        for &(i, v) in pt.avg_u.iter().chain(&pt.ucheck) {
                            b[i] += pt.w * g * v;
                        }
                    }
                    EdgeTag::Interior => {}
                }
            }
        }
        b
    }
}

/// The assembled four-field system.
#[derive(Debug, Clone)]
pub struct BlockSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub layout: Layout,
}

impl BlockSystem {
    pub fn dim(&self) -> usize {
        self.layout.total()
    }

    /// Block of rows `r` and columns `c`.
    pub fn block(&self, r: FieldKind, c: FieldKind) -> CsrMatrix {
        let rows: Vec<usize> = self.layout.range(r).collect();
        let cols: Vec<usize> = self.layout.range(c).collect();
        self.matrix.select(&rows, &cols)
    }
}

/// `[[A, Bᵀ], [B, −C]]` and the right-hand side.
pub fn assemble_system(
    mesh: &Mesh2D,
    spaces: &Spaces,
    data: &dyn ProblemData,
    config: &MethodConfig,
) -> Result<BlockSystem, AssemblyError> {
    let ctx = AssemblyContext::for_config(mesh, spaces, config)?;
    ctx.check_penalty(&config.penalty)?;
    let n = ctx.layout.total();
    let mut t = Triplets::new(n, n);
    ctx.flux_mass(data, &mut t)?;
    ctx.edge_diagonal(FieldKind::Pcheck, |e, h| 1.0 / config.penalty.tau(e, h), &mut t);
    ctx.edge_diagonal(FieldKind::Ucheck, |e, h| -1.0 / config.penalty.eta(e, h), &mut t);
    let mut b = Triplets::new(n, n);
    ctx.coupling(false, &mut b);
    let bm = b.to_csr();
    for (i, j, v) in bm.iter() {
        t.push(i, j, v);
        t.push(j, i, v);
    }
    Ok(BlockSystem { matrix: t.to_csr(), rhs: ctx.rhs(data), layout: ctx.layout })
}

/// Which edge trace to take moments of.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceOp {
    /// `[u]_e`
    JumpU,
    /// `{u}`
    AvgU,
    /// `{q}_e`
    AvgQ,
    /// `[q]`
    JumpQ,
}

/// Matrix of edge moments `∫_e op(φ_i) ψ_j` with rows the DOFs of the edge
/// field `target` and columns the DOFs of `U` (for `JumpU`/`AvgU`) or `P`,
/// both field-local. Applied to a coefficient vector it gives the L²
/// projection of the trace onto the target space.
pub fn trace_moments(ctx: &AssemblyContext<'_>, op: TraceOp, target: FieldKind) -> CsrMatrix {
    let (src, col_start) = match op {
        TraceOp::JumpU | TraceOp::AvgU => (FieldKind::U, ctx.layout.start(FieldKind::U)),
        TraceOp::AvgQ | TraceOp::JumpQ => (FieldKind::P, ctx.layout.start(FieldKind::P)),
    };
    let row_start = ctx.layout.start(target);
    let mut t = Triplets::new(ctx.layout.len(target), ctx.layout.len(src));
    for e in 0..ctx.mesh.num_edges() {
        if ctx.spaces.dofmap(target).count(e) == 0 {
            continue;
        }
        let ed = ctx.edge_data(e);
        let sel: fn(&EdgePoint) -> &dg::SparseVec = match op {
            TraceOp::JumpU => |pt| &pt.jump_u,
            TraceOp::AvgU => |pt| &pt.avg_u,
            TraceOp::AvgQ => |pt| &pt.avg_q,
            TraceOp::JumpQ => |pt| &pt.jump_q,
        };
        let tgt: fn(&EdgePoint) -> &dg::SparseVec =
            if target == FieldKind::Pcheck { |pt| &pt.pcheck } else { |pt| &pt.ucheck };
        let m = dg::moments(&ed.points, sel, tgt);
        for (row, vals) in m {
            for (col, v) in vals {
                t.push(row - row_start, col - col_start, v);
            }
        }
    }
    t.to_csr()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::neumann_right_top;
    use crate::spaces::{build_spaces, FluxFamily, SpaceSpec};

    fn cfg(spec: SpaceSpec, penalty: Penalty) -> MethodConfig {
        MethodConfig::new(spec, penalty)
    }

    #[test]
    fn single_cell_flux_mass_is_identity() {
        let m = Mesh2D::reference_triangle();
        let spec = SpaceSpec::new(FluxFamily::VectorPk, 1, None, 0, None);
        let s = build_spaces(&m, spec).unwrap();
        let a = assemble_a(&m, &s, &ZeroData, &cfg(spec, Penalty::grad(1.0))).unwrap();
        let d = a.to_dense() - nalgebra::DMatrix::identity(6, 6);
        assert!(d.abs().max() < 1e-13);
    }

    #[test]
    fn edge_mass_entries() {
        let m = Mesh2D::structured_unit_square(1).unwrap();
        let spec = SpaceSpec::new(FluxFamily::VectorPk, 0, Some(0), 0, Some(0));
        let s = build_spaces(&m, spec).unwrap();
        let c = cfg(spec, Penalty::Manual { tau: 2.0, eta: 1.0 / 3.0 });
        let a = assemble_a(&m, &s, &ZeroData, &c).unwrap();
        for d in s.p.total()..a.nrows() {
            assert!((a.get(d, d) - 0.5).abs() < 1e-15);
        }
        let cm = assemble_c(&m, &s, &c).unwrap();
        assert_eq!(cm.nrows(), 1);
        assert!((cm.get(0, 0) - 3.0).abs() < 1e-14);
        // trivial V̌: empty C
        let spec0 = SpaceSpec::new(FluxFamily::VectorPk, 0, Some(0), 0, None);
        let s0 = build_spaces(&m, spec0).unwrap();
        assert_eq!(assemble_c(&m, &s0, &cfg(spec0, Penalty::grad(1.0))).unwrap().nrows(), 0);
    }

    #[test]
    fn non_positive_penalty_rejected() {
        let m = Mesh2D::structured_unit_square(1).unwrap();
        let spec = SpaceSpec::new(FluxFamily::VectorPk, 0, Some(0), 0, Some(0));
        let s = build_spaces(&m, spec).unwrap();
        let c = cfg(spec, Penalty::Manual { tau: 0.0, eta: 1.0 });
        assert!(matches!(
            assemble_a(&m, &s, &ZeroData, &c),
            Err(AssemblyError::NonPositivePenalty { param: "tau", .. })
        ));
    }

    #[test]
    fn unit_source_rhs() {
        let m = Mesh2D::reference_triangle();
        let spec = SpaceSpec::new(FluxFamily::VectorPk, 0, Some(0), 0, Some(0));
        let s = build_spaces(&m, spec).unwrap();
        let data = FnProblem { f: |_| 1.0, g_d: |_| 0.0, g_n: |_, _| 0.0 };
        let b = assemble_rhs(&m, &s, &data, &cfg(spec, Penalty::grad(1.0))).unwrap();
        let u0 = s.layout().start(FieldKind::U);
        assert!((b[u0] + 2f64.sqrt() / 2.0).abs() < 1e-14);
        let zero = assemble_rhs(&m, &s, &ZeroData, &cfg(spec, Penalty::grad(1.0))).unwrap();
        assert!(zero.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn neumann_data_support() {
        let m = Mesh2D::structured_unit_square(2).unwrap().tag_boundary(neumann_right_top).unwrap();
        let spec = SpaceSpec::new(FluxFamily::VectorPk, 0, Some(0), 1, Some(0));
        let s = build_spaces(&m, spec).unwrap();
        let data = FnProblem { f: |_| 0.0, g_d: |_| 0.0, g_n: |_, _| 1.0 };
        let b = assemble_rhs(&m, &s, &data, &cfg(spec, Penalty::grad(1.0))).unwrap();
        let l = s.layout();
        for i in 0..l.total() {
            let f = l.field_of(i);
            if b[i] != 0.0 {
                assert!(matches!(f, FieldKind::U | FieldKind::Ucheck));
            }
        }
        for (e, info) in m.edges().iter().enumerate() {
            for d in s.ucheck.range(e) {
                let v = b[l.start(FieldKind::Ucheck) + d];
                assert_eq!(v != 0.0, info.tag == EdgeTag::Neumann);
            }
        }
    }

    #[test]
    fn single_cell_dirichlet_coupling() {
        // one cell, u ≡ φ_0 constant: volume term vanishes and the boundary
        // term is −⟨u, q·n⟩_∂K
        let m = Mesh2D::reference_triangle();
        let spec = SpaceSpec::new(FluxFamily::VectorPk, 0, None, 0, None);
        let s = build_spaces(&m, spec).unwrap();
        let b = assemble_b_grad(&m, &s, &cfg(spec, Penalty::grad(1.0))).unwrap();
        let u = 2f64.sqrt();
        let q = 2f64.sqrt();
        // ∫_∂K n_x = 0 for the x-directed constant field
        assert!(b.get(0, 0).abs() < 1e-14);
        assert!(b.get(0, 1).abs() < 1e-14);
        let _ = (u, q);
        let bd = assemble_b_div(&m, &s, &cfg(spec, Penalty::grad(1.0))).unwrap();
        assert!((b.to_dense() - bd.to_dense()).abs().max() < 1e-14);
    }

    #[test]
    fn system_is_symmetric() {
        let m = Mesh2D::structured_unit_square(2).unwrap().tag_boundary(neumann_right_top).unwrap();
        let spec = SpaceSpec::new(FluxFamily::BrokenRT, 1, Some(1), 1, Some(2));
        let s = build_spaces(&m, spec).unwrap();
        let sys = assemble_system(&m, &s, &ZeroData, &cfg(spec, Penalty::div(0.5))).unwrap();
        assert!(sys.matrix.asymmetry() <= 1e-12);
    }
}
