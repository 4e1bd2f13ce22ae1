//! Conforming reference solvers, written with their own element loops:
//! continuous `P1`/`P2` Lagrange for the primal method and `RT0 × P0` for
//! the mixed method.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use super::errors::project_cellwise;
use super::VerifyError;
use crate::assembly::{inverse_coefficient, ProblemData, SolutionFields};
use crate::linalg::{solve_direct, Triplets};
use crate::mesh::{EdgeTag, Mesh2D, Point};
use crate::polybasis::{quad_edge, quad_triangle, AffineMap};
use crate::spaces::{FluxFamily, Spaces};

/// Quadrature exactness of the reference solvers.
const QUAD: usize = 12;

/// Solution of the primal method: `u^c ∈ V_h^c` (continuous, `u^c = g_D` at
/// the Dirichlet nodes) and `p^c ∈ Q_h` with `(c p^c, q) + (∇u^c, q) = 0`.
#[derive(Debug, Clone)]
pub struct PrimalReference {
    pub degree: usize,
    /// Nodal values: vertices, then (for `P2`) edge midpoints.
    pub nodal: Vec<f64>,
    /// `p^c` and `u^c` in the broken bases of the given spaces (edge fields zero).
    pub fields: SolutionFields,
}

/// Lagrange shape functions on the reference triangle; nodes are the three
/// vertices, then the midpoints of the local edges (0,1), (1,2), (2,0).
fn lagrange(degree: usize, x: Point) -> (Vec<f64>, Vec<Point>) {
    let l = [1.0 - x[0] - x[1], x[0], x[1]];
    let dl = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];
    match degree {
        1 => (l.to_vec(), dl.to_vec()),
        _ => {
            let mut v = Vec::with_capacity(6);
            let mut g = Vec::with_capacity(6);
            for i in 0..3 {
                v.push(l[i] * (2.0 * l[i] - 1.0));
                let s = 4.0 * l[i] - 1.0;
                g.push([s * dl[i][0], s * dl[i][1]]);
            }
            for (i, j) in [(0, 1), (1, 2), (2, 0)] {
                v.push(4.0 * l[i] * l[j]);
                g.push([4.0 * (dl[i][0] * l[j] + l[i] * dl[j][0]), 4.0 * (dl[i][1] * l[j] + l[i] * dl[j][1])]);
            }
            (v, g)
        }
    }
}

fn covariant(map: &AffineMap, g: Point) -> Point {
    [map.inv[0][0] * g[0] + map.inv[1][0] * g[1], map.inv[0][1] * g[0] + map.inv[1][1] * g[1]]
}

/// Global edge joining vertex ids `a`, `b` of `cell`.
fn edge_between(mesh: &Mesh2D, cell: usize, a: usize, b: usize) -> usize {
    mesh.cell_edges(cell)
        .into_iter()
        .find(|&e| {
            let v = mesh.edge(e).vertices;
            (v[0] == a && v[1] == b) || (v[0] == b && v[1] == a)
        })
        .expect("cell edges join its vertices")
}

/// Global node numbers of a cell's local Lagrange nodes.
fn cell_nodes(mesh: &Mesh2D, cell: usize, degree: usize) -> Vec<usize> {
    let v = mesh.cells()[cell];
    let nv = mesh.vertices().len();
    let mut nodes = v.to_vec();
    if degree == 2 {
        for (i, j) in [(0, 1), (1, 2), (2, 0)] {
            nodes.push(nv + edge_between(mesh, cell, v[i], v[j]));
        }
    }
    nodes
}

fn node_point(mesh: &Mesh2D, node: usize) -> Point {
    let nv = mesh.vertices().len();
    if node < nv {
        mesh.vertices()[node]
    } else {
        mesh.edge_midpoint(node - nv)
    }
}

/// Solves the primal method with `P_degree` Lagrange elements and the flux
/// space of `spaces`; `G_p = 0`, `F_p(v) = −(f, v) + ⟨g_N, v⟩_{Γ_N}`.
pub fn conforming_primal_solve(
    mesh: &Mesh2D,
    spaces: &Spaces,
    data: &dyn ProblemData,
    degree: usize,
) -> Result<PrimalReference, VerifyError> {
    if !(1..=2).contains(&degree) || degree > spaces.spec.k_u {
        return Err(VerifyError::UnsupportedDegree(degree));
    }
    let nv = mesh.vertices().len();
    let nn = if degree == 2 { nv + mesh.num_edges() } else { nv };
    let rule = quad_triangle(QUAD)?;
    let nq = spaces.q_basis.dim();
    let mut k = Triplets::new(nn, nn);
    let mut f = vec![0.0; nn];
    // per cell: M_c^{-1} G for the flux recovery
    let mut recover: Vec<DMatrix<f64>> = Vec::with_capacity(mesh.num_cells());
    for c in 0..mesh.num_cells() {
        let map = AffineMap::from_triangle(&mesh.cell_vertices(c))?;
        let nodes = cell_nodes(mesh, c, degree);
        let nl = nodes.len();
        let tq = spaces.q_basis.eval_mapped_reference(&map, &rule.points);
        let mut mc = DMatrix::<f64>::zeros(nq, nq);
        let mut g = DMatrix::<f64>::zeros(nq, nl);
        for (pt, (&xh, &wr)) in rule.points.iter().zip(&rule.weights).enumerate() {
            let w = wr * map.det;
            let x = map.to_physical(xh);
            let cm = inverse_coefficient(data.alpha(x), x)?;
            let (phi, dphi) = lagrange(degree, xh);
            let grads: Vec<Point> = dphi.iter().map(|&d| covariant(&map, d)).collect();
            for i in 0..nq {
                let qi = tq.vector(pt, i);
                for j in 0..nq {
                    let qj = tq.vector(pt, j);
                    let cq = [cm[0][0] * qj[0] + cm[0][1] * qj[1], cm[1][0] * qj[0] + cm[1][1] * qj[1]];
                    mc[(i, j)] += w * (qi[0] * cq[0] + qi[1] * cq[1]);
                }
                for (j, gj) in grads.iter().enumerate() {
                    g[(i, j)] += w * (qi[0] * gj[0] + qi[1] * gj[1]);
                }
            }
            let fx = data.source(x);
            for (i, &n) in nodes.iter().enumerate() {
                f[n] += w * fx * phi[i];
            }
        }
        let r = mc.cholesky().ok_or(VerifyError::SingularLocalMass(c))?.solve(&g);
        let kl = g.transpose() * &r;
        for (i, &a) in nodes.iter().enumerate() {
            for (j, &b) in nodes.iter().enumerate() {
                k.push(a, b, kl[(i, j)]);
            }
        }
        recover.push(r);
    }
    let erule = quad_edge(QUAD)?;
    let mut fixed = vec![false; nn];
    for (e, info) in mesh.edges().iter().enumerate() {
        match info.tag {
            EdgeTag::Dirichlet => {
                fixed[info.vertices[0]] = true;
                fixed[info.vertices[1]] = true;
                if degree == 2 {
                    fixed[nv + e] = true;
                }
            }
            EdgeTag::Neumann => {
                let c = info.plus.cell;
                let map = AffineMap::from_triangle(&mesh.cell_vertices(c))?;
                let nodes = cell_nodes(mesh, c, degree);
                for (&s, &wr) in erule.points.iter().zip(&erule.weights) {
                    let x = mesh.edge_point(e, s);
                    let (phi, _) = lagrange(degree, map.to_reference(x));
                    let gn = data.neumann(x, info.normal);
                    for (i, &n) in nodes.iter().enumerate() {
                        f[n] -= wr * info.length * gn * phi[i];
                    }
                }
            }
            EdgeTag::Interior => {}
        }
    }
    let mut nodal = vec![0.0; nn];
    for n in 0..nn {
        if fixed[n] {
            nodal[n] = data.dirichlet(node_point(mesh, n));
        }
    }
    let km = k.to_csr();
    let free: Vec<usize> = (0..nn).filter(|&n| !fixed[n]).collect();
    let dir: Vec<usize> = (0..nn).filter(|&n| fixed[n]).collect();
    let ud: Vec<f64> = dir.iter().map(|&n| nodal[n]).collect();
    let lift = km.select(&free, &dir).mul_vec(&ud);
    let rhs: Vec<f64> = free.iter().zip(&lift).map(|(&n, l)| f[n] - l).collect();
    let sol = solve_direct(&km.select(&free, &free), &rhs)?.solution;
    for (&n, v) in free.iter().zip(sol) {
        nodal[n] = v;
    }

    let mut fields = project_cellwise(mesh, spaces, QUAD, |c, x| {
        let map = AffineMap::from_triangle(&mesh.cell_vertices(c)).expect("mesh cells are non-degenerate");
        let (phi, _) = lagrange(degree, map.to_reference(x));
        let nodes = cell_nodes(mesh, c, degree);
        (nodes.iter().zip(&phi).map(|(&n, p)| nodal[n] * p).sum(), [0.0, 0.0])
    })?;
    for (c, r) in recover.iter().enumerate() {
        let nodes = cell_nodes(mesh, c, degree);
        let uc = DVector::from_iterator(nodes.len(), nodes.iter().map(|&n| nodal[n]));
        let pc = -(r * uc);
        let off = spaces.p.offset(c);
        fields.p[off..off + nq].copy_from_slice(pc.as_slice());
    }
    Ok(PrimalReference { degree, nodal, fields })
}

/// Solution of the mixed method in `RT0 × P0`.
#[derive(Debug, Clone)]
pub struct MixedReference {
    /// Normal flux `p^c·n_e` per edge.
    pub flux: Vec<f64>,
    /// Cell values of `u^c`.
    pub u: Vec<f64>,
    /// Cellwise `div p^c`.
    pub div: Vec<f64>,
    /// `p^c`, `u^c` in the broken bases of the given spaces.
    pub fields: SolutionFields,
}

/// `RT0` basis function of local edge `e` in `cell`, oriented by `n_e`:
/// `σ |e| / (2|K|) (x − x_opp)`.
struct Rt0Local {
    edges: [usize; 3],
    sign: [f64; 3],
    opp: [Point; 3],
    scale: [f64; 3],
}

impl Rt0Local {
    fn new(mesh: &Mesh2D, cell: usize) -> Self {
        let v = mesh.cells()[cell];
        let pts = mesh.cell_vertices(cell);
        let area = mesh.cell_area(cell);
        let mut edges = [0; 3];
        let mut sign = [0.0; 3];
        let mut opp = [[0.0; 2]; 3];
        let mut scale = [0.0; 3];
        for (l, (i, j, o)) in [(1, 2, 0), (2, 0, 1), (0, 1, 2)].into_iter().enumerate() {
            let e = edge_between(mesh, cell, v[i], v[j]);
            let info = mesh.edge(e);
            edges[l] = e;
            sign[l] = if info.plus.cell == cell { 1.0 } else { -1.0 };
            opp[l] = pts[o];
            scale[l] = info.length / (2.0 * area);
        }
        Rt0Local { edges, sign, opp, scale }
    }

    fn value(&self, l: usize, x: Point) -> Point {
        let s = self.sign[l] * self.scale[l];
        [s * (x[0] - self.opp[l][0]), s * (x[1] - self.opp[l][1])]
    }

    fn div(&self, l: usize) -> f64 {
        2.0 * self.sign[l] * self.scale[l]
    }
}

/// Solves the mixed method in conforming `RT0 × P0` with
/// `G_m(q) = −⟨g_D, q·n⟩_{Γ_D}`, `F_m(v) = −(f, v)` and `p·n = g_N` imposed.
pub fn conforming_mixed_solve(mesh: &Mesh2D, spaces: &Spaces, data: &dyn ProblemData) -> Result<MixedReference, VerifyError> {
    if spaces.spec.q_family != FluxFamily::BrokenRT || spaces.spec.k_p != 0 || spaces.spec.k_u != 0 {
        return Err(VerifyError::UnsupportedReference("the mixed reference is RT0 x P0"));
    }
    let ne = mesh.num_edges();
    let nc = mesh.num_cells();
    let n = ne + nc;
    let rule = quad_triangle(QUAD)?;
    let erule = quad_edge(QUAD)?;
    let mut t = Triplets::new(n, n);
    let mut rhs = vec![0.0; n];
    let locals: Vec<Rt0Local> = (0..nc).map(|c| Rt0Local::new(mesh, c)).collect();
    for (c, loc) in locals.iter().enumerate() {
        let map = AffineMap::from_triangle(&mesh.cell_vertices(c))?;
        let mut a = [[0.0; 3]; 3];
        for (&xh, &wr) in rule.points.iter().zip(&rule.weights) {
            let w = wr * map.det;
            let x = map.to_physical(xh);
            let cm = inverse_coefficient(data.alpha(x), x)?;
            for i in 0..3 {
                let pi = loc.value(i, x);
                for j in 0..3 {
                    let pj = loc.value(j, x);
                    let cp = [cm[0][0] * pj[0] + cm[0][1] * pj[1], cm[1][0] * pj[0] + cm[1][1] * pj[1]];
                    a[i][j] += w * (pi[0] * cp[0] + pi[1] * cp[1]);
                }
            }
            rhs[ne + c] -= w * data.source(x);
        }
        let area = mesh.cell_area(c);
        for i in 0..3 {
            for j in 0..3 {
                t.push(loc.edges[i], loc.edges[j], a[i][j]);
            }
            // −(u, div q) and −(div p, v) with v = 1 on the cell
            let b = -loc.div(i) * area;
            t.push(ne + c, loc.edges[i], b);
            t.push(loc.edges[i], ne + c, b);
        }
    }
    let mut flux = vec![0.0; ne];
    let mut fixed = vec![false; n];
    for (e, info) in mesh.edges().iter().enumerate() {
        match info.tag {
            EdgeTag::Dirichlet => {
                for (&s, &wr) in erule.points.iter().zip(&erule.weights) {
                    // q_e·n = 1 on e
                    rhs[e] -= wr * info.length * data.dirichlet(mesh.edge_point(e, s));
                }
            }
            EdgeTag::Neumann => {
                let mean: f64 = erule
                    .points
                    .iter()
                    .zip(&erule.weights)
                    .map(|(&s, &wr)| wr * data.neumann(mesh.edge_point(e, s), info.normal))
                    .sum();
                flux[e] = mean;
                fixed[e] = true;
            }
            EdgeTag::Interior => {}
        }
    }
    let m = t.to_csr();
    let free: Vec<usize> = (0..n).filter(|&i| !fixed[i]).collect();
    let fix: Vec<usize> = (0..n).filter(|&i| fixed[i]).collect();
    let vals: Vec<f64> = fix.iter().map(|&i| flux[i]).collect();
    let lift = m.select(&free, &fix).mul_vec(&vals);
    let r: Vec<f64> = free.iter().zip(&lift).map(|(&i, l)| rhs[i] - l).collect();
    let sol = solve_direct(&m.select(&free, &free), &r)?.solution;
    let mut u = vec![0.0; nc];
    for (&i, v) in free.iter().zip(sol) {
        if i < ne {
            flux[i] = v;
        } else {
            u[i - ne] = v;
        }
    }
    let div: Vec<f64> = locals.iter().map(|loc| (0..3).map(|l| loc.div(l) * flux[loc.edges[l]]).sum()).collect();
    let fields = project_cellwise(mesh, spaces, QUAD, |c, x| {
        let loc = &locals[c];
        let mut p = [0.0; 2];
        for l in 0..3 {
            let v = loc.value(l, x);
            p[0] += flux[loc.edges[l]] * v[0];
            p[1] += flux[loc.edges[l]] * v[1];
        }
        (u[c], p)
    })?;
    Ok(MixedReference { flux, u, div, fields })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::ZeroData;
    use crate::spaces::{build_spaces, SpaceSpec};
    use crate::verify::cases::{Boundary, CaseId, ExactSolution, ManufacturedCase};
    use crate::verify::errors::error_norms_at;
    use crate::assembly::Regime;

    fn primal_spaces(mesh: &Mesh2D, k: usize) -> Spaces {
        build_spaces(mesh, SpaceSpec::new(FluxFamily::VectorPk, k - 1, Some(k - 1), k, Some(k - 1))).unwrap()
    }

    #[test]
    fn p2_reproduces_quadratic() {
        for b in [Boundary::Dirichlet, Boundary::NeumannRightTop] {
            let case = ManufacturedCase::new(CaseId::C2, b);
            let m = case.mesh(3).unwrap();
            let s = primal_spaces(&m, 2);
            let r = conforming_primal_solve(&m, &s, &case, 2).unwrap();
            for (n, v) in r.nodal.iter().enumerate() {
                assert!((v - case.u(node_point(&m, n))).abs() < 1e-10);
            }
            let e = error_norms_at(&m, &s, &r.fields, &case, Regime::Grad, 1.0, 10).unwrap();
            assert!(e.p < 1e-10 && e.u < 1e-10, "{e:?}");
        }
    }

    #[test]
    fn p1_h1_rate_is_one() {
        let case = ManufacturedCase::new(CaseId::C1, Boundary::NeumannRightTop);
        let errs: Vec<f64> = [4, 8, 16]
            .iter()
            .map(|&n| {
                let m = case.mesh(n).unwrap();
                let s = primal_spaces(&m, 1);
                let r = conforming_primal_solve(&m, &s, &case, 1).unwrap();
                // broken gradient error; jumps of a continuous function vanish
                error_norms_at(&m, &s, &r.fields, &case, Regime::Grad, 1.0, 10).unwrap().p
            })
            .collect();
        let rate = (errs[1] / errs[2]).log2();
        assert!((rate - 1.0).abs() < 0.1, "{errs:?}");
    }

    #[test]
    fn zero_data_gives_zero() {
        let m = Mesh2D::structured_unit_square(2).unwrap();
        let s = primal_spaces(&m, 1);
        let r = conforming_primal_solve(&m, &s, &ZeroData, 1).unwrap();
        assert!(r.nodal.iter().all(|v| *v == 0.0));
        let s0 = build_spaces(&m, SpaceSpec::new(FluxFamily::BrokenRT, 0, Some(0), 0, Some(0))).unwrap();
        let r = conforming_mixed_solve(&m, &s0, &ZeroData).unwrap();
        assert!(r.flux.iter().chain(&r.u).all(|v| *v == 0.0));
    }

    #[test]
    fn rt0_commutes_and_converges() {
        let case = ManufacturedCase::new(CaseId::C1, Boundary::NeumannRightTop);
        let mut eu = Vec::new();
        let mut ep = Vec::new();
        for n in [4, 8, 16] {
            let m = case.mesh(n).unwrap();
            let s = build_spaces(&m, SpaceSpec::new(FluxFamily::BrokenRT, 0, Some(0), 0, Some(0))).unwrap();
            let r = conforming_mixed_solve(&m, &s, &case).unwrap();
            let rule = quad_triangle(QUAD).unwrap();
            for c in 0..m.num_cells() {
                let map = AffineMap::from_triangle(&m.cell_vertices(c)).unwrap();
                let mean: f64 = rule
                    .points
                    .iter()
                    .zip(&rule.weights)
                    .map(|(&xh, &w)| w * map.det * case.div_p(map.to_physical(xh)))
                    .sum::<f64>()
                    / m.cell_area(c);
                assert!((r.div[c] - mean).abs() < 1e-11 * (1.0 + mean.abs()));
            }
            // Dirichlet-free norms: V̌ jump terms only see Neumann edges, where p·n is exact in the mean
            let e = error_norms_at(&m, &s, &r.fields, &case, Regime::Div, 1e12, 10).unwrap();
            eu.push(e.u);
            ep.push(e.p);
        }
        for v in [&eu, &ep] {
            let rate = (v[1] / v[2]).log2();
            assert!(rate > 0.9, "{v:?}");
        }
    }
}
