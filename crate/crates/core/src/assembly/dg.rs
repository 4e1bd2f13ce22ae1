//! Averages and jumps on edges, and their evaluation at edge quadrature
//! points as sparse linear functionals of the global DOFs.
//!
//! Orientation: the plus cell is the one `n_e` leaves, so `n⁺ = n_e`,
//! `[v]_e = v⁺ − v⁻`, `{q}_e = ½(q⁺ + q⁻)·n_e` and `[q] = (q⁺ − q⁻)·n_e`.
//! Boundary edges follow the Dirichlet/Neumann rows of the definitions.

use alloc::vec::Vec;

use super::{AssemblyContext, AssemblyError};
use crate::mesh::{EdgeTag, Point};
use crate::polybasis::EdgeBasis;
use crate::spaces::FieldKind;

/// Traces of a scalar `v` and a vector `q` on one side of an edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SideValues {
    pub v: f64,
    pub q: Point,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DgTraces {
    /// `{v}`
    pub v_avg: f64,
    /// `⟦v⟧` (vector)
    pub v_jump_vec: Point,
    /// `[v]_e = ⟦v⟧·n_e`
    pub v_jump: f64,
    /// `{{q}}` (vector)
    pub q_avg_vec: Point,
    /// `{q}_e = {{q}}·n_e`
    pub q_avg: f64,
    /// `[q]`
    pub q_jump: f64,
}

fn dotp(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Averages and jumps on an edge with tag `tag` and fixed normal `n_e`.
pub fn dg_average_jump(
    tag: EdgeTag,
    n_e: Point,
    plus: SideValues,
    minus: Option<SideValues>,
) -> Result<DgTraces, AssemblyError> {
    match tag {
        EdgeTag::Interior => {
            let m = minus.ok_or(AssemblyError::MissingSide)?;
            let n_plus = n_e;
            let n_minus = [-n_e[0], -n_e[1]];
            let v_jump_vec = [
                plus.v * n_plus[0] + m.v * n_minus[0],
                plus.v * n_plus[1] + m.v * n_minus[1],
            ];
            let q_avg_vec = [0.5 * (plus.q[0] + m.q[0]), 0.5 * (plus.q[1] + m.q[1])];
            Ok(DgTraces {
                v_avg: 0.5 * (plus.v + m.v),
                v_jump_vec,
                v_jump: dotp(v_jump_vec, n_e),
                q_avg_vec,
                q_avg: dotp(q_avg_vec, n_e),
                q_jump: dotp(plus.q, n_plus) + dotp(m.q, n_minus),
            })
        }
        EdgeTag::Dirichlet => Ok(DgTraces {
            v_avg: plus.v,
            v_jump_vec: [plus.v * n_e[0], plus.v * n_e[1]],
            v_jump: plus.v,
            q_avg_vec: plus.q,
            q_avg: dotp(plus.q, n_e),
            q_jump: 0.0,
        }),
        EdgeTag::Neumann => Ok(DgTraces {
            v_avg: plus.v,
            v_jump_vec: [0.0, 0.0],
            v_jump: 0.0,
            q_avg_vec: plus.q,
            q_avg: dotp(plus.q, n_e),
            q_jump: dotp(plus.q, n_e),
        }),
    }
}

/// Linear coefficients of one side: with unit side data the operators give
/// the multipliers of that side's trace.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SideCoefficients {
    pub v_jump: f64,
    pub v_avg: f64,
    /// multiplies `q_s · n_e`
    pub q_avg: f64,
    /// multiplies `q_s · n_e`
    pub q_jump: f64,
}

pub(crate) fn side_coefficients(tag: EdgeTag, n_e: Point) -> [SideCoefficients; 2] {
    let one = SideValues { v: 1.0, q: n_e };
    let zero = SideValues { v: 0.0, q: [0.0, 0.0] };
    let interior = tag == EdgeTag::Interior;
    let get = |t: DgTraces| SideCoefficients { v_jump: t.v_jump, v_avg: t.v_avg, q_avg: t.q_avg, q_jump: t.q_jump };
    let plus = dg_average_jump(tag, n_e, one, interior.then_some(zero)).expect("minus side supplied");
    let minus = if interior {
        get(dg_average_jump(tag, n_e, zero, Some(one)).expect("minus side supplied"))
    } else {
        SideCoefficients { v_jump: 0.0, v_avg: 0.0, q_avg: 0.0, q_jump: 0.0 }
    };
    [get(plus), minus]
}

pub type SparseVec = Vec<(usize, f64)>;

/// Sparse trace functionals at one edge quadrature point, indexed by global
/// (four-field layout) DOFs.
#[derive(Debug, Clone, Default)]
pub struct EdgePoint {
    /// Physical quadrature weight (includes `h_e`).
    pub w: f64,
    pub x: Point,
    /// Edge parameter in `[0, 1]`.
    pub s: f64,
    pub jump_u: SparseVec,
    pub avg_u: SparseVec,
    pub avg_q: SparseVec,
    pub jump_q: SparseVec,
    pub pcheck: SparseVec,
    pub ucheck: SparseVec,
    /// Per-side scalar values and normal flux traces `q_s·n_e`, same order as `sides`.
    pub side_u: [SparseVec; 2],
    pub side_qn: [SparseVec; 2],
}

/// Quadrature data of one edge.
#[derive(Debug, Clone)]
pub struct EdgeData {
    pub edge: usize,
    pub tag: EdgeTag,
    pub h: f64,
    pub normal: Point,
    pub points: Vec<EdgePoint>,
}

impl AssemblyContext<'_> {
    /// Evaluates every trace functional at the quadrature points of edge `e`.
    pub fn edge_data(&self, e: usize) -> EdgeData {
        let mesh = self.mesh;
        let sp = self.spaces;
        let info = mesh.edge(e);
        let coef = side_coefficients(info.tag, info.normal);
        let lay = &self.layout;
        let off_p = lay.start(FieldKind::P);
        let off_u = lay.start(FieldKind::U);
        let off_pc = lay.start(FieldKind::Pcheck);
        let off_uc = lay.start(FieldKind::Ucheck);
        let sides: Vec<_> = info.sides().collect();
        let nu = sp.u_basis.dim();
        let nq = sp.q_basis.dim();
        let pc_deg = sp.spec.k_pcheck.filter(|_| sp.pcheck.count(e) > 0);
        let uc_deg = sp.spec.k_ucheck.filter(|_| sp.ucheck.count(e) > 0);
        let mut psi_p = alloc::vec![0.0; pc_deg.map_or(0, |k| k + 1)];
        let mut psi_u = alloc::vec![0.0; uc_deg.map_or(0, |k| k + 1)];

        let mut points = Vec::with_capacity(self.edge_rule.len());
        for (&s, &wr) in self.edge_rule.points.iter().zip(&self.edge_rule.weights) {
            let x = mesh.edge_point(e, s);
            let mut pt = EdgePoint { w: wr * info.length, x, s, ..Default::default() };
            for (si, side) in sides.iter().enumerate() {
                let map = &self.maps[side.cell];
                let xh = map.to_reference(x);
                let tu = sp.u_basis.eval_mapped_reference(map, &[xh]);
                let tq = sp.q_basis.eval_mapped_reference(map, &[xh]);
                let c = coef[si];
                let ubase = off_u + sp.u.offset(side.cell);
                for i in 0..nu {
                    let v = tu.value(0, i);
                    pt.side_u[si].push((ubase + i, v));
                    if c.v_jump != 0.0 {
                        pt.jump_u.push((ubase + i, c.v_jump * v));
                    }
                    if c.v_avg != 0.0 {
                        pt.avg_u.push((ubase + i, c.v_avg * v));
                    }
                }
                let qbase = off_p + sp.p.offset(side.cell);
                for i in 0..nq {
                    let qn = dotp(tq.vector(0, i), info.normal);
                    pt.side_qn[si].push((qbase + i, qn));
                    if c.q_avg != 0.0 {
                        pt.avg_q.push((qbase + i, c.q_avg * qn));
                    }
                    if c.q_jump != 0.0 {
                        pt.jump_q.push((qbase + i, c.q_jump * qn));
                    }
                }
            }
            if let Some(k) = pc_deg {
                EdgeBasis::new(k).eval(s, info.length, &mut psi_p);
                let base = off_pc + sp.pcheck.offset(e);
                pt.pcheck.extend(psi_p.iter().enumerate().map(|(j, &v)| (base + j, v)));
            }
            if let Some(k) = uc_deg {
                EdgeBasis::new(k).eval(s, info.length, &mut psi_u);
                let base = off_uc + sp.ucheck.offset(e);
                pt.ucheck.extend(psi_u.iter().enumerate().map(|(j, &v)| (base + j, v)));
            }
            points.push(pt);
        }
        EdgeData { edge: e, tag: info.tag, h: info.length, normal: info.normal, points }
    }
}

/// Moments `∫_e a ψ_j` of a trace functional against an edge basis given as
/// the `target` functional at the same points (`pt.pcheck` or `pt.ucheck`).
/// Returns one sparse vector per target DOF (merged and sorted).
pub fn moments<'p, A, T>(points: &'p [EdgePoint], a: A, target: T) -> Vec<(usize, SparseVec)>
where
    A: Fn(&'p EdgePoint) -> &'p SparseVec,
    T: Fn(&'p EdgePoint) -> &'p SparseVec,
{
    let Some(first) = points.first() else { return Vec::new() };
    let mut out: Vec<(usize, SparseVec)> = target(first).iter().map(|&(j, _)| (j, Vec::new())).collect();
    for pt in points {
        for (slot, &(_, psi)) in out.iter_mut().zip(target(pt)) {
            for &(i, v) in a(pt) {
                slot.1.push((i, pt.w * psi * v));
            }
        }
    }
    for (_, v) in out.iter_mut() {
        merge(v);
    }
    out
}

/// Sorts by index and sums duplicates.
pub fn merge(v: &mut SparseVec) {
    v.sort_unstable_by_key(|e| e.0);
    let mut w: usize = 0;
    for r in 0..v.len() {
        if w > 0 && v[w - 1].0 == v[r].0 {
            v[w - 1].1 += v[r].1;
        } else {
            v[w] = v[r];
            w += 1;
        }
    }
    v.truncate(w);
}

#[cfg(test)]
mod tests {
    use super::*;

    const N: Point = [0.6, 0.8];

    #[test]
    fn continuous_values_have_no_jump() {
        let s = SideValues { v: 3.0, q: [1.0, 2.0] };
        let t = dg_average_jump(EdgeTag::Interior, N, s, Some(s)).unwrap();
        assert_eq!(t.v_avg, 3.0);
        assert_eq!(t.v_jump, 0.0);
        assert!(t.q_jump.abs() < 1e-15);
        assert!((t.q_avg - (0.6 + 1.6)).abs() < 1e-15);
    }

    #[test]
    fn neumann_rows() {
        // q·n = 5 on a Neumann edge
        let q = [5.0 * N[0], 5.0 * N[1]];
        let t = dg_average_jump(EdgeTag::Neumann, N, SideValues { v: 2.0, q }, None).unwrap();
        assert!((t.q_jump - 5.0).abs() < 1e-14);
        assert!((t.q_avg - 5.0).abs() < 1e-14);
        assert_eq!(t.v_jump, 0.0);
        assert_eq!(t.v_avg, 2.0);
    }

    #[test]
    fn dirichlet_rows() {
        let t = dg_average_jump(EdgeTag::Dirichlet, N, SideValues { v: 2.0, q: [1.0, 0.0] }, None).unwrap();
        assert_eq!(t.v_jump, 2.0);
        assert_eq!(t.q_jump, 0.0);
        assert!((t.q_avg - 0.6).abs() < 1e-15);
    }

    #[test]
    fn plus_minus_sign() {
        // n⁺ = n_e: v⁺ = 1, v⁻ = 0 gives [v]_e = +1
        let t = dg_average_jump(
            EdgeTag::Interior,
            N,
            SideValues { v: 1.0, q: [0.0, 0.0] },
            Some(SideValues { v: 0.0, q: [0.0, 0.0] }),
        )
        .unwrap();
        assert!((t.v_jump - 1.0).abs() < 1e-15);
    }

    #[test]
    fn vector_identity_pointwise() {
        // {{q}}·⟦v⟧ = {q}_e [v]_e
        for tag in [EdgeTag::Interior, EdgeTag::Dirichlet, EdgeTag::Neumann] {
            let p = SideValues { v: 0.7, q: [0.3, -1.1] };
            let m = SideValues { v: -1.9, q: [2.0, 0.4] };
            let t = dg_average_jump(tag, N, p, Some(m)).unwrap();
            let lhs = dotp(t.q_avg_vec, t.v_jump_vec);
            assert!((lhs - t.q_avg * t.v_jump).abs() < 1e-14);
        }
    }

    #[test]
    fn missing_side() {
        let s = SideValues { v: 1.0, q: [0.0, 0.0] };
        assert_eq!(dg_average_jump(EdgeTag::Interior, N, s, None), Err(AssemblyError::MissingSide));
    }

    #[test]
    fn merge_sums() {
        let mut v = alloc::vec![(3, 1.0), (1, 2.0), (3, 0.5)];
        merge(&mut v);
        assert_eq!(v, alloc::vec![(1, 2.0), (3, 1.5)]);
    }
}
