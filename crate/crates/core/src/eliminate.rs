//! Static eliminations of the four-field system.
//!
//! `p̌` and `ǔ` enter through diagonal edge-mass blocks (`τ⁻¹ I`, `−η⁻¹ I`
//! in the orthonormal edge basis) and couple only to `(p, u)`, so removing
//! either is an exact Schur complement on the matrix:
//!
//! * `p̌` gives the HDG-type three-field system in `(p, u, ǔ)`,
//! * `ǔ` gives the WG-type system in `(p, p̌, u)`,
//! * both give the two-field DG system in `(p, u)`.
//!
//! [`hybridize_uhat`] further changes variables to `û = Q̌^u{u} + ǔ`, after
//! which `(p, u)` decouple cell by cell and condense onto `û`.
//! [`assemble_wg_phat`] assembles the three-field `(p, p̂, u)` form directly.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::assembly::{
    dg, AssemblyContext, AssemblyError, BlockSystem, Elimination, MethodConfig, ProblemData,
};
use crate::conditions::{self, ConditionError};
use crate::linalg::{solve_direct, solve_direct_grouped, CsrMatrix, LinalgError, SolveReport, Triplets};
use crate::mesh::{EdgeTag, Mesh2D};
use crate::spaces::{FieldKind, Layout, Spaces};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EliminationError {
    #[error("block to eliminate is not diagonal")]
    NotDiagonal,
    #[error("zero pivot in the eliminated block at DOF {0}")]
    ZeroPivot(usize),
    #[error("(p, u) block is not cell-local after the change of variables (entry {value:e} couples cells {a} and {b})")]
    NotCellLocal { a: usize, b: usize, value: f64 },
    #[error("{0} has no hybridized form")]
    Unsupported(&'static str),
    #[error("recovery vector has length {found}, expected {expected}")]
    Length { expected: usize, found: usize },
    #[error(transparent)]
    Condition(#[from] ConditionError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Data to rebuild eliminated unknowns from the reduced solution.
#[derive(Debug, Clone)]
enum Recovery {
    /// `x_D = D⁻¹ (b_D − M_DR x_R)`.
    Schur { elim: Vec<usize>, dinv: Vec<f64>, m_dr: CsrMatrix, b_d: Vec<f64> },
    /// Local `(p, u)` solves from `û`, then the inner recovery.
    Hybrid(Box<HybridRecovery>),
    /// `p̌ = p̂ − Q̌^p{p}_e`, `ǔ = η Q̌^u[p] − η Q̌^u g_N`.
    Wg { to_pcheck: CsrMatrix, to_ucheck: CsrMatrix, ucheck_shift: Vec<f64> },
}

#[derive(Debug, Clone)]
struct HybridRecovery {
    /// The `p̌`-eliminated system over `(p, u, ǔ)`.
    inner: ReducedSystem,
    /// Per cell: local indices into `inner`, `K_c⁻¹`, `K_cH` (dense over `H` positions), `b_c`.
    cells: Vec<LocalCell>,
    /// Positions of `ǔ` in `inner` (equal to positions of `û`).
    h_pos: Vec<usize>,
    /// Positions of `u` in `inner` and the matrix `P` with `ǔ = û − P u`.
    u_pos: Vec<usize>,
    avg_moments: CsrMatrix,
}

#[derive(Debug, Clone)]
struct LocalCell {
    dofs: Vec<usize>,
    inv: DMatrix<f64>,
    k_ch: DMatrix<f64>,
    h_cols: Vec<usize>,
    b: DVector<f64>,
}

/// A reduced system and the recipe to expand its solution to all four fields.
#[derive(Debug, Clone)]
pub struct ReducedSystem {
    pub kind: Elimination,
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// Global (four-field layout) index of each reduced unknown; for the
    /// `û` and `p̂` unknowns this is the `ǔ` / `p̌` slot they replace.
    pub kept: Vec<usize>,
    /// Size of the four-field layout.
    pub full_dim: usize,
    recovery: Recovery,
}

impl ReducedSystem {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Expands a reduced solution to the four-field layout.
    pub fn recover(&self, y: &[f64]) -> Result<Vec<f64>, EliminationError> {
        if y.len() != self.dim() {
            return Err(EliminationError::Length { expected: self.dim(), found: y.len() });
        }
        match &self.recovery {
            Recovery::Schur { elim, dinv, m_dr, b_d } => {
                let mut x = vec![0.0; self.full_dim];
                for (&g, &v) in self.kept.iter().zip(y) {
                    x[g] = v;
                }
                let r = m_dr.mul_vec(y);
                for (k, &g) in elim.iter().enumerate() {
                    x[g] = dinv[k] * (b_d[k] - r[k]);
                }
                Ok(x)
            }
            Recovery::Hybrid(h) => {
                let mut z = vec![0.0; h.inner.dim()];
                for (&pos, &v) in h.h_pos.iter().zip(y) {
                    z[pos] = v;
                }
                for cell in &h.cells {
                    let uh = DVector::from_iterator(cell.h_cols.len(), cell.h_cols.iter().map(|&j| y[j]));
                    let xc = &cell.inv * (&cell.b - &cell.k_ch * uh);
                    for (k, &pos) in cell.dofs.iter().enumerate() {
                        z[pos] = xc[k];
                    }
                }
                // ǔ = û − P u
                let u: Vec<f64> = h.u_pos.iter().map(|&p| z[p]).collect();
                let pu = h.avg_moments.mul_vec(&u);
                for (k, &pos) in h.h_pos.iter().enumerate() {
                    z[pos] -= pu[k];
                }
                h.inner.recover(&z)
            }
            Recovery::Wg { to_pcheck, to_ucheck, ucheck_shift } => {
                let mut x = vec![0.0; self.full_dim];
                for (&g, &v) in self.kept.iter().zip(y) {
                    x[g] = v;
                }
                // kept = [P | P̂ | U]; P occupies the first to_pcheck.ncols() slots
                let np = to_pcheck.ncols();
                let p = &y[..np];
                let mp = to_pcheck.mul_vec(p);
                let first_pc = np;
                for k in 0..mp.len() {
                    let g = self.kept[first_pc + k];
                    x[g] = y[first_pc + k] - mp[k];
                }
                let up = to_ucheck.mul_vec(p);
                let uc_start = self.full_dim - up.len();
                for k in 0..up.len() {
                    x[uc_start + k] = up[k] - ucheck_shift[k];
                }
                Ok(x)
            }
        }
    }

    /// Solves the reduced system and expands the solution.
    pub fn solve(&self) -> Result<(Vec<f64>, SolveReport), EliminationError> {
        let rep = solve_direct(&self.matrix, &self.rhs)?;
        let x = self.recover(&rep.solution)?;
        Ok((x, rep))
    }

    /// As [`solve`](Self::solve), eliminating the unknowns of each mesh
    /// entity together (much less fill for the saddle-point systems).
    pub fn solve_on(&self, spaces: &Spaces) -> Result<(Vec<f64>, SolveReport), EliminationError> {
        let groups = spaces.entity_groups(&self.kept);
        let rep = solve_direct_grouped(&self.matrix, &self.rhs, &groups)?;
        let x = self.recover(&rep.solution)?;
        Ok((x, rep))
    }
}

/// Schur complement on the index set `elim` of `m`, whose `elim × elim` block
/// must be diagonal with nonzero entries. Indices in `kept` / `elim` of the
/// result refer to rows of `m` (composed with `index_map`).
pub fn schur_diagonal(
    m: &CsrMatrix,
    b: &[f64],
    elim: &[usize],
    index_map: &[usize],
    full_dim: usize,
    kind: Elimination,
) -> Result<ReducedSystem, EliminationError> {
    let n = m.nrows();
    let mut is_elim = vec![false; n];
    for &i in elim {
        is_elim[i] = true;
    }
    let keep: Vec<usize> = (0..n).filter(|&i| !is_elim[i]).collect();
    let m_dd = m.select(elim, elim);
    if !m_dd.is_diagonal() {
        return Err(EliminationError::NotDiagonal);
    }
    let d = m_dd.diagonal();
    let mut dinv = Vec::with_capacity(d.len());
    for (k, &v) in d.iter().enumerate() {
        if v == 0.0 || !v.is_finite() {
            return Err(EliminationError::ZeroPivot(index_map[elim[k]]));
        }
        dinv.push(1.0 / v);
    }
    let m_rr = m.select(&keep, &keep);
    let m_rd = m.select(&keep, elim);
    let m_dr = m.select(elim, &keep);
    let scaled = m_rd.matmul(&CsrMatrix::from_diagonal(&dinv));
    let s = m_rr.add_scaled(&scaled.matmul(&m_dr), -1.0);
    let b_d: Vec<f64> = elim.iter().map(|&i| b[i]).collect();
    let db: Vec<f64> = b_d.iter().zip(&dinv).map(|(x, y)| x * y).collect();
    let corr = m_rd.mul_vec(&db);
    let rhs: Vec<f64> = keep.iter().zip(&corr).map(|(&i, c)| b[i] - c).collect();
    Ok(ReducedSystem {
        kind,
        matrix: s,
        rhs,
        kept: keep.iter().map(|&i| index_map[i]).collect(),
        full_dim,
        recovery: Recovery::Schur {
            elim: elim.iter().map(|&i| index_map[i]).collect(),
            dinv,
            m_dr,
            b_d,
        },
    })
}

fn eliminate_fields(system: &BlockSystem, fields: &[FieldKind], kind: Elimination) -> Result<ReducedSystem, EliminationError> {
    let elim: Vec<usize> = fields.iter().flat_map(|&f| system.layout.range(f)).collect();
    let ident: Vec<usize> = (0..system.dim()).collect();
    schur_diagonal(&system.matrix, &system.rhs, &elim, &ident, system.dim(), kind)
}

/// Removes `p̌` (HDG family): `p̌ = τ Q̌^p[u]_e` (`τ Q̌^p(u − g_D)` on `Γ_D`).
pub fn eliminate_pcheck(system: &BlockSystem) -> Result<ReducedSystem, EliminationError> {
    eliminate_fields(system, &[FieldKind::Pcheck], Elimination::Pcheck)
}

/// Removes `ǔ` (WG family): `ǔ = η Q̌^u[p]` (`η Q̌^u(p·n − g_N)` on `Γ_N`).
pub fn eliminate_ucheck(system: &BlockSystem) -> Result<ReducedSystem, EliminationError> {
    eliminate_fields(system, &[FieldKind::Ucheck], Elimination::Ucheck)
}

/// Removes both residual corrections, leaving the DG system in `(p, u)`.
pub fn eliminate_both(system: &BlockSystem) -> Result<ReducedSystem, EliminationError> {
    eliminate_fields(system, &[FieldKind::Pcheck, FieldKind::Ucheck], Elimination::Both)
}

/// Relative size below which off-cell couplings count as rounding.
const CELL_LOCAL_TOL: f64 = 1e-12;

/// Eliminates `p̌`, changes `ǔ` to `û = Q̌^u{u} + ǔ` and condenses the
/// cell-local `(p, u)` onto `û`. The returned matrix is the negated Schur
/// complement (symmetric positive definite).
pub fn hybridize_uhat(
    mesh: &Mesh2D,
    spaces: &Spaces,
    system: &BlockSystem,
    config: &MethodConfig,
) -> Result<ReducedSystem, EliminationError> {
    conditions::check_hybridizable(&spaces.spec, config.penalty.eta_tau_product())?;
    let inner = eliminate_pcheck(system)?;
    let lay = system.layout;
    let pos_of = |g: usize| inner.kept.binary_search(&g).expect("kept indices are sorted");
    let u_pos: Vec<usize> = lay.range(FieldKind::U).map(pos_of).collect();
    let p_pos: Vec<usize> = lay.range(FieldKind::P).map(pos_of).collect();
    let h_pos: Vec<usize> = lay.range(FieldKind::Ucheck).map(pos_of).collect();
    let ni = inner.dim();

    // S maps (p, u, û) to (p, u, ǔ) with ǔ = û − P u
    let ctx = AssemblyContext::for_config(mesh, spaces, config)?;
    let avg = crate::assembly::trace_moments(&ctx, crate::assembly::TraceOp::AvgU, FieldKind::Ucheck);
    let mut st = Triplets::new(ni, ni);
    for i in 0..ni {
        st.push(i, i, 1.0);
    }
    for (r, c, v) in avg.iter() {
        st.push(h_pos[r], u_pos[c], -v);
    }
    let s = st.to_csr();
    let kp = s.transpose().matmul(&inner.matrix).matmul(&s);
    let bp = s.transpose().mul_vec(&inner.rhs);

    // cell of each interior position
    let mut cell_of = vec![usize::MAX; ni];
    for (k, &pos) in p_pos.iter().enumerate() {
        cell_of[pos] = spaces.p.entity_of(k);
    }
    for (k, &pos) in u_pos.iter().enumerate() {
        cell_of[pos] = spaces.u.entity_of(k);
    }
    let mut h_index = vec![usize::MAX; ni];
    for (k, &pos) in h_pos.iter().enumerate() {
        h_index[pos] = k;
    }
    let scale = kp.max_abs();
    for (i, j, v) in kp.iter() {
        let (a, b) = (cell_of[i], cell_of[j]);
        if a != usize::MAX && b != usize::MAX && a != b && v.abs() > CELL_LOCAL_TOL * scale {
            return Err(EliminationError::NotCellLocal { a, b, value: v });
        }
    }

    let nh = h_pos.len();
    let mut per_cell: Vec<Vec<usize>> = vec![Vec::new(); mesh.num_cells()];
    for pos in 0..ni {
        if cell_of[pos] != usize::MAX {
            per_cell[cell_of[pos]].push(pos);
        }
    }
    let mut triplets = Triplets::new(nh, nh);
    let mut rhs: Vec<f64> = h_pos.iter().map(|&p| bp[p]).collect();
    for (i, j, v) in kp.iter() {
        if h_index[i] != usize::MAX && h_index[j] != usize::MAX {
            triplets.push(h_index[i], h_index[j], v);
        }
    }
    let mut cells = Vec::with_capacity(mesh.num_cells());
    for dofs in per_cell {
        let nl = dofs.len();
        let mut local = vec![usize::MAX; ni];
        for (k, &p) in dofs.iter().enumerate() {
            local[p] = k;
        }
        let mut kc = DMatrix::<f64>::zeros(nl, nl);
        let mut h_cols: Vec<usize> = Vec::new();
        let mut entries = Vec::new();
        for (k, &p) in dofs.iter().enumerate() {
            let (cols, vals) = kp.row(p);
            for (&c, &v) in cols.iter().zip(vals) {
                if local[c] != usize::MAX {
                    kc[(k, local[c])] = v;
                } else if h_index[c] != usize::MAX {
                    let hc = h_index[c];
                    let slot = match h_cols.iter().position(|&x| x == hc) {
                        Some(s) => s,
                        None => {
                            h_cols.push(hc);
                            h_cols.len() - 1
                        }
                    };
                    entries.push((k, slot, v));
                }
            }
        }
        let mut k_ch = DMatrix::<f64>::zeros(nl, h_cols.len());
        for (r, c, v) in entries {
            k_ch[(r, c)] = v;
        }
        let inv = kc.clone().try_inverse().ok_or(LinalgError::Singular { column: dofs.first().copied().unwrap_or(0) })?;
        let b = DVector::from_iterator(nl, dofs.iter().map(|&p| bp[p]));
        // K_Hc = K_cHᵀ by symmetry
        let w = &inv * &k_ch;
        let s_loc = k_ch.transpose() * &w;
        for a in 0..h_cols.len() {
            for c in 0..h_cols.len() {
                triplets.push(h_cols[a], h_cols[c], -s_loc[(a, c)]);
            }
        }
        let g = k_ch.transpose() * (&inv * &b);
        for a in 0..h_cols.len() {
            rhs[h_cols[a]] -= g[a];
        }
        cells.push(LocalCell { dofs, inv, k_ch, h_cols, b });
    }
    let schur = triplets.to_csr().scaled(-1.0);
    let rhs: Vec<f64> = rhs.iter().map(|v| -v).collect();
    let kept: Vec<usize> = lay.range(FieldKind::Ucheck).collect();
    Ok(ReducedSystem {
        kind: Elimination::HybridUhat,
        matrix: schur,
        rhs,
        kept,
        full_dim: system.dim(),
        recovery: Recovery::Hybrid(Box::new(HybridRecovery { inner, cells, h_pos, u_pos, avg_moments: avg })),
    })
}

/// Assembles the three-field form in `(p, p̂, u)` with `p̂ = Q̌^p{p}_e + p̌`:
///
/// `a_w(p̃, q̃) = (c p, q) + ⟨τ⁻¹(p̂ − Q̌^p{p}_e), q̂ − Q̌^p{q}_e⟩ + ⟨η Q̌^u[p], Q̌^u[q]⟩`,
/// `b_w(q̃, u) = (∇_h u, q) − ⟨[u]_e, q̂ − Q̌^p{q}_e + {q}_e⟩`,
///
/// with right-hand side `−⟨g_D, q·n + q̂ − Q̌^p{q}_e⟩_{Γ_D} + ⟨η Q̌^u g_N, q·n⟩_{Γ_N}`
/// and `−(f, v) + ⟨g_N, v⟩_{Γ_N}`.
pub fn assemble_wg_phat(
    mesh: &Mesh2D,
    spaces: &Spaces,
    data: &dyn ProblemData,
    config: &MethodConfig,
) -> Result<ReducedSystem, EliminationError> {
    conditions::check_wg_phat(&spaces.spec)?;
    let ctx = AssemblyContext::for_config(mesh, spaces, config)?;
    ctx.check_penalty(&config.penalty)?;
    let lay: Layout = ctx.layout;
    let n = lay.total();
    let mut a = Triplets::new(n, n);
    let mut b = Triplets::new(n, n);
    ctx.flux_mass(data, &mut a)?;
    let mut rhs = ctx.rhs(data);
    // the four-field flux rows already hold −⟨g_D, q·n + q̌⟩ with q̌ ↦ q̂
    let np = lay.len(FieldKind::P);
    let npc = lay.len(FieldKind::Pcheck);
    let nuc = lay.len(FieldKind::Ucheck);
    let pc0 = lay.start(FieldKind::Pcheck);
    let uc0 = lay.start(FieldKind::Ucheck);
    let mut to_pc = Triplets::new(npc, np);
    let mut to_uc = Triplets::new(nuc, np);
    let mut shift = vec![0.0; nuc];

    for (i, j, v) in cell_coupling(&ctx) {
        b.push(i, j, v);
    }
    for e in 0..mesh.num_edges() {
        let ed = ctx.edge_data(e);
        for pt in &ed.points {
            b.push_outer(&pt.jump_u, &pt.avg_q, -pt.w);
            b.push_outer(&pt.jump_u, &pt.pcheck, -pt.w);
        }
        if spaces.pcheck.count(e) > 0 {
            let tinv = 1.0 / config.penalty.tau(e, ed.h);
            let mq = dg::moments(&ed.points, |pt| &pt.avg_q, |pt| &pt.pcheck);
            let mu = dg::moments(&ed.points, |pt| &pt.jump_u, |pt| &pt.pcheck);
            let gd: Vec<f64> = if ed.tag == EdgeTag::Dirichlet {
                let mut g = vec![0.0; mq.len()];
                for pt in &ed.points {
                    let val = data.dirichlet(pt.x);
                    for (k, &(_, psi)) in pt.pcheck.iter().enumerate() {
                        g[k] += pt.w * val * psi;
                    }
                }
                g
            } else {
                vec![0.0; mq.len()]
            };
            for (k, ((j, m), (_, muj))) in mq.iter().zip(&mu).enumerate() {
                let jj = *j;
                a.push(jj, jj, tinv);
                for &(i, v) in m {
                    a.push(jj, i, -tinv * v);
                    a.push(i, jj, -tinv * v);
                    to_pc.push(jj - pc0, i, v);
                    rhs[i] += gd[k] * v;
                }
                a.push_outer(m, m, tinv);
                b.push_outer(muj, m, 1.0);
            }
        }
        if spaces.ucheck.count(e) > 0 {
            let eta = config.penalty.eta(e, ed.h);
            let mj = dg::moments(&ed.points, |pt| &pt.jump_q, |pt| &pt.ucheck);
            let gn: Vec<f64> = if ed.tag == EdgeTag::Neumann {
                let mut g = vec![0.0; mj.len()];
                for pt in &ed.points {
                    let val = data.neumann(pt.x, ed.normal);
                    for (k, &(_, psi)) in pt.ucheck.iter().enumerate() {
                        g[k] += pt.w * val * psi;
                    }
                }
                g
            } else {
                vec![0.0; mj.len()]
            };
            for (k, (j, m)) in mj.iter().enumerate() {
                a.push_outer(m, m, eta);
                for &(i, v) in m {
                    to_uc.push(j - uc0, i, eta * v);
                    rhs[i] += eta * gn[k] * v;
                }
                shift[j - uc0] = eta * gn[k];
            }
        }
    }
    let bm = b.to_csr();
    for (i, j, v) in bm.iter() {
        a.push(i, j, v);
        a.push(j, i, v);
    }
    let full = a.to_csr();
    let kept: Vec<usize> = (0..lay.start(FieldKind::Ucheck)).collect();
    Ok(ReducedSystem {
        kind: Elimination::WgPhat,
        matrix: full.select(&kept, &kept),
        rhs: kept.iter().map(|&i| rhs[i]).collect(),
        kept,
        full_dim: n,
        recovery: Recovery::Wg { to_pcheck: to_pc.to_csr(), to_ucheck: to_uc.to_csr(), ucheck_shift: shift },
    })
}

/// Volume part `(∇_h u, q)` at `(u-row, q-col)`.
fn cell_coupling(ctx: &AssemblyContext<'_>) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::new();
    let nu = ctx.spaces.u_basis.dim();
    let nq = ctx.spaces.q_basis.dim();
    for c in 0..ctx.mesh.num_cells() {
        let cd = ctx.cell_data(c);
        for i in 0..nu {
            for j in 0..nq {
                let mut s = 0.0;
                for (k, &w) in cd.w.iter().enumerate() {
                    let g = cd.u.grad(k, i);
                    let q = cd.q.vector(k, j);
                    s += w * (g[0] * q[0] + g[1] * q[1]);
                }
                out.push((ctx.u_dof(c, i), ctx.p_dof(c, j), s));
            }
        }
    }
    out
}

/// Builds the reduced system selected by `config.elimination`.
pub fn reduce(
    mesh: &Mesh2D,
    spaces: &Spaces,
    data: &dyn ProblemData,
    system: &BlockSystem,
    config: &MethodConfig,
) -> Result<ReducedSystem, EliminationError> {
    match config.elimination {
        Elimination::Full => {
            let ident: Vec<usize> = (0..system.dim()).collect();
            schur_diagonal(&system.matrix, &system.rhs, &[], &ident, system.dim(), Elimination::Full)
        }
        Elimination::Pcheck => eliminate_pcheck(system),
        Elimination::Ucheck => eliminate_ucheck(system),
        Elimination::Both => eliminate_both(system),
        Elimination::HybridUhat => hybridize_uhat(mesh, spaces, system, config),
        Elimination::WgPhat => assemble_wg_phat(mesh, spaces, data, config),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{assemble_system, FnProblem, Penalty};
    use crate::linalg::dense;
    use crate::mesh::neumann_right_top;
    use crate::spaces::{build_spaces, FluxFamily, SpaceSpec};

    fn data() -> FnProblem<impl Fn([f64; 2]) -> f64, impl Fn([f64; 2]) -> f64, impl Fn([f64; 2], [f64; 2]) -> f64> {
        FnProblem { f: |x: [f64; 2]| 1.0 + x[0] * x[1], g_d: |x: [f64; 2]| x[0] - 0.5 * x[1], g_n: |x: [f64; 2], n: [f64; 2]| n[0] + x[1] }
    }

    fn dense_solve(sys: &BlockSystem) -> Vec<f64> {
        dense::solve(&sys.matrix.to_dense(), &sys.rhs).unwrap()
    }

    fn max_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    fn setup(n: usize, spec: SpaceSpec, pen: Penalty) -> (Mesh2D, Spaces, MethodConfig) {
        let m = Mesh2D::structured_unit_square(n).unwrap().tag_boundary(neumann_right_top).unwrap();
        let s = build_spaces(&m, spec).unwrap();
        (m, s, MethodConfig::new(spec, pen))
    }

    #[test]
    fn schur_paths_match_full_solve() {
        let spec = SpaceSpec::new(FluxFamily::VectorPk, 1, Some(1), 2, Some(1));
        for n in [1, 2] {
            let (m, s, cfg) = setup(n, spec, Penalty::grad(0.5));
            let sys = assemble_system(&m, &s, &data(), &cfg).unwrap();
            let x = dense_solve(&sys);
            for r in [eliminate_pcheck(&sys), eliminate_ucheck(&sys), eliminate_both(&sys)] {
                let r = r.unwrap();
                assert!(r.matrix.asymmetry() < 1e-12);
                let (y, _) = r.solve().unwrap();
                assert!(max_diff(&x, &y) < 1e-10, "{:?}", r.kind);
            }
        }
    }

    #[test]
    fn order_commutes() {
        let spec = SpaceSpec::new(FluxFamily::BrokenRT, 0, Some(0), 0, Some(1));
        let (m, s, cfg) = setup(2, spec, Penalty::div(0.5));
        let sys = assemble_system(&m, &s, &data(), &cfg).unwrap();
        let both = eliminate_both(&sys).unwrap();
        let first = eliminate_pcheck(&sys).unwrap();
        let uc: Vec<usize> = first
            .kept
            .iter()
            .enumerate()
            .filter(|(_, &g)| sys.layout.field_of(g) == FieldKind::Ucheck)
            .map(|(k, _)| k)
            .collect();
        let second =
            schur_diagonal(&first.matrix, &first.rhs, &uc, &first.kept, sys.dim(), Elimination::Both).unwrap();
        assert_eq!(second.kept, both.kept);
        let d = second.matrix.add_scaled(&both.matrix, -1.0).max_abs();
        assert!(d <= 1e-12 * both.matrix.max_abs());
    }

    #[test]
    fn trivial_pcheck_is_identity() {
        let spec = SpaceSpec::new(FluxFamily::VectorPk, 1, None, 0, Some(0));
        let (m, s, cfg) = setup(1, spec, Penalty::div(1.0));
        let sys = assemble_system(&m, &s, &data(), &cfg).unwrap();
        let r = eliminate_pcheck(&sys).unwrap();
        assert_eq!(r.dim(), sys.dim());
        assert_eq!(r.matrix.add_scaled(&sys.matrix, -1.0).max_abs(), 0.0);
    }

    #[test]
    fn hybridization_matches_full_solve() {
        let spec = SpaceSpec::new(FluxFamily::BrokenRT, 1, Some(1), 1, Some(1));
        for n in [1, 2] {
            let (m, s, cfg) = setup(n, spec, Penalty::Div { rho: 1.0, c_tau: 0.25 });
            let sys = assemble_system(&m, &s, &data(), &cfg).unwrap();
            let x = dense_solve(&sys);
            let h = hybridize_uhat(&m, &s, &sys, &cfg).unwrap();
            assert_eq!(h.dim(), s.ucheck.total());
            assert!(h.matrix.asymmetry() < 1e-12);
            assert!(dense::min_symmetric_eigenvalue(&h.matrix.to_dense()) > 0.0);
            let (y, _) = h.solve().unwrap();
            assert!(max_diff(&x, &y) < 1e-10, "n={n} {}", max_diff(&x, &y));
        }
    }

    #[test]
    fn hybridization_refuses_without_quarter() {
        let spec = SpaceSpec::new(FluxFamily::BrokenRT, 0, Some(0), 0, Some(0));
        let (m, s, cfg) = setup(1, spec, Penalty::div(1.0));
        let sys = assemble_system(&m, &s, &data(), &cfg).unwrap();
        assert!(matches!(hybridize_uhat(&m, &s, &sys, &cfg), Err(EliminationError::Condition(_))));
    }

    #[test]
    fn wg_phat_matches_full_solve() {
        for spec in [
            SpaceSpec::new(FluxFamily::VectorPk, 0, Some(0), 1, Some(0)),
            SpaceSpec::new(FluxFamily::BrokenRT, 0, Some(0), 0, Some(1)),
        ] {
            for n in [1, 2] {
                let (m, s, cfg) = setup(n, spec, Penalty::Grad { rho: 1.0, c_eta: 0.25 });
                let sys = assemble_system(&m, &s, &data(), &cfg).unwrap();
                let x = dense_solve(&sys);
                let w = assemble_wg_phat(&m, &s, &data(), &cfg).unwrap();
                assert!(w.matrix.asymmetry() < 1e-12);
                let (y, rep) = w.solve().unwrap();
                assert!(max_diff(&x, &y) < 1e-10, "n={n} {}", max_diff(&x, &y));
                // p̂ − Q̌^p{p}_e = p̌
                let fields = crate::assembly::SolutionFields::from_global(&sys.layout, &y);
                let phat = fields.phat(&m, &s);
                let np = s.p.total();
                for k in 0..phat.len() {
                    assert!((phat[k] - rep.solution[np + k]).abs() < 1e-12);
                }
            }
        }
    }
}
