//! Errors of a discrete solution in the ρ-weighted norms of either regime,
//! and the best approximation in the same norms.
//!
//! The exact `p̌` and `ǔ` vanish (consistency), `[u]_e = u` on `Γ_D` and
//! `[p] = p·n` on `Γ_N`; all other jumps of the exact solution are zero.

use alloc::vec;

use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use super::cases::ExactSolution;
use super::VerifyError;
use crate::assembly::{
    assemble_norm_grams_at, inverse_coefficient, AssemblyContext, EdgeData, MethodConfig, ProblemData, Regime,
    SolutionFields,
};
use crate::linalg::solve_direct;
use crate::mesh::{EdgeTag, Mesh2D, Point};
use crate::spaces::{FieldKind, Spaces};

/// Column names of the four error components.
pub const NORM_NAMES: [&str; 4] = ["p", "pcheck", "u", "ucheck"];

/// Extra quadrature exactness over the assembly rule for non-polynomial data.
pub const EXTRA_QUAD: usize = 4;

/// `‖p − p_h‖`, `‖p̌_h‖`, `‖u − u_h‖`, `‖ǔ_h‖` in a regime's norms:
///
/// * gradient-based: `‖·‖_{0,c}`, `‖·‖_{0,ρh}`, `‖·‖_{1,ρh}`, `‖·‖_{0,ρh⁻¹}`;
/// * divergence-based: `‖·‖_{div,ρh}`, `‖·‖_{0,ρh⁻¹}`, `‖·‖_0`, `‖·‖_{0,ρh}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorQuartet {
    pub p: f64,
    pub pcheck: f64,
    pub u: f64,
    pub ucheck: f64,
}

impl ErrorQuartet {
    pub fn values(&self) -> [f64; 4] {
        [self.p, self.pcheck, self.u, self.ucheck]
    }

    pub fn sum(&self) -> f64 {
        self.values().iter().sum()
    }
}

/// `α` of an exact solution as problem data (the rest is unused).
pub(crate) struct Coefficient<'a>(pub &'a dyn ExactSolution);

impl ProblemData for Coefficient<'_> {
    fn alpha(&self, x: Point) -> [[f64; 2]; 2] {
        self.0.alpha(x)
    }
    fn source(&self, _: Point) -> f64 {
        0.0
    }
    fn dirichlet(&self, _: Point) -> f64 {
        0.0
    }
    fn neumann(&self, _: Point, _: Point) -> f64 {
        0.0
    }
}

pub(crate) fn config_rho(config: &MethodConfig, regime: Regime) -> Result<f64, VerifyError> {
    match (config.penalty.regime(), config.penalty.rho()) {
        (Some(r), Some(rho)) if r == regime => Ok(rho),
        (configured, _) => Err(VerifyError::RegimeMismatch { requested: regime, configured }),
    }
}

/// Errors of `fields` against `exact`; `regime` must be the configured one.
pub fn error_norms(
    mesh: &Mesh2D,
    spaces: &Spaces,
    fields: &SolutionFields,
    exact: &dyn ExactSolution,
    config: &MethodConfig,
    regime: Regime,
) -> Result<ErrorQuartet, VerifyError> {
    let rho = config_rho(config, regime)?;
    error_norms_at(mesh, spaces, fields, exact, regime, rho, config.quad_degree() + EXTRA_QUAD)
}

/// Exact trace entering the projected jump of `regime` on an edge.
fn exact_jump(exact: &dyn ExactSolution, regime: Regime, ed: &EdgeData, x: Point) -> f64 {
    match (regime, ed.tag) {
        (Regime::Grad, EdgeTag::Dirichlet) => exact.u(x),
        (Regime::Div, EdgeTag::Neumann) => {
            let p = exact.p(x);
            p[0] * ed.normal[0] + p[1] * ed.normal[1]
        }
        _ => 0.0,
    }
}

fn apply(sv: &[(usize, f64)], x: &[f64]) -> f64 {
    sv.iter().map(|&(i, v)| v * x[i]).sum()
}

/// Errors at an explicit weight `rho` and quadrature exactness.
pub fn error_norms_at(
    mesh: &Mesh2D,
    spaces: &Spaces,
    fields: &SolutionFields,
    exact: &dyn ExactSolution,
    regime: Regime,
    rho: f64,
    quad_degree: usize,
) -> Result<ErrorQuartet, VerifyError> {
    let ctx = AssemblyContext::new(mesh, spaces, quad_degree)?;
    let x = fields.to_global();
    let (mut ep, mut epc, mut eu, mut euc) = (0.0, 0.0, 0.0, 0.0);
    let nu = spaces.u_basis.dim();
    let nq = spaces.q_basis.dim();
    for c in 0..mesh.num_cells() {
        let cd = ctx.cell_data(c);
        for (k, (&w, &xq)) in cd.w.iter().zip(&cd.x).enumerate() {
            let (mut uh, mut gh, mut ph, mut dh) = (0.0, [0.0; 2], [0.0; 2], 0.0);
            for i in 0..nu {
                let a = x[ctx.u_dof(c, i)];
                uh += a * cd.u.value(k, i);
                let g = cd.u.grad(k, i);
                gh[0] += a * g[0];
                gh[1] += a * g[1];
            }
            for i in 0..nq {
                let a = x[ctx.p_dof(c, i)];
                let q = cd.q.vector(k, i);
                ph[0] += a * q[0];
                ph[1] += a * q[1];
                dh += a * cd.q.div(k, i);
            }
            let cm = inverse_coefficient(exact.alpha(xq), xq)?;
            let p = exact.p(xq);
            let e = [p[0] - ph[0], p[1] - ph[1]];
            let ce = [cm[0][0] * e[0] + cm[0][1] * e[1], cm[1][0] * e[0] + cm[1][1] * e[1]];
            ep += w * (e[0] * ce[0] + e[1] * ce[1]);
            match regime {
                Regime::Grad => {
                    let g = exact.grad_u(xq);
                    eu += w * ((g[0] - gh[0]).powi(2) + (g[1] - gh[1]).powi(2));
                }
                Regime::Div => {
                    ep += w * (exact.div_p(xq) - dh).powi(2);
                    eu += w * (exact.u(xq) - uh).powi(2);
                }
            }
        }
    }
    for e in 0..mesh.num_edges() {
        let h = mesh.edge(e).length;
        let (pc_w, uc_w) = match regime {
            Regime::Grad => (rho * h, 1.0 / (rho * h)),
            Regime::Div => (1.0 / (rho * h), rho * h),
        };
        epc += pc_w * fields.pcheck[spaces.pcheck.range(e)].iter().map(|v| v * v).sum::<f64>();
        euc += uc_w * fields.ucheck[spaces.ucheck.range(e)].iter().map(|v| v * v).sum::<f64>();
        let target = match regime {
            Regime::Grad => FieldKind::Pcheck,
            Regime::Div => FieldKind::Ucheck,
        };
        let nt = spaces.dofmap(target).count(e);
        if nt == 0 {
            continue;
        }
        let ed = ctx.edge_data(e);
        let mut m = vec![0.0; nt];
        for pt in &ed.points {
            let (jump, psi) = match regime {
                Regime::Grad => (apply(&pt.jump_u, &x), &pt.pcheck),
                Regime::Div => (apply(&pt.jump_q, &x), &pt.ucheck),
            };
            let d = exact_jump(exact, regime, &ed, pt.x) - jump;
            for (j, &(_, s)) in psi.iter().enumerate() {
                m[j] += pt.w * s * d;
            }
        }
        let add = m.iter().map(|v| v * v).sum::<f64>() / (rho * h);
        match regime {
            Regime::Grad => eu += add,
            Regime::Div => ep += add,
        }
    }
    Ok(ErrorQuartet { p: ep.sqrt(), pcheck: epc.sqrt(), u: eu.sqrt(), ucheck: euc.sqrt() })
}

/// `inf_{q, v} (‖p − q‖ + ‖u − v‖)` in the flux and scalar norms of
/// `regime`; returns the two infima and the minimizing fields.
pub fn best_approximation(
    mesh: &Mesh2D,
    spaces: &Spaces,
    exact: &dyn ExactSolution,
    config: &MethodConfig,
    regime: Regime,
) -> Result<(f64, f64, SolutionFields), VerifyError> {
    let rho = config_rho(config, regime)?;
    let qd = config.quad_degree() + EXTRA_QUAD;
    let grams = assemble_norm_grams_at(mesh, spaces, &Coefficient(exact), config, regime, rho)?;
    let ctx = AssemblyContext::new(mesh, spaces, qd)?;
    let lay = ctx.layout;
    let mut b = vec![0.0; lay.total()];
    let nu = spaces.u_basis.dim();
    let nq = spaces.q_basis.dim();
    for c in 0..mesh.num_cells() {
        let cd = ctx.cell_data(c);
        for (k, (&w, &xq)) in cd.w.iter().zip(&cd.x).enumerate() {
            let cm = inverse_coefficient(exact.alpha(xq), xq)?;
            let p = exact.p(xq);
            let cp = [cm[0][0] * p[0] + cm[0][1] * p[1], cm[1][0] * p[0] + cm[1][1] * p[1]];
            let dp = exact.div_p(xq);
            for i in 0..nq {
                let q = cd.q.vector(k, i);
                let mut v = cp[0] * q[0] + cp[1] * q[1];
                if regime == Regime::Div {
                    v += dp * cd.q.div(k, i);
                }
                b[ctx.p_dof(c, i)] += w * v;
            }
            let (u, g) = (exact.u(xq), exact.grad_u(xq));
            for i in 0..nu {
                let v = match regime {
                    Regime::Grad => {
                        let gi = cd.u.grad(k, i);
                        g[0] * gi[0] + g[1] * gi[1]
                    }
                    Regime::Div => u * cd.u.value(k, i),
                };
                b[ctx.u_dof(c, i)] += w * v;
            }
        }
    }
    for e in 0..mesh.num_edges() {
        let target = match regime {
            Regime::Grad => FieldKind::Pcheck,
            Regime::Div => FieldKind::Ucheck,
        };
        if spaces.dofmap(target).count(e) == 0 {
            continue;
        }
        let ed = ctx.edge_data(e);
        let scale = 1.0 / (rho * ed.h);
        let psi = |pt: &crate::assembly::EdgePoint| match regime {
            Regime::Grad => pt.pcheck.clone(),
            Regime::Div => pt.ucheck.clone(),
        };
        let nt = spaces.dofmap(target).count(e);
        let mut m = vec![0.0; nt];
        for pt in &ed.points {
            let g = exact_jump(exact, regime, &ed, pt.x);
            for (j, &(_, s)) in psi(pt).iter().enumerate() {
                m[j] += pt.w * s * g;
            }
        }
        for pt in &ed.points {
            let jump = match regime {
                Regime::Grad => &pt.jump_u,
                Regime::Div => &pt.jump_q,
            };
            for (j, &(_, s)) in psi(pt).iter().enumerate() {
                for &(i, v) in jump {
                    b[i] += scale * m[j] * pt.w * s * v;
                }
            }
        }
    }
    let mut fields = SolutionFields::zeros(spaces);
    for (f, out) in [(FieldKind::P, &mut fields.p), (FieldKind::U, &mut fields.u)] {
        let g = grams.field_block(f);
        let rhs = &b[lay.range(f)];
        *out = solve_direct(&g, rhs)?.solution;
    }
    let err = error_norms_at(mesh, spaces, &fields, exact, regime, rho, qd)?;
    Ok((err.p, err.u, fields))
}

/// `L²` projection of `(p, u)` onto `Q_h × V_h` cell by cell (edge fields zero).
pub fn interpolate(mesh: &Mesh2D, spaces: &Spaces, exact: &dyn ExactSolution, quad_degree: usize) -> Result<SolutionFields, VerifyError> {
    project_cellwise(mesh, spaces, quad_degree, |_, x| (exact.u(x), exact.p(x)))
}

/// Cellwise `L²` projection of `(u, p)` given per cell by `f(cell, x)`.
pub fn project_cellwise<F>(mesh: &Mesh2D, spaces: &Spaces, quad_degree: usize, f: F) -> Result<SolutionFields, VerifyError>
where
    F: Fn(usize, Point) -> (f64, Point),
{
    let ctx = AssemblyContext::new(mesh, spaces, quad_degree)?;
    let mut fields = SolutionFields::zeros(spaces);
    let nu = spaces.u_basis.dim();
    let nq = spaces.q_basis.dim();
    for c in 0..mesh.num_cells() {
        let cd = ctx.cell_data(c);
        let mut mu = DMatrix::<f64>::zeros(nu, nu);
        let mut bu = DVector::<f64>::zeros(nu);
        let mut mq = DMatrix::<f64>::zeros(nq, nq);
        let mut bq = DVector::<f64>::zeros(nq);
        for (k, (&w, &xq)) in cd.w.iter().zip(&cd.x).enumerate() {
            let (u, p) = f(c, xq);
            for i in 0..nu {
                bu[i] += w * u * cd.u.value(k, i);
                for j in 0..nu {
                    mu[(i, j)] += w * cd.u.value(k, i) * cd.u.value(k, j);
                }
            }
            for i in 0..nq {
                let qi = cd.q.vector(k, i);
                bq[i] += w * (p[0] * qi[0] + p[1] * qi[1]);
                for j in 0..nq {
                    let qj = cd.q.vector(k, j);
                    mq[(i, j)] += w * (qi[0] * qj[0] + qi[1] * qj[1]);
                }
            }
        }
        let su = mu.cholesky().ok_or(VerifyError::SingularLocalMass(c))?.solve(&bu);
        let sq = mq.cholesky().ok_or(VerifyError::SingularLocalMass(c))?.solve(&bq);
        let (ou, op) = (spaces.u.offset(c), spaces.p.offset(c));
        fields.u[ou..ou + nu].copy_from_slice(su.as_slice());
        fields.p[op..op + nq].copy_from_slice(sq.as_slice());
    }
    Ok(fields)
}
