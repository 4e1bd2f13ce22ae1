//! Gram matrices of the ρ-weighted norms of the two regimes.
//!
//! Gradient-based:
//! `‖p̃‖²_{0,ρh} = (c p, p) + ⟨ρ h_e p̌, p̌⟩`,
//! `‖ũ‖²_{1,ρh} = (∇_h u, ∇_h u) + ⟨(ρh_e)⁻¹ Q̌^p[u]_e, Q̌^p[u]_e⟩ + ⟨(ρh_e)⁻¹ ǔ, ǔ⟩`.
//!
//! Divergence-based:
//! `‖p̃‖²_{div,ρh} = (c p, p) + (div_h p, div_h p) + ⟨(ρh_e)⁻¹ Q̌^u[p], Q̌^u[p]⟩ + ⟨(ρh_e)⁻¹ p̌, p̌⟩`,
//! `‖ũ‖²_{0,ρh} = (u, u) + ⟨ρ h_e ǔ, ǔ⟩`.
//!
//! With orthonormal edge bases, `‖Q̌ w‖²_e = Σ_j (∫_e w ψ_j)²`, so the
//! projected-jump terms are sums of rank-one moment products.

use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use super::{dg, AssemblyContext, AssemblyError, MethodConfig, ProblemData, Regime};
use crate::linalg::{CsrMatrix, Triplets};
use crate::mesh::Mesh2D;
use crate::spaces::{FieldKind, Layout, Spaces};

/// Flux-side and scalar-side Grams in the `(p, p̌)` and `(u, ǔ)` layouts.
#[derive(Debug, Clone)]
pub struct NormMatrices {
    pub regime: Regime,
    pub rho: f64,
    pub flux: CsrMatrix,
    pub scalar: CsrMatrix,
    pub layout: Layout,
}

impl NormMatrices {
    /// Block-diagonal Gram over the full four-field layout.
    pub fn full(&self) -> CsrMatrix {
        CsrMatrix::block_diag(&self.flux, &self.scalar)
    }

    /// Square block of `full()` belonging to one field.
    pub fn field_block(&self, f: FieldKind) -> CsrMatrix {
        let r: Vec<usize> = self.layout.range(f).collect();
        self.full().select(&r, &r)
    }

    /// `√(xᵀ G x)` for a field-local vector.
    pub fn field_norm(&self, f: FieldKind, x: &[f64]) -> f64 {
        let g = self.field_block(f);
        crate::linalg::dot(x, &g.mul_vec(x)).max(0.0).sqrt()
    }
}

/// Assembles the Grams of `regime`, which must match the penalty scaling.
pub fn assemble_norm_grams(
    mesh: &Mesh2D,
    spaces: &Spaces,
    data: &dyn ProblemData,
    config: &MethodConfig,
    regime: Regime,
) -> Result<NormMatrices, AssemblyError> {
    let configured = config.penalty.regime();
    let rho = match (configured, config.penalty.rho()) {
        (Some(r), Some(rho)) if r == regime => rho,
        _ => return Err(AssemblyError::RegimeMismatch { requested: regime, configured }),
    };
    assemble_norm_grams_at(mesh, spaces, data, config, regime, rho)
}

/// Grams of `regime` at weight `rho`, regardless of how `config` scales its
/// penalties (used to measure schemes outside both regimes).
pub fn assemble_norm_grams_at(
    mesh: &Mesh2D,
    spaces: &Spaces,
    data: &dyn ProblemData,
    config: &MethodConfig,
    regime: Regime,
    rho: f64,
) -> Result<NormMatrices, AssemblyError> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(AssemblyError::NonPositivePenalty { param: "rho", edge: 0, value: rho });
    }
    let ctx = AssemblyContext::for_config(mesh, spaces, config)?;
    let lay = ctx.layout;
    let n = lay.total();
    let nf = lay.flux_len();
    let mut t = Triplets::new(n, n);
    ctx.flux_mass(data, &mut t)?;

    let (pc_scale, uc_scale): (fn(f64, f64) -> f64, fn(f64, f64) -> f64) = match regime {
        Regime::Grad => (|rho, h| rho * h, |rho, h| 1.0 / (rho * h)),
        Regime::Div => (|rho, h| 1.0 / (rho * h), |rho, h| rho * h),
    };
    ctx.edge_diagonal(FieldKind::Pcheck, |_, h| pc_scale(rho, h), &mut t);
    ctx.edge_diagonal(FieldKind::Ucheck, |_, h| uc_scale(rho, h), &mut t);

    let nu = spaces.u_basis.dim();
    let nq = spaces.q_basis.dim();
    for c in 0..mesh.num_cells() {
        let cd = ctx.cell_data(c);
        for (k, &w) in cd.w.iter().enumerate() {
            match regime {
                Regime::Grad => {
                    for i in 0..nu {
                        let gi = cd.u.grad(k, i);
                        for j in 0..nu {
                            let gj = cd.u.grad(k, j);
                            t.push(ctx.u_dof(c, i), ctx.u_dof(c, j), w * (gi[0] * gj[0] + gi[1] * gj[1]));
                        }
                    }
                }
                Regime::Div => {
                    for i in 0..nq {
                        for j in 0..nq {
                            t.push(ctx.p_dof(c, i), ctx.p_dof(c, j), w * cd.q.div(k, i) * cd.q.div(k, j));
                        }
                    }
                    for i in 0..nu {
                        for j in 0..nu {
                            t.push(ctx.u_dof(c, i), ctx.u_dof(c, j), w * cd.u.value(k, i) * cd.u.value(k, j));
                        }
                    }
                }
            }
        }
    }
    for e in 0..mesh.num_edges() {
        let ed = ctx.edge_data(e);
        let scale = 1.0 / (rho * ed.h);
        let m = match regime {
            Regime::Grad => dg::moments(&ed.points, |pt| &pt.jump_u, |pt| &pt.pcheck),
            Regime::Div => dg::moments(&ed.points, |pt| &pt.jump_q, |pt| &pt.ucheck),
        };
        for (_, mv) in &m {
            t.push_outer(mv, mv, scale);
        }
    }
    let full = t.to_csr();
    let fr: Vec<usize> = (0..nf).collect();
    let sr: Vec<usize> = (nf..n).collect();
    Ok(NormMatrices {
        regime,
        rho,
        flux: full.select(&fr, &fr),
        scalar: full.select(&sr, &sr),
        layout: lay,
    })
}
