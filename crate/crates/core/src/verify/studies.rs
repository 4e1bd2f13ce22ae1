//! Convergence, inf-sup, stability and `ρ → 0` limit studies.
//!
//! Each study is split into independent per-point functions (one mesh level,
//! one `ρ`) so callers can run points concurrently; the `*_study` drivers
//! simply loop over them.

use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use super::cases::{DataPart, ManufacturedCase};
use super::conforming::{conforming_mixed_solve, conforming_primal_solve};
use super::errors::{config_rho, error_norms, error_norms_at, ErrorQuartet, EXTRA_QUAD};
use super::VerifyError;
use crate::assembly::{
    assemble_norm_grams_at, assemble_rhs, assemble_system, AssemblyContext, MethodConfig, NormMatrices, ProblemData,
    Regime, SolutionFields,
};
use crate::conditions;
use crate::linalg::{dot, infsup_constant, solve_direct, CsrMatrix, EigenMethod};
use crate::mesh::{EdgeTag, Mesh2D};
use crate::presets::{Claim, Preset};
use crate::solver::{solve, Solved};
use crate::spaces::{build_spaces, FieldKind, Spaces};

/// `√(Fᵀ N⁻¹ F)`: the discrete dual norm of the functional `F` for the Gram `N`.
pub fn dual_norm(f: &[f64], n: &CsrMatrix) -> Result<f64, VerifyError> {
    if f.is_empty() || f.iter().all(|v| *v == 0.0) {
        return Ok(0.0);
    }
    let y = solve_direct(n, f)?.solution;
    let v = dot(f, &y);
    if v < 0.0 {
        return Err(VerifyError::NotSpd);
    }
    Ok(v.sqrt())
}

fn run(mesh: &Mesh2D, data: &dyn ProblemData, config: &MethodConfig) -> Result<Solved, VerifyError> {
    solve(mesh, data, config).map_err(VerifyError::from)
}

/// One level of a convergence table.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelRow {
    pub level: usize,
    pub n: usize,
    pub h: f64,
    /// Size of the four-field system.
    pub dofs: usize,
    /// Size of the system actually factored.
    pub solved_dofs: usize,
    pub errors: ErrorQuartet,
}

/// Errors per level and the observed orders between consecutive levels.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub case: &'static str,
    pub regime: Regime,
    pub rows: Vec<LevelRow>,
}

/// Errors below this are treated as exact and get no order.
pub const EXACT_FLOOR: f64 = 1e-13;

impl ErrorReport {
    /// `log(e_ℓ / e_{ℓ+1}) / log(h_ℓ / h_{ℓ+1})` per component; `NaN` when
    /// both errors are below [`EXACT_FLOOR`].
    pub fn eoc(&self) -> Vec<[f64; 4]> {
        self.rows
            .windows(2)
            .map(|w| {
                let (a, b) = (w[0].errors.values(), w[1].errors.values());
                let lh = (w[0].h / w[1].h).ln();
                let mut r = [f64::NAN; 4];
                for i in 0..4 {
                    if a[i] > EXACT_FLOOR || b[i] > EXACT_FLOOR {
                        r[i] = (a[i] / b[i]).ln() / lh;
                    }
                }
                r
            })
            .collect()
    }

    pub fn finest_eoc(&self) -> Option<[f64; 4]> {
        self.eoc().last().copied()
    }
}

/// Solves `case` on the `n × n` mesh and measures the errors.
pub fn eoc_level(case: &ManufacturedCase, config: &MethodConfig, regime: Regime, level: usize, n: usize) -> Result<LevelRow, VerifyError> {
    let rho = config_rho(config, regime)?;
    eoc_level_at(case, config, regime, rho, level, n)
}

/// As [`eoc_level`], measuring in the norms of `regime` at weight `rho`
/// whatever the penalty of `config` (e.g. for manual penalties).
pub fn eoc_level_at(
    case: &ManufacturedCase,
    config: &MethodConfig,
    regime: Regime,
    rho: f64,
    level: usize,
    n: usize,
) -> Result<LevelRow, VerifyError> {
    let mesh = case.mesh(n)?;
    let s = run(&mesh, case, config)?;
    let errors = error_norms_at(&mesh, &s.spaces, &s.fields, case, regime, rho, config.quad_degree() + EXTRA_QUAD)?;
    Ok(LevelRow { level, n, h: mesh.max_h(), dofs: s.full_dim(), solved_dofs: s.reduced_dim, errors })
}

/// Convergence table over the meshes `n ∈ levels` (at least three).
pub fn eoc_study(case: &ManufacturedCase, config: &MethodConfig, regime: Regime, levels: &[usize]) -> Result<ErrorReport, VerifyError> {
    if levels.len() < 3 {
        return Err(VerifyError::TooFewLevels(levels.len()));
    }
    let rows = levels
        .iter()
        .enumerate()
        .map(|(l, &n)| eoc_level(case, config, regime, l, n))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ErrorReport { case: case.name(), regime, rows })
}

fn grams_for(
    mesh: &Mesh2D,
    spaces: &Spaces,
    data: &dyn ProblemData,
    preset: &Preset,
    rho: f64,
) -> Result<(MethodConfig, NormMatrices), VerifyError> {
    let config = preset.config(rho);
    let g = assemble_norm_grams_at(mesh, spaces, data, &config, preset.claim.norm_regime(), rho)?;
    Ok((config, g))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfSupPoint {
    pub rho: f64,
    pub n: usize,
    pub beta: f64,
    pub lambda_max: f64,
    pub dim: usize,
    pub method: EigenMethod,
}

/// β of the four-field operator of `preset` at `(ρ, n)` in the norms of its
/// regime (divergence-based norms for the unproven row).
pub fn infsup_point(case: &ManufacturedCase, preset: &Preset, rho: f64, n: usize) -> Result<InfSupPoint, VerifyError> {
    let mesh = case.mesh(n)?;
    let spaces = build_spaces(&mesh, preset.spec)?;
    let (config, g) = grams_for(&mesh, &spaces, case, preset, rho)?;
    let sys = assemble_system(&mesh, &spaces, case, &config)?;
    let r = infsup_constant(&sys.matrix, &g.full())?;
    Ok(InfSupPoint { rho, n, beta: r.beta, lambda_max: r.lambda_max, dim: r.dim, method: r.method })
}

#[derive(Debug, Clone, PartialEq)]
pub struct InfSupSweep {
    pub points: Vec<InfSupPoint>,
}

impl InfSupSweep {
    pub fn beta_min(&self) -> f64 {
        self.points.iter().map(|p| p.beta).fold(f64::INFINITY, f64::min)
    }
    pub fn beta_max(&self) -> f64 {
        self.points.iter().map(|p| p.beta).fold(0.0, f64::max)
    }
    /// `max β / min β` over the sweep.
    pub fn variation(&self) -> f64 {
        self.beta_max() / self.beta_min()
    }
}

pub fn infsup_sweep(case: &ManufacturedCase, preset: &Preset, rhos: &[f64], ns: &[usize]) -> Result<InfSupSweep, VerifyError> {
    let mut points = Vec::new();
    for &n in ns {
        for &rho in rhos {
            points.push(infsup_point(case, preset, rho, n)?);
        }
    }
    Ok(InfSupSweep { points })
}

/// Discrete dual norms of the data, each the sum of its two components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataNorms {
    pub f: f64,
    pub g_d: f64,
    pub g_n: f64,
}

impl DataNorms {
    pub fn sum(&self) -> f64 {
        self.f + self.g_d + self.g_n
    }
}

/// Dual norms of `f`, `g_D`, `g_N` measured against the field Grams:
/// `f` against `V_h`; `g_D` against `Q_h` and `Q̌_h`; `g_N` against `V_h`
/// and `V̌_h`, each in the norm of that field.
pub fn data_norms(
    mesh: &Mesh2D,
    spaces: &Spaces,
    data: &dyn ProblemData,
    config: &MethodConfig,
    grams: &NormMatrices,
) -> Result<DataNorms, VerifyError> {
    let lay = grams.layout;
    let part = |rhs: &[f64], fld: FieldKind| -> Result<f64, VerifyError> {
        dual_norm(&rhs[lay.range(fld)], &grams.field_block(fld))
    };
    let rf = assemble_rhs(mesh, spaces, &DataPart::source(data), config)?;
    let rd = assemble_rhs(mesh, spaces, &DataPart::dirichlet(data), config)?;
    let rn = assemble_rhs(mesh, spaces, &DataPart::neumann(data), config)?;
    Ok(DataNorms {
        f: part(&rf, FieldKind::U)?,
        g_d: part(&rd, FieldKind::P)? + part(&rd, FieldKind::Pcheck)?,
        g_n: part(&rn, FieldKind::U)? + part(&rn, FieldKind::Ucheck)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityPoint {
    pub rho: f64,
    pub n: usize,
    /// Sum of the four solution norms.
    pub lhs: f64,
    pub data: DataNorms,
    /// `lhs / data.sum()`
    pub ratio: f64,
}

/// Solution norms against data norms for one `(ρ, n)`.
pub fn stability_point(case: &ManufacturedCase, preset: &Preset, rho: f64, n: usize) -> Result<StabilityPoint, VerifyError> {
    let mesh = case.mesh(n)?;
    let spaces = build_spaces(&mesh, preset.spec)?;
    let (config, g) = grams_for(&mesh, &spaces, case, preset, rho)?;
    let s = run(&mesh, case, &config)?;
    let lhs: f64 = FieldKind::ALL.iter().map(|&f| g.field_norm(f, s.fields.field(f))).sum();
    let data = data_norms(&mesh, &spaces, case, &config, &g)?;
    Ok(StabilityPoint { rho, n, lhs, data, ratio: lhs / data.sum() })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub points: Vec<StabilityPoint>,
}

impl StabilityReport {
    pub fn c_min(&self) -> f64 {
        self.points.iter().map(|p| p.ratio).fold(f64::INFINITY, f64::min)
    }
    pub fn c_max(&self) -> f64 {
        self.points.iter().map(|p| p.ratio).fold(0.0, f64::max)
    }
    /// Midrange constant `C = (max + min) / 2`.
    pub fn fitted(&self) -> f64 {
        0.5 * (self.c_max() + self.c_min())
    }
    /// Largest relative deviation `|C_j − C| / C` from the fitted constant.
    pub fn deviation(&self) -> f64 {
        let c = self.fitted();
        (self.c_max() - c) / c
    }
}

pub fn stability_study(case: &ManufacturedCase, preset: &Preset, rhos: &[f64], ns: &[usize]) -> Result<StabilityReport, VerifyError> {
    let mut points = Vec::new();
    for &n in ns {
        for &rho in rhos {
            points.push(stability_point(case, preset, rho, n)?);
        }
    }
    Ok(StabilityReport { points })
}

/// Quasi-optimality ratio: error sum over the best-approximation sum.
pub fn quasi_optimality(case: &ManufacturedCase, config: &MethodConfig, regime: Regime, n: usize) -> Result<f64, VerifyError> {
    let mesh = case.mesh(n)?;
    let s = run(&mesh, case, config)?;
    let err = error_norms(&mesh, &s.spaces, &s.fields, case, config, regime)?;
    let (bp, bu, _) = super::errors::best_approximation(&mesh, &s.spaces, case, config, regime)?;
    Ok(err.sum() / (bp + bu))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Reference {
    /// Continuous Lagrange primal method (gradient-based regime, `g_D = 0`).
    Primal,
    /// `RT0 × P0` mixed method (divergence-based regime, `g_N = 0`).
    Mixed,
}

impl Reference {
    pub fn label(self) -> &'static str {
        match self {
            Reference::Primal => "primal",
            Reference::Mixed => "mixed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitPoint {
    pub rho: f64,
    pub distance: f64,
    pub residual: f64,
    /// `R_p` or `R_m` at this `ρ`.
    pub functional: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitReport {
    pub reference: Reference,
    pub n: usize,
    pub points: Vec<LimitPoint>,
    /// Distances at or below this are solver noise.
    pub floor: f64,
    /// Indices of the points used in the fit.
    pub fitted: Vec<usize>,
    pub slope: f64,
}

/// Points with `ρ > 2^{-2}` are pre-asymptotic and left out of the fit.
pub const LIMIT_FIT_START: f64 = 0.25;
/// Minimum number of points in the slope fit.
pub const LIMIT_MIN_POINTS: usize = 4;
/// Noise floor factor over the solver residual.
pub const LIMIT_NOISE_FACTOR: f64 = 1e3;

/// Theorem-norm distance of `d = x − x^c` (primal: `‖δp‖_{0,c} +
/// (‖∇_h δu‖² + Σ h_e⁻¹ ‖⟦δu⟧‖²)^{1/2}`; mixed: `‖δp‖_{0,c} + ‖div_h δp‖ + ‖δu‖`).
pub fn limit_distance(
    mesh: &Mesh2D,
    spaces: &Spaces,
    data: &dyn ProblemData,
    d: &SolutionFields,
    reference: Reference,
    quad_degree: usize,
) -> Result<f64, VerifyError> {
    let ctx = AssemblyContext::new(mesh, spaces, quad_degree)?;
    let x = d.to_global();
    let (mut pc, mut div, mut u, mut grad, mut jump) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let nu = spaces.u_basis.dim();
    let nq = spaces.q_basis.dim();
    for c in 0..mesh.num_cells() {
        let cd = ctx.cell_data(c);
        for (k, (&w, &xq)) in cd.w.iter().zip(&cd.x).enumerate() {
            let (mut uv, mut g, mut p, mut dv) = (0.0, [0.0; 2], [0.0; 2], 0.0);
            for i in 0..nu {
                let a = x[ctx.u_dof(c, i)];
                uv += a * cd.u.value(k, i);
                let gi = cd.u.grad(k, i);
                g[0] += a * gi[0];
                g[1] += a * gi[1];
            }
            for i in 0..nq {
                let a = x[ctx.p_dof(c, i)];
                let q = cd.q.vector(k, i);
                p[0] += a * q[0];
                p[1] += a * q[1];
                dv += a * cd.q.div(k, i);
            }
            let cm = crate::assembly::inverse_coefficient(data.alpha(xq), xq)?;
            let cp = [cm[0][0] * p[0] + cm[0][1] * p[1], cm[1][0] * p[0] + cm[1][1] * p[1]];
            pc += w * (p[0] * cp[0] + p[1] * cp[1]);
            div += w * dv * dv;
            u += w * uv * uv;
            grad += w * (g[0] * g[0] + g[1] * g[1]);
        }
    }
    if reference == Reference::Primal {
        for e in 0..mesh.num_edges() {
            let ed = ctx.edge_data(e);
            for pt in &ed.points {
                let j: f64 = pt.jump_u.iter().map(|&(i, v)| v * x[i]).sum();
                jump += pt.w * j * j / ed.h;
            }
        }
    }
    Ok(match reference {
        Reference::Primal => pc.sqrt() + (grad + jump).sqrt(),
        Reference::Mixed => pc.sqrt() + div.sqrt() + u.sqrt(),
    })
}

fn max_boundary_data(mesh: &Mesh2D, data: &dyn ProblemData, tag: EdgeTag) -> f64 {
    let mut m: f64 = 0.0;
    for (e, info) in mesh.edges().iter().enumerate() {
        if info.tag != tag {
            continue;
        }
        for s in [0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0] {
            let x = mesh.edge_point(e, s);
            let v = match tag {
                EdgeTag::Dirichlet => data.dirichlet(x),
                _ => data.neumann(x, info.normal),
            };
            m = m.max(v.abs());
        }
    }
    m
}

/// Boundary data below this count as zero for the limit theorems.
const ZERO_DATA: f64 = 1e-12;

/// Checks the hypotheses of the limit theorem for `reference`.
pub fn check_limit(case: &ManufacturedCase, preset: &Preset, reference: Reference, mesh: &Mesh2D) -> Result<(), VerifyError> {
    let (regime, tag, which) = match reference {
        Reference::Primal => (Regime::Grad, EdgeTag::Dirichlet, "g_D"),
        Reference::Mixed => (Regime::Div, EdgeTag::Neumann, "g_N"),
    };
    if preset.claim != Claim::Proven(regime) {
        return Err(VerifyError::RegimeMismatch { requested: regime, configured: Some(preset.claim.norm_regime()) });
    }
    match reference {
        Reference::Primal => conditions::check_primal_limit(&preset.spec)?,
        Reference::Mixed => conditions::check_mixed_limit(&preset.spec)?,
    }
    let v = max_boundary_data(mesh, case, tag);
    if v > ZERO_DATA {
        return Err(VerifyError::NonzeroData { which, value: v });
    }
    Ok(())
}

/// Reference fields and their size in the theorem norm.
pub fn limit_reference(
    mesh: &Mesh2D,
    spaces: &Spaces,
    data: &dyn ProblemData,
    reference: Reference,
    quad_degree: usize,
) -> Result<(SolutionFields, f64), VerifyError> {
    let fields = match reference {
        Reference::Primal => conforming_primal_solve(mesh, spaces, data, spaces.spec.k_u)?.fields,
        Reference::Mixed => conforming_mixed_solve(mesh, spaces, data)?.fields,
    };
    let size = limit_distance(mesh, spaces, data, &fields, reference, quad_degree)?;
    Ok((fields, size))
}

/// One `ρ` of a limit study against precomputed reference fields.
pub fn limit_point(
    case: &ManufacturedCase,
    preset: &Preset,
    reference: Reference,
    mesh: &Mesh2D,
    ref_fields: &SolutionFields,
    rho: f64,
) -> Result<LimitPoint, VerifyError> {
    let config = preset.config(rho);
    let s = run(mesh, case, &config)?;
    let mut d = s.fields.clone();
    for (a, b) in d.p.iter_mut().zip(&ref_fields.p) {
        *a -= b;
    }
    for (a, b) in d.u.iter_mut().zip(&ref_fields.u) {
        *a -= b;
    }
    let distance = limit_distance(mesh, &s.spaces, case, &d, reference, config.quad_degree() + EXTRA_QUAD)?;
    let g = assemble_norm_grams_at(mesh, &s.spaces, case, &config, preset.claim.norm_regime(), rho)?;
    let dn = data_norms(mesh, &s.spaces, case, &config, &g)?;
    let functional = match reference {
        Reference::Primal => dn.f + dn.g_n,
        Reference::Mixed => dn.f + dn.g_d,
    };
    Ok(LimitPoint { rho, distance, residual: s.report.relative_residual, functional })
}

/// Least-squares slope of `ln d` against `ln ρ` over the usable points.
pub fn fit_limit(reference: Reference, n: usize, points: Vec<LimitPoint>, ref_size: f64) -> Result<LimitReport, VerifyError> {
    let worst = points.iter().map(|p| p.residual).fold(0.0, f64::max);
    let floor = LIMIT_NOISE_FACTOR * worst.max(f64::EPSILON) * ref_size;
    let fitted: Vec<usize> = points
        .iter()
        .enumerate()
        .filter(|(_, p)| p.rho <= LIMIT_FIT_START && p.distance > floor)
        .map(|(i, _)| i)
        .collect();
    if fitted.len() < LIMIT_MIN_POINTS {
        return Err(VerifyError::TooFewPoints { found: fitted.len(), needed: LIMIT_MIN_POINTS });
    }
    let xs: Vec<f64> = fitted.iter().map(|&i| points[i].rho.ln()).collect();
    let ys: Vec<f64> = fitted.iter().map(|&i| points[i].distance.ln()).collect();
    let slope = least_squares_slope(&xs, &ys);
    Ok(LimitReport { reference, n, points, floor, fitted, slope })
}

pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Distances to the conforming solution over `rhos` on the `n × n` mesh.
pub fn limit_study(
    case: &ManufacturedCase,
    preset: &Preset,
    rhos: &[f64],
    reference: Reference,
    n: usize,
) -> Result<LimitReport, VerifyError> {
    let mesh = case.mesh(n)?;
    check_limit(case, preset, reference, &mesh)?;
    let spaces = build_spaces(&mesh, preset.spec)?;
    let qd = preset.config(1.0).quad_degree() + EXTRA_QUAD;
    let (ref_fields, size) = limit_reference(&mesh, &spaces, case, reference, qd)?;
    let points = rhos
        .iter()
        .map(|&rho| limit_point(case, preset, reference, &mesh, &ref_fields, rho))
        .collect::<Result<Vec<_>, _>>()?;
    fit_limit(reference, n, points, size)
}

/// `ρ_j = 2^{-j}` for `j = 0..count`.
pub fn halving_sequence(count: usize) -> Vec<f64> {
    (0..count).map(|j| 0.5f64.powi(j as i32)).collect()
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::by_name;
    use crate::verify::cases::{Boundary, CaseId};

    fn row(level: usize, h: f64, e: f64) -> LevelRow {
        let errors = ErrorQuartet { p: e, pcheck: e * h, u: e * e, ucheck: 0.0 };
        LevelRow { level, n: 0, h, dofs: 0, solved_dofs: 0, errors }
    }

    #[test]
    fn eoc_of_synthetic_table() {
        let rows = (0..4).map(|l| row(l, 0.5f64.powi(l as i32), 0.25f64.powi(l as i32))).collect();
        let r = ErrorReport { case: "synthetic", regime: Regime::Grad, rows };
        let e = r.finest_eoc().unwrap();
        assert!((e[0] - 2.0).abs() < 1e-12 && (e[1] - 3.0).abs() < 1e-12 && (e[2] - 4.0).abs() < 1e-12);
        assert!(e[3].is_nan());
        assert_eq!(r.eoc().len(), 3);
    }

    #[test]
    fn dual_norm_of_diagonal_gram() {
        let n = CsrMatrix::from_diagonal(&[4.0, 9.0]);
        // sup (2a + 3b) / sqrt(4a² + 9b²) = sqrt(1 + 1)
        assert!((dual_norm(&[2.0, 3.0], &n).unwrap() - 2f64.sqrt()).abs() < 1e-14);
        assert_eq!(dual_norm(&[], &n).unwrap(), 0.0);
    }

    fn point(rho: f64, distance: f64) -> LimitPoint {
        LimitPoint { rho, distance, residual: 1e-15, functional: 1.0 }
    }

    #[test]
    fn limit_fit_recovers_square_root() {
        let pts: Vec<_> = halving_sequence(10).into_iter().map(|r| point(r, 3.0 * r.sqrt())).collect();
        let rep = fit_limit(Reference::Primal, 4, pts, 1.0).unwrap();
        assert!((rep.slope - 0.5).abs() < 1e-12);
        assert_eq!(rep.fitted, (2..10).collect::<Vec<_>>());
    }

    #[test]
    fn limit_fit_drops_plateau_and_needs_four_points() {
        // distances stall at 1.5625e-12 from j = 6 on; floor = 1e3 · 1e-15 · ref_size
        let pts: Vec<_> = halving_sequence(10).into_iter().map(|r| point(r, r.max(1.0 / 64.0) * 1e-10)).collect();
        let rep = fit_limit(Reference::Mixed, 4, pts.clone(), 2.0).unwrap();
        assert_eq!(rep.fitted, [2, 3, 4, 5]);
        assert!((rep.slope - 1.0).abs() < 1e-12);
        let err = fit_limit(Reference::Mixed, 4, pts, 20.0);
        assert!(matches!(err, Err(VerifyError::TooFewPoints { found: 1, needed: 4 })), "{err:?}");
        assert!(least_squares_slope(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]) == 2.0);
    }

    #[test]
    fn eoc_needs_three_levels() {
        let c = ManufacturedCase::new(CaseId::C1, Boundary::Dirichlet);
        let p = by_name("grad-k0", 0).unwrap();
        let r = eoc_study(&c, &p.config(1.0), Regime::Grad, &[2, 4]);
        assert_eq!(r.unwrap_err(), VerifyError::TooFewLevels(2));
    }

    #[test]
    fn norms_of_wrong_regime_are_refused() {
        let c = ManufacturedCase::new(CaseId::C1, Boundary::Dirichlet);
        let p = by_name("grad-k0", 0).unwrap();
        let r = eoc_study(&c, &p.config(1.0), Regime::Div, &[2, 4, 8]);
        assert!(matches!(r, Err(VerifyError::RegimeMismatch { .. })));
    }

    #[test]
    fn limit_hypotheses_are_checked() {
        let c1 = ManufacturedCase::new(CaseId::C1, Boundary::Dirichlet);
        let c4 = ManufacturedCase::new(CaseId::C4, Boundary::NeumannRightTop);
        let primal = by_name("hdg-grad", 0).unwrap();
        let rhos = halving_sequence(8);
        // C4 has g_D ≠ 0 on the left and bottom sides
        let r = limit_study(&c4, &primal, &rhos, Reference::Primal, 2);
        assert!(matches!(r, Err(VerifyError::NonzeroData { which: "g_D", .. })), "{r:?}");
        let r = limit_study(&c1, &by_name("div-rt0", 0).unwrap(), &rhos, Reference::Primal, 2);
        assert!(matches!(r, Err(VerifyError::RegimeMismatch { .. })));
        let r = limit_study(&c1, &by_name("grad-k0", 0).unwrap(), &rhos, Reference::Primal, 2);
        assert!(matches!(r, Err(VerifyError::Condition(_))));
    }

    #[test]
    fn stability_ratio_ignores_data_scale() {
        // the discrete solution and the data norms are both linear in the data
        let c = ManufacturedCase::new(CaseId::C1, Boundary::NeumannRightTop);
        let p = by_name("hdg-rt", 0).unwrap();
        let s = stability_point(&c, &p, 0.5, 2).unwrap();
        assert!(s.ratio.is_finite() && s.ratio > 0.0);
        assert!(s.data.g_n > 0.0 && s.data.g_d == 0.0 && s.data.f > 0.0, "{:?}", s.data);
    }
}
