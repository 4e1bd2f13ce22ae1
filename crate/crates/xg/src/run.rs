//! The five experiment commands. Each returns its artifacts in memory; the
//! caller writes them only after everything succeeded.

use std::fmt::Write;

use rayon::prelude::*;
use xg_core::assembly::{Elimination, SolutionFields};
use xg_core::presets::{classical_schemes, Preset};
use xg_core::solver::solve;
use xg_core::spaces::{build_spaces, FieldKind};
use xg_core::verify::studies::{check_limit, fit_limit, limit_point, limit_reference};
use xg_core::verify::{
    eoc_level_at, error_norms_at, infsup_point, ErrorReport, InfSupPoint, LevelRow, LimitReport, VerifyError, EXTRA_QUAD,
};

use crate::config::{CommandKind, Experiment};
use crate::error::CliError;
use crate::report::{self, Check, ZooRow};

#[derive(Debug, Clone, Default)]
pub struct Outcome {
    /// `(file name, contents)` in write order.
    pub artifacts: Vec<(String, String)>,
    pub checks: Vec<Check>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub fn run(exp: &Experiment) -> Result<Outcome, CliError> {
    match exp.command {
        CommandKind::Solve => run_solve(exp),
        CommandKind::Eoc => run_eoc(exp),
        CommandKind::Infsup => run_infsup(exp),
        CommandKind::Limit => run_limit(exp),
        CommandKind::Zoo => run_zoo(exp),
    }
}

fn header(exp: &Experiment, title: &str) -> String {
    let p = &exp.preset;
    let mut s = format!("# {title}\n\n");
    writeln!(s, "- case: {} ({:?} boundary)", exp.case.name(), exp.case.boundary).unwrap();
    writeln!(s, "- preset: {} ({})", p.name, p.method).unwrap();
    writeln!(s, "- spaces: {}", p.spaces_label()).unwrap();
    writeln!(s, "- regime: {}; coupling {}; elimination {:?}", p.claim.label(), p.coupling, p.elimination).unwrap();
    s
}

fn error_checks(exp: &Experiment, r: &ErrorReport, checks: &mut Vec<Check>) {
    if let Some(tol) = exp.expect.max_error {
        let worst = r.rows.iter().flat_map(|row| row.errors.values()).fold(0.0, f64::max);
        checks.push(Check::new("max_error", worst <= tol, format!("largest error {worst:.3e} (limit {tol:.1e})")));
    }
}

fn errors_at_levels(exp: &Experiment) -> Result<ErrorReport, CliError> {
    let config = exp.config(exp.rho);
    let regime = exp.preset.claim.norm_regime();
    let rows: Vec<LevelRow> = exp
        .levels
        .par_iter()
        .enumerate()
        .map(|(l, &n)| eoc_level_at(&exp.case, &config, regime, exp.rho, l, n))
        .collect::<Result<_, VerifyError>>()?;
    Ok(ErrorReport { case: exp.case.name(), regime, rows })
}

fn run_solve(exp: &Experiment) -> Result<Outcome, CliError> {
    let config = exp.config(exp.rho);
    let n = exp.finest();
    let mesh = exp.case.mesh(n).map_err(VerifyError::from)?;
    let s = solve(&mesh, &exp.case, &config).map_err(VerifyError::from)?;
    let regime = exp.preset.claim.norm_regime();
    let errors = error_norms_at(&mesh, &s.spaces, &s.fields, &exp.case, regime, exp.rho, config.quad_degree() + EXTRA_QUAD)?;
    let row = LevelRow { level: 0, n, h: mesh.max_h(), dofs: s.full_dim(), solved_dofs: s.reduced_dim, errors };
    let r = ErrorReport { case: exp.case.name(), regime, rows: vec![row] };

    let mut out = Outcome::default();
    error_checks(exp, &r, &mut out.checks);
    let mut md = header(exp, "solve");
    writeln!(md, "- mesh: {n} × {n}, ρ = {}", exp.rho).unwrap();
    writeln!(md, "- full system {} DOFs, solved system {} DOFs", s.full_dim(), s.reduced_dim).unwrap();
    writeln!(
        md,
        "- relative residual {:.3e}, LU fill {}, pivots in [{:.3e}, {:.3e}]\n",
        s.report.relative_residual, s.report.fill, s.report.min_pivot, s.report.max_pivot
    )
    .unwrap();
    md.push_str(&report::error_markdown(&r));
    md.push('\n');
    md.push_str(&report::checks_markdown(&out.checks));
    out.artifacts.push(("solve.csv".into(), report::error_csv(&r)));
    out.artifacts.push(("summary.md".into(), md));
    if exp.dump.mesh {
        let mut d = String::new();
        mesh.write_dump(&mut d).expect("writing to a String");
        out.artifacts.push(("mesh.txt".into(), d));
    }
    if exp.dump.matrix {
        let mut d = String::new();
        s.system.matrix.write_coo(&mut d).expect("writing to a String");
        out.artifacts.push(("matrix.coo".into(), d));
    }
    Ok(out)
}

fn run_eoc(exp: &Experiment) -> Result<Outcome, CliError> {
    let r = errors_at_levels(exp)?;
    let mut out = Outcome::default();
    if let Some(min) = exp.expect.min_eoc {
        let finest = r.finest_eoc().unwrap_or([f64::NAN; 4]);
        let low: Vec<String> = xg_core::verify::NORM_NAMES
            .iter()
            .zip(finest)
            .filter(|(_, e)| !e.is_nan() && *e < min)
            .map(|(n, e)| format!("{n} {e:.3}"))
            .collect();
        let rates = finest.map(|e| format!("{e:.3}")).join(", ");
        let detail = format!("finest-pair EOC [{rates}] (minimum {min})");
        out.checks.push(Check::new("min_eoc", low.is_empty(), detail));
    }
    error_checks(exp, &r, &mut out.checks);
    let mut md = header(exp, "convergence study");
    writeln!(md, "- ρ = {}\n", exp.rho).unwrap();
    md.push_str(&report::error_markdown(&r));
    md.push('\n');
    md.push_str(&report::checks_markdown(&out.checks));
    out.artifacts.push(("eoc.csv".into(), report::error_csv(&r)));
    out.artifacts.push(("summary.md".into(), md));
    Ok(out)
}

fn beta_checks(exp: &Experiment, points: &[InfSupPoint], checks: &mut Vec<Check>) {
    let lo = points.iter().map(|p| p.beta).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p.beta).fold(0.0, f64::max);
    if let Some(min) = exp.expect.min_beta {
        checks.push(Check::new("min_beta", lo >= min, format!("smallest β_h {lo:.4} (minimum {min})")));
    }
    if let Some(max) = exp.expect.max_beta_variation {
        let v = hi / lo;
        checks.push(Check::new("max_beta_variation", v < max, format!("max/min β_h = {v:.3} (limit {max})")));
    }
}

fn run_infsup(exp: &Experiment) -> Result<Outcome, CliError> {
    let jobs: Vec<(usize, f64)> = exp.levels.iter().flat_map(|&n| exp.rhos.iter().map(move |&r| (n, r))).collect();
    let points: Vec<InfSupPoint> = jobs
        .par_iter()
        .map(|&(n, rho)| infsup_point(&exp.case, &exp.preset, rho, n))
        .collect::<Result<_, VerifyError>>()?;
    let mut out = Outcome::default();
    beta_checks(exp, &points, &mut out.checks);
    let mut md = header(exp, "inf-sup sweep");
    md.push('\n');
    md.push_str(&report::infsup_markdown(&points));
    md.push('\n');
    md.push_str(&report::checks_markdown(&out.checks));
    out.artifacts.push(("infsup.csv".into(), report::infsup_csv(&points)));
    out.artifacts.push(("summary.md".into(), md));
    Ok(out)
}

/// Limit study with the per-`ρ` solves fanned out.
pub fn limit_report(exp: &Experiment) -> Result<LimitReport, CliError> {
    let n = exp.finest();
    let mesh = exp.case.mesh(n).map_err(VerifyError::from)?;
    check_limit(&exp.case, &exp.preset, exp.reference, &mesh)?;
    let spaces = build_spaces(&mesh, exp.preset.spec).map_err(VerifyError::from)?;
    let qd = exp.preset.config(1.0).quad_degree() + EXTRA_QUAD;
    let (reference, size) = limit_reference(&mesh, &spaces, &exp.case, exp.reference, qd)?;
    let points = exp
        .rhos
        .par_iter()
        .map(|&rho| limit_point(&exp.case, &exp.preset, exp.reference, &mesh, &reference, rho))
        .collect::<Result<Vec<_>, _>>()?;
    match fit_limit(exp.reference, n, points.clone(), size) {
        Ok(r) => Ok(r),
        // report the points even when too few lie above the noise floor
        Err(VerifyError::TooFewPoints { .. }) => {
            Ok(LimitReport { reference: exp.reference, n, points, floor: f64::NAN, fitted: vec![], slope: f64::NAN })
        }
        Err(e) => Err(e.into()),
    }
}

fn run_limit(exp: &Experiment) -> Result<Outcome, CliError> {
    let r = limit_report(exp)?;
    let mut out = Outcome::default();
    if let Some(min) = exp.expect.min_limit_slope {
        let enough = r.fitted.len() >= xg_core::verify::studies::LIMIT_MIN_POINTS;
        let detail = format!("slope {:.3} over {} points (minimum {min})", r.slope, r.fitted.len());
        out.checks.push(Check::new("min_limit_slope", enough && r.slope >= min, detail));
    }
    let mut md = header(exp, &format!("ρ → 0 limit to the conforming {} method", r.reference.label()));
    writeln!(md, "- mesh: {n} × {n}\n", n = r.n).unwrap();
    md.push_str(&report::limit_markdown(&r));
    md.push('\n');
    md.push_str(&report::checks_markdown(&out.checks));
    out.artifacts.push(("limit.csv".into(), report::limit_csv(&r)));
    out.artifacts.push(("summary.md".into(), md));
    Ok(out)
}

fn max_rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / scale
}

/// Largest relative deviation of `(p, u)` between the preset's elimination
/// path and the full four-field solve, and the solved dimension.
pub fn elimination_defect(exp_case: &xg_core::verify::ManufacturedCase, preset: &Preset, rho: f64, n: usize) -> Result<(f64, usize, usize), CliError> {
    let mesh = exp_case.mesh(n).map_err(VerifyError::from)?;
    let fast = solve(&mesh, exp_case, &preset.config(rho)).map_err(VerifyError::from)?;
    let full = solve(&mesh, exp_case, &preset.config(rho).with_elimination(Elimination::Full)).map_err(VerifyError::from)?;
    let field = |s: &SolutionFields, f| s.field(f).to_vec();
    let d = max_rel_diff(&field(&fast.fields, FieldKind::P), &field(&full.fields, FieldKind::P))
        .max(max_rel_diff(&field(&fast.fields, FieldKind::U), &field(&full.fields, FieldKind::U)));
    Ok((d, fast.full_dim(), fast.reduced_dim))
}

fn run_zoo(exp: &Experiment) -> Result<Outcome, CliError> {
    let n = exp.finest();
    let rows: Vec<ZooRow> = classical_schemes(exp.k)
        .par_iter()
        .map(|p| {
            let beta = infsup_point(&exp.case, p, exp.rho, n)?;
            let (defect, dofs, reduced) = elimination_defect(&exp.case, p, exp.rho, n)?;
            Ok(ZooRow {
                preset: p.name,
                method: p.method,
                spaces: p.spaces_label(),
                regime: p.claim.label(),
                n,
                rho: exp.rho,
                dofs,
                reduced_dofs: reduced,
                beta: beta.beta,
                lambda_max: beta.lambda_max,
                elimination_defect: defect,
            })
        })
        .collect::<Result<_, CliError>>()?;
    let mut out = Outcome::default();
    if let Some(min) = exp.expect.min_beta {
        let lo = rows.iter().map(|r| r.beta).fold(f64::INFINITY, f64::min);
        out.checks.push(Check::new("min_beta", lo >= min, format!("smallest β_h {lo:.4} (minimum {min})")));
    }
    let mut md = format!("# Classical-scheme zoo\n\n- case: {} ({:?} boundary)\n", exp.case.name(), exp.case.boundary);
    writeln!(md, "- k = {}, mesh {n} × {n}, ρ = {}\n", exp.k, exp.rho).unwrap();
    md.push_str(&report::zoo_markdown(&rows));
    md.push('\n');
    md.push_str(&report::checks_markdown(&out.checks));
    out.artifacts.push(("zoo.csv".into(), report::zoo_csv(&rows)));
    out.artifacts.push(("summary.md".into(), md));
    Ok(out)
}
