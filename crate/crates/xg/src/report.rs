//! CSV and Markdown rendering. Numbers are printed with a fixed format so
//! that identical runs give byte-identical files.

use std::fmt::Write;

use xg_core::verify::{ErrorReport, InfSupPoint, LimitReport, NORM_NAMES};

/// One acceptance check from the `expect` block.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), passed, detail: detail.into() }
    }

    pub fn line(&self) -> String {
        format!("{} {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        format!("{x:.9e}")
    }
}

fn short(x: f64) -> String {
    if x.is_nan() {
        "–".into()
    } else {
        format!("{x:.3e}")
    }
}

fn rate(x: f64) -> String {
    if x.is_nan() {
        "–".into()
    } else {
        format!("{x:.3}")
    }
}

pub fn error_csv(r: &ErrorReport) -> String {
    let mut s = String::from("level,h,dofs");
    for n in NORM_NAMES {
        write!(s, ",err_{n}").unwrap();
    }
    for n in NORM_NAMES {
        write!(s, ",eoc_{n}").unwrap();
    }
    s.push('\n');
    let eoc = r.eoc();
    for (i, row) in r.rows.iter().enumerate() {
        write!(s, "{},{},{}", row.level, num(row.h), row.dofs).unwrap();
        for e in row.errors.values() {
            write!(s, ",{}", num(e)).unwrap();
        }
        for j in 0..4 {
            match i.checked_sub(1).map(|p| eoc[p][j]) {
                Some(v) => write!(s, ",{}", num(v)).unwrap(),
                None => s.push(','),
            }
        }
        s.push('\n');
    }
    s
}

pub fn error_markdown(r: &ErrorReport) -> String {
    let mut s = String::from("| level | n | h | dofs | solved |");
    for n in NORM_NAMES {
        write!(s, " err {n} | eoc {n} |").unwrap();
    }
    s.push_str("\n|---|---|---|---|---|");
    s.push_str(&"---|---|".repeat(4));
    s.push('\n');
    let eoc = r.eoc();
    for (i, row) in r.rows.iter().enumerate() {
        write!(s, "| {} | {} | {} | {} | {} |", row.level, row.n, short(row.h), row.dofs, row.solved_dofs).unwrap();
        for (j, e) in row.errors.values().into_iter().enumerate() {
            let rt = i.checked_sub(1).map_or(f64::NAN, |p| eoc[p][j]);
            write!(s, " {} | {} |", short(e), rate(rt)).unwrap();
        }
        s.push('\n');
    }
    s
}

pub fn infsup_csv(points: &[InfSupPoint]) -> String {
    let mut s = String::from("rho,n,dofs,beta,lambda_max,method\n");
    for p in points {
        writeln!(s, "{},{},{},{},{},{:?}", num(p.rho), p.n, p.dim, num(p.beta), num(p.lambda_max), p.method).unwrap();
    }
    s
}

pub fn infsup_markdown(points: &[InfSupPoint]) -> String {
    let mut s = String::from("| ρ | n | dofs | β_h | λ_max |\n|---|---|---|---|---|\n");
    for p in points {
        writeln!(s, "| {} | {} | {} | {:.4} | {:.4} |", short(p.rho), p.n, p.dim, p.beta, p.lambda_max).unwrap();
    }
    s
}

pub fn limit_csv(r: &LimitReport) -> String {
    let mut s = String::from("j,rho,distance,residual,functional,fitted\n");
    for (j, p) in r.points.iter().enumerate() {
        let fitted = r.fitted.contains(&j) as u8;
        writeln!(s, "{j},{},{},{},{},{fitted}", num(p.rho), num(p.distance), num(p.residual), num(p.functional)).unwrap();
    }
    s
}

pub fn limit_markdown(r: &LimitReport) -> String {
    let mut s = String::from("| j | ρ | distance | residual | fitted |\n|---|---|---|---|---|\n");
    for (j, p) in r.points.iter().enumerate() {
        let f = if r.fitted.contains(&j) { "yes" } else { "" };
        writeln!(s, "| {j} | {} | {} | {} | {f} |", short(p.rho), short(p.distance), short(p.residual)).unwrap();
    }
    writeln!(s, "\nfitted slope {} over {} points (noise floor {})", rate(r.slope), r.fitted.len(), short(r.floor)).unwrap();
    s
}

/// One row of the method zoo.
#[derive(Debug, Clone, PartialEq)]
pub struct ZooRow {
    pub preset: &'static str,
    pub method: &'static str,
    pub spaces: String,
    pub regime: &'static str,
    pub n: usize,
    pub rho: f64,
    pub dofs: usize,
    pub reduced_dofs: usize,
    pub beta: f64,
    pub lambda_max: f64,
    /// Largest relative deviation of the eliminated `(p, u)` from the full solve.
    pub elimination_defect: f64,
}

pub fn zoo_csv(rows: &[ZooRow]) -> String {
    let mut s = String::from("preset,method,spaces,regime,n,rho,dofs,reduced_dofs,beta_h,lambda_max,elimination_defect\n");
    for r in rows {
        writeln!(
            s,
            "{},\"{}\",{},{},{},{},{},{},{},{},{}",
            r.preset,
            r.method,
            r.spaces,
            r.regime,
            r.n,
            num(r.rho),
            r.dofs,
            r.reduced_dofs,
            num(r.beta),
            num(r.lambda_max),
            num(r.elimination_defect)
        )
        .unwrap();
    }
    s
}

pub fn zoo_markdown(rows: &[ZooRow]) -> String {
    let mut s = String::from(
        "| preset | method | Q / Q̌ / V / V̌ | regime | dofs | solved | β_h | elim. defect |\n|---|---|---|---|---|---|---|---|\n",
    );
    for r in rows {
        writeln!(
            s,
            "| {} | {} | {} | {} | {} | {} | {:.4} | {} |",
            r.preset,
            r.method,
            r.spaces,
            r.regime,
            r.dofs,
            r.reduced_dofs,
            r.beta,
            short(r.elimination_defect)
        )
        .unwrap();
    }
    s
}

pub fn checks_markdown(checks: &[Check]) -> String {
    if checks.is_empty() {
        return "no acceptance checks configured\n".into();
    }
    checks.iter().map(|c| format!("- {}\n", c.line())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use xg_core::assembly::Regime;
    use xg_core::verify::{ErrorQuartet, LevelRow};

    #[test]
    fn error_table_columns_are_fixed() {
        let row = |level, h: f64| LevelRow {
            level,
            n: 0,
            h,
            dofs: 10,
            solved_dofs: 5,
            errors: ErrorQuartet { p: h, pcheck: h * h, u: h, ucheck: 0.0 },
        };
        let r = ErrorReport { case: "C1", regime: Regime::Grad, rows: vec![row(0, 0.5), row(1, 0.25)] };
        let csv = error_csv(&r);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(
            lines[0],
            "level,h,dofs,err_p,err_pcheck,err_u,err_ucheck,eoc_p,eoc_pcheck,eoc_u,eoc_ucheck"
        );
        assert!(lines[1].ends_with(",,,,"));
        assert_eq!(lines[2].split(',').nth(7), Some("1.000000000e0"));
        assert_eq!(lines[2].split(',').nth(10), Some("nan"));
    }
}
