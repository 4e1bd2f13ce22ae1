//! End-to-end pipeline: spaces, assembly, elimination, solve, recovery.

use crate::assembly::{assemble_system, BlockSystem, MethodConfig, ProblemData, SolutionFields};
use crate::eliminate::{reduce, ReducedSystem};
use crate::error::XgError;
use crate::linalg::SolveReport;
use crate::mesh::Mesh2D;
use crate::spaces::{build_spaces, Spaces};

/// Discrete solution and the systems that produced it.
#[derive(Debug, Clone)]
pub struct Solved {
    pub spaces: Spaces,
    pub fields: SolutionFields,
    pub system: BlockSystem,
    pub reduced_dim: usize,
    pub report: SolveReport,
}

impl Solved {
    pub fn full_dim(&self) -> usize {
        self.system.dim()
    }
}

/// Solves the four-field problem along the elimination path of `config`.
pub fn solve(mesh: &Mesh2D, data: &dyn ProblemData, config: &MethodConfig) -> Result<Solved, XgError> {
    let spaces = build_spaces(mesh, config.spaces)?;
    solve_on(mesh, spaces, data, config)
}

/// As [`solve`] with prebuilt spaces.
pub fn solve_on(mesh: &Mesh2D, spaces: Spaces, data: &dyn ProblemData, config: &MethodConfig) -> Result<Solved, XgError> {
    let system = assemble_system(mesh, &spaces, data, config)?;
    let reduced: ReducedSystem = reduce(mesh, &spaces, data, &system, config)?;
    let (x, report) = reduced.solve_on(&spaces)?;
    let fields = SolutionFields::from_global(&system.layout, &x);
    Ok(Solved { reduced_dim: reduced.dim(), spaces, fields, system, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{Elimination, FnProblem};
    use crate::mesh::neumann_right_top;
    use crate::presets::classical_schemes;

    #[test]
    fn every_path_agrees() {
        let m = Mesh2D::structured_unit_square(2).unwrap().tag_boundary(neumann_right_top).unwrap();
        let data = FnProblem { f: |x: [f64; 2]| x[0], g_d: |x: [f64; 2]| x[1], g_n: |_: [f64; 2], n: [f64; 2]| n[1] };
        for p in classical_schemes(0) {
            let cfg = p.config(0.5);
            let full = solve(&m, &data, &cfg.clone().with_elimination(Elimination::Full)).unwrap();
            let red = solve(&m, &data, &cfg).unwrap();
            let d = full.fields.to_global().iter().zip(red.fields.to_global()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(d < 1e-9, "{}: {d}", p.name);
            assert!(red.reduced_dim <= full.reduced_dim);
        }
    }
}
