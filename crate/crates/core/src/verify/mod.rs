//! Verification: manufactured solutions, error norms, conforming reference
//! solvers and the convergence / inf-sup / stability / limit studies.

pub mod cases;
pub mod conforming;
pub mod errors;
pub mod studies;

use thiserror::Error;

pub use cases::{builtin_cases, Boundary, CaseId, DataPart, ExactSolution, ManufacturedCase, Smoothness};
pub use conforming::{conforming_mixed_solve, conforming_primal_solve, MixedReference, PrimalReference};
pub use errors::{best_approximation, error_norms, error_norms_at, interpolate, ErrorQuartet, EXTRA_QUAD, NORM_NAMES};
pub use studies::{
    data_norms, dual_norm, eoc_level, eoc_level_at, eoc_study, halving_sequence, infsup_point, infsup_sweep, limit_study,
    stability_point, stability_study, DataNorms, ErrorReport, InfSupPoint, InfSupSweep, LevelRow, LimitPoint,
    LimitReport, Reference, StabilityPoint, StabilityReport,
};

use crate::assembly::{AssemblyError, Regime};
use crate::conditions::ConditionError;
use crate::eliminate::EliminationError;
use crate::error::XgError;
use crate::linalg::LinalgError;
use crate::mesh::MeshError;
use crate::polybasis::BasisError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error("norms of the {requested:?} regime requested, configuration is {configured:?}")]
    RegimeMismatch { requested: Regime, configured: Option<Regime> },
    #[error("a convergence study needs at least 3 levels, got {0}")]
    TooFewLevels(usize),
    #[error("conforming primal reference supports degree 1 or 2 within V_h, got {0}")]
    UnsupportedDegree(usize),
    #[error("unsupported reference: {0}")]
    UnsupportedReference(&'static str),
    #[error("the limit theorem needs {which} = 0, found |{which}| = {value:e}")]
    NonzeroData { which: &'static str, value: f64 },
    #[error("only {found} usable points for the slope fit, need {needed}")]
    TooFewPoints { found: usize, needed: usize },
    #[error("local mass matrix of cell {0} is singular")]
    SingularLocalMass(usize),
    #[error("norm matrix is not positive definite")]
    NotSpd,
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Elimination(#[from] EliminationError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Condition(#[from] ConditionError),
}

impl From<XgError> for VerifyError {
    fn from(e: XgError) -> Self {
        match e {
            XgError::Mesh(e) => e.into(),
            XgError::Basis(e) => e.into(),
            XgError::Assembly(e) => e.into(),
            XgError::Elimination(e) => e.into(),
            XgError::Linalg(e) => e.into(),
            XgError::Condition(e) => e.into(),
            XgError::Verify(e) => e,
        }
    }
}
