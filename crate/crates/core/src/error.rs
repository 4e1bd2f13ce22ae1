use thiserror::Error;

use crate::assembly::AssemblyError;
use crate::conditions::ConditionError;
use crate::eliminate::EliminationError;
use crate::linalg::LinalgError;
use crate::mesh::MeshError;
use crate::polybasis::BasisError;
use crate::verify::VerifyError;

/// Umbrella error for pipelines that cross module boundaries.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum XgError {
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
    #[error(transparent)]
    Verify(#[from] VerifyError),
}

impl XgError {
    /// True when the failure came from the linear solver rather than from the input.
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self,
            XgError::Linalg(_) | XgError::Elimination(EliminationError::Linalg(_))
        )
    }
}
