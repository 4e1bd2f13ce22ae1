use std::io;

use thiserror::Error;
use xg_core::conditions::ConditionError;
use xg_core::eliminate::EliminationError;
use xg_core::verify::VerifyError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error("preset `{0}`: {1}")]
    Condition(String, ConditionError),
    #[error("solver failure: {0}")]
    Solver(VerifyError),
    #[error("cannot write artifacts: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    /// 2 for anything wrong with the invocation or the experiment, 3 for
    /// numerical failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Config(_) | CliError::Condition(..) => 2,
            CliError::Solver(_) | CliError::Io(_) => 3,
        }
    }
}

impl From<VerifyError> for CliError {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::Condition(c) => CliError::Condition("configured".into(), c),
            VerifyError::RegimeMismatch { .. }
            | VerifyError::TooFewLevels(_)
            | VerifyError::UnsupportedDegree(_)
            | VerifyError::UnsupportedReference(_)
            | VerifyError::NonzeroData { .. }
            | VerifyError::Basis(_)
            | VerifyError::Mesh(_)
            | VerifyError::Assembly(_)
            | VerifyError::Elimination(
                EliminationError::Condition(_) | EliminationError::Unsupported(_) | EliminationError::Assembly(_),
            ) => CliError::Config(e.to_string()),
            other => CliError::Solver(other),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use xg_core::linalg::LinalgError;

    #[test]
    fn numerical_failures_exit_three() {
        let e: CliError = VerifyError::Linalg(LinalgError::Singular { column: 3 }).into();
        assert_eq!(e.exit_code(), 3);
        let e: CliError = VerifyError::Elimination(EliminationError::ZeroPivot(0)).into();
        assert_eq!(e.exit_code(), 3);
    }

    #[test]
    fn unmet_hypotheses_are_config_errors() {
        let e: CliError = VerifyError::NonzeroData { which: "g_D", value: 1.0 }.into();
        assert_eq!(e.exit_code(), 2);
        let e: CliError = VerifyError::Elimination(EliminationError::Unsupported("WG")).into();
        assert_eq!(e.exit_code(), 2);
    }
}
