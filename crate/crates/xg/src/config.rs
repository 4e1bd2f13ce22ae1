//! JSON experiment files: one file describes one experiment.
//!
//! ```json
//! {
//!   "case": "C1",
//!   "boundary": "dirichlet",
//!   "preset": "grad-k0",
//!   "levels": [4, 8, 16, 32],
//!   "rho": 1.0,
//!   "expect": { "min_eoc": 0.85 }
//! }
//! ```
//!
//! Instead of `preset`, a `spaces` object with a `regime` selects a custom
//! configuration; its conditions are checked before anything is solved.

use std::path::Path;

use serde::Deserialize;
use xg_core::assembly::{Elimination, MethodConfig, Regime};
use xg_core::conditions::ConditionError;
use xg_core::presets::{by_name, Claim, Preset};
use xg_core::spaces::{FluxFamily, SpaceSpec};
use xg_core::verify::{halving_sequence, Boundary, CaseId, ManufacturedCase, Reference};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Solve,
    Eoc,
    Infsup,
    Limit,
    Zoo,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Solve => "solve",
            CommandKind::Eoc => "eoc",
            CommandKind::Infsup => "infsup",
            CommandKind::Limit => "limit",
            CommandKind::Zoo => "zoo",
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
enum CaseName {
    C1,
    C2,
    C3,
    C4,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum BoundaryName {
    #[default]
    Dirichlet,
    NeumannRightTop,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
enum RegimeName {
    Grad,
    Div,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
enum FluxName {
    Pk,
    Rt,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum EliminationName {
    Full,
    Pcheck,
    Ucheck,
    Both,
    HybridUhat,
    WgPhat,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
enum ReferenceName {
    Primal,
    Mixed,
}

/// Custom spaces; `null` trace degrees are the trivial space `{0}`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpacesFile {
    flux: FluxName,
    p: usize,
    pcheck: Option<usize>,
    u: usize,
    ucheck: Option<usize>,
}

/// Acceptance checks; absent entries are not checked.
#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Expect {
    /// Every finite EOC on the finest pair must reach this rate.
    pub min_eoc: Option<f64>,
    /// Every error norm on every level must stay below this value.
    pub max_error: Option<f64>,
    /// Lower bound for every measured `β_h`.
    pub min_beta: Option<f64>,
    /// Upper bound for `max β_h / min β_h` over the sweep.
    pub max_beta_variation: Option<f64>,
    /// Lower bound for the fitted `ρ → 0` slope.
    pub min_limit_slope: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct Dump {
    #[serde(default)]
    pub mesh: bool,
    #[serde(default)]
    pub matrix: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    command: Option<CommandKind>,
    case: CaseName,
    #[serde(default)]
    boundary: BoundaryName,
    preset: Option<String>,
    #[serde(default)]
    k: usize,
    spaces: Option<SpacesFile>,
    regime: Option<RegimeName>,
    coupling: Option<f64>,
    elimination: Option<EliminationName>,
    levels: Option<Vec<usize>>,
    rho: Option<f64>,
    rho_sequence: Option<Vec<f64>>,
    rho_halvings: Option<usize>,
    reference: Option<ReferenceName>,
    #[serde(default)]
    expect: Expect,
    #[serde(default)]
    dump: Dump,
}

/// A validated experiment.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub command: CommandKind,
    pub case: ManufacturedCase,
    pub preset: Preset,
    pub k: usize,
    /// Mesh sizes `n` (an `n × n` grid per level).
    pub levels: Vec<usize>,
    pub rho: f64,
    pub rhos: Vec<f64>,
    pub reference: Reference,
    pub expect: Expect,
    pub dump: Dump,
}

const MAX_K: usize = 4;
const MAX_N: usize = 256;

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl Experiment {
    pub fn from_path(path: &Path, command: CommandKind) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text, command)
    }

    pub fn from_json(text: &str, command: CommandKind) -> Result<Self, CliError> {
        let file: ConfigFile = serde_json::from_str(text).map_err(|e| config_err(format!("malformed config: {e}")))?;
        Self::validate(file, command)
    }

    fn validate(f: ConfigFile, command: CommandKind) -> Result<Self, CliError> {
        if let Some(c) = f.command {
            if c != command {
                return Err(config_err(format!("config is for `{}`, invoked as `{}`", c.name(), command.name())));
            }
        }
        if f.k > MAX_K {
            return Err(config_err(format!("k = {} exceeds the supported maximum {MAX_K}", f.k)));
        }
        let case = ManufacturedCase::new(
            match f.case {
                CaseName::C1 => CaseId::C1,
                CaseName::C2 => CaseId::C2,
                CaseName::C3 => CaseId::C3,
                CaseName::C4 => CaseId::C4,
            },
            match f.boundary {
                BoundaryName::Dirichlet => Boundary::Dirichlet,
                BoundaryName::NeumannRightTop => Boundary::NeumannRightTop,
            },
        );
        let mut preset = match (&f.preset, &f.spaces) {
            (Some(name), None) => {
                if f.regime.is_some() {
                    return Err(config_err("`regime` only applies to custom `spaces`"));
                }
                by_name(name, f.k).ok_or_else(|| config_err(format!("unknown preset `{name}`")))?
            }
            (None, Some(s)) => custom_preset(s, f.regime)?,
            (Some(_), Some(_)) => return Err(config_err("give either `preset` or `spaces`, not both")),
            (None, None) if command == CommandKind::Zoo => by_name("hdg-grad", f.k).expect("built-in preset"),
            (None, None) => return Err(config_err("missing `preset` (or custom `spaces`)")),
        };
        if let Some(c) = f.coupling {
            if !(c.is_finite() && c > 0.0) {
                return Err(config_err(format!("coupling must be positive, got {c}")));
            }
            preset.coupling = c;
        }
        if let Some(e) = f.elimination {
            preset.elimination = elimination(e);
        }
        preset.check().map_err(|e: ConditionError| CliError::Condition(preset.name.to_string(), e))?;

        let default_levels: &[usize] = match command {
            CommandKind::Eoc => &[4, 8, 16, 32],
            CommandKind::Infsup => &[2, 4, 8],
            CommandKind::Limit => &[8],
            CommandKind::Solve | CommandKind::Zoo => &[4],
        };
        let levels = f.levels.unwrap_or_else(|| default_levels.to_vec());
        if levels.is_empty() {
            return Err(config_err("`levels` is empty"));
        }
        if let Some(&n) = levels.iter().find(|&&n| n == 0 || n > MAX_N) {
            return Err(config_err(format!("mesh size n = {n} outside 1..={MAX_N}")));
        }
        if command == CommandKind::Eoc {
            if levels.len() < 3 {
                return Err(config_err(format!("`eoc` needs at least 3 levels, got {}", levels.len())));
            }
            if levels.windows(2).any(|w| w[1] <= w[0]) {
                return Err(config_err("`levels` must increase for `eoc`"));
            }
        }

        let rho = f.rho.unwrap_or(1.0);
        let rhos = match (f.rho_sequence, f.rho_halvings) {
            (Some(_), Some(_)) => return Err(config_err("give either `rho_sequence` or `rho_halvings`")),
            (Some(v), None) => v,
            (None, Some(m)) => halving_sequence(m),
            (None, None) => match command {
                CommandKind::Limit => halving_sequence(14),
                CommandKind::Infsup => halving_sequence(7),
                _ => vec![rho],
            },
        };
        if rhos.is_empty() {
            return Err(config_err("the ρ sequence is empty"));
        }
        if let Some(r) = rhos.iter().chain([&rho]).find(|r| !(r.is_finite() && **r > 0.0)) {
            return Err(config_err(format!("ρ must be positive and finite, got {r}")));
        }

        let reference = match (f.reference, preset.claim) {
            (Some(ReferenceName::Primal), _) => Reference::Primal,
            (Some(ReferenceName::Mixed), _) => Reference::Mixed,
            (None, Claim::Proven(Regime::Div)) => Reference::Mixed,
            (None, _) => Reference::Primal,
        };
        Ok(Experiment { command, case, preset, k: f.k, levels, rho, rhos, reference, expect: f.expect, dump: f.dump })
    }

    pub fn config(&self, rho: f64) -> MethodConfig {
        self.preset.config(rho)
    }

    pub fn finest(&self) -> usize {
        *self.levels.last().expect("validated non-empty")
    }
}

fn elimination(e: EliminationName) -> Elimination {
    match e {
        EliminationName::Full => Elimination::Full,
        EliminationName::Pcheck => Elimination::Pcheck,
        EliminationName::Ucheck => Elimination::Ucheck,
        EliminationName::Both => Elimination::Both,
        EliminationName::HybridUhat => Elimination::HybridUhat,
        EliminationName::WgPhat => Elimination::WgPhat,
    }
}

fn custom_preset(s: &SpacesFile, regime: Option<RegimeName>) -> Result<Preset, CliError> {
    let regime = match regime {
        Some(RegimeName::Grad) => Regime::Grad,
        Some(RegimeName::Div) => Regime::Div,
        None => return Err(config_err("custom `spaces` need a `regime` (\"grad\" or \"div\")")),
    };
    for d in [Some(s.p), s.pcheck, Some(s.u), s.ucheck].into_iter().flatten() {
        if d > MAX_K + 1 {
            return Err(config_err(format!("degree {d} exceeds the supported maximum {}", MAX_K + 1)));
        }
    }
    let family = match s.flux {
        FluxName::Pk => FluxFamily::VectorPk,
        FluxName::Rt => FluxFamily::BrokenRT,
    };
    Ok(Preset {
        name: "custom",
        method: "user-defined spaces",
        spec: SpaceSpec::new(family, s.p, s.pcheck, s.u, s.ucheck),
        claim: Claim::Proven(regime),
        elimination: Elimination::Full,
        coupling: 1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, cmd: CommandKind) -> Result<Experiment, CliError> {
        Experiment::from_json(text, cmd)
    }

    #[test]
    fn defaults_per_command() {
        let e = parse(r#"{"case": "C1", "preset": "grad-k0"}"#, CommandKind::Eoc).unwrap();
        assert_eq!(e.levels, [4, 8, 16, 32]);
        assert_eq!(e.rhos, [1.0]);
        let e = parse(r#"{"case": "C4", "boundary": "neumann-right-top", "preset": "div-rt0"}"#, CommandKind::Limit).unwrap();
        assert_eq!(e.rhos.len(), 14);
        assert_eq!(e.reference, Reference::Mixed);
    }

    #[test]
    fn malformed_and_invalid_configs_are_config_errors() {
        for (text, cmd) in [
            ("{", CommandKind::Solve),
            (r#"{"case": "C9", "preset": "grad-k0"}"#, CommandKind::Solve),
            (r#"{"case": "C1", "preset": "nope"}"#, CommandKind::Solve),
            (r#"{"case": "C1", "preset": "grad-k0", "typo": 1}"#, CommandKind::Solve),
            (r#"{"case": "C1", "preset": "grad-k0", "levels": [4, 8]}"#, CommandKind::Eoc),
            (r#"{"case": "C1", "preset": "grad-k0", "rho": -1}"#, CommandKind::Solve),
            (r#"{"command": "zoo", "case": "C1"}"#, CommandKind::Eoc),
        ] {
            let e = parse(text, cmd).unwrap_err();
            assert_eq!(e.exit_code(), 2, "{text}: {e}");
        }
    }

    #[test]
    fn violated_condition_is_named() {
        // ∇V^2 ⊄ Q^0: the gradient regime needs condition (b)
        let text = r#"{"case": "C1", "spaces": {"flux": "pk", "p": 0, "pcheck": 0, "u": 2, "ucheck": 0}, "regime": "grad"}"#;
        let e = parse(text, CommandKind::Solve).unwrap_err();
        assert!(matches!(e, CliError::Condition(..)), "{e}");
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("⊂"), "{e}");
    }

    #[test]
    fn overrides_apply() {
        let text = r#"{"case": "C1", "preset": "hdg-grad", "k": 1, "coupling": 0.5, "elimination": "full"}"#;
        let e = parse(text, CommandKind::Solve).unwrap();
        assert_eq!(e.preset.coupling, 0.5);
        assert_eq!(e.preset.elimination, Elimination::Full);
        assert_eq!(e.preset.spec.k_u, 2);
    }
}
