//! Method configuration: spaces, penalty scaling and elimination mode.

use alloc::vec::Vec;

use crate::spaces::SpaceSpec;

/// Which of the two norm systems (and proofs) a configuration targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Regime {
    Grad,
    Div,
}

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Regime::Grad => "gradient-based",
            Regime::Div => "divergence-based",
        }
    }
}

/// Stabilization parameters `τ` (for `p̌`) and `η` (for `ǔ`), constant per edge.
#[derive(Debug, Clone, PartialEq)]
pub enum Penalty {
    /// `τ = (ρ h_e)⁻¹`, `η = c_η ρ h_e`.
    Grad { rho: f64, c_eta: f64 },
    /// `η = (ρ h_e)⁻¹`, `τ = c_τ ρ h_e`.
    Div { rho: f64, c_tau: f64 },
    /// The same `τ`, `η` on every edge.
    Manual { tau: f64, eta: f64 },
    /// Per-edge values, indexed by global edge number.
    PerEdge { tau: Vec<f64>, eta: Vec<f64> },
}

impl Penalty {
    pub fn grad(rho: f64) -> Self {
        Penalty::Grad { rho, c_eta: 1.0 }
    }

    pub fn div(rho: f64) -> Self {
        Penalty::Div { rho, c_tau: 1.0 }
    }

    pub fn tau(&self, edge: usize, h_e: f64) -> f64 {
        match self {
            Penalty::Grad { rho, .. } => 1.0 / (rho * h_e),
            Penalty::Div { rho, c_tau } => c_tau * rho * h_e,
            Penalty::Manual { tau, .. } => *tau,
            Penalty::PerEdge { tau, .. } => tau.get(edge).copied().unwrap_or(f64::NAN),
        }
    }

    pub fn eta(&self, edge: usize, h_e: f64) -> f64 {
        match self {
            Penalty::Grad { rho, c_eta } => c_eta * rho * h_e,
            Penalty::Div { rho, .. } => 1.0 / (rho * h_e),
            Penalty::Manual { eta, .. } => *eta,
            Penalty::PerEdge { eta, .. } => eta.get(edge).copied().unwrap_or(f64::NAN),
        }
    }

    pub fn regime(&self) -> Option<Regime> {
        match self {
            Penalty::Grad { .. } => Some(Regime::Grad),
            Penalty::Div { .. } => Some(Regime::Div),
            _ => None,
        }
    }

    pub fn rho(&self) -> Option<f64> {
        match self {
            Penalty::Grad { rho, .. } | Penalty::Div { rho, .. } => Some(*rho),
            _ => None,
        }
    }

    /// Same scaling with a different `ρ`.
    pub fn with_rho(&self, rho: f64) -> Self {
        match self {
            Penalty::Grad { c_eta, .. } => Penalty::Grad { rho, c_eta: *c_eta },
            Penalty::Div { c_tau, .. } => Penalty::Div { rho, c_tau: *c_tau },
            other => other.clone(),
        }
    }

    /// `η τ` if it is the same on every edge.
    pub fn eta_tau_product(&self) -> Option<f64> {
        match self {
            Penalty::Grad { c_eta, .. } => Some(*c_eta),
            Penalty::Div { c_tau, .. } => Some(*c_tau),
            Penalty::Manual { tau, eta } => Some(tau * eta),
            Penalty::PerEdge { tau, eta } => {
                let first = tau.first().zip(eta.first()).map(|(t, e)| t * e)?;
                tau.iter()
                    .zip(eta)
                    .all(|(t, e)| (t * e - first).abs() <= 1e-14 * first.abs())
                    .then_some(first)
            }
        }
    }
}

/// How the four-field system is solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Elimination {
    /// Solve the full `(p, p̌, u, ǔ)` system.
    Full,
    /// Eliminate `p̌` (HDG family).
    Pcheck,
    /// Eliminate `ǔ` (WG family).
    Ucheck,
    /// Eliminate both (DG, LDG, mixed DG).
    Both,
    /// Eliminate `p̌`, change variables to `û` and condense onto `û`.
    HybridUhat,
    /// Three-field `(p, p̂, u)` assembly.
    WgPhat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodConfig {
    pub spaces: SpaceSpec,
    pub penalty: Penalty,
    /// Quadrature exactness; `None` means `2 max(k) + 3`.
    pub quad_degree: Option<usize>,
    pub elimination: Elimination,
}

impl MethodConfig {
    pub fn new(spaces: SpaceSpec, penalty: Penalty) -> Self {
        MethodConfig { spaces, penalty, quad_degree: None, elimination: Elimination::Full }
    }

    pub fn with_elimination(mut self, e: Elimination) -> Self {
        self.elimination = e;
        self
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.penalty = self.penalty.with_rho(rho);
        self
    }

    pub fn quad_degree(&self) -> usize {
        self.quad_degree.unwrap_or(2 * self.spaces.max_degree() + 3)
    }
}
