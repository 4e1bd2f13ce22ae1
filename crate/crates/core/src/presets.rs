//! Named method presets: the classical schemes recovered from the
//! four-field form, plus the four configurations used by the convergence
//! and stability sweeps.

use alloc::vec::Vec;

use crate::assembly::{Elimination, MethodConfig, Penalty, Regime};
use crate::conditions::{self, ConditionError};
use crate::spaces::{FluxFamily, SpaceSpec};

/// The inf-sup theory a preset falls under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Claim {
    Proven(Regime),
    /// Equal-order HDG with `ητ = ¼`, `τ = O(1)`: no uniform estimate known.
    NotProved,
}

impl Claim {
    pub fn label(self) -> &'static str {
        match self {
            Claim::Proven(r) => r.label(),
            Claim::NotProved => "not proved",
        }
    }

    /// Regime whose norms measure β for this preset.
    pub fn norm_regime(self) -> Regime {
        match self {
            Claim::Proven(r) => r,
            Claim::NotProved => Regime::Div,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    /// Literature name of the scheme.
    pub method: &'static str,
    pub spec: SpaceSpec,
    pub claim: Claim,
    pub elimination: Elimination,
    /// For proven regimes the product `ητ` (`c_η` or `c_τ`).
    pub coupling: f64,
}

impl Preset {
    /// Method configuration at weight `rho`.
    pub fn config(&self, rho: f64) -> MethodConfig {
        let penalty = match self.claim {
            Claim::Proven(Regime::Grad) => Penalty::Grad { rho, c_eta: self.coupling },
            Claim::Proven(Regime::Div) => Penalty::Div { rho, c_tau: self.coupling },
            // τ = 1, η = ¼ on every edge (ρ only enters the measuring norms)
            Claim::NotProved => Penalty::Manual { tau: 1.0, eta: 0.25 },
        };
        MethodConfig::new(self.spec, penalty).with_elimination(self.elimination)
    }

    /// Same preset with a different elimination path.
    pub fn with_elimination(mut self, e: Elimination) -> Self {
        self.elimination = e;
        self
    }

    /// Re-checks the claimed regime's space conditions.
    pub fn check(&self) -> Result<(), ConditionError> {
        match self.claim {
            Claim::Proven(Regime::Grad) => conditions::check_grad_regime(&self.spec),
            Claim::Proven(Regime::Div) => conditions::check_div_regime(&self.spec),
            Claim::NotProved => Ok(()),
        }
    }

    /// Table formatting `Q / Q̌ / V / V̌`.
    pub fn spaces_label(&self) -> alloc::string::String {
        use alloc::format;
        let q = match self.spec.q_family {
            FluxFamily::VectorPk => format!("Q^{}", self.spec.k_p),
            FluxFamily::BrokenRT => format!("RT_{}", self.spec.k_p),
        };
        let t = |d: Option<usize>, s: &str| match d {
            Some(k) => format!("{s}^{k}"),
            None => alloc::string::String::from("{0}"),
        };
        format!("{q} / {} / V^{} / {}", t(self.spec.k_pcheck, "Qc"), self.spec.k_u, t(self.spec.k_ucheck, "Vc"))
    }
}

const QUARTER: f64 = 0.25;

fn spec(f: FluxFamily, kp: usize, kpc: Option<usize>, ku: usize, kuc: Option<usize>) -> SpaceSpec {
    SpaceSpec::new(f, kp, kpc, ku, kuc)
}

/// The nine classical schemes at base degree `k`.
pub fn classical_schemes(k: usize) -> Vec<Preset> {
    use FluxFamily::{BrokenRT as Rt, VectorPk as Pk};
    let grad = Claim::Proven(Regime::Grad);
    let div = Claim::Proven(Regime::Div);
    let p = |name, method, spec, claim, elimination, coupling| Preset { name, method, spec, claim, elimination, coupling };
    alloc::vec![
        p("hdg-grad", "HDG (Lehrenfeld)", spec(Pk, k, Some(k + 1), k + 1, Some(k + 1)), grad, Elimination::HybridUhat, QUARTER),
        p("hdg-div", "HDG (Cockburn et al.)", spec(Pk, k + 1, Some(k + 1), k, Some(k + 1)), div, Elimination::HybridUhat, QUARTER),
        p("hdg-rt", "HDG (Cockburn et al.), RT", spec(Rt, k, Some(k), k, Some(k)), div, Elimination::HybridUhat, QUARTER),
        p("hdg-reduced", "HDG with reduced stabilization", spec(Pk, k, Some(k), k + 1, Some(k)), grad, Elimination::HybridUhat, QUARTER),
        p("hdg-equal", "HDG, equal order", spec(Pk, k, Some(k), k, Some(k)), Claim::NotProved, Elimination::HybridUhat, QUARTER),
        p("mixed-dg", "mixed DG", spec(Pk, k + 1, None, k, Some(k)), div, Elimination::Both, 1.0),
        p("wg", "WG", spec(Rt, k, Some(k), k, Some(k + 1)), div, Elimination::WgPhat, QUARTER),
        p("wg-mfem", "WG-MFEM", spec(Pk, k, Some(k), k + 1, Some(k)), grad, Elimination::WgPhat, QUARTER),
        p("ldg", "LDG", spec(Pk, k, Some(k), k + 1, None), grad, Elimination::Both, 1.0),
    ]
}

/// Configurations used by the convergence, inf-sup and stability sweeps.
pub fn study_presets() -> Vec<Preset> {
    use FluxFamily::{BrokenRT as Rt, VectorPk as Pk};
    let grad = Claim::Proven(Regime::Grad);
    let div = Claim::Proven(Regime::Div);
    // Eliminate only the residual whose penalty block is large: ǔ in the
    // gradient regime (η small), p̌ in the divergence regime (τ small).
    // Eliminating the other one puts a (ρh)⁻¹ penalty into the reduced
    // matrix and ruins its conditioning as ρ → 0.
    let p = |name, method, spec, claim| {
        let elimination = if claim == grad { Elimination::Ucheck } else { Elimination::Pcheck };
        Preset { name, method, spec, claim, elimination, coupling: 0.25 }
    };
    alloc::vec![
        p("grad-k0", "gradient-based, k = 0", spec(Pk, 0, Some(0), 1, Some(0)), grad),
        p("grad-k1", "gradient-based, k = 1", spec(Pk, 1, Some(1), 2, Some(1)), grad),
        p("div-rt0", "divergence-based, RT_0", spec(Rt, 0, Some(0), 0, Some(0)), div),
        // Q^1 fluxes need V̌ ⊃ Q_h·n: with V̌^0 the linear part of the normal
        // jumps is untested and the scheme is inconsistent (see `div-q1-v0`).
        p("div-q1", "divergence-based, Q^1", spec(Pk, 1, Some(0), 0, Some(1)), div),
        p("div-q1-v0", "divergence-based, Q^1 with V̌^0", spec(Pk, 1, Some(0), 0, Some(0)), div),
    ]
}

/// Looks a preset up by name; classical schemes use base degree `k`.
pub fn by_name(name: &str, k: usize) -> Option<Preset> {
    study_presets().into_iter().chain(classical_schemes(k)).find(|p| p.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn claimed_regimes_hold() {
        for k in 0..2 {
            for p in classical_schemes(k).into_iter().chain(study_presets()) {
                p.check().unwrap_or_else(|e| panic!("{} k={k}: {e}", p.name));
            }
        }
    }

    #[test]
    fn hybridizable_rows_meet_conditions() {
        for p in classical_schemes(1) {
            let c = p.config(0.5);
            match p.elimination {
                Elimination::HybridUhat => {
                    conditions::check_hybridizable(&p.spec, c.penalty.eta_tau_product()).unwrap()
                }
                Elimination::WgPhat => conditions::check_wg_phat(&p.spec).unwrap(),
                _ => {}
            }
        }
    }

    #[test]
    fn labels() {
        let t = classical_schemes(0);
        assert_eq!(t.len(), 9);
        assert_eq!(t.iter().filter(|p| p.claim == Claim::NotProved).count(), 1);
        assert_eq!(by_name("hdg-equal", 0).unwrap().claim.label(), "not proved");
        assert_eq!(by_name("ldg", 0).unwrap().claim.label(), "gradient-based");
        assert_eq!(by_name("div-rt0", 0).unwrap().spaces_label(), "RT_0 / Qc^0 / V^0 / Vc^0");
        assert!(by_name("nope", 0).is_none());
    }
}
