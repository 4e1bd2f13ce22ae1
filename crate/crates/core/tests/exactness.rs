//! Polynomial solutions contained in the discrete spaces are reproduced, and
//! the inconsistent `Q^{k+1}`/`V̌^k` pairing is not.

use xg_core::presets::{by_name, Claim};
use xg_core::solver::solve;
use xg_core::verify::{error_norms, Boundary, CaseId, ManufacturedCase};

fn errors(preset: &str, k: usize, boundary: Boundary, n: usize, rho: f64) -> [f64; 4] {
    let case = ManufacturedCase::new(CaseId::C2, boundary);
    let p = by_name(preset, k).unwrap();
    let Claim::Proven(regime) = p.claim else { panic!("{preset} has no proven regime") };
    let config = p.config(rho);
    let mesh = case.mesh(n).unwrap();
    let s = solve(&mesh, &case, &config).unwrap();
    error_norms(&mesh, &s.spaces, &s.fields, &case, &config, regime).unwrap().values()
}

/// Presets whose `Q_h` contains the linear flux and `V_h` the quadratic `u`.
const CONTAINING: [(&str, usize); 5] = [("grad-k1", 0), ("hdg-grad", 1), ("hdg-div", 2), ("hdg-rt", 2), ("wg-mfem", 1)];

#[test]
fn quadratic_solution_is_reproduced() {
    for (name, k) in CONTAINING {
        for b in [Boundary::Dirichlet, Boundary::NeumannRightTop] {
            for rho in [1.0, 1.0 / 16.0] {
                let e = errors(name, k, b, 3, rho);
                assert!(e.iter().all(|&v| v <= 1e-10), "{name} k={k} {b:?} ρ={rho}: {e:?}");
            }
        }
    }
}

#[test]
fn v0_residual_with_linear_fluxes_is_inconsistent() {
    // the flux error does not decrease under refinement on a linear-flux solution
    let coarse = errors("div-q1-v0", 0, Boundary::Dirichlet, 2, 1.0)[0];
    let fine = errors("div-q1-v0", 0, Boundary::Dirichlet, 8, 1.0)[0];
    assert!(coarse > 1e-2 && fine > 0.5 * coarse, "{coarse} → {fine}");
    // the same fluxes with a linear residual space are exact on C2's flux part
    let fixed = errors("div-q1", 0, Boundary::Dirichlet, 8, 1.0)[0];
    assert!(fixed < 0.1 * fine, "{fixed}");
}
