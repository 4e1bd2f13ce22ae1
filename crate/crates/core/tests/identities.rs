//! Algebraic identities of the discretization on random meshes and data.

mod support;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::{b_identity_defect, perturbed_mesh, split, trace_sides, Broken};
use xg_core::presets::classical_schemes;

#[test]
fn trace_identity_on_random_polynomials() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for trial in 0..100 {
        let k = trial % 4;
        let n = 1 + trial % 3;
        let mesh = perturbed_mesh(&mut rng, n, 0.2).tag_boundary(split).unwrap();
        let f = Broken::random(&mut rng, mesh.num_cells(), k as i32);
        let (lhs, rhs, green) = trace_sides(&mesh, &f, k as usize);
        let scale = lhs.abs().max(1.0);
        let rel = ((lhs - rhs).abs() / scale).max((lhs - green).abs() / scale);
        worst = worst.max(rel);
        assert!(rel <= 1e-12, "trial {trial} (k = {k}): {lhs} vs {rhs} vs {green}");
    }
    println!("trace identity: worst relative defect {worst:.2e} over 100 polynomials");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gradient_and_divergence_forms_agree(seed in any::<u64>(), k in 0usize..3, which in 0usize..9, n in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mesh = perturbed_mesh(&mut rng, n, 0.2).tag_boundary(split).unwrap();
        let d = b_identity_defect(&mesh, k, which);
        prop_assert!(d <= 1e-12, "relative defect {d:e}");
    }
}

#[test]
fn forms_agree_for_every_table_row() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mesh = perturbed_mesh(&mut rng, 3, 0.25).tag_boundary(split).unwrap();
    for k in 0..=3 {
        for which in 0..9 {
            let d = b_identity_defect(&mesh, k, which);
            assert!(d <= 1e-12, "{} (k = {k}): {d:e}", classical_schemes(k)[which].name);
        }
    }
}
