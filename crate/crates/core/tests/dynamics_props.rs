mod common;

use gausep::dynamics::{evolve, evolve_model, perturbative_v, propagator_solution};
use gausep::generator::build_generator;
use gausep::linalg::min_eigenvalue;
use gausep::symplectic::is_physical;
use gausep::{CovarianceMatrix, ModeLayout};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn doubling_steps_changes_nothing(
        seed: u64, n_a in 1usize..=2, n_b in 1usize..=2, steps in 1usize..8, t in 0.0f64..2.0,
    ) {
        let mut rng = common::rng(seed);
        let model = common::general(&mut rng, n_a, n_b, 0.5);
        let v0 = common::physical(&mut rng, model.layout, 2.0);
        let gen = build_generator(&model).unwrap();
        let a = evolve(&gen, &v0, t, steps).unwrap();
        let b = evolve(&gen, &v0, t, 2 * steps).unwrap();
        prop_assert!(common::max_abs(&(a.matrix - b.matrix)) < 1e-12);
    }

    #[test]
    fn accumulated_noise_is_psd(seed: u64, n_a in 1usize..=3, n_b in 1usize..=3, t in 0.0f64..3.0) {
        let mut rng = common::rng(seed);
        let model = common::general(&mut rng, n_a, n_b, 0.5);
        let sol = propagator_solution(&build_generator(&model).unwrap(), t);
        let w = &sol.accumulated_noise;
        prop_assert!(min_eigenvalue(w) >= -1e-12 * common::max_abs(w).max(1.0));
    }

    #[test]
    fn evolution_preserves_physicality(
        seed: u64, n_a in 1usize..=2, n_b in 1usize..=2, general: bool, t in 0.0f64..2.0,
        k in -1.0f64..1.0, s_a in 0.0f64..1.0, s_b in 0.0f64..1.0,
    ) {
        let mut rng = common::rng(seed);
        let layout = ModeLayout::new(n_a, n_b).unwrap();
        let model = if general {
            common::general(&mut rng, n_a, n_b, 1.0)
        } else {
            common::rank1(&mut rng, n_a, n_b, k, s_a, s_b, 0.0)
        };
        let v0 = common::physical(&mut rng, layout, 2.0);
        let v = evolve_model(&model, &v0, t, 4).unwrap();
        prop_assert!(is_physical(&v, 1e-9));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    /// First-order expansion error shrinks by four when `t` halves.
    #[test]
    fn perturbative_error_is_second_order(
        seed: u64, n_a in 1usize..=2, n_b in 1usize..=2,
        k in 0.3f64..1.0, s_a in 0.3f64..1.0, s_b in 0.3f64..1.0,
    ) {
        let mut rng = common::rng(seed);
        let model = common::rank1(&mut rng, n_a, n_b, k, s_a, s_b, 0.0);
        let v0 = CovarianceMatrix::vacuum(model.layout);
        let t = 0.02 / k.max(s_a).max(s_b);
        let err = |t: f64| {
            let p = perturbative_v(&model, &v0, t).unwrap().lab();
            let e = evolve_model(&model, &v0, t, 1).unwrap();
            common::max_abs(&(p.matrix - e.matrix))
        };
        let ratio = err(t) / err(t / 2.0);
        prop_assert!((ratio - 4.0).abs() <= 0.8, "ratio {ratio}");
    }
}
