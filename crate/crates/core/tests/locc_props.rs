mod common;

use gausep::generator::build_generator;
use gausep::locc::{
    effective_generator, rank1_protocol, solve_correlated, solve_symmetric, synthesize_general, trotter_order,
    Branch,
};
use gausep::separability::{threshold, BoundKind};
use gausep::CovarianceMatrix;
use proptest::prelude::*;

fn branch(minus: bool) -> Branch {
    if minus {
        Branch::Minus
    } else {
        Branch::Plus
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn synthesized_generator_matches_target(
        seed: u64, n_a in 1usize..=3, n_b in 1usize..=3, minus: bool,
        s_a in 0.05f64..3.0, s_b in 0.05f64..3.0, f in 0.05f64..=1.0, c in -0.9f64..0.9,
    ) {
        let mut rng = common::rng(seed);
        // Correlated noise also exercises the cancellation of the self-feedback Hamiltonian.
        let s_ab = c * f * (s_a * s_b).sqrt();
        let k = (f * f * s_a * s_b - s_ab * s_ab).sqrt();
        let model = common::rank1(&mut rng, n_a, n_b, k, s_a, s_b, s_ab);
        let p = rank1_protocol(&model, branch(minus)).unwrap().feasible().unwrap();
        let eff = effective_generator(&p).unwrap().generator;
        let target = build_generator(&model).unwrap();
        prop_assert!(common::max_abs(&(&eff.drift - &target.drift)) <= 1e-12);
        prop_assert!(common::max_abs(&(&eff.diffusion - &target.diffusion)) <= 1e-12);
        prop_assert!(common::max_abs(&(&eff.hamiltonian - &target.hamiltonian)) <= 1e-12);
    }

    #[test]
    fn scalar_feasibility_equals_threshold(
        seed: u64, s_a in 0.05f64..3.0, s_b in 0.05f64..3.0, k in 0.0f64..3.0, s_ab in -1.0f64..1.0,
    ) {
        let mut rng = common::rng(seed);
        prop_assume!(k > 0.0);
        let plain = common::rank1(&mut rng, 1, 1, k, s_a, s_b, 0.0);
        let v = threshold(&plain);
        prop_assert_eq!(v.bound_kind, BoundKind::Rank1);
        prop_assume!(v.margin.abs() > 1e-9);
        prop_assert_eq!(solve_symmetric(s_a, s_b, k, Branch::Plus).unwrap().is_feasible(), v.satisfied);

        prop_assume!(s_ab * s_ab <= s_a * s_b);
        let corr = common::rank1(&mut rng, 1, 1, k, s_a, s_b, s_ab);
        let v = threshold(&corr);
        prop_assert_eq!(v.bound_kind, BoundKind::Rank1Correlated);
        prop_assume!(v.margin.abs() > 1e-9);
        prop_assert_eq!(solve_correlated(s_a, s_b, s_ab, k, Branch::Plus).unwrap().is_feasible(), v.satisfied);
    }

    #[test]
    fn general_feasibility_equals_threshold(
        seed: u64, n_a in 1usize..=2, n_b in 1usize..=2, scale in 0.05f64..1.0, minus: bool,
    ) {
        let mut rng = common::rng(seed);
        let model = common::general(&mut rng, n_a, n_b, scale);
        let v = threshold(&model);
        prop_assume!(v.margin.abs() > 1e-9);
        let s = synthesize_general(&model, branch(minus)).unwrap();
        prop_assert_eq!(s.is_feasible(), v.satisfied);
        if let Some((p, _)) = s.feasible() {
            let eff = effective_generator(&p).unwrap().generator;
            let target = build_generator(&model).unwrap();
            prop_assert!(eff.distance(&target) <= 1e-10);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]

    #[test]
    fn protocol_composition_converges_first_order(
        seed: u64, n_a in 1usize..=2, n_b in 1usize..=2,
        s_a in 0.2f64..1.0, s_b in 0.2f64..1.0, f in 0.2f64..1.0,
    ) {
        let mut rng = common::rng(seed);
        let model = common::rank1(&mut rng, n_a, n_b, f * (s_a * s_b).sqrt(), s_a, s_b, 0.0);
        let p = rank1_protocol(&model, Branch::Plus).unwrap().feasible().unwrap();
        let target = build_generator(&model).unwrap();
        let order = trotter_order(&p, &target, &CovarianceMatrix::vacuum(model.layout), 1.0, 256).unwrap();
        // A first-order splitting estimated from two levels scatters around 1 by O(dt).
        prop_assert!(order >= 0.99, "order {order}");
    }
}
