//! Property tests over the distribution, adversary and policy invariants.

use mnb_core::adversary::{batch_variation, compute_variation, generate_costs, membership_check};
use mnb_core::attack::TruncatedPoisson;
use mnb_core::policy::{PolicyState, UpdateCost};
use mnb_core::rng::stream;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pmf_normalizes(lambda in 0.0f64..50.0, m in 1u32..=10) {
        let d = TruncatedPoisson::new(lambda, m).unwrap();
        let total: f64 = (0..=m).map(|k| d.pmf(k)).sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
        for k in 0..=m {
            prop_assert!((0.0..=1.0).contains(&d.pmf(k)));
        }
    }

    #[test]
    fn mean_attacks_bounded(lambda in 0.0f64..60.0, m in 1u32..=8) {
        let mean = TruncatedPoisson::new(lambda, m).unwrap().mean();
        prop_assert!(mean >= 0.0 && mean <= m as f64 + 1e-12);
    }

    #[test]
    fn generated_costs_are_members(
        seed in 0u64..1000,
        n in 1usize..6,
        horizon in 2usize..80,
        m in 1u32..=6,
        scale_factor in 0.01f64..1.0,
    ) {
        let scale = scale_factor / m as f64;
        let mut rng = stream(seed, &[99]);
        let costs = generate_costs(n, horizon, m, scale, &mut rng).unwrap();
        // A-priori budget from the per-step cap.
        prop_assert!(membership_check(&costs, (horizon as f64 - 1.0) * scale));
        let v = compute_variation(&costs).unwrap();
        prop_assert!(v.step_bound() <= scale + 1e-15);
        prop_assert!(v.validate_upper(m).is_ok());
    }

    #[test]
    fn batch_variations_sum_below_total(
        seed in 0u64..500,
        horizon in 4usize..60,
        delta in 1usize..20,
    ) {
        let mut rng = stream(seed, &[7]);
        let costs = generate_costs(3, horizon, 3, 1.0 / 60.0, &mut rng).unwrap();
        let total = compute_variation(&costs).unwrap().total();
        let parts = batch_variation(&costs, delta);
        let sum: f64 = parts.iter().sum();
        // Boundary transitions are counted in no batch.
        prop_assert!(sum <= total + 1e-12);
        prop_assert_eq!(parts.len(), horizon.div_ceil(delta));
    }

    #[test]
    fn selection_distribution_scale_invariant(
        gains in proptest::collection::vec(0.0f64..0.5, 2..10),
        shift in 0.0f64..0.5,
    ) {
        // An additive shift of every gain multiplies every weight by the
        // same factor, which the selection distribution must ignore.
        let n = gains.len();
        let costs = vec![1.0; n];
        let base = PolicyState::new(n, 1.5, 10, 1.0, UpdateCost::Own).unwrap();
        let plain = base.clone().hedge_update(&gains, &costs, 0).unwrap();
        let shifted_gains: Vec<f64> = gains.iter().map(|g| g + shift).collect();
        let shifted = base.hedge_update(&shifted_gains, &costs, 0).unwrap();
        let p1 = plain.selection_probs();
        let p2 = shifted.selection_probs();
        prop_assert!((p1.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for (a, b) in p1.iter().zip(p2.iter()) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn batch_grid_restart_count(horizon in 1usize..200, delta in 1usize..40) {
        let mut state = PolicyState::new(3, 1.3, delta, 1.0, UpdateCost::Own).unwrap();
        let mu = [0.5, 0.2, 0.8];
        let costs = [0.3, 0.3, 0.3];
        // The initial all-ones state is the first restart.
        let mut restarts = 1usize;
        for _ in 0..horizon {
            state = state.hedge_update(&mu, &costs, 0).unwrap();
            if state.step_in_batch() == 0 && state.time() <= horizon {
                restarts += 1;
            }
        }
        prop_assert_eq!(restarts, horizon.div_ceil(delta));
    }
}
