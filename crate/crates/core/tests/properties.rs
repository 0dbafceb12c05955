//! Property tests for the model invariants that should hold on arbitrary
//! inputs, not just the hand-picked cases.

use proptest::prelude::*;

use optexec_core::market::{
    sample_noise, simulate_schedule, ExecutionProblem, MarketParams, NoisePath, Schedule,
};
use optexec_core::rng::stream_rng;
use optexec_core::sgd::{project_box, project_budget};

fn params_with(theta: f64, gamma: f64, rho: f64) -> MarketParams {
    MarketParams {
        theta,
        gamma,
        rho,
        ..MarketParams::default()
    }
}

fn schedule_strategy(horizon: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..10_000.0, horizon)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// prices[t] - p0 decomposes exactly into the impact, information, and
    /// shock cumulatives.
    #[test]
    fn price_decomposition(
        purchases in schedule_strategy(12),
        seed in 0u64..1000,
        theta in 0.0f64..1e-3,
        gamma in -1e-2f64..1e-2,
        rho in -0.9f64..0.9,
    ) {
        let params = params_with(theta, gamma, rho);
        let problem = ExecutionProblem { total_shares: 1.0, horizon: 12 };
        let noise = sample_noise(&mut stream_rng(seed, 0), 12, params.sigma_eps, params.sigma_eta);
        let schedule = Schedule::new(purchases);
        let outcome = simulate_schedule(&params, &problem, &schedule, &noise).unwrap();
        let mut cum_b = 0.0;
        let mut cum_info = 0.0;
        let mut cum_eps = 0.0;
        for t in 0..12 {
            cum_b += schedule.purchases[t];
            cum_info += outcome.info[t + 1];
            cum_eps += noise.price_shocks[t];
            let reconstructed =
                params.initial_price + theta * cum_b + gamma * cum_info + cum_eps;
            let tol = 1e-9 * reconstructed.abs().max(1.0);
            prop_assert!((outcome.prices[t] - reconstructed).abs() <= tol);
        }
    }

    /// With no information term and no noise, cost never decreases in theta.
    #[test]
    fn cost_monotone_in_theta(
        purchases in schedule_strategy(8),
        theta_low in 0.0f64..1e-3,
        bump in 0.0f64..1e-3,
    ) {
        let problem = ExecutionProblem { total_shares: 1.0, horizon: 8 };
        let noise = NoisePath::zero(8);
        let schedule = Schedule::new(purchases);
        let low = simulate_schedule(
            &params_with(theta_low, 0.0, 0.0), &problem, &schedule, &noise,
        ).unwrap();
        let high = simulate_schedule(
            &params_with(theta_low + bump, 0.0, 0.0), &problem, &schedule, &noise,
        ).unwrap();
        prop_assert!(high.cost >= low.cost - 1e-9 * low.cost.abs());
    }

    /// Box-then-budget projection is idempotent: a projected point projects
    /// to itself.
    #[test]
    fn projection_composition_is_idempotent(
        mut raw in prop::collection::vec(-20_000.0f64..20_000.0, 1..24),
        total in 1.0f64..200_000.0,
    ) {
        project_box(&mut raw, total);
        project_budget(&mut raw, total);
        let once = raw.clone();
        project_box(&mut raw, total);
        project_budget(&mut raw, total);
        for (a, b) in raw.iter().zip(&once) {
            prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "{a} vs {b}");
        }
    }

    /// The budget projection lands exactly on the budget with nonnegative
    /// entries whenever the input is nonnegative.
    #[test]
    fn budget_projection_feasibility(
        mut raw in prop::collection::vec(0.0f64..50_000.0, 1..24),
        total in 1.0f64..200_000.0,
    ) {
        project_budget(&mut raw, total);
        let sum: f64 = raw.iter().sum();
        prop_assert!((sum - total).abs() <= 1e-9 * total);
        prop_assert!(raw.iter().all(|&b| b >= 0.0));
    }

    /// For a feasible schedule the outcome's bookkeeping is consistent:
    /// remaining shares decrease to zero and the cost is the price/purchase
    /// dot product.
    #[test]
    fn outcome_bookkeeping_is_consistent(
        raw in prop::collection::vec(0.0f64..10_000.0, 10),
        seed in 0u64..1000,
    ) {
        let params = MarketParams::default();
        let problem = ExecutionProblem { total_shares: 50_000.0, horizon: 10 };
        let mut purchases = raw;
        project_budget(&mut purchases, problem.total_shares);
        let schedule = Schedule::new(purchases);
        let noise = sample_noise(
            &mut stream_rng(seed, 3),
            problem.horizon,
            params.sigma_eps,
            params.sigma_eta,
        );
        let outcome = simulate_schedule(&params, &problem, &schedule, &noise).unwrap();
        for pair in outcome.remaining.windows(2) {
            prop_assert!(pair[1] <= pair[0] + 1e-9);
        }
        prop_assert!(outcome.remaining[10].abs() <= 1e-9 * problem.total_shares);
        let dot: f64 = outcome
            .prices
            .iter()
            .zip(&schedule.purchases)
            .map(|(p, b)| p * b)
            .sum();
        prop_assert!((outcome.cost - dot).abs() <= 1e-9 * dot.abs().max(1.0));
    }

    /// Identical seeds give bit-identical outcomes, whatever the market.
    #[test]
    fn seeded_simulation_is_reproducible(
        seed in 0u64..1000,
        theta in 0.0f64..1e-3,
        rho in -0.9f64..0.9,
    ) {
        let params = params_with(theta, 5e-3, rho);
        let problem = ExecutionProblem::default();
        let schedule = Schedule::uniform(&problem);
        let run = || {
            let noise = sample_noise(
                &mut stream_rng(seed, 17),
                problem.horizon,
                params.sigma_eps,
                params.sigma_eta,
            );
            simulate_schedule(&params, &problem, &schedule, &noise).unwrap()
        };
        prop_assert_eq!(run(), run());
    }
}
