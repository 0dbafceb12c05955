//! Simulation and optimization of large-order execution costs in an
//! additive permanent price-impact equity market.
//!
//! The library has four parts:
//!
//! - [`market`]: the price/information dynamics, noise sampling, and cost
//!   accounting for purchase schedules and state-feedback policies;
//! - [`closed_form`]: the optimal execution policy coefficients for the
//!   market model, plus a brute-force oracle for tiny instances;
//! - [`sgd`]: the pathwise cost gradient, feasibility projections, and
//!   four projected stochastic-gradient-descent variants that produce
//!   candidate schedules;
//! - [`benchmark`]: common-random-numbers evaluation of all strategies,
//!   comparison metrics, and ranking.
//!
//! Everything is a pure function of its inputs plus an explicitly passed
//! random stream, so runs are reproducible bit for bit from a seed.

pub mod benchmark;
pub mod closed_form;
pub mod error;
pub mod market;
pub mod rng;
pub mod sgd;

pub use benchmark::{evaluate_common, metrics, rank_report, CostMatrix, Strategy, StrategyReport};
pub use closed_form::{brute_force_oracle, coefficients, optimal_order, PolicyCoefficients};
pub use error::{Error, Result};
pub use market::{
    propagate_info, sample_noise, simulate_policy, simulate_schedule, ExecutionProblem,
    MarketParams, NoisePath, PathOutcome, Schedule,
};
pub use sgd::{
    cost_gradient, project_box, project_budget, project_budget_shift, run_optimizer,
    ConvergenceTrace, OptimizerConfig, OptimizerState, SgdVariant,
};
