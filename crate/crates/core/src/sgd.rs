//! Projected stochastic gradient descent over purchase schedules.
//!
//! The objective is the pathwise execution cost of a fixed schedule on
//! freshly sampled noise; its exact gradient under the permanent-impact
//! recursion is
//!
//! ```text
//! g[t] = P_t + theta * sum_{k>=t} b[k]
//! ```
//!
//! (the price paid now plus the impact the purchase inflicts on every
//! later one). Each iteration samples a minibatch of noise paths, averages
//! the gradient, applies one of four update rules, and projects the
//! iterate back onto the feasible set: clip into the per-period box
//! `[0, S_t]` with a forward sweep, then rescale multiplicatively onto the
//! full-execution budget. The custom rule replaces clipping with a reset
//! of offending coordinates to a uniform split of the shares still
//! outstanding, adapts both its learning rate and its iteration budget
//! from a trailing window of gradient norms, and repairs the budget with
//! the additive shift of [`project_budget_shift`] (its plain steps grow
//! with the adaptive rate, and a multiplicative rescale would compound
//! their deviations into a degenerate schedule).

use std::collections::VecDeque;

use rand::RngCore;

use crate::error::{Error, Result};
use crate::market::{
    sample_noise, simulate_schedule, ExecutionProblem, MarketParams, NoisePath, Schedule,
};

/// Hyperparameters shared by all variants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    /// Base step size, shares per unit gradient.
    pub learning_rate: f64,
    /// First decay factor (RMSprop accumulator, Adam first moment).
    pub beta1: f64,
    /// Second decay factor (Adam second moment).
    pub beta2: f64,
    /// Iteration budget (the custom rule starts from it and adapts).
    pub max_iters: usize,
    /// Guard added under the square root of every normalizer.
    pub numeric_eps: f64,
    /// Noise paths sampled per iteration.
    pub minibatch: usize,
    /// Trailing gradient-norm window of the custom rule.
    pub window: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            learning_rate: 0.025,
            beta1: 0.98,
            beta2: 0.99,
            max_iters: 10_000,
            numeric_eps: 1e-8,
            minibatch: 1,
            window: 10,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.learning_rate.is_nan() || self.learning_rate <= 0.0 {
            return Err(Error::ParameterDomain {
                name: "learning_rate",
                requirement: "learning_rate > 0",
                value: self.learning_rate,
            });
        }
        if self.beta1.is_nan() || self.beta1 <= 0.0 || self.beta1 >= 1.0 {
            return Err(Error::ParameterDomain {
                name: "beta1",
                requirement: "0 < beta1 < 1",
                value: self.beta1,
            });
        }
        if self.beta2.is_nan() || self.beta2 <= 0.0 || self.beta2 >= 1.0 {
            return Err(Error::ParameterDomain {
                name: "beta2",
                requirement: "0 < beta2 < 1",
                value: self.beta2,
            });
        }
        if self.numeric_eps.is_nan() || self.numeric_eps <= 0.0 {
            return Err(Error::ParameterDomain {
                name: "numeric_eps",
                requirement: "numeric_eps > 0",
                value: self.numeric_eps,
            });
        }
        if self.max_iters == 0 {
            return Err(Error::ParameterDomain {
                name: "max_iters",
                requirement: "max_iters >= 1",
                value: 0.0,
            });
        }
        if self.minibatch == 0 {
            return Err(Error::ParameterDomain {
                name: "minibatch",
                requirement: "minibatch >= 1",
                value: 0.0,
            });
        }
        if self.window == 0 {
            return Err(Error::ParameterDomain {
                name: "window",
                requirement: "window >= 1",
                value: 0.0,
            });
        }
        Ok(())
    }
}

/// The four update rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SgdVariant {
    AdaGrad,
    RmsProp,
    Adam,
    Custom,
}

impl SgdVariant {
    pub const ALL: [SgdVariant; 4] = [
        SgdVariant::AdaGrad,
        SgdVariant::RmsProp,
        SgdVariant::Adam,
        SgdVariant::Custom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SgdVariant::AdaGrad => "adagrad",
            SgdVariant::RmsProp => "rmsprop",
            SgdVariant::Adam => "adam",
            SgdVariant::Custom => "custom",
        }
    }
}

/// Mutable state of one optimizer run. All variants share the struct;
/// each touches only its own fields.
#[derive(Debug, Clone)]
pub struct OptimizerState {
    /// Current schedule candidate.
    pub iterate: Schedule,
    /// Accumulated (AdaGrad) or decayed (RMSprop) squared gradients.
    pub accum_sq: Vec<f64>,
    /// Decayed gradient average (Adam).
    pub moment1: Vec<f64>,
    /// Decayed squared-gradient average (Adam).
    pub moment2: Vec<f64>,
    /// Completed iterations.
    pub iteration: usize,
    /// Live learning rate (custom rule only).
    pub lr_current: f64,
    /// Live real-valued iteration budget (custom rule only).
    pub budget_current: f64,
    /// Trailing per-coordinate squared gradients (custom rule only);
    /// squares are kept per coordinate so a period reset can purge its
    /// contribution from every recorded norm.
    pub norm_history: VecDeque<Vec<f64>>,
}

impl OptimizerState {
    /// Fresh state at the uniform split.
    pub fn new(problem: &ExecutionProblem, config: &OptimizerConfig) -> Self {
        let horizon = problem.horizon;
        OptimizerState {
            iterate: Schedule::uniform(problem),
            accum_sq: vec![0.0; horizon],
            moment1: vec![0.0; horizon],
            moment2: vec![0.0; horizon],
            iteration: 0,
            lr_current: config.learning_rate,
            budget_current: config.max_iters as f64,
            norm_history: VecDeque::with_capacity(config.window),
        }
    }
}

/// One line of the convergence trace. The two trailing fields are
/// post-iteration feasibility readouts so the feasibility invariant is
/// assertable on every step.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub iteration: usize,
    /// Minibatch-mean cost of the pre-step iterate.
    pub objective: f64,
    /// Euclidean norm of the minibatch-mean gradient.
    pub grad_norm: f64,
    /// Learning rate in effect for the step.
    pub learning_rate: f64,
    /// Smallest coordinate of the post-projection iterate.
    pub min_coordinate: f64,
    /// |sum - total| / total of the post-projection iterate.
    pub budget_gap_rel: f64,
}

/// Per-iteration records of one optimizer run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConvergenceTrace {
    pub records: Vec<TraceRecord>,
}

impl ConvergenceTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Worst feasibility readouts over the whole run.
    pub fn worst_min_coordinate(&self) -> f64 {
        self.records
            .iter()
            .map(|r| r.min_coordinate)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn worst_budget_gap(&self) -> f64 {
        self.records
            .iter()
            .map(|r| r.budget_gap_rel)
            .fold(0.0, f64::max)
    }
}

/// Exact pathwise gradient of the execution cost at `schedule` on `noise`.
pub fn cost_gradient(
    params: &MarketParams,
    problem: &ExecutionProblem,
    schedule: &Schedule,
    noise: &NoisePath,
) -> Result<Vec<f64>> {
    cost_and_gradient(params, problem, schedule, noise).map(|(_, g)| g)
}

/// Cost and gradient in one pass (the gradient needs the prices anyway).
pub fn cost_and_gradient(
    params: &MarketParams,
    problem: &ExecutionProblem,
    schedule: &Schedule,
    noise: &NoisePath,
) -> Result<(f64, Vec<f64>)> {
    let outcome = simulate_schedule(params, problem, schedule, noise)?;
    let horizon = problem.horizon;
    let mut gradient = vec![0.0; horizon];
    let mut suffix = 0.0;
    for t in (0..horizon).rev() {
        suffix += schedule.purchases[t];
        gradient[t] = outcome.prices[t] + params.theta * suffix;
    }
    Ok((outcome.cost, gradient))
}

/// Clip each coordinate into `[0, S_t]` where `S_t` is the block minus
/// everything bought before `t`, swept left to right over the already
/// clipped values. Feasible points are untouched.
pub fn project_box(purchases: &mut [f64], total_shares: f64) {
    let mut left = total_shares;
    for b in purchases.iter_mut() {
        *b = b.max(0.0).min(left);
        left -= *b;
    }
}

/// Rescale multiplicatively so the schedule sums to `total_shares`
/// exactly; a degenerate (non-positive) sum falls back to the uniform
/// split.
pub fn project_budget(purchases: &mut [f64], total_shares: f64) {
    let sum: f64 = purchases.iter().sum();
    if sum > 0.0 {
        let scale = total_shares / sum;
        for b in purchases.iter_mut() {
            *b *= scale;
        }
    } else {
        let uniform = total_shares / purchases.len() as f64;
        purchases.fill(uniform);
    }
}

/// Additive counterpart of [`project_budget`]: shift every coordinate by
/// the same amount so the schedule sums to `total_shares`, clamping at
/// zero and redistributing over the rest when a shift would drive a
/// coordinate negative (the orthogonal projection onto the budget
/// hyperplane within the nonnegative orthant).
///
/// The custom rule's run loop uses this instead of the rescale: its plain
/// gradient steps grow with the adaptive learning rate, and rescaling a
/// uniformly shifted iterate amplifies deviations multiplicatively every
/// iteration until the schedule collapses into a single-period spike. The
/// shift is deviation-neutral, so the iterate stays governed by the
/// gradient and the reset rule alone.
pub fn project_budget_shift(purchases: &mut [f64], total_shares: f64) {
    let mut free = vec![true; purchases.len()];
    loop {
        let free_count = free.iter().filter(|f| **f).count();
        if free_count == 0 {
            let uniform = total_shares / purchases.len() as f64;
            purchases.fill(uniform);
            return;
        }
        let sum: f64 = purchases.iter().sum();
        let shift = (total_shares - sum) / free_count as f64;
        if shift == 0.0 {
            return;
        }
        let mut clamped = false;
        for (b, f) in purchases.iter_mut().zip(free.iter_mut()) {
            if *f {
                *b += shift;
                if *b < 0.0 {
                    *b = 0.0;
                    *f = false;
                    clamped = true;
                }
            }
        }
        if !clamped {
            return;
        }
    }
}

/// AdaGrad: accumulate squared gradients, shrink the step as they grow.
pub fn step_adagrad(state: &mut OptimizerState, gradient: &[f64], config: &OptimizerConfig) {
    for (t, &g) in gradient.iter().enumerate() {
        state.accum_sq[t] += g * g;
        state.iterate.purchases[t] -=
            config.learning_rate * g / (state.accum_sq[t] + config.numeric_eps).sqrt();
    }
    state.iteration += 1;
}

/// RMSprop: exponentially decayed squared-gradient accumulator.
pub fn step_rmsprop(state: &mut OptimizerState, gradient: &[f64], config: &OptimizerConfig) {
    for (t, &g) in gradient.iter().enumerate() {
        state.accum_sq[t] = config.beta1 * state.accum_sq[t] + (1.0 - config.beta1) * g * g;
        state.iterate.purchases[t] -=
            config.learning_rate * g / (state.accum_sq[t] + config.numeric_eps).sqrt();
    }
    state.iteration += 1;
}

/// Adam: bias-corrected first and second moments; the guard sits inside
/// the square root.
pub fn step_adam(state: &mut OptimizerState, gradient: &[f64], config: &OptimizerConfig) {
    let i = state.iteration + 1;
    let correction1 = 1.0 - config.beta1.powi(i as i32);
    let correction2 = 1.0 - config.beta2.powi(i as i32);
    for (t, &g) in gradient.iter().enumerate() {
        state.moment1[t] = config.beta1 * state.moment1[t] + (1.0 - config.beta1) * g;
        state.moment2[t] = config.beta2 * state.moment2[t] + (1.0 - config.beta2) * g * g;
        let m_hat = state.moment1[t] / correction1;
        let v_hat = state.moment2[t] / correction2;
        state.iterate.purchases[t] -=
            config.learning_rate * m_hat / (v_hat + config.numeric_eps).sqrt();
    }
    state.iteration = i;
}

/// The custom rule.
///
/// A linearly weighted average (newest heaviest) of the trailing gradient
/// norms decides the branch: a shrinking gradient grows the learning rate
/// fast and the budget slowly, otherwise the reverse; an empty history
/// takes the second branch. The step itself is plain gradient descent at
/// the adapted rate. Coordinates that leave `[0, S_t]` reset to a uniform
/// split of the outstanding shares and their contribution is purged from
/// the recorded norms.
pub fn step_custom(
    state: &mut OptimizerState,
    gradient: &[f64],
    config: &OptimizerConfig,
    total_shares: f64,
) {
    let grad_norm = norm(gradient);
    let shrinking = if state.norm_history.is_empty() {
        false
    } else {
        let mut weighted = 0.0;
        let mut weight_sum = 0.0;
        for (age, squares) in state.norm_history.iter().enumerate() {
            let w = (age + 1) as f64;
            weighted += w * squares.iter().sum::<f64>().sqrt();
            weight_sum += w;
        }
        weighted / weight_sum >= grad_norm
    };
    let (lr_inc, budget_inc) = if shrinking { (2.0, 0.5) } else { (0.5, 2.0) };
    state.lr_current += lr_inc / state.budget_current;
    state.budget_current += budget_inc / state.budget_current;

    for (t, &g) in gradient.iter().enumerate() {
        state.iterate.purchases[t] -= state.lr_current * g;
    }

    if state.norm_history.len() == config.window {
        state.norm_history.pop_front();
    }
    state
        .norm_history
        .push_back(gradient.iter().map(|g| g * g).collect());

    let horizon = state.iterate.purchases.len();
    let mut left = total_shares;
    for t in 0..horizon {
        let b = state.iterate.purchases[t];
        if b < 0.0 || b > left {
            state.iterate.purchases[t] = left / (horizon - t) as f64;
            for squares in state.norm_history.iter_mut() {
                squares[t] = 0.0;
            }
        }
        left -= state.iterate.purchases[t];
    }
    state.iteration += 1;
}

/// Run one variant to its iteration budget and return the final feasible
/// schedule with the full trace.
///
/// The iterate starts at the uniform split. Every iteration samples
/// `minibatch` fresh noise paths from `rng`, averages their gradients,
/// steps, and restores feasibility (box clip then budget rescale; the
/// custom rule's reset stands in for the clip and the additive shift for
/// the rescale). The custom rule runs until its live budget is exhausted,
/// hard-capped at `10 * max_iters`.
pub fn run_optimizer(
    variant: SgdVariant,
    config: &OptimizerConfig,
    params: &MarketParams,
    problem: &ExecutionProblem,
    rng: &mut impl RngCore,
) -> Result<(Schedule, ConvergenceTrace)> {
    config.validate()?;
    params.validate()?;
    problem.validate()?;
    let total = problem.total_shares;
    let horizon = problem.horizon;
    let hard_cap = config.max_iters.saturating_mul(10);
    let mut state = OptimizerState::new(problem, config);
    let mut trace = ConvergenceTrace::default();
    let mut gradient = vec![0.0; horizon];
    loop {
        let budget = match variant {
            SgdVariant::Custom => (state.budget_current.floor() as usize).min(hard_cap),
            _ => config.max_iters,
        };
        if state.iteration >= budget {
            break;
        }

        gradient.fill(0.0);
        let mut objective = 0.0;
        for _ in 0..config.minibatch {
            let noise = sample_noise(rng, horizon, params.sigma_eps, params.sigma_eta);
            let (cost, g) = cost_and_gradient(params, problem, &state.iterate, &noise)?;
            objective += cost;
            for (acc, gi) in gradient.iter_mut().zip(&g) {
                *acc += gi;
            }
        }
        let scale = 1.0 / config.minibatch as f64;
        objective *= scale;
        for g in gradient.iter_mut() {
            *g *= scale;
        }
        let grad_norm = norm(&gradient);

        match variant {
            SgdVariant::AdaGrad => step_adagrad(&mut state, &gradient, config),
            SgdVariant::RmsProp => step_rmsprop(&mut state, &gradient, config),
            SgdVariant::Adam => step_adam(&mut state, &gradient, config),
            SgdVariant::Custom => step_custom(&mut state, &gradient, config, total),
        }
        match variant {
            SgdVariant::Custom => {
                // The reset rule already played the role of the box clip;
                // the additive correction keeps the growing plain steps
                // from feeding back through a rescale.
                project_budget_shift(&mut state.iterate.purchases, total);
            }
            _ => {
                project_box(&mut state.iterate.purchases, total);
                project_budget(&mut state.iterate.purchases, total);
            }
        }

        let learning_rate = match variant {
            SgdVariant::Custom => state.lr_current,
            _ => config.learning_rate,
        };
        let min_coordinate = state
            .iterate
            .purchases
            .iter()
            .fold(f64::INFINITY, |acc, &b| acc.min(b));
        let budget_gap_rel = (state.iterate.total() - total).abs() / total;
        trace.records.push(TraceRecord {
            iteration: state.iteration,
            objective,
            grad_norm,
            learning_rate,
            min_coordinate,
            budget_gap_rel,
        });
    }
    Ok((state.iterate, trace))
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
