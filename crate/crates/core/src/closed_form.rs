//! Optimal execution policy for the additive permanent-impact market.
//!
//! The expected-cost-minimizing state-feedback policy is linear in the
//! state: each period buy a fixed fraction of the outstanding block and
//! tilt the order by the latest information reading,
//!
//! ```text
//! order(t) = remaining_fraction[t] * S_t + info_weight[t] * X_{t-1}
//! ```
//!
//! With `r = horizon - t` periods remaining (current one included),
//! backward induction on the quadratic value function of the market gives
//!
//! ```text
//! remaining_fraction = 1 / r
//! info_weight        = gamma / (theta * r) * sum_{k=2..r} (r+1-k) * rho^k
//! ```
//!
//! so the tilt is strongest when many periods remain to spread the
//! correction and vanishes in the final period, where the whole remainder
//! must be bought regardless of the signal. The weight sum obeys the
//! recursion `D_1 = 0, D_r = rho * D_{r-1} + (r-1) * rho^2`, which is how
//! it is computed here; tests cross-check against the direct sum.
//!
//! `brute_force_oracle` enumerates grid schedules on tiny instances and is
//! the independent check that the policy really minimizes cost where
//! enumeration is tractable.

use crate::error::{Error, Result};
use crate::market::{simulate_schedule, ExecutionProblem, MarketParams, NoisePath, Schedule};

/// Per-period coefficients of the optimal policy, 0-indexed like `Schedule`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyCoefficients {
    /// Fraction of the outstanding block bought at each period; ends at 1.
    pub remaining_fraction: Vec<f64>,
    /// Shares bought per unit of information signal; zero in the final period.
    pub info_weight: Vec<f64>,
}

impl PolicyCoefficients {
    pub fn horizon(&self) -> usize {
        self.remaining_fraction.len()
    }
}

/// Compute both coefficient sequences for the problem.
///
/// `theta = 0` leaves the tilt undefined unless `gamma = 0` too (the
/// information term divides by `theta`); that combination is rejected.
pub fn coefficients(
    problem: &ExecutionProblem,
    params: &MarketParams,
) -> Result<PolicyCoefficients> {
    problem.validate()?;
    params.validate()?;
    if params.theta == 0.0 && params.gamma != 0.0 {
        return Err(Error::ParameterDomain {
            name: "theta",
            requirement: "theta > 0 when gamma != 0 (info weight divides by theta)",
            value: params.theta,
        });
    }
    let horizon = problem.horizon;
    let mut remaining_fraction = Vec::with_capacity(horizon);
    let mut info_weight = vec![0.0; horizon];
    if params.gamma != 0.0 {
        // weight_sum[r] = sum_{k=2..r} (r+1-k) rho^k via the recursion.
        let mut weight_sum = 0.0;
        for r in 2..=horizon {
            weight_sum = params.rho * weight_sum + (r - 1) as f64 * params.rho * params.rho;
            info_weight[horizon - r] = params.gamma * weight_sum / (params.theta * r as f64);
        }
    }
    for t in 0..horizon {
        remaining_fraction.push(1.0 / (horizon - t) as f64);
    }
    Ok(PolicyCoefficients {
        remaining_fraction,
        info_weight,
    })
}

/// The policy's order for period `t` (0-based) given the outstanding
/// shares and the information level observed before the period.
///
/// The raw linear order is clipped to `[0, remaining]`; the final period
/// returns `remaining` exactly.
pub fn optimal_order(
    t: usize,
    remaining: f64,
    info_prev: f64,
    coeffs: &PolicyCoefficients,
) -> f64 {
    let horizon = coeffs.horizon();
    debug_assert!(t < horizon && remaining >= 0.0);
    if t + 1 == horizon {
        return remaining;
    }
    let raw = coeffs.remaining_fraction[t] * remaining + coeffs.info_weight[t] * info_prev;
    raw.max(0.0).min(remaining)
}

/// Exhaustively search grid schedules for the cheapest one on a fixed
/// noise path.
///
/// Periods before the last take any multiple of `grid_step` that fits in
/// the outstanding block; the last period takes whatever remains. Guarded
/// to `horizon <= 4` and `(total_shares/grid_step)^(horizon-1) <= 1e7`.
/// Ties keep the lexicographically first schedule.
pub fn brute_force_oracle(
    params: &MarketParams,
    problem: &ExecutionProblem,
    grid_step: f64,
    noise: &NoisePath,
) -> Result<(Schedule, f64)> {
    problem.validate()?;
    if grid_step.is_nan() || grid_step <= 0.0 {
        return Err(Error::ParameterDomain {
            name: "grid_step",
            requirement: "grid_step > 0",
            value: grid_step,
        });
    }
    if problem.horizon > 4 {
        return Err(Error::Intractable(format!(
            "horizon {} exceeds the oracle bound of 4",
            problem.horizon
        )));
    }
    let combos = (problem.total_shares / grid_step).powi(problem.horizon as i32 - 1);
    if combos > 1e7 {
        return Err(Error::Intractable(format!(
            "(total/grid)^(horizon-1) = {combos:.3e} exceeds 1e7"
        )));
    }

    let mut candidate = vec![0.0; problem.horizon];
    let mut best: Option<(Vec<f64>, f64)> = None;
    search(
        params,
        problem,
        grid_step,
        noise,
        0,
        problem.total_shares,
        &mut candidate,
        &mut best,
    )?;
    let (purchases, cost) = best.expect("enumeration visits at least one schedule");
    Ok((Schedule::new(purchases), cost))
}

#[allow(clippy::too_many_arguments)]
fn search(
    params: &MarketParams,
    problem: &ExecutionProblem,
    grid_step: f64,
    noise: &NoisePath,
    t: usize,
    left: f64,
    candidate: &mut Vec<f64>,
    best: &mut Option<(Vec<f64>, f64)>,
) -> Result<()> {
    if t + 1 == problem.horizon {
        candidate[t] = left;
        let outcome = simulate_schedule(params, problem, &Schedule::new(candidate.clone()), noise)?;
        if best.as_ref().is_none_or(|(_, c)| outcome.cost < *c) {
            *best = Some((candidate.clone(), outcome.cost));
        }
        return Ok(());
    }
    let steps = (left / grid_step).floor() as usize;
    for m in 0..=steps {
        candidate[t] = m as f64 * grid_step;
        search(
            params,
            problem,
            grid_step,
            noise,
            t + 1,
            left - candidate[t],
            candidate,
            best,
        )?;
    }
    Ok(())
}
