//! Additive permanent price-impact market.
//!
//! Prices follow `P_t = P_{t-1} + theta*B_t + gamma*X_t + eps_t` where
//! `B_t` is the period purchase, `X_t = rho*X_{t-1} + eta_t` is a serially
//! correlated information signal, and `(eps_t, eta_t)` are independent
//! Gaussian shocks. Impact is permanent: a purchase raises every later
//! price by `theta*B_t`. Executing a block of `total_shares` over `horizon`
//! periods costs `sum_t P_t*B_t`.
//!
//! Period vectors are 0-indexed; index `t` holds period `t+1` of the
//! `horizon`-period program. Information and remaining-share vectors carry
//! one extra leading entry for the pre-trade state.

use rand::RngCore;

use crate::error::{Error, Result};
use crate::rng::standard_normal;

/// Coefficients of the simulated market.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketParams {
    /// Permanent price impact per share traded.
    pub theta: f64,
    /// Price response per unit of the information signal.
    pub gamma: f64,
    /// AR(1) autocorrelation of the information signal, |rho| < 1.
    pub rho: f64,
    /// Standard deviation of the per-period price shock.
    pub sigma_eps: f64,
    /// Standard deviation of the per-period information shock.
    pub sigma_eta: f64,
    /// Pre-trade price.
    pub initial_price: f64,
    /// Information level before the first period.
    pub initial_info: f64,
}

impl Default for MarketParams {
    /// Default calibration: impact and information coefficients sized so a
    /// 100,000-share block over 20 periods costs on the order of 5.26e6.
    fn default() -> Self {
        MarketParams {
            theta: 5e-5,
            gamma: 5e-3,
            rho: 0.5,
            sigma_eps: 0.125,
            sigma_eta: 1.0,
            initial_price: 50.0,
            initial_info: 0.0,
        }
    }
}

impl MarketParams {
    pub fn validate(&self) -> Result<()> {
        if self.theta.is_nan() || self.theta < 0.0 {
            return Err(Error::ParameterDomain {
                name: "theta",
                requirement: "theta >= 0",
                value: self.theta,
            });
        }
        if self.rho.is_nan() || self.rho.abs() >= 1.0 {
            return Err(Error::ParameterDomain {
                name: "rho",
                requirement: "|rho| < 1",
                value: self.rho,
            });
        }
        if self.sigma_eps.is_nan() || self.sigma_eps < 0.0 {
            return Err(Error::ParameterDomain {
                name: "sigma_eps",
                requirement: "sigma_eps >= 0",
                value: self.sigma_eps,
            });
        }
        if self.sigma_eta.is_nan() || self.sigma_eta < 0.0 {
            return Err(Error::ParameterDomain {
                name: "sigma_eta",
                requirement: "sigma_eta >= 0",
                value: self.sigma_eta,
            });
        }
        Ok(())
    }
}

/// The block to acquire and the number of periods to do it in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExecutionProblem {
    pub total_shares: f64,
    pub horizon: usize,
}

impl Default for ExecutionProblem {
    fn default() -> Self {
        ExecutionProblem {
            total_shares: 100_000.0,
            horizon: 20,
        }
    }
}

impl ExecutionProblem {
    pub fn validate(&self) -> Result<()> {
        if self.total_shares.is_nan() || self.total_shares <= 0.0 {
            return Err(Error::ParameterDomain {
                name: "total_shares",
                requirement: "total_shares > 0",
                value: self.total_shares,
            });
        }
        if self.horizon < 1 {
            return Err(Error::ParameterDomain {
                name: "horizon",
                requirement: "horizon >= 1",
                value: self.horizon as f64,
            });
        }
        Ok(())
    }
}

/// One realization of the two shock sequences, each `horizon` long.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisePath {
    pub price_shocks: Vec<f64>,
    pub info_shocks: Vec<f64>,
}

impl NoisePath {
    /// All-zero shocks, the deterministic market.
    pub fn zero(horizon: usize) -> Self {
        NoisePath {
            price_shocks: vec![0.0; horizon],
            info_shocks: vec![0.0; horizon],
        }
    }

    pub fn horizon(&self) -> usize {
        self.price_shocks.len()
    }

    /// FNV-1a over the shock bit patterns; used to assert that competing
    /// strategies really consumed the identical path.
    pub fn checksum(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for v in self.price_shocks.iter().chain(self.info_shocks.iter()) {
            for byte in v.to_bits().to_le_bytes() {
                h ^= byte as u64;
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        }
        h
    }
}

/// Per-period purchases; a feasible schedule is nonnegative and sums to
/// the block.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub purchases: Vec<f64>,
}

impl Schedule {
    pub fn new(purchases: Vec<f64>) -> Self {
        Schedule { purchases }
    }

    /// The equal split `total_shares / horizon`.
    pub fn uniform(problem: &ExecutionProblem) -> Self {
        Schedule {
            purchases: vec![problem.total_shares / problem.horizon as f64; problem.horizon],
        }
    }

    pub fn horizon(&self) -> usize {
        self.purchases.len()
    }

    pub fn total(&self) -> f64 {
        self.purchases.iter().sum()
    }

    /// Feasibility for `problem`: right length, nonnegative entries, and
    /// full execution within 1e-9 relative.
    pub fn validate(&self, problem: &ExecutionProblem) -> Result<()> {
        if self.purchases.len() != problem.horizon {
            return Err(Error::LengthMismatch {
                what: "schedule",
                expected: problem.horizon,
                got: self.purchases.len(),
            });
        }
        for &b in &self.purchases {
            if b.is_nan() || b < 0.0 {
                return Err(Error::ParameterDomain {
                    name: "schedule entry",
                    requirement: "purchases[t] >= 0",
                    value: b,
                });
            }
        }
        let total = self.total();
        let gap = (total - problem.total_shares).abs();
        if gap > 1e-9 * problem.total_shares.abs() {
            return Err(Error::ParameterDomain {
                name: "schedule total",
                requirement: "sum of purchases = total_shares (1e-9 relative)",
                value: total,
            });
        }
        Ok(())
    }
}

/// Realized prices, information, inventory, and total cost of one path.
#[derive(Debug, Clone, PartialEq)]
pub struct PathOutcome {
    /// Realized price each period, length `horizon`.
    pub prices: Vec<f64>,
    /// Information levels including the pre-trade one, length `horizon + 1`.
    pub info: Vec<f64>,
    /// Remaining shares before each period and after the last, length `horizon + 1`.
    pub remaining: Vec<f64>,
    /// Total execution cost `sum_t prices[t] * purchases[t]`.
    pub cost: f64,
}

/// Draw both shock sequences.
///
/// Consumes `2 * horizon` normal draws from `rng` (price shocks first),
/// so one path always advances a stream by the same amount. A zero sigma
/// yields an exactly zero sequence.
pub fn sample_noise(
    rng: &mut impl RngCore,
    horizon: usize,
    sigma_eps: f64,
    sigma_eta: f64,
) -> NoisePath {
    debug_assert!(horizon >= 1 && sigma_eps >= 0.0 && sigma_eta >= 0.0);
    let price_shocks = (0..horizon)
        .map(|_| sigma_eps * standard_normal(rng))
        .collect();
    let info_shocks = (0..horizon)
        .map(|_| sigma_eta * standard_normal(rng))
        .collect();
    NoisePath {
        price_shocks,
        info_shocks,
    }
}

/// Run the AR(1) information recursion from `initial_info` through the
/// shocks; the result has one more entry than `info_shocks`.
pub fn propagate_info(initial_info: f64, rho: f64, info_shocks: &[f64]) -> Result<Vec<f64>> {
    if rho.is_nan() || rho.abs() >= 1.0 {
        return Err(Error::ParameterDomain {
            name: "rho",
            requirement: "|rho| < 1",
            value: rho,
        });
    }
    let mut info = Vec::with_capacity(info_shocks.len() + 1);
    info.push(initial_info);
    let mut level = initial_info;
    for &shock in info_shocks {
        level = rho * level + shock;
        info.push(level);
    }
    Ok(info)
}

/// Price the given schedule on one noise path.
///
/// Only the lengths are checked here; feasibility is the caller's contract
/// (the gradient code deliberately prices arbitrary length-`horizon`
/// vectors, and negative prices are allowed by the additive model).
pub fn simulate_schedule(
    params: &MarketParams,
    problem: &ExecutionProblem,
    schedule: &Schedule,
    noise: &NoisePath,
) -> Result<PathOutcome> {
    if schedule.purchases.len() != problem.horizon {
        return Err(Error::LengthMismatch {
            what: "schedule",
            expected: problem.horizon,
            got: schedule.purchases.len(),
        });
    }
    check_noise(problem, noise)?;
    let info = propagate_info(params.initial_info, params.rho, &noise.info_shocks)?;
    let mut prices = Vec::with_capacity(problem.horizon);
    let mut remaining = Vec::with_capacity(problem.horizon + 1);
    let mut price = params.initial_price;
    let mut left = problem.total_shares;
    let mut cost = 0.0;
    remaining.push(left);
    for t in 0..problem.horizon {
        let b = schedule.purchases[t];
        price += params.theta * b + params.gamma * info[t + 1] + noise.price_shocks[t];
        cost += price * b;
        left -= b;
        prices.push(price);
        remaining.push(left);
    }
    Ok(PathOutcome {
        prices,
        info,
        remaining,
        cost,
    })
}

/// Execute a state-feedback policy on one noise path.
///
/// Each period the callback sees `(t, remaining shares, info level before
/// the period's shock)` and proposes an order, which is clipped to
/// `[0, remaining]`; the final period is forced to take everything left,
/// so the realized schedule always executes the full block.
pub fn simulate_policy(
    params: &MarketParams,
    problem: &ExecutionProblem,
    mut policy: impl FnMut(usize, f64, f64) -> f64,
    noise: &NoisePath,
) -> Result<(Schedule, PathOutcome)> {
    check_noise(problem, noise)?;
    let info = propagate_info(params.initial_info, params.rho, &noise.info_shocks)?;
    let horizon = problem.horizon;
    let mut purchases = Vec::with_capacity(horizon);
    let mut prices = Vec::with_capacity(horizon);
    let mut remaining = Vec::with_capacity(horizon + 1);
    let mut price = params.initial_price;
    let mut left = problem.total_shares;
    let mut cost = 0.0;
    remaining.push(left);
    for t in 0..horizon {
        let b = if t + 1 == horizon {
            left
        } else {
            let raw = policy(t, left, info[t]);
            if !raw.is_finite() {
                return Err(Error::NonFinitePolicy {
                    period: t,
                    value: raw,
                });
            }
            raw.max(0.0).min(left)
        };
        price += params.theta * b + params.gamma * info[t + 1] + noise.price_shocks[t];
        cost += price * b;
        left -= b;
        purchases.push(b);
        prices.push(price);
        remaining.push(left);
    }
    Ok((
        Schedule { purchases },
        PathOutcome {
            prices,
            info,
            remaining,
            cost,
        },
    ))
}

fn check_noise(problem: &ExecutionProblem, noise: &NoisePath) -> Result<()> {
    if noise.price_shocks.len() != problem.horizon {
        return Err(Error::LengthMismatch {
            what: "price shocks",
            expected: problem.horizon,
            got: noise.price_shocks.len(),
        });
    }
    if noise.info_shocks.len() != problem.horizon {
        return Err(Error::LengthMismatch {
            what: "info shocks",
            expected: problem.horizon,
            got: noise.info_shocks.len(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    fn flat_market(theta: f64, gamma: f64, p0: f64) -> MarketParams {
        MarketParams {
            theta,
            gamma,
            rho: 0.0,
            sigma_eps: 0.0,
            sigma_eta: 0.0,
            initial_price: p0,
            initial_info: 0.0,
        }
    }

    #[test]
    fn zero_sigma_noise_is_exactly_zero() {
        let mut rng = stream_rng(1, 0);
        let noise = sample_noise(&mut rng, 5, 0.0, 0.0);
        assert_eq!(noise.price_shocks, vec![0.0; 5]);
        assert_eq!(noise.info_shocks, vec![0.0; 5]);
    }

    #[test]
    fn sample_noise_is_seed_deterministic() {
        let a = sample_noise(&mut stream_rng(9, 4), 20, 0.125, 1.0);
        let b = sample_noise(&mut stream_rng(9, 4), 20, 0.125, 1.0);
        assert_eq!(a, b);
    }

    #[test]
    fn sample_noise_variance_matches_sigma() {
        // Monte Carlo check of sigma_eps^2 = 0.125^2 = 0.015625.
        let mut rng = stream_rng(3, 0);
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        let mut n = 0usize;
        for _ in 0..10_000 {
            let path = sample_noise(&mut rng, 20, 0.125, 1.0);
            for &e in &path.price_shocks {
                sum += e;
                sum_sq += e * e;
                n += 1;
            }
        }
        let mean = sum / n as f64;
        let var = (sum_sq - n as f64 * mean * mean) / (n as f64 - 1.0);
        assert!(
            (var - 0.015625).abs() < 0.05 * 0.015625,
            "sample variance {var}"
        );
    }

    #[test]
    fn propagate_info_zero_everything() {
        assert_eq!(
            propagate_info(0.0, 0.5, &[0.0, 0.0, 0.0]).unwrap(),
            vec![0.0; 4]
        );
    }

    #[test]
    fn propagate_info_geometric_decay() {
        assert_eq!(
            propagate_info(1.0, 0.5, &[0.0, 0.0, 0.0]).unwrap(),
            vec![1.0, 0.5, 0.25, 0.125]
        );
    }

    #[test]
    fn propagate_info_hand_case() {
        assert_eq!(
            propagate_info(0.0, 0.5, &[2.0, 1.0]).unwrap(),
            vec![0.0, 2.0, 2.0]
        );
    }

    #[test]
    fn propagate_info_rejects_nonstationary_rho() {
        for rho in [1.0, -1.0, 1.5] {
            assert!(matches!(
                propagate_info(0.0, rho, &[0.0]),
                Err(Error::ParameterDomain { name: "rho", .. })
            ));
        }
    }

    #[test]
    fn flat_price_costs_initial_price_times_block() {
        let params = flat_market(0.0, 0.0, 50.0);
        let problem = ExecutionProblem {
            total_shares: 100_000.0,
            horizon: 20,
        };
        let schedule = Schedule::uniform(&problem);
        let outcome =
            simulate_schedule(&params, &problem, &schedule, &NoisePath::zero(20)).unwrap();
        assert_eq!(outcome.cost, 5_000_000.0);
    }

    #[test]
    fn impact_only_hand_case() {
        let params = flat_market(1.0, 0.0, 10.0);
        let problem = ExecutionProblem {
            total_shares: 5.0,
            horizon: 2,
        };
        let schedule = Schedule::new(vec![3.0, 2.0]);
        let outcome =
            simulate_schedule(&params, &problem, &schedule, &NoisePath::zero(2)).unwrap();
        assert_eq!(outcome.prices, vec![13.0, 15.0]);
        assert_eq!(outcome.cost, 69.0);
        assert_eq!(outcome.remaining, vec![5.0, 2.0, 0.0]);
    }

    #[test]
    fn info_shock_persists_in_price() {
        let params = MarketParams {
            theta: 1.0,
            gamma: 1.0,
            rho: 0.0,
            sigma_eps: 0.0,
            sigma_eta: 0.0,
            initial_price: 10.0,
            initial_info: 0.0,
        };
        let problem = ExecutionProblem {
            total_shares: 5.0,
            horizon: 2,
        };
        let noise = NoisePath {
            price_shocks: vec![0.0, 0.0],
            info_shocks: vec![1.0, 0.0],
        };
        let outcome =
            simulate_schedule(&params, &problem, &Schedule::new(vec![3.0, 2.0]), &noise).unwrap();
        assert_eq!(outcome.prices, vec![14.0, 16.0]);
        assert_eq!(outcome.cost, 74.0);
    }

    #[test]
    fn schedule_length_mismatch_rejected() {
        let params = MarketParams::default();
        let problem = ExecutionProblem {
            total_shares: 10.0,
            horizon: 3,
        };
        let err = simulate_schedule(
            &params,
            &problem,
            &Schedule::new(vec![5.0, 5.0]),
            &NoisePath::zero(3),
        )
        .unwrap_err();
        assert!(matches!(err, Error::LengthMismatch { .. }));
    }

    #[test]
    fn constant_policy_matches_fixed_schedule() {
        let params = flat_market(2e-4, 0.0, 40.0);
        let problem = ExecutionProblem {
            total_shares: 1000.0,
            horizon: 4,
        };
        let noise = NoisePath::zero(4);
        let (schedule, outcome) =
            simulate_policy(&params, &problem, |_, _, _| 250.0, &noise).unwrap();
        assert_eq!(schedule.purchases, vec![250.0; 4]);
        let direct = simulate_schedule(&params, &problem, &schedule, &noise).unwrap();
        assert_eq!(outcome.cost, direct.cost);
        assert_eq!(outcome.prices, direct.prices);
    }

    #[test]
    fn negative_policy_clips_then_final_period_forces() {
        let params = flat_market(0.0, 0.0, 10.0);
        let problem = ExecutionProblem {
            total_shares: 100.0,
            horizon: 4,
        };
        let (schedule, _) =
            simulate_policy(&params, &problem, |_, _, _| -5.0, &NoisePath::zero(4)).unwrap();
        assert_eq!(schedule.purchases, vec![0.0, 0.0, 0.0, 100.0]);
    }

    #[test]
    fn non_finite_policy_is_an_error() {
        let params = flat_market(0.0, 0.0, 10.0);
        let problem = ExecutionProblem {
            total_shares: 100.0,
            horizon: 4,
        };
        let err = simulate_policy(&params, &problem, |_, _, _| f64::NAN, &NoisePath::zero(4))
            .unwrap_err();
        assert!(matches!(err, Error::NonFinitePolicy { period: 0, .. }));
    }

    #[test]
    fn simulation_is_bit_deterministic() {
        let params = MarketParams::default();
        let problem = ExecutionProblem::default();
        let schedule = Schedule::uniform(&problem);
        let run = || {
            let noise = sample_noise(&mut stream_rng(11, 2), problem.horizon, 0.125, 1.0);
            simulate_schedule(&params, &problem, &schedule, &noise).unwrap()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn purchase_permanence_by_differencing() {
        // Raising b[t] by delta raises prices at every k >= t by exactly theta*delta.
        let params = MarketParams {
            sigma_eps: 0.0,
            sigma_eta: 0.0,
            ..MarketParams::default()
        };
        let problem = ExecutionProblem {
            total_shares: 1000.0,
            horizon: 6,
        };
        let noise = NoisePath::zero(6);
        let base = Schedule::new(vec![100.0, 200.0, 150.0, 250.0, 150.0, 150.0]);
        let mut bumped = base.clone();
        let t = 2;
        let delta = 40.0;
        bumped.purchases[t] += delta;
        let a = simulate_schedule(&params, &problem, &base, &noise).unwrap();
        let b = simulate_schedule(&params, &problem, &bumped, &noise).unwrap();
        for k in 0..problem.horizon {
            let expected = if k >= t { params.theta * delta } else { 0.0 };
            assert!(
                (b.prices[k] - a.prices[k] - expected).abs() < 1e-12,
                "period {k}"
            );
        }
    }

    #[test]
    fn schedule_validate_catches_violations() {
        let problem = ExecutionProblem {
            total_shares: 100.0,
            horizon: 2,
        };
        assert!(Schedule::new(vec![50.0, 50.0]).validate(&problem).is_ok());
        assert!(Schedule::new(vec![-1.0, 101.0]).validate(&problem).is_err());
        assert!(Schedule::new(vec![50.0, 51.0]).validate(&problem).is_err());
        assert!(Schedule::new(vec![100.0]).validate(&problem).is_err());
    }

    #[test]
    fn market_params_validation() {
        let mut p = MarketParams::default();
        assert!(p.validate().is_ok());
        p.rho = 1.0;
        assert!(p.validate().is_err());
        p.rho = 0.5;
        p.theta = -1e-6;
        assert!(p.validate().is_err());
        p.theta = 0.0;
        p.sigma_eps = -0.1;
        assert!(p.validate().is_err());
    }
}
