//! Common-random-numbers benchmark of execution strategies.
//!
//! Every strategy is priced on the identical noise realizations, so cost
//! differences reflect the strategy and not the draw. Fixed schedules do
//! not adapt; the closed-form policy re-reads the information state on
//! each path. Each (strategy, path) cell records the checksum of the
//! noise it consumed, which is how the pairing is asserted.

use crate::closed_form::{coefficients, optimal_order};
use crate::error::{Error, Result};
use crate::market::{
    simulate_policy, simulate_schedule, ExecutionProblem, MarketParams, NoisePath, Schedule,
};

/// A named competitor: either a fixed schedule or the closed-form policy.
#[derive(Debug, Clone)]
pub struct Strategy {
    pub name: String,
    pub kind: StrategyKind,
}

#[derive(Debug, Clone)]
pub enum StrategyKind {
    Fixed(Schedule),
    ClosedForm,
}

impl Strategy {
    pub fn fixed(name: impl Into<String>, schedule: Schedule) -> Self {
        Strategy {
            name: name.into(),
            kind: StrategyKind::Fixed(schedule),
        }
    }

    pub fn closed_form(name: impl Into<String>) -> Self {
        Strategy {
            name: name.into(),
            kind: StrategyKind::ClosedForm,
        }
    }
}

/// Per-strategy, per-path execution costs with the consumed-noise
/// checksums.
#[derive(Debug, Clone)]
pub struct CostMatrix {
    pub strategy_names: Vec<String>,
    /// `costs[s][p]` = cost of strategy `s` on path `p`.
    pub costs: Vec<Vec<f64>>,
    /// `noise_checksums[s][p]` = checksum of the path strategy `s` consumed.
    pub noise_checksums: Vec<Vec<u64>>,
}

impl CostMatrix {
    pub fn paths(&self) -> usize {
        self.costs.first().map_or(0, Vec::len)
    }

    /// True when every strategy consumed the identical path everywhere.
    pub fn common_noise_verified(&self) -> bool {
        let Some(first) = self.noise_checksums.first() else {
            return true;
        };
        self.noise_checksums.iter().all(|row| row == first)
    }

    pub fn mean_cost(&self, strategy: usize) -> f64 {
        let row = &self.costs[strategy];
        row.iter().sum::<f64>() / row.len() as f64
    }
}

/// Realized purchase data backing the dispersion metrics.
#[derive(Debug, Clone)]
pub struct RealizedSchedules {
    /// Realized schedule of each strategy on the first (reference) path.
    pub reference: Vec<Schedule>,
    /// Pooled per-period purchase statistics over all paths.
    pub pooled: Vec<PooledStats>,
}

/// Streaming mean/variance accumulator (Welford).
#[derive(Debug, Clone, Default)]
pub struct PooledStats {
    count: u64,
    mean: f64,
    m2: f64,
}

impl PooledStats {
    pub fn push(&mut self, value: f64) {
        self.count += 1;
        let delta = value - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (value - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// Sample standard deviation (ddof 1); zero below two observations.
    pub fn sample_std(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.m2 / (self.count - 1) as f64).sqrt()
        }
    }
}

/// One row of the comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyReport {
    pub name: String,
    /// Mean execution cost across the evaluation paths.
    pub cost: f64,
    /// (cost - optimum cost) / total shares; zero for the optimum row.
    pub excess_per_share: f64,
    /// Sample std of the per-period purchases on the reference path.
    pub std_within_path: f64,
    /// Sample std of the purchases pooled over every (path, period).
    pub std_across_paths_total: f64,
    /// 1-based cost rank, ties broken by name.
    pub rank: usize,
}

/// Price every strategy on every supplied path.
pub fn evaluate_common(
    strategies: &[Strategy],
    params: &MarketParams,
    problem: &ExecutionProblem,
    noise_paths: &[NoisePath],
) -> Result<(CostMatrix, RealizedSchedules)> {
    evaluate_common_with(strategies, params, problem, noise_paths.len(), |p| {
        noise_paths[p].clone()
    })
}

/// Streaming form of [`evaluate_common`]: paths come from a generator so
/// large path counts never materialize in memory at once.
pub fn evaluate_common_with(
    strategies: &[Strategy],
    params: &MarketParams,
    problem: &ExecutionProblem,
    path_count: usize,
    mut path_source: impl FnMut(usize) -> NoisePath,
) -> Result<(CostMatrix, RealizedSchedules)> {
    if strategies.is_empty() {
        return Err(Error::EmptyInput("strategies"));
    }
    if path_count == 0 {
        return Err(Error::EmptyInput("noise paths"));
    }
    for strategy in strategies {
        if let StrategyKind::Fixed(schedule) = &strategy.kind {
            if schedule.horizon() != problem.horizon {
                return Err(Error::LengthMismatch {
                    what: "fixed strategy schedule",
                    expected: problem.horizon,
                    got: schedule.horizon(),
                });
            }
        }
    }
    let needs_policy = strategies
        .iter()
        .any(|s| matches!(s.kind, StrategyKind::ClosedForm));
    let coeffs = if needs_policy {
        Some(coefficients(problem, params)?)
    } else {
        None
    };

    let n = strategies.len();
    let mut costs = vec![Vec::with_capacity(path_count); n];
    let mut checksums = vec![Vec::with_capacity(path_count); n];
    let mut reference = Vec::with_capacity(n);
    let mut pooled = vec![PooledStats::default(); n];

    for p in 0..path_count {
        let noise = path_source(p);
        let checksum = noise.checksum();
        for (s, strategy) in strategies.iter().enumerate() {
            let (cost, purchases): (f64, &[f64]) = match &strategy.kind {
                StrategyKind::Fixed(schedule) => {
                    let outcome = simulate_schedule(params, problem, schedule, &noise)?;
                    (outcome.cost, &schedule.purchases)
                }
                StrategyKind::ClosedForm => {
                    let coeffs = coeffs.as_ref().expect("coefficients prepared above");
                    let (realized, outcome) = simulate_policy(
                        params,
                        problem,
                        |t, left, info| optimal_order(t, left, info, coeffs),
                        &noise,
                    )?;
                    if p == 0 {
                        reference.push(realized.clone());
                    }
                    pooled_push(&mut pooled[s], &realized.purchases);
                    costs[s].push(outcome.cost);
                    checksums[s].push(checksum);
                    continue;
                }
            };
            if p == 0 {
                reference.push(Schedule::new(purchases.to_vec()));
            }
            pooled_push(&mut pooled[s], purchases);
            costs[s].push(cost);
            checksums[s].push(checksum);
        }
    }

    Ok((
        CostMatrix {
            strategy_names: strategies.iter().map(|s| s.name.clone()).collect(),
            costs,
            noise_checksums: checksums,
        },
        RealizedSchedules { reference, pooled },
    ))
}

fn pooled_push(stats: &mut PooledStats, purchases: &[f64]) {
    for &b in purchases {
        stats.push(b);
    }
}

/// Turn the matrix into one report per strategy (input order preserved).
pub fn metrics(
    matrix: &CostMatrix,
    schedules: &RealizedSchedules,
    optimum_name: &str,
) -> Result<Vec<StrategyReport>> {
    if matrix.costs.is_empty() || matrix.paths() == 0 {
        return Err(Error::EmptyInput("cost matrix"));
    }
    let optimum = matrix
        .strategy_names
        .iter()
        .position(|n| n == optimum_name)
        .ok_or_else(|| Error::UnknownStrategy(optimum_name.to_string()))?;
    let optimum_cost = matrix.mean_cost(optimum);
    // Schedules execute the full block, so the block size is recoverable
    // from the optimum's realized reference schedule.
    let total_shares = schedules.reference[optimum].total();

    let n = matrix.strategy_names.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        matrix
            .mean_cost(a)
            .total_cmp(&matrix.mean_cost(b))
            .then_with(|| matrix.strategy_names[a].cmp(&matrix.strategy_names[b]))
    });
    let mut rank = vec![0usize; n];
    for (position, &idx) in order.iter().enumerate() {
        rank[idx] = position + 1;
    }

    Ok((0..n)
        .map(|s| {
            let cost = matrix.mean_cost(s);
            StrategyReport {
                name: matrix.strategy_names[s].clone(),
                cost,
                excess_per_share: (cost - optimum_cost) / total_shares,
                std_within_path: sample_std(&schedules.reference[s].purchases),
                std_across_paths_total: schedules.pooled[s].sample_std(),
                rank: rank[s],
            }
        })
        .collect())
}

/// Reports sorted into display order: cost ascending, ties by name.
pub fn rank_report(reports: &[StrategyReport]) -> Result<Vec<StrategyReport>> {
    if reports.is_empty() {
        return Err(Error::EmptyInput("reports"));
    }
    let mut sorted = reports.to_vec();
    sorted.sort_by(|a, b| a.cost.total_cmp(&b.cost).then_with(|| a.name.cmp(&b.name)));
    Ok(sorted)
}

fn sample_std(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (ss / (n - 1.0)).sqrt()
}
