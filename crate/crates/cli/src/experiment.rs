//! Experiment orchestration behind the CLI subcommands.
//!
//! One master seed determines every draw: evaluation path `j` reads stream
//! `STREAM_EVAL_BASE + j`, optimizer variant `v` reads stream
//! `STREAM_OPTIMIZER_BASE + v`, and the one-shot `simulate` path reads
//! `STREAM_SIMULATE`. All strategies therefore face identical evaluation
//! noise, and reruns with the same config and seed are byte-identical.

use optexec_core::benchmark::{
    evaluate_common_with, metrics, rank_report, Strategy, StrategyReport,
};
use optexec_core::closed_form::{brute_force_oracle, coefficients, optimal_order};
use optexec_core::market::{
    sample_noise, simulate_policy, simulate_schedule, NoisePath, PathOutcome, Schedule,
};
use optexec_core::rng::{
    stream_rng, STREAM_EVAL_BASE, STREAM_OPTIMIZER_BASE, STREAM_SIMULATE,
};
use optexec_core::sgd::{run_optimizer, ConvergenceTrace, SgdVariant};

use crate::config::ExperimentConfig;
use crate::output;
use crate::CliError;

fn runtime(err: optexec_core::Error) -> CliError {
    CliError::Runtime(err.to_string())
}

/// Run one SGD variant on its dedicated stream of the experiment seed.
pub fn optimize_variant(
    config: &ExperimentConfig,
    variant: SgdVariant,
) -> Result<(Schedule, ConvergenceTrace), CliError> {
    let stream = STREAM_OPTIMIZER_BASE
        + SgdVariant::ALL
            .iter()
            .position(|v| *v == variant)
            .expect("variant listed") as u64;
    let mut rng = stream_rng(config.seed, stream);
    run_optimizer(
        variant,
        &config.optimizer(variant),
        &config.market(),
        &config.problem(),
        &mut rng,
    )
    .map_err(runtime)
}

fn eval_path(config: &ExperimentConfig, index: usize) -> NoisePath {
    sample_noise(
        &mut stream_rng(config.seed, STREAM_EVAL_BASE + index as u64),
        config.horizon,
        config.sigma_eps,
        config.sigma_eta,
    )
}

/// The full comparison: four optimizer runs, common-noise evaluation,
/// metrics, and the artifact files. Returns the ranked report rows.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<StrategyReport>, CliError> {
    let params = config.market();
    let problem = config.problem();

    let mut strategies = vec![Strategy::closed_form("optimum")];
    let mut traces: Vec<(&'static str, ConvergenceTrace)> = Vec::new();
    for variant in SgdVariant::ALL {
        let (schedule, trace) = optimize_variant(config, variant)?;
        strategies.push(Strategy::fixed(variant.name(), schedule));
        traces.push((variant.name(), trace));
    }

    let (matrix, schedules) =
        evaluate_common_with(&strategies, &params, &problem, config.paths, |j| {
            eval_path(config, j)
        })
        .map_err(runtime)?;
    assert!(
        matrix.common_noise_verified(),
        "strategies consumed different noise paths"
    );
    let reports = metrics(&matrix, &schedules, "optimum").map_err(runtime)?;
    let ranked = rank_report(&reports).map_err(runtime)?;

    let mut files: Vec<(String, String)> = Vec::new();
    if config.format.writes_csv() {
        files.push(("report.csv".into(), output::render_report_csv(&ranked)));
        files.push((
            "schedules.csv".into(),
            output::render_schedules_csv(&matrix.strategy_names, &schedules.reference),
        ));
        files.push(("trace.csv".into(), output::render_trace_csv(&traces)));
    }
    if config.format.writes_json() {
        files.push((
            "report.json".into(),
            output::render_report_json(config, &ranked),
        ));
    }
    output::write_atomic_all(&config.out_dir, &files)
        .map_err(|err| CliError::Runtime(format!("writing artifacts: {err}")))?;
    if config.format.writes_csv() {
        output::emit_plot_data(&config.out_dir)?;
    }
    Ok(ranked)
}

/// One path, one strategy.
pub fn simulate_one(
    config: &ExperimentConfig,
    strategy: &str,
) -> Result<(Schedule, PathOutcome), CliError> {
    let params = config.market();
    let problem = config.problem();
    let noise = sample_noise(
        &mut stream_rng(config.seed, STREAM_SIMULATE),
        config.horizon,
        config.sigma_eps,
        config.sigma_eta,
    );
    match strategy {
        "optimum" => {
            let coeffs = coefficients(&problem, &params).map_err(runtime)?;
            simulate_policy(
                &params,
                &problem,
                |t, left, info| optimal_order(t, left, info, &coeffs),
                &noise,
            )
            .map_err(runtime)
        }
        "uniform" => {
            let schedule = Schedule::uniform(&problem);
            let outcome =
                simulate_schedule(&params, &problem, &schedule, &noise).map_err(runtime)?;
            Ok((schedule, outcome))
        }
        name => {
            let variant = SgdVariant::ALL
                .into_iter()
                .find(|v| v.name() == name)
                .ok_or_else(|| CliError::Config(format!("unknown strategy `{name}`")))?;
            let (schedule, _) = optimize_variant(config, variant)?;
            let outcome =
                simulate_schedule(&params, &problem, &schedule, &noise).map_err(runtime)?;
            Ok((schedule, outcome))
        }
    }
}

/// Closed form against the exhaustive oracle on a small zero-noise
/// instance.
pub struct OracleComparison {
    pub oracle_schedule: Schedule,
    pub oracle_cost: f64,
    pub closed_form_schedule: Schedule,
    pub closed_form_cost: f64,
}

pub fn run_oracle(
    config: &ExperimentConfig,
    horizon: usize,
    total_shares: f64,
    grid_step: f64,
) -> Result<OracleComparison, CliError> {
    let params = config.market();
    let problem = optexec_core::market::ExecutionProblem {
        total_shares,
        horizon,
    };
    let noise = NoisePath::zero(horizon);
    let (oracle_schedule, oracle_cost) = brute_force_oracle(&params, &problem, grid_step, &noise)
        .map_err(|err| match err {
            err @ optexec_core::Error::Intractable(_)
            | err @ optexec_core::Error::ParameterDomain { .. } => {
                CliError::Config(err.to_string())
            }
            err => runtime(err),
        })?;
    let coeffs = coefficients(&problem, &params).map_err(runtime)?;
    let (closed_form_schedule, outcome) = simulate_policy(
        &params,
        &problem,
        |t, left, info| optimal_order(t, left, info, &coeffs),
        &noise,
    )
    .map_err(runtime)?;
    Ok(OracleComparison {
        oracle_schedule,
        oracle_cost,
        closed_form_schedule,
        closed_form_cost: outcome.cost,
    })
}
