//! Command-line driver: simulate one strategy, run one optimizer,
//! benchmark everything on common noise, or sanity-check the closed form
//! against the brute-force oracle.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use optexec_core::sgd::SgdVariant;

use optexec::config::{ExperimentConfig, OutputFormat};
use optexec::output::{self, fmt_f64};
use optexec::{experiment, CliError};

#[derive(Parser)]
#[command(
    name = "optexec",
    about = "Simulate and benchmark large-order execution strategies in a permanent price-impact market",
    version
)]
struct Cli {
    /// TOML config file; flags below override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed for every random stream
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Number of common evaluation noise paths
    #[arg(long, global = true)]
    paths: Option<usize>,
    /// Output directory for artifacts
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Which artifact formats to write
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum StrategyChoice {
    Optimum,
    Uniform,
    Adagrad,
    Rmsprop,
    Adam,
    Custom,
}

impl StrategyChoice {
    fn name(self) -> &'static str {
        match self {
            StrategyChoice::Optimum => "optimum",
            StrategyChoice::Uniform => "uniform",
            StrategyChoice::Adagrad => "adagrad",
            StrategyChoice::Rmsprop => "rmsprop",
            StrategyChoice::Adam => "adam",
            StrategyChoice::Custom => "custom",
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum VariantChoice {
    Adagrad,
    Rmsprop,
    Adam,
    Custom,
}

impl VariantChoice {
    fn variant(self) -> SgdVariant {
        match self {
            VariantChoice::Adagrad => SgdVariant::AdaGrad,
            VariantChoice::Rmsprop => SgdVariant::RmsProp,
            VariantChoice::Adam => SgdVariant::Adam,
            VariantChoice::Custom => SgdVariant::Custom,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Price one strategy on a single noise path
    Simulate {
        #[arg(long, value_enum, default_value_t = StrategyChoice::Optimum)]
        strategy: StrategyChoice,
    },
    /// Run one SGD variant and write its convergence trace
    Optimize {
        #[arg(long, value_enum)]
        variant: VariantChoice,
    },
    /// Full comparison: closed form plus all four SGD variants on common noise
    Benchmark,
    /// Check the closed form against exhaustive enumeration on a small instance
    Oracle {
        /// Periods of the oracle instance (at most 4)
        #[arg(long, default_value_t = 3)]
        horizon: usize,
        /// Block size of the oracle instance (default: the configured block)
        #[arg(long)]
        total_shares: Option<f64>,
        /// Enumeration grid step (default: total/60)
        #[arg(long)]
        grid_step: Option<f64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{err}");
            ExitCode::from(err.exit_code())
        }
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let mut config = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|err| {
                CliError::Config(format!("cannot read {}: {err}", path.display()))
            })?;
            ExperimentConfig::parse(&text)?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(paths) = cli.paths {
        config.paths = paths;
    }
    if let Some(out) = &cli.out {
        config.out_dir = out.clone();
    }
    if let Some(format) = cli.format {
        config.format = format;
    }
    config.validate()?;
    Ok(config)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = load_config(&cli)?;
    match cli.command {
        Command::Simulate { strategy } => {
            let (schedule, outcome) = experiment::simulate_one(&config, strategy.name())?;
            if config.format.writes_json() && !config.format.writes_csv() {
                println!(
                    "{}",
                    serde_json::json!({
                        "strategy": strategy.name(),
                        "seed": config.seed,
                        "cost": outcome.cost,
                        "purchases": schedule.purchases,
                    })
                );
            } else {
                println!("strategy: {}", strategy.name());
                println!("cost: {}", fmt_f64(outcome.cost));
                println!("period,shares");
                for (t, b) in schedule.purchases.iter().enumerate() {
                    println!("{},{}", t + 1, fmt_f64(*b));
                }
            }
            Ok(())
        }
        Command::Optimize { variant } => {
            let variant = variant.variant();
            let (schedule, trace) = experiment::optimize_variant(&config, variant)?;
            let trace_csv = output::render_trace_csv(&[(variant.name(), trace.clone())]);
            output::write_atomic_all(&config.out_dir, &[("trace.csv".into(), trace_csv)])
                .map_err(|err| CliError::Runtime(format!("writing trace.csv: {err}")))?;
            let last = trace.records.last().expect("at least one iteration");
            println!("variant: {}", variant.name());
            println!("iterations: {}", trace.records.len());
            println!("final objective estimate: {}", fmt_f64(last.objective));
            println!("trace: {}", config.out_dir.join("trace.csv").display());
            println!("period,shares");
            for (t, b) in schedule.purchases.iter().enumerate() {
                println!("{},{}", t + 1, fmt_f64(*b));
            }
            Ok(())
        }
        Command::Benchmark => {
            let ranked = experiment::run_experiment(&config)?;
            println!("strategy,cost,excess_per_share,rank");
            for r in &ranked {
                println!(
                    "{},{},{},{}",
                    r.name,
                    fmt_f64(r.cost),
                    fmt_f64(r.excess_per_share),
                    r.rank
                );
            }
            println!("artifacts: {}", config.out_dir.display());
            Ok(())
        }
        Command::Oracle {
            horizon,
            total_shares,
            grid_step,
        } => {
            let total = total_shares.unwrap_or(config.total_shares);
            let grid = grid_step.unwrap_or(total / 60.0);
            let comparison = experiment::run_oracle(&config, horizon, total, grid)?;
            println!("instance: horizon {horizon}, total {total}, grid {grid}, zero noise");
            println!("oracle cost: {}", fmt_f64(comparison.oracle_cost));
            println!("closed-form cost: {}", fmt_f64(comparison.closed_form_cost));
            println!("period,oracle,closed_form");
            for t in 0..horizon {
                println!(
                    "{},{},{}",
                    t + 1,
                    fmt_f64(comparison.oracle_schedule.purchases[t]),
                    fmt_f64(comparison.closed_form_schedule.purchases[t])
                );
            }
            Ok(())
        }
    }
}
