//! Experiment configuration: documented defaults, TOML parsing, and the
//! conversions into the core types.
//!
//! The file format is flat key-value TOML using the field names below,
//! plus optional `[adagrad]`, `[rmsprop]`, `[adam]`, `[custom]` tables
//! that override the optimizer settings per variant. Unknown keys are
//! rejected by name; command-line flags override file values.

use std::path::PathBuf;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use optexec_core::market::{ExecutionProblem, MarketParams};
use optexec_core::sgd::{OptimizerConfig, SgdVariant};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
    Both,
}

impl OutputFormat {
    pub fn writes_csv(self) -> bool {
        matches!(self, OutputFormat::Csv | OutputFormat::Both)
    }

    pub fn writes_json(self) -> bool {
        matches!(self, OutputFormat::Json | OutputFormat::Both)
    }
}

/// Everything one experiment depends on. Every tunable named by the
/// library is reachable from here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    // market
    pub theta: f64,
    pub gamma: f64,
    pub rho: f64,
    pub sigma_eps: f64,
    pub sigma_eta: f64,
    pub initial_price: f64,
    pub initial_info: f64,
    // problem
    pub total_shares: f64,
    pub horizon: usize,
    // optimizer defaults (per-variant tables below override)
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub max_iters: usize,
    pub numeric_eps: f64,
    pub minibatch: usize,
    pub window: usize,
    // experiment
    pub seed: u64,
    pub paths: usize,
    pub out_dir: PathBuf,
    pub format: OutputFormat,
    // per-variant overrides
    pub adagrad: VariantOverride,
    pub rmsprop: VariantOverride,
    pub adam: VariantOverride,
    pub custom: VariantOverride,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let market = MarketParams::default();
        let problem = ExecutionProblem::default();
        let optimizer = OptimizerConfig::default();
        ExperimentConfig {
            theta: market.theta,
            gamma: market.gamma,
            rho: market.rho,
            sigma_eps: market.sigma_eps,
            sigma_eta: market.sigma_eta,
            initial_price: market.initial_price,
            initial_info: market.initial_info,
            total_shares: problem.total_shares,
            horizon: problem.horizon,
            learning_rate: optimizer.learning_rate,
            beta1: optimizer.beta1,
            beta2: optimizer.beta2,
            max_iters: optimizer.max_iters,
            numeric_eps: optimizer.numeric_eps,
            minibatch: optimizer.minibatch,
            window: optimizer.window,
            seed: 42,
            paths: 200,
            out_dir: PathBuf::from("out"),
            format: OutputFormat::Both,
            adagrad: VariantOverride::default(),
            rmsprop: VariantOverride::default(),
            adam: VariantOverride::default(),
            custom: VariantOverride::default(),
        }
    }
}

/// Optional per-variant optimizer settings; absent fields fall through to
/// the top-level values.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VariantOverride {
    pub learning_rate: Option<f64>,
    pub beta1: Option<f64>,
    pub beta2: Option<f64>,
    pub max_iters: Option<usize>,
    pub numeric_eps: Option<f64>,
    pub minibatch: Option<usize>,
    pub window: Option<usize>,
}

impl VariantOverride {
    fn apply(&self, mut base: OptimizerConfig) -> OptimizerConfig {
        if let Some(v) = self.learning_rate {
            base.learning_rate = v;
        }
        if let Some(v) = self.beta1 {
            base.beta1 = v;
        }
        if let Some(v) = self.beta2 {
            base.beta2 = v;
        }
        if let Some(v) = self.max_iters {
            base.max_iters = v;
        }
        if let Some(v) = self.numeric_eps {
            base.numeric_eps = v;
        }
        if let Some(v) = self.minibatch {
            base.minibatch = v;
        }
        if let Some(v) = self.window {
            base.window = v;
        }
        base
    }
}

impl ExperimentConfig {
    /// Parse and validate a TOML config.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let config: ExperimentConfig =
            toml::from_str(text).map_err(|err| CliError::Config(err.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Serialize back to TOML; `parse(emit(c))` reproduces `c` exactly.
    pub fn emit(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let config_err = |err: optexec_core::Error| CliError::Config(err.to_string());
        self.market().validate().map_err(config_err)?;
        self.problem().validate().map_err(config_err)?;
        for variant in SgdVariant::ALL {
            self.optimizer(variant).validate().map_err(config_err)?;
        }
        if self.paths == 0 {
            return Err(CliError::Config(
                "parameter `paths` out of domain: require paths >= 1, got 0".into(),
            ));
        }
        Ok(())
    }

    pub fn market(&self) -> MarketParams {
        MarketParams {
            theta: self.theta,
            gamma: self.gamma,
            rho: self.rho,
            sigma_eps: self.sigma_eps,
            sigma_eta: self.sigma_eta,
            initial_price: self.initial_price,
            initial_info: self.initial_info,
        }
    }

    pub fn problem(&self) -> ExecutionProblem {
        ExecutionProblem {
            total_shares: self.total_shares,
            horizon: self.horizon,
        }
    }

    /// The optimizer settings for one variant: top-level values with the
    /// variant's table applied on top.
    pub fn optimizer(&self, variant: SgdVariant) -> OptimizerConfig {
        let base = OptimizerConfig {
            learning_rate: self.learning_rate,
            beta1: self.beta1,
            beta2: self.beta2,
            max_iters: self.max_iters,
            numeric_eps: self.numeric_eps,
            minibatch: self.minibatch,
            window: self.window,
        };
        match variant {
            SgdVariant::AdaGrad => self.adagrad.apply(base),
            SgdVariant::RmsProp => self.rmsprop.apply(base),
            SgdVariant::Adam => self.adam.apply(base),
            SgdVariant::Custom => self.custom.apply(base),
        }
    }
}
