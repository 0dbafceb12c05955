//! Library half of the CLI: configuration, experiment orchestration, and
//! artifact rendering. The binary in `main.rs` is a thin clap wrapper.

pub mod config;
pub mod experiment;
pub mod output;

use std::fmt;

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or flags; exit code 2.
    Config(String),
    /// Failure while running or writing; exit code 3.
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Runtime(msg) => write!(f, "runtime error: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}
