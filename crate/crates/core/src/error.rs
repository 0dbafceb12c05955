//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter `{name}` out of domain: require {requirement}, got {value}")]
    ParameterDomain {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error("{what}: expected length {expected}, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("{0} must not be empty")]
    EmptyInput(&'static str),
    #[error("policy returned a non-finite order {value} at period {period}")]
    NonFinitePolicy { period: usize, value: f64 },
    #[error("brute-force enumeration too large: {0}")]
    Intractable(String),
    #[error("strategy `{0}` not present")]
    UnknownStrategy(String),
}

pub type Result<T> = std::result::Result<T, Error>;
