use thiserror::Error;

/// Errors raised anywhere in the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of a physical formula.
    #[error("domain error: {0}")]
    Domain(String),

    /// The apparatus configuration is inconsistent.
    #[error("configuration error: {0}")]
    Config(String),

    /// Detector fibers could not be placed on the synthesized pattern.
    #[error("placement error: {0}")]
    Placement(String),

    /// Reflectance never reaches the target on the searched interval.
    #[error(
        "no incidence angle gives reflectance {target} for {polarization} polarization \
         (maximum {max_reflectance:.6} on the search interval)"
    )]
    NoSolution {
        target: f64,
        polarization: &'static str,
        max_reflectance: f64,
    },

    /// A coordinate outside the sampled observation plane.
    #[error("range error: x = {x} m lies outside [{min}, {max}]")]
    Range { x: f64, min: f64, max: f64 },

    /// A metric whose denominator is zero.
    #[error("undefined metric `{metric}`: {reason}")]
    UndefinedMetric {
        metric: &'static str,
        reason: String,
    },

    /// The fringe fit did not converge to an acceptable residual.
    #[error("fit failure: {0}")]
    FitFailure(String),

    /// An operation was requested for a model that does not support it.
    #[error("model mismatch: {0}")]
    ModelMismatch(String),

    /// Syntax error in an experiment file.
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    /// Strict-schema violation in an experiment file.
    #[error("schema error: {0}")]
    Schema(String),

    /// A value failed validation; `key` names the offending file key.
    #[error("invalid value for `{key}`: {message}")]
    Validation { key: String, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
