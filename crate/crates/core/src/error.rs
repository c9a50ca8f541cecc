use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("not a group: {0}")]
    NotAGroup(String),

    #[error("unsupported size: {0}")]
    UnsupportedSize(String),

    #[error("element index {index} out of range for group of order {order}")]
    InvalidIndex { index: usize, order: usize },

    #[error("empty generating set")]
    EmptySeed,

    #[error("invalid group action: {0}")]
    InvalidAction(String),

    #[error("distributions live on different groups")]
    GroupMismatch,

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("infinite divergence term (absolute continuity fails)")]
    InfiniteTerm,

    #[error("not a density: minimum {min_value:.3e} at x = {argmin:.6}")]
    NotADensity { min_value: f64, argmin: f64 },

    #[error("grid of {grid} points too coarse for {harmonics} harmonics (need at least {needed})")]
    GridTooCoarse {
        grid: usize,
        harmonics: usize,
        needed: usize,
    },

    #[error("quadrature did not converge after {points} points (last change {last_change:.3e})")]
    QuadratureFailure { points: usize, last_change: f64 },

    #[error("invalid distortion profile: {0}")]
    ProfileInvalid(String),

    #[error("exact transport limited to order <= {limit}, got {order}")]
    SizeLimit { order: usize, limit: usize },

    #[error("argument {0} outside supported range")]
    RangeError(f64),

    #[error("slope parameter must be <= 0, got {0}")]
    InvalidBeta(f64),

    #[error("Blahut-Arimoto did not converge at beta = {beta} (last change {last_delta:.3e})")]
    NoConvergence { beta: f64, last_delta: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("precondition failed: {0}")]
    PreconditionFailed(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
