//! Error types shared across the crate.

use thiserror::Error;

/// All failure modes of the numerical pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("trajectory escaped the phase-space cap at y = {exit_y}: {detail}")]
    TrajectoryEscape { exit_y: f64, detail: String },

    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),

    #[error("degenerate trajectory: {0}")]
    DegenerateTrajectory(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("index {index} out of range (len {len})")]
    OutOfRange { index: usize, len: usize },

    #[error("no critical point: {0}")]
    NoCriticalPoint(String),

    #[error("data inconsistency: {0}")]
    DataInconsistency(String),

    #[error("out of time domain: epsilon(t) = {epsilon} <= 1/2 at t = {t}")]
    OutOfTimeDomain { t: f64, epsilon: f64 },

    #[error("flow exited the profile domain at t = {t}, x = {x}")]
    DomainExit { t: f64, x: f64 },

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("bound violation: {0}")]
    BoundViolation(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("invalid support: {0}")]
    InvalidSupport(String),

    #[error("degenerate state: {0}")]
    DegenerateState(String),

    #[error("linear step rejected: {0}")]
    StepRejection(String),

    #[error("singular linear system: {0}")]
    SingularSystem(String),

    #[error("numerical blow-up: {0}")]
    NumericalBlowup(String),
}

pub type Result<T> = std::result::Result<T, Error>;
