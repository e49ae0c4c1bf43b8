//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpaceError {
    #[error("point layout mismatch: space expects {expected} components, got {got}")]
    LayoutMismatch { expected: usize, got: usize },
    #[error("invalid space description: {0}")]
    InvalidSpace(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("operation unsupported for this space: {0}")]
    Unsupported(String),
    #[error("first factor is not well behaved; reorder factors or use the canonical transform")]
    NotWellBehaved,
    #[error("infeasible oracle: a ball of radius {radius} clips the Euclidean bounds from every feasible center")]
    InfeasibleOracle { radius: f64 },
    #[error("nearest-neighbor index is empty")]
    EmptyIndex,
    #[error("chi is undefined: no collision-detection time accumulated")]
    UndefinedRatio,
    #[error("scenario generation failed after {0} rejection rounds")]
    GenerationFailed(usize),
}
