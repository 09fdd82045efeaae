use thiserror::Error;

use crate::lp::LpError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("invalid dataset: {0}")]
    InvalidData(String),
    #[error("invalid assurance region: {0}")]
    InvalidRegion(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("point is outside the production possibility set")]
    OutsideTechnology,
    #[error("unbounded: {0}")]
    Unbounded(String),
    #[error("{0} requires strictly positive coordinates; coordinate {1} is zero")]
    ZeroCoordinate(&'static str, usize),
    #[error("primal and dual scores disagree: primal {primal}, dual {dual}")]
    DualMismatch { primal: f64, dual: f64 },
    #[error("internal solver error: {0}")]
    Internal(String),
    #[error("assumptions do not hold: {0}")]
    Assumptions(String),
}

pub type Result<T> = std::result::Result<T, Error>;
