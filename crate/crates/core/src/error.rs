use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("dimension {0} is outside 1..=6")]
    Dimension(u32),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: u32, found: u32 },
    #[error("face dimension {k} is not in 0..={d}")]
    FaceDimension { k: u32, d: u32 },
    #[error("face {0} is not a facet (it must have exactly one fixed coordinate)")]
    NotAFacet(String),
    #[error("invalid rules d={d} k={k} l={l}: {reason}")]
    Rules { d: u32, k: u32, l: u32, reason: &'static str },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("vertex {0} is not occupied")]
    Unoccupied(String),
    #[error("illegal move: {0}")]
    IllegalMove(String),
    #[error("invalid lift: {0}")]
    Lift(String),
    #[error("state budget of {0} exhausted")]
    Budget(u64),
    #[error("{0}")]
    Infeasible(String),
    #[error("target lies in a different component")]
    Unsolvable,
}

pub type Result<T> = std::result::Result<T, Error>;
