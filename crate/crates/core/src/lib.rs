//! Sliding puzzles on the vertices of the d-dimensional cube.
//!
//! Labeled tokens sit on the vertices of `Q^d`. A token may slide to any
//! vertex of a k-dimensional face when every other vertex of that face is
//! empty. This crate generates those moves, classifies configurations into
//! isolated / semi-isolated / mobile, explores whole puzzle graphs (component
//! census, diameter, parity structure) and solves individual puzzles
//! optimally.

pub mod classify;
pub mod config;
pub mod cube;
pub mod dense;
pub mod error;
pub mod explore;
pub mod formulas;
pub mod moves;
pub mod parity;
pub mod perm;
pub mod solver;
pub mod unlabeled;

pub use classify::{classify, first_mobile_l, Classification, Kind};
pub use config::{LabeledConfig, PackedKey, Rules, UnlabeledConfig};
pub use cube::{CubeSymmetry, FaceSpec, Vertex, MAX_DIM};
pub use error::{Error, Result};
pub use explore::{census, CensusMode, CensusReport, DiameterMode, Regime};
pub use moves::{Move, MoveEngine};
pub use solver::{hint, solve, SolveResult, SolveStatus};
pub use parity::{cycle_base_parity, strong_parity_verdict, ParityReport, ParityVerdict};
