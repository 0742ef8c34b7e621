//! Random regular graphs from the configuration model and exact
//! total-variation profiles of simple, lazy and non-backtracking walks on them.

pub mod cli;
pub mod config_model;
pub mod error;
pub mod geometry;
pub mod graph;
pub mod mixing;
pub mod monte_carlo;
pub mod rng;
pub mod theory;
pub mod verify;
pub mod walk;

pub use error::{Error, Result};
pub use graph::{DirectedEdgeSpace, RegularGraph};
pub use walk::{Kernel, ProbVector, StateSpace, WalkKind};
