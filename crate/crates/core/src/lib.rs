//! Invariant Hermitian geometry on the Kodaira-Thurston surface and the
//! pluriclosed flow `∂ₜω = −ρ^{1,1}` restricted to torus-invariant metrics.

pub mod error;
pub mod flow;
pub mod forms;
pub mod geometry;
pub mod grid;
pub mod runner;
pub mod vaisman;

pub use error::{Error, Result};
