//! Streaming bicriteria algorithms for the weighted k-submodular cover problem:
//! minimize the total cost of a k-set subject to a k-submodular utility
//! reaching a threshold `τ`.

pub mod error;
pub mod exact;
pub mod harness;
pub mod kset;
pub mod oracle;
pub mod solver;

pub use error::{Error, Result};
pub use kset::{ElementId, KSet, Position, WeightTable};
