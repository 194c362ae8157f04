//! Artificial grammar learning toolkit.
//!
//! Grammar generators and membership oracles for the sub-regular and Chomsky
//! hierarchies, a dense / simple-recurrent / gated-recurrent network engine
//! written on top of plain matrix arithmetic, a training harness, a resumable
//! grid-sweep runner and descriptive analysis of sweep results.

pub mod analysis;
pub mod encoding;
pub mod error;
pub mod grammar;
pub mod nn;
pub mod seed;
pub mod sweep;
pub mod train;

pub use error::{Error, Result};
