// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Simulation, pulse optimization and error budgeting for the symmetric
//! Rydberg controlled-phase gate between two atoms.

pub mod budget;
pub mod cli;
pub mod error;
pub mod metrics;
pub mod optimizer;
pub mod pulses;
pub mod quantum;

pub use error::{Error, Result};
