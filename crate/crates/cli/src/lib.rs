//! Config-driven experiment runner for the fractional variational solver.

pub mod cli;
pub mod compare;
pub mod config;
pub mod error;
pub mod run;
pub mod study;
pub mod svg;
pub mod sweep;

pub use error::{CliError, Result};
