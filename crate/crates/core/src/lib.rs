//! Variational quantum solver for Caputo time-fractional partial differential
//! equations.
//!
//! The crate is organised bottom-up:
//!
//! * [`fractional`] holds the deterministic pieces of the difference schemes
//!   (Caputo weights, system matrices, history coefficients).
//! * [`statevector`] is a real-amplitude statevector engine with the gate set
//!   the measurement circuits need.
//! * [`measurement`] evaluates overlaps and expectation values either exactly
//!   or by sampling the ancilla circuits.
//! * [`noise`] injects stochastic gate and readout faults into sampled runs.
//! * [`vqa`] builds the per-step cost functions, gradients and optimizers and
//!   marches a problem in time.
//! * [`classical`] is the finite-difference oracle every result is checked
//!   against.
//! * [`models`] binds the three problem families to their parameters.

pub mod classical;
pub mod error;
pub mod fractional;
pub mod measurement;
pub mod models;
pub mod noise;
pub mod statevector;
pub mod vqa;

pub use error::{Error, Result};
