//! Simulation of entanglement distribution between mechanical resonators of
//! very different frequencies.
//!
//! * [`cascaded`]: steady-state Gaussian model of a dispersive optomechanical
//!   cavity whose output drives a remote Brillouin (triple-resonant) node.
//! * [`pulse`]: the pulsed two-mode-squeezing / state-transfer protocol, in
//!   closed covariance-matrix form.
//! * [`fock`]: a truncated Fock-space simulation of the pulsed protocol, used
//!   to cross-check the Gaussian formulas.
//! * [`cli`]: configuration, sweeps and output writers behind the `mechnet`
//!   binary.

// Negated comparisons are used on purpose so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cascaded;
pub mod cli;
pub mod error;
pub mod fock;
pub mod gaussian;
pub mod pulse;
pub mod units;

pub use error::{Error, Result};
pub use gaussian::CovarianceMatrix;
