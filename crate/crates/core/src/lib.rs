//! Simulation engine for networks of Kuramoto-coupled quasi-cycle
//! oscillators: noise-sustained damped oscillations of a linear
//! excitatory-inhibitory population model, written in polar form and coupled
//! through their phases and amplitudes.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod harness;
pub mod metrics;
pub mod model;
pub mod network;
pub mod processes;
pub mod sde;

pub use error::{Error, Result};
