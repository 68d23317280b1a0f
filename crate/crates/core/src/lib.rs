//! Monte Carlo simulator for cell-free massive MIMO where O-RUs are grouped
//! under edge distributed units (EDUs).
//!
//! The crate is organised bottom-up:
//!
//! * [`scenario`] builds geometry, radio constants and deterministic RNG streams.
//! * [`channel`] produces large-scale gains, spatial correlation, channel
//!   realizations and MMSE estimates.
//! * [`transceiver`] forms combiners/precoders for every scheme and evaluates
//!   use-and-then-forget SINRs by sample averaging.
//! * [`power`] implements fixed uplink power and the downlink heuristic allocation.
//! * [`deployment`] assigns O-RUs to EDUs (genetic interleaving or clustering).
//! * [`association`] learns UE–EDU association with multi-agent Q-learning.
//! * [`harness`] runs drops and campaigns and writes CSV/JSON results.

pub mod association;
pub mod channel;
pub mod deployment;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod power;
pub mod scenario;
pub mod transceiver;

pub use error::{Error, Result};

/// Complex sample type used throughout the simulator.
pub type C64 = num_complex::Complex64;
