//! Numerical toolkit for port-based teleportation, instantaneous non-local
//! measurements and position verification.
//!
//! The modules build on each other bottom-up: [`linalg`] supplies dense
//! complex matrices, [`qcore`] the quantum primitives, and the remaining
//! modules implement the protocols, bounds and attacks.

pub mod error;
pub mod instprotocols;
pub mod linalg;
pub mod lowerbound;
pub mod mub;
pub mod portbased;
pub mod posverify;
pub mod qcore;
pub mod random;
pub mod rng;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
