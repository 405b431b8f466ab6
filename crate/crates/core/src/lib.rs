//! Temporal correlations between two instants, treated as quantum channels.
//!
//! A channel Φ from the system at t₀ to the system at t₁ is stored, via an
//! ancilla protocol, in a bipartite state: its Choi state. This crate
//! simulates that protocol, reconstructs Φ by simulated tomography, and
//! quantifies the correlation through the entanglement of formation of the
//! Choi state, minimized over local bases.
//!
//! Module map:
//!
//! - [`qmath`]: dense complex linear algebra (products, partial traces,
//!   Jacobi eigensolver, trace norm).
//! - [`states`]: density matrices, pure states, basis pairs, Haar sampling.
//! - [`channels`]: Kraus channels, Choi states, CPTP checks, named channels.
//! - [`protocol`]: the copy/evolve/copy/project ancilla protocol.
//! - [`tomography`]: simulated state tomography and channel recovery.
//! - [`entanglement`]: entanglement of formation, PPT, distance and
//!   diamond-norm bounds.
//! - [`quantifier`]: the temporal-correlation measure and its sweeps.

pub mod channels;
pub mod entanglement;
mod error;
pub mod protocol;
pub mod qmath;
pub mod quantifier;
pub mod rng;
pub mod simplex;
pub mod states;
pub mod tomography;

pub use error::{Error, Result};
pub use qmath::CMat;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
