//! Entropy-typical sets, entropy-typical subspaces and a universal
//! Schumacher-style compression channel, computed exactly at desk scale.
//!
//! * [`classical_types`]: method of types, typical-set sizes and masses.
//! * [`quantum_state`]: density matrices, spectra, dephasing.
//! * [`basis_search`]: rotating a measurement basis until the dephased
//!   entropy reaches a target.
//! * [`typical_projector`]: typical subspaces and their overlap with
//!   `rho^{(x)n}` via the type-class product formula.
//! * [`schumacher_channel`]: the dense compression channel and its fidelity.

pub mod basis_search;
pub mod classical_types;
pub mod error;
pub mod exec;
pub mod quantum_state;
pub mod sampling;
pub mod schumacher_channel;
pub mod typical_projector;

pub use error::{Error, Result};
pub use exec::Execution;
