//! Exact simulation of second-quantized mode registers for exchange-phase
//! interference experiments.
//!
//! The crate is organised around a sparse Fock-space statevector whose basis
//! states are occupation bitmasks. Ladder operators carry a Jordan-Wigner
//! string over the lower-ordered modes, so every sign that appears during an
//! experiment can be traced back to a single local hop through a
//! [`SignLedger`](fock::SignLedger).
//!
//! - [`fock`]: layouts, basis states, ladder operators, hops and the sign ledger.
//! - [`protocols`]: ancilla-controlled interference experiments and phase read-out.
//! - [`dynamics`]: pulsed hopping rotations, exact and Trotterized evolution.
//! - [`oracle`]: an independent dense-matrix reference used to audit the fast path.
//! - [`reference`]: optical path and gravitational interferometer phases.
//! - [`verify`]: the self-check suite run by `exchange-lab verify`.

pub mod dynamics;
pub mod error;
pub mod fock;
pub mod oracle;
pub mod protocols;
pub mod reference;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64 as Amplitude;

/// Absolute tolerance used for amplitude comparisons throughout the crate.
pub const AMPLITUDE_TOLERANCE: f64 = 1e-12;
