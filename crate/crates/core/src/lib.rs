//! Statevector simulator for symmetry restoration and anomalous relaxation
//! (the quantum Mpemba effect) in U(1)-symmetric random circuits and
//! anisotropic spin chains.
//!
//! The crate evolves tilted product states under brick-wall random circuits
//! with tunable Haar doping, or exactly under an XXZ-type Hamiltonian with
//! next-nearest-neighbor terms, and measures entanglement asymmetry, charge
//! variance, and charge-sector occupations. The `analysis` module detects the
//! trajectory crossings that define anomalous relaxation and fits peak
//! scaling laws; the `cli` module drives file-based experiments.

pub mod analysis;
pub mod circuit;
pub mod cli;
pub mod error;
pub mod gates;
pub mod hamiltonian;
pub mod metrics;
pub mod qstate;
pub mod series;

pub use error::{Error, Result};
pub use qstate::{InitialStatePattern, PatternKind, StateVector, SubsystemMask};
pub use series::{Observable, TimeSeries};
