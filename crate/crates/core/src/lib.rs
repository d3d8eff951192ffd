//! Stabilizer quantum error-correction codes as metrological probes.
//!
//! The crate is layered bottom-up:
//!
//! - [`pauli`]: signed Pauli words with exact phase tracking.
//! - [`stabilizer`]: code validation, signed group membership, logical cosets,
//!   error classification and brute-force distance.
//! - [`simulator`]: dense statevector engine used both as an independent oracle
//!   for the symplectic layer and as the substrate for metrology runs.
//! - [`metrology`]: probe preparation, Ramsey-type readout, Cramér–Rao
//!   uncertainty, Monte Carlo estimation and noisy runs with syndrome
//!   correction.
//! - [`cli`]: the `qecmetro` command-line front end.
//!
//! Shot loops, exhaustive sweeps and scans run on rayon when the `parallel`
//! feature is enabled (the default); see [`parallel::Execution`].

pub mod cli;
pub mod error;
pub mod metrology;
pub mod parallel;
pub mod pauli;
pub mod simulator;
pub mod stabilizer;

pub use error::{Error, Result};
pub use parallel::Execution;
pub use pauli::{Letter, PauliOperator, Phase};
pub use simulator::{SignalHamiltonian, StateVector};
pub use stabilizer::{Classification, Kind, LogicalAxis, StabilizerCode};
