//! Exact simulation, zeroth-order optimizers and a reproducible benchmark
//! harness for variational quantum circuits.
//!
//! The crate is organized bottom-up:
//!
//! * [`simulator`]: dense statevector simulation (gates, Pauli observables,
//!   outcome probabilities, fidelity).
//! * [`circuits`]: parameterized circuit templates (seeded random layers and
//!   the QCBM ansatz).
//! * [`problems`]: the five benchmark objectives (three Hamiltonian energies,
//!   two generative negative log-likelihoods).
//! * [`optimizers`]: SPSA, AdamSPSA, 2-SPSA, QNSPSA, GES, xNES and sNES behind
//!   a uniform step interface with query accounting.
//! * [`harness`]: seeded runs, the shared-key fairness protocol, random-search
//!   tuning and multi-run suites.
//! * [`reporting`]: JSONL run records, convergence/box statistics, CSV and
//!   SVG output.

pub mod circuits;
pub mod error;
pub mod harness;
pub mod optimizers;
pub mod problems;
pub mod reporting;
pub mod rng;
pub mod simulator;

mod fingerprint;

pub use circuits::{CircuitTemplate, GateKind, GateSlot};
pub use error::{Error, Result};
pub use harness::{RunConfig, RunRecord, RunStatus, TaskConfig, TaskId};
pub use optimizers::{Algorithm, HyperParams, Optimizer, OptimizerState};
pub use problems::{LossFunction, TargetDistribution};
pub use reporting::{BoxStats, ConvergenceStats};
pub use rng::{MasterKey, StreamKey, StreamLabel};
pub use simulator::{Axis, Gate, Observable, PauliTerm, StateVector};
