//! Decentralized power method and Lanczos algorithm.
//!
//! Both algorithms run as `K` per-node state machines. The only cross-node
//! interaction is a call to a [`Consensus`](crate::consensus::Consensus)
//! implementation: each node contributes one row to the consensus input and
//! reads back its own row of the output. Everything else is local arithmetic
//! on the node's own samples and scalars.
//!
//! Runs also record the realized consensus errors so the closed-form error
//! expressions in [`analysis`] can be checked against simulation.

pub mod analysis;
mod audit;
mod dla;
mod dpm;
mod node;

pub use analysis::{
    check_dpm_convergence_condition, predict_dla_w_error, predict_dpm_vector_error, predict_lambda1_error,
    ConvergenceTrace, ConvergenceVerdict, Lambda1ErrorPrediction, WErrorPrediction,
};
pub use audit::{audit_messages, expected_audit, Algorithm, MessageAudit};
pub use dla::{default_dla_start, dla_run, dla_run_with, DlaErrorTrace, DlaOptions, DlaOutput};
pub use dpm::{default_dpm_start, dpm_run, dpm_run_with, DpmErrorTrace, DpmOptions, DpmOutput};
pub use node::NodeState;
