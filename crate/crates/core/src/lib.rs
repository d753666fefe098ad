//! Decentralized eigenvalue estimation over average-consensus networks.
//!
//! Nodes of a connected network each hold one row of a complex sample matrix
//! `Y`. The decentralized power method ([`dec_eig::dpm_run`]) and Lanczos
//! algorithm ([`dec_eig::dla_run`]) let every node estimate eigenvalues of the
//! sample covariance `R = (1/N) Y Yᴴ` using only neighbor-to-neighbor average
//! consensus. The [`detection`] module turns the estimates into
//! eigenvalue-based spectrum-sensing tests and [`harness`] reproduces the
//! convergence and ROC experiments.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod consensus;
pub mod dec_eig;
pub mod eigencore;
pub mod detection;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod signal_model;
pub mod topology;

pub use error::{Error, Result};
pub use linalg::{CMatrix, C64};
