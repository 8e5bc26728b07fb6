//! Primed PCA.
//!
//! Runs an approximate PCA method (power iteration, Oja/Sanger, EigenGame)
//! for `k + l` directions, projects the data onto their span, and solves the
//! resulting `(k + l) x (k + l)` eigenproblem exactly to obtain the top `k`
//! principal directions. The crate also carries the evaluation harness used
//! to compare primed and unprimed runs.

pub mod data;
pub mod error;
pub mod linalg;
pub mod metrics;
pub mod ppca;
pub mod priming;
pub mod runner;
pub mod truth;

pub use error::{Error, Result};
