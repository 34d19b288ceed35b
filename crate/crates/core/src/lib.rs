//! Simulator and analysis toolchain for lossy linear-optical Bell-state
//! measurement (fusion) circuits in Fock space, and for the loss budgets under
//! which fusion-based quantum computing networks remain error-correctable.

pub mod bsm;
pub mod circuit;
pub mod config;
pub mod fbqc;
pub mod fock;
pub mod loss;
pub mod report;
pub mod sweep;

pub use fock::{FockAmplitudeVector, FockPattern, TransferMatrix, C64};
