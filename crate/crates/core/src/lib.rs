//! Gaussian separability thresholds for noisy bilinearly coupled oscillators.
//!
//! Builds GKSL generators for quadratic models with white thermal noise, evolves covariance
//! matrices, decides separability through PPT tests and an explicit first-order certificate,
//! synthesizes measurement-and-feedback (LOCC) protocols reproducing a target noise channel,
//! and cross-checks everything against a truncated Fock-space integrator.

pub mod config;
pub mod dynamics;
pub mod error;
pub mod fock;
pub mod generator;
pub mod gravity;
pub mod linalg;
pub mod locc;
pub mod model;
pub mod par;
pub mod separability;
pub mod sweep;
pub mod symplectic;

pub use error::{Error, Result};
pub use model::{CouplingSpec, NoiseSpectrum, SystemModel};
pub use symplectic::{CovarianceMatrix, ModeLayout};
