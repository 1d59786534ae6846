//! Cnoidal waves of the defocusing cubic NLS equation
//! `i psi_t + psi_xx - |psi|^2 psi = 0`.
//!
//! The crate builds the periodic wave family, assembles the fourth-order
//! linearised operators `K+-(c)` on Fourier grids, computes their
//! Floquet-Bloch spectra, checks the elliptic-function identities behind
//! the stability interval, and runs orbital-stability experiments with NLS
//! time evolution.

// `!(x > t)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod dynamics;
pub mod eigen;
pub mod elliptic;
pub mod error;
pub mod identities;
pub mod linops;
pub mod output;
pub mod smallamp;
pub mod spectral;
pub mod verify;
pub mod wave;

pub use config::RunConfig;
pub use elliptic::{complete_e, complete_k, incomplete_e, jacobi, EllipticModulus, JacobiTriple};
pub use error::{Error, Result};
pub use linops::{BandStructure, BlochOperator, OperatorKind};
pub use spectral::Grid;
pub use wave::{family_from_ee, WaveFamily};

pub use num_complex::Complex64 as C64;
