//! Simulation and analysis of atomic-frequency-comb optical memories.
//!
//! Frequencies are in Hz and times in seconds throughout. Spectra are dimensionless
//! optical depths `d(nu)` with intensity transmission `exp(-d)`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod detection;
pub mod efficiency;
pub mod error;
pub mod io;
pub mod optimize;
pub mod preparation;
pub mod propagation;
pub mod spectral;

pub use error::{AfcError, ErrorClass, Result};
