//! Simulator for pre/post-selected weak measurements.
//!
//! * [`hilbert`]: sparse states and tensor-product operators on labeled factors.
//! * [`weakvalue`]: weak values, post-selection probability, weak-value tables.
//! * [`scenarios`]: the quantum Cheshire cat constructions as fixtures.
//! * [`pointer`]: Gaussian von Neumann meter with exact finite-coupling readout.
//! * [`circuit`]: photon and neutron interferometer circuits and their text format.
//!
//! Row-level work (weak-value tables, scenario batches, coupling sweeps) runs on
//! rayon when the default `parallel` feature is enabled; see [`exec`].

// `!(x >= y)` guards also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod circuit;
pub mod error;
pub mod exec;
pub mod hilbert;
pub mod pointer;
pub mod scenarios;
pub mod weakvalue;

pub use error::{Error, Result};
pub use num_complex::Complex64;
