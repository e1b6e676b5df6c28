//! Isoperimetry of log-concave spaces: exact one-dimensional computations,
//! one-dimensional displacement interpolation, and discrete L1 needle
//! decomposition.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod density1d;
pub mod error;
pub mod interpolate1d;
pub mod io;
pub mod localize;
pub mod models;
pub mod numeric;
pub mod sample;

pub use error::{Error, Result};
