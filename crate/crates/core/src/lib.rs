//! Benchmarking of age prediction from fingertip photoplethysmography:
//! signal processing, HR/HRV features, binary data formats, ridge models
//! with leave-one-out alpha selection, cross-validated evaluation and
//! age-gap statistics.

// `!(x > 0.0)` is used on purpose so NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod features;
pub mod model;
pub mod plot;
pub mod signal;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
