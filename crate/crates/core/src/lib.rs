// `!(x > 0.0)` is used throughout so NaN is rejected along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod features;
pub mod geo;
pub mod ingest;
pub mod market;
pub mod regress;
pub mod report;
pub mod synth;
pub mod backtest;
pub mod cli;

pub use error::{Error, Result};
