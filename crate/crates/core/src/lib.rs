//! Heavy ball momentum laboratory: testbed objectives, closed-form rates,
//! discrete and continuous dynamics, tail-rate estimation and local geometry
//! probes.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod estimator;
pub mod geometry;
pub mod linalg;
pub mod objectives;
pub mod rates;

pub use error::{Error, Result};
