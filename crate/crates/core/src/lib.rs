//! Link-level simulation of mmWave massive MIMO with lens antenna arrays:
//! beamspace channels, power leakage, beam-aligning and baseline precoders,
//! power models and analytical sum-rate bounds.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arrays;
pub mod bounds;
pub mod channel;
pub mod error;
pub mod export;
pub mod harness;
pub mod leakage;
pub mod linalg;
pub mod metrics;
pub mod precoders;
pub mod quadrature;

pub use error::{Error, Result};
