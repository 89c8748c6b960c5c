//! Diagnostics for learned latent representations: probes, mutual information,
//! disentanglement scores, SVD geometry, gradient interference, and the
//! sweep / recovery / factorial protocols used to evaluate trained policies.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod error;
pub mod geometry;
pub mod infometrics;
pub mod probes;
pub mod protocol;
pub mod rng;
pub mod special;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
