//! Score fusion and evaluation for video-based morphing attack detection.
//!
//! A document image is compared against every frame of a live gate sequence
//! by an external differential MAD detector. This crate condenses those
//! per-frame scores (optionally together with per-frame quality scores) into
//! a single decision score per attempt, and evaluates the result with the
//! APCER / BPCER / EER family of metrics.

pub mod cli;
pub mod error;
pub mod fsutil;
pub mod fusion;
pub mod metrics;
pub mod model;
pub mod quality;
pub mod stats;
pub mod svr;
pub mod synth;

pub use error::{Error, Result};
