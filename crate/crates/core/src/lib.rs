//! Streaming sketches for large frequency moments.
//!
//! The crate has two layers. A heavy-element finder plays a grid of sampling
//! games over the stream and verifies their winners exactly. A martingale
//! sketch subsamples the universe level by level and uses heavy elements of
//! each level to correct an unbiased estimate of `F_k`.

pub mod ahe;
pub mod error;
pub mod game;
pub mod harness;
pub mod hashkit;
pub mod ledger;
pub mod martingale;
pub mod num;
pub mod oracle;
pub mod sampling;
pub mod signature;
pub mod stream;

/// A stream token: an element id in `[1, n]`.
pub type Element = u64;

pub use error::{Result, SketchError};
