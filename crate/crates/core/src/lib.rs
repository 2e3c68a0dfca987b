//! Deterministic identification (DI) coding.
//!
//! In identification the receiver does not decode a message; it asks
//! "was message `j` sent?" and answers yes or no. Without randomness at
//! the encoder the number of identifiable messages grows exponentially in
//! the block length, and for a discrete memoryless channel with an average
//! input cost constraint the achievable rate is the largest input entropy
//! compatible with the constraint, computed over the channel with identical
//! rows merged.
//!
//! The crate is organised bottom-up:
//!
//! - [`types`]: empirical and joint types, strong typicality, Hamming
//!   geometry, and exact small-n enumeration.
//! - [`channel`]: DMC and Gaussian channel models, row reduction, sampling.
//! - [`capacity`]: constrained entropy maximisation, the BSC curve, the
//!   Gaussian rate bound, converse counting, and intersection-decay fits.
//! - [`dmc_codec`]: type-class codebooks with a Hamming-distance drop rule,
//!   the typicality identifier, and Monte Carlo error estimation.
//! - [`gauss_codec`]: saturated sphere-packing codebooks and the distance
//!   identifier for the Gaussian channel.
//! - [`discretization`]: quantising the Gaussian channel into a finite DMC.
//!
//! All logarithms are base 2 unless a name says otherwise. Every stochastic
//! routine takes an explicit seed; no global randomness is used.

#![forbid(unsafe_code)]

pub mod capacity;
pub mod channel;
pub mod discretization;
pub mod dmc_codec;
mod error;
pub mod gauss_codec;
pub mod info;
pub mod rng;
pub mod stats;
pub mod types;

pub use error::{Error, Result};

/// Crate version, embedded in emitted artifacts.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
