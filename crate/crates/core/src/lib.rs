//! Finite-memory universal compression and classification of individual
//! sequences with data-driven context trees.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only the
//! algorithms; file formats, parallel drivers and the command-line tool
//! live in the companion `ctz` crate.
//!
//! * [`stats`]: phase-averaged empirical measures and empirical entropies.
//! * [`tree`]: candidate context trees, the `K1` depth rule and the pruned
//!   context set that attains the `H_u` entropy functional.
//! * [`codec`]: the N-block universal coder (tree part, raw prefix, KT
//!   arithmetic-coded payload), the worst-phase compression `rho` and the
//!   block-entropy lower bound check.
//! * [`classifier`]: O(N) training signatures, cross-entropy scoring,
//!   threshold calibration.
//! * [`ancestor`]: the two-sequence common-ancestor feasibility test.
//! * [`adversarial`]: repeated blocks of distinct segments, the hard
//!   instances for block coders.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod adversarial;
pub mod ancestor;
pub mod bits;
pub mod classifier;
pub mod codec;
mod entropy;
mod error;
pub mod kt;
pub mod range_coder;
mod sequence;
pub mod stats;
pub mod tree;

pub use entropy::{entropy_bits, entropy_of_counts, kl_divergence_bits};
pub use error::{Error, Result};
pub use sequence::{Alphabet, Sequence};
