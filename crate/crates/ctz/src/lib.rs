//! File formats, parallel drivers and the `ctz` command line for
//! [`ctz_core`].

pub mod cli;
pub mod container;
mod error;
pub mod input;
pub mod parallel;
pub mod report;
pub mod sigfile;

pub use error::{CtzError, Result};
