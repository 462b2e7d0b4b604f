//! File formats, boundary caching, benchmarks and the command line for the
//! TKTP screen. The numerical work lives in [`tktp_core`].

pub mod bench;
pub mod cache;
pub mod cli;
pub mod config;
pub mod csvio;
pub mod error;
pub mod grid;
pub mod report;

pub use error::{AppError, ExitCode, Result};
pub use tktp_core as core;
