//! Top-K tau-path (TKTP) screening for monotone association.
//!
//! Given a bivariate sample, the screen
//!
//! 1. reorders the observations along a sequentially maximal, monotone
//!    decreasing tau-path ([`taupath`]),
//! 2. turns the tau-path into a multistage-ranking penalty sequence and fits
//!    a moving-window truncated-geometric MLE curve ([`multistage`]),
//! 3. compares the curve against a simulated null boundary and cuts the path
//!    at the estimated endpoint of association.
//!
//! The crate also carries the copula samplers and the simulation study used
//! to validate the screen ([`copula`], [`simstudy`]) and the in-memory part
//! of the lagged time-series screening pipeline ([`screen`]).
//!
//! The crate is `no_std` (it needs `alloc`). The default `std` feature turns
//! on multi-threaded replicate simulation and column-sum updates through
//! rayon; results never depend on the thread count.
#![no_std]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod copula;
mod error;
mod math;
pub mod multistage;
mod par;
pub mod rank;
pub mod rng;
pub mod screen;
pub mod simstudy;
pub mod taupath;

pub use error::{Error, Result};
pub use multistage::{
    BoundaryParams, BoundarySource, MamleCurve, RejectBoundary, SelectionRule, Simulate,
    TktpConfig, TktpSelection,
};
pub use rank::{ConcordanceMatrix, RankVector, Sample};
pub use taupath::{Algorithm, BcsPolicy, ProfileCounters, TauPathResult, TieBreak, TieRule};
