//! Multistage-ranking view of a tau-path and the stopping rule built on it.
//!
//! Adding the `k`-th observation to a tau-path prefix adds some number of
//! discordant pairs. Read as the penalty of an assessor ranking `n` objects
//! stage by stage, these increments follow truncated geometric laws with
//! ratio `r_j = exp(-theta_j)`. A moving-window MLE of `theta_j` stays high
//! while the prefix is strongly associated and drops once it is not; the
//! stopping stage is where the curve stops clearing a boundary simulated
//! from independent permutations.

mod boundary;
mod mle;
mod penalty;
mod stopping;
mod tktp;

pub use boundary::{
    boundary_from_curves, generate_reject_boundary, null_curve, simulate_null_curves,
    BoundaryParams, BoundarySource, RejectBoundary, Simulate,
};
pub use mle::{
    expected_penalty, log_likelihood, taupath_mamle, truncated_geom_mle, MamleCurve, R_MAX, R_MIN,
    THETA_MAX,
};
pub use penalty::{discordance_increments, PenaltySequence};
pub use stopping::{exceedances, stopping_point, stopping_stage_from_exceedances};
pub use tktp::{
    tktp, SelectionRule, TktpConfig, TktpSelection, DEFAULT_ALPHA, DEFAULT_NSIM, DEFAULT_WINDOW,
};
