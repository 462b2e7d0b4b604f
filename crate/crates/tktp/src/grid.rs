//! Simulation grid files.
//!
//! ```text
//! family = frank            # frank | gaussian | independence
//! strength = tau            # tau | rho | native
//! sizes = 500, 1000
//! strengths = 0.3, 0.5, 0.7
//! proportions = 0.3, 0.4
//! replicates = 2000
//! seed = 1
//! ```
//!
//! Any run setting (`alpha`, `window`, `nsim`, `tie_break`, ...) may also
//! appear and overrides the command-line configuration for this grid.

use std::path::Path;

use tktp_core::copula::Family;
use tktp_core::simstudy::{ExperimentGrid, StrengthKind};

use crate::config::{parse_key_values, parse_list, RunConfig};
use crate::error::{AppError, Result};

pub fn load_grid(path: &Path, base: &RunConfig) -> Result<ExperimentGrid> {
    let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    parse_grid(&text, path, base)
}

pub fn parse_grid(text: &str, path: &Path, base: &RunConfig) -> Result<ExperimentGrid> {
    let mut run = base.clone();
    let (mut family, mut kind) = (None, StrengthKind::KendallTau);
    let (mut sizes, mut strengths, mut proportions) = (None, None, None);
    let (mut replicates, mut seed) = (None, base.seed);
    for (line, key, value) in parse_key_values(text, path)? {
        let bad = |what: &str| AppError::row(path, line, format!("{what}: {value:?}"));
        match key.as_str() {
            "family" => {
                family = Some(match value.as_str() {
                    "frank" => Family::Frank,
                    "gaussian" => Family::Gaussian,
                    "independence" => Family::Independence,
                    _ => return Err(bad("unknown family")),
                })
            }
            "strength" | "strength_kind" => {
                kind = match value.as_str() {
                    "tau" => StrengthKind::KendallTau,
                    "rho" => StrengthKind::SpearmanRho,
                    "native" => StrengthKind::Native,
                    _ => return Err(bad("unknown strength kind")),
                }
            }
            "sizes" => sizes = Some(parse_list(&value).ok_or_else(|| bad("bad size list"))?),
            "strengths" => strengths = Some(parse_list(&value).ok_or_else(|| bad("bad strength list"))?),
            "proportions" => proportions = Some(parse_list(&value).ok_or_else(|| bad("bad proportion list"))?),
            "replicates" => replicates = Some(value.parse().map_err(|_| bad("bad replicate count"))?),
            "seed" => seed = value.parse().map_err(|_| bad("bad seed"))?,
            other => run.set(other, &value).map_err(|m| AppError::row(path, line, m))?,
        }
    }
    run.validate().map_err(AppError::Usage)?;
    let missing = |k: &str| AppError::data(path, format!("missing key {k:?}"));
    let mut config = run.tktp_config();
    config.seed = run.seed;
    let grid = ExperimentGrid {
        family: family.ok_or_else(|| missing("family"))?,
        strength_kind: kind,
        sizes: sizes.ok_or_else(|| missing("sizes"))?,
        strengths: strengths.ok_or_else(|| missing("strengths"))?,
        proportions: proportions.ok_or_else(|| missing("proportions"))?,
        replicates: replicates.ok_or_else(|| missing("replicates"))?,
        config,
        seed,
    };
    grid.validate().map_err(|e| AppError::data(path, e.to_string()))?;
    Ok(grid)
}
