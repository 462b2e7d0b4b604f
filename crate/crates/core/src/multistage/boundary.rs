use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::RngCore;

use super::mle::{taupath_mamle, MamleCurve};
use crate::error::{invalid, Result};
use crate::math::quantile_sorted;
use crate::rank::{ConcordanceMatrix, Sample};
use crate::taupath::{fastbcs2_matrix, BcsPolicy, TieRule};
use crate::{par, rng};

/// Everything that determines a simulated boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoundaryParams {
    pub n: usize,
    pub window: usize,
    pub alpha: f64,
    pub nsim: usize,
    pub seed: u64,
    pub tie_rule: TieRule,
}

impl BoundaryParams {
    pub fn validate(&self) -> Result<()> {
        if self.window == 0 || self.n < self.window + 2 {
            return Err(invalid!("need n >= window + 2 and window >= 1, got n={} window={}", self.n, self.window));
        }
        if self.nsim == 0 {
            return Err(invalid!("nsim must be positive"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(invalid!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        Ok(())
    }
}

/// Stage-wise `(1 - alpha)` quantiles of the MAMLE curve under independence.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RejectBoundary {
    pub params: BoundaryParams,
    /// `q[j - window - 1]` is the quantile at stage `j = window+1..=n`.
    pub q: Vec<f64>,
}

impl RejectBoundary {
    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn window(&self) -> usize {
        self.params.window
    }

    pub fn at(&self, stage: usize) -> Option<f64> {
        stage.checked_sub(self.window() + 1).and_then(|i| self.q.get(i).copied())
    }
}

/// One null replicate: a pair of independent uniform permutations of
/// `1..=n` run through the tau-path and the MAMLE.
pub fn null_curve(n: usize, window: usize, tie_rule: TieRule, seed: u64, replicate: u64) -> MamleCurve {
    let mut r = rng::stream(seed, replicate);
    let mut x: Vec<f64> = (1..=n).map(|v| v as f64).collect();
    let mut y = x.clone();
    x.shuffle(&mut r);
    y.shuffle(&mut r);
    let tie = tie_rule.with_seed(r.next_u64());
    let s = Sample::new(x, y).expect("permutations are valid samples");
    let c = ConcordanceMatrix::new(&s).expect("size checked by caller");
    let path = fastbcs2_matrix(&c, &BcsPolicy::default().with_tie_break(tie)).expect("n >= 2");
    taupath_mamle(&path.tau, window).expect("window checked by caller")
}

/// Simulates `nsim` null curves in parallel; replicate `r` always uses
/// stream `r` of `seed`, so results do not depend on scheduling.
pub fn simulate_null_curves(
    n: usize,
    window: usize,
    nsim: usize,
    seed: u64,
    tie_rule: TieRule,
) -> Result<Vec<MamleCurve>> {
    BoundaryParams { n, window, alpha: 0.5, nsim, seed, tie_rule }.validate()?;
    Ok(par::map_indexed(nsim, |r| null_curve(n, window, tie_rule, seed, r as u64)))
}

/// Builds the reject boundary from simulated null curves.
pub fn generate_reject_boundary(params: &BoundaryParams) -> Result<RejectBoundary> {
    params.validate()?;
    let curves = simulate_null_curves(params.n, params.window, params.nsim, params.seed, params.tie_rule)?;
    boundary_from_curves(params, &curves)
}

pub fn boundary_from_curves(params: &BoundaryParams, curves: &[MamleCurve]) -> Result<RejectBoundary> {
    params.validate()?;
    let stages = params.n - params.window;
    if curves.is_empty() || curves.iter().any(|c| c.theta.len() != stages) {
        return Err(invalid!("curves do not match n={} window={}", params.n, params.window));
    }
    let mut column = Vec::with_capacity(curves.len());
    let q = (0..stages)
        .map(|j| {
            column.clear();
            column.extend(curves.iter().map(|c| c.theta[j]));
            column.sort_unstable_by(f64::total_cmp);
            quantile_sorted(&column, 1.0 - params.alpha)
        })
        .collect();
    Ok(RejectBoundary { params: *params, q })
}

/// Where a boundary comes from: simulated on demand, or looked up in a cache.
pub trait BoundarySource {
    fn boundary(&self, params: &BoundaryParams) -> Result<RejectBoundary>;
}

/// Always simulates.
#[derive(Debug, Clone, Copy, Default)]
pub struct Simulate;

impl BoundarySource for Simulate {
    fn boundary(&self, params: &BoundaryParams) -> Result<RejectBoundary> {
        generate_reject_boundary(params)
    }
}

/// A fixed, precomputed boundary; parameter mismatches are errors.
impl BoundarySource for RejectBoundary {
    fn boundary(&self, params: &BoundaryParams) -> Result<RejectBoundary> {
        let p = &self.params;
        if p.n != params.n || p.window != params.window || p.alpha != params.alpha {
            return Err(invalid!(
                "boundary for n={} window={} alpha={} cannot serve n={} window={} alpha={}",
                p.n, p.window, p.alpha, params.n, params.window, params.alpha
            ));
        }
        Ok(self.clone())
    }
}
