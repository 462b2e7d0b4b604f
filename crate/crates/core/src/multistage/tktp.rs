use alloc::vec::Vec;

use super::boundary::{BoundaryParams, BoundarySource};
use super::mle::{taupath_mamle, MamleCurve};
use super::stopping::{exceedances, stopping_stage_from_exceedances};
use crate::error::{invalid, Result};
use crate::rank::{negate_y, ConcordanceMatrix, Sample, DEFAULT_MAX_OBSERVATIONS};
use crate::taupath::{tau_path_matrix, BcsPolicy, TauPathResult};

pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_WINDOW: usize = 5;
pub const DEFAULT_NSIM: usize = 10_000;

/// Which observations make up the selection once `k_hat` is known.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum SelectionRule {
    /// The first `k_hat` observations of the tau-path.
    #[default]
    Prefix,
    /// Observations at stages `j >= k_hat` whose estimate exceeds the boundary.
    Algorithm1,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TktpConfig {
    pub alpha: f64,
    pub window: usize,
    pub nsim: usize,
    /// Seed of the null boundary simulation.
    pub seed: u64,
    pub policy: BcsPolicy,
    pub selection: SelectionRule,
    /// Screen for negative instead of positive association.
    pub negate: bool,
}

impl Default for TktpConfig {
    fn default() -> Self {
        TktpConfig {
            alpha: DEFAULT_ALPHA,
            window: DEFAULT_WINDOW,
            nsim: DEFAULT_NSIM,
            seed: 0,
            policy: BcsPolicy::default(),
            selection: SelectionRule::Prefix,
            negate: false,
        }
    }
}

impl TktpConfig {
    pub fn boundary_params(&self, n: usize) -> BoundaryParams {
        BoundaryParams {
            n,
            window: self.window,
            alpha: self.alpha,
            nsim: self.nsim,
            seed: self.seed,
            tie_rule: self.policy.tie_break.rule(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TktpSelection {
    /// Estimated stopping stage; 0 when no association was found.
    pub k_hat: usize,
    /// Identifiers of the selected observations.
    pub selected: Vec<usize>,
    /// The same observations as 0-based sample positions.
    pub selected_positions: Vec<usize>,
    pub exceedances: Vec<usize>,
    pub taupath: TauPathResult,
    pub mamle: MamleCurve,
}

impl TktpSelection {
    pub fn fraction(&self) -> f64 {
        self.selected.len() as f64 / self.taupath.n() as f64
    }
}

/// Runs the full screen: tau-path, MAMLE curve, boundary, stopping rule.
pub fn tktp(s: &Sample, config: &TktpConfig, source: &dyn BoundarySource) -> Result<TktpSelection> {
    let n = s.len();
    if config.window == 0 || n < config.window + 2 {
        return Err(invalid!("need at least window + 2 = {} observations, got {n}", config.window + 2));
    }
    let flipped;
    let s = if config.negate {
        flipped = negate_y(s);
        &flipped
    } else {
        s
    };
    let c = ConcordanceMatrix::build(s, DEFAULT_MAX_OBSERVATIONS, config.policy.parallel_colsums)?;
    let mut taupath = tau_path_matrix(&c, &config.policy)?;
    taupath.pi = taupath.order.iter().map(|&p| s.ids()[p]).collect();
    let mamle = taupath_mamle(&taupath.tau, config.window)?;
    let boundary = source.boundary(&config.boundary_params(n))?;
    let exceed = exceedances(&mamle, &boundary)?;
    let k_hat = stopping_stage_from_exceedances(&exceed, n, config.alpha);

    let stages: Vec<usize> = match config.selection {
        _ if k_hat == 0 => Vec::new(),
        SelectionRule::Prefix => (1..=k_hat).collect(),
        SelectionRule::Algorithm1 => exceed.iter().copied().filter(|&j| j >= k_hat).collect(),
    };
    let selected_positions: Vec<usize> = stages.iter().map(|&j| taupath.order[j - 1]).collect();
    let selected = selected_positions.iter().map(|&p| s.ids()[p]).collect();
    Ok(TktpSelection { k_hat, selected, selected_positions, exceedances: exceed, taupath, mamle })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multistage::boundary::{generate_reject_boundary, Simulate};
    use crate::rng;
    use rand::seq::SliceRandom;

    fn config(nsim: usize) -> TktpConfig {
        TktpConfig { nsim, seed: 3, ..TktpConfig::default() }
    }

    #[test]
    fn concordant_sample_is_selected_whole() {
        let x: Vec<f64> = (0..100).map(f64::from).collect();
        let s = Sample::new(x.clone(), x).unwrap();
        let sel = tktp(&s, &config(300), &Simulate).unwrap();
        assert_eq!(sel.k_hat, 100);
        assert_eq!(sel.selected, (1..=100).collect::<Vec<_>>());
    }

    #[test]
    fn negation_reverses_the_target() {
        let x: Vec<f64> = (0..60).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| -v).collect();
        let s = Sample::new(x, y).unwrap();
        let b = generate_reject_boundary(&config(200).boundary_params(60)).unwrap();
        let neg = TktpConfig { negate: true, ..config(200) };
        assert_eq!(tktp(&s, &neg, &b).unwrap().k_hat, 60);
        assert_eq!(tktp(&s, &config(200), &b).unwrap().k_hat, 0);
    }

    #[test]
    fn independent_samples_mostly_select_nothing() {
        let b = generate_reject_boundary(&config(500).boundary_params(150)).unwrap();
        let empty = (0..40)
            .filter(|&seed| {
                let mut r = rng::seeded(1000 + seed);
                let mut x: Vec<f64> = (0..150).map(f64::from).collect();
                let mut y = x.clone();
                x.shuffle(&mut r);
                y.shuffle(&mut r);
                let sel = tktp(&Sample::new(x, y).unwrap(), &config(500), &b).unwrap();
                assert_eq!(sel.k_hat == 0, sel.selected.is_empty());
                sel.k_hat == 0
            })
            .count();
        assert!(empty > 20, "{empty} of 40 null samples selected nothing");
    }

    #[test]
    fn algorithm1_rule_is_a_subset_of_exceedances() {
        let x: Vec<f64> = (0..80).map(f64::from).collect();
        let mut y = x.clone();
        y[60..].reverse();
        let s = Sample::new(x, y).unwrap();
        let b = generate_reject_boundary(&config(200).boundary_params(80)).unwrap();
        let lit = tktp(&s, &TktpConfig { selection: SelectionRule::Algorithm1, ..config(200) }, &b).unwrap();
        let pre = tktp(&s, &config(200), &b).unwrap();
        assert_eq!(lit.k_hat, pre.k_hat);
        assert!(lit.selected.len() <= lit.exceedances.len());
        assert_eq!(pre.selected.len(), pre.k_hat);
        assert!(tktp(&s, &TktpConfig { window: 79, ..config(200) }, &b).is_err());
    }
}
