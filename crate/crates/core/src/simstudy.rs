//! Coverage study: how well the screen recovers the associated part of a
//! copula mixture.
//!
//! Each replicate draws a labeled mixture sample, runs the screen against a
//! boundary shared by every cell of the same size, and records the stopping
//! stage and how many truly associated draws were selected.

use alloc::vec::Vec;

use crate::copula::{sample_mixture, CopulaSpec, Family, MixtureSpec, Strength};
use crate::error::{invalid, Result};
use crate::math::{mean, quantile, skewness, std_error};
use crate::multistage::{tktp, BoundarySource, RejectBoundary, TktpConfig};
use crate::{par, rng};

/// Quantile levels reported for the stopping-stage distribution.
pub const K_HAT_QUANTILES: [f64; 5] = [0.05, 0.25, 0.5, 0.75, 0.95];

/// How the grid's strength values are interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum StrengthKind {
    KendallTau,
    SpearmanRho,
    Native,
}

impl StrengthKind {
    pub fn wrap(self, value: f64) -> Strength {
        match self {
            StrengthKind::KendallTau => Strength::KendallTau(value),
            StrengthKind::SpearmanRho => Strength::SpearmanRho(value),
            StrengthKind::Native => Strength::Native(value),
        }
    }
}

/// A full factorial design over sizes, strengths and mixing proportions.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExperimentGrid {
    pub family: Family,
    pub strength_kind: StrengthKind,
    pub sizes: Vec<usize>,
    pub strengths: Vec<f64>,
    pub proportions: Vec<f64>,
    pub replicates: usize,
    pub config: TktpConfig,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Cell {
    pub family: Family,
    pub n: usize,
    /// Strength value as given in the grid.
    pub strength: f64,
    pub strength_kind: StrengthKind,
    pub p: f64,
}

impl Cell {
    pub fn mixture(&self) -> MixtureSpec {
        let component = CopulaSpec { family: self.family, strength: self.strength_kind.wrap(self.strength) };
        MixtureSpec::with_independence(component, self.p, self.n)
    }
}

impl ExperimentGrid {
    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() || self.strengths.is_empty() || self.proportions.is_empty() {
            return Err(invalid!("grid needs at least one size, strength and proportion"));
        }
        if self.replicates == 0 {
            return Err(invalid!("replicates must be positive"));
        }
        for &p in &self.proportions {
            if !(p > 0.0 && p <= 1.0) {
                return Err(invalid!("mixing proportion {p} outside (0, 1]"));
            }
        }
        for cell in self.cells() {
            cell.mixture().component.resolve()?;
            self.config.boundary_params(cell.n).validate()?;
        }
        Ok(())
    }

    /// Cells in size-major, then strength, then proportion order.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for &n in &self.sizes {
            for &strength in &self.strengths {
                for &p in &self.proportions {
                    out.push(Cell { family: self.family, n, strength, strength_kind: self.strength_kind, p });
                }
            }
        }
        out
    }
}

/// Outcome of one replicate.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ReplicateRecord {
    pub replicate: usize,
    pub seed: u64,
    pub k_hat: usize,
    pub selected: usize,
    pub associated_total: usize,
    pub associated_selected: usize,
}

impl ReplicateRecord {
    /// Share of associated draws that were selected, in percent.
    pub fn percent_covered(&self) -> f64 {
        if self.associated_total == 0 {
            0.0
        } else {
            100.0 * self.associated_selected as f64 / self.associated_total as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CellSummary {
    pub cell: Cell,
    pub replicates: usize,
    pub mean_k_hat: f64,
    pub se_k_hat: f64,
    pub mean_associated_selected: f64,
    pub se_associated_selected: f64,
    pub mean_percent_covered: f64,
    pub se_percent_covered: f64,
    /// Mean associated selected over mean stopping stage; absent when no
    /// replicate selected anything.
    pub coverage_ratio: Option<f64>,
    /// `coverage_ratio / p`: percent covered per percent of sample selected.
    pub rate: Option<f64>,
    pub se_rate: Option<f64>,
    /// Stopping-stage quantiles at [`K_HAT_QUANTILES`].
    pub k_hat_quantiles: [f64; 5],
    pub k_hat_skewness: f64,
}

/// Mean associated selected over mean stopping stage.
pub fn coverage_ratio(records: &[ReplicateRecord]) -> Option<f64> {
    let k: f64 = records.iter().map(|r| r.k_hat as f64).sum();
    let a: f64 = records.iter().map(|r| r.associated_selected as f64).sum();
    (k > 0.0).then(|| a / k)
}

/// Rate of coverage of a summarized cell.
pub fn rate_of_coverage(summary: &CellSummary) -> Option<f64> {
    summary.rate
}

/// Aggregates replicate records; the rate's standard error uses the delta
/// method for a ratio of means.
pub fn summarize(cell: Cell, records: &[ReplicateRecord]) -> CellSummary {
    let k: Vec<f64> = records.iter().map(|r| r.k_hat as f64).collect();
    let a: Vec<f64> = records.iter().map(|r| r.associated_selected as f64).collect();
    let pc: Vec<f64> = records.iter().map(ReplicateRecord::percent_covered).collect();
    let ratio = coverage_ratio(records);
    let se_ratio = ratio.filter(|_| records.len() > 1).map(|ratio| {
        let resid: Vec<f64> = a.iter().zip(&k).map(|(a, k)| a - ratio * k).collect();
        std_error(&resid) / mean(&k)
    });
    CellSummary {
        cell,
        replicates: records.len(),
        mean_k_hat: mean(&k),
        se_k_hat: std_error(&k),
        mean_associated_selected: mean(&a),
        se_associated_selected: std_error(&a),
        mean_percent_covered: mean(&pc),
        se_percent_covered: std_error(&pc),
        coverage_ratio: ratio,
        rate: ratio.map(|r| r / cell.p),
        se_rate: se_ratio.map(|s| s / cell.p),
        k_hat_quantiles: K_HAT_QUANTILES.map(|q| quantile(&k, q)),
        k_hat_skewness: skewness(&k),
    }
}

/// Runs `replicates` screens for one cell against a fixed boundary.
pub fn run_cell(
    cell: &Cell,
    config: &TktpConfig,
    boundary: &RejectBoundary,
    replicates: usize,
    seed: u64,
) -> Result<(CellSummary, Vec<ReplicateRecord>)> {
    if replicates == 0 {
        return Err(invalid!("replicates must be positive"));
    }
    let mixture = cell.mixture();
    mixture.component.resolve()?;
    let outcomes = par::map_indexed(replicates, |r| -> Result<ReplicateRecord> {
        let sample_seed = rng::mix(seed, r as u64);
        let labeled = sample_mixture(&mixture, sample_seed)?;
        let mut cfg = *config;
        cfg.policy.tie_break = config.policy.tie_break.rule().with_seed(rng::mix(sample_seed, 1));
        let sel = tktp(&labeled.sample, &cfg, boundary)?;
        let associated_selected = sel.selected_positions.iter().filter(|&&p| labeled.associated[p]).count();
        Ok(ReplicateRecord {
            replicate: r,
            seed: sample_seed,
            k_hat: sel.k_hat,
            selected: sel.selected.len(),
            associated_total: labeled.associated_count(),
            associated_selected,
        })
    });
    let records = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
    Ok((summarize(*cell, &records), records))
}

/// Runs every cell of the grid. One boundary per sample size is requested
/// from `source` and shared by all cells of that size.
pub fn run_grid(
    grid: &ExperimentGrid,
    source: &dyn BoundarySource,
) -> Result<Vec<(CellSummary, Vec<ReplicateRecord>)>> {
    grid.validate()?;
    let mut boundaries: Vec<(usize, RejectBoundary)> = Vec::new();
    let mut out = Vec::new();
    for (i, cell) in grid.cells().into_iter().enumerate() {
        if !boundaries.iter().any(|(n, _)| *n == cell.n) {
            boundaries.push((cell.n, source.boundary(&grid.config.boundary_params(cell.n))?));
        }
        let boundary = &boundaries.iter().find(|(n, _)| *n == cell.n).expect("inserted above").1;
        out.push(run_cell(&cell, &grid.config, boundary, grid.replicates, rng::mix(grid.seed, i as u64))?);
    }
    Ok(out)
}

/// Expected length of the longest increasing subsequence of a random
/// permutation of `n`, `2 sqrt(n) - 1.758 n^(1/6)`: associated subsamples
/// much smaller than this are hard to tell from chance.
pub fn lis_power_floor(n: usize) -> f64 {
    let n = n as f64;
    2.0 * libm::sqrt(n) - 1.758 * libm::pow(n, 1.0 / 6.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multistage::generate_reject_boundary;
    use alloc::vec;

    fn cfg() -> TktpConfig {
        TktpConfig { window: 3, nsim: 300, seed: 1, ..TktpConfig::default() }
    }

    fn cell(n: usize, tau: f64, p: f64) -> Cell {
        Cell { family: Family::Frank, n, strength: tau, strength_kind: StrengthKind::KendallTau, p }
    }

    #[test]
    fn lis_floor_values() {
        assert!((lis_power_floor(100) - (20.0 - 1.758 * libm::pow(100.0, 1.0 / 6.0))).abs() < 1e-12);
        assert!((lis_power_floor(100) - 16.213).abs() < 1e-3);
        assert!((lis_power_floor(1) - 0.242).abs() < 1e-12);
        assert!((lis_power_floor(10_000) - 191.84).abs() < 0.1);
    }

    #[test]
    fn summary_recomputes_from_records() {
        let b = generate_reject_boundary(&cfg().boundary_params(100)).unwrap();
        let c = cell(100, 0.5, 0.3);
        let (summary, records) = run_cell(&c, &cfg(), &b, 40, 5).unwrap();
        assert_eq!(records.len(), 40);
        let k: f64 = records.iter().map(|r| r.k_hat as f64).sum();
        let a: f64 = records.iter().map(|r| r.associated_selected as f64).sum();
        assert!((summary.coverage_ratio.unwrap() - a / k).abs() < 1e-12);
        assert!((summary.rate.unwrap() - a / k / 0.3).abs() < 1e-12);
        for r in &records {
            assert!(r.associated_selected <= r.k_hat.min(r.associated_total));
            assert!((0.0..=100.0).contains(&r.percent_covered()));
        }
        assert_eq!(run_cell(&c, &cfg(), &b, 40, 5).unwrap().1, records);
    }

    #[test]
    fn whole_sample_associated() {
        let b = generate_reject_boundary(&cfg().boundary_params(100)).unwrap();
        let (s, _) = run_cell(&cell(100, 0.9, 1.0), &cfg(), &b, 30, 2).unwrap();
        assert!(s.mean_percent_covered > 80.0, "{}", s.mean_percent_covered);
        assert!(s.mean_k_hat > 80.0);
        // every selected draw is associated, so the rate is exactly 1
        assert_eq!(s.rate, Some(1.0));
    }

    #[test]
    fn empty_selections_leave_rate_absent() {
        let records = vec![ReplicateRecord {
            replicate: 0,
            seed: 0,
            k_hat: 0,
            selected: 0,
            associated_total: 10,
            associated_selected: 0,
        }];
        let s = summarize(cell(50, 0.5, 0.3), &records);
        assert_eq!(s.rate, None);
        assert_eq!(coverage_ratio(&records), None);
    }

    #[test]
    fn grid_enumeration_and_determinism() {
        let grid = ExperimentGrid {
            family: Family::Gaussian,
            strength_kind: StrengthKind::SpearmanRho,
            sizes: vec![60],
            strengths: vec![0.45, 0.89],
            proportions: vec![0.4],
            replicates: 5,
            config: TktpConfig { nsim: 50, ..cfg() },
            seed: 4,
        };
        assert_eq!(grid.cells().len(), 2);
        let src = crate::multistage::Simulate;
        let a = run_grid(&grid, &src).unwrap();
        assert_eq!(a, run_grid(&grid, &src).unwrap());
        let bad = ExperimentGrid { proportions: vec![1.5], ..grid };
        assert!(bad.validate().is_err());
    }
}
