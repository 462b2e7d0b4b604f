//! Lagged screening of many series against one predictor, and pooling of
//! the selected time points by Jaccard similarity.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::multistage::{tktp, BoundarySource, RejectBoundary, TktpConfig};
use crate::rank::{kendall_tau, pearson, Sample};
use crate::{par, rng};

/// Dates (as labels, strictly increasing) and named columns with missing
/// cells.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PriceTable {
    labels: Vec<String>,
    names: Vec<String>,
    columns: Vec<Vec<Option<f64>>>,
}

impl PriceTable {
    /// The caller is responsible for label order; duplicates and shape
    /// errors are rejected here.
    pub fn new(labels: Vec<String>, series: Vec<(String, Vec<Option<f64>>)>) -> Result<Self> {
        let unique: BTreeSet<&String> = labels.iter().collect();
        if unique.len() != labels.len() {
            return Err(invalid!("duplicate time label"));
        }
        let mut names = Vec::with_capacity(series.len());
        let mut columns = Vec::with_capacity(series.len());
        for (name, col) in series {
            if names.contains(&name) {
                return Err(invalid!("duplicate series name {name:?}"));
            }
            if col.len() != labels.len() {
                return Err(invalid!("series {name:?} has {} cells for {} dates", col.len(), labels.len()));
            }
            if let Some(i) = col.iter().position(|v| v.is_some_and(|v| !v.is_finite())) {
                return Err(Error::NonFinite { index: i });
            }
            names.push(name);
            columns.push(col);
        }
        Ok(PriceTable { labels, names, columns })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn series(&self, name: &str) -> Result<&[Option<f64>]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.columns[i].as_slice())
            .ok_or_else(|| Error::UnknownSeries(name.to_string()))
    }

    pub fn is_complete(&self, name: &str) -> Result<bool> {
        Ok(self.series(name)?.iter().all(Option::is_some))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum MissingPolicy {
    /// Drop only the pairs that touch a missing cell.
    #[default]
    Pairwise,
    /// Refuse series with any missing cell.
    RequireComplete,
}

pub const DEFAULT_MIN_PAIRS: usize = 30;
pub const DEFAULT_MIN_FRACTION: f64 = 0.6;
pub const DEFAULT_JACCARD_THRESHOLD: f64 = 0.8;

/// Pairs `(predictor[t - lag], target[t])`; sample identifiers are the
/// target time indices `t`.
pub fn lag_align(
    table: &PriceTable,
    target: &str,
    predictor: &str,
    lag: usize,
    missing: MissingPolicy,
    min_pairs: usize,
) -> Result<Sample> {
    let y = table.series(target)?;
    let x = table.series(predictor)?;
    if missing == MissingPolicy::RequireComplete {
        for name in [target, predictor] {
            if !table.is_complete(name)? {
                return Err(Error::InsufficientData(alloc::format!("series {name:?} has missing cells")));
            }
        }
    }
    let (mut xs, mut ys, mut ids) = (Vec::new(), Vec::new(), Vec::new());
    for t in lag..table.len() {
        if let (Some(a), Some(b)) = (x[t - lag], y[t]) {
            xs.push(a);
            ys.push(b);
            ids.push(t);
        }
    }
    if xs.len() < min_pairs.max(2) {
        return Err(Error::InsufficientData(alloc::format!(
            "{} usable pairs for {target:?} at lag {lag}, need {}",
            xs.len(),
            min_pairs.max(2)
        )));
    }
    Sample::with_ids(xs, ys, ids)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScreenConfig {
    pub tktp: TktpConfig,
    pub min_fraction: f64,
    pub missing: MissingPolicy,
    pub min_pairs: usize,
}

impl Default for ScreenConfig {
    fn default() -> Self {
        ScreenConfig {
            tktp: TktpConfig::default(),
            min_fraction: DEFAULT_MIN_FRACTION,
            missing: MissingPolicy::Pairwise,
            min_pairs: DEFAULT_MIN_PAIRS,
        }
    }
}

/// Screen outcome for one target series.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PairResult {
    pub name: String,
    pub lag: usize,
    /// Usable pairs.
    pub n: usize,
    pub k_hat: usize,
    /// Selected target time indices, ascending.
    pub selection: Vec<usize>,
    pub fraction: f64,
    pub passed: bool,
    /// Correlations over the selected pairs; absent below 3 pairs.
    pub pearson: Option<f64>,
    pub kendall: Option<f64>,
    /// Kendall's tau over all usable pairs.
    pub kendall_all: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScreenReport {
    pub predictor: String,
    pub lag: usize,
    /// Successful screens in series-name order, passing or not.
    pub results: Vec<PairResult>,
    /// Series that could not be screened, in series-name order.
    pub errors: Vec<(String, Error)>,
}

impl ScreenReport {
    pub fn passed(&self) -> impl Iterator<Item = &PairResult> {
        self.results.iter().filter(|r| r.passed)
    }
}

/// Screens one target against the lagged predictor.
pub fn screen_series(
    table: &PriceTable,
    target: &str,
    predictor: &str,
    lag: usize,
    config: &ScreenConfig,
    source: &dyn BoundarySource,
) -> Result<PairResult> {
    let s = lag_align(table, target, predictor, lag, config.missing, config.min_pairs)?;
    screen_aligned(target, lag, &s, config, &config.tktp, source)
}

fn screen_aligned(
    name: &str,
    lag: usize,
    s: &Sample,
    config: &ScreenConfig,
    tktp_config: &TktpConfig,
    source: &dyn BoundarySource,
) -> Result<PairResult> {
    let sel = tktp(s, tktp_config, source)?;
    let mut selection: Vec<usize> = sel.selected.clone();
    selection.sort_unstable();
    let fraction = selection.len() as f64 / s.len() as f64;
    let (pearson, kendall) = if sel.selected_positions.len() >= 3 {
        let sub = s.subset(&sel.selected_positions)?;
        (pearson(&sub).ok(), Some(kendall_tau(&sub)))
    } else {
        (None, None)
    };
    Ok(PairResult {
        name: name.to_string(),
        lag,
        n: s.len(),
        k_hat: sel.k_hat,
        selection,
        fraction,
        passed: fraction >= config.min_fraction,
        pearson,
        kendall,
        kendall_all: kendall_tau(s),
    })
}

/// Screens every series except the predictor. One boundary is requested per
/// distinct usable-pair count; per-series failures are collected, not
/// propagated.
pub fn screen_pairs(
    table: &PriceTable,
    predictor: &str,
    lag: usize,
    config: &ScreenConfig,
    source: &dyn BoundarySource,
) -> Result<ScreenReport> {
    table.series(predictor)?;
    let mut names: Vec<&String> = table.names().iter().filter(|n| n.as_str() != predictor).collect();
    names.sort();

    let mut errors = Vec::new();
    let mut aligned = Vec::new();
    for (i, name) in names.iter().enumerate() {
        match lag_align(table, name, predictor, lag, config.missing, config.min_pairs) {
            Ok(s) => aligned.push((i, name.as_str(), s)),
            Err(e) => errors.push(((*name).clone(), e)),
        }
    }
    let mut boundaries: Vec<(usize, RejectBoundary)> = Vec::new();
    for (_, name, s) in &aligned {
        if boundaries.iter().all(|(n, _)| *n != s.len()) {
            match source.boundary(&config.tktp.boundary_params(s.len())) {
                Ok(b) => boundaries.push((s.len(), b)),
                Err(e) => errors.push(((*name).to_string(), e)),
            }
        }
    }
    let outcomes = par::map_indexed(aligned.len(), |j| {
        let (i, name, s) = &aligned[j];
        let boundary = boundaries.iter().find(|(n, _)| *n == s.len()).map(|(_, b)| b);
        let Some(boundary) = boundary else {
            return Err(invalid!("no boundary for n={}", s.len()));
        };
        let mut cfg = config.tktp;
        cfg.policy.tie_break = cfg.policy.tie_break.rule().with_seed(rng::mix(cfg.seed, *i as u64));
        screen_aligned(name, lag, s, config, &cfg, boundary)
    });
    let mut results = Vec::new();
    for ((_, name, _), outcome) in aligned.iter().zip(outcomes) {
        match outcome {
            Ok(r) => results.push(r),
            Err(e) => {
                if !errors.iter().any(|(n, _)| n == name) {
                    errors.push((name.to_string(), e));
                }
            }
        }
    }
    errors.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(ScreenReport { predictor: predictor.to_string(), lag, results, errors })
}

/// `|A ∩ B| / |A ∪ B|`; two empty sets give 0.
pub fn jaccard(a: &[usize], b: &[usize]) -> f64 {
    let a: BTreeSet<usize> = a.iter().copied().collect();
    let b: BTreeSet<usize> = b.iter().copied().collect();
    let union = a.union(&b).count();
    if union == 0 {
        return 0.0;
    }
    a.intersection(&b).count() as f64 / union as f64
}

/// Complete-linkage agglomeration on a similarity matrix: clusters merge
/// while every cross pair has similarity above `threshold`. Returns member
/// index lists (ascending), singletons included.
pub fn complete_linkage_from_similarity(sim: &[Vec<f64>], threshold: f64) -> Vec<Vec<usize>> {
    let m = sim.len();
    let mut clusters: Vec<Vec<usize>> = (0..m).map(|i| vec![i]).collect();
    // linkage[a][b] = min similarity over cross pairs
    let mut linkage: Vec<Vec<f64>> = sim.to_vec();
    loop {
        let mut best: Option<(usize, usize, f64)> = None;
        for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                let s = linkage[a][b];
                if s > threshold && best.map_or(true, |(_, _, b)| s > b) {
                    best = Some((a, b, s));
                }
            }
        }
        let Some((a, b, _)) = best else { break };
        let moved = clusters.remove(b);
        clusters[a].extend(moved);
        clusters[a].sort_unstable();
        let row_b = linkage.remove(b);
        for row in linkage.iter_mut() {
            row.remove(b);
        }
        for c in 0..clusters.len() {
            let old_b = if c < b { row_b[c] } else { row_b[c + 1] };
            let s = linkage[a][c].min(old_b);
            linkage[a][c] = s;
            linkage[c][a] = s;
        }
        linkage[a][a] = 1.0;
    }
    clusters
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Cluster {
    pub members: Vec<String>,
    /// Smallest pairwise Jaccard coefficient inside the cluster.
    pub min_jaccard: f64,
    /// `inclusion[t]` is how many members selected time index `t`.
    pub inclusion: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ClusterReport {
    pub threshold: f64,
    /// Clusters of two or more series, largest first.
    pub clusters: Vec<Cluster>,
}

/// Pools selections: complete linkage on `1 - J`, reporting clusters in
/// which every pair of members has `J > threshold`.
pub fn complete_linkage_clusters(results: &[PairResult], threshold: f64, time_points: usize) -> ClusterReport {
    let m = results.len();
    let mut sim = vec![vec![1.0; m]; m];
    for i in 0..m {
        for j in i + 1..m {
            let s = jaccard(&results[i].selection, &results[j].selection);
            sim[i][j] = s;
            sim[j][i] = s;
        }
    }
    let mut clusters: Vec<Cluster> = complete_linkage_from_similarity(&sim, threshold)
        .into_iter()
        .filter(|c| c.len() >= 2)
        .map(|idx| {
            let mut inclusion = vec![0usize; time_points];
            for &i in &idx {
                for &t in &results[i].selection {
                    if t < time_points {
                        inclusion[t] += 1;
                    }
                }
            }
            let mut min_jaccard = 1.0f64;
            for (a, &i) in idx.iter().enumerate() {
                for &j in &idx[a + 1..] {
                    min_jaccard = min_jaccard.min(sim[i][j]);
                }
            }
            let mut members: Vec<String> = idx.iter().map(|&i| results[i].name.clone()).collect();
            members.sort();
            Cluster { members, min_jaccard, inclusion }
        })
        .collect();
    clusters.sort_by(|a, b| b.members.len().cmp(&a.members.len()).then(a.members.cmp(&b.members)));
    ClusterReport { threshold, clusters }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multistage::Simulate;
    use alloc::format;
    use proptest::prelude::*;

    fn table(n: usize) -> PriceTable {
        let labels = (0..n).map(|i| format!("{i:04}")).collect();
        let oil = (0..n).map(|i| Some(i as f64)).collect();
        let a = (0..n).map(|i| Some((i as f64 * 7.3) % 11.0)).collect();
        PriceTable::new(labels, vec![("oil".into(), oil), ("a".into(), a)]).unwrap()
    }

    #[test]
    fn lag_arithmetic() {
        let t = table(523);
        let s = lag_align(&t, "a", "oil", 26, MissingPolicy::Pairwise, 30).unwrap();
        assert_eq!(s.len(), 497);
        assert_eq!(s.ids()[0], 26);
        assert_eq!(s.x()[0], 0.0);
        assert_eq!(lag_align(&t, "a", "oil", 0, MissingPolicy::Pairwise, 30).unwrap().len(), 523);
        assert!(matches!(
            lag_align(&t, "a", "oil", 500, MissingPolicy::Pairwise, 30),
            Err(Error::InsufficientData(_))
        ));
        assert!(matches!(lag_align(&t, "b", "oil", 1, MissingPolicy::Pairwise, 30), Err(Error::UnknownSeries(_))));
    }

    #[test]
    fn gaps_drop_only_touching_pairs() {
        let labels: Vec<String> = (0..40).map(|i| format!("{i:02}")).collect();
        let mut oil: Vec<Option<f64>> = (0..40).map(|i| Some(i as f64)).collect();
        let a: Vec<Option<f64>> = (0..40).map(|i| Some(-(i as f64))).collect();
        oil[10] = None;
        let t = PriceTable::new(labels, vec![("oil".into(), oil), ("a".into(), a)]).unwrap();
        let s = lag_align(&t, "a", "oil", 2, MissingPolicy::Pairwise, 10).unwrap();
        assert_eq!(s.len(), 37);
        assert!(!s.ids().contains(&12));
        assert!(lag_align(&t, "a", "oil", 2, MissingPolicy::RequireComplete, 10).is_err());
    }

    #[test]
    fn table_validation() {
        let labels = vec!["a".to_string(), "a".to_string()];
        assert!(PriceTable::new(labels, vec![]).is_err());
        let labels = vec!["a".to_string(), "b".to_string()];
        let col = vec![Some(1.0), None];
        assert!(PriceTable::new(labels.clone(), vec![("x".into(), col.clone()), ("x".into(), col)]).is_err());
        assert!(PriceTable::new(labels, vec![("x".into(), vec![Some(1.0)])]).is_err());
    }

    #[test]
    fn self_pair_is_fully_selected() {
        let t = table(120);
        let cfg = ScreenConfig { tktp: TktpConfig { nsim: 200, ..TktpConfig::default() }, ..ScreenConfig::default() };
        let r = screen_series(&t, "oil", "oil", 0, &cfg, &Simulate).unwrap();
        assert_eq!(r.fraction, 1.0);
        assert!(r.passed);
        assert!((r.pearson.unwrap() - 1.0).abs() < 1e-12);
        let report = screen_pairs(&t, "oil", 0, &cfg, &Simulate).unwrap();
        assert_eq!(report.results.len(), 1);
        assert!(screen_pairs(&t, "gas", 0, &cfg, &Simulate).is_err());
    }

    #[test]
    fn jaccard_values() {
        assert_eq!(jaccard(&[1, 2, 3], &[3, 2, 1]), 1.0);
        assert_eq!(jaccard(&[1, 2], &[3, 4]), 0.0);
        assert_eq!(jaccard(&[1, 2, 3], &[2, 3, 4]), 0.5);
        assert_eq!(jaccard(&[], &[]), 0.0);
    }

    #[test]
    fn linkage_counterexample() {
        // A~B 0.9, A~C 0.9, B~C 0.5: no triple at 0.8, one pair merges
        let sim = vec![vec![1.0, 0.9, 0.9], vec![0.9, 1.0, 0.5], vec![0.9, 0.5, 1.0]];
        let c = complete_linkage_from_similarity(&sim, 0.8);
        assert_eq!(c.len(), 2);
        assert!(c.iter().any(|c| c.len() == 2 && c.contains(&0)));
        assert!(c.iter().all(|c| c.len() < 3));
    }

    fn result(name: &str, selection: Vec<usize>) -> PairResult {
        PairResult {
            name: name.into(),
            lag: 0,
            n: 10,
            k_hat: selection.len(),
            fraction: 0.0,
            passed: true,
            selection,
            pearson: None,
            kendall: None,
            kendall_all: 0.0,
        }
    }

    #[test]
    fn identical_selections_cluster() {
        let rs = vec![result("b", vec![1, 2, 3]), result("a", vec![1, 2, 3]), result("c", vec![7, 8])];
        let rep = complete_linkage_clusters(&rs, 0.8, 10);
        assert_eq!(rep.clusters.len(), 1);
        assert_eq!(rep.clusters[0].members, vec!["a".to_string(), "b".to_string()]);
        assert_eq!(rep.clusters[0].inclusion[2], 2);
        assert_eq!(rep.clusters[0].inclusion[7], 0);
    }

    proptest! {
        #[test]
        fn clusters_satisfy_complete_linkage(
            sets in proptest::collection::vec(proptest::collection::btree_set(0usize..12, 0..10), 1..12),
            threshold in 0.2f64..0.95,
        ) {
            let rs: Vec<PairResult> = sets
                .iter()
                .enumerate()
                .map(|(i, s)| result(&format!("s{i:02}"), s.iter().copied().collect()))
                .collect();
            let rep = complete_linkage_clusters(&rs, threshold, 12);
            for c in &rep.clusters {
                for a in &c.members {
                    for b in &c.members {
                        if a < b {
                            let ia = rs.iter().find(|r| &r.name == a).unwrap();
                            let ib = rs.iter().find(|r| &r.name == b).unwrap();
                            prop_assert!(jaccard(&ia.selection, &ib.selection) > threshold);
                        }
                    }
                }
            }
        }
    }
}
