//! Sequentially maximal monotone decreasing tau-paths.
//!
//! Both algorithms share one driver (backward elimination, tie bookkeeping
//! and the forward-step dominance test). They differ only in how the
//! stage-wise column sums of the permuted concordance matrix are produced:
//! [`fastbcs`] permutes a private copy of the matrix and re-sums the leading
//! `i x i` block at every stage (O(n^3) overall) while [`fastbcs2`] sums once
//! and repairs the sums on every transposition (O(n^2) overall). Identical
//! tie-break decisions therefore give bit-identical output.

mod incremental;
mod ledger;
mod reference;

use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::rank::{pairs, ConcordanceMatrix, Sample};
use crate::rng;

pub use ledger::TieLedger;

/// Default size from which column-sum updates are split across threads.
pub const DEFAULT_PARALLEL_THRESHOLD: usize = 2_000;

/// How to pick among observations tied for the minimum column sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum TieBreak {
    /// Always take the tied observation at the lowest position.
    #[default]
    First,
    /// Uniform choice from a ChaCha8 stream seeded with the given value.
    Random(u64),
}

/// A tie-break rule without its seed, as used when simulating many
/// replicates that each derive their own seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum TieRule {
    #[default]
    First,
    Random,
}

impl TieBreak {
    pub fn rule(self) -> TieRule {
        match self {
            TieBreak::First => TieRule::First,
            TieBreak::Random(_) => TieRule::Random,
        }
    }
}

impl TieRule {
    pub fn with_seed(self, seed: u64) -> TieBreak {
        match self {
            TieRule::First => TieBreak::First,
            TieRule::Random => TieBreak::Random(seed),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Algorithm {
    /// Reference version: column sums recomputed at every stage.
    FastBcs,
    /// Column sums computed once and updated incrementally.
    #[default]
    FastBcs2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BcsPolicy {
    pub tie_break: TieBreak,
    pub algorithm: Algorithm,
    /// Split column-sum work across the rayon pool for large prefixes.
    /// Has no effect without the `std` feature.
    pub parallel_colsums: bool,
    pub parallel_threshold: usize,
}

impl Default for BcsPolicy {
    fn default() -> Self {
        BcsPolicy {
            tie_break: TieBreak::First,
            algorithm: Algorithm::FastBcs2,
            parallel_colsums: false,
            parallel_threshold: DEFAULT_PARALLEL_THRESHOLD,
        }
    }
}

impl BcsPolicy {
    pub fn with_tie_break(mut self, tie_break: TieBreak) -> Self {
        self.tie_break = tie_break;
        self
    }

    pub fn with_algorithm(mut self, algorithm: Algorithm) -> Self {
        self.algorithm = algorithm;
        self
    }

    pub fn with_parallel(mut self, parallel: bool) -> Self {
        self.parallel_colsums = parallel;
        self
    }

    pub(crate) fn parallel_at(&self, len: usize) -> bool {
        cfg!(feature = "std") && self.parallel_colsums && len >= self.parallel_threshold
    }
}

/// Probe counts from one tau-path run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProfileCounters {
    /// Evaluations of the main loop head, including the halting one.
    pub repeat_iterations: u64,
    /// Stages where more than one observation had the minimum column sum.
    pub tie_events: u64,
    /// Sum of tieset sizes over all tie events.
    pub tieset_size_total: u64,
    /// Stages whose eliminated observation belonged to an earlier tieset.
    pub membership_hits: u64,
    pub forward_steps: u64,
    /// Stages skipped back over, `k - i - 1` per forward step.
    pub forward_distance: u64,
    /// Stage at which the loop halted.
    pub halting_index: usize,
}

impl ProfileCounters {
    pub fn mean_tieset_size(&self) -> f64 {
        if self.tie_events == 0 {
            0.0
        } else {
            self.tieset_size_total as f64 / self.tie_events as f64
        }
    }

    pub fn is_consistent(&self) -> bool {
        self.forward_steps <= self.membership_hits
            && self.membership_hits <= self.repeat_iterations
            && self.halting_index >= 2
    }
}

/// A tau-path ordering and its prefix taus.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TauPathResult {
    /// Observation identifiers in tau-path order.
    pub pi: Vec<usize>,
    /// The same ordering as 0-based sample positions.
    pub order: Vec<usize>,
    /// `tau[k - 2]` is Kendall's tau of the first `k` observations, `k = 2..=n`.
    pub tau: Vec<f64>,
    pub counters: ProfileCounters,
}

impl TauPathResult {
    pub fn n(&self) -> usize {
        self.order.len()
    }

    /// Tau at stage `k` (prefix size), `2 <= k <= n`.
    pub fn stage_tau(&self, k: usize) -> f64 {
        self.tau[k - 2]
    }

    /// The tau-path as an `n`-vector whose first entry is a placeholder 1,
    /// so that entry `k - 1` is the tau of the first `k` observations.
    pub fn path(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.tau.len() + 1);
        p.push(1.0);
        p.extend_from_slice(&self.tau);
        p
    }

    pub fn is_monotone(&self) -> bool {
        self.tau.windows(2).all(|w| w[0] >= w[1])
    }
}

/// Column-sum bookkeeping strategy. Positions refer to `order`; the sum at
/// position `p` for prefix size `i` is `sum_{u < i} C[order[u], order[p]]`.
pub(crate) trait Engine {
    /// Column sums of positions `0..i` for the current prefix size `i`, and
    /// their total.
    fn stage(&mut self, order: &[usize], i: usize) -> (&[i32], i64);
    /// Positions `p` and `q` of `order` were just exchanged.
    fn swapped(&mut self, order: &[usize], p: usize, q: usize);
    /// The prefix shrank from `i` to `i - 1`.
    fn shrink(&mut self, order: &[usize], i: usize);
    /// After a forward step: the prefix grows from `from` to `to` with
    /// positions `from..to` freshly filled.
    fn regrow(&mut self, order: &[usize], from: usize, to: usize);
    /// `C[order[p], order[u]]`.
    fn entry(&self, order: &[usize], p: usize, u: usize) -> i8;
}

/// Computes a tau-path with the reference algorithm.
pub fn fastbcs(s: &Sample, policy: &BcsPolicy) -> Result<TauPathResult> {
    let c = ConcordanceMatrix::new(s)?;
    fastbcs_matrix(&c, policy).map(|r| with_ids(r, s))
}

/// Computes a tau-path with incremental column sums.
pub fn fastbcs2(s: &Sample, policy: &BcsPolicy) -> Result<TauPathResult> {
    let c = ConcordanceMatrix::new(s)?;
    fastbcs2_matrix(&c, policy).map(|r| with_ids(r, s))
}

/// Computes a tau-path with the algorithm named by the policy.
pub fn tau_path(s: &Sample, policy: &BcsPolicy) -> Result<TauPathResult> {
    let c = ConcordanceMatrix::build(s, crate::rank::DEFAULT_MAX_OBSERVATIONS, policy.parallel_colsums)?;
    tau_path_matrix(&c, policy).map(|r| with_ids(r, s))
}

/// Tau-path of a prebuilt concordance matrix; identifiers are `1..=n`.
pub fn tau_path_matrix(c: &ConcordanceMatrix, policy: &BcsPolicy) -> Result<TauPathResult> {
    match policy.algorithm {
        Algorithm::FastBcs => fastbcs_matrix(c, policy),
        Algorithm::FastBcs2 => fastbcs2_matrix(c, policy),
    }
}

pub fn fastbcs_matrix(c: &ConcordanceMatrix, policy: &BcsPolicy) -> Result<TauPathResult> {
    check_size(c.n())?;
    let mut engine = reference::Permuted::new(c);
    Ok(drive(c.n(), &mut engine, policy))
}

pub fn fastbcs2_matrix(c: &ConcordanceMatrix, policy: &BcsPolicy) -> Result<TauPathResult> {
    check_size(c.n())?;
    let mut engine = incremental::Incremental::new(c, policy);
    Ok(drive(c.n(), &mut engine, policy))
}

fn check_size(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::TooSmall { min: 2, got: n });
    }
    Ok(())
}

fn with_ids(mut r: TauPathResult, s: &Sample) -> TauPathResult {
    r.pi = r.order.iter().map(|&p| s.ids()[p]).collect();
    r
}

enum Picker {
    First,
    Random(rng::StreamRng),
}

fn drive<E: Engine>(n: usize, engine: &mut E, policy: &BcsPolicy) -> TauPathResult {
    let mut order: Vec<usize> = (0..n).collect();
    let mut ledger = TieLedger::new();
    let mut counters = ProfileCounters::default();
    let mut picker = match policy.tie_break {
        TieBreak::First => Picker::First,
        TieBreak::Random(seed) => Picker::Random(rng::seeded(seed)),
    };
    let mut ties: Vec<usize> = Vec::new();
    let mut qi: Vec<i64> = Vec::new();
    let mut qk: Vec<i64> = Vec::new();
    let mut i = n;

    loop {
        counters.repeat_iterations += 1;
        let (colsum, total) = engine.stage(&order, i);
        if i <= 2 || total == (i * (i - 1)) as i64 {
            break;
        }

        // backward elimination: drop an observation with minimal column sum
        let minsum = *colsum.iter().min().expect("non-empty prefix");
        ties.clear();
        ties.extend((0..i).filter(|&p| colsum[p] == minsum));
        let l = if ties.len() > 1 {
            counters.tie_events += 1;
            counters.tieset_size_total += ties.len() as u64;
            ledger.record(i, ties.iter().map(|&p| order[p]).collect());
            match &mut picker {
                Picker::First => ties[0],
                Picker::Random(r) => ties[r.random_range(0..ties.len())],
            }
        } else {
            ties[0]
        };
        if l != i - 1 {
            order.swap(l, i - 1);
            engine.swapped(&order, l, i - 1);
        }
        engine.shrink(&order, i);

        // tie logic: would an observation eliminated at an earlier, larger
        // stage have been the better choice here?
        let a = i - 1;
        let mut hit = false;
        let mut forward = None;
        for k in ledger.containing(order[a], i) {
            hit = true;
            if dominates(engine, &order, i, k, &mut qi, &mut qk) {
                forward = Some(k);
                break;
            }
        }
        if hit {
            counters.membership_hits += 1;
        }
        if let Some(k) = forward {
            counters.forward_steps += 1;
            counters.forward_distance += (k - i - 1) as u64;
            order.swap(a, k - 1);
            engine.swapped(&order, a, k - 1);
            engine.regrow(&order, i - 1, k - 1);
            ledger.clear_through(k);
            i = k - 1;
            continue;
        }
        i -= 1;
    }
    counters.halting_index = i;

    let tau = prefix_taus(n, |p, u| engine.entry(&order, p, u));
    debug_assert!(tau.windows(2).all(|w| w[0] >= w[1]), "tau-path not monotone");
    TauPathResult { pi: order.iter().map(|p| p + 1).collect(), order, tau, counters }
}

/// Dominance test between the observation just eliminated at stage `i`
/// (position `i - 1`) and the one eliminated at stage `k` (position `k - 1`):
/// compares their cumulative column sums over prefix sizes `i..=k`, the
/// latter taken with the two exchanged.
fn dominates<E: Engine>(
    engine: &E,
    order: &[usize],
    i: usize,
    k: usize,
    qi: &mut Vec<i64>,
    qk: &mut Vec<i64>,
) -> bool {
    let (a, b) = (i - 1, k - 1);
    qi.clear();
    qk.clear();
    let (mut si, mut sk) = (0i64, 0i64);
    let ab = engine.entry(order, a, b) as i64;
    for u in 0..k {
        si += engine.entry(order, a, u) as i64;
        sk += engine.entry(order, b, u) as i64;
        if u + 1 >= i {
            qi.push(si);
            // with a and b exchanged the prefix holds b in place of a
            qk.push(if u + 1 < k { sk - ab } else { sk });
        }
    }
    qk.iter().zip(qi.iter()).all(|(x, y)| x >= y) && qk.iter().zip(qi.iter()).any(|(x, y)| x > y)
}

/// Taus of every prefix of size `2..=n` under a position-indexed accessor.
fn prefix_taus(n: usize, entry: impl Fn(usize, usize) -> i8) -> Vec<f64> {
    let mut tau = Vec::with_capacity(n - 1);
    let mut sum = 0i64;
    for k in 1..n {
        sum += (0..k).map(|u| entry(k, u) as i64).sum::<i64>();
        tau.push(sum as f64 / pairs(k + 1) as f64);
    }
    tau
}

/// Checks that `r` is a valid, sequentially maximal tau-path for `s`: a
/// permutation of the identifiers whose prefix taus match the data, do not
/// increase, and at every stage equal the best tau reachable by removing a
/// single observation from the next larger prefix.
pub fn verify_sequential_maximality(s: &Sample, r: &TauPathResult) -> bool {
    let n = s.len();
    if r.order.len() != n || r.tau.len() != n - 1 || r.pi.len() != n {
        return false;
    }
    let mut seen = alloc::vec![false; n];
    for (&p, &id) in r.order.iter().zip(&r.pi) {
        if p >= n || core::mem::replace(&mut seen[p], true) || s.ids()[p] != id {
            return false;
        }
    }
    let Ok(c) = ConcordanceMatrix::new(s) else { return false };
    let entry = |p: usize, u: usize| c.get(r.order[p], r.order[u]);
    let tau = prefix_taus(n, entry);
    if tau.iter().zip(&r.tau).any(|(a, b)| a != b) || !r.is_monotone() {
        return false;
    }
    for k in (3..=n).rev() {
        let colsums: Vec<i64> =
            (0..k).map(|p| (0..k).map(|u| entry(u, p) as i64).sum()).collect();
        let total: i64 = colsums.iter().sum::<i64>() / 2;
        let best = total - colsums.iter().min().unwrap();
        let kept = total - colsums[k - 1];
        if kept != best {
            return false;
        }
    }
    true
}
