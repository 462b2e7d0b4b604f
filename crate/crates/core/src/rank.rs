//! Ranks, pairwise concordance and correlation coefficients.
//!
//! Tied pairs get a concordance sign of 0 and ranks are broken by original
//! index. The tau-path guarantees downstream only hold for tie-free data.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{invalid, Error, Result};

/// Default cap on the number of observations for which a dense concordance
/// matrix is built.
pub const DEFAULT_MAX_OBSERVATIONS: usize = 32_000;

/// A bivariate sample `(x_i, y_i)` with one identifier per observation.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Sample {
    x: Vec<f64>,
    y: Vec<f64>,
    ids: Vec<usize>,
}

impl Sample {
    /// Builds a sample with identifiers `1..=n`.
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let ids = (1..=x.len()).collect();
        Self::with_ids(x, y, ids)
    }

    pub fn with_ids(mut x: Vec<f64>, mut y: Vec<f64>, ids: Vec<usize>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::LengthMismatch { x: x.len(), y: y.len() });
        }
        if ids.len() != x.len() {
            return Err(invalid!("{} identifiers for {} observations", ids.len(), x.len()));
        }
        if x.len() < 2 {
            return Err(Error::TooSmall { min: 2, got: x.len() });
        }
        for (index, (a, b)) in x.iter_mut().zip(y.iter_mut()).enumerate() {
            if !a.is_finite() || !b.is_finite() {
                return Err(Error::NonFinite { index });
            }
            // fold -0.0 into 0.0 so total_cmp agrees with numeric order
            *a += 0.0;
            *b += 0.0;
        }
        let mut sorted = ids.clone();
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateId(w[0]));
        }
        Ok(Sample { x, y, ids })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    /// True when neither coordinate has repeated values.
    pub fn is_tie_free(&self) -> bool {
        fn distinct(v: &[f64]) -> bool {
            let mut s = v.to_vec();
            s.sort_unstable_by(f64::total_cmp);
            s.windows(2).all(|w| w[0] != w[1])
        }
        distinct(&self.x) && distinct(&self.y)
    }

    /// The observations at positions `idx` (0-based), in that order.
    pub fn subset(&self, idx: &[usize]) -> Result<Sample> {
        let n = self.len();
        let mut x = Vec::with_capacity(idx.len());
        let mut y = Vec::with_capacity(idx.len());
        let mut ids = Vec::with_capacity(idx.len());
        for &i in idx {
            if i >= n {
                return Err(Error::OutOfRange { index: i, len: n });
            }
            x.push(self.x[i]);
            y.push(self.y[i]);
            ids.push(self.ids[i]);
        }
        Sample::with_ids(x, y, ids)
    }
}

/// Ranks `1..=n`; equal values are ranked by original position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankVector(Vec<usize>);

impl RankVector {
    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<usize> {
        self.0
    }
}

/// Rank of each element: one plus the number of strictly smaller elements,
/// plus the number of equal elements that appear earlier.
pub fn to_ranks(values: &[f64]) -> Result<RankVector> {
    if values.len() < 2 {
        return Err(Error::TooSmall { min: 2, got: values.len() });
    }
    if let Some(index) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    // stable sort keeps index order within ties
    order.sort_by(|&a, &b| (values[a] + 0.0).total_cmp(&(values[b] + 0.0)));
    let mut ranks = vec![0; values.len()];
    for (r, &i) in order.iter().enumerate() {
        ranks[i] = r + 1;
    }
    Ok(RankVector(ranks))
}

#[inline]
fn sign(a: f64, b: f64) -> i8 {
    (a > b) as i8 - (a < b) as i8
}

/// Dense symmetric matrix of pairwise concordance signs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConcordanceMatrix {
    n: usize,
    data: Vec<i8>,
}

impl ConcordanceMatrix {
    /// Builds the matrix for a sample, refusing samples above
    /// [`DEFAULT_MAX_OBSERVATIONS`].
    pub fn new(s: &Sample) -> Result<Self> {
        Self::build(s, DEFAULT_MAX_OBSERVATIONS, false)
    }

    /// Builds the matrix with an explicit size cap, optionally filling rows
    /// on the rayon pool.
    pub fn build(s: &Sample, max_n: usize, parallel: bool) -> Result<Self> {
        let n = s.len();
        if n > max_n {
            return Err(Error::TooLarge { max: max_n, got: n });
        }
        let (x, y) = (s.x(), s.y());
        let mut data = vec![0i8; n * n];
        let fill = |i: usize, row: &mut [i8]| {
            let (xi, yi) = (x[i], y[i]);
            for (j, c) in row.iter_mut().enumerate() {
                *c = sign(xi, x[j]) * sign(yi, y[j]);
            }
        };
        #[cfg(feature = "std")]
        if parallel {
            use rayon::prelude::*;
            data.par_chunks_mut(n).enumerate().for_each(|(i, row)| fill(i, row));
            return Ok(ConcordanceMatrix { n, data });
        }
        let _ = parallel;
        for (i, row) in data.chunks_mut(n).enumerate() {
            fill(i, row);
        }
        Ok(ConcordanceMatrix { n, data })
    }

    /// Wraps a row-major sign matrix, checking symmetry, the zero diagonal
    /// and the entry range.
    pub fn from_rows(n: usize, data: Vec<i8>) -> Result<Self> {
        if data.len() != n * n {
            return Err(invalid!("expected {} entries, got {}", n * n, data.len()));
        }
        for i in 0..n {
            if data[i * n + i] != 0 {
                return Err(invalid!("nonzero diagonal at {i}"));
            }
            for j in 0..n {
                let v = data[i * n + j];
                if !(-1..=1).contains(&v) || v != data[j * n + i] {
                    return Err(invalid!("entry ({i}, {j}) is not a symmetric sign"));
                }
            }
        }
        Ok(ConcordanceMatrix { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> i8 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[i8] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub(crate) fn as_slice(&self) -> &[i8] {
        &self.data
    }

    /// Sum of the strict upper triangle, i.e. concordant minus discordant pairs.
    pub fn upper_sum(&self) -> i64 {
        (0..self.n)
            .map(|i| self.row(i)[i + 1..].iter().map(|&v| v as i64).sum::<i64>())
            .sum()
    }

    /// Kendall's tau of the full sample.
    pub fn tau(&self) -> f64 {
        self.upper_sum() as f64 / pairs(self.n) as f64
    }
}

pub(crate) fn pairs(k: usize) -> u64 {
    (k as u64) * (k as u64 - 1) / 2
}

/// Builds the concordance matrix of `s` with the default size cap.
pub fn concordance_matrix(s: &Sample) -> Result<ConcordanceMatrix> {
    ConcordanceMatrix::new(s)
}

/// Kendall's tau over the observations at positions `idx` (0-based).
pub fn subset_tau(c: &ConcordanceMatrix, idx: &[usize]) -> Result<f64> {
    if idx.len() < 2 {
        return Err(Error::TooSmall { min: 2, got: idx.len() });
    }
    let mut seen = vec![false; c.n()];
    for &i in idx {
        if i >= c.n() {
            return Err(Error::OutOfRange { index: i, len: c.n() });
        }
        if core::mem::replace(&mut seen[i], true) {
            return Err(Error::DuplicateId(i));
        }
    }
    let mut sum = 0i64;
    for (a, &i) in idx.iter().enumerate() {
        let row = c.row(i);
        sum += idx[a + 1..].iter().map(|&j| row[j] as i64).sum::<i64>();
    }
    Ok(sum as f64 / pairs(idx.len()) as f64)
}

/// Kendall's tau `(A - D) / C(n, 2)`; tied pairs count as neither.
///
/// Knight's O(n log n) method: sort by `(x, y)`, count strict inversions of
/// `y` with a merge sort, then correct for tied pairs.
pub fn kendall_tau(s: &Sample) -> f64 {
    let (x, y) = (s.x(), s.y());
    let n = s.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by(|&a, &b| x[a].total_cmp(&x[b]).then(y[a].total_cmp(&y[b])));

    let tied_x = tied_pairs(order.iter().map(|&i| x[i]));
    let tied_xy = tied_pairs(order.iter().map(|&i| (x[i], y[i])));
    let mut ys: Vec<f64> = order.iter().map(|&i| y[i]).collect();
    let discordant = sort_count_inversions(&mut ys);
    let tied_y = tied_pairs(ys.iter().copied());

    let total = pairs(n);
    let concordant = total - discordant - tied_x - tied_y + tied_xy;
    (concordant as f64 - discordant as f64) / total as f64
}

/// Number of pairs within runs of equal consecutive items.
fn tied_pairs<T: PartialEq>(items: impl Iterator<Item = T>) -> u64 {
    let mut total = 0u64;
    let mut run = 0u64;
    let mut prev: Option<T> = None;
    for item in items {
        if prev.as_ref() == Some(&item) {
            run += 1;
        } else {
            total += run * run.saturating_sub(1) / 2;
            run = 1;
        }
        prev = Some(item);
    }
    total + run * run.saturating_sub(1) / 2
}

/// Sorts `v` ascending and returns the number of pairs `i < j` with
/// `v[i] > v[j]`.
fn sort_count_inversions(v: &mut [f64]) -> u64 {
    let n = v.len();
    let mut buf = vec![0.0; n];
    let mut inversions = 0u64;
    let mut width = 1;
    while width < n {
        let mut start = 0;
        while start < n {
            let mid = (start + width).min(n);
            let end = (start + 2 * width).min(n);
            let (mut i, mut j, mut k) = (start, mid, start);
            while i < mid && j < end {
                if v[i] <= v[j] {
                    buf[k] = v[i];
                    i += 1;
                } else {
                    buf[k] = v[j];
                    inversions += (mid - i) as u64;
                    j += 1;
                }
                k += 1;
            }
            buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
            k += mid - i;
            buf[k..k + end - j].copy_from_slice(&v[j..end]);
            start = end;
        }
        v.copy_from_slice(&buf);
        width *= 2;
    }
    inversions
}

/// Product-moment correlation.
pub fn pearson(s: &Sample) -> Result<f64> {
    pearson_slices(s.x(), s.y())
}

pub(crate) fn pearson_slices(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::ZeroVariance("x"));
    }
    if syy == 0.0 {
        return Err(Error::ZeroVariance("y"));
    }
    Ok((sxy / libm::sqrt(sxx * syy)).clamp(-1.0, 1.0))
}

/// Spearman's rho: Pearson correlation of the rank vectors.
pub fn spearman(s: &Sample) -> Result<f64> {
    let rx: Vec<f64> = to_ranks(s.x())?.0.into_iter().map(|r| r as f64).collect();
    let ry: Vec<f64> = to_ranks(s.y())?.0.into_iter().map(|r| r as f64).collect();
    if s.x().iter().all(|&v| v == s.x()[0]) {
        return Err(Error::ZeroVariance("x"));
    }
    if s.y().iter().all(|&v| v == s.y()[0]) {
        return Err(Error::ZeroVariance("y"));
    }
    pearson_slices(&rx, &ry)
}

/// The sample with `y` negated, which turns a search for negative
/// association into a search for positive association.
pub fn negate_y(s: &Sample) -> Sample {
    Sample {
        x: s.x.clone(),
        y: s.y.iter().map(|v| -v + 0.0).collect(),
        ids: s.ids.clone(),
    }
}

impl Ord for RankVector {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.cmp(&other.0)
    }
}

impl PartialOrd for RankVector {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
