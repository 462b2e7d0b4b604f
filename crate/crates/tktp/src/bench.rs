//! Runtime measurement and probe counters for the tau-path algorithms.

use std::time::Instant;

use rand::seq::SliceRandom;
use serde::Serialize;
use tktp_core::taupath::{tau_path, Algorithm, BcsPolicy, ProfileCounters, TieRule};
use tktp_core::{rng, Sample};

use crate::error::{AppError, Result};

pub const DEFAULT_ITERATIONS: usize = 5;

/// Independent uniform permutations of `1..=n` in both coordinates.
pub fn uniform_sample(n: usize, seed: u64) -> Sample {
    let mut r = rng::seeded(seed);
    let mut x: Vec<f64> = (1..=n).map(|v| v as f64).collect();
    let mut y = x.clone();
    x.shuffle(&mut r);
    y.shuffle(&mut r);
    Sample::new(x, y).expect("n >= 2")
}

fn policy(algorithm: Algorithm, tie: TieRule, seed: u64) -> BcsPolicy {
    BcsPolicy::default().with_algorithm(algorithm).with_tie_break(tie.with_seed(rng::mix(seed, 1)))
}

/// Counters from one run on an independent uniform sample.
pub fn profile_run(n: usize, seed: u64, algorithm: Algorithm, tie: TieRule) -> Result<ProfileCounters> {
    if n < 2 {
        return Err(AppError::Usage(format!("profile needs n >= 2, got {n}")));
    }
    Ok(tau_path(&uniform_sample(n, seed), &policy(algorithm, tie, seed))?.counters)
}

/// Counter means over `runs` independent samples of size `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileSummary {
    pub n: usize,
    pub runs: usize,
    pub repeat_iterations: f64,
    pub tie_events: f64,
    pub mean_tieset_size: f64,
    pub membership_hits: f64,
    pub forward_steps: f64,
    pub forward_distance: f64,
    pub halting_index: f64,
    pub ties_per_iteration: f64,
}

pub fn profile_mean(n: usize, runs: usize, seed: u64, algorithm: Algorithm, tie: TieRule) -> Result<ProfileSummary> {
    if runs == 0 {
        return Err(AppError::Usage("runs must be positive".into()));
    }
    let mut sum = [0.0f64; 7];
    for r in 0..runs {
        let c = profile_run(n, rng::mix(seed, r as u64), algorithm, tie)?;
        if !c.is_consistent() {
            return Err(AppError::Internal(format!("inconsistent counters {c:?}")));
        }
        let v = [
            c.repeat_iterations,
            c.tie_events,
            c.tieset_size_total,
            c.membership_hits,
            c.forward_steps,
            c.forward_distance,
            c.halting_index as u64,
        ];
        for (s, v) in sum.iter_mut().zip(v) {
            *s += v as f64;
        }
    }
    let k = runs as f64;
    Ok(ProfileSummary {
        n,
        runs,
        repeat_iterations: sum[0] / k,
        tie_events: sum[1] / k,
        mean_tieset_size: if sum[1] > 0.0 { sum[2] / sum[1] } else { 0.0 },
        membership_hits: sum[3] / k,
        forward_steps: sum[4] / k,
        forward_distance: sum[5] / k,
        halting_index: sum[6] / k,
        ties_per_iteration: sum[1] / sum[0],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DoublingReport {
    pub label: String,
    pub iterations: usize,
    pub sizes: Vec<usize>,
    /// Mean seconds per run at each size.
    pub mean_seconds: Vec<f64>,
    /// Sample variance of the run times at each size.
    pub variance: Vec<f64>,
    /// `T(2n) / T(n)`, one fewer than `sizes`.
    pub ratios: Vec<f64>,
    /// `lg` of each ratio.
    pub exponents: Vec<f64>,
}

/// `n_lo, 2 n_lo, 4 n_lo, ...` up to and including the last one `<= n_hi`.
pub fn doubling_sizes(n_lo: usize, n_hi: usize) -> Result<Vec<usize>> {
    if n_lo < 2 || n_hi < 2 * n_lo {
        return Err(AppError::Usage(format!("need n_lo >= 2 and n_hi >= 2 n_lo, got {n_lo}..{n_hi}")));
    }
    Ok(std::iter::successors(Some(n_lo), |&n| n.checked_mul(2)).take_while(|&n| n <= n_hi).collect())
}

/// Times `run(n, iteration)` with `prepare(n, iteration)` outside the clock.
/// One warm-up run at the smallest size is discarded.
pub fn doubling_with<T>(
    label: &str,
    n_lo: usize,
    n_hi: usize,
    iterations: usize,
    mut prepare: impl FnMut(usize, usize) -> T,
    mut run: impl FnMut(T),
) -> Result<DoublingReport> {
    let sizes = doubling_sizes(n_lo, n_hi)?;
    if iterations == 0 {
        return Err(AppError::Usage("iterations must be positive".into()));
    }
    run(prepare(n_lo, usize::MAX));
    let mut mean_seconds = Vec::new();
    let mut variance = Vec::new();
    for &n in &sizes {
        let times: Vec<f64> = (0..iterations)
            .map(|it| {
                let input = prepare(n, it);
                let start = Instant::now();
                run(input);
                start.elapsed().as_secs_f64()
            })
            .collect();
        let mean = times.iter().sum::<f64>() / iterations as f64;
        let var = if iterations > 1 {
            times.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (iterations - 1) as f64
        } else {
            0.0
        };
        mean_seconds.push(mean);
        variance.push(var);
    }
    let ratios: Vec<f64> = mean_seconds.windows(2).map(|w| w[1] / w[0]).collect();
    let exponents = ratios.iter().map(|r| r.log2()).collect();
    Ok(DoublingReport { label: label.to_string(), iterations, sizes, mean_seconds, variance, ratios, exponents })
}

/// Doubling experiment for a tau-path algorithm on fresh uniform inputs,
/// run sequentially.
pub fn doubling_ratios(
    n_lo: usize,
    n_hi: usize,
    algorithm: Algorithm,
    iterations: usize,
    seed: u64,
) -> Result<DoublingReport> {
    let label = match algorithm {
        Algorithm::FastBcs => "fastbcs",
        Algorithm::FastBcs2 => "fastbcs2",
    };
    let p = BcsPolicy::default().with_algorithm(algorithm).with_parallel(false);
    doubling_with(
        label,
        n_lo,
        n_hi,
        iterations,
        |n, it| uniform_sample(n, rng::mix(seed, ((n as u64) << 20) ^ it as u64)),
        |s| {
            let r = tau_path(&s, &p).expect("uniform samples are valid");
            std::hint::black_box(r);
        },
    )
}

/// Least-squares line `y = intercept + slope x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub intercept: f64,
    pub slope: f64,
    pub r_squared: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<LinearFit> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let k = x.len() as f64;
    let mx = x.iter().sum::<f64>() / k;
    let my = y.iter().sum::<f64>() / k;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some(LinearFit { intercept: my - slope * mx, slope, r_squared })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostModel {
    pub quantity: &'static str,
    pub fit: LinearFit,
}

/// Linear fits of each mean counter against `n`.
pub fn cost_models(summaries: &[ProfileSummary]) -> Vec<CostModel> {
    let n: Vec<f64> = summaries.iter().map(|s| s.n as f64).collect();
    let columns: [(&'static str, fn(&ProfileSummary) -> f64); 5] = [
        ("repeat_iterations", |s| s.repeat_iterations),
        ("tie_events", |s| s.tie_events),
        ("membership_hits", |s| s.membership_hits),
        ("forward_distance", |s| s.forward_distance),
        ("halting_index", |s| s.halting_index),
    ];
    columns
        .iter()
        .filter_map(|(name, get)| {
            let y: Vec<f64> = summaries.iter().map(get).collect();
            linear_fit(&n, &y).map(|fit| CostModel { quantity: name, fit })
        })
        .collect()
}
