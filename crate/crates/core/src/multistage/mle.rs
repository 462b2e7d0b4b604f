use alloc::vec::Vec;

use super::penalty::{discordance_increments, PenaltySequence};
use crate::error::{invalid, Result};

/// Upper clamp for stage-wise agreement estimates.
pub const THETA_MAX: f64 = 10.0;
/// Search interval for `r = exp(-theta)`.
pub const R_MIN: f64 = 1e-6;
pub const R_MAX: f64 = 1.0 - 1e-6;
const R_TOL: f64 = 1e-9;

/// Mean of the geometric law truncated to `0..m`, `P(V = v) ∝ r^v`.
pub fn expected_penalty(r: f64, m: usize) -> f64 {
    if m <= 1 {
        return 0.0;
    }
    let lr = libm::log(r);
    // 1 - r and 1 - r^m without cancellation
    let one_minus_r = -libm::expm1(lr);
    let one_minus_rm = -libm::expm1(m as f64 * lr);
    r / one_minus_r - m as f64 * libm::exp(m as f64 * lr) / one_minus_rm
}

/// Log-likelihood of penalties `v` with truncation sizes `m` at ratio `r`.
pub fn log_likelihood(r: f64, v: &[f64], m: &[usize]) -> f64 {
    let lr = libm::log(r);
    v.iter()
        .zip(m)
        .map(|(&v, &m)| {
            libm::log(-libm::expm1(lr)) - libm::log(-libm::expm1(m as f64 * lr)) + v * lr
        })
        .sum()
}

/// Maximum likelihood estimate of `theta = -ln r` for independent truncated
/// geometric penalties, clamped to `[0, THETA_MAX]`.
///
/// The score equation is `sum E_r[V_i] = sum v_i`; its left side increases in
/// `r`, so the root is bracketed on `[R_MIN, R_MAX]` and found by bisection.
pub fn truncated_geom_mle(v: &[f64], m: &[usize]) -> Result<f64> {
    if v.is_empty() {
        return Err(invalid!("empty penalty window"));
    }
    if v.len() != m.len() {
        return Err(invalid!("{} penalties for {} truncation sizes", v.len(), m.len()));
    }
    for (i, (&v, &m)) in v.iter().zip(m).enumerate() {
        if m == 0 {
            return Err(invalid!("truncation size 0 at window position {i}"));
        }
        if !v.is_finite() || v < 0.0 || v > (m - 1) as f64 + 1e-9 {
            return Err(invalid!("penalty {v} outside [0, {}] at window position {i}", m - 1));
        }
    }
    let target: f64 = v.iter().sum();
    if target <= 0.0 {
        return Ok(THETA_MAX);
    }
    let excess = |r: f64| m.iter().map(|&m| expected_penalty(r, m)).sum::<f64>() - target;
    if excess(R_MIN) >= 0.0 {
        return Ok(THETA_MAX);
    }
    if excess(R_MAX) <= 0.0 {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (R_MIN, R_MAX);
    while hi - lo >= R_TOL {
        let mid = 0.5 * (lo + hi);
        if excess(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((-libm::log(0.5 * (lo + hi))).clamp(0.0, THETA_MAX))
}

/// Moving-window MLE curve along a tau-path.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MamleCurve {
    pub n: usize,
    pub window: usize,
    /// `theta[j - window - 1]` is the estimate at stage `j = window+1..=n`.
    pub theta: Vec<f64>,
    /// Stages whose penalty exceeded `m - 1` and was clamped.
    pub clamped: Vec<usize>,
}

impl MamleCurve {
    pub fn first_stage(&self) -> usize {
        self.window + 1
    }

    pub fn stages(&self) -> core::ops::RangeInclusive<usize> {
        self.first_stage()..=self.n
    }

    pub fn at(&self, stage: usize) -> Option<f64> {
        stage.checked_sub(self.first_stage()).and_then(|i| self.theta.get(i).copied())
    }

    /// `(stage, theta)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.stages().zip(self.theta.iter().copied())
    }
}

/// Fits the curve: the estimate at stage `j` uses the penalties of stages
/// `j - window + 1..=j`, each clamped into its support `[0, m - 1]` first.
pub fn taupath_mamle(tau: &[f64], window: usize) -> Result<MamleCurve> {
    let n = tau.len() + 1;
    if window == 0 || window >= n {
        return Err(invalid!("window {window} must lie in 1..{n}"));
    }
    let p = discordance_increments(tau)?;
    Ok(mamle_from_penalties(&p, window))
}

pub(crate) fn mamle_from_penalties(p: &PenaltySequence, window: usize) -> MamleCurve {
    let n = p.n();
    let mut clamped = Vec::new();
    let v: Vec<f64> = p
        .v
        .iter()
        .zip(&p.m)
        .enumerate()
        .map(|(j, (&v, &m))| {
            let cap = (m - 1) as f64;
            if v > cap {
                clamped.push(j + 2);
                cap
            } else {
                v
            }
        })
        .collect();
    let theta = (window + 1..=n)
        .map(|j| {
            let span = j - window - 1..j - 1;
            truncated_geom_mle(&v[span.clone()], &p.m[span]).expect("penalties clamped into support")
        })
        .collect();
    MamleCurve { n, window, theta, clamped }
}
