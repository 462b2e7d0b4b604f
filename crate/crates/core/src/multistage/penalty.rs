use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::rank::pairs;

/// Per-stage discordance increments along a tau-path.
///
/// Entry `k - 2` belongs to stage `k = 2..=n`: `v` counts the discordant
/// pairs added when the `k`-th observation joins the prefix and `m = n - k + 1`
/// is the number of objects still available at that stage.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PenaltySequence {
    pub v: Vec<f64>,
    pub m: Vec<usize>,
}

impl PenaltySequence {
    /// Number of observations on the underlying tau-path.
    pub fn n(&self) -> usize {
        self.v.len() + 1
    }

    pub fn stage_v(&self, k: usize) -> f64 {
        self.v[k - 2]
    }

    pub fn stage_m(&self, k: usize) -> usize {
        self.m[k - 2]
    }

    pub fn total(&self) -> f64 {
        self.v.iter().sum()
    }
}

const TOL: f64 = 1e-9;

/// Turns a tau-path `T[2..=n]` into discordance increments.
///
/// The running discordance count at stage `k` is `(1 - T[k]) / 2 * C(k, 2)`
/// and `v[k]` is its first difference (the count before stage 2 is zero).
pub fn discordance_increments(tau: &[f64]) -> Result<PenaltySequence> {
    if tau.is_empty() {
        return Err(invalid!("empty tau-path"));
    }
    for (j, &t) in tau.iter().enumerate() {
        if !(-1.0 - TOL..=1.0 + TOL).contains(&t) {
            return Err(invalid!("tau at stage {} is {t}, outside [-1, 1]", j + 2));
        }
    }
    if let Some(j) = tau.windows(2).position(|w| w[1] > w[0] + TOL) {
        return Err(invalid!("tau-path increases at stage {}", j + 3));
    }
    let n = tau.len() + 1;
    let mut v = Vec::with_capacity(tau.len());
    let mut prev = 0.0;
    for (j, &t) in tau.iter().enumerate() {
        let k = j + 2;
        let mut d = (1.0 - t) / 2.0 * pairs(k) as f64;
        // counts are integers up to rounding of the stored taus
        if (d - libm::round(d)).abs() < 1e-7 {
            d = libm::round(d);
        }
        v.push((d - prev).max(0.0));
        prev = d;
    }
    let m = (2..=n).map(|k| n - k + 1).collect();
    Ok(PenaltySequence { v, m })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn worked_path() {
        let p = discordance_increments(&[1.0, 1.0 / 3.0, -1.0 / 3.0, -0.4]).unwrap();
        assert_eq!(p.v, vec![0.0, 1.0, 3.0, 3.0]);
        assert_eq!(p.m, vec![4, 3, 2, 1]);
        // running totals 0, 1, 4, 7 reconstruct the full-sample count
        assert_eq!(p.total(), 7.0);
    }

    #[test]
    fn concordant_and_reversed() {
        assert!(discordance_increments(&[1.0; 9]).unwrap().v.iter().all(|&v| v == 0.0));
        let p = discordance_increments(&[1.0, -1.0]).unwrap();
        assert_eq!(p.stage_v(3), 3.0);
    }

    #[test]
    fn rejects_bad_paths() {
        assert!(discordance_increments(&[0.2, 0.5]).is_err());
        assert!(discordance_increments(&[1.5]).is_err());
        assert!(discordance_increments(&[]).is_err());
    }
}
