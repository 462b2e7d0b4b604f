use alloc::vec::Vec;

use super::boundary::RejectBoundary;
use super::mle::MamleCurve;
use crate::error::{invalid, Result};

/// Stages where the curve lies strictly above the boundary, ascending.
pub fn exceedances(mamle: &MamleCurve, boundary: &RejectBoundary) -> Result<Vec<usize>> {
    if mamle.n != boundary.n() || mamle.window != boundary.window() || mamle.theta.len() != boundary.q.len() {
        return Err(invalid!(
            "curve (n={}, window={}) and boundary (n={}, window={}) differ",
            mamle.n,
            mamle.window,
            boundary.n(),
            boundary.window()
        ));
    }
    Ok(mamle
        .iter()
        .zip(&boundary.q)
        .filter(|((_, t), q)| t > q)
        .map(|((j, _), _)| j)
        .collect())
}

/// Estimated stopping stage, 0 when there is no evidence of association.
pub fn stopping_point(mamle: &MamleCurve, boundary: &RejectBoundary, alpha: f64) -> Result<usize> {
    let exceed = exceedances(mamle, boundary)?;
    Ok(stopping_stage_from_exceedances(&exceed, mamle.n, alpha))
}

/// The first exceedance stage after which at most an `alpha` share of the
/// remaining stages still exceed.
pub fn stopping_stage_from_exceedances(exceed: &[usize], n: usize, alpha: f64) -> usize {
    let count = exceed.len();
    for (i, &stage) in exceed.iter().enumerate() {
        let left = (count - i - 1) as f64;
        let tail = n.saturating_sub(stage) as f64;
        if left <= alpha * tail {
            return stage;
        }
    }
    0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multistage::boundary::BoundaryParams;
    use crate::taupath::TieRule;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn hand_traces() {
        let exceed: Vec<usize> = (1..=10).collect();
        assert_eq!(stopping_stage_from_exceedances(&exceed, 100, 0.05), 6);
        assert_eq!(stopping_stage_from_exceedances(&[1, 2, 3], 20, 0.05), 3);
        assert_eq!(stopping_stage_from_exceedances(&[], 20, 0.05), 0);
    }

    fn fixture(theta: Vec<f64>, q: Vec<f64>) -> (MamleCurve, RejectBoundary) {
        let n = theta.len() + 2;
        let params = BoundaryParams { n, window: 1, alpha: 0.05, nsim: 1, seed: 0, tie_rule: TieRule::First };
        (MamleCurve { n, window: 1, theta, clamped: vec![] }, RejectBoundary { params, q })
    }

    #[test]
    fn below_boundary_gives_zero() {
        let (c, b) = fixture(vec![1.0, 2.0, 3.0], vec![1.0, 2.5, 3.0]);
        assert_eq!(stopping_point(&c, &b, 0.05).unwrap(), 0);
        let (c2, _) = fixture(vec![1.0, 2.0], vec![]);
        assert!(stopping_point(&c2, &b, 0.05).is_err());
    }

    proptest! {
        #[test]
        fn result_is_an_exceedance(
            theta in proptest::collection::vec(0.0f64..10.0, 1..60),
            shift in proptest::collection::vec(-2.0f64..2.0, 60),
            eps in 0.0f64..1.0,
        ) {
            let q: Vec<f64> = theta.iter().zip(&shift).map(|(t, s)| t + s).collect();
            let (c, b) = fixture(theta.clone(), q.clone());
            let exceed = exceedances(&c, &b).unwrap();
            let k = stopping_point(&c, &b, 0.05).unwrap();
            prop_assert!(k == 0 || exceed.contains(&k));
            prop_assert_eq!(k == 0, exceed.is_empty() || stopping_stage_from_exceedances(&exceed, c.n, 0.05) == 0);
            // lifting the curve can only add exceedances
            let (up, _) = fixture(theta.iter().map(|t| t + eps).collect(), q);
            let more = exceedances(&up, &b).unwrap();
            prop_assert!(exceed.iter().all(|j| more.contains(j)));
        }
    }
}
