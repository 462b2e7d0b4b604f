use proptest::prelude::*;
use tktp_core::copula::{sample_mixture, CopulaSpec, Family, MixtureSpec, Strength};
use tktp_core::multistage::{generate_reject_boundary, tktp};
use tktp_core::rank::{concordance_matrix, negate_y, subset_tau};
use tktp_core::screen::{lag_align, screen_pairs, MissingPolicy, PriceTable, ScreenConfig};
use tktp_core::taupath::{fastbcs, fastbcs2, tau_path, BcsPolicy, TieBreak};
use tktp_core::{Sample, TktpConfig};

fn golden() -> Sample {
    Sample::new(vec![1., 2., 4., 3., 5.], vec![4., 3., 1., 5., 2.]).unwrap()
}

#[test]
fn worked_examples_through_public_api() {
    let p = BcsPolicy::default();
    for f in [fastbcs, fastbcs2] {
        let r = f(&golden(), &p).unwrap();
        assert_eq!(r.pi, vec![4, 1, 2, 5, 3]);
        assert_eq!(r.tau, vec![1.0, 1.0 / 3.0, -1.0 / 3.0, -0.4]);
        let s2 = Sample::new(vec![1., 2., 3., 5., 4.], vec![2., 4., 1., 3., 5.]).unwrap();
        assert_eq!(f(&s2, &p).unwrap().pi, vec![3, 5, 4, 1, 2]);
    }
}

#[test]
fn custom_ids_are_reported() {
    let s = Sample::with_ids(vec![1., 2., 4., 3., 5.], vec![4., 3., 1., 5., 2.], vec![10, 20, 30, 40, 50]).unwrap();
    assert_eq!(tau_path(&s, &BcsPolicy::default()).unwrap().pi, vec![40, 10, 20, 50, 30]);
}

#[test]
fn strong_component_is_recovered() {
    let spec = CopulaSpec { family: Family::Gaussian, strength: Strength::SpearmanRho(0.95) };
    let m = MixtureSpec::with_independence(spec, 0.5, 200);
    let ls = sample_mixture(&m, 21).unwrap();
    let config = TktpConfig { window: 3, nsim: 300, seed: 2, ..TktpConfig::default() };
    let b = generate_reject_boundary(&config.boundary_params(200)).unwrap();
    let sel = tktp(&ls.sample, &config, &b).unwrap();
    assert!(sel.k_hat >= 60, "k_hat {}", sel.k_hat);
    let hits = sel.selected_positions.iter().filter(|&&p| ls.associated[p]).count();
    assert!(hits * 10 >= sel.selected.len() * 6, "{hits} of {}", sel.selected.len());

    // negation of a negated sample screens identically
    let neg = TktpConfig { negate: true, ..config };
    let again = tktp(&negate_y(&ls.sample), &neg, &b).unwrap();
    assert_eq!(again.selected, sel.selected);
}

#[test]
fn restricted_kendall_dominates_full_sample() {
    let n = 120;
    let labels: Vec<String> = (0..n).map(|i| i.to_string()).collect();
    let pred: Vec<Option<f64>> = (0..n).map(|i| Some(((i * 37) % 101) as f64)).collect();
    // half of the target follows the predictor two steps back
    let target: Vec<Option<f64>> =
        (0..n).map(|i| Some(if i >= 2 && i % 2 == 0 { pred[i - 2].unwrap() } else { ((i * 53) % 97) as f64 + 0.5 })).collect();
    let t = PriceTable::new(labels, vec![("p".into(), pred), ("t".into(), target)]).unwrap();
    assert_eq!(lag_align(&t, "t", "p", 2, MissingPolicy::Pairwise, 30).unwrap().len(), n - 2);
    let cfg = ScreenConfig { tktp: TktpConfig { window: 3, nsim: 300, ..TktpConfig::default() }, ..ScreenConfig::default() };
    let rep = screen_pairs(&t, "p", 2, &cfg, &tktp_core::Simulate).unwrap();
    let r = &rep.results[0];
    assert!(r.k_hat > 0);
    assert!(r.kendall.unwrap() >= r.kendall_all);
}

fn permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((1..=n).collect::<Vec<_>>()).prop_shuffle()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn stage_tau_matches_subset_tau(y in (3usize..40).prop_flat_map(permutation), seed in any::<u64>()) {
        let n = y.len();
        let s = Sample::new((1..=n).map(|v| v as f64).collect(), y.iter().map(|&v| v as f64).collect()).unwrap();
        let r = tau_path(&s, &BcsPolicy::default().with_tie_break(TieBreak::Random(seed))).unwrap();
        let c = concordance_matrix(&s).unwrap();
        for k in 2..=n {
            let idx: Vec<usize> = r.order[..k].to_vec();
            prop_assert!((subset_tau(&c, &idx).unwrap() - r.tau[k - 2]).abs() < 1e-12);
        }
        let mut seen = r.pi.clone();
        seen.sort_unstable();
        prop_assert_eq!(seen, (1..=n).collect::<Vec<_>>());
    }
}
