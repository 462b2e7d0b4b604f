//! JSON and CSV renderings of every result type. All renderers return the
//! full document as a string ending in a newline.
//!
//! CSV schemas:
//!
//! - tau-path: `stage,id,tau` (stage 1 has an empty tau)
//! - tktp: `stage,id,tau,theta,q,exceeds,selected`
//! - boundary: `stage,q`
//! - cell summaries: `family,strength_kind,strength,n,p,replicates,mean_k_hat,se_k_hat,
//!   mean_associated_selected,se_associated_selected,mean_percent_covered,
//!   se_percent_covered,coverage_ratio,rate,se_rate,k_hat_q05,k_hat_q25,k_hat_q50,
//!   k_hat_q75,k_hat_q95,k_hat_skewness`
//! - replicate log: `family,strength_kind,strength,n,p,replicate,seed,k_hat,selected,
//!   associated_total,associated_selected,percent_covered`
//! - screen pairs: `name,lag,n,k_hat,fraction,passed,pearson,kendall,kendall_all,error`
//! - inclusion counts: `label,cluster_1,cluster_2,...`
//! - doubling: `label,n,mean_seconds,variance,ratio,exponent`

use serde_json::{json, Value};
use tktp_core::copula::Family;
use tktp_core::screen::{ClusterReport, PriceTable, ScreenReport};
use tktp_core::simstudy::{CellSummary, ReplicateRecord, StrengthKind};
use tktp_core::{RejectBoundary, TauPathResult, TktpConfig, TktpSelection};

use crate::bench::{DoublingReport, ProfileSummary};

fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

fn config_json(c: &TktpConfig) -> Value {
    json!({
        "alpha": c.alpha,
        "window": c.window,
        "nsim": c.nsim,
        "seed": c.seed,
        "tie_break": c.policy.tie_break,
        "algorithm": c.policy.algorithm,
        "selection": c.selection,
        "negate": c.negate,
    })
}

pub fn taupath_json(r: &TauPathResult) -> String {
    pretty(&json!({
        "n": r.n(),
        "pi": r.pi,
        "tau": r.tau,
        "counters": r.counters,
    }))
}

pub fn taupath_csv(r: &TauPathResult) -> String {
    let rows = r.pi.iter().enumerate().map(|(i, id)| {
        let tau = if i == 0 { String::new() } else { r.tau[i - 1].to_string() };
        vec![(i + 1).to_string(), id.to_string(), tau]
    });
    csv_string(&["stage", "id", "tau"], rows)
}

pub fn tktp_json(sel: &TktpSelection, config: &TktpConfig, boundary: &RejectBoundary) -> String {
    let curve: Vec<Value> = sel
        .mamle
        .iter()
        .map(|(j, theta)| json!({ "stage": j, "theta": theta, "q": boundary.at(j) }))
        .collect();
    pretty(&json!({
        "n": sel.taupath.n(),
        "k_hat": sel.k_hat,
        "fraction": sel.fraction(),
        "selected": sel.selected,
        "exceedances": sel.exceedances,
        "pi": sel.taupath.pi,
        "tau": sel.taupath.tau,
        "curve": curve,
        "clamped_stages": sel.mamle.clamped,
        "config": config_json(config),
    }))
}

pub fn tktp_csv(sel: &TktpSelection, boundary: &RejectBoundary) -> String {
    let selected: std::collections::BTreeSet<usize> = sel.selected.iter().copied().collect();
    let rows = sel.taupath.pi.iter().enumerate().map(|(i, &id)| {
        let j = i + 1;
        let tau = if j == 1 { String::new() } else { sel.taupath.tau[j - 2].to_string() };
        vec![
            j.to_string(),
            id.to_string(),
            tau,
            opt(sel.mamle.at(j)),
            opt(boundary.at(j)),
            sel.exceedances.binary_search(&j).is_ok().to_string(),
            selected.contains(&id).to_string(),
        ]
    });
    csv_string(&["stage", "id", "tau", "theta", "q", "exceeds", "selected"], rows)
}

pub fn boundary_json(b: &RejectBoundary) -> String {
    let p = &b.params;
    pretty(&json!({
        "n": p.n,
        "window": p.window,
        "alpha": p.alpha,
        "nsim": p.nsim,
        "seed": p.seed,
        "tie_rule": p.tie_rule,
        "first_stage": p.window + 1,
        "q": b.q,
    }))
}

pub fn boundary_csv(b: &RejectBoundary) -> String {
    let first = b.window() + 1;
    csv_string(&["stage", "q"], b.q.iter().enumerate().map(|(i, q)| vec![(first + i).to_string(), q.to_string()]))
}

fn family_name(f: Family) -> &'static str {
    match f {
        Family::Frank => "frank",
        Family::Gaussian => "gaussian",
        Family::Independence => "independence",
    }
}

fn kind_name(k: StrengthKind) -> &'static str {
    match k {
        StrengthKind::KendallTau => "tau",
        StrengthKind::SpearmanRho => "rho",
        StrengthKind::Native => "native",
    }
}

pub fn summaries_csv(cells: &[CellSummary]) -> String {
    let header = [
        "family",
        "strength_kind",
        "strength",
        "n",
        "p",
        "replicates",
        "mean_k_hat",
        "se_k_hat",
        "mean_associated_selected",
        "se_associated_selected",
        "mean_percent_covered",
        "se_percent_covered",
        "coverage_ratio",
        "rate",
        "se_rate",
        "k_hat_q05",
        "k_hat_q25",
        "k_hat_q50",
        "k_hat_q75",
        "k_hat_q95",
        "k_hat_skewness",
    ];
    let rows = cells.iter().map(|s| {
        let c = &s.cell;
        let mut row = vec![
            family_name(c.family).to_string(),
            kind_name(c.strength_kind).to_string(),
            c.strength.to_string(),
            c.n.to_string(),
            c.p.to_string(),
            s.replicates.to_string(),
            s.mean_k_hat.to_string(),
            s.se_k_hat.to_string(),
            s.mean_associated_selected.to_string(),
            s.se_associated_selected.to_string(),
            s.mean_percent_covered.to_string(),
            s.se_percent_covered.to_string(),
            opt(s.coverage_ratio),
            opt(s.rate),
            opt(s.se_rate),
        ];
        row.extend(s.k_hat_quantiles.iter().map(f64::to_string));
        row.push(s.k_hat_skewness.to_string());
        row
    });
    csv_string(&header, rows)
}

pub fn replicates_csv(cells: &[(CellSummary, Vec<ReplicateRecord>)]) -> String {
    let header = [
        "family",
        "strength_kind",
        "strength",
        "n",
        "p",
        "replicate",
        "seed",
        "k_hat",
        "selected",
        "associated_total",
        "associated_selected",
        "percent_covered",
    ];
    let rows = cells.iter().flat_map(|(s, recs)| {
        let c = s.cell;
        recs.iter().map(move |r| {
            vec![
                family_name(c.family).to_string(),
                kind_name(c.strength_kind).to_string(),
                c.strength.to_string(),
                c.n.to_string(),
                c.p.to_string(),
                r.replicate.to_string(),
                r.seed.to_string(),
                r.k_hat.to_string(),
                r.selected.to_string(),
                r.associated_total.to_string(),
                r.associated_selected.to_string(),
                r.percent_covered().to_string(),
            ]
        })
    });
    csv_string(&header, rows)
}

pub fn summaries_json(cells: &[CellSummary], config: &TktpConfig) -> String {
    pretty(&json!({ "config": config_json(config), "cells": cells }))
}

pub fn screen_json(report: &ScreenReport, table: &PriceTable, config: &TktpConfig) -> String {
    pretty(&screen_value(report, table, config))
}

/// Screen results with the cluster report under `"clusters"`.
pub fn screen_with_clusters_json(
    report: &ScreenReport,
    clusters: &ClusterReport,
    table: &PriceTable,
    config: &TktpConfig,
) -> String {
    let mut v = screen_value(report, table, config);
    v["clusters"] = clusters_value(clusters, table);
    pretty(&v)
}

fn screen_value(report: &ScreenReport, table: &PriceTable, config: &TktpConfig) -> Value {
    let labels = table.labels();
    let pairs: Vec<Value> = report
        .results
        .iter()
        .map(|r| {
            let selected: Vec<&str> = r.selection.iter().map(|&t| labels[t].as_str()).collect();
            json!({
                "name": r.name,
                "lag": r.lag,
                "n": r.n,
                "k_hat": r.k_hat,
                "fraction": r.fraction,
                "passed": r.passed,
                "pearson": r.pearson,
                "kendall": r.kendall,
                "kendall_all": r.kendall_all,
                "selected": selected,
            })
        })
        .collect();
    let errors: Vec<Value> =
        report.errors.iter().map(|(name, e)| json!({ "name": name, "error": e.to_string() })).collect();
    json!({
        "predictor": report.predictor,
        "lag": report.lag,
        "config": config_json(config),
        "passed": report.passed().count(),
        "pairs": pairs,
        "errors": errors,
    })
}

pub fn screen_csv(report: &ScreenReport) -> String {
    let ok = report.results.iter().map(|r| {
        vec![
            r.name.clone(),
            r.lag.to_string(),
            r.n.to_string(),
            r.k_hat.to_string(),
            r.fraction.to_string(),
            r.passed.to_string(),
            opt(r.pearson),
            opt(r.kendall),
            r.kendall_all.to_string(),
            String::new(),
        ]
    });
    let failed = report.errors.iter().map(|(name, e)| {
        let mut row = vec![name.clone(), report.lag.to_string()];
        row.extend(std::iter::repeat(String::new()).take(7));
        row.push(e.to_string());
        row
    });
    let mut rows: Vec<Vec<String>> = ok.chain(failed).collect();
    rows.sort_by(|a, b| a[0].cmp(&b[0]));
    csv_string(&["name", "lag", "n", "k_hat", "fraction", "passed", "pearson", "kendall", "kendall_all", "error"], rows)
}

pub fn clusters_json(report: &ClusterReport, table: &PriceTable) -> String {
    pretty(&clusters_value(report, table))
}

fn clusters_value(report: &ClusterReport, table: &PriceTable) -> Value {
    let clusters: Vec<Value> = report
        .clusters
        .iter()
        .map(|c| {
            let weeks: Vec<Value> = c
                .inclusion
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(t, &k)| json!({ "label": table.labels()[t], "count": k }))
                .collect();
            json!({ "members": c.members, "size": c.members.len(), "min_jaccard": c.min_jaccard, "inclusion": weeks })
        })
        .collect();
    json!({ "threshold": report.threshold, "clusters": clusters })
}

pub fn inclusion_csv(report: &ClusterReport, table: &PriceTable) -> String {
    let mut header = vec!["label".to_string()];
    header.extend((1..=report.clusters.len()).map(|i| format!("cluster_{i}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = table.labels().iter().enumerate().map(|(t, label)| {
        let mut row = vec![label.clone()];
        row.extend(report.clusters.iter().map(|c| c.inclusion.get(t).copied().unwrap_or(0).to_string()));
        row
    });
    csv_string(&header, rows)
}

pub fn doubling_json(reports: &[DoublingReport], profiles: &[ProfileSummary]) -> String {
    pretty(&json!({
        "doubling": reports,
        "profiles": profiles,
        "cost_models": crate::bench::cost_models(profiles),
    }))
}

pub fn doubling_csv(reports: &[DoublingReport]) -> String {
    let rows = reports.iter().flat_map(|r| {
        r.sizes.iter().enumerate().map(move |(i, n)| {
            let (ratio, b) = if i == 0 {
                (String::new(), String::new())
            } else {
                (r.ratios[i - 1].to_string(), r.exponents[i - 1].to_string())
            };
            vec![r.label.clone(), n.to_string(), r.mean_seconds[i].to_string(), r.variance[i].to_string(), ratio, b]
        })
    });
    csv_string(&["label", "n", "mean_seconds", "variance", "ratio", "exponent"], rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tktp_core::taupath::{fastbcs2, BcsPolicy};
    use tktp_core::Sample;

    #[test]
    fn taupath_documents() {
        let s = Sample::new(vec![1.0, 2.0, 4.0, 3.0, 5.0], vec![4.0, 3.0, 1.0, 5.0, 2.0]).unwrap();
        let r = fastbcs2(&s, &BcsPolicy::default()).unwrap();
        let csv = taupath_csv(&r);
        assert!(csv.starts_with("stage,id,tau\n1,4,\n2,1,1\n"), "{csv}");
        assert_eq!(csv.lines().count(), 6);
        let v: Value = serde_json::from_str(&taupath_json(&r)).unwrap();
        assert_eq!(v["pi"], json!([4, 1, 2, 5, 3]));
    }
}
