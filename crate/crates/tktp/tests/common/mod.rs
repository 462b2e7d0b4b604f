#![allow(dead_code)]

use chrono::{Duration, NaiveDate};
use rand::seq::SliceRandom;
use rand::Rng;
use tktp_core::rng;
use tktp_core::screen::PriceTable;

pub const DATES: usize = 523;
pub const LAG: usize = 26;
pub const PLANTED: [&str; 3] = ["S03", "S06", "S09"];
/// `S06` is an increasing transform of `S03` on every date.
pub const TWINS: [&str; 2] = ["S03", "S06"];

/// Weekly table with an `oil` predictor and ten series `S01..S10`. Three are
/// an increasing function of oil 26 weeks earlier on 70% of the target
/// dates and noise elsewhere; the other seven are noise throughout.
pub fn synthetic_table(seed: u64) -> PriceTable {
    let mut r = rng::seeded(seed);
    let start = NaiveDate::from_ymd_opt(2005, 1, 7).unwrap();
    let labels: Vec<String> =
        (0..DATES).map(|i| (start + Duration::weeks(i as i64)).format("%Y-%m-%d").to_string()).collect();
    let mut oil = Vec::with_capacity(DATES);
    let mut level = 60.0f64;
    for _ in 0..DATES {
        level *= (r.random_range(-0.04..0.04f64)).exp();
        oil.push(level);
    }

    let planted_count = (0.7 * (DATES - LAG) as f64).round() as usize;
    let a = planted(&oil, planted_count, |o| 10.0 + 0.5 * o.powf(1.2), &mut r);
    let c = planted(&oil, planted_count, |o| 3.0 * o.ln(), &mut r);
    let b: Vec<f64> = a.iter().map(|v| 2.0 * v + 5.0).collect();

    let mut series = vec![("oil".to_string(), oil.into_iter().map(Some).collect::<Vec<_>>())];
    for i in 1..=10 {
        let name = format!("S{i:02}");
        let col: Vec<f64> = match name.as_str() {
            "S03" => a.clone(),
            "S06" => b.clone(),
            "S09" => c.clone(),
            _ => (0..DATES).map(|_| r.random_range(10.0..90.0)).collect(),
        };
        series.push((name, col.into_iter().map(Some).collect()));
    }
    PriceTable::new(labels, series).unwrap()
}

fn planted(oil: &[f64], count: usize, f: impl Fn(f64) -> f64, r: &mut impl Rng) -> Vec<f64> {
    let mut t: Vec<usize> = (LAG..DATES).collect();
    t.shuffle(r);
    let chosen: std::collections::BTreeSet<usize> = t[..count].iter().copied().collect();
    let (lo, hi) = chosen.iter().map(|&t| f(oil[t - LAG])).fold((f64::MAX, f64::MIN), |(a, b), v| (a.min(v), b.max(v)));
    (0..DATES).map(|t| if chosen.contains(&t) { f(oil[t - LAG]) } else { r.random_range(lo..hi) }).collect()
}

pub fn table_csv(t: &PriceTable) -> String {
    let mut out = String::from("date");
    for name in t.names() {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    let cols: Vec<&[Option<f64>]> = t.names().iter().map(|n| t.series(n).unwrap()).collect();
    for (i, label) in t.labels().iter().enumerate() {
        out.push_str(label);
        for c in &cols {
            out.push(',');
            if let Some(v) = c[i] {
                out.push_str(&v.to_string());
            }
        }
        out.push('\n');
    }
    out
}

pub fn sample_csv(x: &[f64], y: &[f64]) -> String {
    let mut out = String::from("x,y\n");
    for (a, b) in x.iter().zip(y) {
        out.push_str(&format!("{a},{b}\n"));
    }
    out
}
