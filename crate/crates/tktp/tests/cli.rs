mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tktp::cache::MemoryCache;
use tktp::config::RunConfig;
use tktp::{grid, report};
use tktp_core::simstudy::run_grid;

fn tktp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tktp"))
        .args(args)
        .env_remove("TKTP_NSIM")
        .env_remove("TKTP_CONFIG")
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn taupath_worked_example() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "s.csv", &common::sample_csv(&[1., 2., 4., 3., 5.], &[4., 3., 1., 5., 2.]));
    for algo in ["fastbcs", "fastbcs2"] {
        let v = json(&tktp(&["taupath", s(&input), "--algo", algo]));
        assert_eq!(v["pi"], serde_json::json!([4, 1, 2, 5, 3]));
        assert_eq!(v["tau"][3], -0.4);
    }
    let csv = tktp(&["taupath", s(&input), "--format", "csv"]);
    assert_eq!(String::from_utf8(csv.stdout).unwrap().lines().nth(1), Some("1,4,"));
}

#[test]
fn negate_flips_taus() {
    let dir = tempfile::tempdir().unwrap();
    let x: Vec<f64> = (1..=8).map(f64::from).collect();
    let y: Vec<f64> = [8., 6., 7., 5., 3., 4., 1., 2.].to_vec();
    let input = write(dir.path(), "s.csv", &common::sample_csv(&x, &y));
    let plain = json(&tktp(&["taupath", s(&input)]));
    let neg = json(&tktp(&["taupath", s(&input), "--negate"]));
    assert!(plain["tau"][0].as_f64().unwrap() <= 1.0);
    let last = |v: &Value| v["tau"].as_array().unwrap().last().unwrap().as_f64().unwrap();
    assert!(last(&plain) < 0.0);
    assert!((last(&neg) - last(&plain)).abs() < 1e-12);
    assert_eq!(neg["tau"][0], -1.0);
}

#[test]
fn bad_inputs_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let empty = write(dir.path(), "empty.csv", "");
    assert_eq!(tktp(&["taupath", s(&empty)]).status.code(), Some(1));
    let bad = write(dir.path(), "bad.csv", "x,y\n1,2\n3,oops\n");
    let out = tktp(&["taupath", s(&bad), "--json"]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["code"], 2);
    assert!(err["message"].as_str().unwrap().contains("row 3"), "{err}");
    assert_eq!(tktp(&["taupath", "/nonexistent/x.csv"]).status.code(), Some(2));
    assert_eq!(tktp(&["boundary", "50", "--alpha", "2"]).status.code(), Some(1));
    assert_eq!(tktp(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(tktp(&["--help"]).status.code(), Some(0));
}

#[test]
fn tktp_concordant_and_independent() {
    let dir = tempfile::tempdir().unwrap();
    let x: Vec<f64> = (1..=60).map(f64::from).collect();
    let conc = write(dir.path(), "c.csv", &common::sample_csv(&x, &x.iter().map(|v| v * v).collect::<Vec<_>>()));
    let v = json(&tktp(&["tktp", s(&conc), "--nsim", "200", "--seed", "1"]));
    assert_eq!(v["k_hat"], 60);

    let mut r = tktp_core::rng::seeded(5);
    let y: Vec<f64> = (0..60).map(|_| rand::Rng::random::<f64>(&mut r)).collect();
    let x2: Vec<f64> = (0..60).map(|_| rand::Rng::random::<f64>(&mut r)).collect();
    let ind = write(dir.path(), "i.csv", &common::sample_csv(&x2, &y));
    let v = json(&tktp(&["tktp", s(&ind), "--nsim", "200", "--seed", "1"]));
    assert!(v["k_hat"].as_u64().unwrap() < 20, "{}", v["k_hat"]);
}

#[test]
fn boundary_cache_hit_and_poisoned_version() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let args = ["boundary", "40", "--nsim", "100", "--seed", "3", "--cache-dir", s(&cache)];
    let first = tktp(&args);
    assert!(String::from_utf8_lossy(&first.stderr).contains("generated"));
    let second = tktp(&args);
    assert!(String::from_utf8_lossy(&second.stderr).contains("cache hit"));
    assert_eq!(first.stdout, second.stdout);

    let file = std::fs::read_dir(&cache).unwrap().next().unwrap().unwrap().path();
    let mut bytes = std::fs::read(&file).unwrap();
    // first byte of the code version string
    bytes[14] ^= 0x20;
    std::fs::write(&file, &bytes).unwrap();
    let third = tktp(&args);
    assert!(String::from_utf8_lossy(&third.stderr).contains("generated"));
    assert_eq!(first.stdout, third.stdout);
}

#[test]
fn simulate_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let text = "family = frank\nstrength = tau\nsizes = 40\nstrengths = 0.5\nproportions = 0.5\n\
                replicates = 4\nseed = 9\nnsim = 100\nwindow = 3\n";
    let path = write(dir.path(), "g.conf", text);
    let log = dir.path().join("log.csv");
    let out = tktp(&["simulate", s(&path), "--log", s(&log), "--threads", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let g = grid::parse_grid(text, &path, &RunConfig::default()).unwrap();
    let results = run_grid(&g, &MemoryCache::default()).unwrap();
    let cells: Vec<_> = results.iter().map(|(c, _)| c.clone()).collect();
    assert_eq!(String::from_utf8(out.stdout).unwrap(), report::summaries_json(&cells, &g.config));
    assert_eq!(std::fs::read_to_string(&log).unwrap(), report::replicates_csv(&results));
    assert_eq!(std::fs::read_to_string(&log).unwrap().lines().count(), 5);
}

#[test]
fn screen_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let table = write(dir.path(), "t.csv", &common::table_csv(&common::synthetic_table(10)));
    let inc = dir.path().join("inc.csv");
    let args = ["screen", s(&table), "--predictor", "oil", "--lag", "26", "--nsim", "300", "--seed", "10"];
    let mut with_inc = args.to_vec();
    with_inc.extend(["--inclusion", s(&inc)]);
    let v = json(&tktp(&with_inc));
    let passed: Vec<&str> = v["pairs"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["passed"] == true)
        .map(|r| r["name"].as_str().unwrap())
        .collect();
    assert_eq!(passed, common::PLANTED);
    assert_eq!(std::fs::read_to_string(&inc).unwrap().lines().count(), common::DATES + 1);

    let mut bad = args.to_vec();
    bad[3] = "gold";
    assert_eq!(tktp(&bad).status.code(), Some(1));
    let mut long = args.to_vec();
    long[5] = "600";
    assert_eq!(tktp(&long).status.code(), Some(2));
}

#[test]
fn bench_small() {
    let v = json(&tktp(&["bench", "--n-lo", "50", "--n-hi", "200", "--iterations", "1", "--profile-runs", "2"]));
    let text = v.to_string();
    assert!(text.contains("fastbcs2"), "{text}");
}

#[test]
fn env_and_config_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let conf = write(dir.path(), "t.conf", "nsim = 50\nwindow = 4\n");
    let run = |env_nsim: Option<&str>, flag: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_tktp"));
        c.args(["boundary", "30", "--config", s(&conf)]);
        if let Some(f) = flag {
            c.args(["--nsim", f]);
        }
        c.env_remove("TKTP_NSIM");
        if let Some(e) = env_nsim {
            c.env("TKTP_NSIM", e);
        }
        let v: Value = serde_json::from_slice(&c.output().unwrap().stdout).unwrap();
        (v["nsim"].as_u64().unwrap(), v["window"].as_u64().unwrap())
    };
    assert_eq!(run(None, None), (50, 4));
    assert_eq!(run(Some("60"), None), (60, 4));
    assert_eq!(run(Some("60"), Some("70")), (70, 4));
}
