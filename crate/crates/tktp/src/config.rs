//! Run configuration layered as flags, then `TKTP_*` environment, then
//! config file, then defaults. Config and grid files share a `key = value` text format with
//! `#` comments; list values are comma separated.

use std::path::{Path, PathBuf};

use serde::Serialize;
use tktp_core::multistage::{DEFAULT_ALPHA, DEFAULT_NSIM, DEFAULT_WINDOW};
use tktp_core::screen::{MissingPolicy, ScreenConfig, DEFAULT_JACCARD_THRESHOLD, DEFAULT_MIN_FRACTION, DEFAULT_MIN_PAIRS};
use tktp_core::taupath::{Algorithm, BcsPolicy, TieRule};
use tktp_core::{rng, SelectionRule, TktpConfig};

use crate::error::{AppError, Result};

/// `(line number, key, value)` triples in file order.
pub fn parse_key_values(text: &str, path: &Path) -> Result<Vec<(usize, String, String)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(AppError::row(path, i + 1, format!("expected key = value, found {line:?}")));
        };
        out.push((i + 1, k.trim().to_ascii_lowercase().replace('-', "_"), v.trim().to_string()));
    }
    Ok(out)
}

pub fn parse_list<T: std::str::FromStr>(value: &str) -> Option<Vec<T>> {
    value.split(',').map(|s| s.trim()).filter(|s| !s.is_empty()).map(|s| s.parse().ok()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub alpha: f64,
    pub window: usize,
    pub nsim: usize,
    pub seed: u64,
    pub threads: usize,
    pub tie_break: TieRule,
    pub algo: Algorithm,
    pub negate: bool,
    pub selection: SelectionRule,
    pub min_fraction: f64,
    pub jaccard_threshold: f64,
    pub missing: MissingPolicy,
    pub min_pairs: usize,
    pub cache_dir: Option<PathBuf>,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            alpha: DEFAULT_ALPHA,
            window: DEFAULT_WINDOW,
            nsim: DEFAULT_NSIM,
            seed: 0,
            threads: std::thread::available_parallelism().map_or(1, |n| n.get()),
            tie_break: TieRule::First,
            algo: Algorithm::FastBcs2,
            negate: false,
            selection: SelectionRule::Prefix,
            min_fraction: DEFAULT_MIN_FRACTION,
            jaccard_threshold: DEFAULT_JACCARD_THRESHOLD,
            missing: MissingPolicy::Pairwise,
            min_pairs: DEFAULT_MIN_PAIRS,
            cache_dir: None,
            format: Format::Json,
        }
    }
}

/// Keys understood by [`RunConfig::set`]; each has a `TKTP_<KEY>` variable.
pub const KEYS: [&str; 15] = [
    "alpha",
    "window",
    "nsim",
    "seed",
    "threads",
    "tie_break",
    "algo",
    "negate",
    "selection",
    "min_fraction",
    "jaccard_threshold",
    "missing",
    "min_pairs",
    "cache_dir",
    "format",
];

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String> {
    value.parse().map_err(|_| format!("invalid value {value:?} for {key}"))
}

impl RunConfig {
    /// Applies one setting given as text.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let v = value.trim();
        match key {
            "alpha" => self.alpha = num(key, v)?,
            "window" => self.window = num(key, v)?,
            "nsim" => self.nsim = num(key, v)?,
            "seed" => self.seed = num(key, v)?,
            "threads" => self.threads = num(key, v)?,
            "tie_break" => {
                self.tie_break = match v {
                    "first" => TieRule::First,
                    "random" => TieRule::Random,
                    _ => return Err(format!("tie_break must be first or random, got {v:?}")),
                }
            }
            "algo" => {
                self.algo = match v {
                    "fastbcs" => Algorithm::FastBcs,
                    "fastbcs2" => Algorithm::FastBcs2,
                    _ => return Err(format!("algo must be fastbcs or fastbcs2, got {v:?}")),
                }
            }
            "negate" => self.negate = parse_bool(v).ok_or_else(|| format!("negate must be a boolean, got {v:?}"))?,
            "selection" => {
                self.selection = match v {
                    "prefix" => SelectionRule::Prefix,
                    "algorithm1" => SelectionRule::Algorithm1,
                    _ => return Err(format!("selection must be prefix or algorithm1, got {v:?}")),
                }
            }
            "min_fraction" => self.min_fraction = num(key, v)?,
            "jaccard_threshold" => self.jaccard_threshold = num(key, v)?,
            "missing" => {
                self.missing = match v {
                    "pairwise" => MissingPolicy::Pairwise,
                    "complete" => MissingPolicy::RequireComplete,
                    _ => return Err(format!("missing must be pairwise or complete, got {v:?}")),
                }
            }
            "min_pairs" => self.min_pairs = num(key, v)?,
            "cache_dir" => self.cache_dir = if v.is_empty() { None } else { Some(PathBuf::from(v)) },
            "format" => {
                self.format = match v {
                    "json" => Format::Json,
                    "csv" => Format::Csv,
                    _ => return Err(format!("format must be csv or json, got {v:?}")),
                }
            }
            _ => return Err(format!("unknown setting {key:?}")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if self.window == 0 {
            return Err("window must be at least 1".into());
        }
        if self.nsim == 0 {
            return Err("nsim must be at least 1".into());
        }
        if self.threads == 0 {
            return Err("threads must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.min_fraction) {
            return Err(format!("min_fraction must lie in [0, 1], got {}", self.min_fraction));
        }
        if !(0.0..=1.0).contains(&self.jaccard_threshold) {
            return Err(format!("jaccard_threshold must lie in [0, 1], got {}", self.jaccard_threshold));
        }
        Ok(())
    }

    /// Builds the layered configuration. `env` maps variable names to
    /// values; `flags` are explicit command-line settings.
    pub fn layered(
        file: Option<&Path>,
        env: impl Fn(&str) -> Option<String>,
        flags: &[(&str, String)],
    ) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(path) = file {
            let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
            for (line, k, v) in parse_key_values(&text, path)? {
                cfg.set(&k, &v).map_err(|m| AppError::row(path, line, m))?;
            }
        }
        for key in KEYS {
            let var = format!("TKTP_{}", key.to_ascii_uppercase());
            if let Some(v) = env(&var) {
                cfg.set(key, &v).map_err(|m| AppError::Usage(format!("{var}: {m}")))?;
            }
        }
        for (k, v) in flags {
            cfg.set(k, v).map_err(AppError::Usage)?;
        }
        cfg.validate().map_err(AppError::Usage)?;
        Ok(cfg)
    }

    pub fn tktp_config(&self) -> TktpConfig {
        TktpConfig {
            alpha: self.alpha,
            window: self.window,
            nsim: self.nsim,
            seed: self.seed,
            policy: BcsPolicy::default()
                .with_algorithm(self.algo)
                .with_tie_break(self.tie_break.with_seed(rng::mix(self.seed, 0x7469_6573))),
            selection: self.selection,
            negate: self.negate,
        }
    }

    pub fn screen_config(&self) -> ScreenConfig {
        ScreenConfig {
            tktp: self.tktp_config(),
            min_fraction: self.min_fraction,
            missing: self.missing,
            min_pairs: self.min_pairs,
        }
    }
}

fn parse_bool(v: &str) -> Option<bool> {
    match v.to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Some(true),
        "0" | "false" | "no" | "off" => Some(false),
        _ => None,
    }
}
