//! The `tktp` command line.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use tktp_core::multistage::tktp;
use tktp_core::rank::negate_y;
use tktp_core::screen::{complete_linkage_clusters, screen_pairs, PairResult};
use tktp_core::simstudy::run_grid;
use tktp_core::taupath::{tau_path, Algorithm};
use tktp_core::{BoundarySource, Error as CoreError};

use crate::bench::{doubling_ratios, doubling_sizes, profile_mean, DEFAULT_ITERATIONS};
use crate::cache::{DiskCache, MemoryCache};
use crate::config::{Format, RunConfig};
use crate::error::{AppError, ExitCode, Result};
use crate::{csvio, grid, report};

#[derive(Debug, Parser)]
#[command(name = "tktp", version, about = "Top-K tau-path screening for monotone association")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Settings file with `key = value` lines (also TKTP_CONFIG).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Significance level of the stopping rule.
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// MAMLE window; 3 is recommended around n = 100.
    #[arg(long, global = true)]
    pub window: Option<usize>,
    /// Null simulations behind the reject boundary.
    #[arg(long, global = true)]
    pub nsim: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, value_parser = ["first", "random"])]
    pub tie_break: Option<String>,
    #[arg(long, global = true, value_parser = ["fastbcs", "fastbcs2"])]
    pub algo: Option<String>,
    /// Screen for negative association.
    #[arg(long, global = true)]
    pub negate: bool,
    /// `prefix` keeps the top-K prefix, `algorithm1` the literal exceedance set.
    #[arg(long, global = true, value_parser = ["prefix", "algorithm1"])]
    pub selection: Option<String>,
    #[arg(long, global = true)]
    pub min_fraction: Option<f64>,
    #[arg(long, global = true)]
    pub jaccard_threshold: Option<f64>,
    #[arg(long, global = true, value_parser = ["pairwise", "complete"])]
    pub missing: Option<String>,
    #[arg(long, global = true)]
    pub min_pairs: Option<usize>,
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
    #[arg(long, global = true, value_parser = ["csv", "json"])]
    pub format: Option<String>,
    /// Report errors on stderr as JSON.
    #[arg(long, global = true)]
    pub json: bool,
    /// Write the main report here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tau-path of a two-column CSV sample.
    Taupath { input: PathBuf },
    /// Full screen of a two-column CSV sample.
    Tktp { input: PathBuf },
    /// Simulate (or fetch from the cache) the reject boundary for size n.
    Boundary { n: usize },
    /// Run a copula-mixture simulation grid.
    Simulate {
        grid: PathBuf,
        /// Per-replicate CSV log.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Screen every series of a price table against a lagged predictor.
    Screen {
        table: PathBuf,
        #[arg(long)]
        predictor: String,
        #[arg(long, default_value_t = 0)]
        lag: usize,
        /// Cluster report JSON (CSV output only; JSON output embeds it).
        #[arg(long)]
        clusters: Option<PathBuf>,
        /// Per-date inclusion counts of each cluster, CSV.
        #[arg(long)]
        inclusion: Option<PathBuf>,
    },
    /// Doubling-ratio timings and probe counters.
    Bench {
        #[arg(long, default_value_t = 250)]
        n_lo: usize,
        #[arg(long, default_value_t = 2000)]
        n_hi: usize,
        #[arg(long, default_value_t = DEFAULT_ITERATIONS)]
        iterations: usize,
        /// Comma-separated subset of fastbcs,fastbcs2.
        #[arg(long, default_value = "fastbcs,fastbcs2")]
        algorithms: String,
        /// Runs averaged per size for the probe counters; 0 skips profiling.
        #[arg(long, default_value_t = 100)]
        profile_runs: usize,
    },
}

impl Common {
    fn flags(&self) -> Vec<(&'static str, String)> {
        let mut f = Vec::new();
        let mut put = |k: &'static str, v: Option<String>| {
            if let Some(v) = v {
                f.push((k, v));
            }
        };
        put("alpha", self.alpha.map(|v| v.to_string()));
        put("window", self.window.map(|v| v.to_string()));
        put("nsim", self.nsim.map(|v| v.to_string()));
        put("seed", self.seed.map(|v| v.to_string()));
        put("threads", self.threads.map(|v| v.to_string()));
        put("tie_break", self.tie_break.clone());
        put("algo", self.algo.clone());
        put("negate", self.negate.then(|| "true".to_string()));
        put("selection", self.selection.clone());
        put("min_fraction", self.min_fraction.map(|v| v.to_string()));
        put("jaccard_threshold", self.jaccard_threshold.map(|v| v.to_string()));
        put("missing", self.missing.clone());
        put("min_pairs", self.min_pairs.map(|v| v.to_string()));
        put("cache_dir", self.cache_dir.as_ref().map(|p| p.display().to_string()));
        put("format", self.format.clone());
        f
    }
}

/// Runs the CLI and returns the exit code. `env` looks up environment
/// variables so tests can inject them.
pub fn run(
    args: impl IntoIterator<Item = impl Into<OsString> + Clone>,
    env: impl Fn(&str) -> Option<String>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::Ok,
                _ => ExitCode::Usage,
            };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if code == ExitCode::Ok { stdout } else { stderr };
            let _ = sink.write_all(text.as_bytes());
            return code as i32;
        }
    };
    let json_errors = cli.common.json;
    match execute(&cli, &env, stdout, stderr) {
        Ok(()) => ExitCode::Ok as i32,
        Err(e) => {
            let msg = if json_errors { format!("{}\n", e.to_json()) } else { format!("error: {e}\n") };
            let _ = stderr.write_all(msg.as_bytes());
            e.exit_code() as i32
        }
    }
}

fn execute(cli: &Cli, env: &dyn Fn(&str) -> Option<String>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let config_file = cli.common.config.clone().or_else(|| env("TKTP_CONFIG").map(PathBuf::from));
    let cfg = RunConfig::layered(config_file.as_deref(), env, &cli.common.flags())?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| AppError::Internal(format!("thread pool: {e}")))?;
    let mut notes = Vec::new();
    let body = pool.install(|| dispatch(&cli.command, &cfg, &mut notes));
    for note in notes {
        let _ = writeln!(stderr, "{note}");
    }
    let body = body?;
    match &cli.common.output {
        Some(path) => write_file(path, &body),
        None => stdout.write_all(body.as_bytes()).map_err(|e| AppError::io("<stdout>", e)),
    }
}

fn write_file(path: &Path, body: &str) -> Result<()> {
    std::fs::write(path, body).map_err(|e| AppError::io(path, e))
}

fn source(cfg: &RunConfig) -> Box<dyn BoundarySource + Sync> {
    match &cfg.cache_dir {
        Some(dir) => Box::new(DiskCache::new(dir)),
        None => Box::new(MemoryCache::default()),
    }
}

fn dispatch(cmd: &Command, cfg: &RunConfig, notes: &mut Vec<String>) -> Result<String> {
    let tc = cfg.tktp_config();
    match cmd {
        Command::Taupath { input } => {
            let s = csvio::load_sample(input)?;
            let s = if cfg.negate { negate_y(&s) } else { s };
            let mut r = tau_path(&s, &tc.policy)?;
            if cfg.negate {
                // report taus on the original orientation
                r.tau.iter_mut().for_each(|t| *t = -*t);
            }
            Ok(match cfg.format {
                Format::Json => report::taupath_json(&r),
                Format::Csv => report::taupath_csv(&r),
            })
        }
        Command::Tktp { input } => {
            let s = csvio::load_sample(input)?;
            let src = source(cfg);
            let boundary = src.boundary(&tc.boundary_params(s.len()))?;
            let sel = tktp(&s, &tc, &boundary)?;
            Ok(match cfg.format {
                Format::Json => report::tktp_json(&sel, &tc, &boundary),
                Format::Csv => report::tktp_csv(&sel, &boundary),
            })
        }
        Command::Boundary { n } => {
            let params = tc.boundary_params(*n);
            params.validate()?;
            let b = match &cfg.cache_dir {
                Some(dir) => {
                    let cache = DiskCache::new(dir);
                    let (b, hit) = cache.get_or_generate(&params)?;
                    let what = if hit { "cache hit" } else { "generated" };
                    notes.push(format!("boundary {what}: {}", cache.path_for(&params).display()));
                    b
                }
                None => tktp_core::multistage::generate_reject_boundary(&params)?,
            };
            Ok(match cfg.format {
                Format::Json => report::boundary_json(&b),
                Format::Csv => report::boundary_csv(&b),
            })
        }
        Command::Simulate { grid, log } => {
            let g = grid::load_grid(grid, cfg)?;
            let src = source(cfg);
            let results = run_grid(&g, src.as_ref())?;
            if let Some(path) = log {
                write_file(path, &report::replicates_csv(&results))?;
            }
            let cells: Vec<_> = results.iter().map(|(s, _)| s.clone()).collect();
            Ok(match cfg.format {
                Format::Json => report::summaries_json(&cells, &g.config),
                Format::Csv => report::summaries_csv(&cells),
            })
        }
        Command::Screen { table, predictor, lag, clusters, inclusion } => {
            let t = csvio::load_table(table)?;
            t.series(predictor)?;
            if *lag >= t.len() {
                return Err(CoreError::InsufficientData(format!("lag {lag} leaves no pairs in {} dates", t.len())).into());
            }
            let sc = cfg.screen_config();
            let src = source(cfg);
            let rep = screen_pairs(&t, predictor, *lag, &sc, src.as_ref())?;
            if rep.results.is_empty() {
                if let Some((name, e)) = rep.errors.first() {
                    return Err(AppError::data(table, format!("no series could be screened; {name}: {e}")));
                }
            }
            let passed: Vec<PairResult> = rep.passed().cloned().collect();
            let cl = complete_linkage_clusters(&passed, cfg.jaccard_threshold, t.len());
            if let Some(path) = inclusion {
                write_file(path, &report::inclusion_csv(&cl, &t))?;
            }
            Ok(match cfg.format {
                Format::Json => report::screen_with_clusters_json(&rep, &cl, &t, &sc.tktp),
                Format::Csv => {
                    if let Some(path) = clusters {
                        write_file(path, &report::clusters_json(&cl, &t))?;
                    }
                    report::screen_csv(&rep)
                }
            })
        }
        Command::Bench { n_lo, n_hi, iterations, algorithms, profile_runs } => {
            let mut algos = Vec::new();
            for a in algorithms.split(',').map(str::trim).filter(|a| !a.is_empty()) {
                algos.push(match a {
                    "fastbcs" => Algorithm::FastBcs,
                    "fastbcs2" => Algorithm::FastBcs2,
                    _ => return Err(AppError::Usage(format!("unknown algorithm {a:?}"))),
                });
            }
            let reports = algos
                .iter()
                .map(|&a| doubling_ratios(*n_lo, *n_hi, a, *iterations, cfg.seed))
                .collect::<Result<Vec<_>>>()?;
            let profiles = if *profile_runs == 0 {
                Vec::new()
            } else {
                doubling_sizes(*n_lo, *n_hi)?
                    .into_iter()
                    .map(|n| profile_mean(n, *profile_runs, cfg.seed, cfg.algo, cfg.tie_break))
                    .collect::<Result<Vec<_>>>()?
            };
            Ok(match cfg.format {
                Format::Json => report::doubling_json(&reports, &profiles),
                Format::Csv => report::doubling_csv(&reports),
            })
        }
    }
}
