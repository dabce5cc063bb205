//! Experiment harness behind the `ccc` binary.
//!
//! An experiment is a TOML file listing instances (planted-model parameters
//! or graph files) plus rounding settings. [`run_experiment`] solves every
//! instance, runs the requested rounding algorithms and renders one CSV row
//! per (instance, seed).

use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::Deserialize;
use thiserror::Error;

use ccc_core::exact::optimal_cost;
use ccc_core::generate::{generate, PlantedModel};
use ccc_core::io::parse_graph;
use ccc_core::relax::{solve_cluster, solve_standard};
use ccc_core::rng::RngStream;
use ccc_core::rounding::{
    estimate_cluster_cost, estimate_cost_of, estimate_expected_cost, round_pivot_based,
    CostEstimate, RoundingFunctions,
};
use ccc_core::{CccError, EdgeColoring, ALPHA_18_11};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Input { path: PathBuf, source: CccError },
    #[error("config {}: {msg}", path.display())]
    Config { path: PathBuf, msg: String },
    #[error(transparent)]
    Core(#[from] CccError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_graph(path: &Path) -> Result<EdgeColoring, CliError> {
    parse_graph(&read_file(path)?).map_err(|source| CliError::Input {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    /// Cluster-based rounding of the cluster LP.
    Cluster,
    /// Pivot rounding of the standard LP with greedy rounding functions.
    Pivot,
    /// Cluster-based with probability alpha/2, pivot otherwise.
    Mixed,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Cluster => "cluster",
            Algorithm::Pivot => "pivot",
            Algorithm::Mixed => "mixed",
        }
    }
}

/// One `[[instances]]` table: either `file = "graph.txt"` or planted-model
/// parameters. `count = k` expands a planted entry into `k` instances with
/// generator seeds `seed, seed + 1, ...`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub name: Option<String>,
    pub file: Option<PathBuf>,
    pub n: Option<usize>,
    pub colors: Option<usize>,
    pub clusters: Option<usize>,
    pub sizes: Option<Vec<usize>>,
    #[serde(default)]
    pub noise_in: f64,
    #[serde(default)]
    pub noise_out: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub count: usize,
}

fn one() -> usize {
    1
}

fn default_alpha() -> f64 {
    ALPHA_18_11
}

fn default_trials() -> usize {
    1000
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

fn default_true() -> bool {
    true
}

fn default_algorithms() -> Vec<Algorithm> {
    vec![Algorithm::Cluster, Algorithm::Pivot, Algorithm::Mixed]
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Rounding seeds; every instance gets one row per seed.
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    /// Whether to compute the optimum with the exact solver.
    #[serde(default = "default_true")]
    pub oracle: bool,
    #[serde(default = "default_algorithms")]
    pub algorithms: Vec<Algorithm>,
    /// CSV destination, relative to the config file.
    pub output: Option<PathBuf>,
    pub instances: Vec<InstanceSpec>,
}

impl ExperimentConfig {
    /// Parses and validates a config; relative paths are resolved against the
    /// directory of `path`.
    pub fn from_toml(text: &str, path: &Path) -> Result<Self, CliError> {
        let err = |msg: String| CliError::Config {
            path: path.to_path_buf(),
            msg,
        };
        let mut cfg: Self = toml::from_str(text).map_err(|e| err(e.to_string()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        if !(1.5..=2.0).contains(&cfg.alpha) {
            return Err(err(format!("alpha = {} outside [1.5, 2]", cfg.alpha)));
        }
        if cfg.trials == 0 {
            return Err(err("trials must be positive".into()));
        }
        if cfg.seeds.is_empty() {
            return Err(err("seeds must not be empty".into()));
        }
        if cfg.instances.is_empty() {
            return Err(err("no instances".into()));
        }
        for (i, inst) in cfg.instances.iter_mut().enumerate() {
            match (&inst.file, inst.n.is_some() || inst.sizes.is_some()) {
                (Some(_), true) => {
                    return Err(err(format!(
                        "instance {i}: give either file or generator parameters"
                    )))
                }
                (None, false) => return Err(err(format!("instance {i}: needs file, n or sizes"))),
                (Some(f), false) => {
                    let f = base.join(f);
                    if !f.is_file() {
                        return Err(err(format!("instance {i}: file {} not found", f.display())));
                    }
                    inst.file = Some(f);
                }
                (None, true) => {
                    model_for(inst, inst.seed).map_err(|e| err(format!("instance {i}: {e}")))?;
                }
            }
            if inst.count == 0 {
                return Err(err(format!("instance {i}: count must be positive")));
            }
        }
        cfg.output = cfg.output.map(|o| base.join(o));
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        Self::from_toml(&read_file(path)?, path)
    }
}

pub fn model_for(spec: &InstanceSpec, seed: u64) -> Result<PlantedModel, CccError> {
    let colors = spec.colors.unwrap_or(2);
    let model = match (&spec.sizes, spec.n) {
        (Some(sizes), n) => {
            let model = PlantedModel {
                num_colors: colors,
                cluster_sizes: sizes.clone(),
                noise_in: spec.noise_in,
                noise_out: spec.noise_out,
                seed,
            };
            if n.is_some_and(|n| n != model.n()) {
                return Err(CccError::InvalidParameter {
                    name: "n",
                    value: n.unwrap_or(0) as f64,
                    reason: "must equal the sum of sizes",
                });
            }
            model
        }
        (None, Some(n)) => PlantedModel::balanced(
            n,
            colors,
            spec.clusters.unwrap_or(1),
            spec.noise_in,
            spec.noise_out,
            seed,
        )?,
        (None, None) => {
            return Err(CccError::InvalidParameter {
                name: "n",
                value: 0.0,
                reason: "planted instances need n or sizes",
            })
        }
    };
    model.validate()?;
    Ok(model)
}

struct Job {
    name: String,
    gen_seed: Option<u64>,
    graph: Result<EdgeColoring, String>,
}

fn expand(cfg: &ExperimentConfig) -> Vec<Job> {
    let mut jobs = Vec::new();
    for (i, spec) in cfg.instances.iter().enumerate() {
        if let Some(f) = &spec.file {
            jobs.push(Job {
                name: spec.name.clone().unwrap_or_else(|| f.display().to_string()),
                gen_seed: None,
                graph: load_graph(f).map_err(|e| e.to_string()),
            });
            continue;
        }
        let base = spec.name.clone().unwrap_or_else(|| format!("planted{i}"));
        for k in 0..spec.count as u64 {
            let seed = spec.seed.wrapping_add(k);
            jobs.push(Job {
                name: if spec.count > 1 {
                    format!("{base}-{k}")
                } else {
                    base.clone()
                },
                gen_seed: Some(seed),
                graph: model_for(spec, seed)
                    .and_then(|m| generate(&m))
                    .map_err(|e| e.to_string()),
            });
        }
    }
    jobs
}

#[derive(Default)]
struct Timings {
    oracle: f64,
    lp: f64,
    round: f64,
}

struct InstanceResult {
    n: Option<usize>,
    colors: Option<usize>,
    opt: Option<usize>,
    standard: Option<f64>,
    strong: Option<f64>,
    cluster: Option<f64>,
    /// Per seed, per algorithm.
    estimates: Vec<Vec<Option<CostEstimate>>>,
    timings: Timings,
    errors: Vec<String>,
}

fn millis(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

fn run_instance(cfg: &ExperimentConfig, job: &Job) -> InstanceResult {
    let mut res = InstanceResult {
        n: None,
        colors: None,
        opt: None,
        standard: None,
        strong: None,
        cluster: None,
        estimates: vec![vec![None; cfg.algorithms.len()]; cfg.seeds.len()],
        timings: Timings::default(),
        errors: Vec::new(),
    };
    let phi = match &job.graph {
        Ok(phi) => phi,
        Err(e) => {
            res.errors.push(e.clone());
            return res;
        }
    };
    res.n = Some(phi.n());
    res.colors = Some(phi.num_colors());
    let mut errors = Vec::new();
    let mut note = |what: &str, e: CccError| errors.push(format!("{what}: {e}"));

    if cfg.oracle {
        let t = Instant::now();
        match optimal_cost(phi) {
            Ok((opt, _)) => res.opt = Some(opt),
            Err(e) => note("oracle", e),
        }
        res.timings.oracle = millis(t);
    }
    let t = Instant::now();
    let standard = solve_standard(phi, false)
        .map_err(|e| note("standard", e))
        .ok();
    let strong = solve_standard(phi, true)
        .map_err(|e| note("strong", e))
        .ok();
    let cluster = solve_cluster(phi).map_err(|e| note("cluster", e)).ok();
    res.timings.lp = millis(t);
    res.standard = standard.as_ref().map(|s| s.0);
    res.strong = strong.as_ref().map(|s| s.0);
    res.cluster = cluster.as_ref().map(|s| s.0);

    let f = RoundingFunctions::greedy();
    let t = Instant::now();
    for (si, &seed) in cfg.seeds.iter().enumerate() {
        for (ai, alg) in cfg.algorithms.iter().enumerate() {
            let est = match (alg, &cluster, &standard) {
                (Algorithm::Cluster, Some((_, dist)), _) => {
                    estimate_cluster_cost(phi, dist, cfg.trials, seed)
                }
                (Algorithm::Mixed, Some((_, dist)), _) => {
                    estimate_expected_cost(phi, dist, cfg.alpha, &f, cfg.trials, seed)
                }
                (Algorithm::Pivot, _, Some((_, sol))) => {
                    estimate_cost_of(phi, cfg.trials, seed, |rng: &mut RngStream| {
                        round_pivot_based(phi, sol, &f, rng).expect("solver output is feasible")
                    })
                }
                _ => continue,
            };
            match est {
                Ok(e) => res.estimates[si][ai] = Some(e),
                Err(e) => note(alg.name(), e),
            }
        }
    }
    res.timings.round = millis(t);
    res.errors = errors;
    res
}

fn opt_field<T: Display>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Parses a real given either as a decimal or as a fraction `p/q`.
pub fn parse_real(text: &str) -> Result<f64, String> {
    let value = match text.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.trim().parse().map_err(|e| format!("{p}: {e}"))?;
            let q: f64 = q.trim().parse().map_err(|e| format!("{q}: {e}"))?;
            p / q
        }
        None => text.trim().parse().map_err(|e| format!("{text}: {e}"))?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(format!("{text} is not a finite number"))
    }
}

/// `num / den`, with `0/0` when both vanish and `inf` when only `den` does.
pub fn ratio(num: f64, den: f64) -> String {
    const EPS: f64 = 1e-9;
    if den.abs() <= EPS {
        if num.abs() <= EPS {
            "0/0".into()
        } else {
            "inf".into()
        }
    } else {
        (num / den).to_string()
    }
}

/// Runs every instance (concurrently) and renders the CSV report, rows in
/// config order. Unless `reproducible`, the report starts with a `#` line
/// carrying a timestamp and includes wall-time columns.
pub fn run_experiment(cfg: &ExperimentConfig, reproducible: bool) -> Result<String, CliError> {
    let jobs = expand(cfg);
    let results: Vec<InstanceResult> = jobs.par_iter().map(|j| run_instance(cfg, j)).collect();

    let mut header: Vec<String> = [
        "instance", "gen_seed", "n", "L", "seed", "trials", "alpha", "opt", "standard", "strong",
        "cluster",
    ]
    .map(String::from)
    .to_vec();
    for alg in &cfg.algorithms {
        for col in ["mean", "stderr", "ratio_opt", "ratio_lp"] {
            header.push(format!("{}_{col}", alg.name()));
        }
    }
    if !reproducible {
        header.extend(["oracle_ms", "lp_ms", "round_ms"].map(String::from));
    }
    header.push("error".into());

    let mut out = Vec::new();
    if !reproducible {
        let secs = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        out.extend_from_slice(format!("# ccc experiment, unix time {secs}\n").as_bytes());
    }
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(&header)?;
    for (job, res) in jobs.iter().zip(&results) {
        for (si, &seed) in cfg.seeds.iter().enumerate() {
            let mut row = vec![
                job.name.clone(),
                opt_field(job.gen_seed),
                opt_field(res.n),
                opt_field(res.colors),
                seed.to_string(),
                cfg.trials.to_string(),
                cfg.alpha.to_string(),
                opt_field(res.opt),
                opt_field(res.standard),
                opt_field(res.strong),
                opt_field(res.cluster),
            ];
            for (ai, alg) in cfg.algorithms.iter().enumerate() {
                let lp = match alg {
                    Algorithm::Pivot => res.standard,
                    Algorithm::Cluster | Algorithm::Mixed => res.cluster,
                };
                match res.estimates[si][ai] {
                    Some(e) => {
                        row.push(e.mean.to_string());
                        row.push(opt_field(e.stderr));
                        row.push(res.opt.map(|o| ratio(e.mean, o as f64)).unwrap_or_default());
                        row.push(lp.map(|v| ratio(e.mean, v)).unwrap_or_default());
                    }
                    None => row.extend(std::iter::repeat_n(String::new(), 4)),
                }
            }
            if !reproducible {
                let t = &res.timings;
                row.extend([t.oracle, t.lp, t.round].map(|v| format!("{v:.3}")));
            }
            row.push(res.errors.join("; "));
            w.write_record(&row)?;
        }
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("CSV fields are UTF-8"))
}
