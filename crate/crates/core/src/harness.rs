//! Configuration-driven batches of runs.
//!
//! An experiment is a set of sweep points (the product of the configured
//! group sizes, betas and modes) times a number of repetitions. Every run
//! gets its randomness from [`derive_seed`], a pure function of the master
//! seed and the run's indices, so results do not depend on scheduling.
//!
//! Layout of the output directory:
//!
//! ```text
//! report.json            config echo, per-point aggregates, per-run summaries
//! summary.csv            one row per sweep point
//! traces/p000_r000.csv   one trace per run
//! traces/p000_avg.csv    averaged trace per sweep point
//! ```

use std::io::Write;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{run_to_convergence, GameMode, GameParams};
use crate::error::{Error, Result};
use crate::metrics::{average_runs, MeanStd, RunSummary};
use crate::netgen::{generate, Network, NetworkSpec};

pub const PARALLELISM_ENV: &str = "NGG_PARALLELISM";

fn default_repetitions() -> usize {
    20
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub betas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group_sizes: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modes: Option<Vec<GameMode>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub network: NetworkSpec,
    pub game: GameParams,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    pub master_seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
    /// Reuse one network instance for every repetition.
    #[serde(default)]
    pub fixed_network: bool,
    /// Worker threads; `NGG_PARALLELISM` takes precedence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parallelism: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub index: usize,
    pub params: GameParams,
}

impl ExperimentConfig {
    pub fn new(network: NetworkSpec, game: GameParams, master_seed: u64) -> Self {
        ExperimentConfig {
            network,
            game,
            repetitions: default_repetitions(),
            master_seed,
            output_dir: default_output_dir(),
            sweep: None,
            fixed_network: false,
            parallelism: None,
        }
    }

    /// Sweep points in mode-major, then group size, then beta order.
    pub fn points(&self) -> Vec<SweepPoint> {
        let sweep = self.sweep.clone().unwrap_or_default();
        let modes = sweep.modes.unwrap_or_else(|| vec![self.game.mode]);
        let sizes = sweep.group_sizes.unwrap_or_else(|| vec![self.game.n]);
        let betas = sweep.betas.unwrap_or_else(|| vec![self.game.beta]);
        let mut points = Vec::new();
        for &mode in &modes {
            for &n in &sizes {
                for &beta in &betas {
                    let params = GameParams {
                        n,
                        beta,
                        mode,
                        ..self.game.clone()
                    };
                    points.push(SweepPoint {
                        index: points.len(),
                        params,
                    });
                }
            }
        }
        points
    }

    pub fn validate(&self) -> Result<()> {
        self.network.validate()?;
        if self.repetitions < 1 {
            return Err(Error::invalid("repetitions", "must be at least 1"));
        }
        if self.parallelism == Some(0) {
            return Err(Error::invalid("parallelism", "must be at least 1"));
        }
        if let Some(sweep) = &self.sweep {
            let empty = |field, len: Option<usize>| match len {
                Some(0) => Err(Error::invalid(field, "sweep list must not be empty")),
                _ => Ok(()),
            };
            empty("sweep.betas", sweep.betas.as_ref().map(Vec::len))?;
            empty(
                "sweep.group_sizes",
                sweep.group_sizes.as_ref().map(Vec::len),
            )?;
            empty("sweep.modes", sweep.modes.as_ref().map(Vec::len))?;
        }
        let m = self.network.node_count();
        self.game.validate_for(m)?;
        for p in self.points() {
            p.params.validate_for(m)?;
        }
        Ok(())
    }
}

/// Reads and validates a JSON experiment config. Unknown keys are rejected.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let cfg: ExperimentConfig = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_owned(),
        reason: e.to_string(),
    })?;
    cfg.validate()?;
    Ok(cfg)
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// The SplitMix64 finalizer: `z ^= z >> 30; z *= 0xBF58476D1CE4E5B9;
/// z ^= z >> 27; z *= 0x94D049BB133111EB; z ^= z >> 31` (wrapping).
/// A bijection on `u64`.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for run `run` of sweep point `point`:
///
/// ```text
/// h = mix64(master + G)
/// h = mix64(h + point + G)
/// h = mix64(h + run + G)        with G = 0x9E3779B97F4A7C15, wrapping adds
/// ```
///
/// For a fixed `(master, point)` distinct runs always get distinct seeds.
pub fn derive_seed(master: u64, point: u64, run: u64) -> u64 {
    let h = mix64(master.wrapping_add(GOLDEN_GAMMA));
    let h = mix64(h.wrapping_add(point).wrapping_add(GOLDEN_GAMMA));
    mix64(h.wrapping_add(run).wrapping_add(GOLDEN_GAMMA))
}

/// Point index reserved for network generation. Networks depend on the run
/// index only, so every sweep point of repetition `r` plays on the same graph.
pub const NETWORK_STREAM: u64 = u64::MAX;

pub fn network_seed(cfg: &ExperimentConfig, run: usize) -> u64 {
    let r = if cfg.fixed_network { 0 } else { run as u64 };
    derive_seed(cfg.master_seed, NETWORK_STREAM, r)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunArtifact {
    pub run_id: String,
    pub point_index: usize,
    pub run_index: usize,
    pub derived_seed: u64,
    pub network_seed: u64,
    /// Relative to the output directory.
    pub trace_path: PathBuf,
    pub summary: RunSummary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointReport {
    pub point_index: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub beta: f64,
    pub mode: GameMode,
    pub runs: usize,
    pub converged_runs: usize,
    pub convergence_rate: f64,
    /// Runs stopped by the cap; excluded from the `n_iter_cvg` statistics.
    pub non_converged: usize,
    pub iteration_cap: u64,
    pub n_total_max: MeanStd,
    pub n_diff_max: MeanStd,
    pub n_iter_cvg: MeanStd,
    pub trace_avg_path: PathBuf,
}

impl PointReport {
    pub fn summary_line(&self) -> String {
        format!(
            "N={} beta={} mode={} iter_cvg={:.1}±{:.1} total_max={:.1} diff_max={:.1}",
            self.n,
            self.beta,
            self.mode,
            self.n_iter_cvg.mean,
            self.n_iter_cvg.std,
            self.n_total_max.mean,
            self.n_diff_max.mean,
        )
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub generated_at_unix: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub tool_version: String,
    pub master_seed: u64,
    pub config: ExperimentConfig,
    pub points: Vec<PointReport>,
    pub runs: Vec<RunArtifact>,
    pub metadata: ReportMetadata,
}

impl Report {
    pub fn any_non_converged(&self) -> bool {
        self.points.iter().any(|p| p.non_converged > 0)
    }
}

/// Worker count: `NGG_PARALLELISM`, then the config, then all cores.
pub fn parallelism(cfg: &ExperimentConfig) -> usize {
    std::env::var(PARALLELISM_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .or(cfg.parallelism)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Runs every repetition of every sweep point and writes all artifacts under
/// `cfg.output_dir`. Runs that hit the iteration cap are reported, not fatal.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let out = &cfg.output_dir;
    let traces_dir = out.join("traces");
    std::fs::create_dir_all(&traces_dir).map_err(|e| Error::io(&traces_dir, e))?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism(cfg))
        .build()
        .expect("thread pool");

    let distinct_networks = if cfg.fixed_network {
        1
    } else {
        cfg.repetitions
    };
    let networks: Vec<Network> = pool.install(|| {
        (0..distinct_networks)
            .into_par_iter()
            .map(|r| {
                let mut rng = ChaCha8Rng::seed_from_u64(network_seed(cfg, r));
                generate(&cfg.network, &mut rng)
            })
            .collect::<Result<_>>()
    })?;
    let m = cfg.network.node_count();

    let mut points = Vec::new();
    let mut runs = Vec::new();
    for point in cfg.points() {
        let results: Vec<(RunArtifact, crate::metrics::MetricsTrace)> = pool.install(|| {
            (0..cfg.repetitions)
                .into_par_iter()
                .map(|r| {
                    let net = &networks[if cfg.fixed_network { 0 } else { r }];
                    let seed = derive_seed(cfg.master_seed, point.index as u64, r as u64);
                    let outcome = run_to_convergence(net, &point.params, seed)?;
                    let run_id = format!("p{:03}_r{:03}", point.index, r);
                    let rel = PathBuf::from("traces").join(format!("{run_id}.csv"));
                    outcome.trace.save(&out.join(&rel))?;
                    let artifact = RunArtifact {
                        run_id,
                        point_index: point.index,
                        run_index: r,
                        derived_seed: seed,
                        network_seed: network_seed(cfg, r),
                        trace_path: rel,
                        summary: outcome.summary,
                    };
                    Ok((artifact, outcome.trace))
                })
                .collect::<Result<_>>()
        })?;
        let (artifacts, traces): (Vec<_>, Vec<_>) = results.into_iter().unzip();
        let summaries: Vec<RunSummary> = artifacts.iter().map(|a| a.summary.clone()).collect();
        let avg = average_runs(&traces, &summaries, m);
        let avg_rel = PathBuf::from("traces").join(format!("p{:03}_avg.csv", point.index));
        avg.save(&out.join(&avg_rel))?;

        let s = avg.summary;
        points.push(PointReport {
            point_index: point.index,
            n: point.params.n,
            beta: point.params.beta,
            mode: point.params.mode,
            runs: s.runs,
            converged_runs: s.converged_runs,
            convergence_rate: s.converged_runs as f64 / s.runs as f64,
            non_converged: s.runs - s.converged_runs,
            iteration_cap: point.params.max_iterations,
            n_total_max: s.n_total_max,
            n_diff_max: s.n_diff_max,
            n_iter_cvg: s.n_iter_cvg,
            trace_avg_path: avg_rel,
        });
        runs.extend(artifacts);
    }

    let report = Report {
        tool: "ngg".into(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        master_seed: cfg.master_seed,
        config: cfg.clone(),
        points,
        runs,
        metadata: ReportMetadata {
            generated_at_unix: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
        },
    };
    write_report(&report, out)?;
    Ok(report)
}

/// Header of `summary.csv`.
pub const SUMMARY_HEADER: [&str; 12] = [
    "point",
    "n",
    "beta",
    "mode",
    "runs",
    "converged_runs",
    "n_total_max_mean",
    "n_total_max_std",
    "n_diff_max_mean",
    "n_diff_max_std",
    "n_iter_cvg_mean",
    "n_iter_cvg_std",
];

/// One row of `summary.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub point: usize,
    pub n: usize,
    pub beta: f64,
    pub mode: GameMode,
    pub runs: usize,
    pub converged_runs: usize,
    pub n_total_max_mean: f64,
    pub n_total_max_std: f64,
    pub n_diff_max_mean: f64,
    pub n_diff_max_std: f64,
    pub n_iter_cvg_mean: f64,
    pub n_iter_cvg_std: f64,
}

impl From<&PointReport> for SummaryRow {
    fn from(p: &PointReport) -> Self {
        SummaryRow {
            point: p.point_index,
            n: p.n,
            beta: p.beta,
            mode: p.mode,
            runs: p.runs,
            converged_runs: p.converged_runs,
            n_total_max_mean: p.n_total_max.mean,
            n_total_max_std: p.n_total_max.std,
            n_diff_max_mean: p.n_diff_max.mean,
            n_diff_max_std: p.n_diff_max.std,
            n_iter_cvg_mean: p.n_iter_cvg.mean,
            n_iter_cvg_std: p.n_iter_cvg.std,
        }
    }
}

fn write_report(report: &Report, out: &Path) -> Result<()> {
    let path = out.join("report.json");
    let mut file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    serde_json::to_writer_pretty(&mut file, report).map_err(|e| Error::io(&path, e.into()))?;
    writeln!(file).map_err(|e| Error::io(&path, e))?;

    let path = out.join("summary.csv");
    let file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(file);
    let schema = |e: csv::Error| Error::Schema {
        path: path.clone(),
        reason: e.to_string(),
    };
    w.write_record(SUMMARY_HEADER).map_err(schema)?;
    for p in &report.points {
        w.serialize(SummaryRow::from(p)).map_err(schema)?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    Ok(())
}
