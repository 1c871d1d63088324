//! anchors -> anchor graphs -> solver -> k-means -> metrics, and the JSON
//! report describing the run.

use std::path::{Path, PathBuf};
use std::time::Instant;

use mvtc::anchor::{build_anchor_graphs, default_anchor_count, select_anchors};
use mvtc::cluster::{kmeans_fit_restarts, DEFAULT_KMEANS_ITERS};
use mvtc::metrics::evaluate;
use mvtc::solver::{self, Smoothing, SolverConfig};
use mvtc::tensor::max_low_freq;
use mvtc::Dataset64;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::io::load_dataset;
use crate::presets;
use crate::synthetic::{generate_synthetic, SyntheticSpec};

pub const DEFAULT_RESTARTS: usize = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    /// Anchor count `M`; `min(1000, N)` when unset.
    pub anchors: Option<usize>,
    /// Cluster count `C`; falls back to the manifest's `n_clusters`.
    pub clusters: Option<usize>,
    /// Embedding dimension `K`; `C` when unset.
    pub embed_dim: Option<usize>,
    pub lambda: f64,
    pub beta: f64,
    /// `L`; `min(16, N/2 + 1)` when unset.
    pub low_freq: Option<usize>,
    pub max_iters: usize,
    pub seed: u64,
    pub early_stop_tol: f64,
    /// Drop the consensus coupling (`beta = 0`).
    pub no_isc: bool,
    /// Replace the low-frequency projection with the identity.
    pub no_igs: bool,
    pub restarts: usize,
    pub kmeans_iters: usize,
    pub preset: Option<String>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let solver = SolverConfig::<f64>::new(2);
        Self {
            anchors: None,
            clusters: None,
            embed_dim: None,
            lambda: solver.lambda,
            beta: solver.beta,
            low_freq: None,
            max_iters: solver.max_iters,
            seed: solver.seed,
            early_stop_tol: solver.early_stop_tol,
            no_isc: false,
            no_igs: false,
            restarts: DEFAULT_RESTARTS,
            kmeans_iters: DEFAULT_KMEANS_ITERS,
            preset: None,
        }
    }
}

impl PipelineConfig {
    /// Copies `beta`, `lambda` and `L` from a named preset.
    pub fn apply_preset(&mut self, name: &str) -> Result<()> {
        let p = presets::find(name).ok_or_else(|| {
            CliError::Usage(format!("unknown preset {name:?}; known: {}", presets::names().join(", ")))
        })?;
        self.beta = p.beta;
        self.lambda = p.lambda;
        self.low_freq = Some(p.low_freq);
        self.preset = Some(p.name.to_string());
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Manifest(PathBuf),
    Synthetic(SyntheticSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub anchors: usize,
    pub clusters: usize,
    pub embed_dim: usize,
    pub lambda: f64,
    pub beta: f64,
    pub low_freq: usize,
    pub max_iters: usize,
    pub tau0: f64,
    pub tau_growth: f64,
    pub early_stop_tol: f64,
    pub smoothing: String,
    pub no_isc: bool,
    pub no_igs: bool,
    pub kmeans_restarts: usize,
    pub kmeans_iters: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub acc: f64,
    pub nmi: f64,
    pub purity: f64,
    pub f_score: f64,
    pub precision: f64,
    pub recall: f64,
    pub ari: f64,
}

impl From<mvtc::MetricsReport> for Metrics {
    fn from(m: mvtc::MetricsReport) -> Self {
        Self {
            acc: m.acc,
            nmi: m.nmi,
            purity: m.purity,
            f_score: m.f_score,
            precision: m.precision,
            recall: m.recall,
            ari: m.ari,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub mvtc_core: String,
    pub mvtc_cli: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub graph_build_s: f64,
    pub solve_s: f64,
    pub kmeans_s: f64,
    pub total_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub dataset: String,
    pub n_samples: usize,
    pub n_views: usize,
    pub feature_dims: Vec<usize>,
    pub seed: u64,
    pub config: ConfigEcho,
    pub iterations: usize,
    pub final_tau: f64,
    pub objective_trace: Vec<f64>,
    pub kmeans_inertia: f64,
    pub labels: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<Metrics>,
    pub versions: Versions,
    pub timings: Timings,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    /// The report with the `timings` block removed, for reproducibility checks.
    pub fn without_timings(&self) -> String {
        let mut value = serde_json::to_value(self).expect("report serialises");
        value.as_object_mut().expect("object").remove("timings");
        serde_json::to_string_pretty(&value).expect("report serialises")
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| CliError::io(path, e))
    }
}

/// Loads or generates the data, then runs [`run_pipeline`].
pub fn run_source(source: &DataSource, cfg: &PipelineConfig) -> Result<RunReport> {
    match source {
        DataSource::Manifest(path) => {
            let loaded = load_dataset(path)?;
            run_pipeline(&loaded.dataset, &loaded.name, loaded.n_clusters, cfg)
        }
        DataSource::Synthetic(spec) => {
            let dataset = generate_synthetic(spec)?;
            let mut cfg = cfg.clone();
            cfg.clusters.get_or_insert(spec.clusters);
            run_pipeline(&dataset, "synthetic", Some(spec.clusters), &cfg)
        }
    }
}

/// Resolves defaults against the dataset and builds the solver configuration.
pub fn resolve_config(dataset: &Dataset64, known_clusters: Option<usize>, cfg: &PipelineConfig) -> Result<(SolverConfig<f64>, usize, usize)> {
    let n = dataset.n_samples();
    let c = cfg.clusters.or(known_clusters).ok_or_else(|| {
        CliError::Usage("cluster count unknown: pass --clusters or set n_clusters in the manifest".into())
    })?;
    if c == 0 || c > n {
        return Err(mvtc::Error::TooManyClusters { requested: c, available: n }.into());
    }
    let m = cfg.anchors.unwrap_or_else(|| default_anchor_count(n));
    let k = cfg.embed_dim.unwrap_or(c);
    let mut solver = SolverConfig::<f64>::new(k);
    solver.lambda = cfg.lambda;
    solver.beta = if cfg.no_isc { 0.0 } else { cfg.beta };
    solver.low_freq = cfg.low_freq.unwrap_or_else(|| solver.low_freq.min(max_low_freq(n)));
    solver.max_iters = cfg.max_iters;
    solver.seed = cfg.seed;
    solver.early_stop_tol = cfg.early_stop_tol;
    solver.smoothing = if cfg.no_igs { Smoothing::Identity } else { Smoothing::LowFrequency };
    if cfg.restarts == 0 || cfg.kmeans_iters == 0 {
        return Err(CliError::Usage("k-means restarts and iterations must be positive".into()));
    }
    Ok((solver, m, c))
}

pub fn run_pipeline(dataset: &Dataset64, name: &str, known_clusters: Option<usize>, cfg: &PipelineConfig) -> Result<RunReport> {
    let start = Instant::now();
    let (solver_cfg, m, c) = resolve_config(dataset, known_clusters, cfg)?;
    solver_cfg.validate(dataset.n_samples(), m)?;

    let t = Instant::now();
    let anchors = select_anchors(dataset, m, cfg.seed)?;
    let graphs = build_anchor_graphs(dataset, &anchors)?;
    let graph_build_s = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let state = solver::run(&graphs, &solver_cfg)?;
    drop(graphs);
    let solve_s = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let model = kmeans_fit_restarts(&state.consensus, c, cfg.seed, cfg.kmeans_iters, cfg.restarts)?;
    let kmeans_s = t.elapsed().as_secs_f64();

    let metrics = match dataset.labels() {
        Some(truth) => Some(evaluate(&model.labels, truth)?.into()),
        None => None,
    };

    Ok(RunReport {
        dataset: name.to_string(),
        n_samples: dataset.n_samples(),
        n_views: dataset.n_views(),
        feature_dims: dataset.views().iter().map(|v| v.n_features()).collect(),
        seed: cfg.seed,
        config: ConfigEcho {
            anchors: m,
            clusters: c,
            embed_dim: solver_cfg.embed_dim,
            lambda: solver_cfg.lambda,
            beta: solver_cfg.beta,
            low_freq: solver_cfg.low_freq,
            max_iters: solver_cfg.max_iters,
            tau0: solver_cfg.tau0,
            tau_growth: solver_cfg.tau_growth,
            early_stop_tol: solver_cfg.early_stop_tol,
            smoothing: match solver_cfg.smoothing {
                Smoothing::LowFrequency => "low_frequency",
                Smoothing::Identity => "identity",
            }
            .into(),
            no_isc: cfg.no_isc,
            no_igs: cfg.no_igs,
            kmeans_restarts: cfg.restarts,
            kmeans_iters: cfg.kmeans_iters,
            preset: cfg.preset.clone(),
        },
        iterations: state.iter,
        final_tau: state.tau,
        objective_trace: state.objective_trace,
        kmeans_inertia: model.inertia,
        labels: model.labels,
        metrics,
        versions: Versions {
            mvtc_core: mvtc::VERSION.into(),
            mvtc_cli: env!("CARGO_PKG_VERSION").into(),
        },
        timings: Timings {
            graph_build_s,
            solve_s,
            kmeans_s,
            total_s: start.elapsed().as_secs_f64(),
        },
    })
}
