//! Per-iteration solver timing at increasing `N`.
//!
//! A sweep runs `rounds` passes over the sizes, interleaved, and pools the
//! iteration times of each size so that a slow stretch on a shared machine
//! hits every size alike.

use std::time::Instant;

use mvtc::anchor::{build_anchor_graphs, select_anchors};
use mvtc::solver::{run_with_observer, SolverConfig, Step};
use serde::Serialize;

use crate::error::Result;
use crate::synthetic::{generate_synthetic, SyntheticSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub sizes: Vec<usize>,
    pub anchors: usize,
    pub embed_dim: usize,
    pub views: usize,
    pub dim: usize,
    pub iters: usize,
    pub rounds: usize,
    pub seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            sizes: vec![10_000, 20_000],
            anchors: 200,
            embed_dim: 10,
            views: 3,
            dim: 20,
            iters: 7,
            rounds: 3,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub n: usize,
    /// Mean graph construction time over the rounds.
    pub graph_build_s: f64,
    /// Wall-clock of every solver iteration, round by round.
    pub iteration_s: Vec<f64>,
    /// Median of `iteration_s`.
    pub median_iteration_s: f64,
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let mid = s.len() / 2;
    if s.len() % 2 == 1 {
        s[mid]
    } else {
        0.5 * (s[mid - 1] + s[mid])
    }
}

pub fn time_point(cfg: &SweepConfig, n: usize) -> Result<SweepPoint> {
    let spec = SyntheticSpec::uniform(n, cfg.embed_dim, cfg.views, cfg.dim, 0.1, cfg.seed);
    let dataset = generate_synthetic(&spec)?;
    let t = Instant::now();
    let anchors = select_anchors(&dataset, cfg.anchors, cfg.seed)?;
    let graphs = build_anchor_graphs(&dataset, &anchors)?;
    let graph_build_s = t.elapsed().as_secs_f64();

    let mut solver = SolverConfig::<f64>::new(cfg.embed_dim);
    solver.max_iters = cfg.iters;
    solver.early_stop_tol = 0.0;
    solver.seed = cfg.seed;
    let mut marks = Vec::with_capacity(cfg.iters + 1);
    run_with_observer(&graphs, &solver, |step, _| {
        if matches!(step, Step::Initialized | Step::IterationEnd) {
            marks.push(Instant::now());
        }
    })?;
    let iteration_s: Vec<f64> = marks.windows(2).map(|w| (w[1] - w[0]).as_secs_f64()).collect();
    Ok(SweepPoint {
        n,
        graph_build_s,
        median_iteration_s: median(&iteration_s),
        iteration_s,
    })
}

pub fn scale_sweep(cfg: &SweepConfig) -> Result<Vec<SweepPoint>> {
    let mut pooled: Vec<(f64, Vec<f64>)> = vec![(0.0, Vec::new()); cfg.sizes.len()];
    for _ in 0..cfg.rounds.max(1) {
        for (slot, &n) in pooled.iter_mut().zip(&cfg.sizes) {
            let point = time_point(cfg, n)?;
            slot.0 += point.graph_build_s;
            slot.1.extend(point.iteration_s);
        }
    }
    let rounds = cfg.rounds.max(1) as f64;
    Ok(cfg
        .sizes
        .iter()
        .zip(pooled)
        .map(|(&n, (graph, iteration_s))| SweepPoint {
            n,
            graph_build_s: graph / rounds,
            median_iteration_s: median(&iteration_s),
            iteration_s,
        })
        .collect())
}

/// Median-iteration ratio of consecutive sweep points.
pub fn iteration_ratios(points: &[SweepPoint]) -> Vec<f64> {
    points.windows(2).map(|w| w[1].median_iteration_s / w[0].median_iteration_s).collect()
}
