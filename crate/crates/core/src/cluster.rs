//! Hard k-means on the consensus embedding: `min ||B - D G||_F^2` over centres
//! `D` (`K x C`) and binary indicators `G` (`C x N`, one 1 per column).
//!
//! Seeding is greedy distance-weighted (k-means++) from a `ChaCha8Rng` seeded
//! with `seed_from_u64(seed)`: the first centre is `random_range(0..N)`. For
//! each further centre, `2 + floor(ln C)` candidates are drawn with
//! probability proportional to the squared distance to the nearest chosen
//! centre (scan the cumulative weights for the first one exceeding
//! `random::<f64>() * total`), and the candidate giving the smallest total
//! squared distance is kept, earliest on ties. When every weight is zero the
//! lowest-index sample not yet used as a centre is taken.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const DEFAULT_KMEANS_ITERS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterModel<T> {
    /// `K x C` cluster centres.
    pub centers: DMatrix<T>,
    /// `C x N` binary indicator matrix.
    pub indicator: DMatrix<u8>,
    pub labels: Vec<usize>,
    /// `||B - D G||_F^2` for the returned centres and labels.
    pub inertia: T,
    /// Inertia after seeding and after every Lloyd iteration.
    pub inertia_trace: Vec<T>,
    pub iterations: usize,
}

impl<T: Scalar> ClusterModel<T> {
    pub fn n_clusters(&self) -> usize {
        self.centers.ncols()
    }
}

#[inline]
fn sq_dist<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| {
        let d = x - y;
        acc + d * d
    })
}

/// Nearest centre of `point`; ties go to the lowest index.
fn nearest<T: Scalar>(point: &[T], centers: &DMatrix<T>) -> (usize, T) {
    let k = centers.nrows();
    let data = centers.as_slice();
    let mut best = (0, sq_dist(point, &data[..k]));
    for c in 1..centers.ncols() {
        let d = sq_dist(point, &data[c * k..(c + 1) * k]);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn assign<T: Scalar>(data: &DMatrix<T>, centers: &DMatrix<T>) -> (Vec<usize>, Vec<T>) {
    let k = data.nrows();
    data.as_slice()
        .par_chunks(k)
        .map(|p| nearest(p, centers))
        .unzip()
}

/// Labels of `data` columns under `model`'s centres (nearest centre, ties to
/// the lowest index).
pub fn assign_labels<T: Scalar>(model: &ClusterModel<T>, data: &DMatrix<T>) -> Result<Vec<usize>> {
    if data.nrows() != model.centers.nrows() {
        return Err(Error::ShapeMismatch {
            context: "assign_labels",
            expected: format!("{}-dimensional points", model.centers.nrows()),
            actual: format!("{}-dimensional points", data.nrows()),
        });
    }
    Ok(assign(data, &model.centers).0)
}

fn inertia_of<T: Scalar>(data: &DMatrix<T>, centers: &DMatrix<T>, labels: &[usize]) -> T {
    let k = data.nrows();
    let c = centers.as_slice();
    data.as_slice()
        .chunks(k)
        .zip(labels)
        .fold(T::zero(), |acc, (p, &l)| acc + sq_dist(p, &c[l * k..(l + 1) * k]))
}

/// First index whose running sum of positive weights exceeds `target`.
fn draw_weighted(weights: &[f64], target: f64) -> usize {
    let mut acc = 0.0;
    let mut pick = None;
    for (i, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        acc += w;
        pick = Some(i);
        if acc > target {
            break;
        }
    }
    pick.expect("positive total weight")
}

fn seed_centers<T: Scalar>(data: &DMatrix<T>, c: usize, rng: &mut ChaCha8Rng) -> DMatrix<T> {
    let (k, n) = data.shape();
    let points = data.as_slice();
    let mut chosen = Vec::with_capacity(c);
    chosen.push(rng.random_range(0..n));
    let mut weights: Vec<f64> = points
        .chunks(k)
        .map(|p| sq_dist(p, &points[chosen[0] * k..(chosen[0] + 1) * k]).to_f64_lossy())
        .collect();
    let trials = 2 + (c as f64).ln().floor() as usize;
    while chosen.len() < c {
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            let next = (0..n).find(|i| !chosen.contains(i)).expect("c <= n");
            chosen.push(next);
            continue;
        }
        // greedy variant: several weighted candidates, keep the one leaving
        // the smallest potential (first on ties)
        let mut best: Option<(f64, usize, Vec<f64>)> = None;
        for _ in 0..trials {
            let candidate = draw_weighted(&weights, rng.random::<f64>() * total);
            let centre = &points[candidate * k..(candidate + 1) * k];
            let next: Vec<f64> = weights
                .iter()
                .zip(points.chunks(k))
                .map(|(&w, p)| w.min(sq_dist(p, centre).to_f64_lossy()))
                .collect();
            let potential: f64 = next.iter().sum();
            if best.as_ref().is_none_or(|b| potential < b.0) {
                best = Some((potential, candidate, next));
            }
        }
        let (_, pick, next) = best.expect("at least one trial");
        chosen.push(pick);
        weights = next;
    }
    data.select_columns(chosen.iter())
}

/// Recomputes centres as cluster means. An empty cluster takes over the
/// sample farthest from its current centre as a singleton (ties to the lowest
/// sample index); `labels` and `dists` are updated accordingly.
fn update_centers<T: Scalar>(data: &DMatrix<T>, labels: &mut [usize], dists: &mut [T], c: usize) -> DMatrix<T> {
    let (k, n) = data.shape();
    loop {
        let mut counts = vec![0usize; c];
        for &l in labels.iter() {
            counts[l] += 1;
        }
        let Some(empty) = counts.iter().position(|&x| x == 0) else {
            break;
        };
        // farthest sample among clusters that can spare one
        let far = (0..n)
            .filter(|&i| counts[labels[i]] > 1)
            .fold(None, |best: Option<usize>, i| match best {
                Some(b) if dists[i] <= dists[b] => Some(b),
                _ => Some(i),
            })
            .expect("c <= n leaves a shared cluster");
        labels[far] = empty;
        dists[far] = T::zero();
    }
    let mut sums = DMatrix::<T>::zeros(k, c);
    let mut counts = vec![0usize; c];
    for (col, &l) in data.column_iter().zip(labels.iter()) {
        let mut s = sums.column_mut(l);
        s += col;
        counts[l] += 1;
    }
    for (j, &cnt) in counts.iter().enumerate() {
        let inv = T::one() / T::from_usize_lossy(cnt);
        sums.column_mut(j).scale_mut(inv);
    }
    sums
}

fn indicator_matrix(labels: &[usize], c: usize) -> DMatrix<u8> {
    let mut g = DMatrix::<u8>::zeros(c, labels.len());
    for (n, &l) in labels.iter().enumerate() {
        g[(l, n)] = 1;
    }
    g
}

/// Lloyd's k-means from distance-weighted seeding; stops when assignments no
/// longer change or after `max_iters` iterations.
pub fn kmeans_fit<T: Scalar>(data: &DMatrix<T>, c: usize, seed: u64, max_iters: usize) -> Result<ClusterModel<T>> {
    let n = data.ncols();
    if n == 0 || data.nrows() == 0 {
        return Err(Error::EmptyInput);
    }
    if c > n {
        return Err(Error::TooManyClusters { requested: c, available: n });
    }
    if c == 0 {
        return Err(Error::InvalidConfig("cluster count must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers = seed_centers(data, c, &mut rng);
    let (mut labels, mut dists) = assign(data, &centers);
    let mut inertia_trace = vec![inertia_of(data, &centers, &labels)];
    let mut iterations = 0;
    while iterations < max_iters {
        iterations += 1;
        centers = update_centers(data, &mut labels, &mut dists, c);
        let (next, next_dists) = assign(data, &centers);
        let changed = next != labels;
        labels = next;
        dists = next_dists;
        inertia_trace.push(inertia_of(data, &centers, &labels));
        if !changed {
            break;
        }
    }
    // coincident centres can leave a cluster empty under lowest-index tie
    // breaking; the repair turns a sample into a singleton without raising
    // the inertia
    let mut counts = vec![0usize; c];
    labels.iter().for_each(|&l| counts[l] += 1);
    if counts.contains(&0) {
        centers = update_centers(data, &mut labels, &mut dists, c);
        inertia_trace.push(inertia_of(data, &centers, &labels));
    }
    let inertia = inertia_of(data, &centers, &labels);
    Ok(ClusterModel {
        indicator: indicator_matrix(&labels, c),
        centers,
        labels,
        inertia,
        inertia_trace,
        iterations,
    })
}

/// Best of `restarts` k-means runs (lowest inertia, earliest on ties); run `r`
/// is seeded with `seed + r`.
pub fn kmeans_fit_restarts<T: Scalar>(
    data: &DMatrix<T>,
    c: usize,
    seed: u64,
    max_iters: usize,
    restarts: usize,
) -> Result<ClusterModel<T>> {
    let mut best = kmeans_fit(data, c, seed, max_iters)?;
    for r in 1..restarts.max(1) {
        let candidate = kmeans_fit(data, c, seed.wrapping_add(r as u64), max_iters)?;
        if candidate.inertia < best.inertia {
            best = candidate;
        }
    }
    Ok(best)
}
