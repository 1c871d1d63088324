//! Anchor selection and RBF anchor graphs.
//!
//! Anchors are actual samples. The same sample indices are used in every view
//! so that row `m` of every view's anchor graph refers to the same landmark.
//!
//! Sampling procedure (reproducible from the seed alone):
//! 1. order sample indices ascending by the squared L2 norm of the sample's
//!    concatenated features across all views (ties by index);
//! 2. seed a `ChaCha8Rng` with `seed_from_u64(seed)`;
//! 3. run a partial Fisher-Yates shuffle over that ordered list: for
//!    `i in 0..M`, draw `j = rng.random_range(i..N)` and swap positions `i`
//!    and `j`;
//! 4. the first `M` entries are the anchor indices, in draw order.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dataset::{MultiViewDataset, ViewMatrix};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Number of anchors used when none is requested.
pub const DEFAULT_ANCHORS: usize = 1000;

/// Upper bound on the number of (sample, anchor) pairs averaged when
/// estimating the kernel width.
pub const KERNEL_WIDTH_PAIR_CAP: usize = 100_000;

/// Default anchor count for `n` samples.
pub fn default_anchor_count(n: usize) -> usize {
    DEFAULT_ANCHORS.min(n)
}

/// Anchors shared across views, with a kernel width per view.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorSet<T> {
    pub indices: Vec<usize>,
    pub anchors_per_view: Vec<DMatrix<T>>,
    pub sigma_per_view: Vec<T>,
}

impl<T: Scalar> AnchorSet<T> {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Overrides the kernel width of one view.
    pub fn set_sigma(&mut self, view: usize, sigma: T) -> Result<()> {
        if !sigma.finite() || sigma <= T::zero() {
            return Err(Error::InvalidConfig(format!("kernel width for view {view} must be positive")));
        }
        self.sigma_per_view[view] = sigma;
        Ok(())
    }
}

/// RBF similarities between `M` anchors (rows) and `N` samples (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorGraph<T> {
    pub data: DMatrix<T>,
    pub view_id: usize,
}

impl<T: Scalar> AnchorGraph<T> {
    pub fn n_anchors(&self) -> usize {
        self.data.nrows()
    }

    pub fn n_samples(&self) -> usize {
        self.data.ncols()
    }

    /// `phi * phi^T`, the `M x M` Gram matrix reused by every projection update.
    pub fn gram(&self) -> DMatrix<T> {
        &self.data * self.data.transpose()
    }
}

/// Sample indices ordered by the squared norm of their concatenated features.
pub fn norm_ordered_indices<T: Scalar>(dataset: &MultiViewDataset<T>) -> Vec<usize> {
    let n = dataset.n_samples();
    let mut norms = vec![T::zero(); n];
    for view in dataset.views() {
        for (j, col) in view.data.column_iter().enumerate() {
            norms[j] += col.norm_squared();
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| norms[a].partial_cmp(&norms[b]).expect("finite norms").then(a.cmp(&b)));
    order
}

/// Draws `m` distinct entries of `pool` with a partial Fisher-Yates shuffle.
fn sample_without_replacement(mut pool: Vec<usize>, m: usize, seed: u64) -> Vec<usize> {
    let n = pool.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..m {
        let j = rng.random_range(i..n);
        pool.swap(i, j);
    }
    pool.truncate(m);
    pool
}

/// Seed of the kernel-width sampler for view `v`.
fn width_seed(seed: u64, view: usize) -> u64 {
    seed.wrapping_add(1 + view as u64)
}

/// Picks `m` anchor samples shared by all views and estimates a kernel width
/// for each view.
pub fn select_anchors<T: Scalar>(dataset: &MultiViewDataset<T>, m: usize, seed: u64) -> Result<AnchorSet<T>> {
    let n = dataset.n_samples();
    if m > n {
        return Err(Error::TooManyAnchors { requested: m, available: n });
    }
    if m == 0 {
        return Err(Error::InvalidConfig("anchor count must be at least 1".into()));
    }
    let indices = sample_without_replacement(norm_ordered_indices(dataset), m, seed);
    let anchors_per_view: Vec<DMatrix<T>> = dataset
        .views()
        .iter()
        .map(|view| view.data.select_columns(indices.iter()))
        .collect();
    let sigma_per_view = dataset
        .views()
        .iter()
        .zip(&anchors_per_view)
        .map(|(view, anchors)| estimate_kernel_width(view, anchors, width_seed(seed, view.view_id)))
        .collect::<Result<Vec<_>>>()?;
    Ok(AnchorSet {
        indices,
        anchors_per_view,
        sigma_per_view,
    })
}

#[inline]
fn squared_distance<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| {
        let d = x - y;
        acc + d * d
    })
}

/// Mean squared sample-to-anchor distance over all pairs, or over
/// [`KERNEL_WIDTH_PAIR_CAP`] pairs drawn uniformly (with replacement) when
/// there are more.
pub fn estimate_kernel_width<T: Scalar>(view: &ViewMatrix<T>, anchors: &DMatrix<T>, seed: u64) -> Result<T> {
    let n = view.n_samples();
    let m = anchors.ncols();
    if m == 0 || n == 0 {
        return Err(Error::EmptyInput);
    }
    let d = view.n_features();
    let samples = view.data.as_slice();
    let anchor_data = anchors.as_slice();
    let dist = |s: usize, a: usize| squared_distance(&samples[s * d..(s + 1) * d], &anchor_data[a * d..(a + 1) * d]);

    let (total, count) = if n * m <= KERNEL_WIDTH_PAIR_CAP {
        let mut total = T::zero();
        for s in 0..n {
            for a in 0..m {
                total += dist(s, a);
            }
        }
        (total, n * m)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut total = T::zero();
        for _ in 0..KERNEL_WIDTH_PAIR_CAP {
            let s = rng.random_range(0..n);
            let a = rng.random_range(0..m);
            total += dist(s, a);
        }
        (total, KERNEL_WIDTH_PAIR_CAP)
    };
    let sigma = total / T::from_usize_lossy(count);
    if !sigma.finite() || sigma <= T::zero() {
        return Err(Error::DegenerateView { view: view.view_id });
    }
    Ok(sigma)
}

/// Anchor graph of one view: entry `(m, n) = exp(-||x_n - z_m||^2 / sigma)`.
pub fn build_anchor_graph<T: Scalar>(view: &ViewMatrix<T>, anchors: &AnchorSet<T>) -> Result<AnchorGraph<T>> {
    let v = view.view_id;
    let z = anchors.anchors_per_view.get(v).ok_or_else(|| Error::ShapeMismatch {
        context: "build_anchor_graph",
        expected: format!("anchors for view {v}"),
        actual: format!("{} anchor views", anchors.anchors_per_view.len()),
    })?;
    let sigma = anchors.sigma_per_view[v];
    if !sigma.finite() || sigma <= T::zero() {
        return Err(Error::InvalidConfig(format!("kernel width for view {v} must be positive")));
    }
    let d = view.n_features();
    if z.nrows() != d {
        return Err(Error::ShapeMismatch {
            context: "build_anchor_graph",
            expected: format!("{d}-dimensional anchors"),
            actual: format!("{}-dimensional anchors", z.nrows()),
        });
    }
    let m = z.ncols();
    let n = view.n_samples();
    let samples = view.data.as_slice();
    let anchor_data = z.as_slice();
    let mut data = vec![T::zero(); m * n];
    data.par_chunks_mut(m).enumerate().for_each(|(col, out)| {
        let x = &samples[col * d..(col + 1) * d];
        for (a, entry) in out.iter_mut().enumerate() {
            let dist = squared_distance(x, &anchor_data[a * d..(a + 1) * d]);
            *entry = (-dist / sigma).exp();
        }
    });
    Ok(AnchorGraph {
        data: DMatrix::from_vec(m, n, data),
        view_id: v,
    })
}

/// Anchor graphs for every view of a dataset.
pub fn build_anchor_graphs<T: Scalar>(dataset: &MultiViewDataset<T>, anchors: &AnchorSet<T>) -> Result<Vec<AnchorGraph<T>>> {
    dataset.views().iter().map(|v| build_anchor_graph(v, anchors)).collect()
}
