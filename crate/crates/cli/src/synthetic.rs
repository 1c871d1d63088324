//! Seeded multi-view Gaussian blobs.
//!
//! Every cluster has a latent centre drawn from a standard normal in a
//! `max(c, 2)`-dimensional latent space. View `v` maps the latent centre
//! through its own standard-normal matrix (scaled by `1/sqrt(latent_dim)`) and
//! adds isotropic Gaussian noise of standard deviation `noise`. Samples are
//! ordered by cluster: sample `i` belongs to cluster `i * c / n`.

use mvtc::{Dataset64, Error, MultiViewDataset};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub n: usize,
    pub clusters: usize,
    pub dims: Vec<usize>,
    pub noise: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    /// `views` copies of dimension `dim`.
    pub fn uniform(n: usize, clusters: usize, views: usize, dim: usize, noise: f64, seed: u64) -> Self {
        Self {
            n,
            clusters,
            dims: vec![dim; views],
            noise,
            seed,
        }
    }
}

pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Dataset64, Error> {
    let SyntheticSpec { n, clusters: c, ref dims, noise, seed } = *spec;
    if c == 0 || c > n {
        return Err(Error::TooManyClusters { requested: c, available: n });
    }
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::InvalidConfig("every view needs at least one feature".into()));
    }
    if !noise.is_finite() || noise < 0.0 {
        return Err(Error::InvalidConfig("noise must be finite and non-negative".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut normal = move || -> f64 { StandardNormal.sample(&mut rng) };
    let latent_dim = c.max(2);
    let centres = DMatrix::from_fn(latent_dim, c, |_, _| normal());
    let labels: Vec<i64> = (0..n).map(|i| (i * c / n) as i64).collect();
    let scale = 1.0 / (latent_dim as f64).sqrt();
    let views = dims
        .iter()
        .map(|&d| {
            let map = DMatrix::from_fn(d, latent_dim, |_, _| normal() * scale);
            let projected = &map * &centres;
            let mut x = DMatrix::zeros(d, n);
            for (i, &l) in labels.iter().enumerate() {
                let mut col = x.column_mut(i);
                col.copy_from(&projected.column(l as usize));
                if noise > 0.0 {
                    col.iter_mut().for_each(|e| *e += noise * normal());
                }
            }
            x
        })
        .collect();
    MultiViewDataset::new(views, Some(labels))
}
