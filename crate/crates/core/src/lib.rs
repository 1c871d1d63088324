//! Scalable multi-view clustering with tensor low-frequency smoothing.
//!
//! Pipeline: RBF anchor graphs per view ([`anchor`]), alternating closed-form
//! optimisation of per-view embeddings coupled through a mode-3 low-frequency
//! projection and a consensus term ([`solver`]), k-means on the consensus
//! embedding ([`cluster`]) and the usual external clustering scores
//! ([`metrics`]). The tensor algebra (mode-3 FFT, t-product, t-SVD) lives in
//! [`tensor`].
//!
//! Numerical code is generic over [`Scalar`] (`f32` and `f64`); the `*64` and
//! `*32` aliases below name the common instantiations.

pub mod anchor;
pub mod cluster;
pub mod dataset;
pub mod error;
pub mod metrics;
pub mod scalar;
pub mod solver;
pub mod tensor;

pub use anchor::{AnchorGraph, AnchorSet};
pub use cluster::ClusterModel;
pub use dataset::{MultiViewDataset, ViewMatrix};
pub use error::{Error, Result};
pub use metrics::{ContingencyTable, MetricsReport};
pub use scalar::Scalar;
pub use solver::{Smoothing, SolverConfig, SolverState};
pub use tensor::{SpectrumTensor, TSvd, Tensor3};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub type Tensor3f64 = Tensor3<f64>;
pub type Tensor3f32 = Tensor3<f32>;
pub type SpectrumTensor64 = SpectrumTensor<f64>;
pub type Dataset64 = MultiViewDataset<f64>;
pub type Dataset32 = MultiViewDataset<f32>;
pub type AnchorGraph64 = AnchorGraph<f64>;
pub type SolverConfig64 = SolverConfig<f64>;
pub type SolverState64 = SolverState<f64>;
pub type ClusterModel64 = ClusterModel<f64>;
