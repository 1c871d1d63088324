//! Alternating closed-form optimisation of per-view embeddings.
//!
//! Each iteration updates, for every view, the projection `U_v` (ridge
//! regression of `B_v` on the anchor graph) and the embedding `B_v`; then the
//! low-frequency tensor `Y` (projection of the stacked embeddings onto the
//! lowest mode-3 frequencies) and finally the consensus embedding. Every
//! embedding column is kept z-scored: mean 0 and sample standard deviation 1.

use nalgebra::{Cholesky, DMatrix, Dyn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::anchor::AnchorGraph;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::{check_low_freq, tlfa_truncate, Tensor3};

/// How the auxiliary tensor `Y` is obtained from the stacked embeddings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Smoothing {
    /// Keep the `L` lowest mode-3 frequencies.
    LowFrequency,
    /// `Y = B`; disables intra-view graph smoothing.
    Identity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig<T> {
    /// Ridge weight on the projections.
    pub lambda: T,
    /// Weight of the consensus term.
    pub beta: T,
    /// Number of retained low frequencies `L`, counting DC.
    pub low_freq: usize,
    /// Embedding dimension `K`.
    pub embed_dim: usize,
    pub max_iters: usize,
    pub tau0: T,
    pub tau_growth: T,
    pub seed: u64,
    /// Relative consensus change below which iteration stops; 0 disables.
    pub early_stop_tol: T,
    pub smoothing: Smoothing,
}

impl<T: Scalar> SolverConfig<T> {
    pub const DEFAULT_MAX_ITERS: usize = 7;
    pub const DEFAULT_LOW_FREQ: usize = 16;

    /// Default configuration for a `K`-dimensional embedding.
    pub fn new(embed_dim: usize) -> Self {
        Self {
            lambda: T::one(),
            beta: T::lit(0.5),
            low_freq: Self::DEFAULT_LOW_FREQ,
            embed_dim,
            max_iters: Self::DEFAULT_MAX_ITERS,
            tau0: T::one(),
            tau_growth: T::lit(1.1),
            seed: 0,
            early_stop_tol: T::lit(1e-6),
            smoothing: Smoothing::LowFrequency,
        }
    }

    /// Checks the configuration against the problem size.
    pub fn validate(&self, n_samples: usize, n_anchors: usize) -> Result<()> {
        if self.embed_dim < 2 {
            return Err(Error::EmbedDimTooSmall { k: self.embed_dim });
        }
        if self.embed_dim > n_anchors {
            return Err(Error::InvalidConfig(format!(
                "embedding dimension {} exceeds anchor count {n_anchors}",
                self.embed_dim
            )));
        }
        if self.smoothing == Smoothing::LowFrequency {
            check_low_freq(self.low_freq, n_samples)?;
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be positive".into()));
        }
        let nonneg = |x: T| x >= T::zero() && x.finite();
        if !nonneg(self.lambda) || !nonneg(self.beta) || !nonneg(self.early_stop_tol) {
            return Err(Error::InvalidConfig("lambda, beta and early_stop_tol must be finite and >= 0".into()));
        }
        if !self.tau0.finite() || self.tau0 <= T::zero() || !self.tau_growth.finite() || self.tau_growth <= T::one() {
            return Err(Error::InvalidConfig("tau0 must be > 0 and tau_growth > 1".into()));
        }
        Ok(())
    }
}

/// Iterate of the alternating optimisation.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState<T> {
    /// `U_v`, each `K x M`.
    pub projections: Vec<DMatrix<T>>,
    /// `B_v`, each `K x N`.
    pub embeddings: Vec<DMatrix<T>>,
    /// Consensus embedding, `K x N`.
    pub consensus: DMatrix<T>,
    /// `Y`, `K x V x N`.
    pub lowfreq_tensor: Tensor3<T>,
    pub iter: usize,
    /// Carried along the `tau <- tau * growth` schedule; it does not enter any
    /// update because the low-frequency step is an exact projection.
    pub tau: T,
    pub objective_trace: Vec<T>,
}

/// Deterministic zero-mean, unit-sample-variance column of length `k`, used in
/// place of columns that have no variance to normalise.
pub fn degenerate_column_template<T: Scalar>(k: usize) -> Vec<T> {
    let alternating: Vec<T> = (0..k).map(|i| if i % 2 == 0 { T::one() } else { -T::one() }).collect();
    let mean = alternating.iter().fold(T::zero(), |a, &x| a + x) / T::from_usize_lossy(k);
    let centred: Vec<T> = alternating.iter().map(|&x| x - mean).collect();
    let ss = centred.iter().fold(T::zero(), |a, &x| a + x * x);
    let std = (ss / T::from_usize_lossy(k - 1)).sqrt();
    centred.into_iter().map(|x| x / std).collect()
}

/// Column-wise z-score: every column gets mean 0 and sample standard deviation
/// (denominator `K - 1`) equal to 1.
pub fn zscore_normalize_columns<T: Scalar>(m: &DMatrix<T>) -> Result<DMatrix<T>> {
    let k = m.nrows();
    if k < 2 {
        return Err(Error::EmbedDimTooSmall { k });
    }
    let template = degenerate_column_template::<T>(k);
    let kf = T::from_usize_lossy(k);
    let km1 = T::from_usize_lossy(k - 1);
    let rel_floor = T::epsilon() * T::lit(64.0);
    let mut out = m.clone();
    for mut col in out.column_iter_mut() {
        let mean = col.iter().fold(T::zero(), |a, &x| a + x) / kf;
        let max_abs = col.iter().fold(T::zero(), |a, &x| a.max(x.magnitude()));
        col.iter_mut().for_each(|x| *x -= mean);
        let std = (col.iter().fold(T::zero(), |a, &x| a + x * x) / km1).sqrt();
        if std <= rel_floor * max_abs {
            col.iter_mut().zip(&template).for_each(|(x, &t)| *x = t);
        } else {
            col.iter_mut().for_each(|x| *x /= std);
        }
    }
    Ok(out)
}

fn same_shape<T: Scalar>(context: &'static str, expected: (usize, usize), m: &DMatrix<T>) -> Result<()> {
    if m.shape() != expected {
        return Err(Error::ShapeMismatch {
            context,
            expected: format!("{}x{}", expected.0, expected.1),
            actual: format!("{}x{}", m.nrows(), m.ncols()),
        });
    }
    Ok(())
}

/// Stacks `V` embeddings (`K x N`) into a `K x V x N` tensor with
/// `out(k, v, n) = B_v(k, n)`.
pub fn stack_rotate<T: Scalar>(embeddings: &[DMatrix<T>]) -> Result<Tensor3<T>> {
    let first = embeddings.first().ok_or(Error::EmptyInput)?;
    let (k, n) = first.shape();
    let v = embeddings.len();
    for b in embeddings {
        same_shape("stack_rotate", (k, n), b)?;
    }
    let mut data = Vec::with_capacity(k * v * n);
    for col in 0..n {
        for b in embeddings {
            data.extend_from_slice(b.column(col).as_slice());
        }
    }
    Tensor3::from_vec((k, v, n), data)
}

/// Lateral slice `v` of a `K x V x N` tensor as a `K x N` matrix.
pub fn view_slice<T: Scalar>(t: &Tensor3<T>, v: usize) -> DMatrix<T> {
    let (k, views, n) = t.dims();
    let data = t.as_slice();
    DMatrix::from_fn(k, n, |row, col| data[row + k * (v + views * col)])
}

/// Inverse of [`stack_rotate`].
pub fn unstack_rotate<T: Scalar>(t: &Tensor3<T>) -> Vec<DMatrix<T>> {
    (0..t.dims().1).map(|v| view_slice(t, v)).collect()
}

/// Relative residual tolerance for the projection normal equations.
fn residual_tolerance<T: Scalar>() -> T {
    T::lit(1e-8).max(T::epsilon() * T::lit(1e3))
}

enum Factor<T: Scalar> {
    Cholesky(Cholesky<T, Dyn>),
    PseudoInverse(DMatrix<T>),
}

/// Factorisation of `phi phi^T + lambda I`, computed once per view and reused
/// by every projection update.
pub struct ProjectionSystem<T: Scalar> {
    system: DMatrix<T>,
    factor: Factor<T>,
}

impl<T: Scalar> ProjectionSystem<T> {
    /// Factors `gram + lambda I` with a Cholesky decomposition, falling back to
    /// a pseudo-inverse when the matrix is not numerically positive definite.
    pub fn new(gram: &DMatrix<T>, lambda: T) -> Result<Self> {
        let m = gram.nrows();
        if gram.ncols() != m {
            return Err(Error::ShapeMismatch {
                context: "ProjectionSystem::new",
                expected: "square Gram matrix".into(),
                actual: format!("{}x{}", gram.nrows(), gram.ncols()),
            });
        }
        let system = gram + DMatrix::<T>::identity(m, m) * lambda;
        let factor = match Cholesky::new(system.clone()) {
            Some(c) => Factor::Cholesky(c),
            None => {
                let svd = system.clone().svd(true, true);
                let smax = svd.singular_values.iter().fold(T::zero(), |a, &s| a.max(s));
                let cutoff = smax * T::from_usize_lossy(m) * T::epsilon();
                let pinv = svd.pseudo_inverse(cutoff).map_err(|_| Error::SingularSystem { residual: f64::INFINITY })?;
                Factor::PseudoInverse(pinv)
            }
        };
        Ok(Self { system, factor })
    }

    /// `U = (B phi^T) (phi phi^T + lambda I)^-1`, returned as `K x M`.
    pub fn solve(&self, b: &DMatrix<T>, phi: &DMatrix<T>) -> Result<DMatrix<T>> {
        if b.ncols() != phi.ncols() || phi.nrows() != self.system.nrows() {
            return Err(Error::ShapeMismatch {
                context: "update_projection",
                expected: format!("K x {} embedding and {} x {} graph", phi.ncols(), self.system.nrows(), phi.ncols()),
                actual: format!("{}x{} embedding and {}x{} graph", b.nrows(), b.ncols(), phi.nrows(), phi.ncols()),
            });
        }
        // (phi phi^T + lambda I) U^T = phi B^T
        let rhs = phi * b.transpose();
        let ut = match &self.factor {
            Factor::Cholesky(c) => c.solve(&rhs),
            Factor::PseudoInverse(p) => {
                let ut = p * &rhs;
                let residual = normal_equation_residual(&self.system, &ut, &rhs);
                if residual > residual_tolerance::<T>() {
                    return Err(Error::SingularSystem { residual: residual.to_f64_lossy() });
                }
                ut
            }
        };
        Ok(ut.transpose())
    }
}

/// `||A X - R||_F / ||R||_F`, or `||A X||_F` when `R = 0`.
fn normal_equation_residual<T: Scalar>(system: &DMatrix<T>, x: &DMatrix<T>, rhs: &DMatrix<T>) -> T {
    let r = system * x - rhs;
    let scale = rhs.norm();
    if scale > T::zero() {
        r.norm() / scale
    } else {
        r.norm()
    }
}

/// Closed-form projection update for one view.
///
/// `gram` must be `phi phi^T`; callers running many iterations should build a
/// [`ProjectionSystem`] once instead.
pub fn update_projection<T: Scalar>(b_v: &DMatrix<T>, phi_v: &AnchorGraph<T>, lambda: T, gram: &DMatrix<T>) -> Result<DMatrix<T>> {
    ProjectionSystem::new(gram, lambda)?.solve(b_v, &phi_v.data)
}

/// Closed-form embedding update:
/// `normalize((beta * consensus + Y_v + U_v phi_v) / (beta + 2))`.
pub fn update_embedding<T: Scalar>(
    u_v: &DMatrix<T>,
    phi_v: &AnchorGraph<T>,
    consensus: &DMatrix<T>,
    y_v: &DMatrix<T>,
    beta: T,
) -> Result<DMatrix<T>> {
    let phi = &phi_v.data;
    if u_v.ncols() != phi.nrows() {
        return Err(Error::ShapeMismatch {
            context: "update_embedding",
            expected: format!("K x {} projection", phi.nrows()),
            actual: format!("{}x{}", u_v.nrows(), u_v.ncols()),
        });
    }
    let shape = (u_v.nrows(), phi.ncols());
    same_shape("update_embedding", shape, consensus)?;
    same_shape("update_embedding", shape, y_v)?;
    let mut combo = u_v * phi;
    combo += y_v;
    combo += consensus * beta;
    combo /= beta + T::lit(2.0);
    zscore_normalize_columns(&combo)
}

/// Low-frequency tensor update: the stacked embeddings projected onto the
/// `low_freq` lowest mode-3 frequencies.
pub fn update_lowfreq<T: Scalar>(embeddings: &[DMatrix<T>], low_freq: usize) -> Result<Tensor3<T>> {
    tlfa_truncate(&stack_rotate(embeddings)?, low_freq)
}

/// Consensus update: the normalised mean of the view embeddings.
pub fn update_consensus<T: Scalar>(embeddings: &[DMatrix<T>]) -> Result<DMatrix<T>> {
    let first = embeddings.first().ok_or(Error::EmptyInput)?;
    let mut sum = DMatrix::<T>::zeros(first.nrows(), first.ncols());
    for b in embeddings {
        same_shape("update_consensus", first.shape(), b)?;
        sum += b;
    }
    sum /= T::from_usize_lossy(embeddings.len());
    zscore_normalize_columns(&sum)
}

/// The four terms of the reformulated objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveTerms<T> {
    /// `sum_v lambda/2 ||U_v||^2`
    pub ridge: T,
    /// `sum_v 1/2 ||B_v - U_v phi_v||^2`
    pub fit: T,
    /// `sum_v beta/2 ||consensus - B_v||^2`
    pub consensus: T,
    /// `1/2 ||B - Y||^2`
    pub coupling: T,
}

impl<T: Scalar> ObjectiveTerms<T> {
    pub fn total(&self) -> T {
        self.ridge + self.fit + self.consensus + self.coupling
    }
}

pub fn objective_terms<T: Scalar>(state: &SolverState<T>, graphs: &[AnchorGraph<T>], cfg: &SolverConfig<T>) -> Result<ObjectiveTerms<T>> {
    let half = T::lit(0.5);
    let mut terms = ObjectiveTerms {
        ridge: T::zero(),
        fit: T::zero(),
        consensus: T::zero(),
        coupling: T::zero(),
    };
    for ((u, b), g) in state.projections.iter().zip(&state.embeddings).zip(graphs) {
        terms.ridge += half * cfg.lambda * u.norm_squared();
        terms.fit += half * (b - u * &g.data).norm_squared();
        terms.consensus += half * cfg.beta * (&state.consensus - b).norm_squared();
    }
    let stacked = stack_rotate(&state.embeddings)?;
    terms.coupling = half * (&stacked - &state.lowfreq_tensor).norm_squared();
    Ok(terms)
}

/// Value of the reformulated objective at `state`. The low-frequency
/// regulariser is an indicator of the feasible subspace and contributes 0.
pub fn objective_value<T: Scalar>(state: &SolverState<T>, graphs: &[AnchorGraph<T>], cfg: &SolverConfig<T>) -> Result<T> {
    Ok(objective_terms(state, graphs, cfg)?.total())
}

/// Update steps reported to a [`run_with_observer`] callback.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Initialized,
    Projection { view: usize },
    Embedding { view: usize },
    LowFrequency,
    Consensus,
    IterationEnd,
}

fn validate_graphs<T: Scalar>(graphs: &[AnchorGraph<T>]) -> Result<(usize, usize)> {
    let first = graphs.first().ok_or(Error::EmptyInput)?;
    let (m, n) = first.data.shape();
    for g in graphs {
        if g.data.shape() != (m, n) {
            return Err(Error::DimensionMismatch {
                context: "solver::run",
                expected: format!("{m}x{n} anchor graph"),
                actual: format!("{}x{} in view {}", g.data.nrows(), g.data.ncols(), g.view_id),
            });
        }
    }
    Ok((m, n))
}

/// Seeded initial embeddings: one z-scored standard-normal `K x N` draw,
/// shared by every view so that identical views stay identical.
pub fn initial_embeddings<T: Scalar>(views: usize, k: usize, n: usize, seed: u64) -> Result<Vec<DMatrix<T>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw = DMatrix::from_fn(k, n, |_, _| {
        let x: f64 = StandardNormal.sample(&mut rng);
        T::lit(x)
    });
    Ok(vec![zscore_normalize_columns(&raw)?; views])
}

/// Runs the alternating optimisation.
pub fn run<T: Scalar>(graphs: &[AnchorGraph<T>], cfg: &SolverConfig<T>) -> Result<SolverState<T>> {
    run_with_observer(graphs, cfg, |_, _| {})
}

/// [`run`], calling `observer` after initialisation and after every update.
pub fn run_with_observer<T, F>(graphs: &[AnchorGraph<T>], cfg: &SolverConfig<T>, mut observer: F) -> Result<SolverState<T>>
where
    T: Scalar,
    F: FnMut(Step, &SolverState<T>),
{
    let (m, n) = validate_graphs(graphs)?;
    cfg.validate(n, m)?;
    let k = cfg.embed_dim;
    let v = graphs.len();

    let systems = graphs
        .iter()
        .map(|g| ProjectionSystem::new(&g.gram(), cfg.lambda))
        .collect::<Result<Vec<_>>>()?;

    let embeddings = initial_embeddings::<T>(v, k, n, cfg.seed)?;
    let consensus = update_consensus(&embeddings)?;
    let mut state = SolverState {
        projections: vec![DMatrix::zeros(k, m); v],
        embeddings,
        consensus,
        lowfreq_tensor: Tensor3::zeros(k, v, n),
        iter: 0,
        tau: cfg.tau0,
        objective_trace: Vec::with_capacity(cfg.max_iters),
    };
    observer(Step::Initialized, &state);

    for t in 1..=cfg.max_iters {
        let previous = state.consensus.clone();
        for (view, (g, system)) in graphs.iter().zip(&systems).enumerate() {
            state.projections[view] = system.solve(&state.embeddings[view], &g.data)?;
            observer(Step::Projection { view }, &state);
            let y_v = view_slice(&state.lowfreq_tensor, view);
            state.embeddings[view] = update_embedding(&state.projections[view], g, &state.consensus, &y_v, cfg.beta)?;
            observer(Step::Embedding { view }, &state);
        }
        state.lowfreq_tensor = match cfg.smoothing {
            Smoothing::LowFrequency => update_lowfreq(&state.embeddings, cfg.low_freq)?,
            Smoothing::Identity => stack_rotate(&state.embeddings)?,
        };
        observer(Step::LowFrequency, &state);
        state.consensus = update_consensus(&state.embeddings)?;
        observer(Step::Consensus, &state);
        state.tau *= cfg.tau_growth;
        state.iter = t;
        let objective = objective_value(&state, graphs, cfg)?;
        state.objective_trace.push(objective);
        observer(Step::IterationEnd, &state);

        let change = (&state.consensus - &previous).norm() / previous.norm();
        if cfg.early_stop_tol > T::zero() && change < cfg.early_stop_tol {
            break;
        }
    }
    Ok(state)
}
