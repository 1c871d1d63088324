use thiserror::Error;

/// Errors raised by the tensor, anchor-graph, solver, clustering and metric
/// routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: String,
        actual: String,
    },

    #[error("inverse FFT left an imaginary residue of {max_imag:e} (max magnitude {max_value:e}); spectrum is not conjugate-symmetric")]
    NonRealResult { max_imag: f64, max_value: f64 },

    #[error("low-frequency parameter L = {low_freq} outside the valid range 1..={max}")]
    InvalidLowFrequencyParameter { low_freq: usize, max: usize },

    #[error("cannot select {requested} anchors from {available} samples")]
    TooManyAnchors { requested: usize, available: usize },

    #[error("view {view} is degenerate: every sampled sample/anchor distance is zero")]
    DegenerateView { view: usize },

    #[error("shape mismatch in {context}: expected {expected}, got {actual}")]
    ShapeMismatch {
        context: &'static str,
        expected: String,
        actual: String,
    },

    #[error("embedding dimension K = {k} is too small; z-score columns need K >= 2")]
    EmbedDimTooSmall { k: usize },

    #[error("projection system is singular (normal-equation residual {residual:e})")]
    SingularSystem { residual: f64 },

    #[error("cannot form {requested} clusters from {available} samples")]
    TooManyClusters { requested: usize, available: usize },

    #[error("label vectors differ in length: {pred} predicted vs {truth} true")]
    LengthMismatch { pred: usize, truth: usize },

    #[error("empty input")]
    EmptyInput,

    #[error("need at least {required} samples, got {actual}")]
    TooFewSamples { required: usize, actual: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl Error {
    /// True for failures of the numerics (as opposed to invalid inputs).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonRealResult { .. } | Error::SingularSystem { .. } | Error::DegenerateView { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
