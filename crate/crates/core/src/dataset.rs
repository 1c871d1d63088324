use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// One view of a multi-view dataset, stored features x samples (`D_v x N`).
#[derive(Debug, Clone, PartialEq)]
pub struct ViewMatrix<T> {
    pub data: DMatrix<T>,
    pub view_id: usize,
}

impl<T: Scalar> ViewMatrix<T> {
    pub fn n_features(&self) -> usize {
        self.data.nrows()
    }

    pub fn n_samples(&self) -> usize {
        self.data.ncols()
    }
}

/// `V` feature matrices over the same `N` samples, with optional ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiViewDataset<T> {
    views: Vec<ViewMatrix<T>>,
    labels: Option<Vec<i64>>,
}

impl<T: Scalar> MultiViewDataset<T> {
    /// Validates that every view is finite and has the same number of columns,
    /// and that labels (if any) cover every sample.
    pub fn new(views: Vec<DMatrix<T>>, labels: Option<Vec<i64>>) -> Result<Self> {
        let first = views.first().ok_or(Error::EmptyInput)?;
        let n = first.ncols();
        if n == 0 {
            return Err(Error::EmptyInput);
        }
        for (v, m) in views.iter().enumerate() {
            if m.ncols() != n {
                return Err(Error::DimensionMismatch {
                    context: "MultiViewDataset::new",
                    expected: format!("{n} samples in view {v} (as in view 0)"),
                    actual: format!("{} samples", m.ncols()),
                });
            }
            if m.nrows() == 0 {
                return Err(Error::DimensionMismatch {
                    context: "MultiViewDataset::new",
                    expected: format!("at least one feature in view {v}"),
                    actual: "0 features".into(),
                });
            }
            if !m.iter().all(|x| x.finite()) {
                return Err(Error::InvalidConfig(format!("view {v} contains non-finite values")));
            }
        }
        if let Some(l) = &labels {
            if l.len() != n {
                return Err(Error::DimensionMismatch {
                    context: "MultiViewDataset::new",
                    expected: format!("{n} labels"),
                    actual: format!("{} labels", l.len()),
                });
            }
        }
        let views = views
            .into_iter()
            .enumerate()
            .map(|(view_id, data)| ViewMatrix { data, view_id })
            .collect();
        Ok(Self { views, labels })
    }

    pub fn n_samples(&self) -> usize {
        self.views[0].n_samples()
    }

    pub fn n_views(&self) -> usize {
        self.views.len()
    }

    pub fn views(&self) -> &[ViewMatrix<T>] {
        &self.views
    }

    pub fn view(&self, v: usize) -> &ViewMatrix<T> {
        &self.views[v]
    }

    pub fn labels(&self) -> Option<&[i64]> {
        self.labels.as_deref()
    }

    /// Number of distinct ground-truth labels, if labels are present.
    pub fn n_classes(&self) -> Option<usize> {
        self.labels.as_ref().map(|l| {
            let mut distinct = l.clone();
            distinct.sort_unstable();
            distinct.dedup();
            distinct.len()
        })
    }
}
