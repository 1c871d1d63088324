//! External clustering scores computed from the contingency table of two
//! labelings: accuracy (optimal one-to-one cluster/class matching), NMI,
//! purity, pair-counting precision/recall/F-score and the adjusted Rand index.
//!
//! Label values are arbitrary; every score is invariant under relabeling of
//! either argument.

use std::collections::HashMap;
use std::hash::Hash;

use crate::error::{Error, Result};

/// Counts of samples per (predicted cluster, true class) pair. Rows and
/// columns are numbered in order of first appearance in the inputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    pub counts: Vec<Vec<u64>>,
    pub n: u64,
    pub row_sums: Vec<u64>,
    pub col_sums: Vec<u64>,
}

fn dense_ids<L: Eq + Hash + Clone>(labels: &[L]) -> (Vec<usize>, usize) {
    let mut ids = HashMap::new();
    let dense = labels
        .iter()
        .map(|l| {
            let next = ids.len();
            *ids.entry(l.clone()).or_insert(next)
        })
        .collect();
    (dense, ids.len())
}

impl ContingencyTable {
    pub fn new<P, Q>(pred: &[P], truth: &[Q]) -> Result<Self>
    where
        P: Eq + Hash + Clone,
        Q: Eq + Hash + Clone,
    {
        if pred.len() != truth.len() {
            return Err(Error::LengthMismatch { pred: pred.len(), truth: truth.len() });
        }
        if pred.is_empty() {
            return Err(Error::EmptyInput);
        }
        let (p, rows) = dense_ids(pred);
        let (t, cols) = dense_ids(truth);
        let mut counts = vec![vec![0u64; cols]; rows];
        for (&i, &j) in p.iter().zip(&t) {
            counts[i][j] += 1;
        }
        let row_sums = counts.iter().map(|r| r.iter().sum()).collect();
        let col_sums = (0..cols).map(|j| counts.iter().map(|r| r[j]).sum()).collect();
        Ok(Self {
            counts,
            n: pred.len() as u64,
            row_sums,
            col_sums,
        })
    }

    pub fn n_pred(&self) -> usize {
        self.counts.len()
    }

    pub fn n_true(&self) -> usize {
        self.col_sums.len()
    }
}

/// Maximum-weight perfect matching on a square matrix (Hungarian method,
/// O(n^3)). Returns the total weight and, for every row, its matched column.
pub fn max_weight_assignment(weights: &[Vec<i64>]) -> (i64, Vec<usize>) {
    let n = weights.len();
    if n == 0 {
        return (0, Vec::new());
    }
    // minimisation on negated weights, 1-based potentials
    let cost = |i: usize, j: usize| -weights[i - 1][j - 1];
    let inf = i64::MAX / 4;
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost(i0, j) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0usize; n];
    for j in 1..=n {
        assignment[p[j] - 1] = j - 1;
    }
    let total = assignment.iter().enumerate().map(|(i, &j)| weights[i][j]).sum();
    (total, assignment)
}

/// Clustering accuracy: the best one-to-one mapping of clusters to classes.
pub fn accuracy<P, Q>(pred: &[P], truth: &[Q]) -> Result<f64>
where
    P: Eq + Hash + Clone,
    Q: Eq + Hash + Clone,
{
    let table = ContingencyTable::new(pred, truth)?;
    Ok(accuracy_from_table(&table))
}

pub fn accuracy_from_table(table: &ContingencyTable) -> f64 {
    let size = table.n_pred().max(table.n_true());
    let mut weights = vec![vec![0i64; size]; size];
    for (i, row) in table.counts.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            weights[i][j] = c as i64;
        }
    }
    let (matched, _) = max_weight_assignment(&weights);
    matched as f64 / table.n as f64
}

/// Normaliser of the mutual information in [`nmi_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NmiNormalization {
    /// `sqrt(H(pred) H(truth))`
    #[default]
    Geometric,
    /// `(H(pred) + H(truth)) / 2`
    Arithmetic,
    Max,
    Min,
}

fn entropy(sums: &[u64], n: f64) -> f64 {
    sums.iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Normalised mutual information with geometric-mean normalisation.
pub fn nmi<P, Q>(pred: &[P], truth: &[Q]) -> Result<f64>
where
    P: Eq + Hash + Clone,
    Q: Eq + Hash + Clone,
{
    nmi_with(pred, truth, NmiNormalization::Geometric)
}

pub fn nmi_with<P, Q>(pred: &[P], truth: &[Q], norm: NmiNormalization) -> Result<f64>
where
    P: Eq + Hash + Clone,
    Q: Eq + Hash + Clone,
{
    Ok(nmi_from_table(&ContingencyTable::new(pred, truth)?, norm))
}

pub fn nmi_from_table(table: &ContingencyTable, norm: NmiNormalization) -> f64 {
    let n = table.n as f64;
    let hp = entropy(&table.row_sums, n);
    let ht = entropy(&table.col_sums, n);
    if table.n_pred() == 1 && table.n_true() == 1 {
        return 1.0;
    }
    if table.n_pred() == 1 || table.n_true() == 1 {
        return 0.0;
    }
    let mut mi = 0.0;
    for (i, row) in table.counts.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c > 0 {
                let c = c as f64;
                mi += c / n * (n * c / (table.row_sums[i] as f64 * table.col_sums[j] as f64)).ln();
            }
        }
    }
    let denom = match norm {
        NmiNormalization::Geometric => (hp * ht).sqrt(),
        NmiNormalization::Arithmetic => 0.5 * (hp + ht),
        NmiNormalization::Max => hp.max(ht),
        NmiNormalization::Min => hp.min(ht),
    };
    (mi / denom).clamp(0.0, 1.0)
}

/// Fraction of samples belonging to the majority class of their cluster.
pub fn purity<P, Q>(pred: &[P], truth: &[Q]) -> Result<f64>
where
    P: Eq + Hash + Clone,
    Q: Eq + Hash + Clone,
{
    Ok(purity_from_table(&ContingencyTable::new(pred, truth)?))
}

pub fn purity_from_table(table: &ContingencyTable) -> f64 {
    let hits: u64 = table.counts.iter().map(|r| r.iter().copied().max().unwrap_or(0)).sum();
    hits as f64 / table.n as f64
}

#[inline]
fn pairs(c: u64) -> u64 {
    c * c.saturating_sub(1) / 2
}

#[inline]
fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Pair-counting precision, recall and F-score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairwiseScores {
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
}

/// Pair-counting precision, recall and F-score; `0 / 0` counts as 0.
pub fn pairwise_prf<P, Q>(pred: &[P], truth: &[Q]) -> Result<PairwiseScores>
where
    P: Eq + Hash + Clone,
    Q: Eq + Hash + Clone,
{
    pairwise_from_table(&ContingencyTable::new(pred, truth)?)
}

pub fn pairwise_from_table(table: &ContingencyTable) -> Result<PairwiseScores> {
    if table.n < 2 {
        return Err(Error::TooFewSamples { required: 2, actual: table.n as usize });
    }
    let tp: u64 = table.counts.iter().flatten().map(|&c| pairs(c)).sum();
    let pred_pairs: u64 = table.row_sums.iter().map(|&c| pairs(c)).sum();
    let true_pairs: u64 = table.col_sums.iter().map(|&c| pairs(c)).sum();
    let precision = ratio(tp, pred_pairs);
    let recall = ratio(tp, true_pairs);
    let f_score = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(PairwiseScores { precision, recall, f_score })
}

/// Adjusted Rand index.
pub fn ari<P, Q>(pred: &[P], truth: &[Q]) -> Result<f64>
where
    P: Eq + Hash + Clone,
    Q: Eq + Hash + Clone,
{
    ari_from_table(&ContingencyTable::new(pred, truth)?)
}

pub fn ari_from_table(table: &ContingencyTable) -> Result<f64> {
    if table.n < 2 {
        return Err(Error::TooFewSamples { required: 2, actual: table.n as usize });
    }
    // evaluated in integers as (2 I T - 2 A B) / ((A + B) T - 2 A B) so that
    // small worked cases come out exact
    let index: i128 = table.counts.iter().flatten().map(|&c| pairs(c) as i128).sum();
    let a: i128 = table.row_sums.iter().map(|&c| pairs(c) as i128).sum();
    let b: i128 = table.col_sums.iter().map(|&c| pairs(c) as i128).sum();
    let total = pairs(table.n) as i128;
    let num = 2 * index * total - 2 * a * b;
    let den = (a + b) * total - 2 * a * b;
    // zero only when both labelings are all-singletons or both one cluster
    if den == 0 {
        return Ok(1.0);
    }
    Ok(num as f64 / den as f64)
}

/// The seven external scores of one labeling against the ground truth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    pub acc: f64,
    pub nmi: f64,
    pub purity: f64,
    pub f_score: f64,
    pub precision: f64,
    pub recall: f64,
    pub ari: f64,
}

pub fn evaluate<P, Q>(pred: &[P], truth: &[Q]) -> Result<MetricsReport>
where
    P: Eq + Hash + Clone,
    Q: Eq + Hash + Clone,
{
    let table = ContingencyTable::new(pred, truth)?;
    let prf = pairwise_from_table(&table)?;
    Ok(MetricsReport {
        acc: accuracy_from_table(&table),
        nmi: nmi_from_table(&table, NmiNormalization::Geometric),
        purity: purity_from_table(&table),
        f_score: prf.f_score,
        precision: prf.precision,
        recall: prf.recall,
        ari: ari_from_table(&table)?,
    })
}
