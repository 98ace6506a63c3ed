//! Domain types shared across the crate.
//!
//! Indices are 0-based everywhere in the API; serialization code converts to
//! 1-based at the file boundary.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat::Mat;

/// True coefficient vector and its support, available for synthetic data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundTruth {
    pub beta_star: Vec<f64>,
    /// 0-based support indices, ascending.
    pub support: Vec<usize>,
    pub sigma: f64,
}

impl GroundTruth {
    pub fn from_beta(beta_star: Vec<f64>, sigma: f64) -> Self {
        let support = beta_star
            .iter()
            .enumerate()
            .filter(|(_, b)| **b != 0.0)
            .map(|(j, _)| j)
            .collect();
        GroundTruth { beta_star, support, sigma }
    }
}

/// Response vector plus design matrix with unit-norm columns.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub y: Vec<f64>,
    pub x: Mat,
    /// Original column l2 norms, so coefficients can be mapped back to the
    /// raw scale: beta_raw[j] = beta_normalized[j] / column_scales[j].
    pub column_scales: Vec<f64>,
    pub truth: Option<GroundTruth>,
}

impl Dataset {
    /// Builds a dataset from a raw design matrix, normalizing columns to unit
    /// l2 norm. With `center` set, column means of x and the mean of y are
    /// subtracted first.
    pub fn from_raw(y: Vec<f64>, mut x: Mat, center: bool, truth: Option<GroundTruth>) -> Result<Self> {
        if x.rows() == 0 || x.cols() == 0 {
            return Err(Error::DimensionMismatch("empty design matrix".into()));
        }
        if y.len() != x.rows() {
            return Err(Error::DimensionMismatch(format!(
                "y has length {}, x has {} rows",
                y.len(),
                x.rows()
            )));
        }
        let mut y = y;
        if center {
            center_columns(&mut x);
            let my = y.iter().sum::<f64>() / y.len() as f64;
            for v in y.iter_mut() {
                *v -= my;
            }
        }
        let scales = normalize_columns(&mut x)?;
        Ok(Dataset { y, x, column_scales: scales, truth })
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn p(&self) -> usize {
        self.x.cols()
    }
}

fn center_columns(x: &mut Mat) {
    let n = x.rows();
    let p = x.cols();
    let mut means = vec![0.0; p];
    for i in 0..n {
        for (j, m) in means.iter_mut().enumerate() {
            *m += x.get(i, j);
        }
    }
    for m in means.iter_mut() {
        *m /= n as f64;
    }
    for i in 0..n {
        let row = x.row_mut(i);
        for (v, m) in row.iter_mut().zip(&means) {
            *v -= *m;
        }
    }
}

/// Scales every column of `x` to unit l2 norm in place and returns the
/// original norms.
pub fn normalize_columns(x: &mut Mat) -> Result<Vec<f64>> {
    let n = x.rows();
    let p = x.cols();
    let mut norms = vec![0.0; p];
    for i in 0..n {
        let row = x.row(i);
        for (j, nj) in norms.iter_mut().enumerate() {
            *nj += row[j] * row[j];
        }
    }
    for (j, nj) in norms.iter_mut().enumerate() {
        *nj = nj.sqrt();
        if *nj < 1e-12 {
            return Err(Error::ZeroVarianceColumn(j));
        }
    }
    for i in 0..n {
        let row = x.row_mut(i);
        for (v, nj) in row.iter_mut().zip(&norms) {
            *v /= *nj;
        }
    }
    Ok(norms)
}

/// Disjoint subsample index sets plus the contrast grouping (b groups of m).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartitionPlan {
    /// d = b*m subsets, each of size N, pairwise disjoint, 0-based indices.
    pub subsets: Vec<Vec<usize>>,
    pub b: usize,
    pub m: usize,
    pub seed: u64,
    /// Indices not used by any subset, shuffled; calibration blocks draw from
    /// these first so calibration data stays disjoint from all fitting data.
    pub leftover: Vec<usize>,
}

impl PartitionPlan {
    pub fn d(&self) -> usize {
        self.b * self.m
    }

    pub fn subsample_size(&self) -> usize {
        self.subsets.first().map_or(0, Vec::len)
    }
}

/// Exchangeable integer weights for one (subsample, replicate) pair.
#[derive(Debug, Clone)]
pub struct WeightVector {
    /// Positive integer-valued weights stored as f64; sums exactly to n.
    pub values: Vec<f64>,
    pub subsample_id: usize,
    pub replicate_id: usize,
}

impl WeightVector {
    pub fn ones(len: usize, subsample_id: usize, replicate_id: usize) -> Self {
        WeightVector { values: vec![1.0; len], subsample_id, replicate_id }
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }
}

/// Output of a full selection run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelectionResult {
    /// Per-variable selection-probability estimates.
    pub pi: Vec<f64>,
    pub tau: f64,
    /// 0-based selected indices, ascending.
    pub selected: Vec<usize>,
    /// Aggregated coefficients; exactly zero off the selected set.
    pub beta_agg: Vec<f64>,
    pub lambda_used: f64,
}

/// Closed range of attainable pi values for a given group count b.
pub fn pi_range(b: usize) -> (f64, f64) {
    let sb = (b as f64).sqrt();
    (1.0 / (2.0 * (1.0 + sb)), (2.0 * sb + 1.0) / (2.0 * (1.0 + sb)))
}

/// Computable condition diagnostics for a support candidate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralDiagnostics {
    /// Condition number of the in-block Gram on the candidate set.
    pub kappa_in: f64,
    /// 1 / lambda_min of the out-of-block Gram on the candidate set.
    pub kappa_out_inv_min_eig: f64,
    /// Empirical restricted-eigenvalue proxy.
    pub re_constant: f64,
    /// Irrepresentable-condition norm; < 1 means the condition holds.
    pub ir_norm: f64,
}

impl SpectralDiagnostics {
    pub fn ir_satisfied(&self) -> bool {
        self.ir_norm < 1.0
    }
}

/// Confusion counts of a selected set against the true support.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Metrics {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

/// Counts true/false positives and false negatives. `selected` and the truth
/// support are 0-based index sets.
pub fn metrics(selected: &[usize], truth: &GroundTruth) -> Metrics {
    let sel: std::collections::HashSet<usize> = selected.iter().copied().collect();
    let sup: std::collections::HashSet<usize> = truth.support.iter().copied().collect();
    let tp = sel.intersection(&sup).count();
    Metrics { tp, fp: sel.len() - tp, fn_: sup.len() - tp }
}
