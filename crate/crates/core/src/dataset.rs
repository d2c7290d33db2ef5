//! Sample-by-feature expression dataset with binary labels.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::{Matrix, Real};

/// An expression matrix with per-sample binary labels and names on both
/// axes. Immutable after construction; row/column subsetting returns new
/// datasets.
#[derive(Debug, Clone)]
pub struct ExpressionDataset {
    matrix: Matrix,
    labels: Vec<u8>,
    feature_names: Vec<String>,
    sample_ids: Vec<String>,
}

impl ExpressionDataset {
    pub fn new(
        matrix: Matrix,
        labels: Vec<u8>,
        feature_names: Vec<String>,
        sample_ids: Vec<String>,
    ) -> Result<Self> {
        if matrix.n_rows() != labels.len() || matrix.n_rows() != sample_ids.len() {
            return Err(Error::Dimension(format!(
                "matrix has {} rows, {} labels, {} sample ids",
                matrix.n_rows(),
                labels.len(),
                sample_ids.len()
            )));
        }
        if matrix.n_cols() != feature_names.len() {
            return Err(Error::Dimension(format!(
                "matrix has {} columns, {} feature names",
                matrix.n_cols(),
                feature_names.len()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l > 1) {
            return Err(Error::Invalid(format!(
                "labels must be 0 or 1, got {}; multiclass tasks are not supported",
                bad
            )));
        }
        if !matrix.is_finite() {
            return Err(Error::NonFinite("expression matrix".into()));
        }
        let unique: HashSet<&String> = feature_names.iter().collect();
        if unique.len() != feature_names.len() {
            return Err(Error::Invalid("duplicate feature names".into()));
        }
        let unique_ids: HashSet<&String> = sample_ids.iter().collect();
        if unique_ids.len() != sample_ids.len() {
            return Err(Error::Invalid("duplicate sample ids".into()));
        }
        Ok(ExpressionDataset {
            matrix,
            labels,
            feature_names,
            sample_ids,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.matrix.n_rows()
    }

    pub fn n_features(&self) -> usize {
        self.matrix.n_cols()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn labels_as_real(&self) -> Vec<Real> {
        self.labels.iter().map(|&l| l as Real).collect()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn sample_ids(&self) -> &[String] {
        &self.sample_ids
    }

    pub fn feature_name(&self, idx: usize) -> &str {
        &self.feature_names[idx]
    }

    /// Both classes must be present before a dataset reaches a selector.
    pub fn validate_for_selection(&self) -> Result<()> {
        let ones = self.labels.iter().filter(|&&l| l == 1).count();
        if ones == 0 || ones == self.labels.len() {
            return Err(Error::SingleClass);
        }
        Ok(())
    }

    /// Column subset preserving all samples.
    pub fn subset_cols(&self, idx: &[usize]) -> ExpressionDataset {
        ExpressionDataset {
            matrix: self.matrix.select_cols(idx),
            labels: self.labels.clone(),
            feature_names: idx.iter().map(|&j| self.feature_names[j].clone()).collect(),
            sample_ids: self.sample_ids.clone(),
        }
    }

    /// Row subset preserving all features; used for fold splits.
    pub fn subset_rows(&self, idx: &[usize]) -> ExpressionDataset {
        ExpressionDataset {
            matrix: self.matrix.select_rows(idx),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            feature_names: self.feature_names.clone(),
            sample_ids: idx.iter().map(|&i| self.sample_ids[i].clone()).collect(),
        }
    }
}
