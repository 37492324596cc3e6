//! Batches of fixed-length multivariate sequences with optional
//! per-sequence conditions and labels.

use crate::numerics::{Matrix, Tensor3};
use crate::{Error, Result};

/// `N` real-valued sequences sharing a time axis of length `T` with `d`
/// channels, plus optional per-sequence condition and label rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceBatch {
    pub data: Tensor3,
    pub conditions: Option<Matrix>,
    pub labels: Option<Matrix>,
}

impl SequenceBatch {
    pub fn new(data: Tensor3) -> Self {
        SequenceBatch {
            data,
            conditions: None,
            labels: None,
        }
    }

    pub fn with_conditions(mut self, conditions: Matrix) -> Result<Self> {
        if conditions.rows() != self.data.n() {
            return Err(Error::ShapeMismatch(format!(
                "{} condition rows for {} sequences",
                conditions.rows(),
                self.data.n()
            )));
        }
        self.conditions = Some(conditions);
        Ok(self)
    }

    pub fn with_labels(mut self, labels: Matrix) -> Result<Self> {
        if labels.rows() != self.data.n() {
            return Err(Error::ShapeMismatch(format!(
                "{} label rows for {} sequences",
                labels.rows(),
                self.data.n()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.data.n()
    }

    pub fn seq_len(&self) -> usize {
        self.data.t()
    }

    pub fn channels(&self) -> usize {
        self.data.d()
    }

    /// Gathers a sub-batch by sequence index, carrying conditions and labels.
    pub fn select(&self, indices: &[usize]) -> SequenceBatch {
        let select_rows = |m: &Matrix| {
            let mut out = Matrix::zeros(indices.len(), m.cols());
            for (k, &i) in indices.iter().enumerate() {
                out.row_mut(k).copy_from_slice(m.row(i));
            }
            out
        };
        SequenceBatch {
            data: self.data.select(indices),
            conditions: self.conditions.as_ref().map(select_rows),
            labels: self.labels.as_ref().map(select_rows),
        }
    }
}
