//! Dense row-major matrix used for embeddings, label indicators, and the
//! small dense oracles in tests.
//!
//! Embeddings carry *block metadata*: the first [`label_cols`] columns hold
//! per-class label mass and the remaining [`feature_cols`] columns hold input
//! features. The split is bookkeeping only — numerical operations treat all
//! columns uniformly — but it survives serialization so downstream consumers
//! can tell the blocks apart.
//!
//! [`label_cols`]: EmbeddingMatrix::label_cols
//! [`feature_cols`]: EmbeddingMatrix::feature_cols

use crate::error::{Error, Result};

/// Dense row-major `rows x cols` matrix of `f64` with label/feature block
/// metadata. Invariant: `label_cols + feature_cols == cols`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    rows: usize,
    cols: usize,
    label_cols: usize,
    data: Vec<f64>,
}

impl EmbeddingMatrix {
    /// All-zero matrix. The block metadata defaults to "all feature columns";
    /// use [`with_label_cols`](Self::with_label_cols) to mark a label block.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            label_cols: 0,
            data: vec![0.0; rows * cols],
        }
    }

    /// Builds a matrix from row-major data. Fails if `data.len() != rows * cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch {
                expected: format!("{rows}x{cols} ({} entries)", rows * cols),
                got: format!("{} entries", data.len()),
            });
        }
        Ok(Self {
            rows,
            cols,
            label_cols: 0,
            data,
        })
    }

    /// Marks the first `label_cols` columns as the label block; the rest are
    /// feature columns. Fails if `label_cols > cols`.
    pub fn with_label_cols(mut self, label_cols: usize) -> Result<Self> {
        if label_cols > self.cols {
            return Err(Error::ShapeMismatch {
                expected: format!("label_cols <= {}", self.cols),
                got: format!("label_cols = {label_cols}"),
            });
        }
        self.label_cols = label_cols;
        Ok(self)
    }

    /// Copies the block metadata (label/feature split) from another matrix
    /// with the same column count.
    pub(crate) fn inherit_blocks(mut self, other: &EmbeddingMatrix) -> Self {
        debug_assert_eq!(self.cols, other.cols);
        self.label_cols = other.label_cols;
        self
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Number of leading columns holding label mass.
    pub fn label_cols(&self) -> usize {
        self.label_cols
    }

    /// Number of trailing columns holding features.
    pub fn feature_cols(&self) -> usize {
        self.cols - self.label_cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.cols + col] = value;
    }

    #[inline]
    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, row: usize) -> &mut [f64] {
        &mut self.data[row * self.cols..(row + 1) * self.cols]
    }

    /// Row-major backing slice.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Multiplies every entry by `factor`.
    pub fn scale(&mut self, factor: f64) {
        for v in &mut self.data {
            *v *= factor;
        }
    }

    /// Frobenius norm, `sqrt(sum of squared entries)`.
    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Largest absolute entry (0 for an empty matrix).
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// Smallest entry (+inf for an empty matrix).
    pub fn min_entry(&self) -> f64 {
        self.data.iter().fold(f64::INFINITY, |acc, &v| acc.min(v))
    }

    /// `max_ij |self_ij - other_ij|`. Fails on shape mismatch.
    pub fn max_abs_diff(&self, other: &EmbeddingMatrix) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .fold(0.0, |acc, (a, b)| acc.max((a - b).abs())))
    }

    /// Frobenius norm of `self - other`. Fails on shape mismatch.
    pub fn frobenius_diff(&self, other: &EmbeddingMatrix) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt())
    }

    /// True when every entry is finite.
    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    fn check_same_shape(&self, other: &EmbeddingMatrix) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::ShapeMismatch {
                expected: format!("{}x{}", self.rows, self.cols),
                got: format!("{}x{}", other.rows, other.cols),
            });
        }
        Ok(())
    }
}
