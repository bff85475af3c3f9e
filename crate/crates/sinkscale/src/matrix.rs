//! Sparse non-negative matrices in coordinate form.
//!
//! Entries are kept in the order they were supplied. Every reduction in the
//! crate (row sums, column sums, divergences) walks the entries in that order,
//! so results are bit-reproducible for a given input.

use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};

/// A non-negative `n_rows x n_cols` matrix storing only its strictly positive
/// entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseNonnegMatrix {
    n_rows: usize,
    n_cols: usize,
    rows: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<f64>,
}

impl SparseNonnegMatrix {
    /// Builds a matrix from 0-based `(row, col, value)` triples.
    ///
    /// Values must be finite and strictly positive; zeros are represented by
    /// leaving the entry out. Duplicate coordinates are rejected.
    pub fn new<I>(n_rows: usize, n_cols: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        if n_rows == 0 || n_cols == 0 {
            return Err(Error::EmptyShape { n_rows, n_cols });
        }
        let mut seen = HashSet::new();
        let mut rows = Vec::new();
        let mut cols = Vec::new();
        let mut values = Vec::new();
        for (row, col, value) in entries {
            if row >= n_rows || col >= n_cols {
                return Err(Error::IndexOutOfRange {
                    row,
                    col,
                    n_rows,
                    n_cols,
                });
            }
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::NonpositiveEntry { row, col, value });
            }
            if !seen.insert((row, col)) {
                return Err(Error::DuplicateEntry { row, col });
            }
            rows.push(row);
            cols.push(col);
            values.push(value);
        }
        Ok(Self {
            n_rows,
            n_cols,
            rows,
            cols,
            values,
        })
    }

    /// Builds a matrix from dense rows, skipping zeros. Entries are stored in
    /// row-major order.
    pub fn from_dense(dense: &[Vec<f64>]) -> Result<Self> {
        let n_rows = dense.len();
        let n_cols = dense.first().map_or(0, Vec::len);
        if let Some(bad) = dense.iter().find(|row| row.len() != n_cols) {
            return Err(Error::DimensionMismatch {
                expected: format!("{n_cols} columns in every row"),
                found: format!("a row with {} columns", bad.len()),
            });
        }
        let mut entries = Vec::new();
        for (i, row) in dense.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    entries.push((i, j, v));
                }
            }
        }
        Self::new(n_rows, n_cols, entries)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    /// Number of stored entries.
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_indices(&self) -> &[usize] {
        &self.rows
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Iterates `(row, col, value)` in storage order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.rows
            .iter()
            .zip(&self.cols)
            .zip(&self.values)
            .map(|((&i, &j), &v)| (i, j, v))
    }

    /// Row sums accumulated in storage order. Empty rows sum to 0.
    pub fn row_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.n_rows];
        for (i, _, v) in self.entries() {
            sums[i] += v;
        }
        sums
    }

    /// Column sums accumulated in storage order. Empty columns sum to 0.
    pub fn col_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.n_cols];
        for (_, j, v) in self.entries() {
            sums[j] += v;
        }
        sums
    }

    /// Number of stored entries in each row.
    pub fn row_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_rows];
        for &i in &self.rows {
            counts[i] += 1;
        }
        counts
    }

    /// Number of stored entries in each column.
    pub fn col_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_cols];
        for &j in &self.cols {
            counts[j] += 1;
        }
        counts
    }

    /// Largest stored value, or 0 for a matrix with no entries.
    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Smallest stored value, or 0 for a matrix with no entries.
    pub fn min_value(&self) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Stored value at `(row, col)`, or 0. Linear in `nnz`.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries()
            .find(|&(i, j, _)| i == row && j == col)
            .map_or(0.0, |(_, _, v)| v)
    }

    /// Map from coordinate to storage position.
    pub fn position_index(&self) -> HashMap<(usize, usize), usize> {
        self.rows
            .iter()
            .zip(&self.cols)
            .enumerate()
            .map(|(k, (&i, &j))| ((i, j), k))
            .collect()
    }

    /// Same sparsity pattern and entry order, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.nnz() {
            return Err(Error::LengthMismatch(self.nnz(), values.len()));
        }
        Self::new(
            self.n_rows,
            self.n_cols,
            self.rows
                .iter()
                .zip(&self.cols)
                .zip(values)
                .map(|((&i, &j), v)| (i, j, v)),
        )
    }

    /// `true` if both matrices store the same coordinates in the same order.
    pub fn same_pattern(&self, other: &Self) -> bool {
        self.n_rows == other.n_rows
            && self.n_cols == other.n_cols
            && self.rows == other.rows
            && self.cols == other.cols
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.n_cols]; self.n_rows];
        for (i, j, v) in self.entries() {
            dense[i][j] = v;
        }
        dense
    }
}
