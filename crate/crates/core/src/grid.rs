//! Row-major time × node storage used by every trajectory type.

use crate::error::{check_len, Result};
use crate::scalar::Scalar;

/// `(steps + 1) × nodes` values; row `k` holds the sample at `t_k = k·dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> TimeGrid<T> {
    pub fn filled(rows: usize, cols: usize, value: T) -> Self {
        Self {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::filled(rows, cols, T::zero())
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let n_rows = rows.len();
        let mut data = Vec::with_capacity(n_rows * cols);
        for r in rows {
            check_len("grid row", cols, r.len())?;
            data.extend(r);
        }
        Ok(Self {
            rows: n_rows,
            cols,
            data,
        })
    }

    /// Number of time samples (`M + 1`).
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of nodes.
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, k: usize) -> &[T] {
        &self.data[k * self.cols..(k + 1) * self.cols]
    }

    pub fn row_mut(&mut self, k: usize) -> &mut [T] {
        &mut self.data[k * self.cols..(k + 1) * self.cols]
    }

    pub fn get(&self, k: usize, i: usize) -> T {
        self.data[k * self.cols + i]
    }

    pub fn set(&mut self, k: usize, i: usize, v: T) {
        self.data[k * self.cols + i] = v;
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[T]> + '_ {
        self.data.chunks(self.cols.max(1)).take(self.rows)
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    /// Time series of node `i`.
    pub fn column(&self, i: usize) -> Vec<T> {
        (0..self.rows).map(|k| self.get(k, i)).collect()
    }

    pub(crate) fn same_shape(&self, other: &Self, what: &'static str) -> Result<()> {
        check_len(what, self.rows, other.rows)?;
        check_len(what, self.cols, other.cols)
    }
}
