//! Symmetric sparse matrices stored as the lower triangle (diagonal included)
//! in compressed row form.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

/// Accumulates symmetric contributions before compression.
#[derive(Debug, Clone)]
pub struct SymTriplets {
    n: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl SymTriplets {
    pub fn new(n: usize) -> Self {
        Self { n, entries: Vec::new() }
    }

    /// Adds `v` to entry `(i, j)` and, implicitly, to `(j, i)`.
    /// An off-diagonal pair must be added once, not once per ordering.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.n && j < self.n);
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        self.entries.push((r, c, v));
    }

    pub fn build(mut self) -> Result<SparseSymMatrix> {
        if self.n == 0 {
            return Err(Error::ParameterDomain("matrix dimension must be positive".into()));
        }
        self.entries.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; self.n + 1];
        let mut col_idx = Vec::with_capacity(self.entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(self.entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in self.entries {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                row_ptr[r + 1] += 1;
                col_idx.push(c);
                values.push(v);
                last = Some((r, c));
            }
        }
        for i in 0..self.n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(SparseSymMatrix {
            n: self.n,
            row_ptr,
            col_idx,
            values,
        })
    }
}

impl SparseSymMatrix {
    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        let mut t = SymTriplets::new(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            t.add(i, i, d);
        }
        t.build()
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::from_diagonal(&vec![1.0; n])
    }

    /// Builds from a dense symmetric matrix given row by row; only the lower
    /// triangle is read and exact zeros are skipped.
    pub fn from_dense_lower(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut t = SymTriplets::new(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate().take(i + 1) {
                if v != 0.0 {
                    t.add(i, j, v);
                }
            }
        }
        t.build()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of stored (lower-triangle) entries.
    pub fn stored_len(&self) -> usize {
        self.values.len()
    }

    /// Stored entries of row `i` as `(column, value)` with `column <= i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        self.row(r).find(|&(col, _)| col == c).map_or(0.0, |(_, v)| v)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// `y = A x`.
    pub fn mul_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        y.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..self.n {
            let xi = x[i];
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[k];
                let a = self.values[k];
                acc += a * x[j];
                if j != i {
                    y[j] += a * xi;
                }
            }
            y[i] += acc;
        }
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.mul_into(x, &mut y);
        y
    }

    /// `xᵀ A x`.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        dot(x, &self.mul(x))
    }

    /// `a·self + b·other`, merging the two sparsity patterns.
    pub fn lin_comb(&self, a: f64, other: &SparseSymMatrix, b: f64) -> Result<SparseSymMatrix> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: other.n,
            });
        }
        let mut row_ptr = Vec::with_capacity(self.n + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::with_capacity(self.values.len().max(other.values.len()));
        let mut values = Vec::with_capacity(col_idx.capacity());
        for i in 0..self.n {
            let mut p = self.row_ptr[i];
            let mut q = other.row_ptr[i];
            let (pe, qe) = (self.row_ptr[i + 1], other.row_ptr[i + 1]);
            while p < pe || q < qe {
                let cp = if p < pe { self.col_idx[p] } else { usize::MAX };
                let cq = if q < qe { other.col_idx[q] } else { usize::MAX };
                if cp == cq {
                    col_idx.push(cp);
                    values.push(a * self.values[p] + b * other.values[q]);
                    p += 1;
                    q += 1;
                } else if cp < cq {
                    col_idx.push(cp);
                    values.push(a * self.values[p]);
                    p += 1;
                } else {
                    col_idx.push(cq);
                    values.push(b * other.values[q]);
                    q += 1;
                }
            }
            row_ptr.push(col_idx.len());
        }
        Ok(SparseSymMatrix {
            n: self.n,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.n]; self.n];
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                out[i][j] = v;
                out[j][i] = v;
            }
        }
        out
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Norm induced by an SPD matrix, `sqrt(xᵀ A x)`.
pub fn energy_norm(a: &SparseSymMatrix, x: &[f64]) -> f64 {
    a.quad_form(x).max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_entries_accumulate() {
        let mut t = SymTriplets::new(2);
        t.add(0, 0, 1.0);
        t.add(1, 0, 2.0);
        t.add(0, 1, 3.0);
        t.add(1, 1, 4.0);
        let m = t.build().unwrap();
        assert_eq!(m.stored_len(), 3);
        assert_eq!(m.get(0, 1), 5.0);
        assert_eq!(m.mul(&[1.0, 1.0]), vec![6.0, 9.0]);
    }

    #[test]
    fn lin_comb_merges_patterns() {
        let a = SparseSymMatrix::from_dense_lower(&[vec![2.0, 0.0], vec![1.0, 3.0]]).unwrap();
        let b = SparseSymMatrix::identity(2).unwrap();
        let c = a.lin_comb(1.0, &b, 0.5).unwrap();
        assert_eq!(c.to_dense(), vec![vec![2.5, 1.0], vec![1.0, 3.5]]);
    }

    #[test]
    fn empty_matrix_rejected() {
        assert!(SymTriplets::new(0).build().is_err());
    }
}
