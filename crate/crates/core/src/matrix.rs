//! Real matrices acting on column vectors by left multiplication.
//!
//! A layer mapping `p_i` inputs to `p_{i+1}` outputs has shape `p_{i+1} x p_i`.
//! Semantically a matrix is a dense row-major array; storage keeps only the
//! nonzero entries of each row, in column order, because the monomial
//! networks are block diagonal and reach thousands of channels. Products
//! accumulate nonzero terms left to right from `0.0`, which is bit-identical
//! to the dense loop.
//!
//! JSON uses nested dense rows unless the matrix is both large and mostly
//! zero, in which case it is written as `{"rows", "cols", "entries": [[r, c, v], ...]}`.
//! Both forms are accepted on input.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<f64>,
}

impl Matrix {
    /// From a dense row-major array.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyMatrix { rows, cols });
        }
        if data.len() != rows * cols {
            return Err(Error::BadMatrixShape {
                rows,
                cols,
                len: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: format!("{rows}x{cols} matrix"),
            });
        }
        let mut row_ptr = Vec::with_capacity(rows + 1);
        let mut col_idx = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for row in data.chunks(cols) {
            for (c, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    col_idx.push(c);
                    vals.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Ok(Self {
            rows,
            cols,
            row_ptr,
            col_idx,
            vals,
        })
    }

    /// Builds a matrix from nested rows; every row must have the same length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::BadMatrixShape {
                rows: r,
                cols: c,
                len: rows.iter().map(Vec::len).sum(),
            });
        }
        Self::new(r, c, rows.concat())
    }

    /// From `(row, col, value)` triplets; later duplicates overwrite earlier ones.
    pub fn from_triplets(rows: usize, cols: usize, mut entries: Vec<(usize, usize, f64)>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyMatrix { rows, cols });
        }
        if let Some(&(r, c, _)) = entries.iter().find(|(r, c, _)| *r >= rows || *c >= cols) {
            return Err(Error::InvalidParameter(format!(
                "entry ({r},{c}) outside {rows}x{cols} matrix"
            )));
        }
        if entries.iter().any(|e| !e.2.is_finite()) {
            return Err(Error::NonFinite {
                context: format!("{rows}x{cols} matrix"),
            });
        }
        entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut dedup: Vec<(usize, usize, f64)> = Vec::with_capacity(entries.len());
        for e in entries {
            match dedup.last_mut() {
                Some(last) if last.0 == e.0 && last.1 == e.1 => last.2 = e.2,
                _ => dedup.push(e),
            }
        }
        let mut row_ptr = vec![0; rows + 1];
        let mut col_idx = Vec::with_capacity(dedup.len());
        let mut vals = Vec::with_capacity(dedup.len());
        for (r, c, v) in dedup {
            if v != 0.0 {
                row_ptr[r + 1] += 1;
                col_idx.push(c);
                vals.push(v);
            }
        }
        for r in 0..rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        Ok(Self {
            rows,
            cols,
            row_ptr,
            col_idx,
            vals,
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            row_ptr: vec![0; rows + 1],
            col_idx: Vec::new(),
            vals: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        assert!(n > 0, "matrix dimensions must be positive");
        Self {
            rows: n,
            cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            vals: vec![1.0; n],
        }
    }

    pub fn row_vector(entries: &[f64]) -> Result<Self> {
        Self::new(1, entries.len(), entries.to_vec())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Nonzero `(col, value)` pairs of row `r`, in column order.
    pub fn row_entries(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.vals[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        assert!(r < self.rows && c < self.cols, "index out of bounds");
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col_idx[span.clone()].binary_search(&c) {
            Ok(pos) => self.vals[span.start + pos],
            Err(_) => 0.0,
        }
    }

    /// Panics on a non-finite value; builders only write finite constants.
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        assert!(v.is_finite(), "non-finite matrix entry");
        assert!(r < self.rows && c < self.cols, "index out of bounds");
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col_idx[span.clone()].binary_search(&c) {
            Ok(pos) if v != 0.0 => self.vals[span.start + pos] = v,
            Ok(pos) => {
                self.col_idx.remove(span.start + pos);
                self.vals.remove(span.start + pos);
                self.row_ptr[r + 1..].iter_mut().for_each(|p| *p -= 1);
            }
            Err(_) if v == 0.0 => {}
            Err(pos) => {
                self.col_idx.insert(span.start + pos, c);
                self.vals.insert(span.start + pos, v);
                self.row_ptr[r + 1..].iter_mut().for_each(|p| *p += 1);
            }
        }
    }

    /// Dense row-major copy of the entries.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.rows * self.cols];
        for r in 0..self.rows {
            for (c, v) in self.row_entries(r) {
                out[r * self.cols + c] = v;
            }
        }
        out
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows)
            .map(|r| {
                let mut row = vec![0.0; self.cols];
                for (c, v) in self.row_entries(r) {
                    row[c] = v;
                }
                row
            })
            .collect()
    }

    fn map_vals(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            row_ptr: self.row_ptr.clone(),
            col_idx: self.col_idx.clone(),
            vals: self.vals.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn abs(&self) -> Self {
        self.map_vals(f64::abs)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map_vals(|v| v * s)
    }

    pub fn l1_norm(&self) -> f64 {
        self.vals.iter().map(|v| v.abs()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn sum(&self) -> f64 {
        self.vals.iter().sum()
    }

    /// `self * x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.rows);
        self.mul_vec_into(x, &mut out);
        out
    }

    pub fn mul_vec_into(&self, x: &[f64], out: &mut Vec<f64>) {
        debug_assert_eq!(x.len(), self.cols);
        out.clear();
        for r in 0..self.rows {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.col_idx[k]];
            }
            out.push(acc);
        }
    }

    /// `self^T * y`.
    pub fn tr_mul_vec(&self, y: &[f64]) -> Vec<f64> {
        debug_assert_eq!(y.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (r, &yv) in y.iter().enumerate() {
            for (c, v) in self.row_entries(r) {
                out[c] += v * yv;
            }
        }
        out
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                layer: 0,
                expected: self.cols,
                got: other.rows,
            });
        }
        let mut row_ptr = Vec::with_capacity(self.rows + 1);
        let mut col_idx = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        let mut acc = vec![0.0; other.cols];
        let mut touched = vec![false; other.cols];
        let mut cols_hit = Vec::new();
        for r in 0..self.rows {
            for (k, a) in self.row_entries(r) {
                for (c, b) in other.row_entries(k) {
                    if !touched[c] {
                        touched[c] = true;
                        cols_hit.push(c);
                    }
                    acc[c] += a * b;
                }
            }
            cols_hit.sort_unstable();
            for &c in &cols_hit {
                if acc[c] != 0.0 {
                    col_idx.push(c);
                    vals.push(acc[c]);
                }
                acc[c] = 0.0;
                touched[c] = false;
            }
            cols_hit.clear();
            row_ptr.push(col_idx.len());
        }
        Ok(Matrix {
            rows: self.rows,
            cols: other.cols,
            row_ptr,
            col_idx,
            vals,
        })
    }

    /// Block-diagonal stacking of `blocks`.
    pub fn block_diag(blocks: &[&Matrix]) -> Matrix {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let nnz = blocks.iter().map(|b| b.nnz()).sum();
        let mut row_ptr = Vec::with_capacity(rows + 1);
        let mut col_idx = Vec::with_capacity(nnz);
        let mut vals = Vec::with_capacity(nnz);
        row_ptr.push(0);
        let mut c0 = 0;
        for b in blocks {
            for r in 0..b.rows {
                for (c, v) in b.row_entries(r) {
                    col_idx.push(c0 + c);
                    vals.push(v);
                }
                row_ptr.push(col_idx.len());
            }
            c0 += b.cols;
        }
        Matrix {
            rows,
            cols,
            row_ptr,
            col_idx,
            vals,
        }
    }

    /// Reorders rows so that row `i` of the result is row `perm[i]` of `self`.
    pub fn permute_rows(&self, perm: &[usize]) -> Matrix {
        assert_eq!(perm.len(), self.rows);
        let mut row_ptr = Vec::with_capacity(self.rows + 1);
        let mut col_idx = Vec::with_capacity(self.nnz());
        let mut vals = Vec::with_capacity(self.nnz());
        row_ptr.push(0);
        for &r in perm {
            for (c, v) in self.row_entries(r) {
                col_idx.push(c);
                vals.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        Matrix {
            rows: self.rows,
            cols: self.cols,
            row_ptr,
            col_idx,
            vals,
        }
    }
}

/// Matrices with more entries than this are written sparsely when under a quarter full.
const DENSE_JSON_LIMIT: usize = 1 << 16;

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum MatrixRepr {
    Dense(Vec<Vec<f64>>),
    Sparse {
        rows: usize,
        cols: usize,
        entries: Vec<(usize, usize, f64)>,
    },
}

impl Matrix {
    fn writes_sparse(&self) -> bool {
        let size = self.rows * self.cols;
        size > DENSE_JSON_LIMIT && 4 * self.nnz() < size
    }
}

impl Serialize for Matrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let repr = if self.writes_sparse() {
            let entries = (0..self.rows)
                .flat_map(|r| self.row_entries(r).map(move |(c, v)| (r, c, v)))
                .collect();
            MatrixRepr::Sparse {
                rows: self.rows,
                cols: self.cols,
                entries,
            }
        } else {
            MatrixRepr::Dense(self.to_rows())
        };
        repr.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match MatrixRepr::deserialize(d)? {
            MatrixRepr::Dense(rows) => Matrix::from_rows(&rows),
            MatrixRepr::Sparse { rows, cols, entries } => Matrix::from_triplets(rows, cols, entries),
        }
        .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_ragged_and_nonfinite() {
        assert!(Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0]]).is_err());
        assert!(Matrix::new(1, 2, vec![1.0, f64::NAN]).is_err());
        assert!(Matrix::new(0, 2, vec![]).is_err());
        assert!(Matrix::from_triplets(2, 2, vec![(2, 0, 1.0)]).is_err());
    }

    #[test]
    fn matmul_and_transpose_product() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0], vec![0.0, -1.0]]).unwrap();
        let b = Matrix::from_rows(&[vec![2.0], vec![1.0]]).unwrap();
        let c = a.matmul(&b).unwrap();
        assert_eq!(c.to_rows(), vec![vec![4.0], vec![10.0], vec![-1.0]]);
        assert_eq!(a.tr_mul_vec(&[1.0, 1.0, 1.0]), vec![4.0, 5.0]);
        assert!(b.matmul(&b).is_err());
    }

    #[test]
    fn block_diag_places_blocks() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0]]).unwrap();
        let bd = Matrix::block_diag(&[&m, &m]);
        assert_eq!(bd.to_rows(), vec![vec![1.0, 2.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, 2.0]]);
    }

    #[test]
    fn set_inserts_overwrites_and_removes() {
        let mut m = Matrix::zeros(2, 3);
        m.set(1, 2, 4.0);
        m.set(0, 1, -1.0);
        m.set(1, 0, 2.0);
        assert_eq!(m.to_rows(), vec![vec![0.0, -1.0, 0.0], vec![2.0, 0.0, 4.0]]);
        m.set(1, 2, 0.0);
        m.set(0, 1, 5.0);
        assert_eq!(m.to_rows(), vec![vec![0.0, 5.0, 0.0], vec![2.0, 0.0, 0.0]]);
        assert_eq!(m.nnz(), 2);
        assert_eq!(m, Matrix::from_triplets(2, 3, vec![(1, 0, 2.0), (0, 1, 5.0)]).unwrap());
    }

    fn dense_mul(a: &[f64], r: usize, c: usize, x: &[f64]) -> Vec<f64> {
        (0..r)
            .map(|i| (0..c).fold(0.0, |acc, j| acc + a[i * c + j] * x[j]))
            .collect()
    }

    proptest! {
        #[test]
        fn products_match_dense_loop_bitwise(
            (r, c, data, x) in (1usize..6, 1usize..6).prop_flat_map(|(r, c)| (
                Just(r),
                Just(c),
                prop::collection::vec(prop_oneof![Just(0.0), -3.0..3.0f64], r * c),
                prop::collection::vec(-2.0..2.0f64, c),
            ))
        ) {
            let m = Matrix::new(r, c, data.clone()).unwrap();
            let got = m.mul_vec(&x);
            let want = dense_mul(&data, r, c, &x);
            for (g, w) in got.iter().zip(&want) {
                prop_assert_eq!(g.to_bits(), w.to_bits());
            }
            prop_assert_eq!(m.to_dense(), data);
        }
    }

    #[test]
    fn json_switches_to_entries_for_large_sparse_matrices() {
        let small = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, -2.5]]).unwrap();
        assert_eq!(serde_json::to_string(&small).unwrap(), "[[1.0,0.0],[0.0,-2.5]]");

        let n = 300;
        let big = Matrix::from_triplets(n, n, (0..n).map(|i| (i, (7 * i) % n, 0.1 * i as f64 + 1.0 / 3.0)).collect())
            .unwrap();
        let text = serde_json::to_string(&big).unwrap();
        assert!(text.starts_with("{\"rows\":300"));
        let back: Matrix = serde_json::from_str(&text).unwrap();
        assert_eq!(back, big);
        let dense: Matrix = serde_json::from_str(&serde_json::to_string(&big.to_rows()).unwrap()).unwrap();
        assert_eq!(dense, big);
    }
}
