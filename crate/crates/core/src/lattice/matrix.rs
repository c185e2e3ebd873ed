use std::fmt;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use super::LatticeError;

/// Dense integer matrix with exact, arbitrary-precision entries stored row-major.
///
/// Either dimension may be zero.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct IntegerMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<BigInt>,
}

impl IntegerMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<BigInt>) -> Result<Self, LatticeError> {
        if entries.len() != rows * cols {
            return Err(LatticeError::Dimension(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        Ok(IntegerMatrix {
            rows,
            cols,
            entries,
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntegerMatrix {
            rows,
            cols,
            entries: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.entries[i * n + i] = BigInt::from(1);
        }
        m
    }

    /// Builds a matrix from row vectors. `cols` fixes the width so that a matrix
    /// with zero rows still has a well-defined shape.
    pub fn from_rows(cols: usize, rows: Vec<Vec<BigInt>>) -> Result<Self, LatticeError> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * cols);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != cols {
                return Err(LatticeError::Dimension(format!(
                    "row {i} has length {}, expected {cols}",
                    row.len()
                )));
            }
            entries.extend(row);
        }
        Ok(IntegerMatrix {
            rows: n,
            cols,
            entries,
        })
    }

    pub fn from_i64(rows: usize, cols: usize, data: &[i64]) -> Result<Self, LatticeError> {
        Self::new(rows, cols, data.iter().map(|&x| BigInt::from(x)).collect())
    }

    /// Convenience constructor for literal matrices in code and tests.
    ///
    /// Panics if the rows are ragged.
    pub fn from_i64_rows<R: AsRef<[i64]>>(cols: usize, rows: &[R]) -> Self {
        let rows = rows
            .iter()
            .map(|r| r.as_ref().iter().map(|&x| BigInt::from(x)).collect())
            .collect();
        Self::from_rows(cols, rows).expect("ragged literal matrix")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.entries[i * self.cols + j]
    }

    pub(crate) fn get_mut(&mut self, i: usize, j: usize) -> &mut BigInt {
        &mut self.entries[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[BigInt]> + '_ {
        (0..self.rows).map(move |i| self.row(i))
    }

    pub fn to_rows(&self) -> Vec<Vec<BigInt>> {
        self.iter_rows().map(|r| r.to_vec()).collect()
    }

    /// Rows as machine integers, if every entry fits.
    pub fn to_i64_rows(&self) -> Option<Vec<Vec<i64>>> {
        self.iter_rows()
            .map(|r| r.iter().map(ToPrimitive::to_i64).collect())
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let mut entries = Vec::with_capacity(self.entries.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                entries.push(self.get(i, j).clone());
            }
        }
        IntegerMatrix {
            rows: self.cols,
            cols: self.rows,
            entries,
        }
    }

    pub fn mul(&self, other: &IntegerMatrix) -> Result<IntegerMatrix, LatticeError> {
        if self.cols != other.rows {
            return Err(LatticeError::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self.get(i, l);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(l, j);
                    if !b.is_zero() {
                        *out.get_mut(i, j) += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Row vector times matrix.
    pub fn left_apply(&self, v: &[BigInt]) -> Result<Vec<BigInt>, LatticeError> {
        if v.len() != self.rows {
            return Err(LatticeError::Dimension(format!(
                "vector of length {} against {}x{} matrix",
                v.len(),
                self.rows,
                self.cols
            )));
        }
        let mut out = vec![BigInt::zero(); self.cols];
        for (i, x) in v.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, o) in out.iter_mut().enumerate() {
                *o += x * self.get(i, j);
            }
        }
        Ok(out)
    }

    /// Stacks `other` below `self`.
    pub fn vstack(&self, other: &IntegerMatrix) -> Result<IntegerMatrix, LatticeError> {
        if self.cols != other.cols {
            return Err(LatticeError::Dimension(format!(
                "cannot stack width {} onto width {}",
                other.cols, self.cols
            )));
        }
        let mut entries = self.entries.clone();
        entries.extend(other.entries.iter().cloned());
        Ok(IntegerMatrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            entries,
        })
    }

    /// Stacks a single row on top of `self`.
    pub fn with_leading_row(&self, row: &[BigInt]) -> Result<IntegerMatrix, LatticeError> {
        let top = Self::from_rows(self.cols, vec![row.to_vec()])?;
        top.vstack(self)
    }

    pub fn select_rows(&self, indices: &[usize]) -> IntegerMatrix {
        let mut entries = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            entries.extend_from_slice(self.row(i));
        }
        IntegerMatrix {
            rows: indices.len(),
            cols: self.cols,
            entries,
        }
    }

    pub fn select_cols(&self, indices: &[usize]) -> IntegerMatrix {
        let mut entries = Vec::with_capacity(indices.len() * self.rows);
        for i in 0..self.rows {
            for &j in indices {
                entries.push(self.get(i, j).clone());
            }
        }
        IntegerMatrix {
            rows: self.rows,
            cols: indices.len(),
            entries,
        }
    }

    pub(crate) fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.entries.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub(crate) fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.entries.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row[target] += factor * row[source]
    pub(crate) fn add_row_multiple(&mut self, target: usize, source: usize, factor: &BigInt) {
        if factor.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let delta = factor * &self.entries[source * self.cols + j];
            self.entries[target * self.cols + j] += delta;
        }
    }

    /// col[target] += factor * col[source]
    pub(crate) fn add_col_multiple(&mut self, target: usize, source: usize, factor: &BigInt) {
        if factor.is_zero() {
            return;
        }
        for i in 0..self.rows {
            let delta = factor * &self.entries[i * self.cols + source];
            self.entries[i * self.cols + target] += delta;
        }
    }

    pub(crate) fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let e = &mut self.entries[i * self.cols + j];
            *e = -std::mem::take(e);
        }
    }

    pub(crate) fn negate_col(&mut self, j: usize) {
        for i in 0..self.rows {
            let e = &mut self.entries[i * self.cols + j];
            *e = -std::mem::take(e);
        }
    }
}

impl fmt::Display for IntegerMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, row) in self.iter_rows().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for (j, x) in row.iter().enumerate() {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}
