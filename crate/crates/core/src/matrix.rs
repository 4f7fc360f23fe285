//! Column-major dense matrices and the numerical kernels the solver needs:
//! L1 column normalization, non-negative projection, duplicate-column
//! handling, Frobenius norms, and the matrix products that drive the
//! iteration.
//!
//! Storage is column-major (`data[col * rows + row]`) because every hot
//! operation here walks columns: normalization, column extraction, Gram
//! products, and triangular solves against column blocks.

use std::collections::BTreeMap;
use std::fmt;

/// Error type for matrix construction and kernels.
///
/// Row/column payloads are 0-based; `Display` renders them 1-based to match
/// the convention used in all user-facing output.
#[derive(Debug, Clone, PartialEq)]
pub enum MatrixError {
    /// Data length does not match `rows * cols`.
    InvalidData { expected: usize, got: usize },
    /// Matrices must have at least one row and one column.
    ZeroDimension,
    /// A NaN or infinite entry was rejected by a constructor.
    NonFinite { row: usize, col: usize },
    /// Dimensions do not match for the operation.
    DimensionMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },
    /// Column sums to zero and cannot be L1-normalized.
    ZeroColumn(usize),
    /// Negative entry where a non-negative matrix is required.
    NegativeEntry { row: usize, col: usize },
    /// The Gram system is numerically singular; a positive ridge is required.
    SingularGram,
}

impl fmt::Display for MatrixError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatrixError::InvalidData { expected, got } => {
                write!(f, "data length mismatch: expected {expected}, got {got}")
            }
            MatrixError::ZeroDimension => write!(f, "matrix dimensions must be positive"),
            MatrixError::NonFinite { row, col } => {
                write!(f, "non-finite entry at row {}, column {}", row + 1, col + 1)
            }
            MatrixError::DimensionMismatch { expected, got } => write!(
                f,
                "dimension mismatch: expected {}x{}, got {}x{}",
                expected.0, expected.1, got.0, got.1
            ),
            MatrixError::ZeroColumn(col) => {
                write!(f, "column {} sums to zero and cannot be normalized", col + 1)
            }
            MatrixError::NegativeEntry { row, col } => {
                write!(f, "negative entry at row {}, column {}", row + 1, col + 1)
            }
            MatrixError::SingularGram => {
                write!(f, "Gram matrix is singular; supply a positive ridge delta")
            }
        }
    }
}

impl std::error::Error for MatrixError {}

/// A dense real matrix in column-major order.
///
/// Constructors reject NaN and infinite entries, so every `DenseMatrix` in
/// circulation holds finite values. Out-of-range access is a caller bug and
/// panics.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    /// Creates a matrix from column-major data.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, MatrixError> {
        if rows == 0 || cols == 0 {
            return Err(MatrixError::ZeroDimension);
        }
        if data.len() != rows * cols {
            return Err(MatrixError::InvalidData {
                expected: rows * cols,
                got: data.len(),
            });
        }
        let m = Self { rows, cols, data };
        m.check_finite()?;
        Ok(m)
    }

    /// Creates a matrix from row slices (row-major input, stored column-major).
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, MatrixError> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(MatrixError::ZeroDimension);
        }
        let nrows = rows.len();
        let ncols = rows[0].len();
        for row in rows {
            if row.len() != ncols {
                return Err(MatrixError::InvalidData {
                    expected: ncols,
                    got: row.len(),
                });
            }
        }
        let mut data = vec![0.0; nrows * ncols];
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                data[j * nrows + i] = v;
            }
        }
        Self::new(nrows, ncols, data)
    }

    /// Creates a matrix from column slices.
    pub fn from_columns(cols: &[Vec<f64>]) -> Result<Self, MatrixError> {
        if cols.is_empty() || cols[0].is_empty() {
            return Err(MatrixError::ZeroDimension);
        }
        let nrows = cols[0].len();
        for col in cols {
            if col.len() != nrows {
                return Err(MatrixError::InvalidData {
                    expected: nrows,
                    got: col.len(),
                });
            }
        }
        let mut data = Vec::with_capacity(nrows * cols.len());
        for col in cols {
            data.extend_from_slice(col);
        }
        Self::new(nrows, cols.len(), data)
    }

    /// Zero matrix. Panics on zero dimensions.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Identity matrix of order `n`.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Builds a matrix entrywise; `f(row, col)` must return finite values.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for j in 0..cols {
            for i in 0..rows {
                let v = f(i, j);
                debug_assert!(v.is_finite(), "from_fn produced a non-finite entry");
                m.data[j * rows + i] = v;
            }
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        assert!(row < self.rows && col < self.cols, "index out of range");
        self.data[col * self.rows + row]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        assert!(row < self.rows && col < self.cols, "index out of range");
        self.data[col * self.rows + row] = value;
    }

    /// Column `j` as a contiguous slice.
    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        assert!(j < self.cols, "column index out of range");
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        assert!(j < self.cols, "column index out of range");
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    /// Raw column-major storage.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Crate-internal constructor that skips the finite-entry scan; used in
    /// iteration hot paths that monitor finiteness themselves.
    pub(crate) fn from_vec_unchecked(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    fn check_finite(&self) -> Result<(), MatrixError> {
        for (idx, v) in self.data.iter().enumerate() {
            if !v.is_finite() {
                return Err(MatrixError::NonFinite {
                    row: idx % self.rows,
                    col: idx / self.rows,
                });
            }
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Diagonal entries, length `min(rows, cols)`.
    pub fn diagonal(&self) -> Vec<f64> {
        let n = self.rows.min(self.cols);
        (0..n).map(|i| self.data[i * self.rows + i]).collect()
    }

    /// Matrix product `self * other`.
    pub fn mul(&self, other: &DenseMatrix) -> Result<DenseMatrix, MatrixError> {
        if self.cols != other.rows {
            return Err(MatrixError::DimensionMismatch {
                expected: (self.cols, other.rows),
                got: (other.rows, other.cols),
            });
        }
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        // out[:, j] = sum_k other[k, j] * self[:, k]; axpy over contiguous columns.
        for j in 0..other.cols {
            let bcol = other.col(j);
            let ocol = &mut out.data[j * self.rows..(j + 1) * self.rows];
            for (k, &w) in bcol.iter().enumerate() {
                if w != 0.0 {
                    let acol = &self.data[k * self.rows..(k + 1) * self.rows];
                    for (o, &a) in ocol.iter_mut().zip(acol) {
                        *o += w * a;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Product `selfᵀ * other` via column dot products.
    pub fn transpose_mul(&self, other: &DenseMatrix) -> Result<DenseMatrix, MatrixError> {
        if self.rows != other.rows {
            return Err(MatrixError::DimensionMismatch {
                expected: (self.rows, other.rows),
                got: (other.rows, other.cols),
            });
        }
        let mut out = DenseMatrix::zeros(self.cols, other.cols);
        for j in 0..other.cols {
            let bcol = other.col(j);
            let ocol = &mut out.data[j * self.cols..(j + 1) * self.cols];
            for (i, o) in ocol.iter_mut().enumerate() {
                *o = dot(self.col(i), bcol);
            }
        }
        Ok(out)
    }

    /// Gram matrix `selfᵀ * self`, exploiting symmetry.
    pub fn gram(&self) -> DenseMatrix {
        let n = self.cols;
        let mut out = DenseMatrix::zeros(n, n);
        for j in 0..n {
            let cj = self.col(j);
            for i in 0..=j {
                let v = dot(self.col(i), cj);
                out.data[j * n + i] = v;
                out.data[i * n + j] = v;
            }
        }
        out
    }

    /// Matrix-vector product `self * v`.
    pub fn mul_vec(&self, v: &[f64]) -> Result<Vec<f64>, MatrixError> {
        if v.len() != self.cols {
            return Err(MatrixError::DimensionMismatch {
                expected: (self.cols, 1),
                got: (v.len(), 1),
            });
        }
        let mut out = vec![0.0; self.rows];
        for (k, &w) in v.iter().enumerate() {
            if w != 0.0 {
                for (o, &a) in out.iter_mut().zip(self.col(k)) {
                    *o += w * a;
                }
            }
        }
        Ok(out)
    }

    /// Vector product `selfᵀ * v`.
    pub fn transpose_mul_vec(&self, v: &[f64]) -> Result<Vec<f64>, MatrixError> {
        if v.len() != self.rows {
            return Err(MatrixError::DimensionMismatch {
                expected: (self.rows, 1),
                got: (v.len(), 1),
            });
        }
        Ok((0..self.cols).map(|j| dot(self.col(j), v)).collect())
    }

    /// Elementwise difference `self - other`.
    pub fn sub(&self, other: &DenseMatrix) -> Result<DenseMatrix, MatrixError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(MatrixError::DimensionMismatch {
                expected: (self.rows, self.cols),
                got: (other.rows, other.cols),
            });
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Ok(DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    /// New matrix with column `j` scaled by `scale[j]`.
    pub fn scaled_columns(&self, scale: &[f64]) -> Result<DenseMatrix, MatrixError> {
        if scale.len() != self.cols {
            return Err(MatrixError::DimensionMismatch {
                expected: (self.cols, 1),
                got: (scale.len(), 1),
            });
        }
        let mut out = self.clone();
        for (j, &s) in scale.iter().enumerate() {
            for v in out.col_mut(j) {
                *v *= s;
            }
        }
        Ok(out)
    }

    /// Submatrix of the listed columns, in the listed order.
    pub fn columns_subset(&self, idx: &[usize]) -> DenseMatrix {
        assert!(!idx.is_empty(), "column subset must be non-empty");
        let mut out = DenseMatrix::zeros(self.rows, idx.len());
        for (k, &j) in idx.iter().enumerate() {
            out.col_mut(k).copy_from_slice(self.col(j));
        }
        out
    }

    /// Submatrix of the listed rows, in the listed order.
    pub fn rows_subset(&self, idx: &[usize]) -> DenseMatrix {
        assert!(!idx.is_empty(), "row subset must be non-empty");
        let mut out = DenseMatrix::zeros(idx.len(), self.cols);
        for j in 0..self.cols {
            let src = self.col(j);
            let dst = out.col_mut(j);
            for (k, &i) in idx.iter().enumerate() {
                dst[k] = src[i];
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn min_entry(&self) -> f64 {
        self.data.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Elementwise `max(entry, 0)`. Idempotent; never increases an entry.
pub fn pos_project(m: &DenseMatrix) -> DenseMatrix {
    let data = m.data.iter().map(|&v| if v > 0.0 { v } else { 0.0 }).collect();
    DenseMatrix {
        rows: m.rows,
        cols: m.cols,
        data,
    }
}

/// Frobenius norm of `a - b`.
pub fn frobenius_distance(a: &DenseMatrix, b: &DenseMatrix) -> Result<f64, MatrixError> {
    if a.rows != b.rows || a.cols != b.cols {
        return Err(MatrixError::DimensionMismatch {
            expected: (a.rows, a.cols),
            got: (b.rows, b.cols),
        });
    }
    let sum: f64 = a
        .data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum();
    Ok(sum.sqrt())
}

/// Original L1 mass of each column, recorded by [`l1_normalize_columns`] so
/// factors computed on the normalized matrix can be mapped back.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnScales {
    scales: Vec<f64>,
}

impl ColumnScales {
    pub fn as_slice(&self) -> &[f64] {
        &self.scales
    }

    pub fn len(&self) -> usize {
        self.scales.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scales.is_empty()
    }

    #[inline]
    pub fn get(&self, j: usize) -> f64 {
        self.scales[j]
    }
}

/// Scales every column of a non-negative matrix to unit L1 mass.
///
/// Returns the normalized matrix together with the original column sums.
/// Rejects negative entries and zero columns.
pub fn l1_normalize_columns(x: &DenseMatrix) -> Result<(DenseMatrix, ColumnScales), MatrixError> {
    let mut out = x.clone();
    let mut scales = Vec::with_capacity(x.cols());
    for j in 0..x.cols() {
        let col = x.col(j);
        let mut sum = 0.0;
        for (i, &v) in col.iter().enumerate() {
            if v < 0.0 {
                return Err(MatrixError::NegativeEntry { row: i, col: j });
            }
            sum += v;
        }
        if sum <= 0.0 {
            return Err(MatrixError::ZeroColumn(j));
        }
        let inv = 1.0 / sum;
        for v in out.col_mut(j) {
            *v *= inv;
        }
        scales.push(sum);
    }
    Ok((out, ColumnScales { scales }))
}

/// Result of [`dedupe_columns`]: the retained matrix, the original indices of
/// retained columns (ascending), and a map from each dropped column to its
/// retained representative.
#[derive(Debug, Clone)]
pub struct DedupeResult {
    pub matrix: DenseMatrix,
    pub keep: Vec<usize>,
    pub dup_map: BTreeMap<usize, usize>,
}

/// Drops columns whose L1 distance to an earlier column is `<= tol`.
///
/// Deterministic: the first occurrence is always the retained representative.
pub fn dedupe_columns(xn: &DenseMatrix, tol: f64) -> DedupeResult {
    let mut keep: Vec<usize> = Vec::with_capacity(xn.cols());
    let mut dup_map = BTreeMap::new();
    for j in 0..xn.cols() {
        let cj = xn.col(j);
        let mut rep = None;
        for &k in &keep {
            if l1_distance_within(xn.col(k), cj, tol) {
                rep = Some(k);
                break;
            }
        }
        match rep {
            Some(k) => {
                dup_map.insert(j, k);
            }
            None => keep.push(j),
        }
    }
    DedupeResult {
        matrix: xn.columns_subset(&keep),
        keep,
        dup_map,
    }
}

fn l1_distance_within(a: &[f64], b: &[f64], tol: f64) -> bool {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        acc += (x - y).abs();
        if acc > tol {
            return false;
        }
    }
    true
}
