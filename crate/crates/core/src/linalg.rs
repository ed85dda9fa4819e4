//! Complex sparse/dense operator algebra.
//!
//! Two concrete operator types cover everything the crate needs:
//! [`SparseOperator`] stores each row as a sorted list of `(column, value)`
//! pairs and is used for auxiliary-space operators and most physical-space
//! operators; [`DenseOperator`] is a square row-major matrix used when a
//! physical operator has to be diagonalised or fed to the superoperator
//! machinery.
//!
//! Tensor products use the row-major index convention
//! `combined = i_a * dim_b + i_b` throughout.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Largest combined dimension a Kronecker product may produce.
pub const MAX_KRON_DIM: usize = 1 << 26;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("{op}: dimension mismatch between {left:?} and {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("{op}: operator of shape {shape:?} is not square")]
    NotSquare { op: &'static str, shape: (usize, usize) },
    #[error("kron: combined shape {rows}x{cols} exceeds limit {limit}")]
    DimensionOverflow { rows: usize, cols: usize, limit: usize },
    #[error("index ({row}, {col}) outside shape {shape:?}")]
    IndexOutOfRange {
        row: usize,
        col: usize,
        shape: (usize, usize),
    },
}

pub type Result<T> = std::result::Result<T, LinalgError>;

/// Frobenius and max-abs norms, the two measures used for every residual.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Norms {
    pub frobenius: f64,
    pub max_abs: f64,
}

impl Norms {
    fn accumulate<'a>(values: impl Iterator<Item = &'a C64>) -> Self {
        let mut sq = 0.0;
        let mut max_abs: f64 = 0.0;
        for v in values {
            sq += v.norm_sqr();
            max_abs = max_abs.max(v.norm());
        }
        Norms {
            frobenius: sq.sqrt(),
            max_abs,
        }
    }
}

// ---------------------------------------------------------------------------
// Sparse
// ---------------------------------------------------------------------------

/// Row-compressed sparse complex matrix.
///
/// Rows are kept sorted by column and never store an entry whose modulus is
/// `<= drop_threshold` (zero unless set explicitly).
#[derive(Clone, PartialEq)]
pub struct SparseOperator {
    nrows: usize,
    ncols: usize,
    rows: Vec<Vec<(usize, C64)>>,
    drop_threshold: f64,
}

impl fmt::Debug for SparseOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SparseOperator({}x{}, nnz={})", self.nrows, self.ncols, self.nnz())?;
        if self.nnz() <= 32 {
            f.debug_list().entries(self.iter()).finish()?;
        }
        Ok(())
    }
}

impl SparseOperator {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        SparseOperator {
            nrows,
            ncols,
            rows: vec![Vec::new(); nrows],
            drop_threshold: 0.0,
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![ONE; dim])
    }

    pub fn diagonal(values: &[C64]) -> Self {
        let mut op = Self::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            if *v != ZERO {
                op.rows[i].push((i, *v));
            }
        }
        op
    }

    /// Builds from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, C64)>,
    ) -> Result<Self> {
        let mut builder = SparseBuilder::new(nrows, ncols);
        for (r, c, v) in triplets {
            builder.try_add(r, c, v)?;
        }
        Ok(builder.build())
    }

    /// Rank-one `|row><col|` with unit amplitude.
    pub fn unit(nrows: usize, ncols: usize, row: usize, col: usize) -> Self {
        let mut op = Self::zeros(nrows, ncols);
        op.rows[row].push((col, ONE));
        op
    }

    pub fn from_dense(dense: &DenseOperator) -> Self {
        let n = dense.dim();
        let mut op = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let v = dense.get(i, j);
                if v != ZERO {
                    op.rows[i].push((j, v));
                }
            }
        }
        op
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nrows, self.ncols)
    }

    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }

    pub fn drop_threshold(&self) -> f64 {
        self.drop_threshold
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn row(&self, i: usize) -> &[(usize, C64)] {
        &self.rows[i]
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        match self.rows[i].binary_search_by_key(&j, |&(c, _)| c) {
            Ok(pos) => self.rows[i][pos].1,
            Err(_) => ZERO,
        }
    }

    /// Iterates over stored entries in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |&(j, v)| (i, j, v)))
    }

    /// Overwrites a single entry, keeping the drop invariant.
    pub fn set(&mut self, i: usize, j: usize, value: C64) -> Result<()> {
        if i >= self.nrows || j >= self.ncols {
            return Err(LinalgError::IndexOutOfRange {
                row: i,
                col: j,
                shape: self.shape(),
            });
        }
        let keep = value.norm() > self.drop_threshold && value != ZERO;
        let row = &mut self.rows[i];
        match row.binary_search_by_key(&j, |&(c, _)| c) {
            Ok(pos) if keep => row[pos].1 = value,
            Ok(pos) => {
                row.remove(pos);
            }
            Err(pos) if keep => row.insert(pos, (j, value)),
            Err(_) => {}
        }
        Ok(())
    }

    /// Sets the drop threshold and removes entries at or below it.
    pub fn with_drop_threshold(mut self, threshold: f64) -> Self {
        self.drop_threshold = threshold;
        for row in &mut self.rows {
            row.retain(|(_, v)| v.norm() > threshold);
        }
        self
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        let mut out = self.clone();
        for row in &mut out.rows {
            for entry in row.iter_mut() {
                entry.1 = f(entry.1);
            }
            row.retain(|(_, v)| *v != ZERO);
        }
        out
    }

    pub fn scale(&self, s: C64) -> Self {
        if s == ZERO {
            return Self::zeros(self.nrows, self.ncols);
        }
        self.map(|v| v * s)
    }

    pub fn conj(&self) -> Self {
        self.map(|v| v.conj())
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.ncols, self.nrows);
        for (i, j, v) in self.iter() {
            out.rows[j].push((i, v));
        }
        out.drop_threshold = self.drop_threshold;
        out
    }

    pub fn dagger(&self) -> Self {
        self.transpose().conj()
    }

    pub fn trace(&self) -> C64 {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).sum()
    }

    pub fn norms(&self) -> Norms {
        Norms::accumulate(self.rows.iter().flat_map(|r| r.iter().map(|(_, v)| v)))
    }

    pub fn frobenius(&self) -> f64 {
        self.norms().frobenius
    }

    /// Matrix product `self * rhs`.
    pub fn compose(&self, rhs: &SparseOperator) -> Result<SparseOperator> {
        if self.ncols != rhs.nrows {
            return Err(LinalgError::DimensionMismatch {
                op: "compose",
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        let mut out = Self::zeros(self.nrows, rhs.ncols);
        let mut acc = vec![ZERO; rhs.ncols];
        let mut touched = vec![false; rhs.ncols];
        let mut cols: Vec<usize> = Vec::new();
        for (i, row) in self.rows.iter().enumerate() {
            for &(k, a) in row {
                for &(j, b) in &rhs.rows[k] {
                    if !touched[j] {
                        touched[j] = true;
                        cols.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            cols.sort_unstable();
            let out_row = &mut out.rows[i];
            for &j in &cols {
                let v = acc[j];
                if v != ZERO {
                    out_row.push((j, v));
                }
                acc[j] = ZERO;
                touched[j] = false;
            }
            cols.clear();
        }
        Ok(out)
    }

    fn check_same_shape(&self, rhs: &SparseOperator, op: &'static str) -> Result<()> {
        if self.shape() != rhs.shape() {
            return Err(LinalgError::DimensionMismatch {
                op,
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        Ok(())
    }

    fn check_square_pair(&self, rhs: &SparseOperator, op: &'static str) -> Result<()> {
        if !self.is_square() {
            return Err(LinalgError::NotSquare {
                op,
                shape: self.shape(),
            });
        }
        self.check_same_shape(rhs, op)
    }

    /// Linear combination `a*self + b*rhs`.
    pub fn axpby(&self, a: C64, rhs: &SparseOperator, b: C64) -> Result<SparseOperator> {
        self.check_same_shape(rhs, "axpby")?;
        let mut out = Self::zeros(self.nrows, self.ncols);
        for i in 0..self.nrows {
            let (l, r) = (&self.rows[i], &rhs.rows[i]);
            let (mut p, mut q) = (0, 0);
            let row = &mut out.rows[i];
            while p < l.len() || q < r.len() {
                let (j, v) = match (l.get(p), r.get(q)) {
                    (Some(&(jl, vl)), Some(&(jr, vr))) if jl == jr => {
                        p += 1;
                        q += 1;
                        (jl, a * vl + b * vr)
                    }
                    (Some(&(jl, vl)), Some(&(jr, _))) if jl < jr => {
                        p += 1;
                        (jl, a * vl)
                    }
                    (Some(_), Some(&(jr, vr))) | (None, Some(&(jr, vr))) => {
                        q += 1;
                        (jr, b * vr)
                    }
                    (Some(&(jl, vl)), None) => {
                        p += 1;
                        (jl, a * vl)
                    }
                    (None, None) => unreachable!(),
                };
                if v != ZERO {
                    row.push((j, v));
                }
            }
        }
        Ok(out)
    }

    pub fn try_add(&self, rhs: &SparseOperator) -> Result<SparseOperator> {
        self.axpby(ONE, rhs, ONE)
    }

    pub fn try_sub(&self, rhs: &SparseOperator) -> Result<SparseOperator> {
        self.axpby(ONE, rhs, -ONE)
    }

    /// `[self, rhs] = self*rhs - rhs*self`.
    pub fn commutator(&self, rhs: &SparseOperator) -> Result<SparseOperator> {
        self.check_square_pair(rhs, "commutator")?;
        self.compose(rhs)?.try_sub(&rhs.compose(self)?)
    }

    /// `{self, rhs} = self*rhs + rhs*self`.
    pub fn anticommutator(&self, rhs: &SparseOperator) -> Result<SparseOperator> {
        self.check_square_pair(rhs, "anticommutator")?;
        self.compose(rhs)?.try_add(&rhs.compose(self)?)
    }

    /// Tensor product with row-major combined indices.
    pub fn kron(&self, rhs: &SparseOperator) -> Result<SparseOperator> {
        let rows = self.nrows.checked_mul(rhs.nrows);
        let cols = self.ncols.checked_mul(rhs.ncols);
        match (rows, cols) {
            (Some(r), Some(c)) if r <= MAX_KRON_DIM && c <= MAX_KRON_DIM => {}
            _ => {
                return Err(LinalgError::DimensionOverflow {
                    rows: self.nrows.saturating_mul(rhs.nrows),
                    cols: self.ncols.saturating_mul(rhs.ncols),
                    limit: MAX_KRON_DIM,
                })
            }
        }
        let mut out = Self::zeros(self.nrows * rhs.nrows, self.ncols * rhs.ncols);
        for (ia, row_a) in self.rows.iter().enumerate() {
            for (ib, row_b) in rhs.rows.iter().enumerate() {
                let row = &mut out.rows[ia * rhs.nrows + ib];
                row.reserve(row_a.len() * row_b.len());
                for &(ja, va) in row_a {
                    for &(jb, vb) in row_b {
                        row.push((ja * rhs.ncols + jb, va * vb));
                    }
                }
            }
        }
        Ok(out)
    }

    /// Restricts to the given row and column index sets, preserving order.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> SparseOperator {
        let mut col_map = vec![usize::MAX; self.ncols];
        for (new, &old) in cols.iter().enumerate() {
            col_map[old] = new;
        }
        let mut out = Self::zeros(rows.len(), cols.len());
        for (new_i, &old_i) in rows.iter().enumerate() {
            let row = &mut out.rows[new_i];
            for &(j, v) in &self.rows[old_i] {
                if col_map[j] != usize::MAX {
                    row.push((col_map[j], v));
                }
            }
            row.sort_unstable_by_key(|e| e.0);
        }
        out
    }

    /// `D * self * D^{-1}` for a diagonal `D` given by its entries.
    pub fn diagonal_similarity(&self, d: &[C64]) -> SparseOperator {
        let mut out = self.clone();
        for (i, row) in out.rows.iter_mut().enumerate() {
            for entry in row.iter_mut() {
                entry.1 = entry.1 * d[i] / d[entry.0];
            }
        }
        out
    }

    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.ncols {
            return Err(LinalgError::DimensionMismatch {
                op: "apply",
                left: self.shape(),
                right: (v.len(), 1),
            });
        }
        Ok(self
            .rows
            .iter()
            .map(|row| row.iter().map(|&(j, a)| a * v[j]).sum())
            .collect())
    }

    pub fn to_dense(&self) -> DenseOperator {
        assert!(self.is_square(), "to_dense requires a square operator");
        let mut d = DenseOperator::zeros(self.nrows);
        for (i, j, v) in self.iter() {
            d.set(i, j, v);
        }
        d
    }

    /// `self * rhs` with a dense right factor.
    pub fn mul_dense(&self, rhs: &DenseOperator) -> Result<DenseOperator> {
        if self.ncols != rhs.dim() || !self.is_square() {
            return Err(LinalgError::DimensionMismatch {
                op: "mul_dense",
                left: self.shape(),
                right: (rhs.dim(), rhs.dim()),
            });
        }
        let n = rhs.dim();
        let mut out = DenseOperator::zeros(n);
        for (i, row) in self.rows.iter().enumerate() {
            let dst = &mut out.data[i * n..(i + 1) * n];
            for &(k, a) in row {
                let src = &rhs.data[k * n..(k + 1) * n];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * s;
                }
            }
        }
        Ok(out)
    }

    /// Largest entrywise distance to `rhs`.
    pub fn max_abs_diff(&self, rhs: &SparseOperator) -> Result<f64> {
        Ok(self.try_sub(rhs)?.norms().max_abs)
    }
}

/// Accumulating builder for sparse operators.
#[derive(Debug, Clone)]
pub struct SparseBuilder {
    nrows: usize,
    ncols: usize,
    rows: Vec<Vec<(usize, C64)>>,
}

impl SparseBuilder {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        SparseBuilder {
            nrows,
            ncols,
            rows: vec![Vec::new(); nrows],
        }
    }

    pub fn try_add(&mut self, row: usize, col: usize, value: C64) -> Result<()> {
        if row >= self.nrows || col >= self.ncols {
            return Err(LinalgError::IndexOutOfRange {
                row,
                col,
                shape: (self.nrows, self.ncols),
            });
        }
        self.rows[row].push((col, value));
        Ok(())
    }

    /// Adds an entry; panics on an out-of-range index.
    pub fn add(&mut self, row: usize, col: usize, value: C64) {
        self.try_add(row, col, value).expect("SparseBuilder::add");
    }

    pub fn build(self) -> SparseOperator {
        let mut rows = self.rows;
        for row in &mut rows {
            row.sort_unstable_by_key(|e| e.0);
            let mut merged: Vec<(usize, C64)> = Vec::with_capacity(row.len());
            for &(j, v) in row.iter() {
                match merged.last_mut() {
                    Some(last) if last.0 == j => last.1 += v,
                    _ => merged.push((j, v)),
                }
            }
            merged.retain(|(_, v)| *v != ZERO);
            *row = merged;
        }
        SparseOperator {
            nrows: self.nrows,
            ncols: self.ncols,
            rows,
            drop_threshold: 0.0,
        }
    }
}

impl Mul for &SparseOperator {
    type Output = SparseOperator;
    fn mul(self, rhs: &SparseOperator) -> SparseOperator {
        self.compose(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Add for &SparseOperator {
    type Output = SparseOperator;
    fn add(self, rhs: &SparseOperator) -> SparseOperator {
        self.try_add(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Sub for &SparseOperator {
    type Output = SparseOperator;
    fn sub(self, rhs: &SparseOperator) -> SparseOperator {
        self.try_sub(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Neg for &SparseOperator {
    type Output = SparseOperator;
    fn neg(self) -> SparseOperator {
        self.scale(-ONE)
    }
}

impl Mul<C64> for &SparseOperator {
    type Output = SparseOperator;
    fn mul(self, s: C64) -> SparseOperator {
        self.scale(s)
    }
}

impl Mul<f64> for &SparseOperator {
    type Output = SparseOperator;
    fn mul(self, s: f64) -> SparseOperator {
        self.scale(C64::new(s, 0.0))
    }
}

/// Sum of many same-shaped sparse operators in one pass.
pub fn sum_sparse<'a>(
    nrows: usize,
    ncols: usize,
    terms: impl IntoIterator<Item = (C64, &'a SparseOperator)>,
) -> SparseOperator {
    let mut b = SparseBuilder::new(nrows, ncols);
    for (c, op) in terms {
        assert_eq!(op.shape(), (nrows, ncols), "sum_sparse: shape mismatch");
        for (i, j, v) in op.iter() {
            b.add(i, j, c * v);
        }
    }
    b.build()
}

// ---------------------------------------------------------------------------
// Dense
// ---------------------------------------------------------------------------

/// Square row-major dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct DenseOperator {
    dim: usize,
    data: Vec<C64>,
}

impl fmt::Debug for DenseOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DenseOperator({}x{})", self.dim, self.dim)
    }
}

impl DenseOperator {
    pub fn zeros(dim: usize) -> Self {
        DenseOperator {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut d = Self::zeros(dim);
        for i in 0..dim {
            d.data[i * dim + i] = ONE;
        }
        d
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> C64) -> Self {
        let mut d = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                d.data[i * dim + j] = f(i, j);
            }
        }
        d
    }

    pub fn from_row_major(dim: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(LinalgError::DimensionMismatch {
                op: "from_row_major",
                left: (dim, dim),
                right: (data.len(), 1),
            });
        }
        Ok(DenseOperator { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.dim + j] = v;
    }

    fn check_dims(&self, rhs: &DenseOperator, op: &'static str) -> Result<()> {
        if self.dim != rhs.dim {
            return Err(LinalgError::DimensionMismatch {
                op,
                left: (self.dim, self.dim),
                right: (rhs.dim, rhs.dim),
            });
        }
        Ok(())
    }

    pub fn compose(&self, rhs: &DenseOperator) -> Result<DenseOperator> {
        self.check_dims(rhs, "compose")?;
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            let dst = &mut out.data[i * n..(i + 1) * n];
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                let src = &rhs.data[k * n..(k + 1) * n];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * s;
                }
            }
        }
        Ok(out)
    }

    /// `self * rhs` with a sparse right factor.
    pub fn mul_sparse(&self, rhs: &SparseOperator) -> Result<DenseOperator> {
        if rhs.shape() != (self.dim, self.dim) {
            return Err(LinalgError::DimensionMismatch {
                op: "mul_sparse",
                left: (self.dim, self.dim),
                right: rhs.shape(),
            });
        }
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            let src = &self.data[i * n..(i + 1) * n];
            let dst = &mut out.data[i * n..(i + 1) * n];
            for (k, &a) in src.iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                for &(j, b) in rhs.row(k) {
                    dst[j] += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn axpby(&self, a: C64, rhs: &DenseOperator, b: C64) -> Result<DenseOperator> {
        self.check_dims(rhs, "axpby")?;
        Ok(DenseOperator {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        })
    }

    pub fn try_add(&self, rhs: &DenseOperator) -> Result<DenseOperator> {
        self.axpby(ONE, rhs, ONE)
    }

    pub fn try_sub(&self, rhs: &DenseOperator) -> Result<DenseOperator> {
        self.axpby(ONE, rhs, -ONE)
    }

    pub fn commutator(&self, rhs: &DenseOperator) -> Result<DenseOperator> {
        self.compose(rhs)?.try_sub(&rhs.compose(self)?)
    }

    pub fn anticommutator(&self, rhs: &DenseOperator) -> Result<DenseOperator> {
        self.compose(rhs)?.try_add(&rhs.compose(self)?)
    }

    pub fn kron(&self, rhs: &DenseOperator) -> Result<DenseOperator> {
        let dim = self
            .dim
            .checked_mul(rhs.dim)
            .filter(|&d| d <= MAX_KRON_DIM)
            .ok_or(LinalgError::DimensionOverflow {
                rows: self.dim.saturating_mul(rhs.dim),
                cols: self.dim.saturating_mul(rhs.dim),
                limit: MAX_KRON_DIM,
            })?;
        let mut out = Self::zeros(dim);
        let (na, nb) = (self.dim, rhs.dim);
        for ia in 0..na {
            for ja in 0..na {
                let a = self.data[ia * na + ja];
                if a == ZERO {
                    continue;
                }
                for ib in 0..nb {
                    for jb in 0..nb {
                        out.data[(ia * nb + ib) * dim + ja * nb + jb] = a * rhs.data[ib * nb + jb];
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn scale(&self, s: C64) -> DenseOperator {
        DenseOperator {
            dim: self.dim,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn dagger(&self) -> DenseOperator {
        Self::from_fn(self.dim, |i, j| self.get(j, i).conj())
    }

    pub fn transpose(&self) -> DenseOperator {
        Self::from_fn(self.dim, |i, j| self.get(j, i))
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn norms(&self) -> Norms {
        Norms::accumulate(self.data.iter())
    }

    pub fn frobenius(&self) -> f64 {
        self.norms().frobenius
    }

    /// `(A + A^dagger)/2`.
    pub fn hermitian_part(&self) -> DenseOperator {
        Self::from_fn(self.dim, |i, j| 0.5 * (self.get(i, j) + self.get(j, i).conj()))
    }

    pub fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.data)
    }

    pub fn from_nalgebra(m: &DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(LinalgError::NotSquare {
                op: "from_nalgebra",
                shape: (m.nrows(), m.ncols()),
            });
        }
        Ok(Self::from_fn(m.nrows(), |i, j| m[(i, j)]))
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let eig = self.hermitian_part().to_nalgebra().symmetric_eigenvalues();
        let mut v: Vec<f64> = eig.iter().copied().collect();
        v.sort_by(f64::total_cmp);
        v
    }
}

impl Mul for &DenseOperator {
    type Output = DenseOperator;
    fn mul(self, rhs: &DenseOperator) -> DenseOperator {
        self.compose(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Add for &DenseOperator {
    type Output = DenseOperator;
    fn add(self, rhs: &DenseOperator) -> DenseOperator {
        self.try_add(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Sub for &DenseOperator {
    type Output = DenseOperator;
    fn sub(self, rhs: &DenseOperator) -> DenseOperator {
        self.try_sub(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}
