//! Real matrices on an occupation basis.

use std::fmt::Write as _;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    matrix: DMatrix<f64>,
    hermitian: bool,
    number_conserving: bool,
}

impl FockOperator {
    pub fn new(matrix: DMatrix<f64>, hermitian: bool, number_conserving: bool) -> Self {
        assert!(matrix.is_square(), "Fock operators are square");
        Self { matrix, hermitian, number_conserving }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::new(DMatrix::zeros(dim, dim), true, true)
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(DMatrix::identity(dim, dim), true, true)
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(diag)), true, true)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn is_number_conserving(&self) -> bool {
        self.number_conserving
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.matrix[(row, col)]
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.matrix.diagonal().iter().copied().collect()
    }

    pub fn transpose(&self) -> Self {
        Self::new(self.matrix.transpose(), self.hermitian, self.number_conserving)
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::new(&self.matrix * c, self.hermitian, self.number_conserving)
    }

    /// Adds `c` to every diagonal entry.
    pub fn shift(&self, c: f64) -> Self {
        let mut m = self.matrix.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += c;
        }
        Self::new(m, self.hermitian, self.number_conserving)
    }

    /// Largest `|A - Aᵀ|` entry relative to the largest `|A|` entry (absolute when A = 0).
    pub fn hermiticity_residual(&self) -> f64 {
        let scale = self.max_abs().max(1.0);
        let d = &self.matrix - self.matrix.transpose();
        d.amax() / scale
    }

    pub fn require_hermitian(&self) -> Result<()> {
        let residual = self.hermiticity_residual();
        if residual > 1e-12 {
            return Err(Error::NotHermitian { residual });
        }
        Ok(())
    }

    pub fn is_diagonal(&self) -> bool {
        let n = self.dim();
        (0..n).all(|j| (0..n).all(|i| i == j || self.matrix[(i, j)] == 0.0))
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.amax()
    }

    pub fn min_entry(&self) -> f64 {
        self.matrix.min()
    }

    pub fn max_entry(&self) -> f64 {
        self.matrix.max()
    }

    /// Max-norm distance `max |A_ij - B_ij|`.
    pub fn distance(&self, other: &Self) -> f64 {
        (&self.matrix - &other.matrix).amax()
    }

    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.matrix * v
    }

    /// Nonzero entries as `(row, col, value)` in column-major order.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for j in 0..self.matrix.ncols() {
            for i in 0..self.matrix.nrows() {
                let v = self.matrix[(i, j)];
                if v != 0.0 {
                    out.push((i, j, v));
                }
            }
        }
        out
    }

    /// Coordinate-list text: one `row col value` triple per line, values with
    /// 17 significant digits.
    pub fn to_coordinate_text(&self) -> String {
        let mut s = String::new();
        for (i, j, v) in self.triplets() {
            writeln!(s, "{i} {j} {v:.16e}").unwrap();
        }
        s
    }

    pub fn from_coordinate_text(dim: usize, text: &str) -> Result<Self> {
        let mut m = DMatrix::zeros(dim, dim);
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let bad = || Error::InvalidArgument(format!("malformed triple on line {}: {line:?}", lineno + 1));
            let mut parts = line.split_whitespace();
            let i: usize = parts.next().and_then(|p| p.parse().ok()).ok_or_else(bad)?;
            let j: usize = parts.next().and_then(|p| p.parse().ok()).ok_or_else(bad)?;
            let v: f64 = parts.next().and_then(|p| p.parse().ok()).ok_or_else(bad)?;
            if i >= dim || j >= dim {
                return Err(bad());
            }
            m[(i, j)] = v;
        }
        let hermitian = (&m - m.transpose()).amax() == 0.0;
        Ok(Self::new(m, hermitian, false))
    }

    /// Sparse row view for repeated products against dense matrices.
    pub fn sparse(&self) -> SparseOperator {
        let n = self.dim();
        let mut rows = vec![Vec::new(); n];
        for (i, j, v) in self.triplets() {
            rows[i].push((j, v));
        }
        SparseOperator { dim: n, rows }
    }
}

/// Row-compressed copy of a [`FockOperator`].
#[derive(Debug, Clone)]
pub struct SparseOperator {
    dim: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

impl SparseOperator {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// `self * rhs`.
    pub fn mul_dense(&self, rhs: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.dim, rhs.ncols());
        for (i, row) in self.rows.iter().enumerate() {
            for &(k, v) in row {
                for c in 0..rhs.ncols() {
                    out[(i, c)] += v * rhs[(k, c)];
                }
            }
        }
        out
    }
}

fn combine(a: &FockOperator, b: &FockOperator, m: DMatrix<f64>) -> FockOperator {
    FockOperator::new(m, a.hermitian && b.hermitian, a.number_conserving && b.number_conserving)
}

impl Add for &FockOperator {
    type Output = FockOperator;
    fn add(self, rhs: &FockOperator) -> FockOperator {
        combine(self, rhs, &self.matrix + &rhs.matrix)
    }
}

impl Sub for &FockOperator {
    type Output = FockOperator;
    fn sub(self, rhs: &FockOperator) -> FockOperator {
        combine(self, rhs, &self.matrix - &rhs.matrix)
    }
}

impl Mul for &FockOperator {
    type Output = FockOperator;
    fn mul(self, rhs: &FockOperator) -> FockOperator {
        // products of hermitian operators are hermitian only when they commute
        FockOperator::new(&self.matrix * &rhs.matrix, false, self.number_conserving && rhs.number_conserving)
    }
}

impl Neg for &FockOperator {
    type Output = FockOperator;
    fn neg(self) -> FockOperator {
        self.scale(-1.0)
    }
}
