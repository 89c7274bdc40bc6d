//! Weighted linear systems over 0-1 variables.
//!
//! A [`SparseSystem`] holds the equations `Σⱼ αᵢⱼ ξⱼ = βᵢ` together with positive weights
//! `γᵢ`, stored column-major since every certificate and enumeration kernel walks columns.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `m × n` system with column-major sparse coefficients, right-hand sides and weights.
#[derive(Clone, Debug)]
pub struct SparseSystem<T> {
    n_rows: usize,
    columns: Vec<Vec<(usize, T)>>,
    beta: Vec<T>,
    gamma: Vec<T>,
    row_counts: OnceLock<Vec<usize>>,
}

impl<T: Scalar> PartialEq for SparseSystem<T> {
    fn eq(&self, other: &Self) -> bool {
        self.n_rows == other.n_rows
            && self.columns == other.columns
            && self.beta == other.beta
            && self.gamma == other.gamma
    }
}

impl<T: Scalar> SparseSystem<T> {
    /// Builds a system from `(row, column, coefficient)` triples.
    ///
    /// Zero coefficients are dropped; a repeated `(row, column)` pair is an error.
    pub fn new(
        n_rows: usize,
        n_cols: usize,
        entries: impl IntoIterator<Item = (usize, usize, T)>,
        beta: Vec<T>,
        gamma: Vec<T>,
    ) -> Result<Self> {
        let mut columns: Vec<Vec<(usize, T)>> = vec![Vec::new(); n_cols];
        for (i, j, a) in entries {
            if i >= n_rows {
                return Err(Error::IndexOutOfRange { index: i, size: n_rows });
            }
            if j >= n_cols {
                return Err(Error::IndexOutOfRange { index: j, size: n_cols });
            }
            if !a.is_finite() {
                return Err(Error::InvalidInput(format!("non-finite coefficient at ({i}, {j})")));
            }
            columns[j].push((i, a));
        }
        for (j, col) in columns.iter_mut().enumerate() {
            col.sort_by_key(|&(i, _)| i);
            if let Some(w) = col.windows(2).find(|w| w[0].0 == w[1].0) {
                return Err(Error::InvalidInput(format!("duplicate entry ({}, {j})", w[0].0)));
            }
            col.retain(|&(_, a)| a != T::zero());
        }
        Self::from_columns(n_rows, columns, beta, gamma)
    }

    /// Builds a system from already sorted columns.
    pub fn from_columns(
        n_rows: usize,
        columns: Vec<Vec<(usize, T)>>,
        beta: Vec<T>,
        gamma: Vec<T>,
    ) -> Result<Self> {
        if beta.len() != n_rows {
            return Err(Error::DimensionMismatch { expected: n_rows, got: beta.len() });
        }
        if gamma.len() != n_rows {
            return Err(Error::DimensionMismatch { expected: n_rows, got: gamma.len() });
        }
        if let Some(i) = gamma.iter().position(|g| !(*g > T::zero() && g.is_finite())) {
            return Err(Error::InvalidInput(format!("gamma[{i}] must be positive and finite")));
        }
        if let Some(i) = beta.iter().position(|b| !b.is_finite()) {
            return Err(Error::InvalidInput(format!("beta[{i}] must be finite")));
        }
        let mut columns = columns;
        for (j, col) in columns.iter_mut().enumerate() {
            col.retain(|&(_, a)| a != T::zero());
            if col.iter().any(|&(i, _)| i >= n_rows) {
                return Err(Error::InvalidInput(format!("column {j} has a row index out of range")));
            }
            if !col.windows(2).all(|w| w[0].0 < w[1].0) {
                return Err(Error::InvalidInput(format!("column {j} rows not strictly increasing")));
            }
        }
        Ok(Self { n_rows, columns, beta, gamma, row_counts: OnceLock::new() })
    }

    /// Builds a system from a dense row-major matrix.
    pub fn from_dense(rows: &[Vec<T>], n_cols: usize, beta: Vec<T>, gamma: Vec<T>) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n_cols {
                return Err(Error::DimensionMismatch { expected: n_cols, got: row.len() });
            }
            entries.extend(row.iter().enumerate().map(|(j, &a)| (i, j, a)));
        }
        Self::new(rows.len(), n_cols, entries, beta, gamma)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, j: usize) -> &[(usize, T)] {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Vec<(usize, T)>] {
        &self.columns
    }

    pub fn beta(&self) -> &[T] {
        &self.beta
    }

    pub fn gamma(&self) -> &[T] {
        &self.gamma
    }

    /// The coefficient `αᵢⱼ` (zero when not stored).
    pub fn coefficient(&self, i: usize, j: usize) -> T {
        self.columns[j]
            .binary_search_by_key(&i, |&(r, _)| r)
            .map(|pos| self.columns[j][pos].1)
            .unwrap_or_else(|_| T::zero())
    }

    /// Row-major triples `(i, j, αᵢⱼ)` sorted by column then row.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        self.columns
            .iter()
            .enumerate()
            .flat_map(|(j, col)| col.iter().map(move |&(i, a)| (i, j, a)))
    }

    /// The same system with the weights replaced.
    pub fn with_gamma(&self, gamma: Vec<T>) -> Result<Self> {
        Self::from_columns(self.n_rows, self.columns.clone(), self.beta.clone(), gamma)
    }

    /// `c`: the largest number of nonzero entries in any column (0 for an empty matrix).
    pub fn column_max_nonzeros(&self) -> usize {
        self.columns.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// `rᵢ`: the number of nonzero entries in each row.
    pub fn row_nonzeros(&self) -> &[usize] {
        self.row_counts.get_or_init(|| {
            let mut counts = vec![0; self.n_rows];
            for col in &self.columns {
                for &(i, _) in col {
                    counts[i] += 1;
                }
            }
            counts
        })
    }

    /// Row residuals `ℓᵢ(x) − βᵢ` for a 0-1 vector.
    pub fn residuals(&self, x: &[bool]) -> Result<Vec<T>> {
        if x.len() != self.n_cols() {
            return Err(Error::DimensionMismatch { expected: self.n_cols(), got: x.len() });
        }
        let mut r: Vec<T> = self.beta.iter().map(|&b| -b).collect();
        for (col, _) in self.columns.iter().zip(x).filter(|(_, &on)| on) {
            for &(i, a) in col {
                r[i] = r[i] + a;
            }
        }
        Ok(r)
    }

    /// `Σᵢ γᵢ (ℓᵢ(x) − βᵢ)²`; zero exactly on the solutions of the system.
    pub fn penalty(&self, x: &[bool]) -> Result<T> {
        let r = self.residuals(x)?;
        Ok(self.weighted_square(&r))
    }

    /// Penalty of the all-zero vector, `Σᵢ γᵢ βᵢ²`.
    pub fn penalty_at_zero(&self) -> T {
        self.beta.iter().zip(&self.gamma).map(|(&b, &g)| g * b * b).sum()
    }

    pub(crate) fn weighted_square(&self, residuals: &[T]) -> T {
        residuals.iter().zip(&self.gamma).map(|(&r, &g)| g * r * r).sum()
    }

    /// Conditions on the fixed coordinates: fixed columns are removed, each column fixed
    /// to 1 is subtracted from the right-hand sides, and the free columns keep their
    /// relative order. Rows are never removed, so all-zero rows keep contributing
    /// `exp{−γᵢβᵢ²}`.
    pub fn restrict(&self, assignment: &PartialAssignment) -> Result<Self> {
        assignment.check_range(self.n_cols())?;
        let mut beta = self.beta.clone();
        let mut columns = Vec::with_capacity(self.n_cols() - assignment.len());
        for (j, col) in self.columns.iter().enumerate() {
            match assignment.get(j) {
                Some(true) => {
                    for &(i, a) in col {
                        beta[i] = beta[i] - a;
                    }
                }
                Some(false) => {}
                None => columns.push(col.clone()),
            }
        }
        Self::from_columns(self.n_rows, columns, beta, self.gamma.clone())
    }
}

/// Bernoulli parameters `0 < pⱼ < 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityVector<T>(Vec<T>);

impl<T: Scalar> ProbabilityVector<T> {
    pub fn new(p: Vec<T>) -> Result<Self> {
        if let Some(j) = p.iter().position(|&v| !(v > T::zero() && v < T::one())) {
            return Err(Error::InvalidInput(format!("p[{j}] = {} is not in (0, 1)", p[j])));
        }
        Ok(Self(p))
    }

    pub fn uniform(n: usize, p: T) -> Result<Self> {
        Self::new(vec![p; n])
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The evaluation point `xⱼ = pⱼ / (1 − pⱼ)`.
    pub fn odds(&self) -> Vec<T> {
        self.0.iter().map(|&p| p / (T::one() - p)).collect()
    }

    /// `Σⱼ ln(1 − pⱼ)`.
    pub fn log_complement_product(&self) -> T {
        self.0.iter().map(|&p| (-p).ln_1p()).sum()
    }

    /// The entries at positions not fixed by `assignment`, in order.
    pub fn restrict(&self, assignment: &PartialAssignment) -> Result<Self> {
        assignment.check_range(self.len())?;
        Ok(Self(
            self.0
                .iter()
                .enumerate()
                .filter(|(j, _)| assignment.get(*j).is_none())
                .map(|(_, &p)| p)
                .collect(),
        ))
    }
}

/// A set of constraints `ξⱼ = 0` or `ξⱼ = 1`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PartialAssignment {
    fixed: BTreeMap<usize, bool>,
}

impl PartialAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds from pairs; a repeated index is an error.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, bool)>) -> Result<Self> {
        let mut a = Self::new();
        for (j, bit) in pairs {
            if a.fixed.insert(j, bit).is_some() {
                return Err(Error::InvalidInput(format!("variable {j} fixed twice")));
            }
        }
        Ok(a)
    }

    /// Fixes every coordinate to the given bits.
    pub fn full(bits: &[bool]) -> Self {
        Self { fixed: bits.iter().copied().enumerate().collect() }
    }

    pub fn fix(&mut self, j: usize, bit: bool) -> &mut Self {
        self.fixed.insert(j, bit);
        self
    }

    pub fn get(&self, j: usize) -> Option<bool> {
        self.fixed.get(&j).copied()
    }

    pub fn len(&self) -> usize {
        self.fixed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fixed.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, bool)> + '_ {
        self.fixed.iter().map(|(&j, &b)| (j, b))
    }

    fn check_range(&self, n: usize) -> Result<()> {
        match self.fixed.keys().next_back() {
            Some(&j) if j >= n => Err(Error::IndexOutOfRange { index: j, size: n }),
            _ => Ok(()),
        }
    }
}
