//! Flat parameter vectors and small dense matrices.
//!
//! All model coordinates live in a [`ParamVector`] (a flat `Vec<f64>`); dense
//! Hessians for `d <= 64` use [`SquareMatrix`]. Everything is 64-bit: the
//! verification oracles compare values at 1e-12 tolerances.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest dimension for which dense Hessians are materialized.
pub const MAX_DENSE_DIM: usize = 64;

/// A flat vector of model parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamVector(Vec<f64>);

impl ParamVector {
    pub fn new(values: Vec<f64>) -> Self {
        ParamVector(values)
    }

    pub fn zeros(dim: usize) -> Self {
        ParamVector(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    pub fn dot(&self, other: &ParamVector) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm_l2(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// `self + alpha * other`, allocating a new vector.
    pub fn axpy(&self, alpha: f64, other: &ParamVector) -> ParamVector {
        debug_assert_eq!(self.dim(), other.dim());
        ParamVector(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + alpha * b)
                .collect(),
        )
    }

    /// `self += alpha * other` in place.
    pub fn axpy_mut(&mut self, alpha: f64, other: &ParamVector) {
        debug_assert_eq!(self.dim(), other.dim());
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += alpha * b;
        }
    }

    pub fn scale(&self, alpha: f64) -> ParamVector {
        ParamVector(self.0.iter().map(|a| a * alpha).collect())
    }

    pub fn scale_mut(&mut self, alpha: f64) {
        for a in &mut self.0 {
            *a *= alpha;
        }
    }

    pub fn add(&self, other: &ParamVector) -> ParamVector {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &ParamVector) -> ParamVector {
        self.axpy(-1.0, other)
    }

    pub fn distance(&self, other: &ParamVector) -> f64 {
        self.sub(other).norm_l2()
    }

    /// Mean of a non-empty set of equal-dimension vectors.
    pub fn mean(vectors: &[ParamVector]) -> Result<ParamVector> {
        let first = vectors
            .first()
            .ok_or_else(|| Error::Domain("mean of an empty vector set".into()))?;
        let mut acc = ParamVector::zeros(first.dim());
        for v in vectors {
            if v.dim() != first.dim() {
                return Err(Error::Dimension(format!(
                    "mean over vectors of dimension {} and {}",
                    first.dim(),
                    v.dim()
                )));
            }
            acc.axpy_mut(1.0, v);
        }
        acc.scale_mut(1.0 / vectors.len() as f64);
        Ok(acc)
    }
}

impl std::ops::Index<usize> for ParamVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl std::ops::IndexMut<usize> for ParamVector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl From<Vec<f64>> for ParamVector {
    fn from(values: Vec<f64>) -> Self {
        ParamVector(values)
    }
}

/// Dense row-major square matrix, used for quadratic task Hessians and the
/// `d <= 64` exact-Hessian paths.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SquareMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(n: usize) -> Self {
        SquareMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = SquareMatrix::zeros(n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = SquareMatrix::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.set(i, i, d);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn add_at(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] += v;
    }

    pub fn matvec(&self, v: &ParamVector) -> ParamVector {
        debug_assert_eq!(self.n, v.dim());
        let out = self
            .data
            .chunks_exact(self.n)
            .map(|row| row.iter().zip(v.as_slice()).map(|(a, b)| a * b).sum())
            .collect();
        ParamVector::new(out)
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    /// `max_ij |A_ij - A_ji|`, the symmetry defect.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn add_scaled_mut(&mut self, alpha: f64, other: &SquareMatrix) {
        debug_assert_eq!(self.n, other.n);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
    }

    pub fn scale_mut(&mut self, alpha: f64) {
        for a in &mut self.data {
            *a *= alpha;
        }
    }

    /// `Q D Q^T` for an orthogonal `Q` given as columns and a diagonal `D`.
    pub fn from_eigen(q_columns: &[Vec<f64>], eigenvalues: &[f64]) -> Self {
        let n = eigenvalues.len();
        let mut m = SquareMatrix::zeros(n);
        for (col, &lambda) in q_columns.iter().zip(eigenvalues) {
            for i in 0..n {
                for j in 0..n {
                    m.add_at(i, j, lambda * col[i] * col[j]);
                }
            }
        }
        m
    }
}
