use std::ops::{Add, Index, Neg, Sub};

use serde::{Deserialize, Serialize};

use super::C64;
use crate::error::{Error, Result};

/// A point of the universal cover `C^g`, also used for direction vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CPoint(Vec<C64>);

impl CPoint {
    pub fn new(coords: Vec<C64>) -> Self {
        CPoint(coords)
    }

    pub fn zeros(dim: usize) -> Self {
        CPoint(vec![C64::new(0.0, 0.0); dim])
    }

    pub fn from_real(coords: &[f64]) -> Self {
        CPoint(coords.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// The k-th standard basis vector of `C^dim`.
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut p = Self::zeros(dim);
        p.0[k] = C64::new(1.0, 0.0);
        p
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[C64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<C64> {
        self.0
    }

    pub fn scale(&self, s: C64) -> CPoint {
        CPoint(self.0.iter().map(|&x| x * s).collect())
    }

    pub fn scale_real(&self, s: f64) -> CPoint {
        CPoint(self.0.iter().map(|&x| x * s).collect())
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: C64, other: &CPoint) -> CPoint {
        CPoint(self.0.iter().zip(&other.0).map(|(&a, &b)| a + s * b).collect())
    }

    /// Complex bilinear (not Hermitian) pairing.
    pub fn dot(&self, other: &CPoint) -> C64 {
        cdot(&self.0, &other.0)
    }

    /// Euclidean (Hermitian) norm.
    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn expect_dim(&self, g: usize) -> Result<()> {
        if self.dim() != g {
            return Err(Error::DimensionMismatch { expected: g, got: self.dim() });
        }
        Ok(())
    }
}

pub fn cdot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

impl Index<usize> for CPoint {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.0[i]
    }
}

impl Add for &CPoint {
    type Output = CPoint;
    fn add(self, rhs: &CPoint) -> CPoint {
        CPoint(self.0.iter().zip(&rhs.0).map(|(&a, &b)| a + b).collect())
    }
}

impl Sub for &CPoint {
    type Output = CPoint;
    fn sub(self, rhs: &CPoint) -> CPoint {
        CPoint(self.0.iter().zip(&rhs.0).map(|(&a, &b)| a - b).collect())
    }
}

impl Neg for &CPoint {
    type Output = CPoint;
    fn neg(self) -> CPoint {
        CPoint(self.0.iter().map(|&a| -a).collect())
    }
}

impl From<Vec<C64>> for CPoint {
    fn from(v: Vec<C64>) -> Self {
        CPoint(v)
    }
}
