use std::ops::{Index, IndexMut};

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A dense vector of complex amplitudes.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ComplexVector {
    data: Vec<C64>,
}

impl ComplexVector {
    pub fn zeros(dim: usize) -> Self {
        Self { data: vec![C64::new(0.0, 0.0); dim] }
    }

    /// The computational basis vector `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.data[index] = C64::new(1.0, 0.0);
        v
    }

    pub fn from_vec(data: Vec<C64>) -> Self {
        Self { data }
    }

    pub fn from_real(data: &[f64]) -> Self {
        Self { data: data.iter().map(|&x| C64::new(x, 0.0)).collect() }
    }

    /// Haar-like random normalized vector (gaussian entries).
    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        let mut v = Self { data: (0..dim).map(|_| C64::new(gaussian(rng), gaussian(rng))).collect() };
        v.normalize();
        v
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    pub fn iter(&self) -> std::slice::Iter<'_, C64> {
        self.data.iter()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Rescales to unit norm and returns the previous norm.
    pub fn normalize(&mut self) -> f64 {
        let n = self.norm();
        if n > 0.0 {
            let inv = 1.0 / n;
            self.data.iter_mut().for_each(|z| *z *= inv);
        }
        n
    }

    /// `⟨self|other⟩`, conjugate-linear in `self`.
    pub fn dot(&self, other: &Self) -> C64 {
        dot(&self.data, &other.data)
    }

    pub fn scale(&mut self, s: C64) {
        self.data.iter_mut().for_each(|z| *z *= s);
    }

    /// `self += a * x`
    pub fn axpy(&mut self, a: C64, x: &Self) -> Result<()> {
        check_dim(self.dim(), x.dim())?;
        for (y, &xi) in self.data.iter_mut().zip(&x.data) {
            *y += a * xi;
        }
        Ok(())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// `|⟨self|other⟩|²` for normalized inputs.
    pub fn fidelity(&self, other: &Self) -> f64 {
        self.dot(other).norm_sqr()
    }
}

impl Index<usize> for ComplexVector {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.data[i]
    }
}

impl IndexMut<usize> for ComplexVector {
    fn index_mut(&mut self, i: usize) -> &mut C64 {
        &mut self.data[i]
    }
}

impl From<Vec<C64>> for ComplexVector {
    fn from(data: Vec<C64>) -> Self {
        Self { data }
    }
}

pub(crate) fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

pub fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}
