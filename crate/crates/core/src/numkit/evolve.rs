//! Time evolution `e^{-iHt} v` for hermitian sparse operators.
//!
//! Small operators go through a cached dense eigendecomposition. Larger ones use a
//! Lanczos-Krylov propagator with full reorthogonalization and an adaptive step:
//! a step of length `tau` is accepted once the a-posteriori estimate
//! `beta_m |e_m^T exp(-i T tau) e_1|` drops below `tol * tau / t`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::dense::symmetric_eigen_real;
use super::sparse::SparseOperator;
use super::vector::{check_dim, dot, ComplexVector};
use crate::error::{Error, Result};

/// Dimensions at or below this use the dense eigendecomposition.
pub const DENSE_THRESHOLD: usize = 400;

#[derive(Clone, Copy, Debug)]
pub struct EvolveOptions {
    pub dense_threshold: usize,
    pub krylov_dim: usize,
    /// Absolute error budget over the whole interval.
    pub tol: f64,
    pub max_steps: usize,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self { dense_threshold: DENSE_THRESHOLD, krylov_dim: 30, tol: 1e-12, max_steps: 200_000 }
    }
}

impl EvolveOptions {
    /// Forces the Krylov path regardless of dimension.
    pub fn krylov() -> Self {
        Self { dense_threshold: 0, ..Self::default() }
    }
}

/// `e^{-i op t} v`
pub fn evolve(op: &SparseOperator, v: &ComplexVector, t: f64) -> Result<ComplexVector> {
    evolve_with(op, v, t, &EvolveOptions::default())
}

pub fn evolve_with(op: &SparseOperator, v: &ComplexVector, t: f64, opts: &EvolveOptions) -> Result<ComplexVector> {
    if !op.is_hermitian() {
        return Err(Error::HermitianRequired);
    }
    check_dim(op.dim(), v.dim())?;
    if t == 0.0 || v.norm() == 0.0 {
        return Ok(v.clone());
    }
    if op.dim() <= opts.dense_threshold {
        let eig = op.dense_eigen();
        return Ok(ComplexVector::from_vec(eig.evolve(v.as_slice(), t)));
    }
    krylov_evolve(op, v, t, opts)
}

struct KrylovBasis {
    vectors: Vec<Vec<C64>>,
    alpha: Vec<f64>,
    /// `beta[j]` couples `vectors[j]` and `vectors[j + 1]`; the last entry is the residual norm.
    beta: Vec<f64>,
    exhausted: bool,
}

fn lanczos_basis(op: &SparseOperator, start: &[C64], m: usize) -> KrylovBasis {
    let n = op.dim();
    let norm = dot(start, start).re.sqrt();
    let mut vectors = vec![start.iter().map(|z| z / norm).collect::<Vec<_>>()];
    let mut alpha = Vec::with_capacity(m);
    let mut beta = Vec::with_capacity(m);
    let mut w = vec![C64::new(0.0, 0.0); n];
    let scale_guard = 1e-13;
    for j in 0..m {
        op.apply_into(&vectors[j], &mut w);
        let a = dot(&vectors[j], &w).re;
        alpha.push(a);
        // full reorthogonalization, two passes
        for _ in 0..2 {
            for q in &vectors {
                let c = dot(q, &w);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= c * qi;
                }
            }
        }
        let b = dot(&w, &w).re.sqrt();
        beta.push(b);
        let ref_scale = a.abs().max(if j > 0 { beta[j - 1] } else { 0.0 }).max(1.0);
        if b <= scale_guard * ref_scale {
            return KrylovBasis { vectors, alpha, beta, exhausted: true };
        }
        if j + 1 < m {
            vectors.push(w.iter().map(|z| z / b).collect());
        }
    }
    KrylovBasis { vectors, alpha, beta, exhausted: false }
}

fn tridiagonal(alpha: &[f64], beta: &[f64]) -> DMatrix<f64> {
    let k = alpha.len();
    DMatrix::from_fn(k, k, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    })
}

fn krylov_evolve(op: &SparseOperator, v: &ComplexVector, t: f64, opts: &EvolveOptions) -> Result<ComplexVector> {
    let m = opts.krylov_dim.min(op.dim()).max(2);
    let mut w = v.as_slice().to_vec();
    let total_norm = v.norm();
    let mut elapsed = 0.0;
    let mut tau = t;
    let mut steps = 0usize;
    let mut last_err = 0.0;
    while (t - elapsed).abs() > 0.0 {
        steps += 1;
        if steps > opts.max_steps {
            return Err(Error::NoConvergence { what: "krylov evolution", iterations: steps, residual: last_err });
        }
        let basis = lanczos_basis(op, &w, m);
        let k = basis.alpha.len();
        let (theta, q) = symmetric_eigen_real(tridiagonal(&basis.alpha, &basis.beta[..k - 1]));
        let coeffs = |tau: f64| -> Vec<C64> {
            (0..k)
                .map(|i| (0..k).map(|s| q[(i, s)] * q[(0, s)] * C64::from_polar(1.0, -theta[s] * tau)).sum())
                .collect()
        };
        let remaining = t - elapsed;
        if tau.abs() > remaining.abs() {
            tau = remaining;
        }
        let budget = |tau: f64| opts.tol * (tau / t).abs().max(1e-3);
        let mut c = coeffs(tau);
        if !basis.exhausted {
            loop {
                let err = basis.beta[k - 1] * c[k - 1].norm() * total_norm;
                last_err = err;
                if err <= budget(tau) {
                    break;
                }
                tau *= 0.5;
                if tau.abs() < 1e-14 * t.abs() {
                    return Err(Error::NoConvergence { what: "krylov evolution", iterations: steps, residual: err });
                }
                c = coeffs(tau);
            }
        }
        let norm = dot(&w, &w).re.sqrt();
        let mut next = vec![C64::new(0.0, 0.0); op.dim()];
        for (ci, vi) in c.iter().zip(&basis.vectors) {
            let s = ci * norm;
            for (x, y) in next.iter_mut().zip(vi) {
                *x += s * y;
            }
        }
        w = next;
        elapsed += tau;
        // grow the step again after a successful one
        tau *= 1.5;
        if (t - elapsed).abs() <= 1e-15 * t.abs() {
            break;
        }
    }
    Ok(ComplexVector::from_vec(w))
}
