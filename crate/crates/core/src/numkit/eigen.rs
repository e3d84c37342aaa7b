//! Extremal eigenvalues of hermitian operators.
//!
//! Restarted Lanczos with full reorthogonalization above [`DENSE_THRESHOLD`], dense
//! diagonalization below it. Every returned pair carries an explicitly computed residual
//! `|Hv - λv|`. Lanczos resolves distinct eigenvalues only; degenerate multiplicities
//! collapse to a single Ritz value.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dense::symmetric_eigen_real;
use super::evolve::DENSE_THRESHOLD;
use super::sparse::SparseOperator;
use super::vector::{dot, ComplexVector};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Which {
    Smallest,
    Largest,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumResult {
    /// Ascending for [`Which::Smallest`], descending for [`Which::Largest`].
    pub eigenvalues: Vec<f64>,
    pub residuals: Vec<f64>,
    pub iterations: usize,
    #[serde(skip)]
    pub eigenvectors: Vec<ComplexVector>,
}

#[derive(Clone, Copy, Debug)]
pub struct EigenOptions {
    pub dense_threshold: usize,
    pub max_basis: usize,
    pub max_restarts: usize,
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self { dense_threshold: DENSE_THRESHOLD, max_basis: 160, max_restarts: 400, seed: 0x5eed }
    }
}

impl EigenOptions {
    pub fn lanczos() -> Self {
        Self { dense_threshold: 0, ..Self::default() }
    }
}

pub fn extremal_eigs(op: &SparseOperator, which: Which, k: usize, tol: f64) -> Result<SpectrumResult> {
    extremal_eigs_with(op, which, k, tol, &EigenOptions::default())
}

pub fn extremal_eigs_with(
    op: &SparseOperator,
    which: Which,
    k: usize,
    tol: f64,
    opts: &EigenOptions,
) -> Result<SpectrumResult> {
    if !op.is_hermitian() {
        return Err(Error::HermitianRequired);
    }
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if op.dim() <= opts.dense_threshold {
        return Ok(dense_extremal(op, which, k));
    }
    lanczos_extremal(op, which, k, tol, opts)
}

fn residual(op: &SparseOperator, v: &ComplexVector, lambda: f64) -> f64 {
    let mut hv = op.apply(v).expect("dimension checked");
    hv.axpy(C64::new(-lambda, 0.0), v).expect("dimension checked");
    hv.norm()
}

fn dense_extremal(op: &SparseOperator, which: Which, k: usize) -> SpectrumResult {
    let eig = op.dense_eigen();
    let n = eig.dim();
    let picks: Vec<usize> = match which {
        Which::Smallest => (0..k.min(n)).collect(),
        Which::Largest => (0..k.min(n)).map(|i| n - 1 - i).collect(),
    };
    let eigenvectors: Vec<ComplexVector> = picks.iter().map(|&i| ComplexVector::from_vec(eig.column(i))).collect();
    let eigenvalues: Vec<f64> = picks.iter().map(|&i| eig.values[i]).collect();
    let residuals = eigenvalues.iter().zip(&eigenvectors).map(|(&l, v)| residual(op, v, l)).collect();
    SpectrumResult { eigenvalues, residuals, iterations: 0, eigenvectors }
}

fn lanczos_extremal(
    op: &SparseOperator,
    which: Which,
    k: usize,
    tol: f64,
    opts: &EigenOptions,
) -> Result<SpectrumResult> {
    let n = op.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut start = ComplexVector::random(n, &mut rng);
    let m_max = opts.max_basis.max(2 * k + 10).min(n);
    let mut iterations = 0;
    let mut norm_est: f64 = 0.0;
    let mut last = None;

    for _restart in 0..opts.max_restarts {
        let mut vectors: Vec<Vec<C64>> = vec![start.as_slice().to_vec()];
        let mut alpha = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let mut w = vec![C64::new(0.0, 0.0); n];
        let mut exhausted = false;
        for j in 0..m_max {
            op.apply_into(&vectors[j], &mut w);
            iterations += 1;
            let a = dot(&vectors[j], &w).re;
            alpha.push(a);
            for _ in 0..2 {
                for q in &vectors {
                    let c = dot(q, &w);
                    for (wi, qi) in w.iter_mut().zip(q) {
                        *wi -= c * qi;
                    }
                }
            }
            let b = dot(&w, &w).re.sqrt();
            norm_est = norm_est.max(a.abs()).max(b);
            if b <= 1e-13 * norm_est.max(1e-300) {
                exhausted = true;
                break;
            }
            if j + 1 == m_max {
                beta.push(b);
                break;
            }
            beta.push(b);
            vectors.push(w.iter().map(|z| z / b).collect());
        }
        let kk = alpha.len();
        let t = DMatrix::from_fn(kk, kk, |i, j| {
            if i == j {
                alpha[i]
            } else if i + 1 == j {
                beta[i]
            } else if j + 1 == i {
                beta[j]
            } else {
                0.0
            }
        });
        let (theta, s) = symmetric_eigen_real(t);
        norm_est = norm_est.max(theta[0].abs()).max(theta[kk - 1].abs());
        let picks: Vec<usize> = match which {
            Which::Smallest => (0..k.min(kk)).collect(),
            Which::Largest => (0..k.min(kk)).map(|i| kk - 1 - i).collect(),
        };
        let ritz = |idx: usize| -> ComplexVector {
            let mut v = vec![C64::new(0.0, 0.0); n];
            for (j, q) in vectors.iter().enumerate() {
                let c = s[(j, idx)];
                for (x, y) in v.iter_mut().zip(q) {
                    *x += y * c;
                }
            }
            let mut v = ComplexVector::from_vec(v);
            v.normalize();
            v
        };
        let eigenvectors: Vec<ComplexVector> = picks.iter().map(|&i| ritz(i)).collect();
        let eigenvalues: Vec<f64> = picks.iter().map(|&i| theta[i]).collect();
        let residuals: Vec<f64> = eigenvalues.iter().zip(&eigenvectors).map(|(&l, v)| residual(op, v, l)).collect();
        let worst = residuals.iter().copied().fold(0.0, f64::max);
        let converged = worst <= tol * norm_est.max(f64::MIN_POSITIVE);
        let result = SpectrumResult { eigenvalues, residuals, iterations, eigenvectors };
        if converged || exhausted {
            if picks.len() < k && !exhausted {
                return Err(Error::NoConvergence { what: "lanczos", iterations, residual: worst });
            }
            if converged {
                return Ok(result);
            }
        }
        // restart from the sum of the wanted Ritz vectors
        let mut next = ComplexVector::zeros(n);
        for (i, v) in result.eigenvectors.iter().enumerate() {
            next.axpy(C64::new(1.0 / (1.0 + i as f64), 0.0), v).expect("dims");
        }
        if next.normalize() == 0.0 {
            next = ComplexVector::random(n, &mut rng);
        }
        start = next;
        last = Some(worst);
    }
    Err(Error::NoConvergence { what: "lanczos", iterations, residual: last.unwrap_or(f64::NAN) })
}

/// Spectral norm `max(|λ_min|, |λ_max|)` of a hermitian operator.
pub fn op_norm(op: &SparseOperator) -> Result<f64> {
    let lo = extremal_eigs(op, Which::Smallest, 1, 1e-10)?;
    let hi = extremal_eigs(op, Which::Largest, 1, 1e-10)?;
    Ok(lo.eigenvalues[0].abs().max(hi.eigenvalues[0].abs()))
}
