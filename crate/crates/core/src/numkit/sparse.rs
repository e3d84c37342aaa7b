use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::dense::DenseEigen;
use super::vector::{check_dim, ComplexVector};
use crate::error::{Error, Result};

/// Absolute tolerance on `|A_rc - conj(A_cr)|` accepted by [`TripletBuilder::build_hermitian`].
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Rows above which matrix-vector products are split across the rayon pool.
/// Each row is reduced sequentially, so the result does not depend on the thread count.
const PAR_ROWS: usize = 4096;

/// Accumulates `(row, col, value)` entries; duplicates are summed on build.
#[derive(Clone, Debug, Default)]
pub struct TripletBuilder {
    dim: usize,
    entries: Vec<(usize, usize, C64)>,
}

impl TripletBuilder {
    pub fn new(dim: usize) -> Self {
        Self { dim, entries: Vec::new() }
    }

    pub fn with_capacity(dim: usize, cap: usize) -> Self {
        Self { dim, entries: Vec::with_capacity(cap) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn push(&mut self, row: usize, col: usize, value: C64) {
        self.entries.push((row, col, value));
    }

    /// Pushes `value` at `(row, col)` and its conjugate at `(col, row)`.
    pub fn push_hermitian_pair(&mut self, row: usize, col: usize, value: C64) {
        self.entries.push((row, col, value));
        self.entries.push((col, row, value.conj()));
    }

    pub fn build(self) -> Result<SparseOperator> {
        SparseOperator::from_triplets(self.dim, self.entries, false)
    }

    /// Builds and verifies hermiticity to [`HERMITIAN_TOL`].
    pub fn build_hermitian(self) -> Result<SparseOperator> {
        SparseOperator::from_triplets(self.dim, self.entries, true)
    }
}

/// Complex sparse matrix in compressed-row form.
#[derive(Clone, Debug)]
pub struct SparseOperator {
    dim: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<C64>,
    hermitian: bool,
    dense_eig: OnceLock<Arc<DenseEigen>>,
}

impl SparseOperator {
    pub fn from_triplets(dim: usize, mut entries: Vec<(usize, usize, C64)>, hermitian: bool) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("operator dimension must be positive".into()));
        }
        if let Some(&(row, col, _)) = entries.iter().find(|(r, c, _)| *r >= dim || *c >= dim) {
            return Err(Error::IndexOutOfRange { row, col, dim });
        }
        entries.par_sort_unstable_by_key(|&(r, c, _)| (r, c));

        let mut indptr = vec![0usize; dim + 1];
        let mut indices = Vec::with_capacity(entries.len());
        let mut values: Vec<C64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in entries {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                values.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..dim {
            indptr[r + 1] += indptr[r];
        }
        let op = Self { dim, indptr, indices, values, hermitian: false, dense_eig: OnceLock::new() };
        if hermitian {
            op.check_hermitian()?;
            Ok(Self { hermitian: true, ..op })
        } else {
            Ok(op)
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            indptr: (0..=dim).collect(),
            indices: (0..dim).collect(),
            values: vec![C64::new(1.0, 0.0); dim],
            hermitian: true,
            dense_eig: OnceLock::new(),
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            indptr: vec![0; dim + 1],
            indices: Vec::new(),
            values: Vec::new(),
            hermitian: true,
            dense_eig: OnceLock::new(),
        }
    }

    /// Hermitian operator from a dense matrix, dropping exact zeros.
    pub fn from_dense(m: &DMatrix<C64>) -> Result<Self> {
        let mut b = TripletBuilder::new(m.nrows());
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                if m[(r, c)] != C64::new(0.0, 0.0) {
                    b.push(r, c, m[(r, c)]);
                }
            }
        }
        b.build_hermitian()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    /// Iterates the stored `(col, value)` pairs of one row.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let span = self.indptr[r]..self.indptr[r + 1];
        self.indices[span.clone()].iter().copied().zip(self.values[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        let span = self.indptr[r]..self.indptr[r + 1];
        match self.indices[span.clone()].binary_search(&c) {
            Ok(k) => self.values[span.start + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    /// Sorted `(row, col, value)` list with duplicates merged.
    pub fn triplets(&self) -> Vec<(usize, usize, C64)> {
        (0..self.dim).flat_map(|r| self.row(r).map(move |(c, v)| (r, c, v))).collect()
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.dim).map(|r| self.get(r, r)).collect()
    }

    /// Largest `|A_rc - conj(A_cr)|` over stored entries.
    pub fn hermiticity_residual(&self) -> f64 {
        (0..self.dim)
            .into_par_iter()
            .map(|r| self.row(r).map(|(c, v)| (v - self.get(c, r).conj()).norm()).fold(0.0, f64::max))
            .reduce(|| 0.0, f64::max)
    }

    fn check_hermitian(&self) -> Result<()> {
        let scale = self.values.iter().map(|v| v.norm()).fold(1.0, f64::max);
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                let deviation = (v - self.get(c, r).conj()).norm();
                if deviation > HERMITIAN_TOL * scale {
                    return Err(Error::NotHermitian { row: r, col: c, deviation });
                }
            }
        }
        Ok(())
    }

    pub fn apply(&self, v: &ComplexVector) -> Result<ComplexVector> {
        check_dim(self.dim, v.dim())?;
        let mut out = ComplexVector::zeros(self.dim);
        self.apply_into(v.as_slice(), out.as_mut_slice());
        Ok(out)
    }

    /// `y = A x` without dimension checks.
    pub(crate) fn apply_into(&self, x: &[C64], y: &mut [C64]) {
        let row_dot = |r: usize| -> C64 {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.indptr[r]..self.indptr[r + 1] {
                acc += self.values[k] * x[self.indices[k]];
            }
            acc
        };
        if self.dim >= PAR_ROWS {
            y.par_iter_mut().enumerate().for_each(|(r, yr)| *yr = row_dot(r));
        } else {
            y.iter_mut().enumerate().for_each(|(r, yr)| *yr = row_dot(r));
        }
    }

    /// `⟨u|A|v⟩`
    pub fn expectation(&self, u: &ComplexVector, v: &ComplexVector) -> Result<C64> {
        let av = self.apply(v)?;
        check_dim(self.dim, u.dim())?;
        Ok(u.dot(&av))
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { values: self.values.iter().map(|v| v * s).collect(), dense_eig: OnceLock::new(), ..self.clone() }
    }

    /// `Σ c_k A_k`; hermitian when every term is.
    pub fn linear_combination(terms: &[(f64, &SparseOperator)]) -> Result<Self> {
        let dim = terms
            .first()
            .map(|(_, a)| a.dim)
            .ok_or_else(|| Error::InvalidArgument("empty linear combination".into()))?;
        let mut b = TripletBuilder::new(dim);
        let mut hermitian = true;
        for (c, a) in terms {
            check_dim(dim, a.dim)?;
            hermitian &= a.hermitian;
            for (r, col, v) in a.triplets() {
                b.push(r, col, v * *c);
            }
        }
        let mut op = b.build()?;
        op.hermitian = hermitian;
        Ok(op)
    }

    /// Adds `shift * 1`.
    pub fn shifted(&self, shift: f64) -> Result<Self> {
        let id = Self::identity(self.dim);
        Self::linear_combination(&[(1.0, self), (shift, &id)])
    }

    /// Compression `B† A B` onto the span of the given columns (dense result).
    pub fn compress(&self, basis: &[ComplexVector]) -> Result<DMatrix<C64>> {
        let images = basis.iter().map(|b| self.apply(b)).collect::<Result<Vec<_>>>()?;
        Ok(DMatrix::from_fn(basis.len(), basis.len(), |i, j| basis[i].dot(&images[j])))
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                m[(r, c)] += v;
            }
        }
        m
    }

    /// Cached dense eigendecomposition (hermitian operators only).
    pub(crate) fn dense_eigen(&self) -> Arc<DenseEigen> {
        self.dense_eig.get_or_init(|| Arc::new(DenseEigen::new(self.to_dense()))).clone()
    }

    /// Conjugation `P A P†` by the basis permutation `|i⟩ -> |perm[i]⟩`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        check_dim(self.dim, perm.len())?;
        let entries = self.triplets().into_iter().map(|(r, c, v)| (perm[r], perm[c], v)).collect();
        let mut op = Self::from_triplets(self.dim, entries, false)?;
        op.hermitian = self.hermitian;
        Ok(op)
    }

    /// Entry-wise maximum absolute difference of two operators of equal dimension.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        check_dim(self.dim, other.dim)?;
        let mut merged: BTreeMap<(usize, usize), C64> = BTreeMap::new();
        for (r, c, v) in self.triplets() {
            *merged.entry((r, c)).or_default() += v;
        }
        for (r, c, v) in other.triplets() {
            *merged.entry((r, c)).or_default() -= v;
        }
        Ok(merged.values().map(|v| v.norm()).fold(0.0, f64::max))
    }
}
