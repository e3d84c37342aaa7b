use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;

/// Eigendecomposition of a dense hermitian matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct DenseEigen {
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector of `values[k]`.
    pub vectors: DMatrix<C64>,
}

impl DenseEigen {
    pub fn new(m: DMatrix<C64>) -> Self {
        let n = m.nrows();
        let eig = SymmetricEigen::new(m);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
        Self { values, vectors }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `e^{-i A t} x`
    pub fn evolve(&self, x: &[C64], t: f64) -> Vec<C64> {
        let n = self.dim();
        let mut coeff = vec![C64::new(0.0, 0.0); n];
        for (k, ck) in coeff.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for (r, xr) in x.iter().enumerate() {
                acc += self.vectors[(r, k)].conj() * xr;
            }
            *ck = acc * C64::from_polar(1.0, -self.values[k] * t);
        }
        (0..n).map(|r| (0..n).map(|k| self.vectors[(r, k)] * coeff[k]).sum()).collect()
    }

    pub fn column(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k).iter().copied().collect()
    }
}

/// Ascending eigenvalues and orthonormal eigenvectors (columns) of a real symmetric matrix.
pub fn symmetric_eigen_real(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Ascending eigenvalues of a dense hermitian matrix.
pub fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    DenseEigen::new(m.clone()).values
}
