//! Self-contained complex linear algebra: sparse operators, time evolution,
//! extremal eigenvalues and norms.

mod dense;
mod eigen;
mod evolve;
mod sparse;
mod vector;

pub use dense::{hermitian_eigenvalues, symmetric_eigen_real, DenseEigen};
pub use eigen::{extremal_eigs, extremal_eigs_with, op_norm, EigenOptions, SpectrumResult, Which};
pub use evolve::{evolve, evolve_with, EvolveOptions, DENSE_THRESHOLD};
pub use sparse::{SparseOperator, TripletBuilder, HERMITIAN_TOL};
pub use vector::{gaussian, ComplexVector};

pub fn c64(re: f64, im: f64) -> num_complex::Complex64 {
    num_complex::Complex64::new(re, im)
}
