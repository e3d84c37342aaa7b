use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use symlab::numkit::*;

fn hopping(len: usize) -> SparseOperator {
    let mut b = TripletBuilder::new(len);
    for i in 0..len - 1 {
        b.push_hermitian_pair(i, i + 1, c64(1.0, 0.0));
    }
    b.build_hermitian().unwrap()
}

fn random_hermitian(dim: usize, density: f64, rng: &mut ChaCha8Rng) -> SparseOperator {
    let mut b = TripletBuilder::new(dim);
    for r in 0..dim {
        b.push(r, r, c64(gaussian(rng), 0.0));
        for c in r + 1..dim {
            if rng.random::<f64>() < density {
                b.push_hermitian_pair(r, c, c64(gaussian(rng), gaussian(rng)));
            }
        }
    }
    b.build_hermitian().unwrap()
}

/// Dense matrix-vector product, written independently of the CSR kernel.
fn dense_apply(m: &DMatrix<C64>, v: &ComplexVector) -> Vec<C64> {
    (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| m[(r, c)] * v[c]).sum()).collect()
}

/// Taylor series with scaling and squaring; independent of both evolution paths.
fn taylor_expm_apply(m: &DMatrix<C64>, v: &ComplexVector, t: f64) -> Vec<C64> {
    let norm: f64 = m.iter().map(|z| z.norm()).sum::<f64>() * t.abs();
    let squarings = (norm.log2().ceil().max(0.0) as u32) + 2;
    let step = t / f64::from(2u32.pow(squarings));
    let a = m.map(|z| z * C64::new(0.0, -step));
    let n = m.nrows();
    let mut e = DMatrix::<C64>::identity(n, n);
    let mut term = DMatrix::<C64>::identity(n, n);
    for k in 1..40 {
        term = &term * &a / C64::new(k as f64, 0.0);
        e += &term;
    }
    for _ in 0..squarings {
        e = &e * &e;
    }
    dense_apply(&e, v)
}

#[test]
fn identity_apply_is_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let v = ComplexVector::random(4, &mut rng);
    assert_eq!(SparseOperator::identity(4).apply(&v).unwrap(), v);
}

#[test]
fn two_site_hopping_swaps_amplitude() {
    let h = hopping(2);
    let out = h.apply(&ComplexVector::basis(2, 0)).unwrap();
    assert_eq!(out, ComplexVector::basis(2, 1));
}

#[test]
fn apply_matches_dense_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let h = random_hermitian(8, 0.6, &mut rng);
    let v = ComplexVector::random(8, &mut rng);
    let got = h.apply(&v).unwrap();
    let want = dense_apply(&h.to_dense(), &v);
    let err = got.iter().zip(&want).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(err < 1e-13, "{err}");
}

#[test]
fn dimension_mismatch_is_reported() {
    let h = hopping(3);
    assert!(matches!(
        h.apply(&ComplexVector::zeros(4)),
        Err(symlab::Error::DimensionMismatch { expected: 3, found: 4 })
    ));
}

#[test]
fn duplicates_are_summed_and_asymmetry_rejected() {
    let mut b = TripletBuilder::new(2);
    b.push(0, 1, c64(0.5, 0.0));
    b.push(0, 1, c64(0.5, 0.0));
    b.push(1, 0, c64(1.0, 0.0));
    let h = b.build_hermitian().unwrap();
    assert_eq!(h.get(0, 1), c64(1.0, 0.0));
    assert_eq!(h.nnz(), 2);

    let mut b = TripletBuilder::new(2);
    b.push(0, 1, c64(1.0, 0.0));
    assert!(matches!(b.build_hermitian(), Err(symlab::Error::NotHermitian { .. })));
}

#[test]
fn evolve_zero_time_and_rabi_half_period() {
    let h = hopping(2);
    let v = ComplexVector::basis(2, 0);
    assert_eq!(evolve(&h, &v, 0.0).unwrap(), v);
    let out = evolve(&h, &v, std::f64::consts::FRAC_PI_2).unwrap();
    assert!((out[1].norm() - 1.0).abs() < 1e-12);
}

#[test]
fn evolve_paths_match_taylor_oracle() {
    let h = hopping(8);
    let v = ComplexVector::basis(8, 0);
    let want = taylor_expm_apply(&h.to_dense(), &v, 3.0);
    for opts in [EvolveOptions::default(), EvolveOptions::krylov()] {
        let got = evolve_with(&h, &v, 3.0, &opts).unwrap();
        let fid = got.iter().zip(&want).map(|(a, b)| a.conj() * b).sum::<C64>().norm_sqr();
        assert!((1.0 - fid).abs() < 1e-10, "fidelity {fid}");
        let err = got.iter().zip(&want).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-9, "{err}");
    }
}

#[test]
fn dense_and_krylov_agree_on_random_operator() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let h = random_hermitian(300, 0.05, &mut rng);
    let v = ComplexVector::random(300, &mut rng);
    let dense = EvolveOptions { dense_threshold: usize::MAX, ..EvolveOptions::default() };
    let a = evolve_with(&h, &v, 2.5, &dense).unwrap();
    let b = evolve_with(&h, &v, 2.5, &EvolveOptions::krylov()).unwrap();
    assert!(a.max_abs_diff(&b) < 1e-9, "{}", a.max_abs_diff(&b));
}

#[test]
fn evolve_rejects_non_hermitian() {
    let mut b = TripletBuilder::new(2);
    b.push(0, 1, c64(1.0, 0.0));
    let op = b.build().unwrap();
    assert!(matches!(evolve(&op, &ComplexVector::basis(2, 0), 1.0), Err(symlab::Error::HermitianRequired)));
}

#[test]
fn smallest_eigenvalues_known_cases() {
    let id = SparseOperator::identity(16);
    let r = extremal_eigs(&id, Which::Smallest, 1, 1e-10).unwrap();
    assert!((r.eigenvalues[0] - 1.0).abs() < 1e-14);

    let want = 2.0 * (5.0 * std::f64::consts::PI / 6.0).cos();
    for opts in [EigenOptions::default(), EigenOptions::lanczos()] {
        let r = extremal_eigs_with(&hopping(5), Which::Smallest, 1, 1e-12, &opts).unwrap();
        assert!((r.eigenvalues[0] - want).abs() < 1e-12);
        assert!((want + 3f64.sqrt()).abs() < 1e-15);
    }
}

#[test]
fn lanczos_matches_dense_oracle_on_random_hermitian() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let h = random_hermitian(50, 0.3, &mut rng);
    let oracle = hermitian_eigenvalues(&h.to_dense());
    let tol = 1e-10;
    let lo = extremal_eigs_with(&h, Which::Smallest, 3, tol, &EigenOptions::lanczos()).unwrap();
    let hi = extremal_eigs_with(&h, Which::Largest, 2, tol, &EigenOptions::lanczos()).unwrap();
    for i in 0..3 {
        assert!((lo.eigenvalues[i] - oracle[i]).abs() < 1e-9);
    }
    assert!((hi.eigenvalues[0] - oracle[49]).abs() < 1e-9);
    assert!((hi.eigenvalues[1] - oracle[48]).abs() < 1e-9);
    let norm = oracle[0].abs().max(oracle[49].abs());
    assert!(lo.residuals.iter().chain(&hi.residuals).all(|&r| r <= tol * norm));
}

#[test]
fn lanczos_on_larger_sparse_operator() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let h = random_hermitian(2500, 0.002, &mut rng);
    let r = extremal_eigs(&h, Which::Smallest, 2, 1e-9).unwrap();
    let norm = op_norm(&h).unwrap();
    assert!(r.residuals.iter().all(|&x| x <= 1e-9 * norm));
    assert!(r.eigenvalues[0] <= r.eigenvalues[1]);
}

#[test]
fn norms_of_simple_operators() {
    assert!((op_norm(&SparseOperator::identity(8)).unwrap() - 1.0).abs() < 1e-12);
    // Pauli X on the first of two qubits
    let mut b = TripletBuilder::new(4);
    b.push_hermitian_pair(0, 2, c64(1.0, 0.0));
    b.push_hermitian_pair(1, 3, c64(1.0, 0.0));
    let x1 = b.build_hermitian().unwrap();
    assert!((op_norm(&x1).unwrap() - 1.0).abs() < 1e-12);

    let oracle = hermitian_eigenvalues(&hopping(4).to_dense());
    let want = oracle[3].abs().max(oracle[0].abs());
    assert!((want - 1.618_033_988_749_895).abs() < 1e-12);
    assert!((op_norm(&hopping(4)).unwrap() - want).abs() / want < 1e-6);
}

#[test]
fn apply_is_bitwise_stable_across_thread_counts() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let h = random_hermitian(6000, 0.001, &mut rng);
    let v = ComplexVector::random(6000, &mut rng);
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let a = one.install(|| h.apply(&v).unwrap());
    let b = four.install(|| h.apply(&v).unwrap());
    assert_eq!(a, b);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn evolution_is_unitary_and_composes(seed in 0u64..1000, t1 in -4.0f64..4.0, t2 in -4.0f64..4.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_hermitian(24, 0.3, &mut rng);
        let v = ComplexVector::random(24, &mut rng);
        for opts in [EvolveOptions::default(), EvolveOptions::krylov()] {
            let a = evolve_with(&h, &v, t1, &opts).unwrap();
            prop_assert!((a.norm() - 1.0).abs() < 1e-10);
            let ab = evolve_with(&h, &a, t2, &opts).unwrap();
            let direct = evolve_with(&h, &v, t1 + t2, &opts).unwrap();
            prop_assert!(ab.max_abs_diff(&direct) < 1e-9);
        }
    }

    #[test]
    fn apply_is_linear(seed in 0u64..1000, ar in -2.0f64..2.0, ai in -2.0f64..2.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_hermitian(16, 0.4, &mut rng);
        let u = ComplexVector::random(16, &mut rng);
        let v = ComplexVector::random(16, &mut rng);
        let alpha = c64(ar, ai);
        let beta = c64(0.7, -0.3);
        let mut combo = u.clone();
        combo.scale(alpha);
        combo.axpy(beta, &v).unwrap();
        let lhs = h.apply(&combo).unwrap();
        let mut rhs = h.apply(&u).unwrap();
        rhs.scale(alpha);
        rhs.axpy(beta, &h.apply(&v).unwrap()).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }
}
