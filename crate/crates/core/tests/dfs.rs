use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use symlab::dfs::*;
use symlab::numkit::{hermitian_eigenvalues, op_norm, ComplexVector, SparseOperator, TripletBuilder};
use symlab::statevec::{random_su2, Gate1};
use symlab::tchain::{BondTable, Levels};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn binom(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// `mult(j) = C(N, N/2 − j) − C(N, N/2 − j − 1)`.
fn closed_form(n: usize, j: usize) -> usize {
    let lo = n / 2 - j;
    binom(n, lo) - if lo == 0 { 0 } else { binom(n, lo - 1) }
}

fn paulis() -> [DMatrix<C64>; 3] {
    let z = c(0.0, 0.0);
    let o = c(0.5, 0.0);
    let i = c(0.0, 0.5);
    [
        DMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        DMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        DMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
    ]
}

/// Dense `S_a = Σ_k s_a^{(k)}` from Kronecker products.
fn total_spin(n: usize) -> [DMatrix<C64>; 3] {
    paulis().map(|s| {
        let mut total = DMatrix::<C64>::zeros(1 << n, 1 << n);
        for k in 0..n {
            let mut m = DMatrix::<C64>::identity(1, 1);
            for q in 0..n {
                m = m.kronecker(&if q == k { s.clone() } else { DMatrix::identity(2, 2) });
            }
            total += m;
        }
        total
    })
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn phase_gate(alpha: f64) -> Gate1 {
    let p = C64::from_polar(1.0, alpha);
    [[p, c(0.0, 0.0)], [c(0.0, 0.0), p]]
}

#[test]
fn small_multiplicities() {
    let d2 = spin_multiplicities(2).unwrap();
    assert_eq!(d2.multiplicities, [(0, 1), (1, 1)].into());
    let d4 = spin_multiplicities(4).unwrap();
    assert_eq!(d4.multiplicities, [(0, 2), (1, 3), (2, 1)].into());
    assert_eq!(spin_multiplicities(10).unwrap().multiplicity(0), 42);
    assert!(spin_multiplicities(3).is_err());
    assert!(spin_multiplicities(14).is_err());
}

#[test]
fn multiplicities_match_closed_form_and_dense_s_squared() {
    for n in (2..=8).step_by(2) {
        let d = spin_multiplicities(n).unwrap();
        assert_eq!(d.total_dimension(), 1 << n);
        for j in 0..=n / 2 {
            assert_eq!(d.multiplicity(j), closed_form(n, j), "n={n} j={j}");
        }
    }
    // full-space S² for four qubits
    let [sx, sy, sz] = total_spin(4);
    let s2 = &sx * &sx + &sy * &sy + &sz * &sz;
    let vals = hermitian_eigenvalues(&s2);
    for (j, mult) in [(0usize, 2usize), (1, 3), (2, 1)] {
        let jj = (j * (j + 1)) as f64;
        assert_eq!(vals.iter().filter(|&&v| (v - jj).abs() < 1e-9).count(), (2 * j + 1) * mult);
    }
}

#[test]
fn printed_formula_only_agrees_for_singlets() {
    assert!((printed_multiplicity(10, 0) - 42.0).abs() < 1e-12);
    assert!((printed_multiplicity(10, 1) - 108.0).abs() < 1e-12);
    let d = spin_multiplicities(10).unwrap();
    assert_eq!(d.multiplicity(1), 90);
    // four subsystems hold at least 31 levels
    assert_eq!(d.multiplicities.values().filter(|&&m| m >= 31).count(), 4);
}

#[test]
fn singlet_basis_small_cases() {
    let b2 = singlet_basis(2).unwrap();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let col = b2.column(0);
    assert_eq!(b2.dim(), 1);
    for (i, want) in [0.0, s, -s, 0.0].into_iter().enumerate() {
        assert!((col[i] - c(want, 0.0)).norm() < 1e-15);
    }
    let b4 = singlet_basis(4).unwrap();
    assert_eq!(b4.dim(), 2);
    let spins = total_spin(4);
    for k in 0..2 {
        let v = nalgebra::DVector::from_column_slice(b4.column(k).as_slice());
        for s in &spins {
            assert!((s * &v).norm() < 1e-12);
        }
    }
}

#[test]
fn ten_qubit_singlets() {
    let b = singlet_basis(10).unwrap();
    assert_eq!(b.v.nrows(), 1024);
    assert_eq!(b.dim(), 42);
    assert!(b.gram_defect() < 1e-12);
    // S_z annihilates every column: only weight-5 strings appear
    for k in 0..b.dim() {
        let col = b.column(k);
        assert!((0..1024usize).all(|i| i.count_ones() == 5 || col[i].norm() == 0.0));
    }
}

#[test]
fn encoded_levels_are_rotation_invariant() {
    let v = encode_levels(LOGICAL_LEVELS).unwrap();
    assert_eq!(v.dim(), 31);
    let id = DMatrix::<C64>::identity(31, 31);
    assert!((v.v.adjoint() * &v.v - &id).iter().all(|x| x.norm() < 1e-12));
    let mut r = rng(9);
    for _ in 0..20 {
        let u = random_su2(&mut r);
        let g = v.rotated_gram(&u);
        let err = (g - &id).iter().map(|x| x.norm()).fold(0.0, f64::max);
        assert!(err < 1e-9, "{err}");
    }
    let alpha = 0.37;
    let g = v.rotated_gram(&phase_gate(alpha));
    let phase = C64::from_polar(1.0, 10.0 * alpha);
    assert!((g - id * phase).iter().all(|x| x.norm() < 1e-12));
    assert!(encode_levels(43).is_err());
}

fn random_hermitian(d: usize, seed: u64) -> SparseOperator {
    let mut r = rng(seed);
    let mut b = TripletBuilder::new(d);
    for i in 0..d {
        b.push(i, i, c(symlab::numkit::gaussian(&mut r), 0.0));
        for k in i + 1..d {
            let z = c(symlab::numkit::gaussian(&mut r), symlab::numkit::gaussian(&mut r));
            b.push_hermitian_pair(i, k, z);
        }
    }
    b.build_hermitian().unwrap()
}

#[test]
fn materialized_encoding_on_small_blocks() {
    let iso = encode_levels_in(4, 2).unwrap();
    let h = random_hermitian(4, 1);
    let term = build_hr_term(&h, &iso).unwrap();
    let m = term.to_sparse().unwrap();
    assert_eq!(m.dim(), 256);
    assert!(m.hermiticity_residual() < 1e-12);
    // spectrum is that of h padded with zeros
    let mut want = hermitian_eigenvalues(&h.to_dense());
    want.extend(std::iter::repeat_n(0.0, 252));
    want.sort_by(f64::total_cmp);
    let got = hermitian_eigenvalues(&m.to_dense());
    for (g, w) in got.iter().zip(&want) {
        assert!((g - w).abs() < 1e-10);
    }
    // full conjugation by U^{⊗8}
    let u = random_su2(&mut rng(2));
    let mut umat = DMatrix::<C64>::identity(1, 1);
    let ug = DMatrix::from_row_slice(2, 2, &[u[0][0], u[0][1], u[1][0], u[1][1]]);
    for _ in 0..8 {
        umat = umat.kronecker(&ug);
    }
    let dense = m.to_dense();
    let comm = &umat * &dense - &dense * &umat;
    assert!(comm.iter().all(|x| x.norm() < 1e-12));
    // matrix-free application agrees
    let x = ComplexVector::random(256, &mut rng(3));
    assert!(term.apply(&x).unwrap().max_abs_diff(&m.apply(&x).unwrap()) < 1e-12);

    let proj = build_hr_term(&SparseOperator::identity(4), &iso).unwrap().to_sparse().unwrap().to_dense();
    assert!((&proj * &proj - &proj).iter().all(|x| x.norm() < 1e-12));
    let trace: C64 = proj.diagonal().iter().sum();
    assert!((trace - c(4.0, 0.0)).norm() < 1e-12);
    assert!(build_hr_term(&SparseOperator::identity(5), &iso).is_err());
}

#[test]
fn encoded_bond_term_commutes_with_collective_rotations() {
    let iso = encode_levels(LOGICAL_LEVELS).unwrap();
    let h = BondTable::new(Levels::Standard).to_operator().unwrap();
    let term = build_hr_term(&h, &iso).unwrap();
    assert_eq!(term.dim(), 1 << 20);
    assert!(matches!(term.to_sparse(), Err(symlab::Error::SizeCap { .. })));
    let norm = op_norm(&h).unwrap();
    let mut r = rng(4);
    let us: Vec<Gate1> = (0..5).map(|_| random_su2(&mut r)).collect();
    let probes: Vec<ComplexVector> = (0..5).map(|_| ComplexVector::random(1 << 20, &mut r)).collect();
    let worst = term.max_commutator_probe(&us, &probes).unwrap();
    assert!(worst < 1e-8 * norm, "{worst}");
    // the probe is sensitive: a term that is not encoded fails it
    let raw = |x: &ComplexVector| {
        let mut y = x.clone();
        y.as_mut_slice()[0] *= 2.0;
        y
    };
    let rr = &probes[0];
    let mut urr = rr.clone();
    apply_collective(&mut urr, 20, &us[0]);
    let mut u_raw = raw(rr);
    apply_collective(&mut u_raw, 20, &us[0]);
    let bad = (rr.dot(&u_raw) - rr.dot(&raw(&urr))).norm();
    assert!(bad > 1e-8);

    let proj = build_hr_term(&SparseOperator::identity(961), &iso).unwrap();
    let p1 = proj.apply(&probes[1]).unwrap();
    assert!(proj.apply(&p1).unwrap().max_abs_diff(&p1) < 1e-12);
}

#[test]
fn isometry_binary_round_trip() {
    let iso = encode_levels_in(6, 5).unwrap();
    let mut buf = Vec::new();
    iso.write_binary(&mut buf).unwrap();
    assert_eq!(&buf[..4], b"ISOM");
    assert_eq!(u32::from_le_bytes(buf[4..8].try_into().unwrap()), 1);
    assert_eq!(u64::from_le_bytes(buf[8..16].try_into().unwrap()), 64);
    assert_eq!(u64::from_le_bytes(buf[16..24].try_into().unwrap()), 5);
    let count = u64::from_le_bytes(buf[24..32].try_into().unwrap()) as usize;
    assert_eq!(buf.len(), 32 + 32 * count);
    let back = EncodingIsometry::read_binary(buf.as_slice()).unwrap();
    assert_eq!(back.n, 6);
    assert_eq!(back.v, iso.v);
    assert!(EncodingIsometry::read_binary(&b"NOPE"[..]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn recursion_dimensions_sum_to_hilbert_space(half in 1usize..7) {
        let n = 2 * half;
        let rec = recursion_multiplicities(n);
        let total: usize = rec.iter().map(|(two_j, m)| (two_j + 1) * m).sum();
        prop_assert_eq!(total, 1 << n);
    }

    #[test]
    fn singlets_pick_up_determinant_phase(half in 1usize..4, seed in 0u64..1000, alpha in -3.0f64..3.0) {
        let n = 2 * half;
        let b = singlet_basis(n).unwrap();
        let mut u = random_su2(&mut rng(seed));
        let p = C64::from_polar(1.0, alpha);
        for row in u.iter_mut() {
            for x in row.iter_mut() {
                *x *= p;
            }
        }
        let g = b.rotated_gram(&u);
        let phase = C64::from_polar(1.0, alpha * n as f64);
        let id = DMatrix::<C64>::identity(b.dim(), b.dim()) * phase;
        prop_assert!((g - id).iter().all(|x| x.norm() < 1e-12));
    }
}
