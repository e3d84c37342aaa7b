//! Total-spin decomposition of `N` qubits and the singlet encoding of a logical level set.
//!
//! Collective rotations `U^{⊗N}` act on the `j = 0` sector as the phase `det(U)^{N/2}`, so
//! any operator conjugated into it by the isometry commutes with every collective rotation.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numkit::{symmetric_eigen_real, ComplexVector, SparseOperator};
use crate::statevec::{apply_1q, Gate1};

/// Largest qubit count handled by the decomposition and basis builders.
pub const MAX_QUBITS: usize = 12;
/// Largest encoded-term dimension [`EncodedBondTerm::to_sparse`] will materialize.
pub const MATERIALIZE_CAP: usize = 4096;
/// Qubits per encoded logical spin.
pub const BLOCK_QUBITS: usize = 10;
/// Logical levels of the computing Hamiltonian.
pub const LOGICAL_LEVELS: usize = 31;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpinDecomposition {
    pub n: usize,
    /// Total spin `j` (an integer for even `n`) to multiplicity.
    pub multiplicities: BTreeMap<usize, usize>,
}

impl SpinDecomposition {
    pub fn multiplicity(&self, j: usize) -> usize {
        self.multiplicities.get(&j).copied().unwrap_or(0)
    }

    /// `Σ_j (2j+1) mult(j)`, which must equal `2^N`.
    pub fn total_dimension(&self) -> usize {
        self.multiplicities.iter().map(|(j, m)| (2 * j + 1) * m).sum()
    }
}

fn check_even(n: usize) -> Result<()> {
    if n == 0 || n % 2 == 1 || n > MAX_QUBITS {
        return Err(Error::InvalidArgument(format!("qubit count {n} must be even and in 2..={MAX_QUBITS}")));
    }
    Ok(())
}

/// Multiplicities from the coupling recursion `mult_{k+1}(s) = mult_k(s − ½) + mult_k(s + ½)`,
/// keyed by `2s`.
pub fn recursion_multiplicities(n: usize) -> BTreeMap<usize, usize> {
    let mut cur = BTreeMap::from([(0usize, 1usize)]);
    for _ in 0..n {
        let mut next = BTreeMap::new();
        for (&two_s, &m) in &cur {
            *next.entry(two_s + 1).or_insert(0) += m;
            if two_s > 0 {
                *next.entry(two_s - 1).or_insert(0) += m;
            }
        }
        cur = next;
    }
    cur
}

/// Eigenspace dimensions of `S²` on all `2^n` states, keyed by `2j`, from a dense
/// diagonalization of each `S_z` block.
pub fn brute_force_eigenspace_dims(n: usize) -> BTreeMap<usize, usize> {
    let mut counts = BTreeMap::new();
    for weight in 0..=n {
        let states: Vec<usize> = (0..1usize << n).filter(|s| s.count_ones() as usize == weight).collect();
        let pos: BTreeMap<usize, usize> = states.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        let dim = states.len();
        // S² = 3N/4 + Σ_{i<k} (SWAP_ik − ½)
        let shift = 0.75 * n as f64 - 0.25 * (n * (n - 1)) as f64;
        let mut m = DMatrix::<f64>::zeros(dim, dim);
        for (col, &s) in states.iter().enumerate() {
            m[(col, col)] += shift;
            for i in 0..n {
                for k in i + 1..n {
                    let (bi, bk) = ((s >> i) & 1, (s >> k) & 1);
                    if bi == bk {
                        m[(col, col)] += 1.0;
                    } else {
                        let t = s ^ (1 << i) ^ (1 << k);
                        m[(pos[&t], col)] += 1.0;
                    }
                }
            }
        }
        let (values, _) = symmetric_eigen_real(m);
        for v in values {
            let two_j = ((1.0 + 4.0 * v).max(0.0).sqrt() - 1.0).round() as usize;
            *counts.entry(two_j).or_insert(0) += 1;
        }
    }
    counts
}

/// Multiplicity of each total spin, cross-checked against a brute-force diagonalization.
pub fn spin_multiplicities(n: usize) -> Result<SpinDecomposition> {
    check_even(n)?;
    let rec = recursion_multiplicities(n);
    let brute = brute_force_eigenspace_dims(n);
    let keys: std::collections::BTreeSet<usize> = rec.keys().chain(brute.keys()).copied().collect();
    let mut multiplicities = BTreeMap::new();
    for two_j in keys {
        let r = rec.get(&two_j).copied().unwrap_or(0);
        let dim = brute.get(&two_j).copied().unwrap_or(0);
        if dim % (two_j + 1) != 0 || dim / (two_j + 1) != r || two_j % 2 == 1 {
            return Err(Error::MultiplicityMismatch { n, two_j, recursion: r, brute_force: dim / (two_j + 1) });
        }
        multiplicities.insert(two_j / 2, r);
    }
    Ok(SpinDecomposition { n, multiplicities })
}

/// `C(N, N/2)(2j+1)/(N/2+j+1)`, the count as printed; agrees with the true multiplicity
/// only at `j = 0`.
pub fn printed_multiplicity(n: usize, j: usize) -> f64 {
    let half = n / 2;
    let binom = (0..half).fold(1.0, |acc, k| acc * (n - k) as f64 / (k + 1) as f64);
    binom * (2 * j + 1) as f64 / (half + j + 1) as f64
}

/// Isometry into a collective-spin sector.
#[derive(Clone, Debug)]
pub struct EncodingIsometry {
    pub n: usize,
    pub j: usize,
    /// `2^n × d`, columns orthonormal.
    pub v: DMatrix<C64>,
}

impl EncodingIsometry {
    pub fn dim(&self) -> usize {
        self.v.ncols()
    }

    /// `‖V†V − 1‖_max`.
    pub fn gram_defect(&self) -> f64 {
        let g = self.v.adjoint() * &self.v;
        let id = DMatrix::<C64>::identity(g.nrows(), g.ncols());
        (g - id).iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    pub fn column(&self, k: usize) -> ComplexVector {
        ComplexVector::from_vec(self.v.column(k).iter().copied().collect())
    }

    /// `V† U^{⊗n} V`.
    pub fn rotated_gram(&self, u: &Gate1) -> DMatrix<C64> {
        let images: Vec<ComplexVector> = (0..self.dim())
            .map(|k| {
                let mut c = self.column(k);
                apply_collective(&mut c, self.n, u);
                c
            })
            .collect();
        DMatrix::from_fn(self.dim(), self.dim(), |a, b| self.column(a).dot(&images[b]))
    }

    /// Binary export: magic `ISOM`, `u32` version 1, then `u64` rows, columns and entry
    /// count, then per nonzero entry `u64` row, `u64` column, `f64` real, `f64` imaginary.
    /// All fields little-endian.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        let entries: Vec<(usize, usize, C64)> = (0..self.v.ncols())
            .flat_map(|c| (0..self.v.nrows()).map(move |r| (r, c)))
            .filter_map(|(r, c)| {
                let x = self.v[(r, c)];
                (x.norm() > 0.0).then_some((r, c, x))
            })
            .collect();
        w.write_all(b"ISOM")?;
        w.write_all(&1u32.to_le_bytes())?;
        for n in [self.v.nrows(), self.v.ncols(), entries.len()] {
            w.write_all(&(n as u64).to_le_bytes())?;
        }
        for (r, c, x) in entries {
            w.write_all(&(r as u64).to_le_bytes())?;
            w.write_all(&(c as u64).to_le_bytes())?;
            w.write_all(&x.re.to_le_bytes())?;
            w.write_all(&x.im.to_le_bytes())?;
        }
        Ok(())
    }

    /// Reads the format of [`Self::write_binary`]; `j` is not stored and is set to `0`.
    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        let mut b4 = [0u8; 4];
        r.read_exact(&mut b4)?;
        if &magic != b"ISOM" || u32::from_le_bytes(b4) != 1 {
            return Err(Error::InvalidArgument("not an ISOM v1 table".into()));
        }
        let mut b8 = [0u8; 8];
        let mut next = |r: &mut R| -> Result<u64> {
            r.read_exact(&mut b8)?;
            Ok(u64::from_le_bytes(b8))
        };
        let (rows, cols, count) = (next(&mut r)? as usize, next(&mut r)? as usize, next(&mut r)? as usize);
        if !rows.is_power_of_two() {
            return Err(Error::InvalidArgument(format!("row count {rows} is not a power of two")));
        }
        let mut v = DMatrix::<C64>::zeros(rows, cols);
        for _ in 0..count {
            let (row, col) = (next(&mut r)? as usize, next(&mut r)? as usize);
            let re = f64::from_bits(next(&mut r)?);
            let im = f64::from_bits(next(&mut r)?);
            if row >= rows || col >= cols {
                return Err(Error::IndexOutOfRange { row, col, dim: rows.max(cols) });
            }
            v[(row, col)] = C64::new(re, im);
        }
        Ok(Self { n: rows.trailing_zeros() as usize, j: 0, v })
    }
}

/// Applies `U^{⊗n}` in place.
pub fn apply_collective(state: &mut ComplexVector, n: usize, u: &Gate1) {
    for q in 0..n {
        apply_1q(state, n, q, u);
    }
}

/// Orthonormal basis of the `j = 0` sector of `n` qubits, one column per coupling path
/// `½ = s_1, s_2, …, s_n = 0` with `|s_{k+1} − s_k| = ½`, paths in lexicographic order
/// of `(2s_1, …, 2s_n)`. Qubit `0` is coupled first; `|0⟩` is spin up.
pub fn singlet_basis(n: usize) -> Result<EncodingIsometry> {
    check_even(n)?;
    let mut columns: Vec<Vec<f64>> = Vec::new();
    // multiplet[(2m + 2s)/2] = |s, m⟩
    let up_down = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
    couple(n, 1, 1, up_down, &mut columns);
    let dim = 1usize << n;
    let v = DMatrix::from_fn(dim, columns.len(), |r, c| C64::new(columns[c][r], 0.0));
    let iso = EncodingIsometry { n, j: 0, v };
    let defect = iso.gram_defect();
    if defect > 1e-12 {
        return Err(Error::NoConvergence { what: "singlet basis orthonormality", iterations: 0, residual: defect });
    }
    Ok(iso)
}

fn couple(n: usize, k: usize, two_s: usize, multiplet: Vec<Vec<f64>>, out: &mut Vec<Vec<f64>>) {
    if k == n {
        if two_s == 0 {
            out.push(multiplet.into_iter().next().unwrap());
        }
        return;
    }
    // a path ending at 0 needs 2s ≤ remaining qubits
    let remaining = n - k;
    let mut targets = Vec::new();
    if two_s > 0 {
        targets.push(two_s - 1);
    }
    targets.push(two_s + 1);
    for two_j in targets {
        if two_j > remaining - 1 {
            continue;
        }
        let next = add_spin_half(&multiplet, two_s, two_j);
        couple(n, k + 1, two_j, next, out);
    }
}

/// Couples `|s, m⟩` (indexed by `(2m + 2s)/2`) with one more qubit to total spin `j`.
fn add_spin_half(multiplet: &[Vec<f64>], two_s: usize, two_j: usize) -> Vec<Vec<f64>> {
    let s = two_s as f64 / 2.0;
    let old_dim = multiplet[0].len();
    let mut out = Vec::with_capacity(two_j + 1);
    for idx in 0..=two_j {
        let m = idx as f64 - two_j as f64 / 2.0;
        let mut v = vec![0.0; old_dim * 2];
        let denom = 2.0 * s + 1.0;
        // σ = +½ (bit 0) from |s, m − ½⟩, σ = −½ (bit 1) from |s, m + ½⟩
        let (c_up, c_down) = if two_j > two_s {
            (((s + m + 0.5) / denom).sqrt(), ((s - m + 0.5) / denom).sqrt())
        } else {
            (-((s - m + 0.5) / denom).sqrt(), ((s + m + 0.5) / denom).sqrt())
        };
        let lookup = |two_m: i64| -> Option<&Vec<f64>> {
            let i = (two_m + two_s as i64) / 2;
            (two_m.abs() <= two_s as i64 && (two_m + two_s as i64) % 2 == 0).then(|| &multiplet[i as usize])
        };
        let two_m = (2.0 * m).round() as i64;
        if let Some(src) = lookup(two_m - 1) {
            for (i, x) in src.iter().enumerate() {
                v[2 * i] += c_up * x;
            }
        }
        if let Some(src) = lookup(two_m + 1) {
            for (i, x) in src.iter().enumerate() {
                v[2 * i + 1] += c_down * x;
            }
        }
        out.push(v);
    }
    out
}

/// First `d_logical` singlet columns of [`BLOCK_QUBITS`] qubits.
pub fn encode_levels(d_logical: usize) -> Result<EncodingIsometry> {
    encode_levels_in(BLOCK_QUBITS, d_logical)
}

pub fn encode_levels_in(n: usize, d_logical: usize) -> Result<EncodingIsometry> {
    let full = singlet_basis(n)?;
    if d_logical == 0 || d_logical > full.dim() {
        return Err(Error::InvalidArgument(format!(
            "{d_logical} logical levels do not fit the {}-dimensional singlet sector of {n} qubits",
            full.dim()
        )));
    }
    Ok(EncodingIsometry { n, j: 0, v: full.v.columns(0, d_logical).into_owned() })
}

/// `(V⊗V) h (V⊗V)†` on two blocks of `n` qubits, applied without materializing it.
#[derive(Clone, Debug)]
pub struct EncodedBondTerm {
    pub iso: EncodingIsometry,
    pub h: SparseOperator,
}

/// Encodes a two-logical-site term into two singlet blocks.
pub fn build_hr_term(h: &SparseOperator, iso: &EncodingIsometry) -> Result<EncodedBondTerm> {
    let d = iso.dim();
    if h.dim() != d * d {
        return Err(Error::DimensionMismatch { expected: d * d, found: h.dim() });
    }
    if !h.is_hermitian() {
        return Err(Error::HermitianRequired);
    }
    Ok(EncodedBondTerm { iso: iso.clone(), h: h.clone() })
}

impl EncodedBondTerm {
    pub fn qubits(&self) -> usize {
        2 * self.iso.n
    }

    pub fn dim(&self) -> usize {
        1 << self.qubits()
    }

    /// Logical amplitudes `(V⊗V)† x`.
    pub fn compress_state(&self, x: &ComplexVector) -> Result<ComplexVector> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: x.dim() });
        }
        let b = 1usize << self.iso.n;
        let xm = DMatrix::from_fn(b, b, |i, k| x[i * b + k]);
        let v = &self.iso.v;
        let y = v.adjoint() * xm * v.map(|z| z.conj());
        let d = self.iso.dim();
        Ok(ComplexVector::from_vec((0..d * d).map(|ab| y[(ab / d, ab % d)]).collect()))
    }

    /// `(V⊗V) z` for logical amplitudes `z`.
    pub fn embed_state(&self, z: &ComplexVector) -> ComplexVector {
        let d = self.iso.dim();
        let b = 1usize << self.iso.n;
        let zm = DMatrix::from_fn(d, d, |a, c| z[a * d + c]);
        let v = &self.iso.v;
        let out = v * zm * v.transpose();
        ComplexVector::from_vec((0..b * b).map(|ik| out[(ik / b, ik % b)]).collect())
    }

    pub fn apply(&self, x: &ComplexVector) -> Result<ComplexVector> {
        let y = self.compress_state(x)?;
        Ok(self.embed_state(&self.h.apply(&y)?))
    }

    /// Explicit sparse matrix, only for `2^{2n} ≤` [`MATERIALIZE_CAP`].
    pub fn to_sparse(&self) -> Result<SparseOperator> {
        let dim = self.dim();
        if dim > MATERIALIZE_CAP {
            return Err(Error::SizeCap { what: "encoded bond term", size: dim, cap: MATERIALIZE_CAP });
        }
        let w = self.iso.v.kronecker(&self.iso.v);
        let m = &w * self.h.to_dense() * w.adjoint();
        SparseOperator::from_dense(&m)
    }

    /// `|r† [U^{⊗2n}, T] r|` for a probe vector `r`.
    pub fn commutator_probe(&self, u: &Gate1, r: &ComplexVector) -> Result<f64> {
        let q = self.qubits();
        let mut ur = r.clone();
        apply_collective(&mut ur, q, u);
        let t_ur = self.apply(&ur)?;
        let mut u_tr = self.apply(r)?;
        apply_collective(&mut u_tr, q, u);
        Ok((r.dot(&u_tr) - r.dot(&t_ur)).norm())
    }

    /// Largest probe over all `(U, r)` pairs, run in parallel over `U`.
    pub fn max_commutator_probe(&self, unitaries: &[Gate1], probes: &[ComplexVector]) -> Result<f64> {
        let per_u = unitaries
            .par_iter()
            .map(|u| {
                probes.iter().map(|r| self.commutator_probe(u, r)).try_fold(0.0f64, |acc, x| x.map(|v| acc.max(v)))
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(per_u.into_iter().fold(0.0, f64::max))
    }
}
