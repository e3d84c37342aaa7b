//! Qubit-register helpers shared by the circuit oracles.
//!
//! Basis ordering is big-endian: qubit 0 is the most significant bit of the index.

use num_complex::Complex64 as C64;
use rand::Rng;

use crate::numkit::{gaussian, ComplexVector};

pub type Gate1 = [[C64; 2]; 2];
pub type Gate2 = [[C64; 4]; 4];

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

#[inline]
fn bit(index: usize, n: usize, q: usize) -> usize {
    (index >> (n - 1 - q)) & 1
}

/// Applies a one-qubit gate to qubit `q` of an `n`-qubit register.
pub fn apply_1q(state: &mut ComplexVector, n: usize, q: usize, u: &Gate1) {
    let stride = 1usize << (n - 1 - q);
    let s = state.as_mut_slice();
    for i in 0..s.len() {
        if i & stride == 0 {
            let (a, b) = (s[i], s[i | stride]);
            s[i] = u[0][0] * a + u[0][1] * b;
            s[i | stride] = u[1][0] * a + u[1][1] * b;
        }
    }
}

/// Applies a two-qubit gate to the ordered pair `(q1, q2)`; `q1` is the high bit of the gate basis.
pub fn apply_2q(state: &mut ComplexVector, n: usize, q1: usize, q2: usize, u: &Gate2) {
    assert!(q1 != q2 && q1 < n && q2 < n, "invalid qubit pair ({q1}, {q2}) for {n} qubits");
    let m1 = 1usize << (n - 1 - q1);
    let m2 = 1usize << (n - 1 - q2);
    let s = state.as_mut_slice();
    for i in 0..s.len() {
        if i & m1 == 0 && i & m2 == 0 {
            let idx = [i, i | m2, i | m1, i | m1 | m2];
            let amp = idx.map(|k| s[k]);
            for (r, &k) in idx.iter().enumerate() {
                s[k] = (0..4).map(|c| u[r][c] * amp[c]).sum();
            }
        }
    }
}

/// Product state `|b_0 b_1 ... b_{n-1}⟩`.
pub fn basis_state(bits: &[u8]) -> ComplexVector {
    let n = bits.len();
    let index = bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
    ComplexVector::basis(1 << n, index)
}

pub fn bits_of(index: usize, n: usize) -> Vec<u8> {
    (0..n).map(|q| bit(index, n, q) as u8).collect()
}

pub fn identity2() -> Gate2 {
    let mut g = [[ZERO; 4]; 4];
    (0..4).for_each(|i| g[i][i] = ONE);
    g
}

pub fn swap() -> Gate2 {
    let mut g = [[ZERO; 4]; 4];
    g[0][0] = ONE;
    g[1][2] = ONE;
    g[2][1] = ONE;
    g[3][3] = ONE;
    g
}

pub fn cnot() -> Gate2 {
    let mut g = [[ZERO; 4]; 4];
    g[0][0] = ONE;
    g[1][1] = ONE;
    g[2][3] = ONE;
    g[3][2] = ONE;
    g
}

pub fn dagger2(u: &Gate2) -> Gate2 {
    let mut g = [[ZERO; 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            g[r][c] = u[c][r].conj();
        }
    }
    g
}

pub fn mul2(a: &Gate2, b: &Gate2) -> Gate2 {
    let mut g = [[ZERO; 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            g[r][c] = (0..4).map(|k| a[r][k] * b[k][c]).sum();
        }
    }
    g
}

/// Largest entry of `|U U† - 1|`.
pub fn unitarity_defect2(u: &Gate2) -> f64 {
    let p = mul2(u, &dagger2(u));
    let mut worst: f64 = 0.0;
    for r in 0..4 {
        for c in 0..4 {
            let target = if r == c { ONE } else { ZERO };
            worst = worst.max((p[r][c] - target).norm());
        }
    }
    worst
}

pub fn unitarity_defect1(u: &Gate1) -> f64 {
    let mut worst: f64 = 0.0;
    for r in 0..2 {
        for c in 0..2 {
            let p: C64 = (0..2).map(|k| u[r][k] * u[c][k].conj()).sum();
            let target = if r == c { ONE } else { ZERO };
            worst = worst.max((p - target).norm());
        }
    }
    worst
}

/// Random special-unitary 2x2 matrix from a normalized gaussian quaternion.
pub fn random_su2<R: Rng + ?Sized>(rng: &mut R) -> Gate1 {
    let mut q = [gaussian(rng), gaussian(rng), gaussian(rng), gaussian(rng)];
    let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    q.iter_mut().for_each(|x| *x /= n);
    let a = C64::new(q[0], q[1]);
    let b = C64::new(q[2], q[3]);
    [[a, -b.conj()], [b, a.conj()]]
}

/// Random unitary 4x4 matrix by Gram-Schmidt on gaussian columns.
pub fn random_unitary2<R: Rng + ?Sized>(rng: &mut R) -> Gate2 {
    let mut cols: Vec<[C64; 4]> = Vec::new();
    while cols.len() < 4 {
        let mut v = [ZERO; 4];
        v.iter_mut().for_each(|z| *z = C64::new(gaussian(rng), gaussian(rng)));
        for c in &cols {
            let p: C64 = (0..4).map(|i| c[i].conj() * v[i]).sum();
            (0..4).for_each(|i| v[i] -= p * c[i]);
        }
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n > 1e-8 {
            v.iter_mut().for_each(|z| *z /= n);
            cols.push(v);
        }
    }
    let mut g = [[ZERO; 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            g[r][c] = cols[c][r];
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn swap_exchanges_qubits() {
        let mut s = basis_state(&[0, 1, 1]);
        apply_2q(&mut s, 3, 0, 1, &swap());
        assert_eq!(s, basis_state(&[1, 0, 1]));
    }

    #[test]
    fn cnot_orientation_follows_argument_order() {
        let mut s = basis_state(&[0, 1]);
        apply_2q(&mut s, 2, 1, 0, &cnot());
        assert_eq!(s, basis_state(&[1, 1]));
    }

    #[test]
    fn random_gates_are_unitary() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            assert!(unitarity_defect2(&random_unitary2(&mut rng)) < 1e-12);
            assert!(unitarity_defect1(&random_su2(&mut rng)) < 1e-12);
        }
    }
}
