use std::collections::{BTreeMap, HashMap, VecDeque};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::bond::BondTable;
use super::site::{Configuration, Levels, SiteState};
use crate::error::{Error, Result};
use crate::numkit::ComplexVector;
use crate::statevec::{apply_1q, apply_2q};

/// Largest clock graph explored before giving up.
pub const MAX_CLOCK_CONFIGS: usize = 200_000;

/// Action of one clock transition on the data register: a `2^k × 2^k` block on the data
/// qubits sitting at the listed ring sites (`k ≤ 2`), first site most significant.
#[derive(Clone, Debug, PartialEq)]
pub struct DataMap {
    pub sites: Vec<usize>,
    pub matrix: Vec<Vec<C64>>,
}

impl DataMap {
    pub fn is_identity(&self, tol: f64) -> bool {
        self.matrix.iter().enumerate().all(|(r, row)| {
            row.iter().enumerate().all(|(c, v)| (v - C64::new(f64::from(u8::from(r == c)), 0.0)).norm() <= tol)
        })
    }

    pub fn unitarity_defect(&self) -> f64 {
        let n = self.matrix.len();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let s: C64 = (0..n).map(|k| self.matrix[k][i].conj() * self.matrix[k][j]).sum();
                worst = worst.max((s - C64::new(f64::from(u8::from(i == j)), 0.0)).norm());
            }
        }
        worst
    }

    /// Applies the block to `state`; `qubit_of` maps a ring site to its data qubit.
    pub fn apply(&self, state: &mut ComplexVector, n_data: usize, qubit_of: &HashMap<usize, usize>) {
        match self.sites.as_slice() {
            [] => {}
            [s] => {
                let m = &self.matrix;
                apply_1q(state, n_data, qubit_of[s], &[[m[0][0], m[0][1]], [m[1][0], m[1][1]]]);
            }
            [s, t] => {
                let mut u = [[C64::new(0.0, 0.0); 4]; 4];
                for (r, row) in self.matrix.iter().enumerate() {
                    u[r].copy_from_slice(row);
                }
                apply_2q(state, n_data, qubit_of[s], qubit_of[t], &u);
            }
            _ => unreachable!("a bond touches at most two data sites"),
        }
    }
}

/// Clock configurations reachable under `H_T`, ordered along the path.
#[derive(Clone, Debug)]
pub struct ClockPath {
    pub levels: Levels,
    /// Configurations with data bits replaced by `0`.
    pub configs: Vec<Configuration>,
    /// `steps[k]` carries data frame `k` to frame `k + 1`.
    pub steps: Vec<DataMap>,
    /// Position of the starting configuration in `configs`.
    pub start: usize,
    pub data_sites: Vec<usize>,
}

impl ClockPath {
    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    pub fn n_data(&self) -> usize {
        self.data_sites.len()
    }

    fn qubit_of(&self) -> HashMap<usize, usize> {
        self.data_sites.iter().enumerate().map(|(q, &s)| (s, q)).collect()
    }

    /// Data states `ψ_k` of the history frames, starting from `psi` on `configs[0]`.
    pub fn frames(&self, psi: &ComplexVector) -> Result<Vec<ComplexVector>> {
        let n = self.n_data();
        if psi.dim() != 1 << n {
            return Err(Error::DimensionMismatch { expected: 1 << n, found: psi.dim() });
        }
        let qubit_of = self.qubit_of();
        let mut out = Vec::with_capacity(self.len());
        out.push(psi.clone());
        for step in &self.steps {
            let mut next = out.last().unwrap().clone();
            step.apply(&mut next, n, &qubit_of);
            out.push(next);
        }
        Ok(out)
    }

    /// Product of all step maps applied to `psi`.
    pub fn output(&self, psi: &ComplexVector) -> Result<ComplexVector> {
        Ok(self.frames(psi)?.pop().unwrap())
    }

    /// Concrete configuration `k` with the given data bits.
    pub fn concrete(&self, k: usize, bits: &[u8]) -> Configuration {
        let mut c = self.configs[k].clone();
        for (&s, &b) in self.data_sites.iter().zip(bits) {
            if let SiteState::Sp { q, .. } = &mut c.0[s] {
                *q = b;
            }
        }
        c
    }

    /// Analytic spectrum `2 cos(πm/(L+1))`, `m = 1..=L`, of the unit-hopping path.
    pub fn analytic_spectrum(&self) -> Vec<f64> {
        let l = self.len() as f64;
        (1..=self.len()).map(|m| 2.0 * (std::f64::consts::PI * m as f64 / (l + 1.0)).cos()).collect()
    }
}

/// Neighbours of an abstract configuration under one application of `H_T`.
pub fn clock_neighbours(config: &Configuration, table: &BondTable) -> Result<Vec<(Configuration, DataMap)>> {
    let m = config.len();
    let mut found: BTreeMap<Configuration, DataMap> = BTreeMap::new();
    let bonds: Vec<(usize, usize)> = (0..m).map(|i| (i, (i + 1) % m)).collect();
    for (i, j) in bonds {
        let (a, b) = (config.0[i], config.0[j]);
        let sites: Vec<usize> = [(i, a), (j, b)].iter().filter(|(_, s)| s.is_data()).map(|&(k, _)| k).collect();
        let k = sites.len();
        let mut blocks: BTreeMap<(SiteState, SiteState), Vec<Vec<C64>>> = BTreeMap::new();
        for col in 0..1usize << k {
            let mut bits = [0u8; 2];
            for (t, bit) in bits.iter_mut().take(k).enumerate() {
                *bit = ((col >> (k - 1 - t)) & 1) as u8;
            }
            let mut it = bits.iter().take(k);
            let set = |s: SiteState, it: &mut dyn Iterator<Item = &u8>| match s {
                SiteState::Sp { l: 0, q: 0 | 1, head } => SiteState::Sp { q: *it.next().unwrap(), l: 0, head },
                other => other,
            };
            let ca = set(a, &mut it);
            let cb = set(b, &mut it);
            for (a2, b2, v) in table.apply_pair(ca, cb)? {
                if a2.is_data() != a.is_data() || b2.is_data() != b.is_data() {
                    return Err(Error::InvalidConfiguration(format!("transition moves data at {config}")));
                }
                let out_bits: Vec<u8> = [a2, b2].iter().filter_map(|s| s.bit()).collect();
                let row = out_bits.iter().fold(0usize, |acc, &x| acc * 2 + x as usize);
                let key = (abstract_site(a2), abstract_site(b2));
                let block = blocks.entry(key).or_insert_with(|| vec![vec![C64::new(0.0, 0.0); 1 << k]; 1 << k]);
                block[row][col] += v;
            }
        }
        for ((a2, b2), matrix) in blocks {
            let mut next = config.clone();
            next.0[i] = a2;
            next.0[j] = b2;
            if next == *config {
                continue;
            }
            if found.contains_key(&next) {
                return Err(Error::InvalidConfiguration(format!("two bonds connect {config} to {next}")));
            }
            found.insert(next, DataMap { sites: sites.clone(), matrix });
        }
    }
    Ok(found.into_iter().collect())
}

fn abstract_site(s: SiteState) -> SiteState {
    match s {
        SiteState::Sp { q: 0 | 1, l: 0, head } => SiteState::Sp { q: 0, l: 0, head },
        other => other,
    }
}

/// Breadth-first search of the clock graph from `initial`, which must reduce to a simple
/// path with unitary transitions.
pub fn reachable_clock_path(initial: &Configuration, levels: Levels) -> Result<ClockPath> {
    clock_path_with(initial, &BondTable::new(levels))
}

pub fn clock_path_with(initial: &Configuration, table: &BondTable) -> Result<ClockPath> {
    let levels = table.levels();
    for s in initial.sites() {
        s.index(levels)?;
    }
    let start = initial.abstracted();
    let mut adjacency: HashMap<Configuration, Vec<(Configuration, DataMap)>> = HashMap::new();
    let mut queue = VecDeque::from([start.clone()]);
    adjacency.insert(start.clone(), Vec::new());
    let mut edges2 = 0usize;
    while let Some(c) = queue.pop_front() {
        let nbrs = clock_neighbours(&c, table)?;
        if nbrs.len() > 2 {
            return Err(Error::Branching { config: c.to_string(), degree: nbrs.len() });
        }
        for (n, map) in &nbrs {
            if map.unitarity_defect() > 1e-12 {
                return Err(Error::InvalidConfiguration(format!("non-unitary transition {c} -> {n}")));
            }
            if !adjacency.contains_key(n) {
                if adjacency.len() >= MAX_CLOCK_CONFIGS {
                    return Err(Error::SizeCap {
                        what: "clock graph",
                        size: adjacency.len() + 1,
                        cap: MAX_CLOCK_CONFIGS,
                    });
                }
                adjacency.insert(n.clone(), Vec::new());
                queue.push_back(n.clone());
            }
        }
        edges2 += nbrs.len();
        *adjacency.get_mut(&c).unwrap() = nbrs;
    }
    if edges2 / 2 + 1 != adjacency.len() {
        return Err(Error::InvalidConfiguration(format!("clock graph from {initial} contains a cycle")));
    }
    let first = if adjacency[&start].len() <= 1 {
        start.clone()
    } else {
        let mut end = adjacency.keys().filter(|c| adjacency[*c].len() <= 1).cloned().collect::<Vec<_>>();
        end.sort();
        end.swap_remove(0)
    };
    let mut configs = vec![first.clone()];
    let mut steps = Vec::new();
    let mut prev: Option<Configuration> = None;
    let mut cur = first;
    loop {
        let next = adjacency[&cur].iter().find(|(n, _)| Some(n) != prev.as_ref()).cloned();
        let Some((n, map)) = next else { break };
        steps.push(map);
        configs.push(n.clone());
        prev = Some(std::mem::replace(&mut cur, n));
    }
    let position = configs.iter().position(|c| *c == start).unwrap();
    let data_sites = start.data_sites();
    Ok(ClockPath { levels, configs, steps, start: position, data_sites })
}

/// A vector in the full ring space, stored sparsely by configuration.
pub type SparseState = HashMap<Configuration, C64>;

/// `H_T |state⟩` through the bond table, without building the full operator.
pub fn apply_ht_sparse(state: &SparseState, table: &BondTable) -> Result<SparseState> {
    let mut out = SparseState::new();
    for (c, &amp) in state {
        let m = c.len();
        for i in 0..m {
            let j = (i + 1) % m;
            for (a, b, v) in table.apply_pair(c.0[i], c.0[j])? {
                let mut next = c.clone();
                next.0[i] = a;
                next.0[j] = b;
                *out.entry(next).or_default() += v * amp;
            }
        }
    }
    Ok(out)
}

/// History frame `|c_k⟩ ⊗ ψ_k` as a sparse ring vector.
pub fn frame_vector(path: &ClockPath, k: usize, psi_k: &ComplexVector) -> SparseState {
    let n = path.n_data();
    (0..psi_k.dim())
        .filter(|&x| psi_k[x].norm() > 0.0)
        .map(|x| {
            let bits: Vec<u8> = (0..n).map(|q| ((x >> (n - 1 - q)) & 1) as u8).collect();
            (path.concrete(k, &bits), psi_k[x])
        })
        .collect()
}

/// `⟨f_j|H_T|f_k⟩` over the history frames generated from `psi`, together with the largest
/// squared norm of `H_T f_k` falling outside their span.
pub fn restricted_hamiltonian(path: &ClockPath, psi: &ComplexVector, table: &BondTable) -> Result<(DMatrix<C64>, f64)> {
    let frames = path.frames(psi)?;
    let vecs: Vec<SparseState> = frames.iter().enumerate().map(|(k, f)| frame_vector(path, k, f)).collect();
    let norms: Vec<f64> = vecs.iter().map(|v| v.values().map(|x| x.norm_sqr()).sum()).collect();
    let l = path.len();
    let mut h = DMatrix::zeros(l, l);
    let mut leakage: f64 = 0.0;
    for k in 0..l {
        let image = apply_ht_sparse(&vecs[k], table)?;
        let mut captured = 0.0;
        for j in k.saturating_sub(1)..(k + 2).min(l) {
            let overlap: C64 = vecs[j].iter().filter_map(|(c, a)| image.get(c).map(|b| a.conj() * b)).sum();
            h[(j, k)] = overlap / (norms[j] * norms[k]).sqrt();
            captured += overlap.norm_sqr() / norms[j];
        }
        let total: f64 = image.values().map(|x| x.norm_sqr()).sum();
        leakage = leakage.max((total - captured) / norms[k]);
    }
    Ok((h, leakage))
}
