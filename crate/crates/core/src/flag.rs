//! Flag patterns that mark the start of each encoded block, and a contraction engine for
//! their overlaps with shifted detector projectors.
//!
//! Patterns are products of one- and two-qubit factors. The periodic background repeats
//! the flag state followed by a block of free (adversarial) logical qubits. A shifted
//! overlap is evaluated component by component on the union graph of state and projector
//! factors, so no vector on the full period is ever formed.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::{hermitian_eigenvalues, ComplexVector};
use crate::statevec::{apply_1q, apply_2q, Gate1, Gate2};

/// Flag qubits per block.
pub const FLAG_QUBITS: usize = 43;
/// Flag plus one encoded logical spin.
pub const FLAG_PERIOD: usize = 53;
/// Largest connected component contracted densely.
pub const COMPONENT_CAP: usize = 24;
/// Qubits per encoded logical spin.
pub const LOGICAL_QUBITS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Tag {
    /// `|ψ−⟩⟨ψ−|`, or the state `|ψ−⟩` in a state pattern.
    P1,
    /// `1 − |ψ−⟩⟨ψ−|`.
    P3,
    #[serde(rename = "ID")]
    Id,
    /// Explicit pure state, or its projector in a projector pattern.
    #[serde(rename = "state")]
    State,
}

/// One factor of a pair-product pattern on one or two qubits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Factor {
    pub pair: Vec<usize>,
    pub tag: Tag,
    /// Amplitudes `[re, im]` in the computational basis, first qubit most significant.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<Vec<[f64; 2]>>,
}

impl Factor {
    pub fn new(pair: &[usize], tag: Tag) -> Self {
        Self { pair: pair.to_vec(), tag, state: None }
    }

    pub fn with_state(pair: &[usize], amps: &[f64]) -> Self {
        Self { pair: pair.to_vec(), tag: Tag::State, state: Some(amps.iter().map(|&a| [a, 0.0]).collect()) }
    }

    /// Normalized state vector of this factor when read as a state.
    pub fn vector(&self) -> Result<Option<Vec<C64>>> {
        let k = self.pair.len();
        match self.tag {
            Tag::Id => Ok(None),
            Tag::P1 if k == 2 => Ok(Some(psi_minus().to_vec())),
            Tag::State => {
                let amps = self.state.as_ref().ok_or_else(|| bad_factor(self, "missing state"))?;
                if amps.len() != 1 << k {
                    return Err(bad_factor(self, "state length does not match the factor size"));
                }
                let v: Vec<C64> = amps.iter().map(|&[re, im]| C64::new(re, im)).collect();
                let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                if norm == 0.0 {
                    return Err(bad_factor(self, "zero state"));
                }
                Ok(Some(v.into_iter().map(|z| z / norm).collect()))
            }
            _ => Err(bad_factor(self, "tag has no state reading")),
        }
    }

    /// Projector of this factor, on `2^k` dimensions.
    pub fn projector(&self) -> Result<DMatrix<C64>> {
        let k = self.pair.len();
        let dim = 1 << k;
        match self.tag {
            Tag::Id => Ok(DMatrix::identity(dim, dim)),
            Tag::P1 | Tag::P3 if k == 2 => {
                let p = psi_minus();
                let p1 = DMatrix::from_fn(4, 4, |r, c| p[r] * p[c].conj());
                Ok(if self.tag == Tag::P1 { p1 } else { DMatrix::identity(4, 4) - p1 })
            }
            Tag::State => {
                let v = self.vector()?.unwrap();
                Ok(DMatrix::from_fn(dim, dim, |r, c| v[r] * v[c].conj()))
            }
            _ => Err(bad_factor(self, "P1 and P3 act on two qubits")),
        }
    }
}

fn bad_factor(f: &Factor, why: &str) -> Error {
    Error::InvalidArgument(format!("factor {:?} on {:?}: {why}", f.tag, f.pair))
}

/// `(|01⟩ − |10⟩)/√2`.
pub fn psi_minus() -> [C64; 4] {
    let z = C64::new(0.0, 0.0);
    let s = C64::new(FRAC_1_SQRT_2, 0.0);
    [z, s, -s, z]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairProductPattern {
    pub span: usize,
    pub factors: Vec<Factor>,
}

impl PairProductPattern {
    pub fn new(span: usize, factors: Vec<Factor>) -> Result<Self> {
        let p = Self { span, factors };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let mut used = vec![false; self.span];
        for f in &self.factors {
            if f.pair.is_empty() || f.pair.len() > 2 {
                return Err(bad_factor(f, "factors act on one or two qubits"));
            }
            for &q in &f.pair {
                if q >= self.span || std::mem::replace(&mut used[q], true) {
                    return Err(bad_factor(f, "position out of span or already used"));
                }
            }
            f.projector()?;
        }
        Ok(())
    }

    /// Positions not covered by any factor.
    pub fn free_positions(&self) -> Vec<usize> {
        let mut used = vec![false; self.span];
        for f in &self.factors {
            for &q in &f.pair {
                used[q] = true;
            }
        }
        (0..self.span).filter(|&q| !used[q]).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.factors)?)
    }

    pub fn from_json(span: usize, text: &str) -> Result<Self> {
        Self::new(span, serde_json::from_str(text)?)
    }
}

/// Contiguous section of the flag with a label.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Section {
    pub name: String,
    pub start: usize,
    pub end: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlagLayout {
    pub projector: PairProductPattern,
    pub state: PairProductPattern,
    pub sections: Vec<Section>,
}

impl FlagLayout {
    pub fn span(&self) -> usize {
        self.projector.span
    }

    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }

    /// Factors of the projector lying inside a section.
    pub fn section_factors(&self, name: &str) -> Vec<&Factor> {
        let Some(s) = self.section(name) else { return Vec::new() };
        self.projector.factors.iter().filter(|f| f.pair.iter().all(|&q| q >= s.start && q < s.end)).collect()
    }

    /// The layout with one section's factors removed from both patterns.
    pub fn without_section(&self, name: &str) -> Self {
        let Some(s) = self.section(name).cloned() else { return self.clone() };
        let keep = |f: &Factor| !f.pair.iter().any(|&q| q >= s.start && q < s.end);
        let strip = |p: &PairProductPattern| PairProductPattern {
            span: p.span,
            factors: p.factors.iter().filter(|f| keep(f)).cloned().collect(),
        };
        Self { projector: strip(&self.projector), state: strip(&self.state), sections: self.sections.clone() }
    }
}

/// The 43-qubit flag: section A holds `P1(0,2) ⊗ P3(1,3) ⊗ P1(4,5)`; section B eight `P3`
/// pairs on `6..22`; then `P1(22,23)` and a single identity at `24`; section C nine `P3`
/// pairs on `25..43`. The flag state puts `|ψ−⟩` under every `P1`, `|00⟩` under every
/// `P3`, and `|0⟩` on the identity qubit.
pub fn default_flag_layout() -> FlagLayout {
    let mut proj = vec![Factor::new(&[0, 2], Tag::P1), Factor::new(&[1, 3], Tag::P3), Factor::new(&[4, 5], Tag::P1)];
    let b: Vec<[usize; 2]> = (0..8).map(|i| [6 + 2 * i, 7 + 2 * i]).collect();
    let c: Vec<[usize; 2]> = (0..9).map(|i| [25 + 2 * i, 26 + 2 * i]).collect();
    proj.extend(b.iter().map(|p| Factor::new(p, Tag::P3)));
    proj.push(Factor::new(&[22, 23], Tag::P1));
    proj.extend(c.iter().map(|p| Factor::new(p, Tag::P3)));

    let zero2 = [1.0, 0.0, 0.0, 0.0];
    let mut state =
        vec![Factor::new(&[0, 2], Tag::P1), Factor::with_state(&[1, 3], &zero2), Factor::new(&[4, 5], Tag::P1)];
    state.extend(b.iter().map(|p| Factor::with_state(p, &zero2)));
    state.push(Factor::new(&[22, 23], Tag::P1));
    state.push(Factor::with_state(&[24], &[1.0, 0.0]));
    state.extend(c.iter().map(|p| Factor::with_state(p, &zero2)));

    let section = |name: &str, start, end| Section { name: name.into(), start, end };
    FlagLayout {
        projector: PairProductPattern::new(FLAG_QUBITS, proj).expect("default projector is valid"),
        state: PairProductPattern::new(FLAG_QUBITS, state).expect("default state is valid"),
        sections: vec![section("A", 0, 6), section("B", 6, 22), section("C", 25, 43)],
    }
}

/// Largest `⟨ψ|Π_s|ψ⟩` over all states of the free positions, where `ψ` repeats `state`
/// with period `period` (positions past its span are free) and `Π_s` is `proj` moved
/// right by `shift`.
pub fn shifted_expectation(
    proj: &PairProductPattern,
    state: &PairProductPattern,
    shift: usize,
    period: usize,
) -> Result<f64> {
    if proj.span > period || state.span > period {
        return Err(Error::InvalidArgument(format!("patterns longer than the period {period}")));
    }
    let mut uf = UnionFind::new(period);
    let state_factors: Vec<Factor> = state.factors.iter().filter(|f| f.tag != Tag::Id).cloned().collect();
    let proj_factors: Vec<Factor> = proj
        .factors
        .iter()
        .filter(|f| f.tag != Tag::Id)
        .map(|f| Factor { pair: f.pair.iter().map(|&q| (q + shift) % period).collect(), ..f.clone() })
        .collect();
    for f in state_factors.iter().chain(&proj_factors) {
        if let [a, b] = f.pair[..] {
            uf.union(a, b);
        }
    }
    let mut comps: BTreeMap<usize, (Vec<&Factor>, Vec<&Factor>)> = BTreeMap::new();
    for f in &proj_factors {
        comps.entry(uf.find(f.pair[0])).or_default().0.push(f);
    }
    for f in &state_factors {
        if let Some(entry) = comps.get_mut(&uf.find(f.pair[0])) {
            entry.1.push(f);
        }
    }
    let mut value = 1.0;
    for (root, (projs, states)) in comps {
        let qubits: Vec<usize> = (0..period).filter(|&q| uf.find(q) == root).collect();
        value *= component_max(&qubits, &projs, &states)?;
        if value == 0.0 {
            break;
        }
    }
    Ok(value)
}

fn component_max(qubits: &[usize], projs: &[&Factor], states: &[&Factor]) -> Result<f64> {
    let n = qubits.len();
    if n > COMPONENT_CAP {
        return Err(Error::ComponentTooLarge { size: n, cap: COMPONENT_CAP });
    }
    let local: BTreeMap<usize, usize> = qubits.iter().enumerate().map(|(i, &q)| (q, i)).collect();
    let fixed: Vec<usize> = states.iter().flat_map(|f| f.pair.iter().copied()).collect();
    let free: Vec<usize> = qubits.iter().copied().filter(|q| !fixed.contains(q)).collect();
    // |φ_fixed⟩ ⊗ |f⟩ for every free basis string f
    let dim = 1usize << n;
    let mut fixed_amp = vec![(0usize, C64::new(1.0, 0.0))];
    for f in states {
        let v = f.vector()?.expect("state factors carry vectors");
        let k = f.pair.len();
        let mut next = Vec::with_capacity(fixed_amp.len() * v.len());
        for &(idx, amp) in &fixed_amp {
            for (x, &c) in v.iter().enumerate() {
                if c.norm() == 0.0 {
                    continue;
                }
                let mut i = idx;
                for (t, &q) in f.pair.iter().enumerate() {
                    if (x >> (k - 1 - t)) & 1 == 1 {
                        i |= 1 << (n - 1 - local[&q]);
                    }
                }
                next.push((i, amp * c));
            }
        }
        fixed_amp = next;
    }
    let basis: Vec<ComplexVector> = (0..1usize << free.len())
        .map(|fbits| {
            let mut offset = 0;
            for (t, &q) in free.iter().enumerate() {
                if (fbits >> (free.len() - 1 - t)) & 1 == 1 {
                    offset |= 1 << (n - 1 - local[&q]);
                }
            }
            let mut v = ComplexVector::zeros(dim);
            for &(i, a) in &fixed_amp {
                v.as_mut_slice()[i | offset] += a;
            }
            v
        })
        .collect();
    let images: Vec<ComplexVector> = basis
        .iter()
        .map(|b| {
            let mut v = b.clone();
            for f in projs {
                let p = f.projector()?;
                match f.pair[..] {
                    [a] => {
                        let g: Gate1 = [[p[(0, 0)], p[(0, 1)]], [p[(1, 0)], p[(1, 1)]]];
                        apply_1q(&mut v, n, local[&a], &g);
                    }
                    [a, b] => {
                        let mut g: Gate2 = [[C64::new(0.0, 0.0); 4]; 4];
                        for (r, row) in g.iter_mut().enumerate() {
                            for (c, x) in row.iter_mut().enumerate() {
                                *x = p[(r, c)];
                            }
                        }
                        apply_2q(&mut v, n, local[&a], local[&b], &g);
                    }
                    _ => unreachable!(),
                }
            }
            Ok(v)
        })
        .collect::<Result<_>>()?;
    let m = DMatrix::from_fn(basis.len(), basis.len(), |r, c| basis[r].dot(&images[c]));
    let top = hermitian_eigenvalues(&m).last().copied().unwrap_or(0.0);
    Ok(top.max(0.0))
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        Self((0..n).collect())
    }

    fn find(&mut self, x: usize) -> usize {
        let p = self.0[x];
        if p == x {
            return x;
        }
        let r = self.find(p);
        self.0[x] = r;
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        self.0[ra.max(rb)] = ra.min(rb);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuppressionReport {
    pub period: usize,
    /// Expectation at shift 0.
    pub aligned: f64,
    /// `(shift, value)` for shifts `1..period`.
    pub shifted: Vec<(usize, f64)>,
    /// Shifts whose value exceeds the tolerance.
    pub failing: Vec<usize>,
    pub tolerance: f64,
}

impl SuppressionReport {
    pub fn passed(&self) -> bool {
        self.failing.is_empty() && (self.aligned - 1.0).abs() <= self.tolerance
    }

    pub fn max_shifted(&self) -> f64 {
        self.shifted.iter().map(|&(_, v)| v).fold(0.0, f64::max)
    }
}

/// Sweeps every shift of the projector against the periodic flag state.
pub fn verify_suppression(layout: &FlagLayout, period: usize) -> Result<SuppressionReport> {
    let tolerance = 1e-12;
    let aligned = shifted_expectation(&layout.projector, &layout.state, 0, period)?;
    let shifted = (1..period)
        .into_par_iter()
        .map(|s| Ok((s, shifted_expectation(&layout.projector, &layout.state, s, period)?)))
        .collect::<Result<Vec<_>>>()?;
    let failing = shifted.iter().filter(|&&(_, v)| v > tolerance).map(|&(s, _)| s).collect();
    Ok(SuppressionReport { period, aligned, shifted, failing, tolerance })
}

/// Warm-up pattern for rotations about one axis: `|11⟩` then `0 q_k` for each of `n_logical`
/// free qubits, detected by `|11⟩⟨11|` on the first two qubits.
pub fn z_flag_patterns(n_logical: usize) -> Result<(PairProductPattern, PairProductPattern)> {
    let span = 3 + 2 * n_logical;
    let ones = [0.0, 0.0, 0.0, 1.0];
    let detector = PairProductPattern::new(span, vec![Factor::with_state(&[0, 1], &ones)])?;
    let mut state = vec![Factor::with_state(&[0, 1], &ones)];
    state.extend((0..=n_logical).map(|k| Factor::with_state(&[2 + 2 * k], &[1.0, 0.0])));
    Ok((detector, PairProductPattern::new(span, state)?))
}

/// Structure of one translationally invariant term acting on `2·43 + 2·10` qubits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HrtTermDescriptor {
    pub bond: usize,
    pub flag_offsets: [usize; 2],
    pub logical_offsets: [usize; 2],
    pub flag_len: usize,
    pub logical_len: usize,
    pub period: usize,
}

impl HrtTermDescriptor {
    pub fn qubits(&self) -> usize {
        2 * (self.flag_len + self.logical_len)
    }

    /// First qubit acted on.
    pub fn start(&self) -> usize {
        self.flag_offsets[0]
    }

    /// Upper bound on `‖T ψ‖ / ‖h‖` over all logical contents, for a periodic probe whose
    /// flags sit `shift` qubits to the right of the term's flags.
    pub fn probe_norm_bound(&self, layout: &FlagLayout, shift: usize) -> Result<f64> {
        let back = (self.period - shift % self.period) % self.period;
        let e = shifted_expectation(&layout.projector, &layout.state, back, self.period)?;
        Ok(e.sqrt())
    }
}

/// Descriptor of the term on bond `i ≥ 1`, between blocks `i` and `i + 1`.
pub fn hrt_term_descriptor(i: usize) -> Result<HrtTermDescriptor> {
    hrt_term_descriptor_with(i, FLAG_QUBITS, LOGICAL_QUBITS, FLAG_PERIOD)
}

pub fn hrt_term_descriptor_with(
    i: usize,
    flag_len: usize,
    logical_len: usize,
    period: usize,
) -> Result<HrtTermDescriptor> {
    if i == 0 {
        return Err(Error::InvalidArgument("bond indices start at 1".into()));
    }
    if flag_len + logical_len > period {
        return Err(Error::InvalidArgument(format!(
            "flag ({flag_len}) and logical block ({logical_len}) overlap within period {period}"
        )));
    }
    let a = period * (i - 1);
    let b = period * i;
    Ok(HrtTermDescriptor {
        bond: i,
        flag_offsets: [a, b],
        logical_offsets: [a + flag_len, b + flag_len],
        flag_len,
        logical_len,
        period,
    })
}
