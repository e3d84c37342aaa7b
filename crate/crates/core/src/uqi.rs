//! Universal-quantum-interface chains.
//!
//! Each site holds a read-head register of dimension `d` (level `0` is empty) and one
//! computational qubit. A gadget is a table of hop rules `(l → r, U)`: the bond term
//! `|0 r⟩⟨l 0| ⊗ U + h.c.` moves a head in state `l` one site right, leaves it in state `r`
//! and applies `U` to the two computational qubits of the bond.
//!
//! With a single head, the label is a function of position. The dynamics then factorizes
//! into a hopping chain for the head amplitudes and a fixed sequence of staged
//! computational states `ψ_{i+1} = U_i ψ_i`.
//!
//! Full-space basis index: `head_index · 2^N + qubit_index`, both big-endian in the site.

use std::collections::{HashMap, VecDeque};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::globalprog::g_gate;
use crate::numkit::{ComplexVector, SparseOperator, TripletBuilder};
use crate::statevec::{
    apply_1q, apply_2q, cnot, dagger2, identity2, swap, unitarity_defect1, unitarity_defect2, Gate1, Gate2,
};
use crate::xxchain::HoppingChain;

const UNITARY_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub enum Gadget {
    /// XX+YY hopping dressed with SWAP.
    SwapHop,
    /// Every hop applies `U`.
    Uniform(Gate2),
    /// Head levels 1, 2; only hops out of level 1 apply `U`.
    Alternating(Gate2),
    /// Head levels 1, 2 apply `U` and `V` respectively.
    Selective(Gate2, Gate2),
    /// Five-level head `n ⊕ (a ⊗ r)`; `r` selects `U` or `V`, `a` alternates and only `a = 1` applies.
    Combined(Gate2, Gate2),
}

#[derive(Clone, Debug, PartialEq)]
pub struct HopRule {
    pub left: usize,
    pub right: usize,
    pub gate: Gate2,
}

/// Five-level head label of `(a, r)`; level `0` is `n`.
pub fn combined_label(a: usize, r: usize) -> usize {
    1 + 2 * a + r
}

impl Gadget {
    pub fn head_dim(&self) -> usize {
        match self {
            Self::SwapHop | Self::Uniform(_) => 2,
            Self::Alternating(_) | Self::Selective(..) => 3,
            Self::Combined(..) => 5,
        }
    }

    pub fn rules(&self) -> Vec<HopRule> {
        let rule = |left, right, gate| HopRule { left, right, gate };
        match self {
            Self::SwapHop => vec![rule(1, 1, swap())],
            Self::Uniform(u) => vec![rule(1, 1, *u)],
            Self::Alternating(u) => vec![rule(1, 2, *u), rule(2, 1, identity2())],
            Self::Selective(u, v) => vec![rule(1, 1, *u), rule(2, 2, *v)],
            Self::Combined(u, v) => [u, v]
                .iter()
                .enumerate()
                .flat_map(|(r, g)| {
                    [
                        rule(combined_label(1, r), combined_label(0, r), **g),
                        rule(combined_label(0, r), combined_label(1, r), identity2()),
                    ]
                })
                .collect(),
        }
    }

    /// Largest chain length for which the full space may be built.
    pub fn full_space_cap(&self) -> usize {
        match self.head_dim() {
            2 => 8,
            3 => 7,
            _ => 6,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UqiChainSpec {
    pub n: usize,
    pub gadget: Gadget,
}

impl UqiChainSpec {
    pub fn new(n: usize, gadget: Gadget) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!("chain of {n} sites")));
        }
        for r in gadget.rules() {
            let defect = unitarity_defect2(&r.gate);
            if defect > UNITARY_TOL {
                return Err(Error::InvalidArgument(format!("bond gate not unitary (defect {defect:e})")));
            }
        }
        Ok(Self { n, gadget })
    }

    pub fn head_dim(&self) -> usize {
        self.gadget.head_dim()
    }

    pub fn full_dim(&self) -> usize {
        self.head_dim().pow(self.n as u32) << self.n
    }

    /// Label reached by hopping right from `label`, with the gate the hop applies.
    fn hop_right(&self, label: usize) -> Option<(usize, Gate2)> {
        self.gadget.rules().into_iter().find(|r| r.left == label).map(|r| (r.right, r.gate))
    }

    /// Label reached by hopping left into `label`'s left neighbour, with the gate of that bond.
    fn hop_left(&self, label: usize) -> Option<(usize, Gate2)> {
        self.gadget.rules().into_iter().find(|r| r.right == label).map(|r| (r.left, r.gate))
    }
}

/// Full-space gadget Hamiltonian on `(C^d ⊗ C^2)^{⊗N}`.
pub fn build_uqi(spec: &UqiChainSpec) -> Result<SparseOperator> {
    let cap = spec.gadget.full_space_cap();
    if spec.n > cap {
        return Err(Error::SizeCap { what: "uqi full-space chain length", size: spec.n, cap });
    }
    let (n, d) = (spec.n, spec.head_dim());
    let heads = d.pow(n as u32);
    let qdim = 1usize << n;
    let rules = spec.gadget.rules();
    let digit = |h: usize, site: usize| (h / d.pow((n - 1 - site) as u32)) % d;
    let mut b = TripletBuilder::new(heads * qdim);
    for h in 0..heads {
        for i in 0..n - 1 {
            let (hl, hr) = (digit(h, i), digit(h, i + 1));
            if hr != 0 {
                continue;
            }
            for rule in rules.iter().filter(|r| r.left == hl) {
                let shift_l = d.pow((n - 1 - i) as u32);
                let shift_r = d.pow((n - 2 - i) as u32);
                let h2 = h - hl * shift_l + rule.right * shift_r;
                let (bl, br) = (n - 1 - i, n - 2 - i);
                for q in 0..qdim {
                    let input = ((q >> bl) & 1) << 1 | ((q >> br) & 1);
                    let base = q & !(1 << bl) & !(1 << br);
                    for (out, row) in rule.gate.iter().enumerate() {
                        let v = row[input];
                        if v == C64::new(0.0, 0.0) {
                            continue;
                        }
                        let q2 = base | (out >> 1) << bl | (out & 1) << br;
                        b.push_hermitian_pair(h2 * qdim + q2, h * qdim + q, v);
                    }
                }
            }
        }
    }
    b.build_hermitian()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeadInit {
    /// 1-based.
    pub site: usize,
    pub label: usize,
}

impl HeadInit {
    pub fn new(site: usize, label: usize) -> Self {
        Self { site, label }
    }
}

/// Head labels and staged computational states for one initial condition, computed once.
#[derive(Clone, Debug)]
pub struct UqiFrames {
    pub init: HeadInit,
    /// Head label at each site (index `i` is site `i + 1`).
    pub labels: Vec<usize>,
    pub staged: Vec<ComplexVector>,
    chain: HoppingChain,
}

impl UqiFrames {
    pub fn new(spec: &UqiChainSpec, psi: &ComplexVector, init: HeadInit) -> Result<Self> {
        let n = spec.n;
        if psi.dim() != 1 << n {
            return Err(Error::DimensionMismatch { expected: 1 << n, found: psi.dim() });
        }
        if init.site == 0 || init.site > n || init.label == 0 || init.label >= spec.head_dim() {
            return Err(Error::InvalidArgument(format!("head init {init:?} invalid for N={n}")));
        }
        let s = init.site - 1;
        let mut labels = vec![0; n];
        let mut staged = vec![ComplexVector::zeros(0); n];
        labels[s] = init.label;
        staged[s] = psi.clone();
        for i in s..n - 1 {
            let (next, gate) = spec
                .hop_right(labels[i])
                .ok_or_else(|| Error::InvalidConfiguration(format!("label {} cannot hop right", labels[i])))?;
            let mut v = staged[i].clone();
            apply_2q(&mut v, n, i, i + 1, &gate);
            labels[i + 1] = next;
            staged[i + 1] = v;
        }
        for i in (1..=s).rev() {
            let (prev, gate) = spec
                .hop_left(labels[i])
                .ok_or_else(|| Error::InvalidConfiguration(format!("label {} cannot hop left", labels[i])))?;
            let mut v = staged[i].clone();
            apply_2q(&mut v, n, i - 1, i, &dagger2(&gate));
            labels[i - 1] = prev;
            staged[i - 1] = v;
        }
        Ok(Self { init, labels, staged, chain: HoppingChain::new(n)? })
    }

    pub fn chain(&self) -> &HoppingChain {
        &self.chain
    }

    pub fn at(&self, t: f64) -> FactorizedState {
        FactorizedState {
            labels: self.labels.clone(),
            amplitudes: self.chain.amplitudes_from(self.init.site, t),
            staged: self.staged.clone(),
        }
    }
}

/// `Σ_i c_i |i, label_i⟩|ψ_i⟩`.
#[derive(Clone, Debug)]
pub struct FactorizedState {
    pub labels: Vec<usize>,
    pub amplitudes: Vec<C64>,
    pub staged: Vec<ComplexVector>,
}

impl FactorizedState {
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(C64::norm_sqr).sum()
    }

    /// Embeds the state in the full space of [`build_uqi`].
    pub fn to_full(&self, spec: &UqiChainSpec) -> ComplexVector {
        let (n, d) = (spec.n, spec.head_dim());
        let qdim = 1usize << n;
        let mut out = ComplexVector::zeros(d.pow(n as u32) * qdim);
        for (i, (c, psi)) in self.amplitudes.iter().zip(&self.staged).enumerate() {
            let h = self.labels[i] * d.pow((n - 1 - i) as u32);
            for (q, a) in psi.iter().enumerate() {
                out[h * qdim + q] += c * a;
            }
        }
        out
    }
}

pub fn evolve_factorized(spec: &UqiChainSpec, psi1: &ComplexVector, init: HeadInit, t: f64) -> Result<FactorizedState> {
    Ok(UqiFrames::new(spec, psi1, init)?.at(t))
}

/// Full-space product state with one head at `init` and computational state `psi`.
pub fn embed_product(spec: &UqiChainSpec, psi: &ComplexVector, init: HeadInit) -> ComplexVector {
    let (n, d) = (spec.n, spec.head_dim());
    let h = init.label * d.pow((n - init.site) as u32);
    let mut out = ComplexVector::zeros(spec.full_dim());
    for (q, a) in psi.iter().enumerate() {
        out[h * (1 << n) + q] = *a;
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateOp {
    pub name: String,
    /// 1-based qubit indices; the first target is the high bit of a two-qubit matrix.
    pub targets: Vec<usize>,
    /// Row-major `(re, im)` entries of a 2×2 or 4×4 matrix; required for unnamed gates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<[f64; 2]>>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ResolvedGate {
    One(Gate1),
    Two(Gate2),
}

impl GateOp {
    pub fn named(name: &str, targets: &[usize]) -> Self {
        Self { name: name.into(), targets: targets.to_vec(), matrix: None }
    }

    pub fn one(u: &Gate1, target: usize) -> Self {
        let matrix = u.iter().flatten().map(|z| [z.re, z.im]).collect();
        Self { name: "u1".into(), targets: vec![target], matrix: Some(matrix) }
    }

    pub fn two(u: &Gate2, a: usize, b: usize) -> Self {
        let matrix = u.iter().flatten().map(|z| [z.re, z.im]).collect();
        Self { name: "u2".into(), targets: vec![a, b], matrix: Some(matrix) }
    }

    pub fn resolve(&self, n: usize) -> Result<ResolvedGate> {
        let bad = |msg: String| Error::InvalidArgument(format!("gate {:?}: {msg}", self.name));
        if self.targets.iter().any(|&t| t == 0 || t > n) {
            return Err(bad(format!("targets {:?} outside 1..={n}", self.targets)));
        }
        if self.targets.len() == 2 && self.targets[0] == self.targets[1] {
            return Err(bad("repeated target".into()));
        }
        let gate = match &self.matrix {
            Some(entries) => from_entries(entries).ok_or_else(|| bad("matrix must have 4 or 16 entries".into()))?,
            None => named_gate(&self.name).ok_or_else(|| bad("unknown name and no matrix".into()))?,
        };
        let arity = match gate {
            ResolvedGate::One(u) => {
                if unitarity_defect1(&u) > 1e-10 {
                    return Err(bad("matrix not unitary".into()));
                }
                1
            }
            ResolvedGate::Two(u) => {
                if unitarity_defect2(&u) > 1e-10 {
                    return Err(bad("matrix not unitary".into()));
                }
                2
            }
        };
        if self.targets.len() != arity {
            return Err(bad(format!("expects {arity} targets, got {}", self.targets.len())));
        }
        Ok(gate)
    }
}

fn from_entries(entries: &[[f64; 2]]) -> Option<ResolvedGate> {
    let z = |k: usize| C64::new(entries[k][0], entries[k][1]);
    match entries.len() {
        4 => Some(ResolvedGate::One([[z(0), z(1)], [z(2), z(3)]])),
        16 => Some(ResolvedGate::Two(std::array::from_fn(|r| std::array::from_fn(|c| z(4 * r + c))))),
        _ => None,
    }
}

fn named_gate(name: &str) -> Option<ResolvedGate> {
    let (o, z, i) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 1.0));
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let one = |m: Gate1| Some(ResolvedGate::One(m));
    match name.to_ascii_lowercase().as_str() {
        "x" => one([[z, o], [o, z]]),
        "y" => one([[z, -i], [i, z]]),
        "z" => one([[o, z], [z, -o]]),
        "h" => one([[h, h], [h, -h]]),
        "s" => one([[o, z], [z, i]]),
        "t" => one([[o, z], [z, C64::from_polar(1.0, std::f64::consts::FRAC_PI_4)]]),
        "cnot" | "cx" => Some(ResolvedGate::Two(cnot())),
        "cz" => {
            let mut m = identity2();
            m[3][3] = -o;
            Some(ResolvedGate::Two(m))
        }
        "swap" => Some(ResolvedGate::Two(swap())),
        "g" => Some(ResolvedGate::Two(g_gate())),
        _ => None,
    }
}

/// Applies a gate program directly to a statevector.
pub fn circuit_oracle(n: usize, program: &[GateOp], psi: &ComplexVector) -> Result<ComplexVector> {
    let mut out = psi.clone();
    for op in program {
        match op.resolve(n)? {
            ResolvedGate::One(u) => apply_1q(&mut out, n, op.targets[0] - 1, &u),
            ResolvedGate::Two(u) => apply_2q(&mut out, n, op.targets[0] - 1, op.targets[1] - 1, &u),
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cycle {
    /// Head injected at site 1: cyclic shift of all qubits towards site 1.
    Full,
    /// Head injected at site 2: cyclic shift of qubits `2..=N`.
    Tail,
}

impl Cycle {
    fn start(self) -> usize {
        match self {
            Self::Full => 1,
            Self::Tail => 2,
        }
    }

    /// `arrangement[site]` is the logical qubit held there.
    fn permute(self, arrangement: &mut [usize]) {
        arrangement[self.start() - 1..].rotate_left(1);
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ProtocolOptions {
    /// Failure probability allowed per heralded transfer.
    pub epsilon: f64,
    /// Herald period; defaults to [`HoppingChain::tuned_period_from`] for each cycle.
    pub period: Option<f64>,
}

impl Default for ProtocolOptions {
    fn default() -> Self {
        Self { epsilon: 1e-3, period: None }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TransferRecord {
    pub cycle: Cycle,
    pub rounds: usize,
    pub time: f64,
    pub success: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProtocolRun {
    #[serde(skip)]
    pub state: ComplexVector,
    pub transfers: Vec<TransferRecord>,
    pub local_gates: usize,
    pub total_time: f64,
}

/// Runs a gate program with only site-1/site-2 injection, site-N heralding and local
/// gates on sites 1 and 2. The SWAP-dressed chain is evolved through its staged frames;
/// on a herald the computational register holds the frame at site N exactly.
pub fn run_uqi_protocol(
    n: usize,
    program: &[GateOp],
    psi1: &ComplexVector,
    opts: &ProtocolOptions,
) -> Result<ProtocolRun> {
    let spec = UqiChainSpec::new(n, Gadget::SwapHop)?;
    if psi1.dim() != 1 << n {
        return Err(Error::DimensionMismatch { expected: 1 << n, found: psi1.dim() });
    }
    let resolved: Vec<ResolvedGate> = program.iter().map(|op| op.resolve(n)).collect::<Result<_>>()?;
    let mut run = ProtocolRun { state: psi1.clone(), transfers: Vec::new(), local_gates: 0, total_time: 0.0 };
    let mut arrangement: Vec<usize> = (0..n).collect();

    for (op, gate) in program.iter().zip(&resolved) {
        let first = op.targets[0] - 1;
        while arrangement[0] != first {
            transfer(&spec, Cycle::Full, &mut arrangement, &mut run, opts)?;
        }
        match gate {
            ResolvedGate::One(u) => apply_1q(&mut run.state, n, 0, u),
            ResolvedGate::Two(u) => {
                let second = op.targets[1] - 1;
                while arrangement[1] != second {
                    transfer(&spec, Cycle::Tail, &mut arrangement, &mut run, opts)?;
                }
                apply_2q(&mut run.state, n, 0, 1, u);
            }
        }
        run.local_gates += 1;
    }
    for cycle in restoring_cycles(&arrangement)? {
        transfer(&spec, cycle, &mut arrangement, &mut run, opts)?;
    }
    debug_assert!(arrangement.iter().enumerate().all(|(i, &q)| i == q));
    Ok(run)
}

fn transfer(
    spec: &UqiChainSpec,
    cycle: Cycle,
    arrangement: &mut [usize],
    run: &mut ProtocolRun,
    opts: &ProtocolOptions,
) -> Result<()> {
    let frames = UqiFrames::new(spec, &run.state, HeadInit::new(cycle.start(), 1))?;
    let chain = frames.chain();
    let period = match opts.period {
        Some(p) => p,
        None => chain.tuned_period_from(cycle.start(), opts.epsilon)?,
    };
    let trace = chain.heralded_transfer_from(cycle.start(), opts.epsilon, period)?;
    run.state = frames.staged[spec.n - 1].clone();
    cycle.permute(arrangement);
    run.total_time += trace.total_time();
    run.transfers.push(TransferRecord {
        cycle,
        rounds: trace.rounds(),
        time: trace.total_time(),
        success: trace.success(),
    });
    Ok(())
}

/// Largest register for which the restoring search runs.
pub const RESTORE_CAP: usize = 9;

/// Shortest cycle sequence returning `arrangement` to the identity.
fn restoring_cycles(arrangement: &[usize]) -> Result<Vec<Cycle>> {
    let n = arrangement.len();
    if n > RESTORE_CAP {
        return Err(Error::SizeCap { what: "uqi protocol register", size: n, cap: RESTORE_CAP });
    }
    let target: Vec<usize> = (0..n).collect();
    let mut parent: HashMap<Vec<usize>, Option<(Vec<usize>, Cycle)>> = HashMap::new();
    parent.insert(arrangement.to_vec(), None);
    let mut queue = VecDeque::from([arrangement.to_vec()]);
    while let Some(cur) = queue.pop_front() {
        if cur == target {
            let mut path = Vec::new();
            let mut node = cur;
            while let Some(Some((prev, c))) = parent.get(&node).cloned() {
                path.push(c);
                node = prev;
            }
            path.reverse();
            return Ok(path);
        }
        for c in [Cycle::Full, Cycle::Tail] {
            let mut next = cur.clone();
            c.permute(&mut next);
            if !parent.contains_key(&next) {
                parent.insert(next.clone(), Some((cur.clone(), c)));
                queue.push_back(next);
            }
        }
    }
    Err(Error::InvalidConfiguration("arrangement unreachable by cycles".into()))
}
