//! Ground-energy construction on the 49-level ring: penalties, coupling schedule,
//! projection-lemma checks and the yes/no energy separation.
//!
//! `H_total = −J_0 H_T + J_b H_b + J_in H_in + J_out H_out + κ` with
//! `κ = J_0 · 2cos(π/(L+1))` for a clock path of `L` configurations. The span of
//! `{clock configuration k} ⊗ {data bits}` from a legal start is invariant under every
//! term, and the energies are computed there. In the history-frame basis the hopping part
//! is `A ⊗ 1` while each penalty is block diagonal in `k`, so the lowest eigenvalue is the
//! fixed point of a Feshbach map onto the top hopping mode. The Q-space gaps enter in
//! closed form, which keeps the result accurate when `J_0` is many orders above `J_out`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::globalprog::CommandKind;
use crate::numkit::{gaussian, hermitian_eigenvalues, ComplexVector, DenseEigen, SparseOperator, TripletBuilder};
use crate::tchain::{
    build_ht, extended_initial_configuration, reachable_clock_path, restricted_hamiltonian, BondTable, ClockPath,
    Configuration, Head, Levels, SiteState, FULL_SPACE_CAP,
};

/// Verifier acceptance bound used by the experiments.
pub const DEFAULT_EPSILON: f64 = 1.0 / 3.0;

/// Largest operator densified by [`projection_lemma_bound`].
pub const LEMMA_DENSE_CAP: usize = 1024;

/// `H_T` on a ring of `m` sites with the 49-level local space.
pub fn build_extended_ht(m: usize) -> Result<SparseOperator> {
    build_ht(m, Levels::Extended)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QmaInstance {
    /// Ring size; must equal `1 + tape.len() + x_targets.len()`.
    #[serde(rename = "M")]
    pub m: usize,
    pub tape: Vec<CommandKind>,
    /// Data qubit read at the end of the computation.
    pub output_qubit: usize,
    /// Per data qubit: `Some(x)` is an ancilla that must start in `x`, `None` a witness.
    pub x_targets: Vec<Option<u8>>,
    /// Witness bits of the history state whose energy is reported alongside the ground energy.
    pub witness_bits: Vec<u8>,
}

impl QmaInstance {
    pub fn n_data(&self) -> usize {
        self.x_targets.len()
    }

    pub fn n_witness(&self) -> usize {
        self.x_targets.iter().filter(|x| x.is_none()).count()
    }

    fn first_data_site(&self) -> usize {
        1 + self.tape.len()
    }

    pub fn output_site(&self) -> usize {
        self.first_data_site() + self.output_qubit
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |why: String| Err(Error::InvalidArgument(why));
        if self.tape.is_empty() || self.x_targets.is_empty() {
            return bad("need at least one command and one data qubit".into());
        }
        if self.m != 1 + self.tape.len() + self.n_data() {
            return bad(format!("M = {} but the layout has {} sites", self.m, 1 + self.tape.len() + self.n_data()));
        }
        if self.m.is_multiple_of(2) {
            return Err(Error::Parity(format!("ring length {} must be odd", self.m)));
        }
        if self.output_qubit >= self.n_data() {
            return bad(format!("output qubit {} is not a data qubit", self.output_qubit));
        }
        if self.x_targets.iter().flatten().any(|&x| x > 1) || self.witness_bits.iter().any(|&b| b > 1) {
            return bad("targets and witness bits must be 0 or 1".into());
        }
        if self.witness_bits.len() != self.n_witness() {
            return bad(format!("{} witness bits for {} witness qubits", self.witness_bits.len(), self.n_witness()));
        }
        Ok(())
    }

    /// Data bits of the legal start: ancillas at their targets, witnesses from `witness_bits`.
    pub fn start_bits(&self) -> Vec<u8> {
        let mut w = self.witness_bits.iter();
        self.x_targets.iter().map(|x| x.unwrap_or_else(|| *w.next().unwrap())).collect()
    }

    /// Required state of site `i` when the first-command sweep passes it.
    fn target(&self, i: usize) -> Option<SiteState> {
        match i {
            0 => Some(SiteState::SKIP),
            i if i < self.first_data_site() => Some(SiteState::program(match self.tape[i - 1] {
                CommandKind::Skip => 0,
                CommandKind::G => 1,
                CommandKind::S => 2,
            })),
            i => self.x_targets[i - self.first_data_site()].map(SiteState::data),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let inst: Self = serde_json::from_str(text)?;
        inst.validate()?;
        Ok(inst)
    }
}

/// Minimal pair on a three-site ring (launch, one `G` trit, one data qubit read at the end).
/// The yes-instance leaves the qubit to the witness; the no-instance pins it to `0`.
pub fn minimal_instances() -> (QmaInstance, QmaInstance) {
    let base = |x: Option<u8>, w: Vec<u8>| QmaInstance {
        m: 3,
        tape: vec![CommandKind::G],
        output_qubit: 0,
        x_targets: vec![x],
        witness_bits: w,
    };
    (base(None, vec![1]), base(Some(0), vec![]))
}

fn strip_head(s: SiteState) -> SiteState {
    s.with_head(Head::None)
}

/// `H_in` on one configuration: the first-command head on a site that differs from its target.
pub fn hin_value(inst: &QmaInstance, config: &Configuration) -> f64 {
    config
        .sites()
        .iter()
        .enumerate()
        .filter(|(i, s)| s.head() == Head::First && inst.target(*i).is_some_and(|t| strip_head(**s) != t))
        .count() as f64
}

/// `H_out` on one configuration: the final sweep at the output site while it holds `0`.
pub fn hout_value(inst: &QmaInstance, config: &Configuration) -> f64 {
    let s = config.sites()[inst.output_site()];
    f64::from(u8::from(matches!(s, SiteState::Sp { q: 0, l: 0, head: Head::Active { a: 2, .. } })))
}

/// `H_b` on one configuration: data states on program sites, program states or the marker on data sites.
pub fn hb_value(inst: &QmaInstance, config: &Configuration) -> f64 {
    let first_data = inst.first_data_site();
    config
        .sites()
        .iter()
        .enumerate()
        .filter(|(i, s)| match **s {
            SiteState::M => false,
            SiteState::Sp { q, l, .. } if *i < first_data => l == 0 && q <= 1,
            SiteState::Sp { q, l, .. } => l == 1 || q == 2,
        })
        .count() as f64
}

/// Penalty operators `(H_in, H_out, H_b)` on the full ring space.
pub fn build_penalties(inst: &QmaInstance) -> Result<(SparseOperator, SparseOperator, SparseOperator)> {
    inst.validate()?;
    let levels = Levels::Extended;
    let dim = (levels.dim() as u64).checked_pow(inst.m as u32).unwrap_or(u64::MAX);
    if dim > FULL_SPACE_CAP as u64 {
        return Err(Error::SizeCap {
            what: "penalty operators",
            size: dim.min(usize::MAX as u64) as usize,
            cap: FULL_SPACE_CAP,
        });
    }
    let dim = dim as usize;
    let mut builders = [TripletBuilder::new(dim), TripletBuilder::new(dim), TripletBuilder::new(dim)];
    for idx in 0..dim {
        let config = Configuration::from_index(idx, inst.m, levels)?;
        let values = [hin_value(inst, &config), hout_value(inst, &config), hb_value(inst, &config)];
        for (b, v) in builders.iter_mut().zip(values) {
            if v != 0.0 {
                b.push(idx, idx, C64::new(v, 0.0));
            }
        }
    }
    let [a, b, c] = builders;
    Ok((a.build_hermitian()?, b.build_hermitian()?, c.build_hermitian()?))
}

/// `(ΔE_short, ΔE_excited)` for a clock with `m` steps, evaluated as products of sines.
pub fn gap_lower_bounds(m: usize) -> (f64, f64) {
    let m = m as f64;
    // 2cos(b) − 2cos(a) = 4 sin((a+b)/2) sin((a−b)/2)
    let diff = |a: f64, b: f64| 4.0 * ((a + b) / 2.0).sin() * ((a - b) / 2.0).sin();
    (diff(PI / (m + 1.0), PI / (m + 2.0)), diff(2.0 * PI / (m + 2.0), PI / (m + 2.0)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingSchedule {
    /// Number of clock steps; the path has `m + 1` configurations.
    #[serde(rename = "M")]
    pub m: usize,
    pub epsilon: f64,
    pub j0: f64,
    pub jb: f64,
    pub jin: f64,
    pub jout: f64,
    pub delta_e: f64,
    /// Growth exponents in `M` of `(J_out, J_in, J_b, J_0)`.
    pub degrees: [u32; 4],
}

impl CouplingSchedule {
    /// `8(J_out + J_in)² + 2(J_out + J_in)`.
    pub fn outer_requirement(&self) -> f64 {
        let s = self.jout + self.jin;
        8.0 * s * s + 2.0 * s
    }

    pub fn inner_requirement(&self) -> f64 {
        8.0 * self.jout * self.jout + 2.0 * self.jout
    }

    pub fn holds(&self) -> bool {
        let pos = [self.j0, self.jb, self.jin, self.jout].iter().all(|&j| j > 0.0 && j.is_finite());
        pos && self.jin >= self.inner_requirement() && self.jb.min(self.j0 * self.delta_e) >= self.outer_requirement()
    }
}

pub fn schedule_couplings(m: usize, epsilon: f64) -> Result<CouplingSchedule> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!("schedule needs M >= 2, got {m}")));
    }
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::InvalidArgument(format!("epsilon {epsilon} outside [0, 1)")));
    }
    let mf = m as f64;
    let jout = (mf + 1.0) / (PI / (mf + 2.0)).sin().powi(2);
    let jin = 8.0 * jout * jout + 2.0 * jout;
    let (short, excited) = gap_lower_bounds(m);
    let delta_e = short.min(excited);
    let s = jout + jin;
    let x = 8.0 * s * s + 2.0 * s;
    let mut j0 = x / delta_e;
    while j0 * delta_e < x {
        j0 = f64::from_bits(j0.to_bits() + 1);
    }
    // J_out ~ M³, J_in ~ M⁶, J_b ~ M¹², ΔE ~ M⁻³
    Ok(CouplingSchedule { m, epsilon, j0, jb: x, jin, jout, delta_e, degrees: [3, 6, 12, 15] })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    /// Smallest eigenvalue of `H_2` off the subspace.
    pub j: f64,
    pub h1_norm: f64,
    /// `λ(H_1|_S)`.
    pub restricted_min: f64,
}

/// Checks `λ(H_1|_S) − ‖H_1‖²/(J − 2‖H_1‖) ≤ λ(H_1 + H_2)` where `S` (orthonormal columns)
/// is the kernel of `H_2`.
pub fn projection_lemma_bound(h1: &SparseOperator, h2: &SparseOperator, s: &[ComplexVector]) -> Result<LemmaCheck> {
    let dim = h1.dim();
    if h2.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: h2.dim() });
    }
    if dim > LEMMA_DENSE_CAP {
        return Err(Error::SizeCap { what: "projection lemma check", size: dim, cap: LEMMA_DENSE_CAP });
    }
    if s.is_empty() || s.len() >= dim {
        return Err(Error::InvalidArgument("subspace must be proper and nonempty".into()));
    }
    let d1 = h1.to_dense();
    let d2 = h2.to_dense();
    let e2 = hermitian_eigenvalues(&d2);
    let scale = e2.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    for v in s {
        if v.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: v.dim() });
        }
        if h2.apply(v)?.norm() > 1e-9 * scale {
            return Err(Error::InvalidArgument("subspace is not annihilated by H2".into()));
        }
    }
    let j = e2[s.len()];
    let e1 = hermitian_eigenvalues(&d1);
    let h1_norm = e1.first().unwrap().abs().max(e1.last().unwrap().abs());
    if j <= 2.0 * h1_norm {
        return Err(Error::LemmaInapplicable { gap: j, bound: 2.0 * h1_norm });
    }
    let restricted_min = hermitian_eigenvalues(&h1.compress(s)?)[0];
    let lhs = restricted_min - h1_norm * h1_norm / (j - 2.0 * h1_norm);
    let rhs = hermitian_eigenvalues(&(d1 + d2))[0];
    let holds = lhs <= rhs + 1e-10 * scale.max(h1_norm);
    Ok(LemmaCheck { lhs, rhs, holds, j, h1_norm, restricted_min })
}

/// A random instance satisfying the lemma's preconditions: `H_1` from a Gaussian ensemble,
/// `H_2` with a `s_dim`-dimensional kernel and spectrum `≥ J` elsewhere. With `tight`,
/// `J = 8‖H_1‖² + 2‖H_1‖` exactly.
pub fn random_lemma_instance<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    s_dim: usize,
    tight: bool,
) -> Result<(SparseOperator, SparseOperator, Vec<ComplexVector>)> {
    if s_dim == 0 || s_dim >= dim {
        return Err(Error::InvalidArgument(format!("kernel dimension {s_dim} must lie in 1..{dim}")));
    }
    let g = DMatrix::from_fn(dim, dim, |_, _| C64::new(gaussian(rng), gaussian(rng)));
    let h1 = (&g + g.adjoint()) * C64::new(0.5 / (dim as f64).sqrt(), 0.0);
    let e1 = hermitian_eigenvalues(&h1);
    let norm = e1[0].abs().max(e1[dim - 1].abs());
    let j = if tight { 8.0 * norm * norm + 2.0 * norm } else { 2.0 * norm * (1.0 + rng.random::<f64>() * 2.0) + 1e-6 };
    let basis = DenseEigen::new({
        let r = DMatrix::from_fn(dim, dim, |_, _| C64::new(gaussian(rng), gaussian(rng)));
        &r + r.adjoint()
    })
    .vectors;
    let mut h2 = DMatrix::<C64>::zeros(dim, dim);
    for k in s_dim..dim {
        let lam = if k == s_dim { j } else { j + rng.random::<f64>() * 3.0 * j };
        let v = basis.column(k);
        h2 += v * v.adjoint() * C64::new(lam, 0.0);
    }
    let h2 = (&h2 + h2.adjoint()) * C64::new(0.5, 0.0);
    let s = (0..s_dim).map(|k| ComplexVector::from_vec(basis.column(k).iter().copied().collect())).collect();
    Ok((SparseOperator::from_dense(&h1)?, SparseOperator::from_dense(&h2)?, s))
}

/// The clock sector of an instance in the history-frame basis.
#[derive(Clone, Debug)]
pub struct ClockSector {
    pub path: ClockPath,
    /// `(H_in, H_out, H_b)` restricted to frame `k`, each `2^D × 2^D`.
    pub blocks: Vec<[DMatrix<C64>; 3]>,
    /// Largest norm leaving the sector under `H_T` over basis data states.
    pub leakage: f64,
    /// Largest diagonal value of `H_b` on the sector.
    pub hb_max: f64,
}

impl ClockSector {
    pub fn len(&self) -> usize {
        self.path.len()
    }

    pub fn is_empty(&self) -> bool {
        self.path.is_empty()
    }

    pub fn data_dim(&self) -> usize {
        1 << self.path.n_data()
    }

    /// Number of clock steps, the `M` of the coupling schedule.
    pub fn steps(&self) -> usize {
        self.len() - 1
    }

    /// `H_total` in the frame basis, `k`-major, as a dense matrix.
    pub fn dense_total(&self, sched: &CouplingSchedule) -> DMatrix<C64> {
        let (l, d) = (self.len(), self.data_dim());
        let mut h = DMatrix::<C64>::zeros(l * d, l * d);
        let kappa = sched.j0 * 2.0 * (PI / (l as f64 + 1.0)).cos();
        for k in 0..l {
            let v = self.penalty_block(k, sched);
            for r in 0..d {
                for c in 0..d {
                    h[(k * d + r, k * d + c)] = v[(r, c)];
                }
                h[(k * d + r, k * d + r)] += C64::new(kappa, 0.0);
                if k + 1 < l {
                    h[(k * d + r, (k + 1) * d + r)] = C64::new(-sched.j0, 0.0);
                    h[((k + 1) * d + r, k * d + r)] = C64::new(-sched.j0, 0.0);
                }
            }
        }
        h
    }

    fn penalty_block(&self, k: usize, sched: &CouplingSchedule) -> DMatrix<C64> {
        let [hin, hout, hb] = &self.blocks[k];
        hin * C64::new(sched.jin, 0.0) + hout * C64::new(sched.jout, 0.0) + hb * C64::new(sched.jb, 0.0)
    }
}

pub fn clock_sector(inst: &QmaInstance) -> Result<ClockSector> {
    inst.validate()?;
    let start = extended_initial_configuration(&inst.tape, &inst.start_bits(), true)?;
    let path = reachable_clock_path(&start, Levels::Extended)?;
    let table = BondTable::new(Levels::Extended);
    let n = path.n_data();
    let d = 1usize << n;
    // frames[b][k] = W_k e_b
    let frames = (0..d).map(|b| path.frames(&ComplexVector::basis(d, b))).collect::<Result<Vec<_>>>()?;
    let mut leakage: f64 = 0.0;
    for b in 0..d {
        leakage = leakage.max(restricted_hamiltonian(&path, &ComplexVector::basis(d, b), &table)?.1);
    }
    let mut hb_max: f64 = 0.0;
    let blocks = (0..path.len())
        .map(|k| {
            let mut diag = [vec![0.0; d], vec![0.0; d], vec![0.0; d]];
            for c in 0..d {
                let bits: Vec<u8> = (0..n).map(|t| ((c >> (n - 1 - t)) & 1) as u8).collect();
                let config = path.concrete(k, &bits);
                diag[0][c] = hin_value(inst, &config);
                diag[1][c] = hout_value(inst, &config);
                diag[2][c] = hb_value(inst, &config);
                hb_max = hb_max.max(diag[2][c]);
            }
            diag.map(|dg| {
                DMatrix::from_fn(d, d, |r, s| {
                    (0..d).map(|c| frames[r][k].as_slice()[c].conj() * dg[c] * frames[s][k].as_slice()[c]).sum()
                })
            })
        })
        .collect();
    Ok(ClockSector { path, blocks, leakage, hb_max })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundEnergy {
    pub lambda: f64,
    pub kappa: f64,
    pub iterations: usize,
    /// `|λ − λ_min(H_eff(λ))|` at the returned fixed point.
    pub residual: f64,
    /// Energy of the history state built on `witness_bits`.
    pub witness_energy: f64,
}

/// Lowest eigenvalue of `H_total` on the sector.
pub fn ground_energy(
    sector: &ClockSector,
    sched: &CouplingSchedule,
    witness_start: &ComplexVector,
) -> Result<GroundEnergy> {
    let (l, d) = (sector.len(), sector.data_dim());
    let lf = l as f64;
    let kappa = sched.j0 * 2.0 * (PI / (lf + 1.0)).cos();
    let phi = |m: usize, k: usize| (2.0 / (lf + 1.0)).sqrt() * (PI * (m * (k + 1)) as f64 / (lf + 1.0)).sin();
    // hopping gap of mode m above the top mode, exact as a product of sines
    let gap = |m: usize| {
        sched.j0
            * 4.0
            * (PI * (m + 1) as f64 / (2.0 * (lf + 1.0))).sin()
            * (PI * (m - 1) as f64 / (2.0 * (lf + 1.0))).sin()
    };
    let vk: Vec<DMatrix<C64>> = (0..l).map(|k| sector.penalty_block(k, sched)).collect();
    let block = |m: usize, n: usize| -> DMatrix<C64> {
        let mut acc = DMatrix::<C64>::zeros(d, d);
        for (k, v) in vk.iter().enumerate() {
            acc += v * C64::new(phi(m, k) * phi(n, k), 0.0);
        }
        acc
    };
    let hpp = block(1, 1);
    let q = l - 1;
    let mut hqq = DMatrix::<C64>::zeros(q * d, q * d);
    let mut hqp = DMatrix::<C64>::zeros(q * d, d);
    for a in 0..q {
        hqp.view_mut((a * d, 0), (d, d)).copy_from(&block(a + 2, 1));
        for b in 0..q {
            let mut blk = block(a + 2, b + 2);
            if a == b {
                for r in 0..d {
                    blk[(r, r)] += C64::new(gap(a + 2), 0.0);
                }
            }
            hqq.view_mut((a * d, b * d), (d, d)).copy_from(&blk);
        }
    }
    let hpq = hqp.adjoint();
    let q_floor = if q == 0 { f64::INFINITY } else { hermitian_eigenvalues(&hqq)[0] };
    let effective = |lam: f64| -> Result<f64> {
        if q == 0 {
            return Ok(hermitian_eigenvalues(&hpp)[0]);
        }
        let shifted = DMatrix::<C64>::identity(q * d, q * d) * C64::new(lam, 0.0) - &hqq;
        let inv =
            shifted.try_inverse().ok_or_else(|| Error::InvalidArgument("Feshbach resolvent is singular".into()))?;
        let heff = &hpp + &hpq * inv * &hqp;
        Ok(hermitian_eigenvalues(&((&heff + heff.adjoint()) * C64::new(0.5, 0.0)))[0])
    };
    let mut lam = hermitian_eigenvalues(&hpp)[0];
    let mut iterations = 0;
    let tol = 1e-13 * lam.abs().max(1.0);
    let residual = loop {
        if lam >= q_floor {
            return Err(Error::NoConvergence { what: "Feshbach fixed point", iterations, residual: lam - q_floor });
        }
        let next = effective(lam)?;
        iterations += 1;
        let step = (next - lam).abs();
        lam = next;
        if step <= tol {
            break (effective(lam)? - lam).abs();
        }
        if iterations >= 200 {
            return Err(Error::NoConvergence { what: "Feshbach fixed point", iterations, residual: step });
        }
    };
    // history state ⊗ witness start: only the top mode, so only H_PP contributes
    let w = DMatrix::from_column_slice(d, 1, witness_start.as_slice());
    let witness_energy = (w.adjoint() * &hpp * &w)[(0, 0)].re / witness_start.norm_sqr();
    Ok(GroundEnergy { lambda: lam, kappa, iterations, residual, witness_energy })
}

/// Ground energy of one instance under a schedule built from its clock length.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceReport {
    pub instance: QmaInstance,
    pub path_len: usize,
    pub schedule: CouplingSchedule,
    pub gaps: (f64, f64),
    pub energy: GroundEnergy,
    pub leakage: f64,
    pub hb_max: f64,
}

pub fn instance_ground_energy(inst: &QmaInstance, epsilon: f64) -> Result<InstanceReport> {
    let sector = clock_sector(inst)?;
    let schedule = schedule_couplings(sector.steps(), epsilon)?;
    let bits = inst.start_bits();
    let d = sector.data_dim();
    let idx = bits.iter().fold(0usize, |a, &b| a << 1 | b as usize);
    let energy = ground_energy(&sector, &schedule, &ComplexVector::basis(d, idx))?;
    Ok(InstanceReport {
        instance: inst.clone(),
        path_len: sector.len(),
        gaps: gap_lower_bounds(schedule.m),
        schedule,
        energy,
        leakage: sector.leakage,
        hb_max: sector.hb_max,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparationReport {
    pub yes: InstanceReport,
    pub no: InstanceReport,
    pub lambda_yes: f64,
    pub lambda_no: f64,
    pub separation: f64,
    pub schedule_holds: bool,
}

pub fn energy_separation_experiment(yes: &QmaInstance, no: &QmaInstance, epsilon: f64) -> Result<SeparationReport> {
    let (y, n) = rayon::join(|| instance_ground_energy(yes, epsilon), || instance_ground_energy(no, epsilon));
    let (y, n) = (y?, n?);
    Ok(SeparationReport {
        lambda_yes: y.energy.lambda,
        lambda_no: n.energy.lambda,
        separation: n.energy.lambda - y.energy.lambda,
        schedule_holds: y.schedule.holds() && n.schedule.holds(),
        yes: y,
        no: n,
    })
}
