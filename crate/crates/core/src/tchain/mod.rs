//! Translationally invariant two-body ring that executes a global-control program.
//!
//! Every site carries the same local space: a data qubit or program trit `q ⊗ l`, an
//! optional read-head `(a, r)`, and one extra level `m`. The ring holds, in order, the
//! launch site `0`, the program trits `1..=T`, and the data qubits. `H_T` is the sum of
//! one nearest-neighbour term over all ring bonds, so a basis configuration evolves along
//! a one-dimensional clock path whose frames carry the partially executed program.
//!
//! The launch site starts in `m`, which walks over skips and plants the marker on the
//! first real command. The command at tape index `t` of a length-`T` tape acts on `Odd`
//! pairs iff `T − t` is even; this parity is fixed by the ring and cannot be chosen.

mod bond;
mod path;
mod site;

pub use bond::{
    build_ht, check_two_body_support, command_gate, forward, ring_shift_permutation, translation_defect, BondTable,
    FULL_SPACE_CAP,
};
pub use path::{
    apply_ht_sparse, clock_neighbours, clock_path_with, frame_vector, reachable_clock_path, restricted_hamiltonian,
    ClockPath, DataMap, SparseState, MAX_CLOCK_CONFIGS,
};
pub use site::{Configuration, Head, Levels, SiteState};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::globalprog::{Alignment, CommandKind, GlobalCommand, ProgramTape};
use crate::numkit::ComplexVector;
use crate::xxchain::HoppingChain;

fn trit(kind: CommandKind) -> u8 {
    match kind {
        CommandKind::Skip => 0,
        CommandKind::G => 1,
        CommandKind::S => 2,
    }
}

/// Commands padded with one trailing skip when needed to make the ring length odd.
pub fn padded_kinds(kinds: &[CommandKind], n_data: usize) -> Vec<CommandKind> {
    let mut out = kinds.to_vec();
    if (1 + kinds.len() + n_data).is_multiple_of(2) {
        out.push(CommandKind::Skip);
    }
    out
}

/// Alignment the ring realizes for the command at `index` of a tape of `len` commands.
pub fn emergent_alignment(index: usize, len: usize) -> Alignment {
    if (len - index).is_multiple_of(2) {
        Alignment::Odd
    } else {
        Alignment::Even
    }
}

/// The tape the ring actually executes for `kinds` on `n_q` data qubits, padding included.
pub fn realized_tape(kinds: &[CommandKind], n_q: usize) -> Result<ProgramTape> {
    let kinds = padded_kinds(kinds, n_q);
    let len = kinds.len();
    let commands = kinds.iter().enumerate().map(|(t, &k)| GlobalCommand::new(k, emergent_alignment(t, len))).collect();
    ProgramTape::new(n_q, commands)
}

fn ring(kinds: &[CommandKind], data_bits: &[u8], launch: SiteState) -> Result<Configuration> {
    if kinds.is_empty() || data_bits.is_empty() {
        return Err(Error::InvalidArgument("need at least one command and one data qubit".into()));
    }
    if let Some(b) = data_bits.iter().find(|&&b| b > 1) {
        return Err(Error::InvalidArgument(format!("data bit {b} is not 0 or 1")));
    }
    let m = 1 + kinds.len() + data_bits.len();
    if m.is_multiple_of(2) {
        return Err(Error::Parity(format!("ring length 1 + {} + {} = {m} must be odd", kinds.len(), data_bits.len())));
    }
    let mut sites = vec![launch];
    sites.extend(kinds.iter().map(|&k| SiteState::program(trit(k))));
    sites.extend(data_bits.iter().map(|&b| SiteState::data(b)));
    Ok(Configuration(sites))
}

/// Canonical starting configuration: `m` on the launch site, then the tape, then data.
pub fn initial_configuration(tape: &ProgramTape, data_bits: &[u8]) -> Result<Configuration> {
    if data_bits.len() != tape.n_q {
        return Err(Error::DimensionMismatch { expected: tape.n_q, found: data_bits.len() });
    }
    ring(&tape.kinds(), data_bits, SiteState::M)
}

/// Starting configuration of the 49-level machine: the first-command head sits on the
/// launch site. Without the active label the launch site is a `G` trit and no command runs.
pub fn extended_initial_configuration(
    kinds: &[CommandKind],
    data_bits: &[u8],
    active_label: bool,
) -> Result<Configuration> {
    let launch = SiteState::program(if active_label { 0 } else { 1 }).with_head(Head::First);
    ring(kinds, data_bits, launch)
}

/// Structural validity of a configuration.
pub fn validate_configuration(config: &Configuration, levels: Levels) -> Result<()> {
    let bad = |why: &str| Err(Error::InvalidConfiguration(format!("{why}: {config}")));
    let sites = config.sites();
    for s in sites {
        s.index(levels)?;
    }
    let m = sites.len();
    if m < 3 || m.is_multiple_of(2) {
        return Err(Error::Parity(format!("ring length {m} must be odd and at least 3")));
    }
    let heads: Vec<Head> = sites.iter().map(|s| s.head()).filter(|h| h.is_some()).collect();
    let markers = sites.iter().filter(|s| s.is_marker()).count();
    let ms = sites.iter().filter(|s| **s == SiteState::M).count();
    if heads.len() > 1 {
        return bad("more than one read-head");
    }
    match (markers, ms) {
        (0, 1) if !heads.is_empty() => return bad("read-head alongside m"),
        (1, 0) => match heads.first() {
            Some(Head::Active { a: 0..=1, .. }) => {}
            _ => return bad("marker without a circulating read-head"),
        },
        (0, 0) => match heads.first() {
            Some(Head::First | Head::Active { a: 2, .. }) => {}
            _ => return bad("no marker, no m and no sweeping read-head"),
        },
        (0, 1) => {}
        _ => return bad("more than one marker or m"),
    }
    let data: Vec<bool> = sites.iter().map(|s| s.is_data()).collect();
    let n_data = data.iter().filter(|&&d| d).count();
    if n_data == 0 || n_data == m {
        return bad("need both program and data sites");
    }
    let boundaries = (0..m).filter(|&i| data[i] != data[(i + 1) % m]).count();
    if boundaries != 2 {
        return bad("program and data regions are not contiguous");
    }
    if !data[m - 1] || data[0] {
        return bad("data must end the ring and site 0 must be a program site");
    }
    Ok(())
}

/// Options for [`run_computation`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComputationOptions {
    /// Failure probability allowed for the heralded clock transfer.
    pub epsilon: f64,
    /// Herald period; tuned on the clock chain when absent.
    pub period: Option<f64>,
}

impl Default for ComputationOptions {
    fn default() -> Self {
        Self { epsilon: 1e-3, period: None }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComputationRun {
    /// Data state in the final history frame.
    #[serde(skip)]
    pub state: ComplexVector,
    /// Tape actually executed, including padding and emergent alignments.
    pub tape: ProgramTape,
    pub path_len: usize,
    pub rounds: usize,
    pub total_time: f64,
    pub success: f64,
}

/// Runs `tape` on the ring with data register `data`, heralding arrival at the final
/// clock configuration. Fails if a non-skip command asks for an alignment the ring
/// cannot realize; see [`realized_tape`].
pub fn run_computation(tape: &ProgramTape, data: &ComplexVector, opts: &ComputationOptions) -> Result<ComputationRun> {
    tape.validate()?;
    if data.dim() != 1 << tape.n_q {
        return Err(Error::DimensionMismatch { expected: 1 << tape.n_q, found: data.dim() });
    }
    let realized = realized_tape(&tape.kinds(), tape.n_q)?;
    for (t, (want, got)) in tape.commands.iter().zip(&realized.commands).enumerate() {
        if want.kind != CommandKind::Skip && want.align != got.align {
            return Err(Error::InvalidArgument(format!(
                "command {t} ({}) requests {:?} pairs but the ring realizes {:?}",
                want.kind, want.align, got.align
            )));
        }
    }
    let init = initial_configuration(&realized, &vec![0; tape.n_q])?;
    let path = reachable_clock_path(&init, Levels::Standard)?;
    if path.start != 0 {
        return Err(Error::InvalidConfiguration(format!("{init} is not an end of its clock path")));
    }
    let state = path.output(data)?;
    let (rounds, total_time, success) = if path.len() == 1 {
        (0, 0.0, 1.0)
    } else {
        let chain = HoppingChain::new(path.len())?;
        let period = match opts.period {
            Some(p) => p,
            None => chain.tuned_period_from(1, opts.epsilon)?,
        };
        let trace = chain.heralded_transfer_from(1, opts.epsilon, period)?;
        (trace.rounds(), trace.total_time(), trace.success())
    };
    Ok(ComputationRun { state, tape: realized, path_len: path.len(), rounds, total_time, success })
}
