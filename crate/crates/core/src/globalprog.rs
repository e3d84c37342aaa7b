//! Global-control programs: tapes of `{G, S, skip}` commands, each applied to every
//! disjoint nearest-neighbour pair of one alignment at once.
//!
//! Qubit `0` is the most significant bit of a basis index. `Odd` pairs are
//! `(0,1), (2,3), …` and `Even` pairs are `(1,2), (3,4), …` (0-based), matching the
//! 1-based `(2i−1, 2i)` and `(2i, 2i+1)`.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::ComplexVector;
use crate::statevec::{apply_2q, swap, Gate2};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CommandKind {
    G,
    S,
    #[serde(rename = "skip")]
    Skip,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Alignment {
    #[default]
    Odd,
    Even,
}

impl Alignment {
    pub fn flipped(self) -> Self {
        match self {
            Self::Odd => Self::Even,
            Self::Even => Self::Odd,
        }
    }

    /// 0-based index of the first qubit of the first pair.
    pub fn offset(self) -> usize {
        match self {
            Self::Odd => 0,
            Self::Even => 1,
        }
    }

    /// Disjoint pairs `(k, k+1)` of this alignment on `n_q` qubits.
    pub fn pairs(self, n_q: usize) -> impl Iterator<Item = (usize, usize)> {
        (self.offset()..n_q.saturating_sub(1)).step_by(2).map(|k| (k, k + 1))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GlobalCommand {
    pub kind: CommandKind,
    #[serde(default)]
    pub align: Alignment,
}

impl GlobalCommand {
    pub fn new(kind: CommandKind, align: Alignment) -> Self {
        Self { kind, align }
    }

    pub fn skip() -> Self {
        Self::new(CommandKind::Skip, Alignment::Odd)
    }

    /// The two-qubit gate, or `None` for skip.
    pub fn gate(&self) -> Option<Gate2> {
        match self.kind {
            CommandKind::G => Some(g_gate()),
            CommandKind::S => Some(swap()),
            CommandKind::Skip => None,
        }
    }
}

impl fmt::Display for CommandKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::G => "G",
            Self::S => "S",
            Self::Skip => "skip",
        })
    }
}

impl FromStr for CommandKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "G" | "g" => Ok(Self::G),
            "S" | "s" => Ok(Self::S),
            "skip" | "-" => Ok(Self::Skip),
            other => Err(Error::InvalidArgument(format!("unknown command kind {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProgramTape {
    pub n_q: usize,
    pub commands: Vec<GlobalCommand>,
}

impl ProgramTape {
    pub fn new(n_q: usize, commands: Vec<GlobalCommand>) -> Result<Self> {
        let tape = Self { n_q, commands };
        tape.validate()?;
        Ok(tape)
    }

    pub fn validate(&self) -> Result<()> {
        if self.commands.is_empty() {
            return Err(Error::InvalidArgument("program tape is empty".into()));
        }
        if self.n_q < 2 {
            return Err(Error::InvalidArgument(format!("n_q = {} < 2", self.n_q)));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let tape: Self = serde_json::from_str(text)?;
        tape.validate()?;
        Ok(tape)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn kinds(&self) -> Vec<CommandKind> {
        self.commands.iter().map(|c| c.kind).collect()
    }
}

/// `1 ⊕ B` with `B = [[1, −1], [1, 1]]/√2 = exp(−iπY/4)`.
pub fn g_gate() -> Gate2 {
    let z = C64::new(0.0, 0.0);
    let o = C64::new(1.0, 0.0);
    let h = C64::new(FRAC_1_SQRT_2, 0.0);
    [[o, z, z, z], [z, o, z, z], [z, z, h, -h], [z, z, h, h]]
}

pub fn apply_global(command: &GlobalCommand, state: &ComplexVector, n_q: usize) -> Result<ComplexVector> {
    if state.dim() != 1usize << n_q {
        return Err(Error::DimensionMismatch { expected: 1 << n_q, found: state.dim() });
    }
    let mut out = state.clone();
    if let Some(u) = command.gate() {
        for (a, b) in command.align.pairs(n_q) {
            apply_2q(&mut out, n_q, a, b, &u);
        }
    }
    Ok(out)
}

/// Applies the commands left to right.
pub fn execute_tape(tape: &ProgramTape, psi0: &ComplexVector) -> Result<ComplexVector> {
    tape.validate()?;
    tape.commands.iter().try_fold(psi0.clone(), |psi, c| apply_global(c, &psi, tape.n_q))
}
