use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which local Hilbert space a site lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Levels {
    /// `(q ⊗ l ⊗ ((a ⊗ r) ⊕ n)) ⊕ m` with `a` a qubit: 31 levels.
    Standard,
    /// `n` gains a first-command level and `a` a third level: 49 levels.
    Extended,
}

impl Levels {
    /// Head register dimension per `(q, l)` value.
    pub fn head_dim(self) -> usize {
        match self {
            Self::Standard => 5,
            Self::Extended => 8,
        }
    }

    pub fn dim(self) -> usize {
        6 * self.head_dim() + 1
    }

    pub fn max_a(self) -> u8 {
        match self {
            Self::Standard => 1,
            Self::Extended => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Head {
    /// `n = 0`: no read-head.
    None,
    /// `n = 1`: first-command sweep (extended levels only).
    First,
    /// `a` = activity (0, 1, or 2 in the extended levels), `r` = command bit.
    Active { a: u8, r: u8 },
}

impl Head {
    fn index(self, levels: Levels) -> Option<usize> {
        match (self, levels) {
            (Head::None, _) => Some(0),
            (Head::First, Levels::Extended) => Some(1),
            (Head::First, Levels::Standard) => None,
            (Head::Active { a, r }, _) if a <= levels.max_a() && r <= 1 => {
                let base = if levels == Levels::Extended { 2 } else { 1 };
                Some(base + 2 * a as usize + r as usize)
            }
            _ => None,
        }
    }

    fn from_index(h: usize, levels: Levels) -> Self {
        match (h, levels) {
            (0, _) => Head::None,
            (1, Levels::Extended) => Head::First,
            (h, Levels::Extended) => Head::Active { a: ((h - 2) / 2) as u8, r: ((h - 2) % 2) as u8 },
            (h, Levels::Standard) => Head::Active { a: ((h - 1) / 2) as u8, r: ((h - 1) % 2) as u8 },
        }
    }

    pub fn is_some(self) -> bool {
        self != Head::None
    }
}

/// One site of the machine.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SiteState {
    /// The extra level used to step the marker over a skip.
    M,
    /// `q ∈ 0..3`, `l ∈ 0..2`. With `l = 0`, `q < 2` is a data qubit and `q = 2` the marker;
    /// with `l = 1`, `q` is a program trit (0 skip, 1 G, 2 S).
    Sp { q: u8, l: u8, head: Head },
}

impl SiteState {
    pub const MARKER: Self = Self::Sp { q: 2, l: 0, head: Head::None };
    pub const SKIP: Self = Self::Sp { q: 0, l: 1, head: Head::None };

    pub fn data(bit: u8) -> Self {
        Self::Sp { q: bit, l: 0, head: Head::None }
    }

    pub fn program(q: u8) -> Self {
        Self::Sp { q, l: 1, head: Head::None }
    }

    pub fn index(self, levels: Levels) -> Result<usize> {
        match self {
            Self::M => Ok(levels.dim() - 1),
            Self::Sp { q, l, head } => {
                let h = head
                    .index(levels)
                    .filter(|_| q <= 2 && l <= 1)
                    .ok_or_else(|| Error::InvalidConfiguration(format!("{self} not a {levels:?} site")))?;
                Ok((q as usize * 2 + l as usize) * levels.head_dim() + h)
            }
        }
    }

    pub fn from_index(index: usize, levels: Levels) -> Result<Self> {
        let hd = levels.head_dim();
        if index + 1 == levels.dim() {
            return Ok(Self::M);
        }
        if index >= levels.dim() {
            return Err(Error::InvalidArgument(format!("site index {index} >= {}", levels.dim())));
        }
        let ql = index / hd;
        Ok(Self::Sp { q: (ql / 2) as u8, l: (ql % 2) as u8, head: Head::from_index(index % hd, levels) })
    }

    pub fn head(self) -> Head {
        match self {
            Self::M => Head::None,
            Self::Sp { head, .. } => head,
        }
    }

    pub fn with_head(self, head: Head) -> Self {
        match self {
            Self::M => Self::M,
            Self::Sp { q, l, .. } => Self::Sp { q, l, head },
        }
    }

    pub fn is_marker(self) -> bool {
        matches!(self, Self::Sp { q: 2, l: 0, .. })
    }

    pub fn is_data(self) -> bool {
        matches!(self, Self::Sp { q: 0 | 1, l: 0, .. })
    }

    pub fn is_program(self) -> bool {
        matches!(self, Self::Sp { l: 1, .. })
    }

    pub fn is_skip(self) -> bool {
        matches!(self, Self::Sp { q: 0, l: 1, .. })
    }

    /// Program command bit `x` of a G (`0`) or S (`1`) trit.
    pub fn command(self) -> Option<u8> {
        match self {
            Self::Sp { q: q @ 1..=2, l: 1, .. } => Some(q - 1),
            _ => None,
        }
    }

    /// Data bit with the head removed, if this is a data site.
    pub fn bit(self) -> Option<u8> {
        match self {
            Self::Sp { q: q @ 0..=1, l: 0, .. } => Some(q),
            _ => None,
        }
    }
}

impl fmt::Display for SiteState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let Self::Sp { q, l, head } = *self else { return f.write_str("M") };
        match (q, l) {
            (0, 1) => f.write_str("P:skip")?,
            (1, 1) => f.write_str("P:G")?,
            (2, 1) => f.write_str("P:S")?,
            (2, 0) => f.write_str("MARK")?,
            (b, 0) => write!(f, "D:{b}")?,
            _ => write!(f, "?{q}{l}")?,
        }
        match head {
            Head::None => Ok(()),
            Head::First => f.write_str("+n1"),
            Head::Active { a, r } => write!(f, "+a{a}r{r}"),
        }
    }
}

impl FromStr for SiteState {
    type Err = Error;

    fn from_str(token: &str) -> Result<Self> {
        let bad = || Error::InvalidConfiguration(format!("bad site token {token:?}"));
        let (base, head) = match token.split_once('+') {
            Some((b, h)) => (b, Some(h)),
            None => (token, None),
        };
        let site = match base {
            "M" => {
                return if head.is_none() { Ok(Self::M) } else { Err(bad()) };
            }
            "P:skip" => Self::program(0),
            "P:G" => Self::program(1),
            "P:S" => Self::program(2),
            "MARK" => Self::MARKER,
            "D:0" => Self::data(0),
            "D:1" => Self::data(1),
            _ => return Err(bad()),
        };
        let head = match head {
            None => Head::None,
            Some("n1") => Head::First,
            Some(h) => {
                let b = h.as_bytes();
                if b.len() != 4 || b[0] != b'a' || b[2] != b'r' || !b[1].is_ascii_digit() || !b[3].is_ascii_digit() {
                    return Err(bad());
                }
                Head::Active { a: b[1] - b'0', r: b[3] - b'0' }
            }
        };
        Ok(site.with_head(head))
    }
}

/// A ring of sites, site `0` first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Configuration(pub Vec<SiteState>);

impl Configuration {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sites(&self) -> &[SiteState] {
        &self.0
    }

    /// Basis index in the full ring space, site `0` most significant.
    pub fn index(&self, levels: Levels) -> Result<usize> {
        self.0.iter().try_fold(0usize, |acc, s| Ok(acc * levels.dim() + s.index(levels)?))
    }

    pub fn from_index(mut index: usize, m: usize, levels: Levels) -> Result<Self> {
        let d = levels.dim();
        let mut sites = vec![SiteState::M; m];
        for s in sites.iter_mut().rev() {
            *s = SiteState::from_index(index % d, levels)?;
            index /= d;
        }
        Ok(Self(sites))
    }

    /// Data bits replaced by `0`.
    pub fn abstracted(&self) -> Self {
        Self(
            self.0
                .iter()
                .map(|&s| match s {
                    SiteState::Sp { q: 0 | 1, l: 0, head } => SiteState::Sp { q: 0, l: 0, head },
                    other => other,
                })
                .collect(),
        )
    }

    pub fn data_sites(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.0[i].is_data()).collect()
    }

    pub fn data_bits(&self) -> Vec<u8> {
        self.0.iter().filter_map(|s| s.bit()).collect()
    }

    pub fn head_position(&self) -> Option<usize> {
        self.0.iter().position(|s| s.head().is_some())
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

impl FromStr for Configuration {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        text.split_whitespace().map(str::parse).collect::<Result<Vec<_>>>().map(Self)
    }
}
