//! Experiment configuration files: JSON objects with a `"command"` discriminator.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use symlab::globalprog::CommandKind;
use symlab::qma::{QmaInstance, DEFAULT_EPSILON};
use symlab::xxchain::Boundary;

/// Invalid or unreadable configuration; maps to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "configuration error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum ExperimentConfig {
    Transfer(TransferConfig),
    Verify(VerifyConfig),
    Compute(ComputeConfig),
    Qma(QmaConfig),
}

impl ExperimentConfig {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Transfer(_) => "transfer",
            Self::Verify(_) => "verify",
            Self::Compute(_) => "compute",
            Self::Qma(_) => "qma",
        }
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Defaults for a command run without a config file.
    pub fn default_for(name: &str) -> Self {
        match name {
            "transfer" => Self::Transfer(TransferConfig::default()),
            "verify" => Self::Verify(VerifyConfig::default()),
            "compute" => Self::Compute(ComputeConfig::default()),
            _ => Self::Qma(QmaConfig::default()),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError(m));
        match self {
            Self::Transfer(c) => {
                if let Some(l) = c.lengths.iter().find(|&&l| l < 2) {
                    return bad(format!("chain length {l} < 2"));
                }
                if !(c.epsilon > 0.0 && c.epsilon < 1.0) {
                    return bad(format!("epsilon {} outside (0, 1)", c.epsilon));
                }
            }
            Self::Verify(c) => {
                if let Some(name) = c.checks.iter().flatten().find(|n| !CHECK_NAMES.contains(&n.as_str())) {
                    return bad(format!("unknown check {name:?}; known: {}", CHECK_NAMES.join(", ")));
                }
                if c.probes == 0 || c.rotations == 0 {
                    return bad("probes and rotations must be positive".into());
                }
            }
            Self::Compute(c) => {
                if c.n_q < 2 || c.n_q > 10 {
                    return bad(format!("n_q = {} outside 2..=10", c.n_q));
                }
                if c.tapes.iter().any(|t| t.is_empty()) {
                    return bad("empty tape".into());
                }
                if let Initial::Bits(b) = &c.initial {
                    if b.len() != c.n_q || b.iter().any(|&x| x > 1) {
                        return bad(format!("initial bits {b:?} do not fit {} qubits", c.n_q));
                    }
                }
                if !(c.epsilon > 0.0 && c.epsilon < 1.0) {
                    return bad(format!("epsilon {} outside (0, 1)", c.epsilon));
                }
            }
            Self::Qma(c) => {
                for inst in [&c.yes, &c.no].into_iter().flatten() {
                    inst.validate().map_err(|e| ConfigError(e.to_string()))?;
                }
                if !(0.0..1.0).contains(&c.epsilon) {
                    return bad(format!("epsilon {} outside [0, 1)", c.epsilon));
                }
                if c.schedule_range[0] < 2 || c.schedule_range[0] > c.schedule_range[1] {
                    return bad(format!("schedule range {:?} invalid", c.schedule_range));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransferConfig {
    pub lengths: Vec<usize>,
    pub boundary: Boundary,
    /// Also write one heralded-transfer trace per length next to the table.
    pub traces: bool,
    pub epsilon: f64,
}

impl Default for TransferConfig {
    fn default() -> Self {
        Self { lengths: vec![8, 16, 32, 64, 128], boundary: Boundary::Heisenberg, traces: false, epsilon: 0.01 }
    }
}

pub const CHECK_NAMES: &[&str] = &[
    "xx_spectrum",
    "ht_translation",
    "ht_hermiticity",
    "ht_two_body",
    "extended_ht_translation",
    "clock_path",
    "dfs_multiplicities",
    "dfs_rotation",
    "encoded_commutator",
    "flag_suppression",
    "schedule",
    "projection_lemma",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    /// Subset of checks to run; all when absent.
    pub checks: Option<Vec<String>>,
    /// Flag-layout section removed before the suppression check (negative control).
    pub flag_drop_section: Option<String>,
    pub probes: usize,
    pub rotations: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { checks: None, flag_drop_section: None, probes: 5, rotations: 5 }
    }
}

impl VerifyConfig {
    pub fn wants(&self, name: &str) -> bool {
        self.checks.as_ref().is_none_or(|c| c.iter().any(|n| n == name))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Initial {
    Random,
    Bits(Vec<u8>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ComputeConfig {
    pub tapes: Vec<Vec<CommandKind>>,
    pub n_q: usize,
    pub initial: Initial,
    pub epsilon: f64,
    pub fidelity_tolerance: f64,
}

impl Default for ComputeConfig {
    fn default() -> Self {
        use CommandKind::*;
        Self {
            tapes: vec![vec![G], vec![G, S], vec![S, G, Skip], vec![Skip, Skip]],
            n_q: 2,
            initial: Initial::Random,
            epsilon: 1e-3,
            fidelity_tolerance: 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QmaConfig {
    /// Instances; the minimal pair when absent.
    pub yes: Option<QmaInstance>,
    pub no: Option<QmaInstance>,
    pub epsilon: f64,
    /// Inclusive range of `M` over which the schedule inequalities are echoed.
    pub schedule_range: [usize; 2],
    pub yes_tolerance: f64,
    pub min_separation: f64,
}

impl Default for QmaConfig {
    fn default() -> Self {
        Self {
            yes: None,
            no: None,
            epsilon: DEFAULT_EPSILON,
            schedule_range: [2, 100],
            yes_tolerance: 1e-8,
            min_separation: 0.5,
        }
    }
}
