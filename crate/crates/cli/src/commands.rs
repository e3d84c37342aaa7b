use std::fmt::Write as _;

use anyhow::{Context, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use symlab::dfs::{build_hr_term, encode_levels, singlet_basis, spin_multiplicities, LOGICAL_LEVELS};
use symlab::flag::{default_flag_layout, verify_suppression, FLAG_PERIOD};
use symlab::globalprog::{execute_tape, CommandKind};
use symlab::numkit::{hermitian_eigenvalues, op_norm, ComplexVector};
use symlab::qma::{
    energy_separation_experiment, minimal_instances, projection_lemma_bound, random_lemma_instance, schedule_couplings,
    SeparationReport,
};
use symlab::statevec::{random_su2, Gate1};
use symlab::tchain::{
    build_ht, check_two_body_support, initial_configuration, reachable_clock_path, realized_tape,
    restricted_hamiltonian, run_computation, translation_defect, BondTable, ComputationOptions, Levels,
};
use symlab::xxchain::{arrival_peaks, fit_power_law, HoppingChain};

use crate::config::{ComputeConfig, Initial, QmaConfig, TransferConfig, VerifyConfig};

/// Result of one command: the main output, extra files keyed by suffix, and the verdict.
pub struct Outcome {
    pub body: String,
    pub extras: Vec<(String, String)>,
    pub passed: bool,
    pub summary: String,
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(stream))
}

pub fn transfer(cfg: &TransferConfig) -> Result<Outcome> {
    let peaks = arrival_peaks(&cfg.lengths, cfg.boundary)?;
    let mut body = String::from("L,t_star,p_star\n");
    for &(l, t, p) in &peaks {
        writeln!(body, "{l},{t:.12},{p:.12}")?;
    }
    let mut extras = Vec::new();
    if cfg.traces {
        for &l in &cfg.lengths {
            let chain = HoppingChain::new(l)?.with_boundary(cfg.boundary);
            let trace = chain.heralded_transfer(cfg.epsilon, chain.default_period())?;
            extras.push((format!("L{l}"), trace.to_csv()));
        }
    }
    let points: Vec<(f64, f64)> = peaks.iter().map(|&(l, _, p)| (l as f64, p)).collect();
    let summary = match fit_power_law(&points) {
        Ok(slope) => format!("{} lengths, fitted arrival exponent {slope:.4}", peaks.len()),
        Err(_) => format!("{} lengths, no fit", peaks.len()),
    };
    Ok(Outcome { body, extras, passed: true, summary })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

fn check(name: &str, value: f64, tolerance: f64, detail: String) -> CheckResult {
    CheckResult { name: name.into(), passed: value <= tolerance, value, tolerance, detail }
}

fn run_check(name: &str, cfg: &VerifyConfig, seed: u64) -> Result<CheckResult> {
    Ok(match name {
        "xx_spectrum" => {
            let mut worst: f64 = 0.0;
            for l in 2..=64 {
                let chain = HoppingChain::new(l)?;
                let num = hermitian_eigenvalues(&chain.matrix().to_dense());
                let mut exact = chain.analytic_spectrum();
                exact.sort_by(f64::total_cmp);
                worst = num.iter().zip(&exact).fold(worst, |w, (a, b)| w.max((a - b).abs()));
            }
            check(name, worst, 1e-10, "L = 2..64, open chain".into())
        }
        "ht_translation" => {
            let ht = build_ht(3, Levels::Standard)?;
            check(name, translation_defect(&ht, 3, Levels::Standard)?, 0.0, "M = 3, 31 levels".into())
        }
        "ht_hermiticity" => {
            let ht = build_ht(3, Levels::Standard)?;
            check(name, ht.hermiticity_residual(), 0.0, "M = 3, 31 levels".into())
        }
        "ht_two_body" => match check_two_body_support(&build_ht(3, Levels::Standard)?, 3, Levels::Standard) {
            Ok(n) => check(name, 0.0, 0.0, format!("{n} off-diagonal entries, all on one bond")),
            Err(e) => check(name, 1.0, 0.0, e.to_string()),
        },
        "extended_ht_translation" => {
            let ht = build_ht(3, Levels::Extended)?;
            let v = translation_defect(&ht, 3, Levels::Extended)?.max(ht.hermiticity_residual());
            check(name, v, 0.0, "M = 3, 49 levels".into())
        }
        "clock_path" => {
            use CommandKind::*;
            let table = BondTable::new(Levels::Standard);
            let mut r = rng(seed, 1);
            let mut worst: f64 = 0.0;
            let mut count = 0;
            for n_q in [2, 3] {
                for len in 1..=3u32 {
                    for code in 0..3usize.pow(len) {
                        let kinds: Vec<CommandKind> =
                            (0..len).map(|i| [Skip, G, S][code / 3usize.pow(i) % 3]).collect();
                        let tape = realized_tape(&kinds, n_q)?;
                        let init = initial_configuration(&tape, &vec![0; n_q])?;
                        let path = reachable_clock_path(&init, Levels::Standard)?;
                        let psi = ComplexVector::random(1 << n_q, &mut r);
                        let (h, leak) = restricted_hamiltonian(&path, &psi, &table)?;
                        let num = hermitian_eigenvalues(&h);
                        let mut exact = path.analytic_spectrum();
                        exact.sort_by(f64::total_cmp);
                        worst = num.iter().zip(&exact).fold(worst.max(leak), |w, (a, b)| w.max((a - b).abs()));
                        count += 1;
                    }
                }
            }
            check(name, worst, 1e-10, format!("{count} tapes, restricted spectrum vs 2cos(πm/(L+1))"))
        }
        "dfs_multiplicities" => {
            let mut bad = Vec::new();
            for n in (2..=8).step_by(2) {
                if let Err(e) = spin_multiplicities(n) {
                    bad.push(e.to_string());
                }
            }
            let singlets = spin_multiplicities(10)?.multiplicity(0);
            if singlets != 42 {
                bad.push(format!("N = 10 singlet dimension {singlets}"));
            }
            check(
                name,
                bad.len() as f64,
                0.0,
                if bad.is_empty() { "N = 2..8 exact, N = 10 singlets 42".into() } else { bad.join("; ") },
            )
        }
        "dfs_rotation" => {
            let iso = singlet_basis(10)?;
            let mut r = rng(seed, 2);
            let mut worst: f64 = 0.0;
            for _ in 0..4 * cfg.rotations {
                let g = iso.rotated_gram(&random_su2(&mut r));
                let dev = (0..g.nrows())
                    .flat_map(|r| (0..g.ncols()).map(move |c| (r, c)))
                    .map(|(r, c)| (g[(r, c)] - f64::from(u8::from(r == c))).norm_sqr())
                    .sum::<f64>();
                worst = worst.max(dev.sqrt());
            }
            check(name, worst, 1e-9, format!("{} random SU(2) on the N = 10 singlet space", 4 * cfg.rotations))
        }
        "encoded_commutator" => {
            let iso = encode_levels(LOGICAL_LEVELS)?;
            let h = BondTable::new(Levels::Standard).to_operator()?;
            let term = build_hr_term(&h, &iso)?;
            let mut r = rng(seed, 3);
            let us: Vec<Gate1> = (0..cfg.rotations).map(|_| random_su2(&mut r)).collect();
            let probes: Vec<ComplexVector> =
                (0..cfg.probes).map(|_| ComplexVector::random(term.dim(), &mut r)).collect();
            let rel = term.max_commutator_probe(&us, &probes)? / op_norm(&h)?;
            check(name, rel, 1e-8, format!("{} rotations x {} probes on 20 qubits", us.len(), probes.len()))
        }
        "flag_suppression" => {
            let mut layout = default_flag_layout();
            if let Some(s) = &cfg.flag_drop_section {
                layout = layout.without_section(s);
            }
            let report = verify_suppression(&layout, FLAG_PERIOD)?;
            let value = report.max_shifted().max((report.aligned - 1.0).abs());
            let detail = if report.failing.is_empty() {
                format!("aligned {}, shifts 1..{} suppressed", report.aligned, FLAG_PERIOD - 1)
            } else {
                format!("aligned {}, failing shifts {:?}", report.aligned, report.failing)
            };
            CheckResult { name: name.into(), passed: report.passed(), value, tolerance: report.tolerance, detail }
        }
        "schedule" => {
            let failing: Vec<usize> = (2..=100)
                .filter(|&m| !schedule_couplings(m, symlab::qma::DEFAULT_EPSILON).map(|s| s.holds()).unwrap_or(false))
                .collect();
            check(name, failing.len() as f64, 0.0, format!("M = 2..100, failing {failing:?}"))
        }
        "projection_lemma" => {
            let mut r = rng(seed, 4);
            let mut violations = 0;
            let mut tight: f64 = 0.0;
            for i in 0..100 {
                let dim = 4 + (i * 7) % 61;
                let (h1, h2, s) = random_lemma_instance(&mut r, dim, 1 + i % (dim / 2), i % 4 == 0)?;
                let c = projection_lemma_bound(&h1, &h2, &s)?;
                violations += usize::from(!c.holds);
                if i % 4 == 0 {
                    tight = tight.max((c.restricted_min - c.lhs - 0.125).abs());
                }
            }
            let mut res = check(name, violations as f64, 0.0, format!("100 instances, tight-offset error {tight:.2e}"));
            res.passed &= tight <= 1e-9;
            res
        }
        other => anyhow::bail!("unknown check {other}"),
    })
}

pub fn verify(cfg: &VerifyConfig, seed: u64) -> Result<Outcome> {
    let names: Vec<&str> = crate::config::CHECK_NAMES.iter().copied().filter(|n| cfg.wants(n)).collect();
    let checks = names
        .iter()
        .map(|n| run_check(n, cfg, seed).with_context(|| format!("check {n}")))
        .collect::<Result<Vec<_>>>()?;
    let passed = checks.iter().all(|c| c.passed);
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    let summary = format!(
        "{}/{} checks passed{}",
        checks.len() - failed.len(),
        checks.len(),
        if failed.is_empty() { String::new() } else { format!("; failed: {}", failed.join(", ")) }
    );
    let report = VerifyReport { seed, passed, checks };
    Ok(Outcome { body: serde_json::to_string_pretty(&report)? + "\n", extras: Vec::new(), passed, summary })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComputeRecord {
    pub kinds: Vec<CommandKind>,
    pub executed: Vec<String>,
    pub path_len: usize,
    pub rounds: usize,
    pub total_time: f64,
    pub success: f64,
    pub fidelity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComputeReport {
    pub seed: u64,
    pub n_q: usize,
    pub passed: bool,
    pub min_fidelity: f64,
    pub runs: Vec<ComputeRecord>,
}

pub fn compute(cfg: &ComputeConfig, seed: u64) -> Result<Outcome> {
    let opts = ComputationOptions { epsilon: cfg.epsilon, period: None };
    let dim = 1usize << cfg.n_q;
    let mut runs = Vec::with_capacity(cfg.tapes.len());
    for (i, kinds) in cfg.tapes.iter().enumerate() {
        let psi = match &cfg.initial {
            Initial::Random => ComplexVector::random(dim, &mut rng(seed, 100 + i as u64)),
            Initial::Bits(b) => ComplexVector::basis(dim, b.iter().fold(0, |a, &x| a << 1 | x as usize)),
        };
        let tape = realized_tape(kinds, cfg.n_q)?;
        let run = run_computation(&tape, &psi, &opts)?;
        let oracle = execute_tape(&run.tape, &psi)?;
        runs.push(ComputeRecord {
            kinds: kinds.clone(),
            executed: run.tape.commands.iter().map(|c| format!("{}/{:?}", c.kind, c.align).to_lowercase()).collect(),
            path_len: run.path_len,
            rounds: run.rounds,
            total_time: run.total_time,
            success: run.success,
            fidelity: run.state.fidelity(&oracle),
        });
    }
    let min_fidelity = runs.iter().map(|r| r.fidelity).fold(1.0, f64::min);
    let passed = min_fidelity > 1.0 - cfg.fidelity_tolerance;
    let summary = format!("{} tapes, min fidelity {min_fidelity:.15}", runs.len());
    let report = ComputeReport { seed, n_q: cfg.n_q, passed, min_fidelity, runs };
    Ok(Outcome { body: serde_json::to_string_pretty(&report)? + "\n", extras: Vec::new(), passed, summary })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QmaReport {
    pub passed: bool,
    pub separation: SeparationReport,
    pub schedule_range: [usize; 2],
    pub schedule_inequalities_hold: bool,
    pub yes_tolerance: f64,
    pub min_separation: f64,
}

pub fn qma(cfg: &QmaConfig) -> Result<Outcome> {
    let (dy, dn) = minimal_instances();
    let yes = cfg.yes.clone().unwrap_or(dy);
    let no = cfg.no.clone().unwrap_or(dn);
    let separation = energy_separation_experiment(&yes, &no, cfg.epsilon)?;
    let [lo, hi] = cfg.schedule_range;
    let schedule_ok = (lo..=hi).all(|m| schedule_couplings(m, cfg.epsilon).map(|s| s.holds()).unwrap_or(false));
    let passed = schedule_ok
        && separation.schedule_holds
        && separation.lambda_yes.abs() < cfg.yes_tolerance
        && separation.separation > cfg.min_separation;
    let summary = format!(
        "lambda_yes {:.3e}, lambda_no {:.6}, separation {:.6}, schedule {}",
        separation.lambda_yes,
        separation.lambda_no,
        separation.separation,
        if schedule_ok { "holds" } else { "violated" }
    );
    let report = QmaReport {
        passed,
        separation,
        schedule_range: cfg.schedule_range,
        schedule_inequalities_hold: schedule_ok,
        yes_tolerance: cfg.yes_tolerance,
        min_separation: cfg.min_separation,
    };
    Ok(Outcome { body: serde_json::to_string_pretty(&report)? + "\n", extras: Vec::new(), passed, summary })
}
