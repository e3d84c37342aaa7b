//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use symlab::dfs::{build_hr_term, encode_levels, singlet_basis, spin_multiplicities, LOGICAL_LEVELS};
use symlab::flag::{default_flag_layout, verify_suppression, FLAG_PERIOD};
use symlab::globalprog::{execute_tape, CommandKind};
use symlab::numkit::{evolve, hermitian_eigenvalues, op_norm, ComplexVector};
use symlab::qma::{
    energy_separation_experiment, minimal_instances, projection_lemma_bound, random_lemma_instance, schedule_couplings,
    DEFAULT_EPSILON,
};
use symlab::statevec::{random_su2, random_unitary2, Gate1, Gate2};
use symlab::tchain::{
    build_ht, check_two_body_support, clock_neighbours, initial_configuration, reachable_clock_path, realized_tape,
    restricted_hamiltonian, run_computation, translation_defect, BondTable, ComputationOptions, Levels,
};
use symlab::uqi::{
    build_uqi, circuit_oracle, embed_product, evolve_factorized, run_uqi_protocol, Gadget, GateOp, HeadInit,
    ProtocolOptions, UqiChainSpec,
};
use symlab::xxchain::{fit_arrival_exponent, HoppingChain};

type Verdict = symlab::Result<(bool, String)>;

struct Criterion {
    name: &'static str,
    limit: Option<Duration>,
    run: fn() -> Verdict,
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn fidelity_error(a: &ComplexVector, b: &ComplexVector) -> f64 {
    let overlap: C64 = a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum();
    (1.0 - overlap.norm_sqr() / (a.norm_sqr() * b.norm_sqr())).abs()
}

fn sorted_diff(num: &[f64], exact: &mut [f64]) -> f64 {
    exact.sort_by(f64::total_cmp);
    num.iter().zip(exact.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

/// Every tape of length 1..=3 over {G, S, skip}.
fn tape_corpus() -> Vec<Vec<CommandKind>> {
    use CommandKind::*;
    (1..=3u32)
        .flat_map(|len| {
            (0..3usize.pow(len)).map(move |code| (0..len).map(|i| [Skip, G, S][code / 3usize.pow(i) % 3]).collect())
        })
        .collect()
}

fn xx_spectrum() -> Verdict {
    let mut worst: f64 = 0.0;
    for l in 2..=64 {
        let chain = HoppingChain::new(l)?;
        let num = hermitian_eigenvalues(&chain.matrix().to_dense());
        worst = worst.max(sorted_diff(&num, &mut chain.analytic_spectrum()));
    }
    Ok((worst < 1e-10, format!("L = 2..64, max |Δλ| = {worst:.2e} (tol 1e-10)")))
}

fn arrival_scaling() -> Verdict {
    let slope = fit_arrival_exponent(&[8, 16, 32, 64, 128])?;
    Ok(((-0.85..=-0.50).contains(&slope), format!("exponent {slope:.4} (band [-0.85, -0.50])")))
}

fn heralded_transfer() -> Verdict {
    let (l, eps) = (16usize, 0.01);
    let chain = HoppingChain::heisenberg(l)?;
    let trace = chain.heralded_transfer(eps, chain.default_period())?;
    let bound = 50.0 * (l as f64).powf(5.0 / 3.0) * (1.0 / eps).ln();
    let t = trace.total_time();
    Ok((
        t.is_finite() && t <= bound && trace.success() >= 1.0 - eps,
        format!("L = 16, time {t:.2} <= {bound:.1}, success {:.4}, {} rounds", trace.success(), trace.rounds()),
    ))
}

fn gadgets(r: &mut ChaCha8Rng) -> Vec<Gadget> {
    let (u, v) = (random_unitary2(r), random_unitary2(r));
    vec![Gadget::SwapHop, Gadget::Uniform(u), Gadget::Alternating(u), Gadget::Selective(u, v), Gadget::Combined(u, v)]
}

fn uqi_equivalence() -> Verdict {
    let mut r = rng(4);
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for n in 2..=4usize {
        for gadget in gadgets(&mut r) {
            let spec = UqiChainSpec::new(n, gadget)?;
            let h = build_uqi(&spec)?;
            let psi = ComplexVector::random(1 << n, &mut r);
            let init = HeadInit::new(r.random_range(1..=n), r.random_range(1..spec.head_dim()));
            let start = embed_product(&spec, &psi, init);
            for t in [0.7, 3.1, 9.4] {
                let full = evolve(&h, &start, t)?;
                let fact = evolve_factorized(&spec, &psi, init, t)?.to_full(&spec);
                worst = worst.max(fidelity_error(&full, &fact));
                cases += 1;
            }
        }
    }
    Ok((worst < 1e-9, format!("{cases} cases over 5 gadgets, N = 2..4, max fidelity error {worst:.2e}")))
}

fn random_program(r: &mut ChaCha8Rng, n: usize) -> Vec<GateOp> {
    (0..r.random_range(1..=2))
        .map(|_| {
            let a = r.random_range(1..=n);
            if r.random::<bool>() {
                GateOp::one(&random_su2(r), a)
            } else {
                let mut b = r.random_range(1..n);
                if b >= a {
                    b += 1;
                }
                let u: Gate2 = random_unitary2(r);
                GateOp::two(&u, a, b)
            }
        })
        .collect()
}

fn uqi_protocol() -> Verdict {
    let mut r = rng(10);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let n = r.random_range(4..=5);
        let prog = random_program(&mut r, n);
        let psi = ComplexVector::random(1 << n, &mut r);
        let run = run_uqi_protocol(n, &prog, &psi, &ProtocolOptions::default())?;
        worst = worst.max(fidelity_error(&run.state, &circuit_oracle(n, &prog, &psi)?));
    }
    Ok((worst < 1e-9, format!("20 programs on N = 4..5, max fidelity error {worst:.2e}")))
}

fn ht_invariances() -> Verdict {
    let ht = build_ht(3, Levels::Standard)?;
    let translation = translation_defect(&ht, 3, Levels::Standard)?;
    let herm = ht.hermiticity_residual();
    let (two_body, detail) = match check_two_body_support(&ht, 3, Levels::Standard) {
        Ok(n) => (true, format!("{n} off-diagonal entries on single bonds")),
        Err(e) => (false, e.to_string()),
    };
    Ok((
        translation == 0.0 && herm == 0.0 && two_body,
        format!("M = 3: translation defect {translation:e}, hermiticity {herm:e}, {detail}"),
    ))
}

fn clock_path() -> Verdict {
    let table = BondTable::new(Levels::Standard);
    let mut r = rng(1);
    let (mut worst, mut count, mut bad_degree): (f64, usize, usize) = (0.0, 0, 0);
    for n_q in [2, 3] {
        for kinds in tape_corpus() {
            let tape = realized_tape(&kinds, n_q)?;
            let init = initial_configuration(&tape, &vec![0; n_q])?;
            let path = reachable_clock_path(&init, Levels::Standard)?;
            let degrees: Vec<usize> = path
                .configs
                .iter()
                .map(|c| clock_neighbours(c, &table).map(|n| n.len()))
                .collect::<symlab::Result<_>>()?;
            let ends = degrees.iter().filter(|&&d| d <= 1).count();
            if degrees.iter().any(|&d| d > 2) || (path.len() > 1 && ends != 2) {
                bad_degree += 1;
            }
            let psi = ComplexVector::random(1 << n_q, &mut r);
            let (h, leak) = restricted_hamiltonian(&path, &psi, &table)?;
            let num = hermitian_eigenvalues(&h);
            worst = worst.max(leak).max(sorted_diff(&num, &mut path.analytic_spectrum()));
            count += 1;
        }
    }
    Ok((
        worst < 1e-10 && bad_degree == 0,
        format!("{count} paths, {bad_degree} non-simple, max spectral error {worst:.2e}"),
    ))
}

fn computation_equivalence() -> Verdict {
    let opts = ComputationOptions { epsilon: 1e-3, period: None };
    let mut r = rng(11);
    let (mut worst, mut count): (f64, usize) = (0.0, 0);
    for n_q in [2, 3] {
        for kinds in tape_corpus() {
            let psi = ComplexVector::random(1 << n_q, &mut r);
            let tape = realized_tape(&kinds, n_q)?;
            let run = run_computation(&tape, &psi, &opts)?;
            let oracle = execute_tape(&run.tape, &psi)?;
            worst = worst.max(fidelity_error(&run.state, &oracle));
            count += 1;
        }
    }
    Ok((worst < 1e-9, format!("{count} tapes, max fidelity error {worst:.2e}")))
}

fn dfs() -> Verdict {
    let mut notes = Vec::new();
    for n in (2..=8).step_by(2) {
        if let Err(e) = spin_multiplicities(n) {
            notes.push(e.to_string());
        }
    }
    let singlets = spin_multiplicities(10)?.multiplicity(0);
    let iso = singlet_basis(10)?;
    let mut r = rng(2);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let g = iso.rotated_gram(&random_su2(&mut r));
        let dev = &g - nalgebra::DMatrix::<C64>::identity(g.nrows(), g.ncols());
        worst = worst.max(dev.norm());
    }
    let ok = notes.is_empty() && singlets == 42 && worst < 1e-9;
    notes.push(format!("N = 10 singlets {singlets}, max ‖V†U^⊗10 V − 1‖ = {worst:.2e} over 20 U"));
    Ok((ok, notes.join("; ")))
}

fn encoded_commutator() -> Verdict {
    let iso = encode_levels(LOGICAL_LEVELS)?;
    let h = BondTable::new(Levels::Standard).to_operator()?;
    let term = build_hr_term(&h, &iso)?;
    let mut r = rng(3);
    let us: Vec<Gate1> = (0..5).map(|_| random_su2(&mut r)).collect();
    let probes: Vec<ComplexVector> = (0..5).map(|_| ComplexVector::random(term.dim(), &mut r)).collect();
    let rel = term.max_commutator_probe(&us, &probes)? / op_norm(&h)?;
    Ok((rel < 1e-8, format!("5 U x 5 probes, max relative commutator {rel:.2e}")))
}

fn flag_suppression() -> Verdict {
    let layout = default_flag_layout();
    let report = verify_suppression(&layout, FLAG_PERIOD)?;
    let control = verify_suppression(&layout.without_section("A"), FLAG_PERIOD)?;
    let aligned_ok = (report.aligned - 1.0).abs() < 1e-12;
    Ok((
        aligned_ok && report.passed() && !control.passed(),
        format!(
            "aligned {:.15}, max shifted {:.2e} over 1..{}, control without A fails at {:?}",
            report.aligned,
            report.max_shifted(),
            FLAG_PERIOD - 1,
            control.failing
        ),
    ))
}

fn projection_lemma() -> Verdict {
    let mut r = rng(4);
    let (mut violations, mut tight): (usize, f64) = (0, 0.0);
    for i in 0..100 {
        let dim = 4 + (i * 7) % 61;
        let tight_case = i % 4 == 0;
        let (h1, h2, s) = random_lemma_instance(&mut r, dim, 1 + i % (dim / 2), tight_case)?;
        let c = projection_lemma_bound(&h1, &h2, &s)?;
        violations += usize::from(!c.holds);
        if tight_case {
            tight = tight.max((c.restricted_min - c.lhs - 0.125).abs());
        }
    }
    Ok((
        violations == 0 && tight < 1e-9,
        format!("100 instances, {violations} violations, 1/8 offset error {tight:.2e}"),
    ))
}

fn qma_separation() -> Verdict {
    let (yes, no) = minimal_instances();
    let rep = energy_separation_experiment(&yes, &no, DEFAULT_EPSILON)?;
    let failing: Vec<usize> =
        (2..=100).filter(|&m| !schedule_couplings(m, DEFAULT_EPSILON).map(|s| s.holds()).unwrap_or(false)).collect();
    Ok((
        rep.lambda_yes.abs() < 1e-8 && rep.separation > 0.5 && failing.is_empty() && rep.schedule_holds,
        format!(
            "λ_yes {:.2e}, λ_no {:.6}, separation {:.6}, schedule M = 2..100 failing {failing:?}",
            rep.lambda_yes, rep.lambda_no, rep.separation
        ),
    ))
}

fn secs(s: u64) -> Option<Duration> {
    Some(Duration::from_secs(s))
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { name: "xx spectrum", limit: secs(10), run: xx_spectrum },
        Criterion { name: "arrival scaling", limit: secs(120), run: arrival_scaling },
        Criterion { name: "heralded transfer", limit: secs(60), run: heralded_transfer },
        Criterion { name: "uqi equivalence", limit: secs(120), run: uqi_equivalence },
        Criterion { name: "uqi protocol", limit: None, run: uqi_protocol },
        Criterion { name: "ring invariances", limit: secs(60), run: ht_invariances },
        Criterion { name: "clock path", limit: None, run: clock_path },
        Criterion { name: "computation equivalence", limit: secs(600), run: computation_equivalence },
        Criterion { name: "singlet subspace", limit: None, run: dfs },
        Criterion { name: "encoded commutator", limit: None, run: encoded_commutator },
        Criterion { name: "flag suppression", limit: secs(60), run: flag_suppression },
        Criterion { name: "projection lemma", limit: None, run: projection_lemma },
        Criterion { name: "ground-energy separation", limit: secs(600), run: qma_separation },
    ];
    let mut failed = 0;
    for (i, c) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = match (c.run)() {
            Ok(v) => v,
            Err(e) => (false, format!("error: {e}")),
        };
        let elapsed = start.elapsed();
        let in_time = c.limit.is_none_or(|l| elapsed <= l);
        let limit = c.limit.map_or(String::new(), |l| format!(" / {}s", l.as_secs()));
        let verdict = if ok && in_time { "PASS" } else { "FAIL" };
        failed += usize::from(verdict == "FAIL");
        println!("{verdict} {:>2} {:<25} {detail} [{:.2}s{limit}]", i + 1, c.name, elapsed.as_secs_f64());
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
