use std::collections::HashSet;

use num_complex::Complex64 as C64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use symlab::globalprog::{execute_tape, Alignment, CommandKind, GlobalCommand, ProgramTape};
use symlab::numkit::{hermitian_eigenvalues, ComplexVector};
use symlab::tchain::*;
use symlab::Error;

const KINDS: [CommandKind; 3] = [CommandKind::G, CommandKind::S, CommandKind::Skip];

fn all_tapes(max_len: usize) -> Vec<Vec<CommandKind>> {
    let mut out = vec![vec![]];
    let mut all = Vec::new();
    for _ in 0..max_len {
        out = out
            .iter()
            .flat_map(|t: &Vec<CommandKind>| {
                KINDS.iter().map(move |&k| {
                    let mut t = t.clone();
                    t.push(k);
                    t
                })
            })
            .collect();
        all.extend(out.clone());
    }
    all
}

fn random_state(n: usize, seed: u64) -> ComplexVector {
    ComplexVector::random(1 << n, &mut ChaCha8Rng::seed_from_u64(seed))
}

#[test]
fn site_encoding_covers_both_level_sets() {
    for (levels, dim) in [(Levels::Standard, 31), (Levels::Extended, 49)] {
        assert_eq!(levels.dim(), dim);
        let mut tokens = HashSet::new();
        for i in 0..dim {
            let s = SiteState::from_index(i, levels).unwrap();
            assert_eq!(s.index(levels).unwrap(), i);
            let text = s.to_string();
            assert_eq!(text.parse::<SiteState>().unwrap(), s, "{text}");
            assert!(tokens.insert(text));
        }
        assert!(SiteState::from_index(dim, levels).is_err());
    }
    assert_eq!(SiteState::M.index(Levels::Standard).unwrap(), 30);
    let first = SiteState::program(0).with_head(Head::First);
    assert!(first.index(Levels::Standard).is_err());
    let a2 = SiteState::data(1).with_head(Head::Active { a: 2, r: 0 });
    assert!(a2.index(Levels::Standard).is_err());
    assert!(a2.index(Levels::Extended).is_ok());
}

#[test]
fn text_format_round_trips() {
    let text = "M P:G P:skip P:S D:0 D:1+a1r0";
    let c: Configuration = text.parse().unwrap();
    assert_eq!(c.to_string(), text);
    assert_eq!(c.len(), 6);
    assert_eq!(c.data_bits(), vec![0, 1]);
    for bad in ["P:X", "M+a0r0", "D:2", "MARK+a1", "D:0+q1r0"] {
        assert!(bad.parse::<Configuration>().is_err(), "{bad}");
    }
    let idx = c.index(Levels::Standard).unwrap();
    assert_eq!(Configuration::from_index(idx, 6, Levels::Standard).unwrap(), c);
}

#[test]
fn bond_term_is_hermitian_with_unit_or_gate_amplitudes() {
    for levels in [Levels::Standard, Levels::Extended] {
        let table = BondTable::new(levels);
        let h = table.to_operator().unwrap();
        assert!(h.hermiticity_residual() < 1e-15);
        for (_, _, v) in h.triplets() {
            let n = v.norm();
            assert!((n - 1.0).abs() < 1e-15 || (n - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15, "{v}");
        }
    }
}

#[test]
fn printed_terms_are_present() {
    let table = BondTable::new(Levels::Standard);
    let has = |a: &str, b: &str, a2: &str, b2: &str| {
        let out = table.apply_pair(a.parse().unwrap(), b.parse().unwrap()).unwrap();
        out.iter()
            .any(|(x, y, v)| x.to_string() == a2 && y.to_string() == b2 && (v - C64::new(1.0, 0.0)).norm() < 1e-15)
    };
    // program step: the marker hands over to the next command
    assert!(has("MARK+a0r1", "P:G", "P:S", "MARK+a1r0"));
    // marker reaches a skip and becomes m; m crosses the skip and lands on a command
    assert!(has("MARK+a0r0", "P:skip", "P:G", "M"));
    assert!(has("M", "P:S", "P:skip", "MARK+a1r1"));
    assert!(has("M", "P:skip", "P:skip", "M"));
    // emission and inactive propagation
    assert!(has("MARK+a1r1", "D:0", "MARK", "D:0+a0r1"));
    assert!(has("D:1+a0r0", "D:0", "D:1", "D:0+a1r0"));
    // active propagation applies SWAP for r = 1
    assert!(has("D:1+a1r1", "D:0", "D:0", "D:1+a0r1"));
    assert!(table.apply_pair("MARK+a0r0".parse().unwrap(), "D:0".parse().unwrap()).unwrap().is_empty());
}

#[test]
fn full_ring_operator_is_translation_invariant_and_two_local() {
    for (m, levels) in [(2, Levels::Standard), (3, Levels::Standard), (3, Levels::Extended)] {
        let ht = build_ht(m, levels).unwrap();
        assert_eq!(ht.dim(), levels.dim().pow(m as u32));
        assert!(ht.is_hermitian());
        assert_eq!(translation_defect(&ht, m, levels).unwrap(), 0.0);
        assert!(check_two_body_support(&ht, m, levels).unwrap() > 0);
    }
    assert!(matches!(build_ht(4, Levels::Extended), Err(Error::SizeCap { .. })));
    assert!(build_ht(1, Levels::Standard).is_err());
}

#[test]
fn sparse_application_matches_full_operator() {
    let table = BondTable::new(Levels::Standard);
    let ht = build_ht(3, Levels::Standard).unwrap();
    for text in ["M P:G D:1", "MARK+a1r0 P:S D:0", "P:skip MARK D:1+a0r0"] {
        let c: Configuration = text.parse().unwrap();
        let idx = c.index(Levels::Standard).unwrap();
        let sparse = apply_ht_sparse(&[(c, C64::new(1.0, 0.0))].into_iter().collect(), &table).unwrap();
        let dense = ht.apply(&ComplexVector::basis(ht.dim(), idx)).unwrap();
        let mut count = 0;
        for (k, v) in dense.iter().enumerate() {
            let cfg = Configuration::from_index(k, 3, Levels::Standard).unwrap();
            let s = sparse.get(&cfg).copied().unwrap_or_default();
            assert!((s - v).norm() < 1e-15);
            count += usize::from(v.norm() > 0.0);
        }
        assert_eq!(count, sparse.values().filter(|v| v.norm() > 0.0).count());
    }
}

#[test]
fn validity_checker() {
    let tape = ProgramTape::new(2, vec![GlobalCommand::new(CommandKind::S, Alignment::Odd)]).unwrap();
    assert!(matches!(initial_configuration(&tape, &[0, 1]), Err(Error::Parity(_))));
    let small = ProgramTape { n_q: 1, commands: tape.commands.clone() };
    let c = initial_configuration(&small, &[0]).unwrap();
    assert_eq!(c.to_string(), "M P:S D:0");
    validate_configuration(&c, Levels::Standard).unwrap();
    for text in [
        "M P:S MARK+a0r0 D:0 D:1",
        "MARK+a1r0 P:S MARK D:0 D:1",
        "M P:S D:0+a0r0",
        "MARK P:S D:0",
        "P:G P:S D:0",
        "M D:0 P:S",
        "M P:S D:0 D:1",
        "M P:G P:S",
    ] {
        let c: Configuration = text.parse().unwrap();
        assert!(validate_configuration(&c, Levels::Standard).is_err(), "{text}");
    }
    let ext: Configuration = "P:skip+n1 P:G D:1".parse().unwrap();
    assert!(validate_configuration(&ext, Levels::Standard).is_err());
    validate_configuration(&ext, Levels::Extended).unwrap();
}

#[test]
fn clock_paths_are_simple_with_cosine_spectrum() {
    let table = BondTable::new(Levels::Standard);
    for kinds in all_tapes(3) {
        for n in [2usize, 3] {
            let tape = realized_tape(&kinds, n).unwrap();
            let init = initial_configuration(&tape, &vec![0; n]).unwrap();
            validate_configuration(&init, Levels::Standard).unwrap();
            let path = clock_path_with(&init, &table).unwrap();
            assert_eq!(path.start, 0);
            for c in &path.configs {
                validate_configuration(c, Levels::Standard).unwrap();
            }
            let psi = random_state(n, kinds.len() as u64 * 7 + n as u64);
            let (h, leakage) = restricted_hamiltonian(&path, &psi, &table).unwrap();
            assert!(leakage < 1e-12, "{leakage}");
            let mut got = hermitian_eigenvalues(&h);
            got.sort_by(|a, b| b.total_cmp(a));
            for (g, w) in got.iter().zip(path.analytic_spectrum()) {
                assert!((g - w).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn ring_computation_matches_direct_execution() {
    let opts = ComputationOptions { epsilon: 0.05, period: None };
    for (i, kinds) in all_tapes(3).into_iter().enumerate() {
        for n in [2usize, 3] {
            let psi = random_state(n, i as u64 * 31 + n as u64);
            let tape = realized_tape(&kinds, n).unwrap();
            let run = run_computation(&tape, &psi, &opts).unwrap();
            let want = execute_tape(&run.tape, &psi).unwrap();
            assert!(run.state.max_abs_diff(&want) < 1e-12, "{kinds:?} n={n}");
            assert!(run.success >= 0.95);
            assert_eq!(run.tape.commands.len() % 2, n % 2);
        }
    }
}

/// Every alignment assignment is tried; the realized one must be among those consistent
/// with the ring's output.
#[test]
fn emergent_alignment_found_by_exhaustive_search() {
    for kinds in all_tapes(3) {
        let n = 3;
        let tape = realized_tape(&kinds, n).unwrap();
        let psi = random_state(n, 5);
        let init = initial_configuration(&tape, &[0; 3]).unwrap();
        let out = reachable_clock_path(&init, Levels::Standard).unwrap().output(&psi).unwrap();
        let len = tape.commands.len();
        let matching: Vec<u32> = (0..1u32 << len)
            .filter(|mask| {
                let commands = tape
                    .commands
                    .iter()
                    .enumerate()
                    .map(|(t, c)| {
                        GlobalCommand::new(c.kind, if mask >> t & 1 == 0 { Alignment::Odd } else { Alignment::Even })
                    })
                    .collect();
                let cand = ProgramTape::new(n, commands).unwrap();
                execute_tape(&cand, &psi).unwrap().max_abs_diff(&out) < 1e-12
            })
            .collect();
        let realized: u32 = (0..len).map(|t| u32::from(tape.commands[t].align == Alignment::Even) << t).sum();
        assert!(matching.contains(&realized), "{kinds:?}");
    }
}

#[test]
fn mismatched_alignment_is_rejected() {
    let psi = random_state(2, 1);
    let wrong = ProgramTape::new(2, vec![GlobalCommand::new(CommandKind::G, Alignment::Even)]).unwrap();
    assert!(matches!(run_computation(&wrong, &psi, &ComputationOptions::default()), Err(Error::InvalidArgument(_))));
    // skips carry no alignment requirement
    let skip = ProgramTape::new(2, vec![GlobalCommand::new(CommandKind::Skip, Alignment::Even)]).unwrap();
    let run = run_computation(&skip, &psi, &ComputationOptions::default()).unwrap();
    assert!(run.state.max_abs_diff(&psi) < 1e-15);
}

#[test]
fn paths_from_interior_and_frozen_configurations() {
    let frozen: Configuration = "P:G P:S D:0".parse().unwrap();
    let path = reachable_clock_path(&frozen, Levels::Standard).unwrap();
    assert_eq!(path.len(), 1);

    let init: Configuration = "M P:G P:S D:0 D:1".parse().unwrap();
    let full = reachable_clock_path(&init, Levels::Standard).unwrap();
    let mid = full.configs[full.len() / 2].clone();
    let again = reachable_clock_path(&mid, Levels::Standard).unwrap();
    assert_eq!(again.len(), full.len());
    assert_eq!(again.configs[0], full.configs[0]);
    assert_eq!(again.start, full.len() / 2);

    let two_heads: Configuration = "MARK+a1r0 P:G D:0+a1r0 D:0 D:0".parse().unwrap();
    let err = reachable_clock_path(&two_heads, Levels::Standard).unwrap_err();
    assert!(matches!(err, Error::Branching { degree: 3, .. }), "{err}");
}

#[test]
fn extended_machine_paths() {
    let table = BondTable::new(Levels::Extended);
    for kinds in all_tapes(2) {
        for n in [1usize, 2, 3] {
            let kinds = padded_kinds(&kinds, n);
            let bits = vec![0; n];
            let with = extended_initial_configuration(&kinds, &bits, true).unwrap();
            let without = extended_initial_configuration(&kinds, &bits, false).unwrap();
            let p = clock_path_with(&with, &table).unwrap();
            let q = clock_path_with(&without, &table).unwrap();
            assert_eq!(p.start, 0);
            assert_eq!(q.len(), with.len());
            assert!(q.len() < p.len());
            for c in &p.configs {
                validate_configuration(c, Levels::Extended).unwrap();
            }
            // the final sweep visits every data site with a = 2
            let swept: HashSet<usize> = p
                .configs
                .iter()
                .filter(|c| c.sites().iter().any(|s| matches!(s.head(), Head::Active { a: 2, .. })))
                .map(|c| c.head_position().unwrap())
                .collect();
            assert_eq!(swept, p.data_sites.iter().copied().collect());
            if n >= 2 {
                let psi = random_state(n, 3);
                let ext_out = p.output(&psi).unwrap();
                let std_init = initial_configuration(&realized_tape(&kinds, n).unwrap(), &bits).unwrap();
                let std_out = reachable_clock_path(&std_init, Levels::Standard).unwrap().output(&psi).unwrap();
                assert!(ext_out.max_abs_diff(&std_out) < 1e-12);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn history_is_unitary_and_reversible(
        kinds in prop::collection::vec(0usize..3, 1..5),
        n in 2usize..5,
        seed in 0u64..1000,
    ) {
        let kinds: Vec<CommandKind> = kinds.into_iter().map(|k| KINDS[k]).collect();
        let tape = realized_tape(&kinds, n).unwrap();
        let init = initial_configuration(&tape, &vec![0; n]).unwrap();
        let path = reachable_clock_path(&init, Levels::Standard).unwrap();
        let table = BondTable::new(Levels::Standard);
        let psi = random_state(n, seed);
        let frames = path.frames(&psi).unwrap();
        for f in &frames {
            prop_assert!((f.norm() - 1.0).abs() < 1e-12);
        }
        // the reverse transition is the adjoint of the forward one
        for k in 1..path.len() {
            let back = clock_neighbours(&path.configs[k], &table).unwrap();
            let (_, map) = back.iter().find(|(c, _)| *c == path.configs[k - 1]).unwrap();
            let fwd = &path.steps[k - 1];
            for r in 0..map.matrix.len() {
                for c in 0..map.matrix.len() {
                    prop_assert!((map.matrix[r][c] - fwd.matrix[c][r].conj()).norm() < 1e-15);
                }
            }
        }
        prop_assert!(path.output(&psi).unwrap().max_abs_diff(&execute_tape(&tape, &psi).unwrap()) < 1e-12);
    }
}
