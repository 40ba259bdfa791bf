//! Acceptance suite: one test per criterion, each printing a PASS line
//! (visible with `--nocapture`). Criterion 7's command-line half lives in
//! the CLI crate's acceptance test.

mod support;

use ddeq::check::{
    affected_columns, check_flow, check_g_i_g, check_reference, check_simulation, CheckOptions,
    Outcome, Side, SimulationCheck, Strategy, WitnessKind,
};
use ddeq::circuit::{example_circuit, example_circuit_alt, Circuit, Gate, GateKind};
use ddeq::dd::{DdPackage, IdentityCheck};
use ddeq::rng::Xoshiro256StarStar;
use ddeq::Complex64;
use std::f64::consts::FRAC_1_SQRT_2 as S;
use support::*;

fn fig_g() -> Circuit {
    example_circuit()
}

fn fig_g_alt() -> Circuit {
    example_circuit_alt()
}

fn erroneous_alt() -> Circuit {
    let mut c = fig_g_alt();
    c.gates.pop();
    c
}

/// Expected system matrix of the worked example (entries 0 and +-1/sqrt2).
fn expected_matrix() -> Dense {
    let rows: [[f64; 8]; 8] = [
        [1., 0., 1., 0., 0., 0., 0., 0.],
        [0., 1., 0., 1., 0., 0., 0., 0.],
        [0., 0., 0., 0., 1., 0., -1., 0.],
        [0., 0., 0., 0., 0., 1., 0., -1.],
        [0., 1., 0., -1., 0., 0., 0., 0.],
        [1., 0., -1., 0., 0., 0., 0., 0.],
        [0., 0., 0., 0., 1., 0., 1., 0.],
        [0., 0., 0., 0., 0., 1., 0., 1.],
    ];
    rows.iter().flatten().map(|&v| Complex64::new(v * S, 0.0)).collect()
}

#[test]
fn criterion_1_worked_example_goldens() {
    // Matrix of the 4-gate circuit: expected entries, exactly 7 nodes.
    let mut pkg = DdPackage::new();
    let u = pkg.build_matrix(&fig_g()).unwrap();
    let dense = pkg.dense_matrix(u, 3).unwrap();
    assert!(max_entry_delta(&dense, &expected_matrix()) < 1e-10);
    assert_eq!(pkg.node_count(u), 7);

    // Identity diagram has exactly n nodes for n = 1..16.
    for n in 1..=16 {
        let id = pkg.identity_dd(n);
        assert_eq!(pkg.node_count(id), n);
    }

    // Simulation of input |4> yields (|010> + |110>)/sqrt(2).
    let state = pkg.simulate(&fig_g(), 4).unwrap();
    let amps = pkg.dense_vector(state, 3).unwrap();
    for (i, amp) in amps.iter().enumerate() {
        let expect = if i == 2 || i == 6 { S } else { 0.0 };
        assert!((amp - expect).norm() < 1e-10, "amplitude {i}");
    }

    // The 16-gate realization is equivalent under all four strategies.
    for strategy in Strategy::ALL {
        let opts = CheckOptions { strategy, seed: 1, ..CheckOptions::default() };
        let verdict = check_flow(&fig_g(), &fig_g_alt(), &opts).unwrap();
        assert!(
            matches!(verdict.outcome, Outcome::Equivalent),
            "{strategy:?}: {:?}",
            verdict.outcome
        );
    }

    // Removing the final t gate (a seeded injection can hit exactly that
    // position) makes the pair non-equivalent; the extracted basis-state
    // counterexample re-verifies at the squared-overlap fidelity
    // (2+sqrt2)/4 = 0.8536 against the independent dense oracle.
    let bad = erroneous_alt();
    let seed = (0..u64::MAX)
        .find(|&s| fig_g_alt().inject_errors(1, s).unwrap().gates == bad.gates)
        .expect("some seed removes position 15");
    assert_eq!(fig_g_alt().inject_errors(1, seed).unwrap().gates, bad.gates);

    for strategy in Strategy::ALL {
        let opts = CheckOptions { strategy, sims: 0, ..CheckOptions::default() };
        let verdict = check_flow(&fig_g(), &bad, &opts).unwrap();
        let Outcome::NotEquivalent(cx) = verdict.outcome else {
            panic!("{strategy:?}: expected non-equivalence");
        };
        let WitnessKind::BasisState(i) = cx.kind else {
            panic!("{strategy:?}: expected a basis-state witness");
        };
        assert!((cx.fidelity - 0.8535533905932737).abs() <= 0.001, "{strategy:?}");
        let oracle_f = oracle_basis_fidelity(&fig_g(), &bad, i);
        assert!((oracle_f - cx.fidelity).abs() < 1e-9, "{strategy:?}: independent re-check");
    }
    println!("ACCEPTANCE criterion 1 PASS: worked-example goldens");
}

#[test]
fn criterion_2_strategy_trace_reproduction() {
    // Reported per-step node counts of the original tool. The canonical
    // package here shares two sub-diagrams the original kept distinct, so a
    // few tail steps sit up to 2 below these values; max and final counts
    // match exactly (see the repo notes on normalization).
    const TOOL_NAIVE: [usize; 21] =
        [3, 3, 3, 4, 3, 5, 5, 5, 6, 6, 7, 7, 7, 5, 5, 4, 3, 3, 3, 3, 3];
    const TOOL_PROP: [usize; 21] =
        [3, 3, 3, 4, 4, 5, 4, 4, 7, 7, 7, 7, 5, 5, 4, 4, 3, 3, 3, 3, 3];
    const TOOL_LOOK: [usize; 21] =
        [3, 3, 3, 4, 3, 3, 4, 4, 6, 6, 7, 7, 7, 5, 5, 4, 3, 3, 3, 3, 3];

    let cases = [
        (Strategy::Naive, &TOOL_NAIVE, 4.43),
        (Strategy::Proportional, &TOOL_PROP, 4.33),
        (Strategy::Lookahead, &TOOL_LOOK, 4.24),
    ];
    let opts = CheckOptions { sims: 0, ..CheckOptions::default() };
    for (strategy, tool_trace, tool_avg) in cases {
        let verdict = check_g_i_g(&fig_g(), &fig_g_alt(), strategy, &opts).unwrap();
        assert!(matches!(verdict.outcome, Outcome::Equivalent));
        let trace = &verdict.stats.node_trace;
        assert_eq!(trace.len(), 21, "{strategy:?}: 1 + 20 applications");
        assert_eq!(verdict.stats.max_nodes(), 7, "{strategy:?}: exact maximum");
        assert_eq!(*trace.last().unwrap(), 3, "{strategy:?}: identity at the end");
        for (step, (&got, &tool)) in trace.iter().zip(tool_trace.iter()).enumerate() {
            assert!(
                got.abs_diff(tool) <= 2,
                "{strategy:?} step {step}: {got} vs tool {tool}"
            );
        }
        let avg = verdict.stats.avg_nodes();
        assert!(
            (avg - tool_avg).abs() <= 0.3,
            "{strategy:?}: avg {avg:.4} vs {tool_avg}"
        );
    }

    // The look-ahead application order (ties prefer the left side).
    let verdict = check_g_i_g(&fig_g(), &fig_g_alt(), Strategy::Lookahead, &opts).unwrap();
    let sides: Vec<Side> = verdict.stats.applications.iter().map(|a| a.side).collect();
    use Side::{Left as L, Right as R};
    let expected = [
        L, R, L, R, R, R, R, L, L, R, R, R, R, R, R, R, R, R, R, R,
    ];
    assert_eq!(sides, expected);

    // Naive concatenation baseline: building G ++ invert(G') gate by gate
    // peaks at 9 nodes.
    let mut cat = fig_g();
    cat.gates.extend(fig_g_alt().invert().gates);
    let mut pkg = DdPackage::new();
    let mut trace = Vec::new();
    let u = pkg.build_matrix_traced(&cat, &mut trace).unwrap();
    assert_eq!(pkg.is_identity(u, 3), IdentityCheck::Exact);
    assert_eq!(trace.iter().copied().max().unwrap(), 9);
    println!("ACCEPTANCE criterion 2 PASS: strategy traces (max 7, final 3, avgs in band, baseline peak 9)");
}

#[test]
fn criterion_3_oracle_equivalence_suite() {
    let mut rng = Xoshiro256StarStar::seeded(0x04AC1E);
    let mut checked_pairs = 0usize;
    for trial in 0..500usize {
        let n = 1 + (trial % 5);
        let m = 1 + (rng.below(40) as usize);
        let circuit = random_circuit(&mut rng, n, m);
        let dim = 1usize << n;
        let oracle = oracle_circuit_matrix(&circuit);

        // (a) diagram export matches the dense gate product entrywise.
        let mut pkg = DdPackage::new();
        let u = pkg.build_matrix(&circuit).unwrap();
        let dense = pkg.dense_matrix(u, n).unwrap();
        assert!(max_entry_delta(&dense, &oracle) < 1e-9, "trial {trial} (a)");

        // (b) simulation extracts every column.
        for col in 0..dim {
            let state = pkg.simulate(&circuit, col as u64).unwrap();
            let amps = pkg.dense_vector(state, n).unwrap();
            let want = oracle_column(&oracle, dim, col);
            let delta =
                amps.iter().zip(want.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(delta < 1e-9, "trial {trial} (b) column {col}");
        }

        // (c) U * U^dag is the exact identity.
        let adj = pkg.adjoint(u).unwrap();
        let prod = pkg.multiply(u, adj).unwrap();
        assert_eq!(pkg.is_identity(prod, n), IdentityCheck::Exact, "trial {trial} (c)");

        // (d) every strategy agrees with the dense phase-aware comparison,
        // on an equivalent-by-construction partner, an error-injected one,
        // or a globally phase-shifted one.
        if trial % 2 == 0 {
            let partner = match trial % 3 {
                0 => padded_equivalent(&mut rng, &circuit, 2),
                1 => circuit.inject_errors(1, trial as u64).unwrap(),
                _ => with_global_phase(&padded_equivalent(&mut rng, &circuit, 1), 1.1),
            };
            let oracle_equal =
                equal_up_to_global_phase(&oracle, &oracle_circuit_matrix(&partner), 1e-9);
            for strategy in Strategy::ALL {
                let opts = CheckOptions {
                    strategy,
                    sims: 2,
                    seed: trial as u64,
                    ..CheckOptions::default()
                };
                let verdict = check_flow(&circuit, &partner, &opts).unwrap();
                let got_equal = matches!(
                    verdict.outcome,
                    Outcome::Equivalent | Outcome::EquivalentUpToGlobalPhase(_)
                );
                assert_eq!(got_equal, oracle_equal, "trial {trial} (d) {strategy:?}");
                if let Outcome::NotEquivalent(cx) = &verdict.outcome {
                    if let WitnessKind::BasisState(i) = cx.kind {
                        let f = oracle_basis_fidelity(&circuit, &partner, i);
                        assert!(f < 1.0 - 1e-8, "trial {trial} (d): witness re-check");
                    }
                }
            }
            checked_pairs += 1;
        }
    }
    println!("ACCEPTANCE criterion 3 PASS: 500 random circuits, {checked_pairs} strategy-agreement pairs");
}

#[test]
fn criterion_4_column_difference_analysis() {
    let n = 5usize;
    for controls in 0..n {
        let mut diff = Circuit::new(n);
        let control_list: Vec<usize> = (n - controls..n).collect();
        diff.push(Gate::new(GateKind::X, vec![], vec![0], control_list));
        let affected = affected_columns(&diff).unwrap();
        assert_eq!(affected, 1u128 << (n - controls), "c = {controls}");
    }
    println!("ACCEPTANCE criterion 4 PASS: single c-controlled X affects 2^(n-c) columns, n=5, c=0..4");
}

#[test]
fn criterion_5_desk_scale_detection_rates() {
    let mut gen_rng = Xoshiro256StarStar::seeded(0xDE5C);
    let mut rates = Vec::new();
    for &removed in &[3usize, 1] {
        let mut detected = 0usize;
        for instance in 0..100u64 {
            let base = random_circuit(&mut gen_rng, 8, 100);
            let injected = base.inject_errors(removed, 0xBAD ^ instance).unwrap();
            let opts = CheckOptions { sims: 16, seed: 0x5EED ^ instance, ..CheckOptions::default() };
            if matches!(
                check_simulation(&base, &injected, &opts).unwrap(),
                SimulationCheck::NotEquivalent { .. }
            ) {
                detected += 1;
            }
        }
        rates.push((removed, detected as f64 / 100.0));
    }
    let k3 = rates[0].1;
    let k1 = rates[1].1;
    assert!(k3 >= 0.95, "k=3 detection rate {k3}");
    assert!(k1 >= 0.60, "k=1 detection rate {k1}");
    println!(
        "ACCEPTANCE criterion 5 PASS: simulation-only detection rate k=3: {k3:.2} (>= 0.95), k=1: {k1:.2} (>= 0.60, directional)"
    );
}

#[test]
fn criterion_6_detection_probability_law() {
    // Pairs differing by one fully controlled gate at n=6: exactly two of
    // the 64 columns witness, so detection over r distinct draws follows
    // 1 - C(62, r)/C(64, r).
    let n = 6usize;
    let mut base = Circuit::new(n);
    base.h(1);
    base.cx(1, 4);
    base.t(0);
    base.cx(4, 2);
    base.h(5);
    base.cx(5, 3);
    let mut other = Circuit::new(n);
    other.push(Gate::new(GateKind::X, vec![], vec![0], (1..n).collect()));
    other.gates.extend(base.gates.iter().cloned());

    let trials = 2000u64;
    for &r in &[1usize, 4, 16] {
        let p = 1.0 - ((64 - r) as f64 * (63 - r) as f64) / (64.0 * 63.0);
        let mut hits = 0usize;
        for trial in 0..trials {
            let opts = CheckOptions {
                sims: r,
                seed: 0xC6 ^ (trial.wrapping_mul(0x9E3779B97F4A7C15)),
                ..CheckOptions::default()
            };
            match check_simulation(&base, &other, &opts).unwrap() {
                SimulationCheck::NotEquivalent { counterexample, .. } => {
                    let WitnessKind::BasisState(i) = counterexample.kind else {
                        panic!("basis witness expected")
                    };
                    assert!(i == 62 || i == 63, "only the two controlled columns witness");
                    hits += 1;
                }
                SimulationCheck::Inconclusive { runs } => assert_eq!(runs, r),
            }
        }
        let rate = hits as f64 / trials as f64;
        let half_width = 2.576 * (p * (1.0 - p) / trials as f64).sqrt();
        assert!(
            (rate - p).abs() <= half_width,
            "r={r}: rate {rate:.4} outside 99% CI around {p:.4} (+-{half_width:.4})"
        );
    }
    println!("ACCEPTANCE criterion 6 PASS: empirical detection rate within 99% CI of 1 - C(62,r)/C(64,r) for r in {{1,4,16}}");
}

#[test]
fn criterion_7_flow_contract() {
    // Zero proving budget after clean simulations: probably equivalent.
    let opts = CheckOptions { timeout: Some(std::time::Duration::ZERO), ..CheckOptions::default() };
    for circuit in [fig_g(), fig_g_alt()] {
        let verdict = check_flow(&circuit, &circuit, &opts).unwrap();
        assert!(matches!(verdict.outcome, Outcome::ProbablyEquivalent));
        assert_eq!(verdict.stats.sim_runs, 8);
    }
    let mut rng = Xoshiro256StarStar::seeded(0xF10);
    let random = random_circuit(&mut rng, 4, 20);
    let verdict = check_flow(&random, &random, &opts).unwrap();
    assert!(matches!(verdict.outcome, Outcome::ProbablyEquivalent));

    // Sanity for the reference check under the same contract.
    let verdict = check_reference(&fig_g(), &fig_g_alt(), &opts).unwrap();
    assert!(matches!(verdict.outcome, Outcome::ProbablyEquivalent));
    println!("ACCEPTANCE criterion 7 (library flow contract) PASS: zero-budget proving phase yields probably-equivalent; exit codes and JSON schema are covered by the CLI acceptance test");
}
