//! CLI half of the flow-contract acceptance criterion: exit codes, JSON
//! schema validation, and byte-identical reports for identical inputs and
//! seeds.

mod schema;

use ddeq::circuit::{example_circuit, example_circuit_alt, Gate, GateKind};
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ddeq"))
}

fn write_qasm(dir: &Path, name: &str, circuit: &ddeq::Circuit) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, ddeq::qasm::emit(circuit).unwrap()).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

#[test]
fn criterion_7_cli_contract() {
    let dir = tempfile::tempdir().unwrap();
    let g = write_qasm(dir.path(), "g.qasm", &example_circuit());
    let gp = write_qasm(dir.path(), "gp.qasm", &example_circuit_alt());
    let bad = {
        let mut c = example_circuit_alt();
        c.gates.pop();
        write_qasm(dir.path(), "bad.qasm", &c)
    };
    let phased = {
        let mut c = example_circuit_alt();
        c.push(Gate::new(GateKind::Rz, vec![-1.0], vec![0], vec![]));
        c.push(Gate::new(GateKind::Phase, vec![1.0], vec![0], vec![]));
        write_qasm(dir.path(), "phased.qasm", &c)
    };
    let schema_text =
        std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../docs/report-schema.json"))
            .unwrap();
    let schema: serde_json::Value = serde_json::from_str(&schema_text).unwrap();

    let validate = |raw: &str| {
        let value: serde_json::Value = serde_json::from_str(raw).expect("valid JSON");
        schema::validate(&schema, &value).unwrap_or_else(|e| panic!("schema violation: {e}\n{raw}"));
        value
    };

    // Equivalent pair: exit 0, schema-valid report, byte-identical reruns.
    let args = ["check", g.to_str().unwrap(), gp.to_str().unwrap(), "--json", "--omit-timing", "--seed", "7"];
    let first = run(&args);
    assert_eq!(first.status.code(), Some(0));
    let report = validate(&stdout(&first));
    assert_eq!(report["verdict"], "equivalent");
    assert_eq!(report["num_sims"], 8);
    assert_eq!(report["t_sim"], serde_json::Value::Null);
    let second = run(&args);
    assert_eq!(first.stdout, second.stdout, "identical inputs and seed must give byte-identical reports");

    // Non-equivalent pair: exit 1, counterexample present and in range.
    let args = ["check", g.to_str().unwrap(), bad.to_str().unwrap(), "--json", "--omit-timing"];
    let out = run(&args);
    assert_eq!(out.status.code(), Some(1));
    let report = validate(&stdout(&out));
    assert_eq!(report["verdict"], "not_equivalent");
    let cx = &report["counterexample"];
    assert_eq!(cx["kind"], "basis_state");
    let fidelity = cx["fidelity"].as_f64().unwrap();
    assert!((fidelity - 0.8535533905932737).abs() < 1e-3);
    let rerun = run(&args);
    assert_eq!(out.stdout, rerun.stdout);

    // Global phase: still exit 0, verdict carries the angle.
    let out = run(&["check", gp.to_str().unwrap(), phased.to_str().unwrap(), "--json", "--omit-timing"]);
    assert_eq!(out.status.code(), Some(0));
    let report = validate(&stdout(&out));
    assert_eq!(report["verdict"], "equivalent_up_to_global_phase");
    assert!(report["global_phase"].as_f64().is_some());

    // Forced timeout of the proving phase: exit 2, probably equivalent.
    let out = run(&[
        "check",
        g.to_str().unwrap(),
        gp.to_str().unwrap(),
        "--json",
        "--omit-timing",
        "--timeout",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let report = validate(&stdout(&out));
    assert_eq!(report["verdict"], "probably_equivalent");

    // Self-check through the reference routine without simulations: exit 0.
    let out = run(&["check", g.to_str().unwrap(), g.to_str().unwrap(), "--sims", "0", "--strategy", "reference"]);
    assert_eq!(out.status.code(), Some(0));

    // Parse errors and usage errors land above 2.
    let broken = dir.path().join("broken.qasm");
    std::fs::write(&broken, "OPENQASM 2.0; qreg q[1]; warp q[0];").unwrap();
    let out = run(&["check", g.to_str().unwrap(), broken.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unsupported gate"));

    let out = run(&["check", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(3));

    println!("ACCEPTANCE criterion 7 (CLI contract) PASS: exit codes 0/1/2/3, schema-valid and byte-identical JSON reports");
}
