mod report;
mod study;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use ddeq::check::{check_flow, CheckOptions, Outcome, Strategy, Verdict};
use ddeq::circuit::Circuit;
use report::RunReport;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Exit codes of `check`: 0 equivalent (possibly up to global phase),
/// 1 not equivalent, 2 probably equivalent (timeout), 3 usage/parse/IO error.
const EXIT_NOT_EQUIVALENT: u8 = 1;
const EXIT_PROBABLY_EQUIVALENT: u8 = 2;
const EXIT_ERROR: u8 = 3;

#[derive(Parser)]
#[command(name = "ddeq", version, about = "Decision-diagram equivalence checking for quantum circuits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CheckFlags {
    /// Proving strategy: reference, naive, proportional or lookahead.
    #[arg(long, default_value = "proportional")]
    strategy: Strategy,
    /// Random basis-state simulations before the proving phase.
    #[arg(long, default_value_t = 16)]
    sims: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Proving-phase timeout in seconds.
    #[arg(long, default_value_t = 3600.0)]
    timeout: f64,
    /// Numeric identification tolerance.
    #[arg(long, default_value_t = ddeq::complex::DEFAULT_EPSILON)]
    tolerance: f64,
    /// Fidelity tolerance for counterexamples.
    #[arg(long = "fid-tolerance", default_value_t = ddeq::check::DEFAULT_FID_EPSILON)]
    fid_tolerance: f64,
    /// Emit a JSON report on stdout.
    #[arg(long)]
    json: bool,
    /// Null out wall-clock fields so reports are byte-reproducible.
    #[arg(long)]
    omit_timing: bool,
}

impl CheckFlags {
    fn options(&self) -> CheckOptions {
        CheckOptions {
            strategy: self.strategy,
            sims: self.sims,
            seed: self.seed,
            timeout: Some(std::time::Duration::from_secs_f64(self.timeout)),
            epsilon: self.tolerance,
            fid_epsilon: self.fid_tolerance,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check two circuits for functional equivalence.
    Check {
        left: PathBuf,
        right: PathBuf,
        #[command(flatten)]
        flags: CheckFlags,
    },
    /// Simulate a circuit on one computational basis state and print the
    /// non-zero output amplitudes.
    Sim {
        file: PathBuf,
        /// Basis-state index of the input.
        #[arg(long)]
        state: u64,
        #[arg(long)]
        json: bool,
    },
    /// Remove random gates from a circuit and write the result.
    Inject {
        file: PathBuf,
        /// Number of gates to remove.
        #[arg(long)]
        remove: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output path for the injected circuit.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the simulation-detection study over a directory of circuits.
    Study {
        dir: PathBuf,
        /// Error-injected instances per benchmark.
        #[arg(long, default_value_t = 100)]
        instances: usize,
        /// Gates removed per instance.
        #[arg(long, default_value_t = 3)]
        remove: usize,
        /// Simulation runs per instance.
        #[arg(long, default_value_t = 16)]
        sims: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Worker threads (one diagram package per instance).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        omit_timing: bool,
    },
}

fn load_circuit(path: &Path) -> Result<Circuit> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    match ddeq::qasm::parse(&text) {
        Ok(out) => {
            for warning in &out.warnings {
                eprintln!("{}: {}", path.display(), warning);
            }
            let mut circuit = out.circuit;
            circuit.name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            Ok(circuit)
        }
        Err(diags) => {
            for d in &diags {
                eprintln!("{}: {}", path.display(), d);
            }
            anyhow::bail!("failed to parse {}", path.display())
        }
    }
}

fn print_human_verdict(report: &RunReport, verdict: &Verdict) {
    println!(
        "benchmark: {} (n={}, |G|={}, |G'|={})",
        report.benchmark, report.n, report.size_left, report.size_right
    );
    match &verdict.outcome {
        Outcome::Equivalent => println!("verdict: equivalent"),
        Outcome::EquivalentUpToGlobalPhase(alpha) => {
            println!("verdict: equivalent up to global phase (alpha = {alpha:.9} rad)")
        }
        Outcome::ProbablyEquivalent => {
            println!("verdict: probably equivalent (proving phase hit the resource limit)")
        }
        Outcome::NotEquivalent(cx) => {
            println!("verdict: NOT equivalent");
            println!("counterexample input: {}", cx.input);
            println!("fidelity of outputs: {:.6}", cx.fidelity);
            let render = |label: &str, amps: &[(u64, ddeq::Complex64)]| {
                let shown: Vec<String> = amps
                    .iter()
                    .take(8)
                    .map(|(i, z)| format!("|{i}>: {:.6}{:+.6}i", z.re, z.im))
                    .collect();
                let suffix = if amps.len() > 8 { ", ..." } else { "" };
                println!("{label}: {}{}", shown.join(", "), suffix);
            };
            render("output of G ", &cx.output_left);
            render("output of G'", &cx.output_right);
        }
    }
    if let (Some(t_sim), Some(t_ec)) = (report.t_sim, report.t_ec) {
        println!("simulations: {} ({t_sim:.3} s wall)", report.num_sims);
        println!(
            "proving phase: {} strategy, {t_ec:.3} s wall, max nodes {}, avg nodes {:.2}",
            report.strategy, report.max_nodes, report.avg_nodes
        );
    } else {
        println!("simulations: {}", report.num_sims);
        println!(
            "proving phase: {} strategy, max nodes {}, avg nodes {:.2}",
            report.strategy, report.max_nodes, report.avg_nodes
        );
    }
}

fn cmd_check(left: &Path, right: &Path, flags: &CheckFlags) -> Result<u8> {
    let g = load_circuit(left)?;
    let g2 = load_circuit(right)?;
    let verdict = check_flow(&g, &g2, &flags.options())?;
    let benchmark = format!(
        "{} vs {}",
        left.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
        right.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
    );
    let report = RunReport::new(
        benchmark,
        g.qubits,
        g.len(),
        g2.len(),
        &verdict,
        flags.strategy,
        flags.seed,
        flags.omit_timing,
    );
    if flags.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        print_human_verdict(&report, &verdict);
    }
    Ok(match verdict.outcome {
        Outcome::Equivalent | Outcome::EquivalentUpToGlobalPhase(_) => 0,
        Outcome::NotEquivalent(_) => EXIT_NOT_EQUIVALENT,
        Outcome::ProbablyEquivalent => EXIT_PROBABLY_EQUIVALENT,
    })
}

fn cmd_sim(file: &Path, state: u64, json: bool) -> Result<u8> {
    let circuit = load_circuit(file)?;
    let mut pkg = ddeq::DdPackage::new();
    let out = pkg.simulate(&circuit, state)?;
    let (amps, truncated) = pkg.nonzero_amplitudes(out, circuit.qubits, 1 << 16);
    if json {
        let rows: Vec<report::AmplitudeReport> = amps
            .iter()
            .map(|&(index, z)| report::AmplitudeReport { index, re: z.re, im: z.im })
            .collect();
        println!("{}", serde_json::to_string_pretty(&rows)?);
    } else {
        for (index, z) in &amps {
            let bits: String = (0..circuit.qubits)
                .rev()
                .map(|b| if (index >> b) & 1 == 1 { '1' } else { '0' })
                .collect();
            if z.im.abs() < 1e-9 {
                println!("{bits}: {:.8}", z.re);
            } else {
                println!("{bits}: {:.8}{:+.8}i", z.re, z.im);
            }
        }
        if truncated {
            println!("... (output truncated)");
        }
    }
    Ok(0)
}

fn cmd_inject(file: &Path, remove: usize, seed: u64, out: &Path) -> Result<u8> {
    let circuit = load_circuit(file)?;
    let injected = circuit.inject_errors(remove, seed)?;
    let text = ddeq::qasm::emit(&injected)?;
    std::fs::write(out, text).with_context(|| format!("cannot write {}", out.display()))?;
    eprintln!("removed {remove} gate(s), wrote {}", out.display());
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_study(
    dir: &Path,
    instances: usize,
    remove: usize,
    sims: usize,
    seed: u64,
    jobs: usize,
    json: bool,
    omit_timing: bool,
) -> Result<u8> {
    let jobs = if jobs == 0 {
        std::thread::available_parallelism().map(|p| p.get()).unwrap_or(1)
    } else {
        jobs
    };
    let config = study::StudyConfig { instances, remove, sims, seed, jobs, omit_timing };
    let report = study::run_study(dir, &config)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        println!(
            "{:<24} {:>4} {:>6} {:>9} {:>9} {:>10} {:>10} {:>10}",
            "benchmark", "n", "|G|", "#inst", "avg#sims", "avg t_sim", "max t_sim", "p_success"
        );
        for row in &report.rows {
            let fmt_t = |t: Option<f64>| t.map(|v| format!("{v:.3}")).unwrap_or_else(|| "-".into());
            println!(
                "{:<24} {:>4} {:>6} {:>9} {:>9.2} {:>10} {:>10} {:>10.3}",
                row.benchmark,
                row.n,
                row.size,
                row.instances,
                row.avg_sims,
                fmt_t(row.avg_t_sim),
                fmt_t(row.max_t_sim),
                row.p_success
            );
        }
    }
    Ok(0)
}

fn run(cli: Cli) -> Result<u8> {
    match &cli.command {
        Command::Check { left, right, flags } => cmd_check(left, right, flags),
        Command::Sim { file, state, json } => cmd_sim(file, *state, *json),
        Command::Inject { file, remove, seed, out } => cmd_inject(file, *remove, *seed, out),
        Command::Study { dir, instances, remove, sims, seed, jobs, json, omit_timing } => {
            cmd_study(dir, *instances, *remove, *sims, *seed, *jobs, *json, *omit_timing)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
