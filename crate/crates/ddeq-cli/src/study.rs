//! Desk-scale study runner: per benchmark, generate error-injected instances
//! and measure how often simulation alone detects the non-equivalence.

use crate::report::{StudyReport, StudyRow};
use anyhow::{Context, Result};
use ddeq::check::{check_simulation, CheckOptions, SimulationCheck};
use ddeq::circuit::Circuit;
use ddeq::rng::SplitMix64;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

pub struct StudyConfig {
    pub instances: usize,
    pub remove: usize,
    pub sims: usize,
    pub seed: u64,
    pub jobs: usize,
    pub omit_timing: bool,
}

struct InstanceResult {
    detected: bool,
    runs: usize,
    elapsed: Duration,
}

fn fnv1a(text: &str) -> u64 {
    let mut hash = 0xCBF29CE484222325u64;
    for b in text.as_bytes() {
        hash ^= *b as u64;
        hash = hash.wrapping_mul(0x100000001B3);
    }
    hash
}

/// Seeds are derived from (master seed, benchmark name, instance index) so a
/// study is reproducible end-to-end regardless of thread scheduling.
fn instance_seeds(master: u64, benchmark: &str, instance: usize) -> (u64, u64) {
    let mut sm = SplitMix64(master ^ fnv1a(benchmark) ^ (instance as u64).wrapping_mul(0x9E3779B97F4A7C15));
    (sm.next_u64(), sm.next_u64())
}

fn run_instance(
    circuit: &Circuit,
    benchmark: &str,
    instance: usize,
    config: &StudyConfig,
) -> Result<InstanceResult> {
    let (inject_seed, sim_seed) = instance_seeds(config.seed, benchmark, instance);
    let injected = circuit.inject_errors(config.remove, inject_seed)?;
    let opts = CheckOptions { sims: config.sims, seed: sim_seed, ..CheckOptions::default() };
    let started = Instant::now();
    let outcome = check_simulation(circuit, &injected, &opts)?;
    let elapsed = started.elapsed();
    Ok(match outcome {
        SimulationCheck::NotEquivalent { runs, .. } => InstanceResult { detected: true, runs, elapsed },
        SimulationCheck::Inconclusive { runs } => InstanceResult { detected: false, runs, elapsed },
    })
}

fn study_benchmark(name: &str, circuit: &Circuit, config: &StudyConfig) -> Result<StudyRow> {
    let mut results: Vec<Option<InstanceResult>> = Vec::with_capacity(config.instances);
    results.resize_with(config.instances, || None);

    let next = std::sync::atomic::AtomicUsize::new(0);
    let slots = std::sync::Mutex::new(&mut results);
    std::thread::scope(|scope| -> Result<()> {
        let workers = config.jobs.max(1).min(config.instances.max(1));
        let mut handles = Vec::new();
        for _ in 0..workers {
            handles.push(scope.spawn(|| -> Result<()> {
                loop {
                    let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                    if i >= config.instances {
                        return Ok(());
                    }
                    // One diagram package per instance, confined to this thread.
                    let result = run_instance(circuit, name, i, config)?;
                    slots.lock().unwrap()[i] = Some(result);
                }
            }));
        }
        for h in handles {
            h.join().expect("worker panicked")?;
        }
        Ok(())
    })?;

    let results: Vec<InstanceResult> =
        results.into_iter().map(|r| r.expect("all instances ran")).collect();
    let detected = results.iter().filter(|r| r.detected).count();
    let total_runs: usize = results.iter().map(|r| r.runs).sum();
    let total_time: Duration = results.iter().map(|r| r.elapsed).sum();
    let max_time = results.iter().map(|r| r.elapsed).max().unwrap_or(Duration::ZERO);
    let count = results.len().max(1);
    let ms = |d: Duration| (d.as_secs_f64() * 1000.0).round() / 1000.0;
    Ok(StudyRow {
        benchmark: name.to_string(),
        n: circuit.qubits,
        size: circuit.len(),
        removed: config.remove,
        instances: results.len(),
        avg_sims: total_runs as f64 / count as f64,
        avg_t_sim: if config.omit_timing { None } else { Some(ms(total_time / count as u32)) },
        max_t_sim: if config.omit_timing { None } else { Some(ms(max_time)) },
        p_success: detected as f64 / count as f64,
    })
}

fn load_circuit(path: &Path) -> Result<Circuit> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    match ddeq::qasm::parse(&text) {
        Ok(out) => {
            let mut circuit = out.circuit;
            circuit.name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            Ok(circuit)
        }
        Err(diags) => {
            let rendered: Vec<String> = diags.iter().map(|d| d.to_string()).collect();
            anyhow::bail!("{}: {}", path.display(), rendered.join("; "))
        }
    }
}

/// Runs the study over every `.qasm` file in `dir`. Files that fail to parse
/// are reported on stderr and skipped; the study continues.
pub fn run_study(dir: &Path, config: &StudyConfig) -> Result<StudyReport> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("cannot read directory {}", dir.display()))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().map(|e| e == "qasm").unwrap_or(false))
        .collect();
    files.sort();
    if files.is_empty() {
        anyhow::bail!("no .qasm files in {}", dir.display());
    }
    let mut rows = Vec::new();
    for path in &files {
        let circuit = match load_circuit(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("skipping benchmark: {e:#}");
                continue;
            }
        };
        if config.remove > circuit.len() {
            eprintln!(
                "skipping {}: cannot remove {} gates from {}",
                path.display(),
                config.remove,
                circuit.len()
            );
            continue;
        }
        let name = circuit.name.clone();
        rows.push(study_benchmark(&name, &circuit, config)?);
    }
    Ok(StudyReport { seed: config.seed, sims_per_instance: config.sims, rows })
}
