//! JSON report shapes. Field order is fixed by struct order and every field
//! is always present, so reports for identical inputs and seeds are
//! byte-identical (timings can be nulled via `--omit-timing`).

use ddeq::check::{Counterexample, Outcome, RunStats, Strategy, Verdict, WitnessKind};
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct AmplitudeReport {
    pub index: u64,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Serialize)]
pub struct CounterexampleReport {
    pub kind: &'static str,
    pub indices: Vec<u64>,
    pub input: String,
    pub fidelity: f64,
    pub output_left: Vec<AmplitudeReport>,
    pub output_right: Vec<AmplitudeReport>,
    pub outputs_truncated: bool,
}

impl CounterexampleReport {
    pub fn from_counterexample(cx: &Counterexample) -> Self {
        let (kind, indices) = match cx.kind {
            WitnessKind::BasisState(i) => ("basis_state", vec![i]),
            WitnessKind::RelativePhasePair(i, j) => ("relative_phase_pair", vec![i, j]),
        };
        let amps = |v: &Vec<(u64, ddeq::Complex64)>| {
            v.iter()
                .map(|&(index, z)| AmplitudeReport { index, re: z.re, im: z.im })
                .collect()
        };
        CounterexampleReport {
            kind,
            indices,
            input: cx.input.clone(),
            fidelity: cx.fidelity,
            output_left: amps(&cx.output_left),
            output_right: amps(&cx.output_right),
            outputs_truncated: cx.outputs_truncated,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub benchmark: String,
    pub n: usize,
    pub size_left: usize,
    pub size_right: usize,
    pub verdict: &'static str,
    pub global_phase: Option<f64>,
    pub counterexample: Option<CounterexampleReport>,
    pub num_sims: usize,
    pub t_sim: Option<f64>,
    pub t_ec: Option<f64>,
    pub t_total: Option<f64>,
    pub max_nodes: usize,
    pub avg_nodes: f64,
    pub strategy: &'static str,
    pub seed: u64,
}

fn seconds(stats: &RunStats, omit: bool) -> (Option<f64>, Option<f64>, Option<f64>) {
    if omit {
        (None, None, None)
    } else {
        // millisecond resolution, wall clock
        let ms = |d: std::time::Duration| (d.as_secs_f64() * 1000.0).round() / 1000.0;
        (Some(ms(stats.t_sim)), Some(ms(stats.t_ec)), Some(ms(stats.t_total())))
    }
}

impl RunReport {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        benchmark: String,
        n: usize,
        size_left: usize,
        size_right: usize,
        verdict: &Verdict,
        strategy: Strategy,
        seed: u64,
        omit_timing: bool,
    ) -> Self {
        let (t_sim, t_ec, t_total) = seconds(&verdict.stats, omit_timing);
        RunReport {
            benchmark,
            n,
            size_left,
            size_right,
            verdict: verdict.outcome.label(),
            global_phase: match verdict.outcome {
                Outcome::EquivalentUpToGlobalPhase(alpha) => Some(alpha),
                _ => None,
            },
            counterexample: match &verdict.outcome {
                Outcome::NotEquivalent(cx) => Some(CounterexampleReport::from_counterexample(cx)),
                _ => None,
            },
            num_sims: verdict.stats.sim_runs,
            t_sim,
            t_ec,
            t_total,
            max_nodes: verdict.stats.max_nodes(),
            avg_nodes: verdict.stats.avg_nodes(),
            strategy: strategy.name(),
            seed,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct StudyRow {
    pub benchmark: String,
    pub n: usize,
    pub size: usize,
    pub removed: usize,
    pub instances: usize,
    pub avg_sims: f64,
    pub avg_t_sim: Option<f64>,
    pub max_t_sim: Option<f64>,
    pub p_success: f64,
}

#[derive(Debug, Serialize)]
pub struct StudyReport {
    pub seed: u64,
    pub sims_per_instance: usize,
    pub rows: Vec<StudyRow>,
}
