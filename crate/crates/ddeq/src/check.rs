//! Equivalence checking of quantum circuits.
//!
//! Two routes are combined into one flow:
//!
//! * **Random-basis simulation.** Both circuits run on a handful of randomly
//!   chosen computational basis states; a single output pair with fidelity
//!   below one proves non-equivalence and is itself the counterexample.
//! * **Accumulation towards the identity.** Starting from the identity
//!   diagram, gates of the first circuit multiply in from the left and
//!   inverted gates of the second from the right. For equivalent circuits
//!   the accumulator keeps collapsing back towards the identity, so
//!   intermediate diagrams stay small when the gates interleave well. Three
//!   interleaving strategies are provided (naive alternation, proportional
//!   by gate-count ratio, and size look-ahead) next to the reference
//!   build-both-and-compare routine.
//!
//! A check runs on a single [`DdPackage`] instance and therefore on a single
//! thread; callers wanting parallelism run independent checks on independent
//! packages. All randomness is seeded.

use crate::circuit::{Circuit, CircuitError};
use crate::complex::DEFAULT_EPSILON;
use crate::dd::{DdError, DdPackage, Edge, IdentityCheck};
use crate::ops::OpsError;
use crate::rng::Xoshiro256StarStar;
use num_complex::Complex64;
use std::time::{Duration, Instant};

/// Fidelity tolerance: outputs with `F < 1 - DEFAULT_FID_EPSILON` witness
/// non-equivalence. Looser than the numeric epsilon because fidelity
/// accumulates error over the whole gate sequence.
pub const DEFAULT_FID_EPSILON: f64 = 1e-8;

/// Default number of random simulation runs before the proving routine.
pub const DEFAULT_SIMS: usize = 16;

/// Default hard timeout for the proving phase.
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(3600);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Build both diagrams fully and compare root edges.
    Reference,
    /// Alternate sides one-for-one, then apply leftovers.
    Naive,
    /// Interleave by the gate-count ratio.
    Proportional,
    /// Try both sides, keep whichever diagram is smaller.
    Lookahead,
}

impl Strategy {
    pub const ALL: [Strategy; 4] =
        [Strategy::Reference, Strategy::Naive, Strategy::Proportional, Strategy::Lookahead];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Reference => "reference",
            Strategy::Naive => "naive",
            Strategy::Proportional => "proportional",
            Strategy::Lookahead => "lookahead",
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "reference" => Ok(Strategy::Reference),
            "naive" => Ok(Strategy::Naive),
            "proportional" => Ok(Strategy::Proportional),
            "lookahead" | "look-ahead" => Ok(Strategy::Lookahead),
            other => Err(format!("unknown strategy `{other}`")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CheckOptions {
    pub strategy: Strategy,
    /// Number of random basis-state simulations before the proving phase.
    pub sims: usize,
    pub seed: u64,
    /// Deadline for the proving phase; `None` disables the limit.
    pub timeout: Option<Duration>,
    /// Numeric identification tolerance of the diagram package.
    pub epsilon: f64,
    /// Fidelity tolerance for counterexamples.
    pub fid_epsilon: f64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            strategy: Strategy::Proportional,
            sims: DEFAULT_SIMS,
            seed: 0,
            timeout: Some(DEFAULT_TIMEOUT),
            epsilon: DEFAULT_EPSILON,
            fid_epsilon: DEFAULT_FID_EPSILON,
        }
    }
}

/// Which circuit the next gate application comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// A gate of the first circuit, multiplied in from the left.
    Left,
    /// An inverted gate of the second circuit, multiplied in from the right.
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Application {
    pub side: Side,
    pub index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WitnessKind {
    /// Computational basis input `|i>`.
    BasisState(u64),
    /// `(|i> + |j>)/sqrt(2)`, witnessing a relative-phase difference that no
    /// single basis state can expose.
    RelativePhasePair(u64, u64),
}

/// A re-checkable proof of non-equivalence: the witness input, both output
/// states (non-zero amplitudes, ascending basis index) and their fidelity.
#[derive(Debug, Clone)]
pub struct Counterexample {
    pub kind: WitnessKind,
    pub input: String,
    pub output_left: Vec<(u64, Complex64)>,
    pub output_right: Vec<(u64, Complex64)>,
    pub outputs_truncated: bool,
    pub fidelity: f64,
}

#[derive(Debug, Clone)]
pub enum Outcome {
    Equivalent,
    /// Equivalent up to `U = e^{i alpha} U'` with `alpha` in `[0, 2pi)`.
    EquivalentUpToGlobalPhase(f64),
    NotEquivalent(Box<Counterexample>),
    /// The resource limit fired before the proving routine finished; every
    /// simulation that ran was inconclusive.
    ProbablyEquivalent,
}

impl Outcome {
    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Equivalent => "equivalent",
            Outcome::EquivalentUpToGlobalPhase(_) => "equivalent_up_to_global_phase",
            Outcome::NotEquivalent(_) => "not_equivalent",
            Outcome::ProbablyEquivalent => "probably_equivalent",
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunStats {
    pub sim_runs: usize,
    pub t_sim: Duration,
    pub t_ec: Duration,
    /// Node count of the accumulator after the initial identity and after
    /// every gate application (proving phase only).
    pub node_trace: Vec<usize>,
    pub applications: Vec<Application>,
}

impl RunStats {
    pub fn max_nodes(&self) -> usize {
        self.node_trace.iter().copied().max().unwrap_or(0)
    }

    pub fn avg_nodes(&self) -> f64 {
        if self.node_trace.is_empty() {
            0.0
        } else {
            self.node_trace.iter().sum::<usize>() as f64 / self.node_trace.len() as f64
        }
    }

    pub fn t_total(&self) -> Duration {
        self.t_sim + self.t_ec
    }
}

#[derive(Debug, Clone)]
pub struct Verdict {
    pub outcome: Outcome,
    pub stats: RunStats,
}

#[derive(Debug, thiserror::Error)]
pub enum CheckError {
    #[error("circuits act on different qubit counts ({left} vs {right})")]
    QubitCountMismatch { left: usize, right: usize },
    #[error("the identity-accumulation scheme requires a non-reference strategy")]
    BadStrategy,
    #[error("diagram is the identity (up to global phase); nothing to extract")]
    NotADifference,
    #[error("failed to find a verifying counterexample witness")]
    WitnessSearchFailed,
    #[error("diagonal analysis exceeded the class cap")]
    TooManyDiagonalClasses,
    #[error("basis-state simulation supports at most 63 qubits, circuit has {0}")]
    SimulationUnsupported(usize),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Dd(DdError),
}

impl From<DdError> for CheckError {
    fn from(e: DdError) -> Self {
        CheckError::Dd(e)
    }
}

impl From<OpsError> for CheckError {
    fn from(e: OpsError) -> Self {
        match e {
            OpsError::Dd(d) => CheckError::Dd(d),
            OpsError::Circuit(c) => CheckError::Circuit(c),
        }
    }
}

fn is_deadline(e: &CheckError) -> bool {
    matches!(e, CheckError::Dd(DdError::Deadline))
}

// ------------------------------------------------------------- schedules --

/// Naive interleaving: alternate sides starting with the first circuit until
/// one side runs dry, then append the leftovers.
pub fn schedule_naive(m: usize, m2: usize) -> Vec<Side> {
    let mut seq = Vec::with_capacity(m + m2);
    let common = m.min(m2);
    for _ in 0..common {
        seq.push(Side::Left);
        seq.push(Side::Right);
    }
    seq.extend(std::iter::repeat_n(Side::Left, m - common));
    seq.extend(std::iter::repeat_n(Side::Right, m2 - common));
    seq
}

/// Proportional interleaving: after the i-th left gate, emit right gates
/// until the global ratio `m2 : m` holds again (an integer error
/// accumulator, so burst sizes differ by at most one).
pub fn schedule_proportional(m: usize, m2: usize) -> Vec<Side> {
    let mut seq = Vec::with_capacity(m + m2);
    if m == 0 {
        seq.extend(std::iter::repeat_n(Side::Right, m2));
        return seq;
    }
    let mut emitted = 0usize;
    for i in 0..m {
        seq.push(Side::Left);
        let due = ((i + 1) as u128 * m2 as u128 / m as u128) as usize;
        seq.extend(std::iter::repeat_n(Side::Right, due - emitted));
        emitted = due;
    }
    seq
}

// ------------------------------------------------------- diagonal classes --

/// One equivalence class of diagonal entries `d_ii` of a matrix diagram:
/// entries sharing (to tolerance) the same value, with the smallest index as
/// representative.
#[derive(Debug, Clone, Copy)]
pub struct DiagonalClass {
    pub value: Complex64,
    pub count: u128,
    pub representative: u64,
}

const DIAGONAL_CLASS_CAP: usize = 4096;

/// Partitions the diagonal of a matrix diagram into value classes by walking
/// only diagonal successors. Shared subtrees (identity blocks in particular)
/// are visited once and summarized, so near-identity diagrams yield a
/// handful of classes regardless of qubit count.
pub fn diagonal_classes(pkg: &mut DdPackage, e: Edge, n: usize) -> Result<Vec<DiagonalClass>, CheckError> {
    if n > 127 {
        return Err(CheckError::SimulationUnsupported(n));
    }
    let mut memo: std::collections::HashMap<crate::dd::NodeId, Vec<(Complex64, u128, u64)>> =
        std::collections::HashMap::new();

    fn classes_of(
        pkg: &DdPackage,
        e: Edge,
        depth: usize,
        memo: &mut std::collections::HashMap<crate::dd::NodeId, Vec<(Complex64, u128, u64)>>,
        eps: f64,
    ) -> Result<Vec<(Complex64, u128, u64)>, CheckError> {
        let w = pkg.weight_value(e);
        if e.is_zero() {
            return Ok(vec![(Complex64::new(0.0, 0.0), 1u128 << depth, 0)]);
        }
        if e.is_terminal() {
            debug_assert_eq!(depth, 0);
            return Ok(vec![(w, 1, 0)]);
        }
        if let Some(rel) = memo.get(&e.node) {
            return Ok(rel.iter().map(|&(v, c, r)| (v * w, c, r)).collect());
        }
        let succ = pkg.successors(e.node);
        let (lo, hi) = (succ[0], succ[3]);
        let lo_classes = classes_of(pkg, lo, depth - 1, memo, eps)?;
        let hi_classes = classes_of(pkg, hi, depth - 1, memo, eps)?;
        let mut rel: Vec<(Complex64, u128, u64)> = Vec::new();
        let push = |value: Complex64, count: u128, rep: u64, rel: &mut Vec<(Complex64, u128, u64)>| {
            for entry in rel.iter_mut() {
                if (entry.0.re - value.re).abs() < eps && (entry.0.im - value.im).abs() < eps {
                    entry.1 += count;
                    entry.2 = entry.2.min(rep);
                    return;
                }
            }
            rel.push((value, count, rep));
        };
        for (v, c, r) in lo_classes {
            push(v, c, r, &mut rel);
        }
        let bit = 1u64 << (depth - 1);
        for (v, c, r) in hi_classes {
            push(v, c, r | bit, &mut rel);
        }
        if rel.len() > DIAGONAL_CLASS_CAP {
            return Err(CheckError::TooManyDiagonalClasses);
        }
        memo.insert(e.node, rel.clone());
        Ok(rel.iter().map(|&(v, c, r)| (v * w, c, r)).collect())
    }

    let eps = pkg.epsilon();
    let raw = classes_of(pkg, e, n, &mut memo, eps)?;
    let mut out: Vec<DiagonalClass> = raw
        .into_iter()
        .map(|(value, count, representative)| DiagonalClass { value, count, representative })
        .collect();
    out.sort_by_key(|c| c.representative);
    Ok(out)
}

/// Number of columns in which the circuit's system matrix deviates from the
/// identity by more than a phase. A gate with `c` controls on `n` qubits
/// affects exactly `2^(n-c)` columns.
pub fn affected_columns(circuit: &Circuit) -> Result<u128, CheckError> {
    let mut pkg = DdPackage::new();
    let u = pkg.build_matrix(circuit)?;
    let classes = diagonal_classes(&mut pkg, u, circuit.qubits)?;
    // A unitary column equals e^{i phi} |i> exactly when |d_ii| = 1.
    Ok(classes
        .iter()
        .filter(|c| 1.0 - c.value.norm_sqr() > DEFAULT_FID_EPSILON)
        .map(|c| c.count)
        .sum())
}

// ------------------------------------------------- counterexample search --

const WITNESS_CANDIDATE_CAP: usize = 64;

fn basis_label(i: u64, n: usize) -> String {
    let bits: String = (0..n).rev().map(|b| if (i >> b) & 1 == 1 { '1' } else { '0' }).collect();
    format!("|{i}> = |{bits}>")
}

fn gather_output(pkg: &DdPackage, e: Edge, n: usize) -> (Vec<(u64, Complex64)>, bool) {
    pkg.nonzero_amplitudes(e, n, 4096)
}

/// Extracts a verified counterexample from a non-identity difference diagram
/// `diff = U * U'^dag`.
///
/// Diagonal classes of `diff` provide candidate basis states (deviating
/// modulus first, then deviating phase). Each candidate is verified by
/// simulating both circuits forward; a candidate whose output fidelity drops
/// below `1 - fid_epsilon` becomes a [`WitnessKind::BasisState`]. If every
/// candidate verifies at fidelity one the difference is a pure relative
/// phase, which no basis state can witness; a two-state superposition over
/// indices with deviating overlap phases is returned instead.
pub fn extract_counterexample(
    pkg: &mut DdPackage,
    diff: Edge,
    left: &Circuit,
    right: &Circuit,
    opts: &CheckOptions,
) -> Result<Counterexample, CheckError> {
    let n = left.qubits;
    match pkg.is_identity(diff, n) {
        IdentityCheck::No => {}
        _ => return Err(CheckError::NotADifference),
    }
    if n > 63 {
        return Err(CheckError::SimulationUnsupported(n));
    }

    let classes = diagonal_classes(pkg, diff, n)?;
    let reference = classes
        .iter()
        .find(|c| c.representative == 0)
        .map(|c| c.value)
        .unwrap_or(Complex64::new(1.0, 0.0));

    let mut modulus: Vec<&DiagonalClass> =
        classes.iter().filter(|c| c.value.norm_sqr() < 1.0 - opts.fid_epsilon).collect();
    modulus.sort_by(|a, b| {
        a.value
            .norm_sqr()
            .partial_cmp(&b.value.norm_sqr())
            .unwrap()
            .then(a.representative.cmp(&b.representative))
    });
    let mut phase: Vec<&DiagonalClass> = classes
        .iter()
        .filter(|c| c.value.norm_sqr() >= 1.0 - opts.fid_epsilon)
        .collect();
    // Deviating phases first, the reference class last.
    phase.sort_by(|a, b| {
        let da = phase_distance(a.value, reference);
        let db = phase_distance(b.value, reference);
        db.partial_cmp(&da).unwrap().then(a.representative.cmp(&b.representative))
    });

    let mut candidates: Vec<u64> = Vec::new();
    for class in modulus.iter().chain(phase.iter()) {
        if candidates.len() >= WITNESS_CANDIDATE_CAP {
            break;
        }
        if !candidates.contains(&class.representative) {
            candidates.push(class.representative);
        }
    }

    let mut overlaps: Vec<(u64, Complex64)> = Vec::new();
    if let Some(cx) = try_candidates(pkg, &candidates, left, right, opts, &mut overlaps)? {
        return Ok(cx);
    }
    if let Some(cx) = try_phase_pair(pkg, &overlaps, left, right, opts)? {
        return Ok(cx);
    }

    // Structural candidates missed; widen the scan. Exhaustive for small
    // index spaces, seeded sampling otherwise.
    let extra: Vec<u64> = if n <= 12 {
        (0..(1u64 << n)).filter(|i| !candidates.contains(i)).collect()
    } else {
        let mut rng = Xoshiro256StarStar::seeded(opts.seed ^ 0x5EED_CE11);
        rng.distinct_below(1u64 << n, 256)
    };
    if let Some(cx) = try_candidates(pkg, &extra, left, right, opts, &mut overlaps)? {
        return Ok(cx);
    }
    if let Some(cx) = try_phase_pair(pkg, &overlaps, left, right, opts)? {
        return Ok(cx);
    }
    Err(CheckError::WitnessSearchFailed)
}

fn phase_distance(a: Complex64, b: Complex64) -> f64 {
    let mut d = (a.arg() - b.arg()).abs();
    if d > std::f64::consts::PI {
        d = std::f64::consts::TAU - d;
    }
    d
}

fn try_candidates(
    pkg: &mut DdPackage,
    candidates: &[u64],
    left: &Circuit,
    right: &Circuit,
    opts: &CheckOptions,
    overlaps: &mut Vec<(u64, Complex64)>,
) -> Result<Option<Counterexample>, CheckError> {
    let n = left.qubits;
    for &i in candidates {
        let out_l = pkg.simulate(left, i)?;
        let out_r = pkg.simulate(right, i)?;
        let overlap = pkg.inner_product(out_l, out_r)?;
        overlaps.push((i, overlap));
        let fidelity = overlap.norm_sqr().clamp(0.0, 1.0);
        if fidelity < 1.0 - opts.fid_epsilon {
            let (output_left, trunc_l) = gather_output(pkg, out_l, n);
            let (output_right, trunc_r) = gather_output(pkg, out_r, n);
            return Ok(Some(Counterexample {
                kind: WitnessKind::BasisState(i),
                input: basis_label(i, n),
                output_left,
                output_right,
                outputs_truncated: trunc_l || trunc_r,
                fidelity,
            }));
        }
    }
    Ok(None)
}

fn try_phase_pair(
    pkg: &mut DdPackage,
    overlaps: &[(u64, Complex64)],
    left: &Circuit,
    right: &Circuit,
    opts: &CheckOptions,
) -> Result<Option<Counterexample>, CheckError> {
    let n = left.qubits;
    // F((|i>+|j>)/sqrt2) = cos^2((arg_i - arg_j)/2) for unit overlaps, so a
    // witnessing pair needs an angle gap above 2*asin(sqrt(fid_epsilon)).
    let threshold = 2.0 * opts.fid_epsilon.sqrt().asin();
    for (a, &(i, si)) in overlaps.iter().enumerate() {
        for &(j, sj) in overlaps.iter().skip(a + 1) {
            if (si.norm() - 1.0).abs() > 1e-6 || (sj.norm() - 1.0).abs() > 1e-6 {
                continue;
            }
            if phase_distance(si, sj) <= threshold {
                continue;
            }
            let (i, j) = (i.min(j), i.max(j));
            let bi = pkg.basis_state(n, i)?;
            let bj = pkg.basis_state(n, j)?;
            let sum = pkg.add(bi, bj)?;
            let input_state = pkg.scale(sum, Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0))?;
            let out_l = pkg.apply_circuit(left, input_state)?;
            let out_r = pkg.apply_circuit(right, input_state)?;
            let fidelity = pkg.fidelity(out_l, out_r)?;
            if fidelity < 1.0 - opts.fid_epsilon {
                let (output_left, trunc_l) = gather_output(pkg, out_l, n);
                let (output_right, trunc_r) = gather_output(pkg, out_r, n);
                return Ok(Some(Counterexample {
                    kind: WitnessKind::RelativePhasePair(i, j),
                    input: format!("(|{i}> + |{j}>)/sqrt(2)"),
                    output_left,
                    output_right,
                    outputs_truncated: trunc_l || trunc_r,
                    fidelity,
                }));
            }
        }
    }
    Ok(None)
}

// ----------------------------------------------------------- the checks --

fn ensure_compatible(left: &Circuit, right: &Circuit) -> Result<(), CheckError> {
    left.validate()?;
    right.validate()?;
    if left.qubits != right.qubits {
        return Err(CheckError::QubitCountMismatch { left: left.qubits, right: right.qubits });
    }
    Ok(())
}

fn classify_root_pair(
    pkg: &mut DdPackage,
    u_left: Edge,
    u_right: Edge,
    left: &Circuit,
    right: &Circuit,
    opts: &CheckOptions,
) -> Result<Outcome, CheckError> {
    if u_left.node == u_right.node {
        if pkg.table().approx_eq(u_left.weight, u_right.weight) {
            return Ok(Outcome::Equivalent);
        }
        let ratio = pkg.weight_value(u_left) / pkg.weight_value(u_right);
        if (ratio.norm() - 1.0).abs() < pkg.epsilon() {
            let mut alpha = ratio.arg();
            if alpha < 0.0 {
                alpha += std::f64::consts::TAU;
            }
            return Ok(Outcome::EquivalentUpToGlobalPhase(alpha));
        }
    }
    let adj = pkg.adjoint(u_right)?;
    let diff = pkg.multiply(u_left, adj)?;
    let cx = extract_counterexample(pkg, diff, left, right, opts)?;
    Ok(Outcome::NotEquivalent(Box::new(cx)))
}

/// Builds both circuits' diagrams in full and compares root edges; on
/// mismatch a counterexample is extracted from `U * U'^dag`.
pub fn check_reference(left: &Circuit, right: &Circuit, opts: &CheckOptions) -> Result<Verdict, CheckError> {
    ensure_compatible(left, right)?;
    let started = Instant::now();
    let mut pkg = DdPackage::with_epsilon(opts.epsilon).map_err(DdError::from)?;
    pkg.set_deadline(opts.timeout.map(|t| started + t));
    let mut stats = RunStats::default();

    let result = (|| -> Result<Outcome, CheckError> {
        let mut trace = Vec::new();
        let u_left = pkg.build_matrix_traced(left, &mut trace)?;
        let u_right = pkg.build_matrix_traced(right, &mut trace)?;
        stats.node_trace = trace;
        classify_root_pair(&mut pkg, u_left, u_right, left, right, opts)
    })();
    stats.t_ec = started.elapsed();
    match result {
        Ok(outcome) => Ok(Verdict { outcome, stats }),
        Err(e) if is_deadline(&e) => Ok(Verdict { outcome: Outcome::ProbablyEquivalent, stats }),
        Err(e) => Err(e),
    }
}

struct SchemeEngine<'a> {
    pkg: DdPackage,
    left: &'a Circuit,
    right: &'a Circuit,
    acc: Edge,
    trace: Vec<usize>,
    applications: Vec<Application>,
}

impl<'a> SchemeEngine<'a> {
    fn new(left: &'a Circuit, right: &'a Circuit, opts: &CheckOptions, deadline: Option<Instant>) -> Result<Self, CheckError> {
        let mut pkg = DdPackage::with_epsilon(opts.epsilon).map_err(DdError::from)?;
        pkg.set_deadline(deadline);
        pkg.check_deadline_now()?;
        let acc = pkg.identity_dd(left.qubits);
        let trace = vec![pkg.node_count(acc)];
        Ok(SchemeEngine { pkg, left, right, acc, trace, applications: Vec::new() })
    }

    fn left_product(&mut self, index: usize) -> Result<Edge, CheckError> {
        let g = self.pkg.gate_to_dd(&self.left.gates[index], self.left.qubits)?;
        Ok(self.pkg.multiply(g, self.acc)?)
    }

    fn right_product(&mut self, index: usize) -> Result<Edge, CheckError> {
        let g = self.pkg.gate_to_dd(&self.right.gates[index], self.right.qubits)?;
        let inv = self.pkg.adjoint(g)?;
        Ok(self.pkg.multiply(self.acc, inv)?)
    }

    fn commit(&mut self, side: Side, index: usize, product: Edge) {
        self.acc = product;
        self.applications.push(Application { side, index });
        self.trace.push(self.pkg.node_count(self.acc));
        let root = self.acc;
        self.pkg.maybe_gc(&[root]);
    }

    fn run_static(&mut self, schedule: &[Side]) -> Result<(), CheckError> {
        let (mut i, mut j) = (0usize, 0usize);
        for &side in schedule {
            match side {
                Side::Left => {
                    let p = self.left_product(i)?;
                    self.commit(Side::Left, i, p);
                    i += 1;
                }
                Side::Right => {
                    let p = self.right_product(j)?;
                    self.commit(Side::Right, j, p);
                    j += 1;
                }
            }
        }
        Ok(())
    }

    /// One look-ahead step: evaluate both alternatives, keep the smaller
    /// diagram, release the other. Ties prefer the left side.
    fn run_lookahead(&mut self) -> Result<(), CheckError> {
        let (m, m2) = (self.left.len(), self.right.len());
        let (mut i, mut j) = (0usize, 0usize);
        while i < m && j < m2 {
            let left_product = self.left_product(i)?;
            let left_count = self.pkg.node_count(left_product);
            let right_product = self.right_product(j)?;
            let right_count = self.pkg.node_count(right_product);
            if left_count <= right_count {
                self.commit(Side::Left, i, left_product);
                i += 1;
            } else {
                self.commit(Side::Right, j, right_product);
                j += 1;
            }
            // Drop the discarded alternative right away.
            let root = self.acc;
            self.pkg.gc(&[root]);
        }
        while i < m {
            let p = self.left_product(i)?;
            self.commit(Side::Left, i, p);
            i += 1;
        }
        while j < m2 {
            let p = self.right_product(j)?;
            self.commit(Side::Right, j, p);
            j += 1;
        }
        Ok(())
    }
}

/// The identity-accumulation scheme: maintains `E`, initially the identity,
/// with left applications `E <- U_j E` (ascending `j`) and right
/// applications `E <- E U'_l^dag` (ascending `l`), scheduled per strategy.
/// The final accumulator equals `U * U'^dag`, so its classification decides
/// equivalence and, on mismatch, directly provides the difference diagram
/// for counterexample extraction.
pub fn check_g_i_g(
    left: &Circuit,
    right: &Circuit,
    strategy: Strategy,
    opts: &CheckOptions,
) -> Result<Verdict, CheckError> {
    ensure_compatible(left, right)?;
    if strategy == Strategy::Reference {
        return Err(CheckError::BadStrategy);
    }
    let started = Instant::now();
    let deadline = opts.timeout.map(|t| started + t);
    scheme_with_deadline(left, right, strategy, opts, deadline, started)
}

fn scheme_with_deadline(
    left: &Circuit,
    right: &Circuit,
    strategy: Strategy,
    opts: &CheckOptions,
    deadline: Option<Instant>,
    started: Instant,
) -> Result<Verdict, CheckError> {
    let mut engine = match SchemeEngine::new(left, right, opts, deadline) {
        Ok(e) => e,
        Err(e) if is_deadline(&e) => {
            return Ok(Verdict {
                outcome: Outcome::ProbablyEquivalent,
                stats: RunStats { t_ec: started.elapsed(), ..RunStats::default() },
            })
        }
        Err(e) => return Err(e),
    };
    let run = match strategy {
        Strategy::Naive => {
            let schedule = schedule_naive(left.len(), right.len());
            engine.run_static(&schedule)
        }
        Strategy::Proportional => {
            let schedule = schedule_proportional(left.len(), right.len());
            engine.run_static(&schedule)
        }
        Strategy::Lookahead => engine.run_lookahead(),
        Strategy::Reference => unreachable!("rejected above"),
    };
    let mut stats = RunStats {
        node_trace: std::mem::take(&mut engine.trace),
        applications: std::mem::take(&mut engine.applications),
        ..RunStats::default()
    };
    let outcome = match run {
        Err(e) if is_deadline(&e) => Outcome::ProbablyEquivalent,
        Err(e) => return Err(e),
        Ok(()) => {
            let n = left.qubits;
            let acc = engine.acc;
            match engine.pkg.is_identity(acc, n) {
                IdentityCheck::Exact => Outcome::Equivalent,
                IdentityCheck::GlobalPhase(alpha) => Outcome::EquivalentUpToGlobalPhase(alpha),
                IdentityCheck::No => {
                    match extract_counterexample(&mut engine.pkg, acc, left, right, opts) {
                        Ok(cx) => Outcome::NotEquivalent(Box::new(cx)),
                        Err(e) if is_deadline(&e) => Outcome::ProbablyEquivalent,
                        Err(e) => return Err(e),
                    }
                }
            }
        }
    };
    stats.t_ec = started.elapsed();
    Ok(Verdict { outcome, stats })
}

/// Result of the simulation-only check.
#[derive(Debug, Clone)]
pub enum SimulationCheck {
    NotEquivalent { counterexample: Box<Counterexample>, runs: usize },
    /// No witness among the performed runs; equivalence remains open.
    Inconclusive { runs: usize },
}

/// Runs both circuits on up to `opts.sims` distinct random basis states
/// (drawn without replacement, seeded). The first output pair with fidelity
/// below `1 - fid_epsilon` yields a counterexample.
pub fn check_simulation(
    left: &Circuit,
    right: &Circuit,
    opts: &CheckOptions,
) -> Result<SimulationCheck, CheckError> {
    ensure_compatible(left, right)?;
    let n = left.qubits;
    if n > 63 {
        return Err(CheckError::SimulationUnsupported(n));
    }
    let domain = 1u64 << n;
    let runs_wanted = (opts.sims as u64).min(domain) as usize;
    let mut rng = Xoshiro256StarStar::seeded(opts.seed);
    let indices = rng.distinct_below(domain, runs_wanted);

    let mut pkg = DdPackage::with_epsilon(opts.epsilon).map_err(DdError::from)?;
    for (run, &index) in indices.iter().enumerate() {
        let out_l = pkg.simulate(left, index)?;
        let out_r = pkg.simulate(right, index)?;
        let fidelity = pkg.fidelity(out_l, out_r)?;
        if fidelity < 1.0 - opts.fid_epsilon {
            let (output_left, trunc_l) = gather_output(&pkg, out_l, n);
            let (output_right, trunc_r) = gather_output(&pkg, out_r, n);
            let counterexample = Counterexample {
                kind: WitnessKind::BasisState(index),
                input: basis_label(index, n),
                output_left,
                output_right,
                outputs_truncated: trunc_l || trunc_r,
                fidelity,
            };
            return Ok(SimulationCheck::NotEquivalent {
                counterexample: Box::new(counterexample),
                runs: run + 1,
            });
        }
        pkg.gc(&[]);
    }
    Ok(SimulationCheck::Inconclusive { runs: runs_wanted })
}

/// The combined flow: up to `opts.sims` random simulations for fast
/// non-equivalence detection, then the configured proving routine under the
/// timeout. A timeout after clean simulations yields
/// [`Outcome::ProbablyEquivalent`].
pub fn check_flow(left: &Circuit, right: &Circuit, opts: &CheckOptions) -> Result<Verdict, CheckError> {
    ensure_compatible(left, right)?;
    let sim_started = Instant::now();
    let mut sim_runs = 0usize;
    if opts.sims > 0 && left.qubits <= 63 {
        match check_simulation(left, right, opts)? {
            SimulationCheck::NotEquivalent { counterexample, runs } => {
                return Ok(Verdict {
                    outcome: Outcome::NotEquivalent(counterexample),
                    stats: RunStats {
                        sim_runs: runs,
                        t_sim: sim_started.elapsed(),
                        ..RunStats::default()
                    },
                });
            }
            SimulationCheck::Inconclusive { runs } => sim_runs = runs,
        }
    }
    let t_sim = sim_started.elapsed();

    let ec_started = Instant::now();
    let deadline = opts.timeout.map(|t| ec_started + t);
    let mut verdict = match opts.strategy {
        Strategy::Reference => {
            let mut ref_opts = opts.clone();
            ref_opts.timeout = opts.timeout;
            check_reference(left, right, &ref_opts)?
        }
        strategy => scheme_with_deadline(left, right, strategy, opts, deadline, ec_started)?,
    };
    verdict.stats.sim_runs = sim_runs;
    verdict.stats.t_sim = t_sim;
    verdict.stats.t_ec = ec_started.elapsed();
    Ok(verdict)
}
