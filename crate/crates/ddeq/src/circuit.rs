//! Gate-list circuit representation.
//!
//! Gates are stored in execution order. Qubit `0` is the least significant
//! basis-state bit, so an `n`-qubit basis state reads `|q_{n-1} ... q_1 q_0>`.

use crate::rng::Xoshiro256StarStar;
use num_complex::Complex64;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    Id,
    H,
    X,
    Y,
    Z,
    S,
    Sdg,
    T,
    Tdg,
    Rx,
    Ry,
    Rz,
    /// Diagonal phase gate `diag(1, e^{i lambda})` (QASM `u1`).
    Phase,
    U2,
    U3,
    Swap,
}

impl GateKind {
    pub fn param_count(self) -> usize {
        match self {
            GateKind::Rx | GateKind::Ry | GateKind::Rz | GateKind::Phase => 1,
            GateKind::U2 => 2,
            GateKind::U3 => 3,
            _ => 0,
        }
    }

    pub fn target_count(self) -> usize {
        match self {
            GateKind::Swap => 2,
            _ => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::Id => "id",
            GateKind::H => "h",
            GateKind::X => "x",
            GateKind::Y => "y",
            GateKind::Z => "z",
            GateKind::S => "s",
            GateKind::Sdg => "sdg",
            GateKind::T => "t",
            GateKind::Tdg => "tdg",
            GateKind::Rx => "rx",
            GateKind::Ry => "ry",
            GateKind::Rz => "rz",
            GateKind::Phase => "u1",
            GateKind::U2 => "u2",
            GateKind::U3 => "u3",
            GateKind::Swap => "swap",
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum CircuitError {
    #[error("qubit {qubit} out of range for {qubits}-qubit circuit")]
    QubitOutOfRange { qubit: usize, qubits: usize },
    #[error("qubit {0} used as both control and target")]
    OverlappingControlTarget(usize),
    #[error("duplicate qubit {0} in gate operands")]
    DuplicateOperand(usize),
    #[error("{kind} expects {expected} parameter(s), got {got}")]
    BadParamCount { kind: &'static str, expected: usize, got: usize },
    #[error("{kind} expects {expected} target(s), got {got}")]
    BadTargetCount { kind: &'static str, expected: usize, got: usize },
    #[error("cannot remove {requested} gates from a circuit with {available}")]
    TooFewGates { requested: usize, available: usize },
    #[error("circuits support at most {max} qubits, got {got}")]
    TooManyQubits { got: usize, max: usize },
}

/// One gate application: a library kind, real-angle parameters, target
/// qubit(s) and an arbitrary list of (positive) control qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub params: Vec<f64>,
    pub targets: Vec<usize>,
    pub controls: Vec<usize>,
}

impl Gate {
    pub fn new(kind: GateKind, params: Vec<f64>, targets: Vec<usize>, controls: Vec<usize>) -> Gate {
        Gate { kind, params, targets, controls }
    }

    /// The closed-form inverse. Self-inverse kinds pass through, phase-like
    /// kinds map onto their dagger partner, rotations negate their angle.
    /// Control lists are preserved.
    pub fn inverse(&self) -> Gate {
        let (kind, params) = match self.kind {
            GateKind::S => (GateKind::Sdg, vec![]),
            GateKind::Sdg => (GateKind::S, vec![]),
            GateKind::T => (GateKind::Tdg, vec![]),
            GateKind::Tdg => (GateKind::T, vec![]),
            GateKind::Rx | GateKind::Ry | GateKind::Rz | GateKind::Phase => {
                (self.kind, vec![-self.params[0]])
            }
            // u2(phi, lambda)^dag = u2(pi - lambda, pi - phi)
            GateKind::U2 => (GateKind::U2, vec![PI - self.params[1], PI - self.params[0]]),
            // u3(theta, phi, lambda)^dag = u3(-theta, -lambda, -phi)
            GateKind::U3 => (GateKind::U3, vec![-self.params[0], -self.params[2], -self.params[1]]),
            _ => (self.kind, self.params.clone()),
        };
        Gate { kind, params, targets: self.targets.clone(), controls: self.controls.clone() }
    }

    /// Row-major 2^k x 2^k unitary block of the uncontrolled gate, where
    /// `k = target_count()`. For two-target kinds, bit 0 of the block index
    /// belongs to `targets[0]`.
    pub fn block(&self) -> Vec<Complex64> {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let zero = c(0.0, 0.0);
        let one = c(1.0, 0.0);
        match self.kind {
            GateKind::Id => vec![one, zero, zero, one],
            GateKind::H => {
                let s = c(FRAC_1_SQRT_2, 0.0);
                vec![s, s, s, -s]
            }
            GateKind::X => vec![zero, one, one, zero],
            GateKind::Y => vec![zero, c(0.0, -1.0), c(0.0, 1.0), zero],
            GateKind::Z => vec![one, zero, zero, -one],
            GateKind::S => vec![one, zero, zero, c(0.0, 1.0)],
            GateKind::Sdg => vec![one, zero, zero, c(0.0, -1.0)],
            GateKind::T => vec![one, zero, zero, Complex64::from_polar(1.0, PI / 4.0)],
            GateKind::Tdg => vec![one, zero, zero, Complex64::from_polar(1.0, -PI / 4.0)],
            GateKind::Rx => {
                let t = self.params[0] / 2.0;
                vec![c(t.cos(), 0.0), c(0.0, -t.sin()), c(0.0, -t.sin()), c(t.cos(), 0.0)]
            }
            GateKind::Ry => {
                let t = self.params[0] / 2.0;
                vec![c(t.cos(), 0.0), c(-t.sin(), 0.0), c(t.sin(), 0.0), c(t.cos(), 0.0)]
            }
            GateKind::Rz => {
                let t = self.params[0] / 2.0;
                vec![Complex64::from_polar(1.0, -t), zero, zero, Complex64::from_polar(1.0, t)]
            }
            GateKind::Phase => {
                vec![one, zero, zero, Complex64::from_polar(1.0, self.params[0])]
            }
            GateKind::U2 => {
                let (phi, lambda) = (self.params[0], self.params[1]);
                let s = FRAC_1_SQRT_2;
                vec![
                    c(s, 0.0),
                    -Complex64::from_polar(s, lambda),
                    Complex64::from_polar(s, phi),
                    Complex64::from_polar(s, phi + lambda),
                ]
            }
            GateKind::U3 => {
                let (theta, phi, lambda) = (self.params[0], self.params[1], self.params[2]);
                let (ct, st) = ((theta / 2.0).cos(), (theta / 2.0).sin());
                vec![
                    c(ct, 0.0),
                    -Complex64::from_polar(st, lambda),
                    Complex64::from_polar(st, phi),
                    Complex64::from_polar(ct, phi + lambda),
                ]
            }
            GateKind::Swap => {
                let mut m = vec![zero; 16];
                // |t1 t0>: 00->00, 01->10, 10->01, 11->11
                m[0] = one;
                m[4 + 2] = one;
                m[2 * 4 + 1] = one;
                m[3 * 4 + 3] = one;
                m
            }
        }
    }

    pub fn validate(&self, qubits: usize) -> Result<(), CircuitError> {
        let expected_params = self.kind.param_count();
        if self.params.len() != expected_params {
            return Err(CircuitError::BadParamCount {
                kind: self.kind.name(),
                expected: expected_params,
                got: self.params.len(),
            });
        }
        let expected_targets = self.kind.target_count();
        if self.targets.len() != expected_targets {
            return Err(CircuitError::BadTargetCount {
                kind: self.kind.name(),
                expected: expected_targets,
                got: self.targets.len(),
            });
        }
        let mut seen = std::collections::HashSet::new();
        for &q in self.targets.iter().chain(self.controls.iter()) {
            if q >= qubits {
                return Err(CircuitError::QubitOutOfRange { qubit: q, qubits });
            }
            if !seen.insert(q) {
                if self.targets.contains(&q) && self.controls.contains(&q) {
                    return Err(CircuitError::OverlappingControlTarget(q));
                }
                return Err(CircuitError::DuplicateOperand(q));
            }
        }
        Ok(())
    }
}

/// An ordered gate list over a fixed number of qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    pub qubits: usize,
    pub gates: Vec<Gate>,
    pub name: String,
}

impl Circuit {
    pub fn new(qubits: usize) -> Circuit {
        Circuit { qubits, gates: Vec::new(), name: String::new() }
    }

    pub fn with_name(qubits: usize, name: impl Into<String>) -> Circuit {
        Circuit { qubits, gates: Vec::new(), name: name.into() }
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, gate: Gate) {
        self.gates.push(gate);
    }

    pub fn validate(&self) -> Result<(), CircuitError> {
        if self.qubits > crate::dd::MAX_QUBITS {
            return Err(CircuitError::TooManyQubits { got: self.qubits, max: crate::dd::MAX_QUBITS });
        }
        for gate in &self.gates {
            gate.validate(self.qubits)?;
        }
        Ok(())
    }

    /// The inverse circuit: gate order reversed, every gate inverted.
    pub fn invert(&self) -> Circuit {
        Circuit {
            qubits: self.qubits,
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
            name: if self.name.is_empty() { String::new() } else { format!("{}^-1", self.name) },
        }
    }

    /// Removes `count` gates at distinct positions drawn uniformly (without
    /// replacement) from the seeded generator. Deterministic per seed.
    pub fn inject_errors(&self, count: usize, seed: u64) -> Result<Circuit, CircuitError> {
        if count > self.gates.len() {
            return Err(CircuitError::TooFewGates { requested: count, available: self.gates.len() });
        }
        let mut rng = Xoshiro256StarStar::seeded(seed);
        let mut removed: Vec<u64> = rng.distinct_below(self.gates.len() as u64, count);
        removed.sort_unstable();
        let mut gates = Vec::with_capacity(self.gates.len() - count);
        let mut next = removed.iter().peekable();
        for (i, gate) in self.gates.iter().enumerate() {
            if next.peek() == Some(&&(i as u64)) {
                next.next();
                continue;
            }
            gates.push(gate.clone());
        }
        Ok(Circuit { qubits: self.qubits, gates, name: self.name.clone() })
    }

    // Builder helpers used throughout tests and fixtures.

    pub fn h(&mut self, q: usize) {
        self.push(Gate::new(GateKind::H, vec![], vec![q], vec![]));
    }

    pub fn x(&mut self, q: usize) {
        self.push(Gate::new(GateKind::X, vec![], vec![q], vec![]));
    }

    pub fn t(&mut self, q: usize) {
        self.push(Gate::new(GateKind::T, vec![], vec![q], vec![]));
    }

    pub fn tdg(&mut self, q: usize) {
        self.push(Gate::new(GateKind::Tdg, vec![], vec![q], vec![]));
    }

    pub fn cx(&mut self, control: usize, target: usize) {
        self.push(Gate::new(GateKind::X, vec![], vec![target], vec![control]));
    }

    pub fn ccx(&mut self, c1: usize, c2: usize, target: usize) {
        self.push(Gate::new(GateKind::X, vec![], vec![target], vec![c1, c2]));
    }
}

/// The three-qubit circuit used as the running worked example: H on q1,
/// CX(q1 -> q2), CCX(q1,q2 -> q0), CX(q2 -> q1).
pub fn example_circuit() -> Circuit {
    let mut c = Circuit::with_name(3, "example");
    c.h(1);
    c.cx(1, 2);
    c.ccx(1, 2, 0);
    c.cx(2, 1);
    c
}

/// The equivalent 16-gate realization of [`example_circuit`] over the
/// {H, T, T^dag, CX} gate set.
pub fn example_circuit_alt() -> Circuit {
    let mut c = Circuit::with_name(3, "example-alt");
    c.h(1); // g0
    c.cx(1, 2); // g1
    c.h(0); // g2
    c.cx(1, 0); // g3
    c.tdg(0); // g4
    c.cx(2, 0); // g5
    c.t(0); // g6
    c.cx(1, 0); // g7
    c.tdg(0); // g8
    c.t(1); // g9
    c.cx(2, 0); // g10
    c.cx(2, 1); // g11
    c.t(0); // g12
    c.h(0); // g13
    c.tdg(1); // g14
    c.t(2); // g15
    c
}
