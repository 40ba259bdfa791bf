//! Shared test support: an independent dense-matrix oracle and random
//! circuit generation.
//!
//! The oracle computes gate blocks and system matrices from scratch (its own
//! gate tables, its own control embedding, plain dense products) so that it
//! shares no code with the diagram package it is checking.

#![allow(dead_code)]

use ddeq::circuit::{Circuit, Gate, GateKind};
use ddeq::rng::Xoshiro256StarStar;
use ddeq::Complex64;

pub type Dense = Vec<Complex64>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// 2^k x 2^k block of the uncontrolled gate, written out independently of
/// the library implementation.
pub fn oracle_block(gate: &Gate) -> Dense {
    use std::f64::consts::{FRAC_1_SQRT_2 as S, PI};
    let p = |i: usize| gate.params[i];
    match gate.kind {
        GateKind::Id => vec![c(1., 0.), c(0., 0.), c(0., 0.), c(1., 0.)],
        GateKind::H => vec![c(S, 0.), c(S, 0.), c(S, 0.), c(-S, 0.)],
        GateKind::X => vec![c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)],
        GateKind::Y => vec![c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)],
        GateKind::Z => vec![c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)],
        GateKind::S => vec![c(1., 0.), c(0., 0.), c(0., 0.), c(0., 1.)],
        GateKind::Sdg => vec![c(1., 0.), c(0., 0.), c(0., 0.), c(0., -1.)],
        GateKind::T => vec![c(1., 0.), c(0., 0.), c(0., 0.), c((PI / 4.).cos(), (PI / 4.).sin())],
        GateKind::Tdg => vec![c(1., 0.), c(0., 0.), c(0., 0.), c((PI / 4.).cos(), -(PI / 4.).sin())],
        GateKind::Rx => {
            let h = p(0) / 2.;
            vec![c(h.cos(), 0.), c(0., -h.sin()), c(0., -h.sin()), c(h.cos(), 0.)]
        }
        GateKind::Ry => {
            let h = p(0) / 2.;
            vec![c(h.cos(), 0.), c(-h.sin(), 0.), c(h.sin(), 0.), c(h.cos(), 0.)]
        }
        GateKind::Rz => {
            let h = p(0) / 2.;
            vec![c(h.cos(), -h.sin()), c(0., 0.), c(0., 0.), c(h.cos(), h.sin())]
        }
        GateKind::Phase => vec![c(1., 0.), c(0., 0.), c(0., 0.), c(p(0).cos(), p(0).sin())],
        GateKind::U2 => {
            let (phi, lam) = (p(0), p(1));
            vec![
                c(S, 0.),
                c(-S * lam.cos(), -S * lam.sin()),
                c(S * phi.cos(), S * phi.sin()),
                c(S * (phi + lam).cos(), S * (phi + lam).sin()),
            ]
        }
        GateKind::U3 => {
            let (th, phi, lam) = (p(0), p(1), p(2));
            let (ct, st) = ((th / 2.).cos(), (th / 2.).sin());
            vec![
                c(ct, 0.),
                c(-st * lam.cos(), -st * lam.sin()),
                c(st * phi.cos(), st * phi.sin()),
                c(ct * (phi + lam).cos(), ct * (phi + lam).sin()),
            ]
        }
        GateKind::Swap => {
            let mut m = vec![c(0., 0.); 16];
            for (row, col) in [(0usize, 0usize), (1, 2), (2, 1), (3, 3)] {
                m[row * 4 + col] = c(1., 0.);
            }
            m
        }
    }
}

/// Dense 2^n x 2^n system matrix of one gate, built column by column.
pub fn oracle_gate_matrix(n: usize, gate: &Gate) -> Dense {
    let dim = 1usize << n;
    let block = oracle_block(gate);
    let k = gate.targets.len();
    let bdim = 1usize << k;
    let mut m = vec![c(0., 0.); dim * dim];
    for col in 0..dim {
        if gate.controls.iter().any(|&ctl| (col >> ctl) & 1 == 0) {
            m[col * dim + col] = c(1., 0.);
            continue;
        }
        let mut bcol = 0usize;
        for (bit, &t) in gate.targets.iter().enumerate() {
            bcol |= ((col >> t) & 1) << bit;
        }
        for brow in 0..bdim {
            let entry = block[brow * bdim + bcol];
            if entry.norm_sqr() == 0.0 {
                continue;
            }
            let mut row = col;
            for (bit, &t) in gate.targets.iter().enumerate() {
                row = (row & !(1 << t)) | (((brow >> bit) & 1) << t);
            }
            m[row * dim + col] += entry;
        }
    }
    m
}

pub fn dense_mul(a: &Dense, b: &Dense, dim: usize) -> Dense {
    let mut out = vec![c(0., 0.); dim * dim];
    for row in 0..dim {
        for k in 0..dim {
            let av = a[row * dim + k];
            if av.norm_sqr() == 0.0 {
                continue;
            }
            for col in 0..dim {
                out[row * dim + col] += av * b[k * dim + col];
            }
        }
    }
    out
}

/// Dense system matrix of the whole circuit: `U = U_{m-1} ... U_0`.
pub fn oracle_circuit_matrix(circuit: &Circuit) -> Dense {
    let dim = 1usize << circuit.qubits;
    let mut u = vec![c(0., 0.); dim * dim];
    for i in 0..dim {
        u[i * dim + i] = c(1., 0.);
    }
    for gate in &circuit.gates {
        let g = oracle_gate_matrix(circuit.qubits, gate);
        u = dense_mul(&g, &u, dim);
    }
    u
}

pub fn oracle_column(u: &Dense, dim: usize, col: usize) -> Vec<Complex64> {
    (0..dim).map(|row| u[row * dim + col]).collect()
}

pub fn max_entry_delta(a: &Dense, b: &Dense) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// True when `a = e^{i phi} b` entrywise within `eps`.
pub fn equal_up_to_global_phase(a: &Dense, b: &Dense, eps: f64) -> bool {
    assert_eq!(a.len(), b.len());
    let mut phase: Option<Complex64> = None;
    for (x, y) in a.iter().zip(b.iter()) {
        let (nx, ny) = (x.norm(), y.norm());
        if (nx - ny).abs() > eps {
            return false;
        }
        if nx > eps && phase.is_none() {
            phase = Some(x / y);
        }
    }
    let Some(phase) = phase else { return true };
    a.iter().zip(b.iter()).all(|(x, y)| (x - phase * y).norm() <= eps)
}

// ------------------------------------------------------ random circuits --

const RANDOM_KINDS: [GateKind; 16] = [
    GateKind::Id,
    GateKind::H,
    GateKind::X,
    GateKind::Y,
    GateKind::Z,
    GateKind::S,
    GateKind::Sdg,
    GateKind::T,
    GateKind::Tdg,
    GateKind::Rx,
    GateKind::Ry,
    GateKind::Rz,
    GateKind::Phase,
    GateKind::U2,
    GateKind::U3,
    GateKind::Swap,
];

/// A random circuit over the full gate library, including control lists of
/// length 0..=2 where the qubit count allows.
pub fn random_circuit(rng: &mut Xoshiro256StarStar, qubits: usize, gates: usize) -> Circuit {
    let mut circuit = Circuit::new(qubits);
    for _ in 0..gates {
        circuit.push(random_gate(rng, qubits));
    }
    circuit
}

pub fn random_gate(rng: &mut Xoshiro256StarStar, qubits: usize) -> Gate {
    loop {
        let kind = RANDOM_KINDS[rng.below(RANDOM_KINDS.len() as u64) as usize];
        let needed_targets = kind.target_count();
        if needed_targets > qubits {
            continue;
        }
        let max_controls = (qubits - needed_targets).min(2);
        let controls_len = rng.below(max_controls as u64 + 1) as usize;
        let mut picks = rng.distinct_below(qubits as u64, needed_targets + controls_len);
        let targets: Vec<usize> = picks.drain(..needed_targets).map(|q| q as usize).collect();
        let controls: Vec<usize> = picks.into_iter().map(|q| q as usize).collect();
        let params: Vec<f64> = (0..kind.param_count())
            .map(|_| (rng.next_f64() * 2.0 - 1.0) * std::f64::consts::PI)
            .collect();
        return Gate::new(kind, params, targets, controls);
    }
}

/// A random circuit limited to gates `emit` can spell in OpenQASM 2.0.
pub fn random_emittable_circuit(rng: &mut Xoshiro256StarStar, qubits: usize, gates: usize) -> Circuit {
    let mut circuit = Circuit::new(qubits);
    while circuit.len() < gates {
        let gate = random_gate(rng, qubits);
        let representable = match (gate.kind, gate.controls.len()) {
            (_, 0) => true,
            (GateKind::X, 1 | 2) => true,
            (GateKind::Z, 1) => true,
            (GateKind::Swap, 1) => true,
            _ => false,
        };
        if representable {
            circuit.push(gate);
        }
    }
    circuit
}

/// Equivalent-by-construction variant: inserts canceling gate pairs at
/// random positions, so the gate list differs while the unitary is equal.
pub fn padded_equivalent(rng: &mut Xoshiro256StarStar, circuit: &Circuit, pairs: usize) -> Circuit {
    let mut out = circuit.clone();
    for _ in 0..pairs {
        let gate = random_gate(rng, circuit.qubits);
        let inverse = gate.inverse();
        let pos = rng.below(out.len() as u64 + 1) as usize;
        out.gates.insert(pos, inverse);
        out.gates.insert(pos, gate);
    }
    out
}

/// Appends `rz(-2a); u1(2a)` on qubit 0, multiplying the circuit's unitary
/// by the global factor `e^{i a}`.
pub fn with_global_phase(circuit: &Circuit, alpha: f64) -> Circuit {
    let mut out = circuit.clone();
    out.push(Gate::new(GateKind::Rz, vec![-2.0 * alpha], vec![0], vec![]));
    out.push(Gate::new(GateKind::Phase, vec![2.0 * alpha], vec![0], vec![]));
    out
}

/// Forward fidelity of two circuits on one basis input, computed densely.
pub fn oracle_basis_fidelity(left: &Circuit, right: &Circuit, index: u64) -> f64 {
    let dim = 1usize << left.qubits;
    let ul = oracle_circuit_matrix(left);
    let ur = oracle_circuit_matrix(right);
    let a = oracle_column(&ul, dim, index as usize);
    let b = oracle_column(&ur, dim, index as usize);
    let ip: Complex64 = a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum();
    ip.norm_sqr()
}
