//! Decision-diagram based simulation and equivalence checking of quantum
//! circuits.
//!
//! The crate is organized around a per-thread [`dd::DdPackage`] holding the
//! canonical complex table, the hash-consed node store and the operation
//! caches. On top of it sit the circuit IR ([`circuit`]), the OpenQASM 2.0
//! frontend ([`qasm`]) and the equivalence-checking flow ([`check`]):
//! randomized basis-state simulation for fast non-equivalence detection,
//! and an identity-accumulation scheme with pluggable gate-interleaving
//! strategies for the actual proof.

pub mod check;
pub mod circuit;
pub mod complex;
pub mod dd;
pub mod ops;
pub mod qasm;
pub mod rng;

pub use num_complex::Complex64;

pub use check::{
    affected_columns, check_flow, check_g_i_g, check_reference, check_simulation, CheckError,
    CheckOptions, Counterexample, Outcome, RunStats, SimulationCheck, Strategy, Verdict,
    WitnessKind,
};
pub use circuit::{Circuit, CircuitError, Gate, GateKind};
pub use complex::{CVal, ComplexTable, DEFAULT_EPSILON};
pub use dd::{DdError, DdKind, DdPackage, Edge, IdentityCheck};
