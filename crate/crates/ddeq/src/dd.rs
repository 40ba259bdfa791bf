//! Hash-consed decision diagrams for 2^n x 2^n unitaries and 2^n state
//! vectors.
//!
//! A diagram node at level `k` decides qubit `q_k` (qubit 0 is the least
//! significant basis-state bit). Matrix nodes carry four successors in
//! row-major block order
//!
//! ```text
//!             [ succ[0]  succ[1] ]      row    = output bit of q_k
//!     M  =    [ succ[2]  succ[3] ]      column = input  bit of q_k
//! ```
//!
//! and vector nodes carry two (`succ[0]` = amplitude block for `q_k = 0`).
//! Every stored node is normalized by dividing all successor weights by the
//! leftmost one of maximal modulus, so that weight becomes exactly one and
//! common factors migrate up into the incoming edge. Together with the
//! unique table this makes the representation canonical: structurally equal
//! diagrams are pointer-equal.
//!
//! Zero blocks are never represented by nodes; an edge with canonical zero
//! weight points directly at the terminal (a "0-stub"). All other successor
//! edges of a level-`k` node point at level `k-1` nodes (or the terminal when
//! `k = 0`), so paths never skip levels.

use crate::complex::{CVal, ComplexTable, NumericsError};
use num_complex::Complex64;
use std::collections::HashMap;
use std::fmt::Write as _;
use std::time::Instant;

pub type Level = u8;

/// Maximum qubit count a single package supports.
pub const MAX_QUBITS: usize = 255;

/// Largest `n` for which dense export is permitted (2^n x 2^n entries).
pub const MAX_DENSE_QUBITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(u32);

const TERMINAL: NodeId = NodeId(u32::MAX);

impl NodeId {
    pub fn is_terminal(self) -> bool {
        self == TERMINAL
    }
}

/// Weighted edge into a node (or the terminal).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge {
    pub node: NodeId,
    pub weight: CVal,
}

impl Edge {
    pub const ZERO: Edge = Edge { node: TERMINAL, weight: CVal::ZERO };
    pub const ONE: Edge = Edge { node: TERMINAL, weight: CVal::ONE };

    pub fn terminal(weight: CVal) -> Edge {
        Edge { node: TERMINAL, weight }
    }

    pub fn is_zero(self) -> bool {
        self.weight.is_exact_zero()
    }

    pub fn is_terminal(self) -> bool {
        self.node.is_terminal()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DdKind {
    Vector,
    Matrix,
}

impl DdKind {
    pub fn arity(self) -> usize {
        match self {
            DdKind::Vector => 2,
            DdKind::Matrix => 4,
        }
    }
}

#[derive(Debug, Clone)]
struct Node {
    level: Level,
    kind: DdKind,
    succ: [Edge; 4],
    mark: u32,
    active: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct UniqueKey {
    level: Level,
    kind: DdKind,
    succ: [Edge; 4],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) enum OpTag {
    MulMM,
    MulMV,
    Add,
    Adjoint,
}

/// Outcome of [`DdPackage::is_identity`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IdentityCheck {
    Exact,
    /// Identity structure scaled by `e^{i alpha}` with the returned
    /// `alpha` in `[0, 2pi)`.
    GlobalPhase(f64),
    No,
}

#[derive(Debug, thiserror::Error)]
pub enum DdError {
    #[error("successor at level {succ_level} cannot hang below a level-{level} node")]
    LevelOrderViolation { level: Level, succ_level: Level },
    #[error("operands have mismatched dimensions or kinds")]
    DimensionMismatch,
    #[error("operation deadline exceeded")]
    Deadline,
    #[error("dense export limited to {MAX_DENSE_QUBITS} qubits, got {0}")]
    TooLargeForDense(usize),
    #[error("dense input of length {0} is not a power-of-two square/vector")]
    BadDenseShape(usize),
    #[error("basis index {index} out of range for {qubits} qubits")]
    IndexOutOfRange { index: u64, qubits: usize },
    #[error("basis-state indices support at most 63 qubits, circuit has {0}")]
    IndexSpaceTooLarge(usize),
    #[error("operation requires a {expected:?} diagram")]
    WrongKind { expected: DdKind },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// A self-contained decision-diagram package: complex table, node arena,
/// unique table, operation caches.
///
/// A package is confined to one thread; run independent packages for
/// parallelism. Edges must never migrate between packages.
pub struct DdPackage {
    pub(crate) ctab: ComplexTable,
    nodes: Vec<Node>,
    free: Vec<u32>,
    unique: HashMap<UniqueKey, NodeId>,
    pub(crate) compute: HashMap<(OpTag, NodeId, NodeId, CVal), Edge>,
    pub(crate) compute_scalar: HashMap<(NodeId, NodeId), Complex64>,
    identity_chain: Vec<Edge>,
    mark_epoch: u32,
    deadline: Option<Instant>,
    poll_counter: u32,
    created_since_gc: usize,
}

impl Default for DdPackage {
    fn default() -> Self {
        Self::new()
    }
}

impl DdPackage {
    pub fn new() -> Self {
        Self::with_table(ComplexTable::new())
    }

    pub fn with_epsilon(epsilon: f64) -> Result<Self, NumericsError> {
        Ok(Self::with_table(ComplexTable::with_epsilon(epsilon)?))
    }

    fn with_table(ctab: ComplexTable) -> Self {
        DdPackage {
            ctab,
            nodes: Vec::with_capacity(1024),
            free: Vec::new(),
            unique: HashMap::new(),
            compute: HashMap::new(),
            compute_scalar: HashMap::new(),
            identity_chain: Vec::new(),
            mark_epoch: 0,
            deadline: None,
            poll_counter: 0,
            created_since_gc: 0,
        }
    }

    pub fn table(&self) -> &ComplexTable {
        &self.ctab
    }

    pub fn epsilon(&self) -> f64 {
        self.ctab.epsilon()
    }

    pub fn weight_value(&self, e: Edge) -> Complex64 {
        self.ctab.value(e.weight)
    }

    pub fn lookup(&mut self, z: Complex64) -> Result<CVal, NumericsError> {
        self.ctab.lookup(z.re, z.im)
    }

    fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0 as usize]
    }

    pub fn level_of(&self, id: NodeId) -> Option<Level> {
        if id.is_terminal() {
            None
        } else {
            Some(self.node(id).level)
        }
    }

    pub fn kind_of(&self, e: Edge) -> Option<DdKind> {
        if e.node.is_terminal() {
            None
        } else {
            Some(self.node(e.node).kind)
        }
    }

    pub fn successors(&self, id: NodeId) -> &[Edge] {
        let n = self.node(id);
        &n.succ[..n.kind.arity()]
    }

    /// Number of active (live, reachable-or-not) nodes in the arena.
    pub fn live_nodes(&self) -> usize {
        self.nodes.len() - self.free.len()
    }

    // ----- deadlines ----------------------------------------------------

    /// Sets (or clears) the cooperative deadline polled inside the
    /// multiplication recursion.
    pub fn set_deadline(&mut self, deadline: Option<Instant>) {
        self.deadline = deadline;
    }

    pub(crate) fn poll_deadline(&mut self) -> Result<(), DdError> {
        if self.deadline.is_none() {
            return Ok(());
        }
        self.poll_counter = self.poll_counter.wrapping_add(1);
        if self.poll_counter & 0x3FF == 0 {
            self.check_deadline_now()?;
        }
        Ok(())
    }

    pub(crate) fn check_deadline_now(&self) -> Result<(), DdError> {
        match self.deadline {
            Some(d) if Instant::now() >= d => Err(DdError::Deadline),
            _ => Ok(()),
        }
    }

    // ----- node construction --------------------------------------------

    /// Builds (or finds) the normalized node for the given successors and
    /// returns an edge to it carrying the extracted common factor.
    ///
    /// If all successors are zero-stubs the result is a zero-stub.
    pub fn make_matrix_node(&mut self, level: Level, succ: [Edge; 4]) -> Result<Edge, DdError> {
        self.make_node(level, DdKind::Matrix, succ)
    }

    pub fn make_vector_node(&mut self, level: Level, succ: [Edge; 2]) -> Result<Edge, DdError> {
        self.make_node(level, DdKind::Vector, [succ[0], succ[1], Edge::ZERO, Edge::ZERO])
    }

    fn make_node(&mut self, level: Level, kind: DdKind, mut succ: [Edge; 4]) -> Result<Edge, DdError> {
        let arity = kind.arity();
        for s in succ.iter_mut().take(arity) {
            if s.weight.is_exact_zero() {
                *s = Edge::ZERO;
            } else {
                // Non-zero successors must sit exactly one level down.
                let ok = if level == 0 {
                    s.node.is_terminal()
                } else {
                    self.level_of(s.node) == Some(level - 1)
                };
                if !ok {
                    return Err(DdError::LevelOrderViolation {
                        level,
                        succ_level: self.level_of(s.node).unwrap_or(0),
                    });
                }
            }
        }
        // The divisor is the leftmost successor weight of maximal modulus.
        // With equal moduli (every gate of the H/T/CX family) this is plain
        // leftmost-non-zero normalization; preferring the largest keeps all
        // stored weights bounded by one, which the tolerance-based value
        // identification needs. Node sharing is unaffected by the choice.
        if succ.iter().take(arity).all(|s| s.is_zero()) {
            return Ok(Edge::ZERO);
        }
        let eps = self.ctab.epsilon();
        let best = succ
            .iter()
            .take(arity)
            .map(|s| self.ctab.value(s.weight).norm())
            .fold(0.0, f64::max);
        let top_idx = (0..arity)
            .find(|&i| {
                !succ[i].is_zero() && self.ctab.value(succ[i].weight).norm() > best - eps
            })
            .expect("a non-zero successor exists");
        let top = self.ctab.value(succ[top_idx].weight);
        for (i, s) in succ.iter_mut().enumerate().take(arity) {
            if s.is_zero() {
                continue;
            }
            if i == top_idx {
                s.weight = CVal::ONE;
            } else {
                let w = self.ctab.value(s.weight) / top;
                let c = self.ctab.lookup(w.re, w.im)?;
                if c.is_exact_zero() {
                    *s = Edge::ZERO;
                } else {
                    s.weight = c;
                }
            }
        }
        let key = UniqueKey { level, kind, succ };
        if let Some(&id) = self.unique.get(&key) {
            return Ok(Edge { node: id, weight: self.ctab.lookup(top.re, top.im)? });
        }
        let id = match self.free.pop() {
            Some(slot) => {
                self.nodes[slot as usize] = Node { level, kind, succ, mark: 0, active: true };
                NodeId(slot)
            }
            None => {
                let slot = self.nodes.len() as u32;
                assert!(slot < u32::MAX - 1, "node arena exhausted");
                self.nodes.push(Node { level, kind, succ, mark: 0, active: true });
                NodeId(slot)
            }
        };
        self.unique.insert(key, id);
        self.created_since_gc += 1;
        Ok(Edge { node: id, weight: self.ctab.lookup(top.re, top.im)? })
    }

    pub(crate) fn scale(&mut self, e: Edge, factor: Complex64) -> Result<Edge, DdError> {
        if e.is_zero() {
            return Ok(Edge::ZERO);
        }
        let w = self.ctab.value(e.weight) * factor;
        let c = self.ctab.lookup(w.re, w.im)?;
        if c.is_exact_zero() {
            return Ok(Edge::ZERO);
        }
        Ok(Edge { node: e.node, weight: c })
    }

    // ----- identity -----------------------------------------------------

    /// The identity diagram over `n` qubits: exactly `n` nodes, root weight
    /// one, diagonal successors chained, off-diagonal zero-stubs.
    pub fn identity_dd(&mut self, n: usize) -> Edge {
        assert!((1..=MAX_QUBITS).contains(&n), "qubit count {n} out of range");
        while self.identity_chain.len() < n {
            let below = if self.identity_chain.is_empty() {
                Edge::ONE
            } else {
                *self.identity_chain.last().unwrap()
            };
            let level = self.identity_chain.len() as Level;
            let e = self
                .make_matrix_node(level, [below, Edge::ZERO, Edge::ZERO, below])
                .expect("identity construction cannot fail");
            debug_assert!(e.weight.is_exact_one());
            self.identity_chain.push(e);
        }
        self.identity_chain[n - 1]
    }

    /// Classifies `e` as the exact identity, the identity up to a global
    /// phase, or neither.
    pub fn is_identity(&mut self, e: Edge, n: usize) -> IdentityCheck {
        if e.is_zero() || self.kind_of(e) != Some(DdKind::Matrix) {
            return IdentityCheck::No;
        }
        let id = self.identity_dd(n);
        if e.node != id.node {
            return IdentityCheck::No;
        }
        if self.ctab.is_approx_one(e.weight) {
            return IdentityCheck::Exact;
        }
        if self.ctab.is_unit_modulus(e.weight) {
            let mut alpha = self.ctab.value(e.weight).arg();
            if alpha < 0.0 {
                alpha += std::f64::consts::TAU;
            }
            return IdentityCheck::GlobalPhase(alpha);
        }
        IdentityCheck::No
    }

    // ----- size and reachability ----------------------------------------

    /// Number of distinct non-terminal nodes reachable from `e`. The
    /// terminal does not count towards diagram size.
    pub fn node_count(&self, e: Edge) -> usize {
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![e];
        while let Some(edge) = stack.pop() {
            if edge.is_zero() || edge.node.is_terminal() || !seen.insert(edge.node) {
                continue;
            }
            let node = self.node(edge.node);
            stack.extend_from_slice(&node.succ[..node.kind.arity()]);
        }
        seen.len()
    }

    // ----- garbage collection --------------------------------------------

    /// Reclaims every node unreachable from `roots` and clears the compute
    /// tables. Returns the number of reclaimed nodes.
    ///
    /// The cached identity chain is kept alive implicitly.
    pub fn gc(&mut self, roots: &[Edge]) -> usize {
        self.mark_epoch += 1;
        let epoch = self.mark_epoch;
        let mut stack: Vec<NodeId> = Vec::new();
        for e in roots.iter().chain(self.identity_chain.iter()) {
            if !e.is_zero() && !e.node.is_terminal() {
                stack.push(e.node);
            }
        }
        while let Some(id) = stack.pop() {
            let node = &mut self.nodes[id.0 as usize];
            if node.mark == epoch {
                continue;
            }
            node.mark = epoch;
            let arity = node.kind.arity();
            for i in 0..arity {
                let s = self.nodes[id.0 as usize].succ[i];
                if !s.is_zero() && !s.node.is_terminal() {
                    stack.push(s.node);
                }
            }
        }
        let mut reclaimed = 0;
        for idx in 0..self.nodes.len() {
            let node = &self.nodes[idx];
            if node.active && node.mark != epoch {
                let key = UniqueKey { level: node.level, kind: node.kind, succ: node.succ };
                self.unique.remove(&key);
                let node = &mut self.nodes[idx];
                node.active = false;
                self.free.push(idx as u32);
                reclaimed += 1;
            }
        }
        self.compute.clear();
        self.compute_scalar.clear();
        self.created_since_gc = 0;
        reclaimed
    }

    /// Collects when enough nodes piled up since the last collection.
    pub(crate) fn maybe_gc(&mut self, roots: &[Edge]) {
        if self.created_since_gc > 100_000 {
            self.gc(roots);
        }
    }

    // ----- dense import / export ----------------------------------------

    /// Row-major 2^n x 2^n dense expansion, for test oracles and reports.
    pub fn dense_matrix(&self, e: Edge, n: usize) -> Result<Vec<Complex64>, DdError> {
        if n > MAX_DENSE_QUBITS {
            return Err(DdError::TooLargeForDense(n));
        }
        let dim = 1usize << n;
        let mut out = vec![Complex64::new(0.0, 0.0); dim * dim];
        self.fill_matrix(e, n, 0, 0, dim, &mut out, Complex64::new(1.0, 0.0));
        Ok(out)
    }

    #[allow(clippy::too_many_arguments)]
    fn fill_matrix(
        &self,
        e: Edge,
        n: usize,
        row: usize,
        col: usize,
        dim: usize,
        out: &mut [Complex64],
        acc: Complex64,
    ) {
        if e.is_zero() {
            return;
        }
        let acc = acc * self.ctab.value(e.weight);
        if n == 0 {
            out[row * dim + col] += acc;
            return;
        }
        let node = self.node(e.node);
        debug_assert_eq!(node.level as usize, n - 1);
        let half = 1usize << (n - 1);
        for (i, &s) in node.succ.iter().enumerate().take(4) {
            let (r, c) = (i >> 1, i & 1);
            self.fill_matrix(s, n - 1, row + r * half, col + c * half, dim, out, acc);
        }
    }

    /// Dense 2^n amplitude vector.
    pub fn dense_vector(&self, e: Edge, n: usize) -> Result<Vec<Complex64>, DdError> {
        if n > 2 * MAX_DENSE_QUBITS {
            return Err(DdError::TooLargeForDense(n));
        }
        let mut out = vec![Complex64::new(0.0, 0.0); 1usize << n];
        self.fill_vector(e, n, 0, &mut out, Complex64::new(1.0, 0.0));
        Ok(out)
    }

    fn fill_vector(&self, e: Edge, n: usize, base: usize, out: &mut [Complex64], acc: Complex64) {
        if e.is_zero() {
            return;
        }
        let acc = acc * self.ctab.value(e.weight);
        if n == 0 {
            out[base] += acc;
            return;
        }
        let node = self.node(e.node);
        let half = 1usize << (n - 1);
        self.fill_vector(node.succ[0], n - 1, base, out, acc);
        self.fill_vector(node.succ[1], n - 1, base + half, out, acc);
    }

    /// Non-zero amplitudes of a vector diagram in ascending basis-index
    /// order, stopping after `cap` entries. The flag reports truncation.
    pub fn nonzero_amplitudes(&self, e: Edge, n: usize, cap: usize) -> (Vec<(u64, Complex64)>, bool) {
        let mut out = Vec::new();
        let mut truncated = false;
        self.collect_amplitudes(e, n, 0, Complex64::new(1.0, 0.0), cap, &mut out, &mut truncated);
        (out, truncated)
    }

    #[allow(clippy::too_many_arguments)]
    fn collect_amplitudes(
        &self,
        e: Edge,
        n: usize,
        base: u64,
        acc: Complex64,
        cap: usize,
        out: &mut Vec<(u64, Complex64)>,
        truncated: &mut bool,
    ) {
        if e.is_zero() || *truncated {
            return;
        }
        let acc = acc * self.ctab.value(e.weight);
        if n == 0 {
            if out.len() >= cap {
                *truncated = true;
            } else {
                out.push((base, acc));
            }
            return;
        }
        let node = self.node(e.node);
        self.collect_amplitudes(node.succ[0], n - 1, base, acc, cap, out, truncated);
        self.collect_amplitudes(node.succ[1], n - 1, base | 1 << (n - 1), acc, cap, out, truncated);
    }

    /// Builds the canonical diagram of a row-major 2^n x 2^n matrix.
    pub fn matrix_from_dense(&mut self, data: &[Complex64], n: usize) -> Result<Edge, DdError> {
        let dim = 1usize << n;
        if data.len() != dim * dim {
            return Err(DdError::BadDenseShape(data.len()));
        }
        self.matrix_from_dense_rec(data, n, 0, 0, dim)
    }

    fn matrix_from_dense_rec(
        &mut self,
        data: &[Complex64],
        n: usize,
        row: usize,
        col: usize,
        dim: usize,
    ) -> Result<Edge, DdError> {
        if n == 0 {
            let z = data[row * dim + col];
            let c = self.ctab.lookup(z.re, z.im)?;
            return Ok(if c.is_exact_zero() { Edge::ZERO } else { Edge::terminal(c) });
        }
        let half = 1usize << (n - 1);
        let mut succ = [Edge::ZERO; 4];
        for (i, s) in succ.iter_mut().enumerate() {
            let (r, c) = (i >> 1, i & 1);
            *s = self.matrix_from_dense_rec(data, n - 1, row + r * half, col + c * half, dim)?;
        }
        self.make_matrix_node((n - 1) as Level, succ)
    }

    /// Builds the canonical diagram of a dense 2^n amplitude vector.
    pub fn vector_from_dense(&mut self, data: &[Complex64], n: usize) -> Result<Edge, DdError> {
        if data.len() != 1usize << n {
            return Err(DdError::BadDenseShape(data.len()));
        }
        self.vector_from_dense_rec(data, n)
    }

    fn vector_from_dense_rec(&mut self, data: &[Complex64], n: usize) -> Result<Edge, DdError> {
        if n == 0 {
            let c = self.ctab.lookup(data[0].re, data[0].im)?;
            return Ok(if c.is_exact_zero() { Edge::ZERO } else { Edge::terminal(c) });
        }
        let half = 1usize << (n - 1);
        let lo = self.vector_from_dense_rec(&data[..half], n - 1)?;
        let hi = self.vector_from_dense_rec(&data[half..], n - 1)?;
        self.make_vector_node((n - 1) as Level, [lo, hi])
    }

    // ----- diagnostics ----------------------------------------------------

    /// GraphViz rendering of the diagram rooted at `e`.
    pub fn to_dot(&self, e: Edge) -> String {
        let mut out = String::from("digraph dd {\n  rankdir=TB;\n  root [shape=point];\n");
        let mut seen = std::collections::HashSet::new();
        let mut stack = Vec::new();
        let _ = writeln!(out, "  terminal [shape=box,label=\"1\"];");
        if !e.is_zero() {
            let w = self.ctab.value(e.weight);
            let _ = writeln!(out, "  root -> n{} [label=\"{:.4}{:+.4}i\"];", e.node.0, w.re, w.im);
            stack.push(e.node);
        } else {
            let _ = writeln!(out, "  root -> terminal [label=\"0\"];");
        }
        while let Some(id) = stack.pop() {
            if id.is_terminal() || !seen.insert(id) {
                continue;
            }
            let node = self.node(id);
            let _ = writeln!(out, "  n{} [shape=circle,label=\"q{}\"];", id.0, node.level);
            for (i, s) in node.succ.iter().enumerate().take(node.kind.arity()) {
                if s.is_zero() {
                    continue;
                }
                let w = self.ctab.value(s.weight);
                let target = if s.node.is_terminal() {
                    "terminal".to_string()
                } else {
                    stack.push(s.node);
                    format!("n{}", s.node.0)
                };
                let _ = writeln!(
                    out,
                    "  n{} -> {} [label=\"{}: {:.4}{:+.4}i\"];",
                    id.0, target, i, w.re, w.im
                );
            }
        }
        out.push_str("}\n");
        out
    }

    /// Scans the whole arena checking the normalization invariant; returns
    /// the number of active nodes. Test hook.
    pub fn assert_all_normalized(&self) -> usize {
        let mut checked = 0;
        let eps = self.ctab.epsilon();
        for node in self.nodes.iter().filter(|n| n.active) {
            let arity = node.kind.arity();
            let best = node.succ[..arity]
                .iter()
                .map(|s| self.ctab.value(s.weight).norm())
                .fold(0.0, f64::max);
            assert!(best > 0.0, "active node with all-zero successors");
            let divisor = node.succ[..arity]
                .iter()
                .find(|s| !s.is_zero() && self.ctab.value(s.weight).norm() > best - eps)
                .expect("non-zero successor");
            assert!(
                divisor.weight.is_exact_one(),
                "leftmost maximal-modulus successor weight must be canonical one"
            );
            assert!(
                node.succ[..arity]
                    .iter()
                    .all(|s| self.ctab.value(s.weight).norm() <= 1.0 + eps),
                "successor weights must stay bounded by one"
            );
            checked += 1;
        }
        checked
    }
}
