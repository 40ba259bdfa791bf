//! Algebra on decision diagrams: multiplication, addition,
//! conjugate-transpose, gate-to-system-matrix construction, inner products
//! and circuit building.

use crate::circuit::{Circuit, CircuitError, Gate};
use crate::complex::CVal;
use crate::dd::{DdError, DdKind, DdPackage, Edge, Level, OpTag};
use num_complex::Complex64;

#[derive(Debug, thiserror::Error)]
pub enum OpsError {
    #[error(transparent)]
    Dd(#[from] DdError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

impl DdPackage {
    // ----- multiplication --------------------------------------------------

    /// Product `a * b` where `a` is a matrix diagram and `b` is a matrix or
    /// vector diagram over the same qubit count. Matrix-vector products run
    /// a specialized two-term recursion.
    pub fn multiply(&mut self, a: Edge, b: Edge) -> Result<Edge, DdError> {
        if a.is_zero() || b.is_zero() {
            return Ok(Edge::ZERO);
        }
        if self.kind_of(a) != Some(DdKind::Matrix) {
            return Err(DdError::WrongKind { expected: DdKind::Matrix });
        }
        match self.kind_of(b) {
            Some(DdKind::Matrix) => {
                if self.level_of(a.node) != self.level_of(b.node) {
                    return Err(DdError::DimensionMismatch);
                }
                self.mul_mm(a, b)
            }
            Some(DdKind::Vector) => {
                if self.level_of(a.node) != self.level_of(b.node) {
                    return Err(DdError::DimensionMismatch);
                }
                self.mul_mv(a, b)
            }
            None => Err(DdError::DimensionMismatch),
        }
    }

    fn mul_mm(&mut self, a: Edge, b: Edge) -> Result<Edge, DdError> {
        if a.is_zero() || b.is_zero() {
            return Ok(Edge::ZERO);
        }
        let factor = self.weight_value(a) * self.weight_value(b);
        if a.is_terminal() && b.is_terminal() {
            let c = self.ctab.lookup(factor.re, factor.im)?;
            return Ok(Edge::terminal(c));
        }
        self.poll_deadline()?;
        let (an, bn) = (a.node, b.node);
        if let Some(&hit) = self.compute.get(&(OpTag::MulMM, an, bn, CVal::ZERO)) {
            return self.scale(hit, factor);
        }
        let level = self.level_of(an).expect("non-terminal");
        let asucc: [Edge; 4] = self.successors(an).try_into().unwrap();
        let bsucc: [Edge; 4] = self.successors(bn).try_into().unwrap();
        let mut succ = [Edge::ZERO; 4];
        for r in 0..2 {
            for c in 0..2 {
                // (AB)[r][c] = A[r][0] B[0][c] + A[r][1] B[1][c]
                let p0 = self.mul_mm(asucc[2 * r], bsucc[c])?;
                let p1 = self.mul_mm(asucc[2 * r + 1], bsucc[2 + c])?;
                succ[2 * r + c] = self.add_rec(p0, p1)?;
            }
        }
        let result = self.make_matrix_node(level, succ)?;
        self.compute.insert((OpTag::MulMM, an, bn, CVal::ZERO), result);
        self.scale(result, factor)
    }

    fn mul_mv(&mut self, a: Edge, v: Edge) -> Result<Edge, DdError> {
        if a.is_zero() || v.is_zero() {
            return Ok(Edge::ZERO);
        }
        let factor = self.weight_value(a) * self.weight_value(v);
        if a.is_terminal() && v.is_terminal() {
            let c = self.ctab.lookup(factor.re, factor.im)?;
            return Ok(Edge::terminal(c));
        }
        self.poll_deadline()?;
        let (an, vn) = (a.node, v.node);
        if let Some(&hit) = self.compute.get(&(OpTag::MulMV, an, vn, CVal::ZERO)) {
            return self.scale(hit, factor);
        }
        let level = self.level_of(an).expect("non-terminal");
        let asucc: [Edge; 4] = self.successors(an).try_into().unwrap();
        let vsucc: [Edge; 2] = self.successors(vn).try_into().unwrap();
        let mut succ = [Edge::ZERO; 2];
        for (r, s) in succ.iter_mut().enumerate() {
            let p0 = self.mul_mv(asucc[2 * r], vsucc[0])?;
            let p1 = self.mul_mv(asucc[2 * r + 1], vsucc[1])?;
            *s = self.add_rec(p0, p1)?;
        }
        let result = self.make_vector_node(level, succ)?;
        self.compute.insert((OpTag::MulMV, an, vn, CVal::ZERO), result);
        self.scale(result, factor)
    }

    // ----- addition ---------------------------------------------------------

    /// Entrywise sum of two diagrams of the same kind and qubit count.
    pub fn add(&mut self, a: Edge, b: Edge) -> Result<Edge, DdError> {
        if !a.is_zero() && !b.is_zero()
            && (self.kind_of(a) != self.kind_of(b) || self.level_of(a.node) != self.level_of(b.node)) {
                return Err(DdError::DimensionMismatch);
            }
        self.add_rec(a, b)
    }

    fn add_rec(&mut self, mut a: Edge, mut b: Edge) -> Result<Edge, DdError> {
        if a.is_zero() {
            return Ok(b);
        }
        if b.is_zero() {
            return Ok(a);
        }
        if a.is_terminal() && b.is_terminal() {
            let sum = self.weight_value(a) + self.weight_value(b);
            let c = self.ctab.lookup(sum.re, sum.im)?;
            return Ok(if c.is_exact_zero() { Edge::ZERO } else { Edge::terminal(c) });
        }
        // Commutative, so order operands canonically: factor out the larger
        // weight (keeps the relative weight at most one in magnitude) with a
        // deterministic tie-break for cache hits.
        let (na, nb) = (self.weight_value(a).norm_sqr(), self.weight_value(b).norm_sqr());
        if nb > na || (nb == na && (b.node, b.weight.index()) < (a.node, a.weight.index())) {
            std::mem::swap(&mut a, &mut b);
        }
        let wa = self.weight_value(a);
        let rel = self.weight_value(b) / wa;
        let rel_c = self.ctab.lookup(rel.re, rel.im)?;
        if let Some(&hit) = self.compute.get(&(OpTag::Add, a.node, b.node, rel_c)) {
            return self.scale(hit, wa);
        }
        let kind = self.kind_of(a).expect("non-terminal");
        let level = self.level_of(a.node).expect("non-terminal");
        let arity = kind.arity();
        let asucc: [Edge; 4] = {
            let mut s = [Edge::ZERO; 4];
            s[..arity].copy_from_slice(self.successors(a.node));
            s
        };
        let bsucc: [Edge; 4] = {
            let mut s = [Edge::ZERO; 4];
            s[..arity].copy_from_slice(self.successors(b.node));
            s
        };
        let rel_value = self.ctab.value(rel_c);
        let mut succ = [Edge::ZERO; 4];
        for i in 0..arity {
            let scaled_b = self.scale(bsucc[i], rel_value)?;
            succ[i] = self.add_rec(asucc[i], scaled_b)?;
        }
        let result = match kind {
            DdKind::Matrix => self.make_matrix_node(level, succ)?,
            DdKind::Vector => self.make_vector_node(level, [succ[0], succ[1]])?,
        };
        self.compute.insert((OpTag::Add, a.node, b.node, rel_c), result);
        self.scale(result, wa)
    }

    // ----- conjugate-transpose ----------------------------------------------

    /// Conjugate-transpose of a matrix diagram: off-diagonal successor roles
    /// swap recursively and every weight is conjugated.
    ///
    /// Panics when handed a vector diagram.
    pub fn adjoint(&mut self, a: Edge) -> Result<Edge, DdError> {
        if a.is_zero() {
            return Ok(Edge::ZERO);
        }
        if !a.is_terminal() && self.kind_of(a) != Some(DdKind::Matrix) {
            return Err(DdError::WrongKind { expected: DdKind::Matrix });
        }
        self.adjoint_rec(a)
    }

    fn adjoint_rec(&mut self, a: Edge) -> Result<Edge, DdError> {
        let w = self.weight_value(a).conj();
        if a.is_zero() {
            return Ok(Edge::ZERO);
        }
        if a.is_terminal() {
            let c = self.ctab.lookup(w.re, w.im)?;
            return Ok(Edge::terminal(c));
        }
        if let Some(&hit) = self.compute.get(&(OpTag::Adjoint, a.node, a.node, CVal::ZERO)) {
            return self.scale(hit, w);
        }
        let level = self.level_of(a.node).expect("non-terminal");
        let s: [Edge; 4] = self.successors(a.node).try_into().unwrap();
        let t00 = self.adjoint_rec(s[0])?;
        let t01 = self.adjoint_rec(s[2])?;
        let t10 = self.adjoint_rec(s[1])?;
        let t11 = self.adjoint_rec(s[3])?;
        let result = self.make_matrix_node(level, [t00, t01, t10, t11])?;
        self.compute.insert((OpTag::Adjoint, a.node, a.node, CVal::ZERO), result);
        self.scale(result, w)
    }

    // ----- inner product and fidelity ----------------------------------------

    /// `<x|y>` of two vector diagrams over the same qubit count.
    pub fn inner_product(&mut self, x: Edge, y: Edge) -> Result<Complex64, DdError> {
        if x.is_zero() || y.is_zero() {
            return Ok(Complex64::new(0.0, 0.0));
        }
        if self.kind_of(x) != Some(DdKind::Vector) || self.kind_of(y) != Some(DdKind::Vector) {
            return Err(DdError::WrongKind { expected: DdKind::Vector });
        }
        if self.level_of(x.node) != self.level_of(y.node) {
            return Err(DdError::DimensionMismatch);
        }
        Ok(self.ip_rec(x, y))
    }

    fn ip_rec(&mut self, x: Edge, y: Edge) -> Complex64 {
        if x.is_zero() || y.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        let factor = self.weight_value(x).conj() * self.weight_value(y);
        if x.is_terminal() && y.is_terminal() {
            return factor;
        }
        if let Some(&hit) = self.compute_scalar.get(&(x.node, y.node)) {
            return factor * hit;
        }
        let xs: [Edge; 2] = self.successors(x.node).try_into().unwrap();
        let ys: [Edge; 2] = self.successors(y.node).try_into().unwrap();
        let sum = self.ip_rec(xs[0], ys[0]) + self.ip_rec(xs[1], ys[1]);
        self.compute_scalar.insert((x.node, y.node), sum);
        factor * sum
    }

    /// Squared overlap `|<x|y>|^2`, clamped into `[0, 1]`.
    pub fn fidelity(&mut self, x: Edge, y: Edge) -> Result<f64, DdError> {
        let ip = self.inner_product(x, y)?;
        Ok(ip.norm_sqr().clamp(0.0, 1.0))
    }

    // ----- gates ---------------------------------------------------------------

    /// Diagram of the full 2^n x 2^n system matrix of one gate: the local
    /// block extended by identities on uninvolved qubits, applied iff every
    /// control qubit is |1>.
    pub fn gate_to_dd(&mut self, gate: &Gate, qubits: usize) -> Result<Edge, OpsError> {
        gate.validate(qubits)?;
        if qubits > 1 {
            self.identity_dd(qubits - 1); // warm the chain used below
        }
        let block = gate.block();
        let block_dim = 1usize << gate.targets.len();

        let mut sum = Edge::ZERO;
        for row in 0..block_dim {
            for col in 0..block_dim {
                let entry = block[row * block_dim + col];
                if entry.norm_sqr() == 0.0 {
                    continue;
                }
                // Tensor chain: E_{row,col} on targets, |1><1| on controls,
                // identity elsewhere.
                let mut chain = Edge::ONE;
                for level in 0..qubits {
                    let succ = if let Some(bit) = gate.targets.iter().position(|&t| t == level) {
                        let (r, c) = ((row >> bit) & 1, (col >> bit) & 1);
                        let mut s = [Edge::ZERO; 4];
                        s[2 * r + c] = chain;
                        s
                    } else if gate.controls.contains(&level) {
                        [Edge::ZERO, Edge::ZERO, Edge::ZERO, chain]
                    } else {
                        [chain, Edge::ZERO, Edge::ZERO, chain]
                    };
                    chain = self.make_matrix_node(level as Level, succ)?;
                }
                let scaled = self.scale(chain, entry)?;
                sum = self.add_rec(sum, scaled)?;
            }
        }
        if !gate.controls.is_empty() {
            // Identity on the subspace where not all controls are |1>.
            let mut idpart = Edge::ZERO;
            for level in 0..qubits {
                let succ = if gate.controls.contains(&level) {
                    let id_below = if level == 0 { Edge::ONE } else { self.identity_dd(level) };
                    [id_below, Edge::ZERO, Edge::ZERO, idpart]
                } else {
                    [idpart, Edge::ZERO, Edge::ZERO, idpart]
                };
                idpart = self.make_matrix_node(level as Level, succ)?;
            }
            sum = self.add_rec(sum, idpart)?;
        }
        Ok(sum)
    }

    // ----- states ---------------------------------------------------------------

    /// Vector diagram of the computational basis state |index>.
    pub fn basis_state(&mut self, qubits: usize, index: u64) -> Result<Edge, DdError> {
        if qubits > 63 {
            return Err(DdError::IndexSpaceTooLarge(qubits));
        }
        if index >> qubits != 0 {
            return Err(DdError::IndexOutOfRange { index, qubits });
        }
        let mut chain = Edge::ONE;
        for level in 0..qubits {
            let succ = if (index >> level) & 1 == 0 { [chain, Edge::ZERO] } else { [Edge::ZERO, chain] };
            chain = self.make_vector_node(level as Level, succ)?;
        }
        Ok(chain)
    }

    /// Runs the circuit on |index> by matrix-vector multiplication,
    /// producing the index-th column of the circuit's system matrix.
    pub fn simulate(&mut self, circuit: &Circuit, index: u64) -> Result<Edge, OpsError> {
        circuit.validate()?;
        let mut state = self.basis_state(circuit.qubits, index)?;
        for gate in &circuit.gates {
            let g = self.gate_to_dd(gate, circuit.qubits)?;
            state = self.multiply(g, state)?;
            self.maybe_gc(&[state]);
        }
        Ok(state)
    }

    /// Applies the circuit's gates to an existing state diagram.
    pub fn apply_circuit(&mut self, circuit: &Circuit, mut state: Edge) -> Result<Edge, OpsError> {
        for gate in &circuit.gates {
            let g = self.gate_to_dd(gate, circuit.qubits)?;
            state = self.multiply(g, state)?;
            self.maybe_gc(&[state]);
        }
        Ok(state)
    }

    // ----- whole-circuit matrices -------------------------------------------------

    /// Diagram of the circuit's system matrix `U = U_{m-1} ... U_0`.
    /// The empty circuit yields the identity.
    pub fn build_matrix(&mut self, circuit: &Circuit) -> Result<Edge, OpsError> {
        self.build_matrix_traced(circuit, &mut Vec::new())
    }

    /// Same as [`build_matrix`](Self::build_matrix) but records the node
    /// count after the initial identity and after every gate application.
    pub fn build_matrix_traced(
        &mut self,
        circuit: &Circuit,
        trace: &mut Vec<usize>,
    ) -> Result<Edge, OpsError> {
        circuit.validate()?;
        assert!(circuit.qubits >= 1, "cannot build a matrix over zero qubits");
        self.check_deadline_now()?;
        let mut acc = self.identity_dd(circuit.qubits);
        trace.push(self.node_count(acc));
        for gate in &circuit.gates {
            let g = self.gate_to_dd(gate, circuit.qubits)?;
            acc = self.multiply(g, acc)?;
            trace.push(self.node_count(acc));
            self.maybe_gc(&[acc]);
        }
        Ok(acc)
    }
}
