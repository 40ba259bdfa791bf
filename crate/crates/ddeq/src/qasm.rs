//! OpenQASM 2.0 frontend: a hand-rolled lexer and recursive-descent parser
//! for the subset emitted by mainstream transpilers, plus the matching
//! emitter.
//!
//! Accepted: the `OPENQASM 2.0;` header, `include "qelib1.inc";` (treated as
//! built-in), any number of `qreg`/`creg` declarations (quantum registers
//! are flattened into one index space in declaration order), the gate
//! library plus the `cx`/`cz`/`ccx`/`swap`/`cswap` aliases, constant angle
//! expressions over `pi`, `barrier` (ignored) and trailing `measure`
//! statements (ignored with a warning).

use crate::circuit::{Circuit, Gate, GateKind};
use std::collections::HashMap;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

/// A positioned parser message. Lines and columns are 1-based.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub line: usize,
    pub col: usize,
    pub message: String,
    pub severity: Severity,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}:{}: {}: {}", self.line, self.col, tag, self.message)
    }
}

/// Successful parse: the circuit plus any non-fatal warnings.
#[derive(Debug, Clone)]
pub struct ParseOutput {
    pub circuit: Circuit,
    pub warnings: Vec<Diagnostic>,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum EmitError {
    #[error("gate {kind} with {controls} control(s) has no OpenQASM 2.0 spelling in the supported subset")]
    UnrepresentableGate { kind: &'static str, controls: usize },
}

// ----------------------------------------------------------------- lexer --

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(f64),
    Str(String),
    Symbol(char),
    Arrow, // ->
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src: src.as_bytes(), pos: 0, line: 1, col: 1 }
    }

    fn bump(&mut self) -> Option<u8> {
        let b = *self.src.get(self.pos)?;
        self.pos += 1;
        if b == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(b)
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn next_token(&mut self) -> Result<Token, Diagnostic> {
        loop {
            let (line, col) = (self.line, self.col);
            let Some(b) = self.peek() else {
                return Ok(Token { tok: Tok::Eof, line, col });
            };
            match b {
                b' ' | b'\t' | b'\r' | b'\n' => {
                    self.bump();
                }
                b'/' if self.src.get(self.pos + 1) == Some(&b'/') => {
                    while let Some(c) = self.peek() {
                        if c == b'\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                    let start = self.pos;
                    while matches!(self.peek(), Some(b'a'..=b'z' | b'A'..=b'Z' | b'0'..=b'9' | b'_')) {
                        self.bump();
                    }
                    let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap().to_string();
                    return Ok(Token { tok: Tok::Ident(text), line, col });
                }
                b'0'..=b'9' | b'.' => {
                    let start = self.pos;
                    let mut seen_e = false;
                    while let Some(c) = self.peek() {
                        match c {
                            b'0'..=b'9' | b'.' => {
                                self.bump();
                            }
                            b'e' | b'E' if !seen_e => {
                                seen_e = true;
                                self.bump();
                                if matches!(self.peek(), Some(b'+' | b'-')) {
                                    self.bump();
                                }
                            }
                            _ => break,
                        }
                    }
                    let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                    let value: f64 = text.parse().map_err(|_| Diagnostic {
                        line,
                        col,
                        message: format!("malformed number `{text}`"),
                        severity: Severity::Error,
                    })?;
                    return Ok(Token { tok: Tok::Number(value), line, col });
                }
                b'"' => {
                    self.bump();
                    let start = self.pos;
                    while let Some(c) = self.peek() {
                        if c == b'"' {
                            break;
                        }
                        self.bump();
                    }
                    if self.peek().is_none() {
                        return Err(Diagnostic {
                            line,
                            col,
                            message: "unterminated string".into(),
                            severity: Severity::Error,
                        });
                    }
                    let text =
                        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned();
                    self.bump(); // closing quote
                    return Ok(Token { tok: Tok::Str(text), line, col });
                }
                b'-' if self.src.get(self.pos + 1) == Some(&b'>') => {
                    self.bump();
                    self.bump();
                    return Ok(Token { tok: Tok::Arrow, line, col });
                }
                b';' | b',' | b'(' | b')' | b'[' | b']' | b'{' | b'}' | b'+' | b'-' | b'*'
                | b'/' | b'=' | b'<' | b'>' => {
                    self.bump();
                    return Ok(Token { tok: Tok::Symbol(b as char), line, col });
                }
                other => {
                    self.bump();
                    return Err(Diagnostic {
                        line,
                        col,
                        message: format!("unexpected byte 0x{other:02x}"),
                        severity: Severity::Error,
                    });
                }
            }
        }
    }
}

// ---------------------------------------------------------------- parser --

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    registers: Vec<(String, usize, usize)>, // name, base offset, size
    total_qubits: usize,
    gates: Vec<Gate>,
    warnings: Vec<Diagnostic>,
    measured: bool,
}

type PResult<T> = Result<T, Diagnostic>;

fn err(tok: &Token, message: impl Into<String>) -> Diagnostic {
    Diagnostic { line: tok.line, col: tok.col, message: message.into(), severity: Severity::Error }
}

/// Parses OpenQASM 2.0 source into circuit IR. On failure the returned
/// diagnostics contain at least one positioned error; warnings collected
/// before the failure are included as context.
pub fn parse(source: &str) -> Result<ParseOutput, Vec<Diagnostic>> {
    let mut lexer = Lexer::new(source);
    let mut tokens = Vec::new();
    loop {
        match lexer.next_token() {
            Ok(t) => {
                let eof = t.tok == Tok::Eof;
                tokens.push(t);
                if eof {
                    break;
                }
            }
            Err(d) => return Err(vec![d]),
        }
    }
    let mut parser = Parser {
        tokens,
        pos: 0,
        registers: Vec::new(),
        total_qubits: 0,
        gates: Vec::new(),
        warnings: Vec::new(),
        measured: false,
    };
    match parser.run() {
        Ok(circuit) => Ok(ParseOutput { circuit, warnings: parser.warnings }),
        Err(e) => {
            let mut diags = parser.warnings;
            diags.push(e);
            Err(diags)
        }
    }
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn advance(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn expect_symbol(&mut self, sym: char) -> PResult<()> {
        let t = self.advance();
        match t.tok {
            Tok::Symbol(c) if c == sym => Ok(()),
            _ => Err(err(&t, format!("expected `{sym}`"))),
        }
    }

    fn expect_ident(&mut self) -> PResult<(String, Token)> {
        let t = self.advance();
        match &t.tok {
            Tok::Ident(name) => Ok((name.clone(), t.clone())),
            _ => Err(err(&t, "expected identifier")),
        }
    }

    fn run(&mut self) -> PResult<Circuit> {
        self.header()?;
        loop {
            let t = self.peek().clone();
            match &t.tok {
                Tok::Eof => break,
                Tok::Ident(word) => match word.as_str() {
                    "include" => self.include()?,
                    "qreg" => self.qreg()?,
                    "creg" => self.creg()?,
                    "barrier" => self.skip_statement()?,
                    "measure" => self.measure()?,
                    "gate" | "opaque" => {
                        return Err(err(&t, "custom gate definitions are not supported"))
                    }
                    "if" => return Err(err(&t, "classical control flow is not supported")),
                    "reset" => return Err(err(&t, "reset is not supported")),
                    _ => self.gate_application()?,
                },
                _ => return Err(err(&t, "expected a statement")),
            }
        }
        let mut circuit = Circuit::new(self.total_qubits);
        circuit.gates = std::mem::take(&mut self.gates);
        Ok(circuit)
    }

    fn header(&mut self) -> PResult<()> {
        let (word, t) = self.expect_ident()?;
        if word != "OPENQASM" {
            return Err(err(&t, "file must start with `OPENQASM 2.0;`"));
        }
        let vt = self.advance();
        match vt.tok {
            Tok::Number(2.0) => {}
            _ => return Err(err(&vt, "only OpenQASM version 2.0 is supported")),
        }
        self.expect_symbol(';')
    }

    fn include(&mut self) -> PResult<()> {
        let start = self.advance(); // include
        let t = self.advance();
        match &t.tok {
            Tok::Str(path) if path == "qelib1.inc" => {}
            Tok::Str(path) => {
                return Err(err(&start, format!("cannot include `{path}`; only qelib1.inc is built in")))
            }
            _ => return Err(err(&t, "expected an include path string")),
        }
        self.expect_symbol(';')
    }

    fn bracketed_size(&mut self) -> PResult<usize> {
        self.expect_symbol('[')?;
        let t = self.advance();
        let size = match t.tok {
            Tok::Number(v) if v >= 0.0 && v.fract() == 0.0 => v as usize,
            _ => return Err(err(&t, "expected a non-negative integer size")),
        };
        self.expect_symbol(']')?;
        Ok(size)
    }

    fn qreg(&mut self) -> PResult<()> {
        self.advance(); // qreg
        let (name, t) = self.expect_ident()?;
        if self.registers.iter().any(|(n, _, _)| *n == name) {
            return Err(err(&t, format!("register `{name}` already declared")));
        }
        let size = self.bracketed_size()?;
        self.expect_symbol(';')?;
        self.registers.push((name, self.total_qubits, size));
        self.total_qubits += size;
        Ok(())
    }

    fn creg(&mut self) -> PResult<()> {
        self.advance(); // creg
        self.expect_ident()?;
        self.bracketed_size()?;
        self.expect_symbol(';')
    }

    fn skip_statement(&mut self) -> PResult<()> {
        loop {
            let t = self.advance();
            match t.tok {
                Tok::Symbol(';') => return Ok(()),
                Tok::Eof => return Err(err(&t, "unterminated statement")),
                _ => {}
            }
        }
    }

    fn measure(&mut self) -> PResult<()> {
        let t = self.advance(); // measure
        self.warnings.push(Diagnostic {
            line: t.line,
            col: t.col,
            message: "measurement ignored; circuits are compared unitarily".into(),
            severity: Severity::Warning,
        });
        self.measured = true;
        self.skip_statement()
    }

    /// Resolves `name` or `name[i]` to flattened qubit indices.
    fn operand(&mut self) -> PResult<(Vec<usize>, Token)> {
        let (name, t) = self.expect_ident()?;
        let Some(&(_, base, size)) = self.registers.iter().find(|(n, _, _)| *n == name)
        else {
            return Err(err(&t, format!("unknown register `{name}`")));
        };
        if self.peek().tok == Tok::Symbol('[') {
            let idx = self.bracketed_size()?;
            if idx >= size {
                return Err(err(&t, format!("index {idx} out of range for `{name}[{size}]`")));
            }
            Ok((vec![base + idx], t))
        } else {
            Ok(((base..base + size).collect(), t))
        }
    }

    fn gate_application(&mut self) -> PResult<()> {
        let (name, t) = self.expect_ident()?;
        if self.measured {
            return Err(err(&t, "gates after measurement are not supported (mid-circuit measurement)"));
        }
        let spec = gate_table().get(name.as_str()).copied().ok_or_else(|| {
            err(&t, format!("unsupported gate `{name}`"))
        })?;

        let mut params = Vec::new();
        if self.peek().tok == Tok::Symbol('(') {
            self.advance();
            if self.peek().tok != Tok::Symbol(')') {
                loop {
                    params.push(self.expression()?);
                    if self.peek().tok == Tok::Symbol(',') {
                        self.advance();
                    } else {
                        break;
                    }
                }
            }
            self.expect_symbol(')')?;
        }
        if params.len() != spec.kind.param_count() {
            return Err(err(
                &t,
                format!(
                    "`{name}` expects {} parameter(s), got {}",
                    spec.kind.param_count(),
                    params.len()
                ),
            ));
        }

        let mut operands: Vec<(Vec<usize>, Token)> = Vec::new();
        loop {
            operands.push(self.operand()?);
            if self.peek().tok == Tok::Symbol(',') {
                self.advance();
            } else {
                break;
            }
        }
        self.expect_symbol(';')?;

        let needed = spec.controls + spec.kind.target_count();
        if operands.len() != needed {
            return Err(err(&t, format!("`{name}` expects {needed} operand(s), got {}", operands.len())));
        }

        // Broadcast: a bare register is only allowed for single-qubit,
        // uncontrolled gates; everything else needs explicit indices.
        if needed == 1 {
            let (qubits, _) = &operands[0];
            for &q in qubits {
                let gate = Gate::new(spec.kind, params.clone(), vec![q], vec![]);
                gate.validate(self.total_qubits).map_err(|e| err(&t, e.to_string()))?;
                self.gates.push(gate);
            }
            return Ok(());
        }
        let mut flat = Vec::with_capacity(needed);
        for (qubits, ot) in &operands {
            if qubits.len() != 1 {
                return Err(err(ot, "whole-register operands are only supported for single-qubit gates"));
            }
            flat.push(qubits[0]);
        }
        let controls = flat[..spec.controls].to_vec();
        let targets = flat[spec.controls..].to_vec();
        let gate = Gate::new(spec.kind, params, targets, controls);
        gate.validate(self.total_qubits).map_err(|e| err(&t, e.to_string()))?;
        self.gates.push(gate);
        Ok(())
    }

    // expr := term (('+'|'-') term)*
    fn expression(&mut self) -> PResult<f64> {
        let mut value = self.term()?;
        loop {
            match self.peek().tok {
                Tok::Symbol('+') => {
                    self.advance();
                    value += self.term()?;
                }
                Tok::Symbol('-') => {
                    self.advance();
                    value -= self.term()?;
                }
                _ => return Ok(value),
            }
        }
    }

    // term := factor (('*'|'/') factor)*
    fn term(&mut self) -> PResult<f64> {
        let mut value = self.factor()?;
        loop {
            match self.peek().tok {
                Tok::Symbol('*') => {
                    self.advance();
                    value *= self.factor()?;
                }
                Tok::Symbol('/') => {
                    self.advance();
                    let t = self.peek().clone();
                    let divisor = self.factor()?;
                    if divisor == 0.0 {
                        return Err(err(&t, "division by zero in angle expression"));
                    }
                    value /= divisor;
                }
                _ => return Ok(value),
            }
        }
    }

    // factor := '-' factor | '(' expr ')' | 'pi' | number
    fn factor(&mut self) -> PResult<f64> {
        let t = self.advance();
        match &t.tok {
            Tok::Symbol('-') => Ok(-self.factor()?),
            Tok::Symbol('(') => {
                let value = self.expression()?;
                self.expect_symbol(')')?;
                Ok(value)
            }
            Tok::Ident(word) if word == "pi" => Ok(std::f64::consts::PI),
            Tok::Number(v) => Ok(*v),
            _ => Err(err(&t, "expected an angle expression")),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct GateSpec {
    kind: GateKind,
    controls: usize,
}

fn gate_table() -> &'static HashMap<&'static str, GateSpec> {
    use std::sync::OnceLock;
    static TABLE: OnceLock<HashMap<&'static str, GateSpec>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = HashMap::new();
        let mut put = |name, kind, controls| {
            t.insert(name, GateSpec { kind, controls });
        };
        put("id", GateKind::Id, 0);
        put("h", GateKind::H, 0);
        put("x", GateKind::X, 0);
        put("y", GateKind::Y, 0);
        put("z", GateKind::Z, 0);
        put("s", GateKind::S, 0);
        put("sdg", GateKind::Sdg, 0);
        put("t", GateKind::T, 0);
        put("tdg", GateKind::Tdg, 0);
        put("rx", GateKind::Rx, 0);
        put("ry", GateKind::Ry, 0);
        put("rz", GateKind::Rz, 0);
        put("u1", GateKind::Phase, 0);
        put("u2", GateKind::U2, 0);
        put("u3", GateKind::U3, 0);
        put("swap", GateKind::Swap, 0);
        put("cx", GateKind::X, 1);
        put("cz", GateKind::Z, 1);
        put("ccx", GateKind::X, 2);
        put("cswap", GateKind::Swap, 1);
        t
    })
}

// --------------------------------------------------------------- emitter --

/// Renders the circuit as OpenQASM 2.0 such that `parse(emit(c))`
/// reproduces `c` gate for gate. Angle literals use shortest
/// round-trip formatting, so parameters survive bit-exactly.
pub fn emit(circuit: &Circuit) -> Result<String, EmitError> {
    let mut out = String::from("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    out.push_str(&format!("qreg q[{}];\n", circuit.qubits));
    for gate in &circuit.gates {
        let name = match (gate.kind, gate.controls.len()) {
            (_, 0) => gate.kind.name().to_string(),
            (GateKind::X, 1) => "cx".into(),
            (GateKind::X, 2) => "ccx".into(),
            (GateKind::Z, 1) => "cz".into(),
            (GateKind::Swap, 1) => "cswap".into(),
            (kind, controls) => {
                return Err(EmitError::UnrepresentableGate { kind: kind.name(), controls })
            }
        };
        out.push_str(&name);
        if !gate.params.is_empty() {
            let rendered: Vec<String> = gate.params.iter().map(|p| format!("{p:?}")).collect();
            out.push_str(&format!("({})", rendered.join(",")));
        }
        out.push(' ');
        let operands: Vec<String> = gate
            .controls
            .iter()
            .chain(gate.targets.iter())
            .map(|q| format!("q[{q}]"))
            .collect();
        out.push_str(&operands.join(", "));
        out.push_str(";\n");
    }
    Ok(out)
}
