//! Logical program representation: quantum/classical registers, gates,
//! measurements, resets, whole-register conditionals, and named sub-blocks
//! carrying gadget metadata (kind, blocks involved, records produced).
//!
//! Programs serialize to an OpenQASM 2.0 subset ([`qasm`]); sub-block
//! boundaries ride along as structured comments so a parsed-back program
//! simulates identically to the original.

pub mod qasm;
pub mod resources;

use serde::{Deserialize, Serialize};

use crate::sim::gates::Gate;

/// Measurement basis for a decoded logical measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MeasBasis {
    Z,
    X,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QubitRef {
    /// Index into the program's quantum register table.
    pub reg: usize,
    pub index: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CBitRef {
    /// Index into the program's classical register table.
    pub reg: usize,
    pub index: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QReg {
    pub name: String,
    pub width: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CReg {
    pub name: String,
    pub width: u32,
}

/// What a sub-block is, for the executor and the resource counters.
#[derive(Debug, Clone, PartialEq)]
pub enum BlockKind {
    /// One run of the non-fault-tolerant encoding circuit on a code block.
    /// `injection` marks non-Clifford magic-state preparations, as opposed to
    /// benchmark input states.
    Encode { block: usize, injection: bool },
    /// Repeat-until-success fault-tolerant |0> initialization; a nonzero
    /// flag register at end of shot means every attempt failed and the shot
    /// is discarded.
    RusInit { block: usize, flag_reg: usize },
    /// Transversal CNOT between two code blocks (7 physical CNOTs).
    TransversalCx { control: usize, target: usize },
    /// Transversal CZ between two code blocks.
    TransversalCz { a: usize, b: usize },
    /// Destructive logical measurement with syndrome decoding. The seven raw
    /// bits land in `bits`, the raw logical parity in `raw`, the decoded
    /// logical value in `log` and the 3-bit syndrome in `syn`. `postselect`
    /// marks gadget-internal measurements whose detected-error flag feeds
    /// shot post-selection.
    MeasDecode {
        block: usize,
        basis: MeasBasis,
        bits: usize,
        raw: CBitRef,
        log: CBitRef,
        syn: usize,
        postselect: bool,
    },
    /// Phase-gate teleportation gadget (method one or two).
    Teleport { method: u8 },
    /// Recursive teleportation gadget for P(pi/2^k).
    RecursiveTeleport { k: u32 },
    /// Ancilla-assisted controlled-phase via a temporary AND block.
    AncillaCp,
    /// Flagged logical-Hadamard measurement.
    FlaggedHMeas { block: usize },
    /// Repeat-until-success flagged |H> preparation; a nonzero flag register
    /// discards the shot.
    TPrepRus { block: usize, flag_reg: usize },
    /// Free-form labelled region.
    Span { label: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockMeta {
    pub kind: BlockKind,
    /// When set, every statement in the block is conditioned on
    /// `creg == value` (emitted as a per-line `if`).
    pub guard: Option<(usize, u64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Stmt {
    Gate { gate: Gate, qubits: Vec<QubitRef> },
    Measure { qubit: QubitRef, target: CBitRef },
    Reset { qubit: QubitRef },
    Barrier { qubits: Vec<QubitRef> },
    If { creg: usize, value: u64, body: Box<Stmt> },
    Block { meta: BlockMeta, stmts: Vec<Stmt> },
    Comment(String),
}

/// A validated-on-demand logical program.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LogicalProgram {
    pub name: String,
    pub qregs: Vec<QReg>,
    pub cregs: Vec<CReg>,
    pub stmts: Vec<Stmt>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    /// Flattened statement index (depth-first, program order).
    pub stmt_index: usize,
    pub message: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "statement {}: {}", self.stmt_index, self.message)
    }
}

impl LogicalProgram {
    pub fn new(name: impl Into<String>) -> Self {
        LogicalProgram { name: name.into(), ..Default::default() }
    }

    pub fn add_qreg(&mut self, name: impl Into<String>, width: u32) -> usize {
        self.qregs.push(QReg { name: name.into(), width });
        self.qregs.len() - 1
    }

    pub fn add_creg(&mut self, name: impl Into<String>, width: u32) -> usize {
        self.cregs.push(CReg { name: name.into(), width });
        self.cregs.len() - 1
    }

    pub fn qreg_named(&self, name: &str) -> Option<usize> {
        self.qregs.iter().position(|r| r.name == name)
    }

    pub fn creg_named(&self, name: &str) -> Option<usize> {
        self.cregs.iter().position(|r| r.name == name)
    }

    /// Total declared physical qubits.
    pub fn num_qubits(&self) -> u32 {
        self.qregs.iter().map(|r| r.width).sum()
    }

    /// Global flat index of a qubit reference.
    pub fn qubit_slot(&self, q: QubitRef) -> usize {
        let base: u32 = self.qregs[..q.reg].iter().map(|r| r.width).sum();
        (base + q.index) as usize
    }

    /// Empty iff the program satisfies every structural invariant.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut diags = Vec::new();
        let mut idx = 0usize;
        let mut names = std::collections::HashSet::new();
        for r in &self.qregs {
            if !names.insert(r.name.clone()) {
                diags.push(Diagnostic {
                    stmt_index: 0,
                    message: format!("duplicate register name '{}'", r.name),
                });
            }
        }
        for r in &self.cregs {
            if !names.insert(r.name.clone()) {
                diags.push(Diagnostic {
                    stmt_index: 0,
                    message: format!("duplicate register name '{}'", r.name),
                });
            }
        }
        for s in &self.stmts {
            self.validate_stmt(s, &mut idx, &mut diags);
        }
        diags
    }

    fn check_qubit(&self, q: QubitRef, idx: usize, diags: &mut Vec<Diagnostic>) {
        match self.qregs.get(q.reg) {
            None => diags.push(Diagnostic {
                stmt_index: idx,
                message: format!("undeclared quantum register #{}", q.reg),
            }),
            Some(r) if q.index >= r.width => diags.push(Diagnostic {
                stmt_index: idx,
                message: format!("qubit {}[{}] out of range (width {})", r.name, q.index, r.width),
            }),
            _ => {}
        }
    }

    fn check_cbit(&self, c: CBitRef, idx: usize, diags: &mut Vec<Diagnostic>) {
        match self.cregs.get(c.reg) {
            None => diags.push(Diagnostic {
                stmt_index: idx,
                message: format!("undeclared classical register #{}", c.reg),
            }),
            Some(r) if c.index >= r.width => diags.push(Diagnostic {
                stmt_index: idx,
                message: format!("bit {}[{}] out of range (width {})", r.name, c.index, r.width),
            }),
            _ => {}
        }
    }

    fn check_guard(&self, creg: usize, value: u64, idx: usize, diags: &mut Vec<Diagnostic>) {
        match self.cregs.get(creg) {
            None => diags.push(Diagnostic {
                stmt_index: idx,
                message: format!("conditional on undeclared classical register #{creg}"),
            }),
            Some(r) => {
                if r.width < 64 && value >= (1u64 << r.width) {
                    diags.push(Diagnostic {
                        stmt_index: idx,
                        message: format!(
                            "conditional constant {} out of range for {}-bit register {}",
                            value, r.width, r.name
                        ),
                    });
                }
            }
        }
    }

    fn validate_stmt(&self, s: &Stmt, idx: &mut usize, diags: &mut Vec<Diagnostic>) {
        let here = *idx;
        *idx += 1;
        match s {
            Stmt::Gate { gate, qubits } => {
                if gate.arity() != qubits.len() {
                    diags.push(Diagnostic {
                        stmt_index: here,
                        message: format!(
                            "gate {} expects {} qubits, got {}",
                            gate.qasm_name(),
                            gate.arity(),
                            qubits.len()
                        ),
                    });
                }
                if qubits.len() == 2 && qubits[0] == qubits[1] {
                    diags.push(Diagnostic {
                        stmt_index: here,
                        message: "duplicate qubit operand".to_string(),
                    });
                }
                for &q in qubits {
                    self.check_qubit(q, here, diags);
                }
            }
            Stmt::Measure { qubit, target } => {
                self.check_qubit(*qubit, here, diags);
                self.check_cbit(*target, here, diags);
            }
            Stmt::Reset { qubit } => self.check_qubit(*qubit, here, diags),
            Stmt::Barrier { qubits } => {
                for &q in qubits {
                    self.check_qubit(q, here, diags);
                }
            }
            Stmt::If { creg, value, body } => {
                self.check_guard(*creg, *value, here, diags);
                if matches!(**body, Stmt::If { .. }) {
                    diags.push(Diagnostic {
                        stmt_index: here,
                        message: "nested conditional statement".to_string(),
                    });
                }
                self.validate_stmt(body, idx, diags);
            }
            Stmt::Block { meta, stmts } => {
                if let Some((creg, value)) = meta.guard {
                    self.check_guard(creg, value, here, diags);
                }
                for inner in stmts {
                    self.validate_stmt(inner, idx, diags);
                }
            }
            Stmt::Comment(_) => {}
        }
    }

    /// Visit every statement depth-first (into blocks and conditionals).
    pub fn for_each_stmt<'a>(&'a self, mut f: impl FnMut(&'a Stmt)) {
        fn walk<'a>(s: &'a Stmt, f: &mut impl FnMut(&'a Stmt)) {
            f(s);
            match s {
                Stmt::If { body, .. } => walk(body, f),
                Stmt::Block { stmts, .. } => {
                    for inner in stmts {
                        walk(inner, f);
                    }
                }
                _ => {}
            }
        }
        for s in &self.stmts {
            walk(s, &mut f);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> LogicalProgram {
        let mut p = LogicalProgram::new("t");
        let q = p.add_qreg("q", 2);
        let c = p.add_creg("c", 3);
        p.stmts.push(Stmt::Gate { gate: Gate::H, qubits: vec![QubitRef { reg: q, index: 0 }] });
        p.stmts.push(Stmt::Measure {
            qubit: QubitRef { reg: q, index: 1 },
            target: CBitRef { reg: c, index: 0 },
        });
        p
    }

    #[test]
    fn valid_program_has_no_diagnostics() {
        assert!(minimal().validate().is_empty());
    }

    #[test]
    fn out_of_range_qubit_is_reported() {
        let mut p = minimal();
        p.stmts.push(Stmt::Gate {
            gate: Gate::X,
            qubits: vec![QubitRef { reg: 0, index: 5 }],
        });
        let diags = p.validate();
        assert_eq!(diags.len(), 1);
        assert!(diags[0].message.contains("q[5]"));
    }

    #[test]
    fn undeclared_register_is_reported() {
        let mut p = minimal();
        p.stmts.push(Stmt::Gate {
            gate: Gate::X,
            qubits: vec![QubitRef { reg: 7, index: 0 }],
        });
        let diags = p.validate();
        assert!(diags[0].message.contains("undeclared"));
    }

    #[test]
    fn conditional_constant_range_checked() {
        let mut p = minimal();
        p.stmts.push(Stmt::If {
            creg: 0,
            value: 9,
            body: Box::new(Stmt::Gate {
                gate: Gate::X,
                qubits: vec![QubitRef { reg: 0, index: 0 }],
            }),
        });
        let diags = p.validate();
        assert_eq!(diags.len(), 1, "9 does not fit a 3-bit register");
        assert!(diags[0].message.contains("out of range"));
    }
}
