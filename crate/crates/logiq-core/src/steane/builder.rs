//! Program-fragment builders for the code's primitives: the non-fault-
//! tolerant encoder, repeat-until-success |0> initialization, transversal
//! gates, and destructive decoded measurement.
//!
//! The encoder takes its single-qubit input on the block's last qubit and
//! uses 3 Hadamards and 11 CNOTs. The repeat-until-success |0> check
//! measures the logical-Z representative Z0 Z2 Z5 through one physical
//! ancilla; this support was chosen so that every correlated two-qubit
//! X-type error a single encoder fault can produce flips the check.

use thiserror::Error;

use crate::ir::{BlockKind, BlockMeta, CBitRef, LogicalProgram, MeasBasis, QubitRef, Stmt};
use crate::sim::gates::Gate;

/// Seven data qubits of one code block: a width-7 quantum register.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LogicalBlock {
    pub reg: usize,
}

/// Preparation of the encoder's input qubit.
#[derive(Debug, Clone, PartialEq)]
pub enum SingleQubitPrep {
    Zero,
    One,
    Plus,
    Minus,
    /// P(theta) H |0>, the |theta> magic-state input.
    Phase(f64),
    /// cos(pi/8)|0> + sin(pi/8)|1>, the +1 eigenstate of Hadamard.
    HPlus,
    /// Arbitrary single-qubit gate list applied to |0>.
    Arbitrary(Vec<Gate>),
}

impl SingleQubitPrep {
    fn gates(&self) -> Vec<Gate> {
        match self {
            SingleQubitPrep::Zero => vec![],
            SingleQubitPrep::One => vec![Gate::X],
            SingleQubitPrep::Plus => vec![Gate::H],
            SingleQubitPrep::Minus => vec![Gate::X, Gate::H],
            SingleQubitPrep::Phase(t) => vec![Gate::H, Gate::Phase(*t)],
            SingleQubitPrep::HPlus => vec![Gate::Ry(std::f64::consts::FRAC_PI_4)],
            SingleQubitPrep::Arbitrary(gs) => gs.clone(),
        }
    }
}

/// Encoder layout: H on qubits 0..=2, input on qubit 6, 11 CNOTs.
pub const ENCODER_H: [u32; 3] = [0, 1, 2];
pub const ENCODER_CX: [(u32, u32); 11] = [
    (6, 4),
    (6, 5),
    (2, 3),
    (2, 5),
    (2, 6),
    (1, 2),
    (1, 4),
    (1, 5),
    (0, 1),
    (0, 2),
    (0, 3),
];

/// Repeat-until-success |0> verification support: Z0 Z2 Z5.
pub const RUS_CHECK_SUPPORT: [u32; 3] = [0, 2, 5];

#[derive(Debug, Error, PartialEq)]
pub enum BuildError {
    #[error("conditional correction P({0}) is not transversal and no recursion was requested")]
    CorrectionNotTransversal(f64),
    #[error("recursion level must be at least 2, got {0}")]
    BadRecursionLevel(u32),
    #[error("blocks overlap")]
    BlockOverlap,
    #[error("repeat-until-success limit must be at least 1")]
    BadRusLimit,
}

/// Classical registers produced by one decoded measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeasRegs {
    pub bits: usize,
    pub raw: CBitRef,
    pub log: CBitRef,
    pub syn: usize,
}

/// Convenience wrapper around a [`LogicalProgram`] under construction.
/// Statements go to the innermost open sub-block.
pub struct ProgramBuilder {
    pub program: LogicalProgram,
    stack: Vec<(BlockMeta, Vec<Stmt>)>,
    meas_counter: u32,
}

impl ProgramBuilder {
    pub fn new(name: impl Into<String>) -> Self {
        ProgramBuilder { program: LogicalProgram::new(name), stack: Vec::new(), meas_counter: 0 }
    }

    /// Open a sub-block; statements emitted until [`Self::end_block`] nest
    /// inside it.
    pub fn begin_block(&mut self, kind: BlockKind, guard: Option<(usize, u64)>) {
        self.stack.push((BlockMeta { kind, guard }, Vec::new()));
    }

    pub fn end_block(&mut self) {
        let (meta, stmts) = self.stack.pop().expect("no open block");
        self.push(Stmt::Block { meta, stmts });
    }

    pub fn add_block(&mut self, name: &str) -> LogicalBlock {
        LogicalBlock { reg: self.program.add_qreg(name, 7) }
    }

    pub fn add_phys_reg(&mut self, name: &str, width: u32) -> usize {
        self.program.add_qreg(name, width)
    }

    pub fn add_creg(&mut self, name: &str, width: u32) -> usize {
        self.program.add_creg(name, width)
    }

    pub fn finish(self) -> LogicalProgram {
        assert!(self.stack.is_empty(), "unclosed sub-block");
        self.program
    }

    pub fn qubit(&self, block: LogicalBlock, index: u32) -> QubitRef {
        QubitRef { reg: block.reg, index }
    }

    /// Append a raw statement to the innermost open block.
    pub fn push_stmt(&mut self, stmt: Stmt) {
        self.push(stmt);
    }

    fn push(&mut self, stmt: Stmt) {
        match self.stack.last_mut() {
            Some((_, stmts)) => stmts.push(stmt),
            None => self.program.stmts.push(stmt),
        }
    }

    /// Fresh register set for a decoded measurement, named
    /// `{prefix}`, `{prefix}LogRaw`, `{prefix}Log`, `{prefix}Syn`.
    pub fn meas_regs(&mut self, prefix: &str) -> MeasRegs {
        let bits = self.program.add_creg(prefix, 7);
        let raw = CBitRef { reg: self.program.add_creg(format!("{prefix}LogRaw"), 1), index: 0 };
        let log = CBitRef { reg: self.program.add_creg(format!("{prefix}Log"), 1), index: 0 };
        let syn = self.program.add_creg(format!("{prefix}Syn"), 3);
        MeasRegs { bits, raw, log, syn }
    }

    pub fn next_meas_prefix(&mut self) -> String {
        let n = self.meas_counter;
        self.meas_counter += 1;
        format!("c{n}")
    }

    // -- statement helpers ---------------------------------------------------

    fn gate_stmts(block: usize, gate: Gate) -> Vec<Stmt> {
        (0..7)
            .map(|i| Stmt::Gate { gate, qubits: vec![QubitRef { reg: block, index: i }] })
            .collect()
    }

    /// Transversal logical single-qubit gate as a guarded or plain group of
    /// seven physical gates. Logical S is transversal S-dagger and vice
    /// versa; logical H, X, Z are the same letter on every qubit.
    pub fn logical_1q(&mut self, block: LogicalBlock, logical: Logical1q, guard: Option<(usize, u64)>) {
        let phys = match logical {
            Logical1q::H => Gate::H,
            Logical1q::S => Gate::Sdg,
            Logical1q::Sdg => Gate::S,
            Logical1q::X => Gate::X,
            Logical1q::Z => Gate::Z,
        };
        let stmts = Self::gate_stmts(block.reg, phys);
        match guard {
            None => {
                for s in stmts {
                    self.push(s);
                }
            }
            Some(_) => self.push(Stmt::Block {
                meta: BlockMeta { kind: BlockKind::Span { label: "corr".into() }, guard },
                stmts,
            }),
        }
    }

    /// A guarded transversal word (several logical 1q gates under one
    /// condition).
    pub fn logical_word(
        &mut self,
        block: LogicalBlock,
        word: &[Logical1q],
        guard: Option<(usize, u64)>,
    ) {
        let mut stmts = Vec::new();
        for &l in word {
            let phys = match l {
                Logical1q::H => Gate::H,
                Logical1q::S => Gate::Sdg,
                Logical1q::Sdg => Gate::S,
                Logical1q::X => Gate::X,
                Logical1q::Z => Gate::Z,
            };
            stmts.extend(Self::gate_stmts(block.reg, phys));
        }
        match guard {
            None => {
                for s in stmts {
                    self.push(s);
                }
            }
            Some(_) => self.push(Stmt::Block {
                meta: BlockMeta { kind: BlockKind::Span { label: "corr".into() }, guard },
                stmts,
            }),
        }
    }

    /// Transversal CNOT between two blocks.
    pub fn transversal_cx(
        &mut self,
        control: LogicalBlock,
        target: LogicalBlock,
        guard: Option<(usize, u64)>,
    ) -> Result<(), BuildError> {
        if control.reg == target.reg {
            return Err(BuildError::BlockOverlap);
        }
        let stmts = (0..7)
            .map(|i| Stmt::Gate {
                gate: Gate::Cx,
                qubits: vec![
                    QubitRef { reg: control.reg, index: i },
                    QubitRef { reg: target.reg, index: i },
                ],
            })
            .collect();
        self.push(Stmt::Block {
            meta: BlockMeta {
                kind: BlockKind::TransversalCx { control: control.reg, target: target.reg },
                guard,
            },
            stmts,
        });
        Ok(())
    }

    /// Transversal CZ between two blocks.
    pub fn transversal_cz(
        &mut self,
        a: LogicalBlock,
        b: LogicalBlock,
        guard: Option<(usize, u64)>,
    ) -> Result<(), BuildError> {
        if a.reg == b.reg {
            return Err(BuildError::BlockOverlap);
        }
        let stmts = (0..7)
            .map(|i| Stmt::Gate {
                gate: Gate::Cz,
                qubits: vec![
                    QubitRef { reg: a.reg, index: i },
                    QubitRef { reg: b.reg, index: i },
                ],
            })
            .collect();
        self.push(Stmt::Block {
            meta: BlockMeta { kind: BlockKind::TransversalCz { a: a.reg, b: b.reg }, guard },
            stmts,
        });
        Ok(())
    }

    /// Non-fault-tolerant encoding of a single-qubit state into a block.
    /// Resets the block, prepares the input on qubit 6, then runs the
    /// fixed H+CNOT encoder.
    pub fn encode_nonft(
        &mut self,
        block: LogicalBlock,
        prep: &SingleQubitPrep,
        injection: bool,
        guard: Option<(usize, u64)>,
    ) {
        let stmt = Self::encode_stmt(block, prep, injection, guard);
        self.push(stmt);
    }

    fn encode_stmt(
        block: LogicalBlock,
        prep: &SingleQubitPrep,
        injection: bool,
        guard: Option<(usize, u64)>,
    ) -> Stmt {
        let mut stmts: Vec<Stmt> = (0..7)
            .map(|i| Stmt::Reset { qubit: QubitRef { reg: block.reg, index: i } })
            .collect();
        for g in prep.gates() {
            stmts.push(Stmt::Gate { gate: g, qubits: vec![QubitRef { reg: block.reg, index: 6 }] });
        }
        for &q in &ENCODER_H {
            stmts.push(Stmt::Gate { gate: Gate::H, qubits: vec![QubitRef { reg: block.reg, index: q }] });
        }
        for &(c, t) in &ENCODER_CX {
            stmts.push(Stmt::Gate {
                gate: Gate::Cx,
                qubits: vec![
                    QubitRef { reg: block.reg, index: c },
                    QubitRef { reg: block.reg, index: t },
                ],
            });
        }
        Stmt::Block {
            meta: BlockMeta { kind: BlockKind::Encode { block: block.reg, injection }, guard },
            stmts,
        }
    }

    /// Destructive decoded logical measurement. For the X basis the block is
    /// rotated by transversal H first; the decode tables are shared.
    pub fn meas_decode(
        &mut self,
        block: LogicalBlock,
        basis: MeasBasis,
        postselect: bool,
        prefix: &str,
        guard: Option<(usize, u64)>,
    ) -> MeasRegs {
        let regs = self.meas_regs(prefix);
        let mut stmts = Vec::new();
        if basis == MeasBasis::X {
            for i in 0..7 {
                stmts.push(Stmt::Gate {
                    gate: Gate::H,
                    qubits: vec![QubitRef { reg: block.reg, index: i }],
                });
            }
        }
        for i in 0..7 {
            stmts.push(Stmt::Measure {
                qubit: QubitRef { reg: block.reg, index: i },
                target: CBitRef { reg: regs.bits, index: i },
            });
        }
        self.push(Stmt::Block {
            meta: BlockMeta {
                kind: BlockKind::MeasDecode {
                    block: block.reg,
                    basis,
                    bits: regs.bits,
                    raw: regs.raw,
                    log: regs.log,
                    syn: regs.syn,
                    postselect,
                },
                guard,
            },
            stmts,
        });
        regs
    }

    /// Fault-tolerant repeat-until-success |0> initialization: encode, then
    /// verify the logical-Z representative over [`RUS_CHECK_SUPPORT`] with a
    /// physical ancilla. On a `1` the block is re-encoded, up to `limit`
    /// attempts; a final `1` in the flag register discards the shot.
    pub fn init_zero_ft_rus(
        &mut self,
        block: LogicalBlock,
        ancilla: QubitRef,
        flag_name: &str,
        limit: u32,
    ) -> Result<usize, BuildError> {
        if limit < 1 {
            return Err(BuildError::BadRusLimit);
        }
        let flag_reg = self.program.add_creg(flag_name, 1);
        let flag = CBitRef { reg: flag_reg, index: 0 };
        self.begin_block(BlockKind::RusInit { block: block.reg, flag_reg }, None);
        for attempt in 0..limit {
            let guard = if attempt == 0 { None } else { Some((flag_reg, 1)) };
            self.encode_nonft(block, &SingleQubitPrep::Zero, false, guard);
            let mut check = vec![Stmt::Reset { qubit: ancilla }];
            for &q in &RUS_CHECK_SUPPORT {
                check.push(Stmt::Gate {
                    gate: Gate::Cx,
                    qubits: vec![QubitRef { reg: block.reg, index: q }, ancilla],
                });
            }
            check.push(Stmt::Measure { qubit: ancilla, target: flag });
            self.push(Stmt::Block {
                meta: BlockMeta { kind: BlockKind::Span { label: "zcheck".into() }, guard },
                stmts: check,
            });
        }
        self.end_block();
        Ok(flag_reg)
    }
}

/// Transversal logical single-qubit Cliffords.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Logical1q {
    H,
    S,
    Sdg,
    X,
    Z,
}
