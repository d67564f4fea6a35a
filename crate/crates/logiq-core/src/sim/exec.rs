//! Trajectory executor: runs a logical program shot by shot under a
//! stochastic Pauli noise model.
//!
//! Programs are flattened once into a linear op list; idle noise uses tick
//! indices from a greedy as-late-as-possible layering of that list. Inside
//! teleport-gadget blocks, a transversal CNOT immediately followed by the
//! destructive logical measurement of its target block executes as a single
//! contraction (`FactoredState::teleport_contract`), so the pre-measurement
//! merged vector is never materialized.
//!
//! Each shot draws from its own RNG stream derived from (seed, shot index);
//! shots are independent and run in parallel.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::ir::{BlockKind, CBitRef, LogicalProgram, Stmt};
use crate::sim::gates::Gate;
use crate::sim::noise::{sample_depolarizing_1q, sample_depolarizing_2q, NoiseModel};
use crate::sim::state::{FactoredState, QubitId, SimError};
use crate::steane::code::{decode_measurement, SyndromeRecord};

#[derive(Debug, Error)]
pub enum ExecError {
    #[error("program failed validation: {0}")]
    Invalid(String),
    #[error("simulation error: {0}")]
    Sim(#[from] SimError),
    #[error("noise model invalid: {0}")]
    Noise(#[from] crate::sim::noise::NoiseError),
}

/// One measurement in a shot's transcript.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MeasEvent {
    pub creg: usize,
    pub index: u32,
    pub bit: bool,
}

/// One decoded logical measurement in a shot's transcript.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SyndromeEvent {
    pub record: SyndromeRecordSer,
    pub postselect: bool,
}

/// Serializable mirror of the decode record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SyndromeRecordSer {
    pub raw_logical: bool,
    pub syndrome: u8,
    pub decoded_logical: bool,
    pub detected: bool,
}

impl From<SyndromeRecord> for SyndromeRecordSer {
    fn from(r: SyndromeRecord) -> Self {
        SyndromeRecordSer {
            raw_logical: r.raw_logical,
            syndrome: r.syndrome,
            decoded_logical: r.decoded_logical,
            detected: r.detected,
        }
    }
}

/// Outcome of one trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShotRecord {
    pub shot: u64,
    /// Final value of every classical register.
    pub registers: BTreeMap<String, u64>,
    /// Per-measurement transcript, in execution order.
    pub measurements: Vec<MeasEvent>,
    /// Decoded logical measurements, in execution order.
    pub syndromes: Vec<SyndromeEvent>,
    /// A repeat-until-success loop exhausted its attempts.
    pub rus_discard: bool,
    /// Some gadget measurement decoded a nonzero syndrome.
    pub detected: bool,
    /// Two-qubit gates that actually fired this shot.
    pub fired_tq: u32,
}

/// Classical registers with named bit/whole-register access.
#[derive(Debug, Clone)]
pub struct ClassicalStore {
    values: Vec<u64>,
}

impl ClassicalStore {
    fn new(n: usize) -> Self {
        ClassicalStore { values: vec![0; n] }
    }

    pub fn get(&self, reg: usize) -> u64 {
        self.values[reg]
    }

    pub fn set(&mut self, reg: usize, value: u64) {
        self.values[reg] = value;
    }

    pub fn get_bit(&self, c: CBitRef) -> bool {
        (self.values[c.reg] >> c.index) & 1 == 1
    }

    pub fn set_bit(&mut self, c: CBitRef, v: bool) {
        if v {
            self.values[c.reg] |= 1 << c.index;
        } else {
            self.values[c.reg] &= !(1 << c.index);
        }
    }
}

// ---------------------------------------------------------------------------
// Flattening and scheduling
// ---------------------------------------------------------------------------

type Guard = Option<(usize, u64)>;

#[derive(Debug, Clone)]
enum FlatOp {
    Gate { gate: Gate, slots: Vec<usize>, guard: Guard },
    /// One single-qubit gate applied to several distinct qubits (a
    /// transversal layer), executed in one sweep.
    Gate1Block { gate: Gate, slots: Vec<usize>, guard: Guard },
    /// Disjoint two-qubit gates of one transversal logical gate.
    TqBlock { gate: Gate, pairs: Vec<(usize, usize)>, guard: Guard },
    Measure { slot: usize, target: CBitRef, guard: Guard },
    /// Joint projective measurement of a whole block.
    MeasBlock { targets: Vec<(usize, CBitRef)>, guard: Guard },
    Reset { slot: usize, guard: Guard },
    Barrier { slots: Vec<usize> },
    /// Fused transversal CNOT + destructive measurement of the target block.
    Fused { pairs: Vec<(usize, usize)>, targets: Vec<(usize, CBitRef)>, guard: Guard },
    /// Syndrome decoding at a MeasDecode block exit.
    Decode { bits: usize, raw: CBitRef, log: CBitRef, syn: usize, postselect: bool, guard: Guard },
}

impl FlatOp {
    fn qubit_slots(&self) -> Vec<usize> {
        match self {
            FlatOp::Gate { slots, .. }
            | FlatOp::Gate1Block { slots, .. }
            | FlatOp::Barrier { slots } => slots.clone(),
            FlatOp::Measure { slot, .. } | FlatOp::Reset { slot, .. } => vec![*slot],
            FlatOp::MeasBlock { targets, .. } => targets.iter().map(|&(s, _)| s).collect(),
            FlatOp::Fused { pairs, .. } | FlatOp::TqBlock { pairs, .. } => {
                pairs.iter().flat_map(|&(c, t)| [c, t]).collect()
            }
            FlatOp::Decode { .. } => Vec::new(),
        }
    }

    fn creg_resources(&self, num_qubits: usize) -> Vec<usize> {
        let mut r = Vec::new();
        let push_guard = |g: &Guard, r: &mut Vec<usize>| {
            if let Some((reg, _)) = g {
                r.push(num_qubits + reg);
            }
        };
        match self {
            FlatOp::Gate { guard, .. }
            | FlatOp::Gate1Block { guard, .. }
            | FlatOp::TqBlock { guard, .. }
            | FlatOp::Reset { guard, .. } => push_guard(guard, &mut r),
            FlatOp::Barrier { .. } => {}
            FlatOp::Measure { target, guard, .. } => {
                r.push(num_qubits + target.reg);
                push_guard(guard, &mut r);
            }
            FlatOp::MeasBlock { targets, guard } | FlatOp::Fused { targets, guard, .. } => {
                for (_, c) in targets {
                    r.push(num_qubits + c.reg);
                }
                push_guard(guard, &mut r);
            }
            FlatOp::Decode { bits, raw, log, syn, guard, .. } => {
                r.extend([
                    num_qubits + bits,
                    num_qubits + raw.reg,
                    num_qubits + log.reg,
                    num_qubits + syn,
                ]);
                push_guard(guard, &mut r);
            }
        }
        r
    }
}

struct FlatProgram {
    ops: Vec<FlatOp>,
    ticks: Vec<u32>,
    /// RUS flag registers checked at end of shot; nonzero means discard.
    rus_flags: Vec<usize>,
    num_qubits: usize,
    /// Program qubit slot -> quantum register index (for factor splitting).
    slot_reg: Vec<usize>,
}

fn flatten(program: &LogicalProgram) -> FlatProgram {
    let mut ops = Vec::new();
    let mut rus_flags = Vec::new();
    flatten_stmts(program, &program.stmts, None, false, &mut ops, &mut rus_flags);
    let ops = fuse_gate_runs(ops);
    let num_qubits = program.num_qubits() as usize;
    let ticks = schedule(&ops, num_qubits, program.cregs.len());
    let mut slot_reg = Vec::with_capacity(num_qubits);
    for (r, reg) in program.qregs.iter().enumerate() {
        slot_reg.extend(std::iter::repeat(r).take(reg.width as usize));
    }
    FlatProgram { ops, ticks, rus_flags, num_qubits, slot_reg }
}

/// Merge maximal runs of the same single-qubit gate on distinct qubits with
/// matching guards into one transversal-layer op.
fn fuse_gate_runs(ops: Vec<FlatOp>) -> Vec<FlatOp> {
    let mut out: Vec<FlatOp> = Vec::with_capacity(ops.len());
    for op in ops {
        if let FlatOp::Gate { gate, ref slots, ref guard } = op {
            if gate.arity() == 1 {
                if let Some(FlatOp::Gate1Block { gate: g2, slots: s2, guard: gd2 }) =
                    out.last_mut()
                {
                    if *g2 == gate && *gd2 == *guard && !s2.contains(&slots[0]) {
                        s2.push(slots[0]);
                        continue;
                    }
                }
                if let Some(FlatOp::Gate { gate: g2, slots: s2, guard: gd2 }) = out.last() {
                    if g2.arity() == 1 && *g2 == gate && *gd2 == *guard && s2[0] != slots[0] {
                        let first = s2[0];
                        out.pop();
                        out.push(FlatOp::Gate1Block {
                            gate,
                            slots: vec![first, slots[0]],
                            guard: *guard,
                        });
                        continue;
                    }
                }
            }
        }
        out.push(op);
    }
    out
}

fn flatten_stmts(
    program: &LogicalProgram,
    stmts: &[Stmt],
    guard: Guard,
    in_teleport: bool,
    ops: &mut Vec<FlatOp>,
    rus_flags: &mut Vec<usize>,
) {
    let mut i = 0;
    while i < stmts.len() {
        // Fusion window: a transversal-CX block followed by a MeasDecode
        // block over exactly the CX targets, inside a teleport gadget.
        if in_teleport {
            if let (Some(cx_block), Some(next)) = (as_kind(&stmts[i], is_cx_block), stmts.get(i + 1))
            {
                if let Some(md) = as_kind(next, is_meas_block) {
                    if let Some(op) = try_fuse(program, cx_block, md, guard) {
                        let (fused, decode) = op;
                        ops.push(fused);
                        ops.push(decode);
                        i += 2;
                        continue;
                    }
                }
            }
        }
        flatten_one(program, &stmts[i], guard, in_teleport, ops, rus_flags);
        i += 1;
    }
}

type BlockRef<'a> = (&'a crate::ir::BlockMeta, &'a [Stmt]);

fn as_kind<'a>(s: &'a Stmt, pred: impl Fn(&BlockKind) -> bool) -> Option<BlockRef<'a>> {
    match s {
        Stmt::Block { meta, stmts } if pred(&meta.kind) => Some((meta, stmts)),
        _ => None,
    }
}

fn is_cx_block(k: &BlockKind) -> bool {
    matches!(k, BlockKind::TransversalCx { .. })
}

/// A transversal block of identical disjoint two-qubit gates as one op.
fn as_tq_block(program: &LogicalProgram, stmts: &[Stmt], guard: Guard) -> Option<FlatOp> {
    let mut pairs = Vec::new();
    let mut kind: Option<Gate> = None;
    let mut used = std::collections::HashSet::new();
    for s in stmts {
        match s {
            Stmt::Gate { gate: g @ (Gate::Cx | Gate::Cz), qubits } if qubits.len() == 2 => {
                if kind.get_or_insert(*g) != g {
                    return None;
                }
                let a = program.qubit_slot(qubits[0]);
                let b = program.qubit_slot(qubits[1]);
                if !used.insert(a) || !used.insert(b) {
                    return None;
                }
                pairs.push((a, b));
            }
            Stmt::Comment(_) => {}
            _ => return None,
        }
    }
    Some(FlatOp::TqBlock { gate: kind?, pairs, guard })
}

fn is_meas_block(k: &BlockKind) -> bool {
    matches!(k, BlockKind::MeasDecode { .. })
}

fn try_fuse(
    program: &LogicalProgram,
    cx_block: BlockRef<'_>,
    md_block: BlockRef<'_>,
    outer_guard: Guard,
) -> Option<(FlatOp, FlatOp)> {
    let (cx_meta, cx_stmts) = cx_block;
    let (md_meta, md_stmts) = md_block;
    if cx_meta.guard != md_meta.guard {
        return None;
    }
    let guard = cx_meta.guard.or(outer_guard);
    let mut pairs = Vec::new();
    for s in cx_stmts {
        match s {
            Stmt::Gate { gate: Gate::Cx, qubits } if qubits.len() == 2 => {
                pairs.push((program.qubit_slot(qubits[0]), program.qubit_slot(qubits[1])));
            }
            Stmt::Comment(_) => {}
            _ => return None,
        }
    }
    let mut targets = Vec::new();
    let mut decode = None;
    for s in md_stmts {
        match s {
            Stmt::Measure { qubit, target } => {
                targets.push((program.qubit_slot(*qubit), *target));
            }
            Stmt::Gate { .. } => return None, // basis-change gates present
            Stmt::Comment(_) => {}
            _ => return None,
        }
    }
    if let BlockKind::MeasDecode { bits, raw, log, syn, postselect, .. } = md_meta.kind {
        decode = Some(FlatOp::Decode { bits, raw, log, syn, postselect, guard });
    }
    let decode = decode?;
    if pairs.len() != targets.len() || pairs.is_empty() {
        return None;
    }
    let measured: std::collections::HashSet<usize> = targets.iter().map(|&(s, _)| s).collect();
    if !pairs.iter().all(|&(_, t)| measured.contains(&t)) {
        return None;
    }
    Some((FlatOp::Fused { pairs, targets, guard }, decode))
}

fn flatten_one(
    program: &LogicalProgram,
    stmt: &Stmt,
    guard: Guard,
    in_teleport: bool,
    ops: &mut Vec<FlatOp>,
    rus_flags: &mut Vec<usize>,
) {
    match stmt {
        Stmt::Gate { gate, qubits } => ops.push(FlatOp::Gate {
            gate: *gate,
            slots: qubits.iter().map(|&q| program.qubit_slot(q)).collect(),
            guard,
        }),
        Stmt::Measure { qubit, target } => ops.push(FlatOp::Measure {
            slot: program.qubit_slot(*qubit),
            target: *target,
            guard,
        }),
        Stmt::Reset { qubit } => {
            ops.push(FlatOp::Reset { slot: program.qubit_slot(*qubit), guard })
        }
        Stmt::Barrier { qubits } => ops.push(FlatOp::Barrier {
            slots: qubits.iter().map(|&q| program.qubit_slot(q)).collect(),
        }),
        Stmt::If { creg, value, body } => {
            // A conditional's own guard replaces any enclosing block guard;
            // builders arrange registers so it can only fire downstream of it.
            flatten_one(program, body, Some((*creg, *value)), in_teleport, ops, rus_flags);
        }
        Stmt::Block { meta, stmts } => {
            let inner_guard = meta.guard.or(guard);
            let teleport = in_teleport
                || matches!(
                    meta.kind,
                    BlockKind::Teleport { .. } | BlockKind::RecursiveTeleport { .. }
                );
            match &meta.kind {
                BlockKind::RusInit { flag_reg, .. } | BlockKind::TPrepRus { flag_reg, .. } => {
                    rus_flags.push(*flag_reg);
                }
                _ => {}
            }
            // Transversal two-qubit blocks of plain disjoint gates run as a
            // single sweep.
            if matches!(
                meta.kind,
                BlockKind::TransversalCx { .. } | BlockKind::TransversalCz { .. }
            ) {
                if let Some(op) = as_tq_block(program, stmts, inner_guard) {
                    ops.push(op);
                    return;
                }
            }
            if let BlockKind::MeasDecode { bits, raw, log, syn, postselect, .. } = meta.kind {
                // Basis-change gates flatten normally; the measurements run
                // as one joint block measurement.
                let mut targets = Vec::new();
                for inner in stmts {
                    match inner {
                        Stmt::Measure { qubit, target } => {
                            targets.push((program.qubit_slot(*qubit), *target));
                        }
                        other => {
                            flatten_one(program, other, inner_guard, teleport, ops, rus_flags)
                        }
                    }
                }
                if !targets.is_empty() {
                    ops.push(FlatOp::MeasBlock { targets, guard: inner_guard });
                }
                ops.push(FlatOp::Decode {
                    bits,
                    raw,
                    log,
                    syn,
                    postselect,
                    guard: inner_guard,
                });
                return;
            }
            flatten_stmts(program, stmts, inner_guard, teleport, ops, rus_flags);
        }
        Stmt::Comment(_) => {}
    }
}

/// Greedy as-late-as-possible layering over qubit and register resources.
/// Returns the tick index of each op.
fn schedule(ops: &[FlatOp], num_qubits: usize, num_cregs: usize) -> Vec<u32> {
    let mut later = vec![0u32; num_qubits + num_cregs];
    let mut rev = vec![0u32; ops.len()];
    for (i, op) in ops.iter().enumerate().rev() {
        let mut resources = op.qubit_slots();
        resources.extend(op.creg_resources(num_qubits));
        let lev = resources.iter().map(|&r| later[r]).max().unwrap_or(0);
        rev[i] = lev;
        for &r in &resources {
            later[r] = lev + 1;
        }
    }
    let max = rev.iter().copied().max().unwrap_or(0);
    rev.iter().map(|&l| max - l).collect()
}

// ---------------------------------------------------------------------------
// Shot execution
// ---------------------------------------------------------------------------

struct ShotExec<'p> {
    program: &'p LogicalProgram,
    flat: &'p FlatProgram,
    noise: &'p NoiseModel,
    rng: ChaCha12Rng,
    state: FactoredState,
    /// Program qubit slot -> live simulator qubit.
    qmap: Vec<Option<QubitId>>,
    last_tick: Vec<u32>,
    cstore: ClassicalStore,
    measurements: Vec<MeasEvent>,
    syndromes: Vec<SyndromeEvent>,
    fired_tq: u32,
}

impl<'p> ShotExec<'p> {
    fn new(
        program: &'p LogicalProgram,
        flat: &'p FlatProgram,
        noise: &'p NoiseModel,
        rng: ChaCha12Rng,
    ) -> Self {
        ShotExec {
            program,
            flat,
            noise,
            rng,
            state: FactoredState::new(),
            qmap: vec![None; flat.num_qubits],
            last_tick: vec![0; flat.num_qubits],
            cstore: ClassicalStore::new(program.cregs.len()),
            measurements: Vec::new(),
            syndromes: Vec::new(),
            fired_tq: 0,
        }
    }

    fn guard_passes(&self, guard: &Guard) -> bool {
        match guard {
            Some((reg, value)) => self.cstore.get(*reg) == *value,
            None => true,
        }
    }
    fn qubit(&mut self, slot: usize, tick: u32) -> Result<QubitId, SimError> {
        if let Some(q) = self.qmap[slot] {
            return Ok(q);
        }
        let q = self.state.alloc();
        if self.noise.p_spam > 0.0 && self.rng.gen::<f64>() < self.noise.p_spam {
            self.state.apply_pauli('X', q)?;
        }
        self.qmap[slot] = Some(q);
        self.last_tick[slot] = tick;
        Ok(q)
    }

    fn flush_idle(&mut self, slot: usize, tick: u32) -> Result<(), SimError> {
        if self.noise.p_idle_per_tick > 0.0 {
            if let Some(q) = self.qmap[slot] {
                let gap = tick.saturating_sub(self.last_tick[slot] + 1);
                for _ in 0..gap {
                    if let Some(p) = sample_depolarizing_1q(self.noise.p_idle_per_tick, &mut self.rng)
                    {
                        self.state.apply_pauli(p, q)?;
                    }
                }
            }
        }
        Ok(())
    }

    fn crosstalk(&mut self, measured: &[usize]) -> Result<(), SimError> {
        if self.noise.crosstalk == 0.0 {
            return Ok(());
        }
        for slot in 0..self.qmap.len() {
            if measured.contains(&slot) {
                continue;
            }
            if let Some(q) = self.qmap[slot] {
                if self.state.is_allocated(q) {
                    if let Some(p) = sample_depolarizing_1q(self.noise.crosstalk, &mut self.rng) {
                        self.state.apply_pauli(p, q)?;
                    }
                }
            }
        }
        Ok(())
    }

    fn run_fused(
        &mut self,
        pairs: &[(usize, usize)],
        targets: &[(usize, CBitRef)],
        tick: u32,
    ) -> Result<(), SimError> {
        let k = pairs.len();
        let mut sim_pairs = Vec::with_capacity(k);
        for &(c, t) in pairs {
            let qc = self.qubit(c, tick)?;
            let qt = self.qubit(t, tick)?;
            sim_pairs.push((qc, qt));
        }
        for &(c, t) in pairs {
            self.flush_idle(c, tick)?;
            self.flush_idle(t, tick)?;
        }
        // Depolarizing after each CNOT. Target X components commute with the
        // CNOT and land before the measurement (applied now); target Z
        // components act at the measurement boundary and are unobservable;
        // control components act on the surviving block after contraction.
        let mut post_ctrl: Vec<(char, QubitId)> = Vec::new();
        for &(qc, qt) in &sim_pairs {
            self.fired_tq += 1;
            if let Some((pc, pt)) = sample_depolarizing_2q(self.noise.p2, &mut self.rng) {
                if pc != 'I' {
                    post_ctrl.push((pc, qc));
                }
                if matches!(pt, 'X' | 'Y') {
                    self.state.apply_pauli('X', qt)?;
                }
            }
        }
        let outcome_by_target: std::collections::HashMap<QubitId, bool> = {
            let outcomes = self.state.teleport_contract(&sim_pairs, &mut self.rng)?;
            sim_pairs.iter().map(|&(_, t)| t).zip(outcomes).collect()
        };
        for (p, q) in post_ctrl {
            self.state.apply_pauli(p, q)?;
        }
        // Measured qubits stay allocated (projective semantics): re-create
        // each in its observed state.
        let target_slots: Vec<usize> = targets.iter().map(|&(s, _)| s).collect();
        for &(slot, cbit) in targets {
            let old = self.qmap[slot].expect("measured qubit was allocated");
            let true_bit = outcome_by_target[&old];
            let q = self.state.alloc();
            if true_bit {
                self.state.apply_pauli('X', q)?;
            }
            self.qmap[slot] = Some(q);
            let recorded = true_bit
                ^ (self.noise.p_spam > 0.0 && self.rng.gen::<f64>() < self.noise.p_spam);
            self.cstore.set_bit(cbit, recorded);
            self.measurements.push(MeasEvent { creg: cbit.reg, index: cbit.index, bit: recorded });
            self.last_tick[slot] = tick;
        }
        self.crosstalk(&target_slots)?;
        self.try_register_splits(sim_pairs[0].0)?;
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Public entry points
// ---------------------------------------------------------------------------

fn shot_rng(seed: u64, shot: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(shot);
    rng
}

/// Execute `shots` independent trajectories. Deterministic in
/// (program, noise, shots, seed); shots run in parallel.
pub fn run_program(
    program: &LogicalProgram,
    noise: &NoiseModel,
    shots: u64,
    seed: u64,
) -> Result<Vec<ShotRecord>, ExecError> {
    noise.validate()?;
    let diags = program.validate();
    if let Some(d) = diags.first() {
        return Err(ExecError::Invalid(d.to_string()));
    }
    let flat = flatten(program);
    (0..shots)
        .into_par_iter()
        .map(|shot| {
            ShotExec::new(program, &flat, noise, shot_rng(seed, shot))
                .run_with_fault(shot, None)
                .map_err(ExecError::from)
        })
        .collect()
}

/// A fault injected into a single-shot run, for fault-tolerance testing.
#[derive(Debug, Clone)]
pub enum Fault {
    /// Apply Paulis to program qubit slots right after flat op `flat_index`
    /// executes (skipped when its guard fails).
    PauliAfter { flat_index: usize, paulis: Vec<(usize, char)> },
    /// Flip the recorded bit of the measurement at flat op `flat_index`.
    FlipMeasurement { flat_index: usize },
}

/// Summary of one flattened op, for enumerating fault sites.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlatOpSummary {
    pub index: usize,
    pub kind: FlatOpKind,
    pub slots: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlatOpKind {
    Gate1,
    Gate2,
    /// Transversal single-qubit layer; fault sites are per listed slot.
    Gate1Block,
    /// Transversal two-qubit layer; slots alternate control, target.
    TqBlock,
    Measure,
    MeasBlock,
    Reset,
    Barrier,
    Fused,
    Decode,
}

/// Flattened-op summaries for a program (fault-site enumeration).
pub fn flat_summary(program: &LogicalProgram) -> Vec<FlatOpSummary> {
    let flat = flatten(program);
    flat.ops
        .iter()
        .enumerate()
        .map(|(index, op)| {
            let kind = match op {
                FlatOp::Gate { slots, .. } => {
                    if slots.len() == 2 {
                        FlatOpKind::Gate2
                    } else {
                        FlatOpKind::Gate1
                    }
                }
                FlatOp::Gate1Block { .. } => FlatOpKind::Gate1Block,
                FlatOp::TqBlock { .. } => FlatOpKind::TqBlock,
                FlatOp::Measure { .. } => FlatOpKind::Measure,
                FlatOp::MeasBlock { .. } => FlatOpKind::MeasBlock,
                FlatOp::Reset { .. } => FlatOpKind::Reset,
                FlatOp::Barrier { .. } => FlatOpKind::Barrier,
                FlatOp::Fused { .. } => FlatOpKind::Fused,
                FlatOp::Decode { .. } => FlatOpKind::Decode,
            };
            FlatOpSummary { index, kind, slots: op.qubit_slots() }
        })
        .collect()
}

/// Result of a single-shot run with state access, for verification oracles.
pub struct SingleRun {
    pub state: FactoredState,
    /// Program qubit slot -> simulator qubit (None if never touched).
    pub qubit_ids: Vec<Option<QubitId>>,
    pub record: ShotRecord,
}

/// Run one shot, optionally with an injected fault, and hand back the final
/// state. Noise may be zero for deterministic oracle checks.
pub fn simulate_single(
    program: &LogicalProgram,
    noise: &NoiseModel,
    seed: u64,
    shot: u64,
    fault: Option<&Fault>,
) -> Result<SingleRun, ExecError> {
    noise.validate()?;
    let diags = program.validate();
    if let Some(d) = diags.first() {
        return Err(ExecError::Invalid(d.to_string()));
    }
    let flat = flatten(program);
    let mut exec = ShotExec::new(program, &flat, noise, shot_rng(seed, shot));
    let record = exec.run_with_fault(shot, fault)?;
    Ok(SingleRun { state: exec.state, qubit_ids: exec.qmap.clone(), record })
}

impl<'p> ShotExec<'p> {
    fn run_with_fault(&mut self, shot: u64, fault: Option<&Fault>) -> Result<ShotRecord, SimError> {
        // Mirror of run(), with fault hooks; kept separate so the hot path
        // stays branch-free.
        for (i, op) in self.flat.ops.iter().enumerate() {
            let tick = self.flat.ticks[i];
            let flip_meas = matches!(fault, Some(Fault::FlipMeasurement { flat_index }) if *flat_index == i);
            let executed = self.exec_one(op, tick, flip_meas)?;
            if executed {
                if let Some(Fault::PauliAfter { flat_index, paulis }) = fault {
                    if *flat_index == i {
                        for &(slot, p) in paulis {
                            if let Some(q) = self.qmap[slot] {
                                self.state.apply_pauli(p, q)?;
                            }
                        }
                    }
                }
            }
        }
        let rus_discard = self.flat.rus_flags.iter().any(|&f| self.cstore.get(f) != 0);
        let detected = self
            .syndromes
            .iter()
            .any(|s| s.postselect && s.record.detected);
        let registers = self
            .program
            .cregs
            .iter()
            .enumerate()
            .map(|(i, r)| (r.name.clone(), self.cstore.get(i)))
            .collect();
        Ok(ShotRecord {
            shot,
            registers,
            measurements: std::mem::take(&mut self.measurements),
            syndromes: std::mem::take(&mut self.syndromes),
            rus_discard,
            detected,
            fired_tq: self.fired_tq,
        })
    }

    /// After a block leaves a wide factor, peel off register groups that are
    /// no longer entangled with the rest; keeps later sweeps small.
    fn try_register_splits(&mut self, witness: QubitId) -> Result<(), SimError> {
        loop {
            if !self.state.is_allocated(witness) {
                return Ok(());
            }
            let width = self.state.factor_width_of(witness).unwrap_or(0);
            if width < 9 {
                return Ok(());
            }
            let members = self.state.factor_qubits_of(witness);
            let mut slot_of: std::collections::HashMap<QubitId, usize> = Default::default();
            for (slot, q) in self.qmap.iter().enumerate() {
                if let Some(q) = q {
                    slot_of.insert(*q, slot);
                }
            }
            let mut by_reg: std::collections::HashMap<usize, Vec<QubitId>> = Default::default();
            for q in members {
                if let Some(&slot) = slot_of.get(&q) {
                    by_reg.entry(self.flat.slot_reg[slot]).or_default().push(q);
                }
            }
            let mut any = false;
            let mut groups: Vec<_> = by_reg.into_iter().collect();
            groups.sort_by_key(|(reg, _)| *reg);
            for (_, qs) in groups {
                if qs.len() >= 4 && qs.len() < self.state.factor_width_of(qs[0]).unwrap_or(0)
                    && self.state.try_split(&qs)?
                {
                    any = true;
                }
            }
            if !any {
                return Ok(());
            }
        }
    }

    fn exec_one(&mut self, op: &FlatOp, tick: u32, flip_meas: bool) -> Result<bool, SimError> {
        match op {
            FlatOp::Barrier { .. } => Ok(false),
            FlatOp::Gate1Block { gate, slots, guard } => {
                if !self.guard_passes(guard) {
                    return Ok(false);
                }
                let qs: Vec<QubitId> = slots
                    .iter()
                    .map(|&s| self.qubit(s, tick))
                    .collect::<Result<_, _>>()?;
                for &s in slots {
                    self.flush_idle(s, tick)?;
                }
                let m = gate.matrix1().expect("single-qubit gate");
                self.state.apply_1q_block(m, &qs)?;
                for &q in &qs {
                    if let Some(p) = sample_depolarizing_1q(self.noise.p1, &mut self.rng) {
                        self.state.apply_pauli(p, q)?;
                    }
                }
                for &s in slots {
                    self.last_tick[s] = tick;
                }
                Ok(true)
            }
            FlatOp::TqBlock { gate, pairs, guard } => {
                if !self.guard_passes(guard) {
                    return Ok(false);
                }
                let mut sim_pairs = Vec::with_capacity(pairs.len());
                for &(a, b) in pairs {
                    sim_pairs.push((self.qubit(a, tick)?, self.qubit(b, tick)?));
                }
                for &(a, b) in pairs {
                    self.flush_idle(a, tick)?;
                    self.flush_idle(b, tick)?;
                }
                match gate {
                    Gate::Cx => self.state.apply_cx_pairs(&sim_pairs)?,
                    Gate::Cz => self.state.apply_cz_pairs(&sim_pairs)?,
                    _ => unreachable!("only cx/cz fuse"),
                }
                for &(qa, qb) in &sim_pairs {
                    self.fired_tq += 1;
                    if let Some((pa, pb)) = sample_depolarizing_2q(self.noise.p2, &mut self.rng) {
                        self.state.apply_pauli(pa, qa)?;
                        self.state.apply_pauli(pb, qb)?;
                    }
                }
                for &(a, b) in pairs {
                    self.last_tick[a] = tick;
                    self.last_tick[b] = tick;
                }
                Ok(true)
            }
            FlatOp::MeasBlock { targets, guard } => {
                if !self.guard_passes(guard) {
                    return Ok(false);
                }
                let qs: Vec<QubitId> = targets
                    .iter()
                    .map(|&(s, _)| self.qubit(s, tick))
                    .collect::<Result<_, _>>()?;
                for &(s, _) in targets {
                    self.flush_idle(s, tick)?;
                }
                // Pick a witness left behind in the measured factor, for
                // post-measurement factor splitting.
                let witness = self
                    .state
                    .factor_qubits_of(qs[0])
                    .into_iter()
                    .find(|q| !qs.contains(q));
                let outcomes = self.state.measure_block(&qs, &mut self.rng)?;
                for (i, (&(slot, cbit), true_bit)) in targets.iter().zip(&outcomes).enumerate() {
                    let mut recorded = true_bit
                        ^ (self.noise.p_spam > 0.0 && self.rng.gen::<f64>() < self.noise.p_spam);
                    if flip_meas && i == 0 {
                        recorded = !recorded;
                    }
                    self.cstore.set_bit(cbit, recorded);
                    self.measurements.push(MeasEvent {
                        creg: cbit.reg,
                        index: cbit.index,
                        bit: recorded,
                    });
                    self.last_tick[slot] = tick;
                }
                let slots: Vec<usize> = targets.iter().map(|&(s, _)| s).collect();
                self.crosstalk(&slots)?;
                if let Some(w) = witness {
                    self.try_register_splits(w)?;
                }
                Ok(true)
            }
            FlatOp::Gate { gate, slots, guard } => {
                if !self.guard_passes(guard) {
                    return Ok(false);
                }
                let qs: Vec<QubitId> = slots
                    .iter()
                    .map(|&s| self.qubit(s, tick))
                    .collect::<Result<_, _>>()?;
                for &s in slots {
                    self.flush_idle(s, tick)?;
                }
                self.state.apply_gate(*gate, &qs)?;
                match qs.len() {
                    1 => {
                        if let Some(p) = sample_depolarizing_1q(self.noise.p1, &mut self.rng) {
                            self.state.apply_pauli(p, qs[0])?;
                        }
                    }
                    2 => {
                        self.fired_tq += 1;
                        if let Some((pa, pb)) = sample_depolarizing_2q(self.noise.p2, &mut self.rng)
                        {
                            self.state.apply_pauli(pa, qs[0])?;
                            self.state.apply_pauli(pb, qs[1])?;
                        }
                    }
                    _ => {}
                }
                for &s in slots {
                    self.last_tick[s] = tick;
                }
                Ok(true)
            }
            FlatOp::Measure { slot, target, guard } => {
                if !self.guard_passes(guard) {
                    return Ok(false);
                }
                let q = self.qubit(*slot, tick)?;
                self.flush_idle(*slot, tick)?;
                let true_bit = self.state.measure_isolate(q, &mut self.rng)?;
                let mut recorded = true_bit
                    ^ (self.noise.p_spam > 0.0 && self.rng.gen::<f64>() < self.noise.p_spam);
                if flip_meas {
                    recorded = !recorded;
                }
                self.cstore.set_bit(*target, recorded);
                self.measurements.push(MeasEvent {
                    creg: target.reg,
                    index: target.index,
                    bit: recorded,
                });
                self.last_tick[*slot] = tick;
                self.crosstalk(&[*slot])?;
                Ok(true)
            }
            FlatOp::Reset { slot, guard } => {
                if !self.guard_passes(guard) {
                    return Ok(false);
                }
                if let Some(q) = self.qmap[*slot] {
                    self.flush_idle(*slot, tick)?;
                    self.state.measure(q, true, &mut self.rng)?;
                    self.qmap[*slot] = None;
                }
                self.qubit(*slot, tick)?;
                self.last_tick[*slot] = tick;
                Ok(true)
            }
            FlatOp::Fused { pairs, targets, guard } => {
                if !self.guard_passes(guard) {
                    return Ok(false);
                }
                self.run_fused(pairs, targets, tick)?;
                Ok(true)
            }
            FlatOp::Decode { bits, raw, log, syn, postselect, guard } => {
                if !self.guard_passes(guard) {
                    return Ok(false);
                }
                let rec = decode_measurement(self.cstore.get(*bits) as u8);
                self.cstore.set_bit(*raw, rec.raw_logical);
                self.cstore.set_bit(*log, rec.decoded_logical);
                self.cstore.set(*syn, rec.syndrome as u64);
                self.syndromes.push(SyndromeEvent { record: rec.into(), postselect: *postselect });
                Ok(true)
            }
        }
    }
}

/// Serialize shots as JSON lines: one object per shot mapping register name
/// to integer value, plus the discard flags.
pub fn shots_to_jsonl(records: &[ShotRecord]) -> String {
    let mut out = String::new();
    for r in records {
        let mut obj = serde_json::Map::new();
        obj.insert("shot".into(), r.shot.into());
        for (k, v) in &r.registers {
            obj.insert(k.clone(), (*v).into());
        }
        obj.insert("rus_discard".into(), r.rus_discard.into());
        obj.insert("detected".into(), r.detected.into());
        out.push_str(&serde_json::Value::Object(obj).to_string());
        out.push('\n');
    }
    out
}

/// Aggregate CSV: program id, shot count, then one row per register value
/// with its count.
pub fn shots_to_csv(program_id: &str, records: &[ShotRecord]) -> String {
    let mut hist: BTreeMap<(String, u64), u64> = BTreeMap::new();
    for r in records {
        for (name, value) in &r.registers {
            *hist.entry((name.clone(), *value)).or_insert(0) += 1;
        }
    }
    let mut out = String::from("program,shots,register,value,count\n");
    for ((name, value), count) in hist {
        out.push_str(&format!("{},{},{},{},{}\n", program_id, records.len(), name, value, count));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{BlockMeta, QubitRef};
    use crate::steane::builder::{ProgramBuilder, SingleQubitPrep};

    fn bell_program() -> LogicalProgram {
        let mut p = LogicalProgram::new("bell");
        let q = p.add_qreg("q", 2);
        let c = p.add_creg("c", 2);
        p.stmts.push(Stmt::Gate {
            gate: Gate::H,
            qubits: vec![QubitRef { reg: q, index: 0 }],
        });
        p.stmts.push(Stmt::Gate {
            gate: Gate::Cx,
            qubits: vec![QubitRef { reg: q, index: 0 }, QubitRef { reg: q, index: 1 }],
        });
        for i in 0..2 {
            p.stmts.push(Stmt::Measure {
                qubit: QubitRef { reg: q, index: i },
                target: CBitRef { reg: c, index: i },
            });
        }
        p
    }

    #[test]
    fn noiseless_bell_pair_has_even_parity_always() {
        let records = run_program(&bell_program(), &NoiseModel::zero(), 1000, 42).unwrap();
        assert_eq!(records.len(), 1000);
        for r in &records {
            let c = r.registers["c"];
            assert!(c == 0 || c == 3, "odd parity {c}");
        }
    }

    #[test]
    fn identical_seed_gives_identical_records() {
        let noise = NoiseModel { p1: 0.01, p2: 0.02, p_spam: 0.01, p_idle_per_tick: 0.001, crosstalk: 0.001 };
        let a = run_program(&bell_program(), &noise, 200, 7).unwrap();
        let b = run_program(&bell_program(), &noise, 200, 7).unwrap();
        assert_eq!(a, b);
        let c = run_program(&bell_program(), &noise, 200, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn two_qubit_depolarizing_parity_rate() {
        // p2 = 0.01 after one CX on |00>: 8 of the 15 Paulis flip the ZZ
        // parity, so parity-1 frequency ~ 0.01 * 8/15.
        let mut p = LogicalProgram::new("par");
        let q = p.add_qreg("q", 2);
        let c = p.add_creg("c", 2);
        p.stmts.push(Stmt::Gate {
            gate: Gate::Cx,
            qubits: vec![QubitRef { reg: q, index: 0 }, QubitRef { reg: q, index: 1 }],
        });
        for i in 0..2 {
            p.stmts.push(Stmt::Measure {
                qubit: QubitRef { reg: q, index: i },
                target: CBitRef { reg: c, index: i },
            });
        }
        let noise = NoiseModel { p2: 0.01, ..NoiseModel::zero() };
        let shots = 100_000u64;
        let records = run_program(&p, &noise, shots, 99).unwrap();
        let odd = records
            .iter()
            .filter(|r| (r.registers["c"].count_ones()) % 2 == 1)
            .count() as f64;
        let expect = 0.01 * 8.0 / 15.0;
        let sigma = (expect * (1.0 - expect) / shots as f64).sqrt();
        let freq = odd / shots as f64;
        assert!(
            (freq - expect).abs() < 3.0 * sigma,
            "freq {freq} expect {expect} sigma {sigma}"
        );
    }

    #[test]
    fn idle_ticks_match_density_matrix_oracle() {
        // Identity circuit of N barrier ticks on one qubit, then measure.
        // The model applies (ticks between touches - 1 boundary) idle
        // depolarizing events; the oracle composes the same number of
        // single-qubit depolarizing channels on |0><0| and predicts the
        // flip probability exactly.
        let n_barriers = 101u32;
        let p_idle = 0.01;
        let mut p = LogicalProgram::new("idle");
        let q = p.add_qreg("q", 1);
        let c = p.add_creg("c", 1);
        // First touch: an explicit reset pins the allocation tick.
        p.stmts.push(Stmt::Reset { qubit: QubitRef { reg: q, index: 0 } });
        for _ in 0..n_barriers {
            p.stmts.push(Stmt::Barrier { qubits: vec![QubitRef { reg: q, index: 0 }] });
        }
        p.stmts.push(Stmt::Measure {
            qubit: QubitRef { reg: q, index: 0 },
            target: CBitRef { reg: c, index: 0 },
        });
        let noise = NoiseModel { p_idle_per_tick: p_idle, ..NoiseModel::zero() };
        let shots = 200_000u64;
        let records = run_program(&p, &noise, shots, 5).unwrap();
        let ones = records.iter().filter(|r| r.registers["c"] == 1).count() as f64;
        let freq = ones / shots as f64;

        // Density-matrix oracle: rho starts |0><0|; each idle event applies
        // X, Y or Z with probability p/3 each. Track p(1) = rho_11:
        // X and Y flip the population, Z leaves it.
        let idle_events = n_barriers; // ticks between reset and measure, minus one boundary
        let mut p1 = 0.0f64;
        for _ in 0..idle_events {
            p1 = (1.0 - 2.0 * p_idle / 3.0) * p1 + (2.0 * p_idle / 3.0) * (1.0 - p1);
        }
        let sigma = (p1 * (1.0 - p1) / shots as f64).sqrt();
        assert!(
            (freq - p1).abs() < 3.0 * sigma.max(1e-4),
            "freq {freq} oracle {p1}"
        );
    }

    #[test]
    fn readout_flip_rate_matches_p_spam() {
        let mut p = LogicalProgram::new("spam");
        let q = p.add_qreg("q", 1);
        let c = p.add_creg("c", 1);
        p.stmts.push(Stmt::Measure {
            qubit: QubitRef { reg: q, index: 0 },
            target: CBitRef { reg: c, index: 0 },
        });
        let noise = NoiseModel { p_spam: 0.05, ..NoiseModel::zero() };
        let shots = 100_000u64;
        let records = run_program(&p, &noise, shots, 3).unwrap();
        let ones = records.iter().filter(|r| r.registers["c"] == 1).count() as f64;
        let freq = ones / shots as f64;
        // Prep flip then readout flip: P(read 1) = p(1-p) + (1-p)p.
        let expect = 2.0 * 0.05 * 0.95;
        let sigma = (expect * (1.0 - expect) / shots as f64).sqrt();
        assert!((freq - expect).abs() < 3.0 * sigma, "freq {freq} expect {expect}");
    }

    #[test]
    fn conditional_execution_follows_register() {
        let mut p = LogicalProgram::new("cond");
        let q = p.add_qreg("q", 1);
        let c = p.add_creg("c", 1);
        let d = p.add_creg("d", 1);
        // Measure |0> into c (reads 0), conditionally flip on c==0, measure.
        p.stmts.push(Stmt::Measure {
            qubit: QubitRef { reg: q, index: 0 },
            target: CBitRef { reg: c, index: 0 },
        });
        p.stmts.push(Stmt::If {
            creg: c,
            value: 0,
            body: Box::new(Stmt::Gate {
                gate: Gate::X,
                qubits: vec![QubitRef { reg: q, index: 0 }],
            }),
        });
        p.stmts.push(Stmt::Measure {
            qubit: QubitRef { reg: q, index: 0 },
            target: CBitRef { reg: d, index: 0 },
        });
        let records = run_program(&p, &NoiseModel::zero(), 10, 1).unwrap();
        for r in &records {
            assert_eq!(r.registers["c"], 0);
            assert_eq!(r.registers["d"], 1);
        }
    }

    #[test]
    fn guarded_block_skips_when_guard_fails() {
        let mut p = LogicalProgram::new("guard");
        let q = p.add_qreg("q", 1);
        let c = p.add_creg("c", 1);
        let d = p.add_creg("d", 1);
        p.stmts.push(Stmt::Block {
            meta: BlockMeta {
                kind: crate::ir::BlockKind::Span { label: "g".into() },
                guard: Some((c, 1)),
            },
            stmts: vec![Stmt::Gate {
                gate: Gate::X,
                qubits: vec![QubitRef { reg: q, index: 0 }],
            }],
        });
        p.stmts.push(Stmt::Measure {
            qubit: QubitRef { reg: q, index: 0 },
            target: CBitRef { reg: d, index: 0 },
        });
        let records = run_program(&p, &NoiseModel::zero(), 5, 1).unwrap();
        for r in &records {
            assert_eq!(r.registers["d"], 0, "guarded X must not fire");
        }
    }

    #[test]
    fn parsed_back_program_simulates_identically() {
        // A teleport gadget exercises blocks, guards, decode metadata and
        // the fused path; the parsed-back program must reproduce records.
        let mut b = ProgramBuilder::new("roundtrip");
        let q = b.add_block("q");
        let a = b.add_block("a");
        b.encode_nonft(q, &SingleQubitPrep::Plus, false, None);
        crate::steane::gadgets::teleport_p_gate(
            &mut b,
            q,
            a,
            std::f64::consts::FRAC_PI_4,
            crate::steane::gadgets::TeleportMethod::One,
            None,
        )
        .unwrap();
        b.meas_decode(q, crate::ir::MeasBasis::X, false, "fin", None);
        let program = b.finish();
        let text = crate::ir::qasm::emit_qasm(&program).unwrap();
        let parsed = crate::ir::qasm::parse_qasm(&text).unwrap();
        assert_eq!(crate::ir::qasm::emit_qasm(&parsed).unwrap(), text);

        let noise = NoiseModel { p1: 0.002, p2: 0.01, p_spam: 0.005, p_idle_per_tick: 0.0005, crosstalk: 0.0 };
        let r1 = run_program(&program, &noise, 100, 77).unwrap();
        let r2 = run_program(&parsed, &noise, 100, 77).unwrap();
        assert_eq!(r1, r2);
    }

    #[test]
    fn jsonl_and_csv_serialization() {
        let records = run_program(&bell_program(), &NoiseModel::zero(), 4, 1).unwrap();
        let jsonl = shots_to_jsonl(&records);
        assert_eq!(jsonl.lines().count(), 4);
        assert!(jsonl.lines().next().unwrap().contains("\"shot\":0"));
        let csv = shots_to_csv("bell", &records);
        assert!(csv.starts_with("program,shots,register,value,count\n"));
        assert!(csv.contains("bell,4,c,"));
    }
}
