//! Teleportation gadgets and derived constructions.
//!
//! A phase-gate gadget consumes a freshly encoded |theta> ancilla block via
//! a transversal CNOT and a decoded destructive measurement; the surviving
//! block receives P(theta) after a conditional correction. Method one keeps
//! the original data block (ancilla is measured); method two measures the
//! data block and the ancilla becomes the output, with an extra logical X in
//! the correction. Conditional gadgets always use method one so the output
//! block identity is static.

use crate::ir::{BlockKind, CBitRef, MeasBasis, QubitRef, Stmt};
use crate::sim::gates::Gate;

use super::builder::{
    BuildError, Logical1q, LogicalBlock, MeasRegs, ProgramBuilder, SingleQubitPrep,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TeleportMethod {
    One,
    Two,
}

impl TeleportMethod {
    fn id(self) -> u8 {
        match self {
            TeleportMethod::One => 1,
            TeleportMethod::Two => 2,
        }
    }
}

/// Output of a gadget: the block now holding the data, and the decode
/// registers of the gadget measurement.
#[derive(Debug, Clone, Copy)]
pub struct GadgetOut {
    pub output: LogicalBlock,
    pub regs: MeasRegs,
}

/// Express P(theta) as a transversal word over {S, Z} when theta is a
/// multiple of pi/2 (empty word for 0 mod 2pi).
pub fn transversal_phase_word(theta: f64) -> Option<Vec<Logical1q>> {
    let quarter = theta / std::f64::consts::FRAC_PI_2;
    let k = quarter.round();
    if (quarter - k).abs() > 1e-9 {
        return None;
    }
    Some(match k.rem_euclid(4.0) as u32 {
        0 => vec![],
        1 => vec![Logical1q::S],
        2 => vec![Logical1q::Z],
        3 => vec![Logical1q::Sdg],
        _ => unreachable!(),
    })
}

/// Phase-gate teleportation with the default non-fault-tolerant |theta>
/// ancilla preparation.
pub fn teleport_p_gate(
    b: &mut ProgramBuilder,
    data: LogicalBlock,
    anc: LogicalBlock,
    theta: f64,
    method: TeleportMethod,
    guard: Option<(usize, u64)>,
) -> Result<GadgetOut, BuildError> {
    teleport_p_gate_with(b, data, anc, theta, method, guard, |b, anc| {
        b.encode_nonft(anc, &SingleQubitPrep::Phase(theta), true, None);
    })
}

/// Phase-gate teleportation with a caller-supplied ancilla preparation
/// (used by the twirled T benchmark and the partially fault-tolerant |T>
/// preparation).
pub fn teleport_p_gate_with(
    b: &mut ProgramBuilder,
    data: LogicalBlock,
    anc: LogicalBlock,
    theta: f64,
    method: TeleportMethod,
    guard: Option<(usize, u64)>,
    prep: impl FnOnce(&mut ProgramBuilder, LogicalBlock),
) -> Result<GadgetOut, BuildError> {
    if data.reg == anc.reg {
        return Err(BuildError::BlockOverlap);
    }
    let correction = transversal_phase_word(2.0 * theta)
        .ok_or(BuildError::CorrectionNotTransversal(2.0 * theta))?;
    b.begin_block(BlockKind::Teleport { method: method.id() }, guard);
    prep(b, anc);
    let prefix = b.next_meas_prefix();
    let (output, regs) = match method {
        TeleportMethod::One => {
            b.transversal_cx(data, anc, None)?;
            let regs = b.meas_decode(anc, MeasBasis::Z, true, &prefix, None);
            b.logical_word(data, &correction, Some((regs.log.reg, 1)));
            (data, regs)
        }
        TeleportMethod::Two => {
            b.transversal_cx(anc, data, None)?;
            let regs = b.meas_decode(data, MeasBasis::Z, true, &prefix, None);
            let mut word = vec![Logical1q::X];
            word.extend(correction);
            b.logical_word(anc, &word, Some((regs.log.reg, 1)));
            (anc, regs)
        }
    };
    b.end_block();
    Ok(GadgetOut { output, regs })
}

/// P(pi/2^k) (or its inverse) by recursive teleportation: the outer gadget's
/// conditional correction P(pi/2^{k-1}) is itself teleported, bottoming out
/// at the transversal logical S. All levels use method one, so the data
/// block is static and the single ancilla register is reused level by level
/// (each level's ancilla is consumed before the next is prepared).
pub fn recursive_p_gate(
    b: &mut ProgramBuilder,
    data: LogicalBlock,
    anc: LogicalBlock,
    k: u32,
    negative: bool,
    guard: Option<(usize, u64)>,
) -> Result<(), BuildError> {
    if k < 2 {
        return Err(BuildError::BadRecursionLevel(k));
    }
    let sign = if negative { -1.0 } else { 1.0 };
    let theta = sign * std::f64::consts::PI / f64::from(1u32 << k);
    if k == 2 {
        teleport_p_gate(b, data, anc, theta, TeleportMethod::One, guard)?;
        return Ok(());
    }
    b.begin_block(BlockKind::RecursiveTeleport { k }, guard);
    b.encode_nonft(anc, &SingleQubitPrep::Phase(theta), true, None);
    b.transversal_cx(data, anc, None)?;
    let prefix = b.next_meas_prefix();
    let regs = b.meas_decode(anc, MeasBasis::Z, true, &prefix, None);
    recursive_p_gate(b, data, anc, k - 1, negative, Some((regs.log.reg, 1)))?;
    b.end_block();
    Ok(())
}

/// Controlled-P(sign * pi/2) via the two-CNOT, three-T decomposition, all
/// T gates teleported with method two. Returns the updated block handles
/// (method two relabels) as (control, target, free).
pub fn controlled_s(
    b: &mut ProgramBuilder,
    control: LogicalBlock,
    target: LogicalBlock,
    free: LogicalBlock,
    negative: bool,
) -> Result<(LogicalBlock, LogicalBlock, LogicalBlock), BuildError> {
    let sign = if negative { -1.0 } else { 1.0 };
    let t = sign * std::f64::consts::FRAC_PI_4;
    let g1 = teleport_p_gate(b, control, free, t, TeleportMethod::Two, None)?;
    let (control, free) = (g1.output, control);
    let g2 = teleport_p_gate(b, target, free, t, TeleportMethod::Two, None)?;
    let (target, free) = (g2.output, target);
    b.transversal_cx(control, target, None)?;
    let g3 = teleport_p_gate(b, target, free, -t, TeleportMethod::Two, None)?;
    let (target, free) = (g3.output, target);
    b.transversal_cx(control, target, None)?;
    Ok((control, target, free))
}

/// Ancilla-assisted controlled-P(theta): a temporary-AND block absorbs the
/// control pattern, receives the teleported P(theta), and is uncomputed by a
/// logical Hadamard, a decoded destructive measurement, and a conditional
/// transversal CZ. Consumes the `t` and `m` registers (both end measured /
/// free). The fragment acts as diag(1,1,1,e^{i theta}) on the logical pair.
pub fn ancilla_assisted_cp(
    b: &mut ProgramBuilder,
    a: LogicalBlock,
    bq: LogicalBlock,
    t: LogicalBlock,
    m: LogicalBlock,
    theta: f64,
) -> Result<(), BuildError> {
    if a.reg == bq.reg || t.reg == m.reg || a.reg == t.reg || bq.reg == m.reg {
        return Err(BuildError::BlockOverlap);
    }
    let quarter = std::f64::consts::FRAC_PI_4;
    b.begin_block(BlockKind::AncillaCp, None);
    // Temporary AND of (a, bq) into t: the ladder
    //   t := T H |0>;  CX(bq->t); T~(t); CX(a->t); T(t); CX(bq->t); T~(t);
    //   H(t); S~(t)
    // leaves t = a AND bq with all phases cancelled. Mid-ladder phases are
    // teleported with method two, so t ping-pongs between the two ancilla
    // registers.
    b.encode_nonft(t, &SingleQubitPrep::Phase(quarter), true, None);
    let mut t_cur = t;
    let mut m_cur = m;
    b.transversal_cx(bq, t_cur, None)?;
    let g = teleport_p_gate(b, t_cur, m_cur, -quarter, TeleportMethod::Two, None)?;
    (t_cur, m_cur) = (g.output, t_cur);
    b.transversal_cx(a, t_cur, None)?;
    let g = teleport_p_gate(b, t_cur, m_cur, quarter, TeleportMethod::Two, None)?;
    (t_cur, m_cur) = (g.output, t_cur);
    b.transversal_cx(bq, t_cur, None)?;
    let g = teleport_p_gate(b, t_cur, m_cur, -quarter, TeleportMethod::Two, None)?;
    (t_cur, m_cur) = (g.output, t_cur);
    b.logical_1q(t_cur, Logical1q::H, None);
    b.logical_1q(t_cur, Logical1q::Sdg, None);
    // The injected phase itself.
    let g = teleport_p_gate(b, t_cur, m_cur, theta, TeleportMethod::Two, None)?;
    t_cur = g.output;
    // Uncompute: logical H, destructive Z measurement, conditional CZ.
    b.logical_1q(t_cur, Logical1q::H, None);
    let prefix = b.next_meas_prefix();
    let regs = b.meas_decode(t_cur, MeasBasis::Z, true, &prefix, None);
    b.transversal_cz(a, bq, Some((regs.log.reg, 1)))?;
    b.end_block();
    Ok(())
}

/// Flagged logical-Hadamard measurement (Appendix-style): ancilla in |+>,
/// controlled-H onto each data qubit (decomposed Ry CZ Ry), a flag qubit
/// catching mid-sequence ancilla X faults, X-basis ancilla readout. Writes
/// ancilla then flag outcomes into bits 0 and 1 of `st_reg`; accept on 0.
pub fn flagged_hadamard_measurement(
    b: &mut ProgramBuilder,
    block: LogicalBlock,
    anc: QubitRef,
    flag: QubitRef,
    st_reg: usize,
    guard: Option<(usize, u64)>,
) {
    let quarter = std::f64::consts::FRAC_PI_4;
    b.begin_block(BlockKind::FlaggedHMeas { block: block.reg }, guard);
    b.push_stmt(Stmt::Reset { qubit: anc });
    b.push_stmt(Stmt::Gate { gate: Gate::H, qubits: vec![anc] });
    b.push_stmt(Stmt::Reset { qubit: flag });
    b.push_stmt(Stmt::Gate { gate: Gate::Cx, qubits: vec![anc, flag] });
    for i in 0..7 {
        if i == 6 {
            // Second flag coupling just before the last controlled-H.
            b.push_stmt(Stmt::Gate { gate: Gate::Cx, qubits: vec![anc, flag] });
        }
        let dq = QubitRef { reg: block.reg, index: i };
        b.push_stmt(Stmt::Gate { gate: Gate::Ry(-quarter), qubits: vec![dq] });
        b.push_stmt(Stmt::Gate { gate: Gate::Cz, qubits: vec![anc, dq] });
        b.push_stmt(Stmt::Gate { gate: Gate::Ry(quarter), qubits: vec![dq] });
    }
    b.push_stmt(Stmt::Gate { gate: Gate::H, qubits: vec![anc] });
    b.push_stmt(Stmt::Measure { qubit: anc, target: CBitRef { reg: st_reg, index: 0 } });
    b.push_stmt(Stmt::Measure { qubit: flag, target: CBitRef { reg: st_reg, index: 1 } });
    b.end_block();
}

/// Partially fault-tolerant |T> preparation: repeat-until-success flagged
/// |H> preparation followed by the transversal Cliffords taking |H> to |T>.
/// Returns the flag register (nonzero at end of shot means discard).
pub fn prepare_t_state_partial_ft(
    b: &mut ProgramBuilder,
    block: LogicalBlock,
    anc: QubitRef,
    flag: QubitRef,
    rus_limit: u32,
    prefix: &str,
) -> Result<usize, BuildError> {
    if rus_limit < 1 {
        return Err(BuildError::BadRusLimit);
    }
    let st_regs: Vec<usize> = (1..=rus_limit)
        .map(|k| b.add_creg(&format!("{prefix}a{k}"), 2))
        .collect();
    let flag_reg = *st_regs.last().unwrap();
    b.begin_block(BlockKind::TPrepRus { block: block.reg, flag_reg }, None);
    b.encode_nonft(block, &SingleQubitPrep::HPlus, true, None);
    flagged_hadamard_measurement(b, block, anc, flag, st_regs[0], None);
    for k in 1..rus_limit as usize {
        // Retry on any failure pattern of the previous attempt. Each guarded
        // copy writes the same fresh result register, so at most one fires.
        for v in 1..=3u64 {
            let guard = Some((st_regs[k - 1], v));
            b.encode_nonft(block, &SingleQubitPrep::HPlus, true, guard);
            flagged_hadamard_measurement(b, block, anc, flag, st_regs[k], guard);
        }
    }
    b.end_block();
    // |T> = Rz(pi/2) Rx(pi/2) |H> with Rx = H Rz H, all transversal.
    b.logical_1q(block, Logical1q::H, None);
    b.logical_1q(block, Logical1q::S, None);
    b.logical_1q(block, Logical1q::H, None);
    b.logical_1q(block, Logical1q::S, None);
    Ok(flag_reg)
}
