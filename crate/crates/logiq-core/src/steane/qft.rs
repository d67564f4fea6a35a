//! Logical three-qubit QFT program builders.
//!
//! The circuit is H(q0); CS(q1,q0); CT(q2,q0); H(q1); CS(q2,q1); H(q2) with
//! q0 the most significant input bit and no final swap (outputs are
//! relabeled). The controlled-T comes in two flavors:
//!
//! - recursive: the Barenco decomposition into two CNOTs and three
//!   P(+-pi/8), each by a recursive-teleportation gadget;
//! - ancilla-assisted: a temporary-AND block absorbing the control pair,
//!   with the controlled phases of the AND supplied by teleported T gates.
//!
//! Both fit in four code blocks (28 physical qubits). For the
//! ancilla-assisted method the controlled-T is commuted ahead of the first
//! controlled-S (all controlled phases are diagonal), so the third input
//! block can serve as the AND ancilla and is re-prepared afterwards.

use super::builder::{BuildError, Logical1q, LogicalBlock, ProgramBuilder, SingleQubitPrep};
use super::gadgets::{ancilla_assisted_cp, controlled_s, recursive_p_gate};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CtMethod {
    Recursive,
    Ancilla,
}

impl CtMethod {
    pub fn name(self) -> &'static str {
        match self {
            CtMethod::Recursive => "recursive",
            CtMethod::Ancilla => "ancilla",
        }
    }
}

/// A QFT program under construction: the builder plus the current location
/// of the three logical qubits and the free block.
pub struct Qft3 {
    pub builder: ProgramBuilder,
    /// Blocks holding logical qubits 0, 1, 2 after the circuit (method-two
    /// gadgets relabel blocks).
    pub outputs: [LogicalBlock; 3],
    /// The remaining free block, available for measurement-stage gadgets.
    pub free: LogicalBlock,
}

/// Build the logical QFT on the given three single-qubit input states.
pub fn build_qft3(
    method: CtMethod,
    preps: &[SingleQubitPrep; 3],
    name: &str,
) -> Result<Qft3, BuildError> {
    let mut b = ProgramBuilder::new(name);
    let q0 = b.add_block("q0");
    let q1 = b.add_block("q1");
    let q2 = b.add_block("q2");
    let anc = b.add_block("anc");

    match method {
        CtMethod::Recursive => {
            b.encode_nonft(q0, &preps[0], false, None);
            b.encode_nonft(q1, &preps[1], false, None);
            b.encode_nonft(q2, &preps[2], false, None);
            b.logical_1q(q0, Logical1q::H, None);
            let (q1, q0, free) = controlled_s(&mut b, q1, q0, anc, false)?;
            // Controlled-T(q2, q0) = P(pi/8) on both, CX, P(-pi/8), CX.
            recursive_p_gate(&mut b, q2, free, 3, false, None)?;
            recursive_p_gate(&mut b, q0, free, 3, false, None)?;
            b.transversal_cx(q2, q0, None)?;
            recursive_p_gate(&mut b, q0, free, 3, true, None)?;
            b.transversal_cx(q2, q0, None)?;
            b.logical_1q(q1, Logical1q::H, None);
            let (q2, q1, free) = controlled_s(&mut b, q2, q1, free, false)?;
            b.logical_1q(q2, Logical1q::H, None);
            Ok(Qft3 { builder: b, outputs: [q0, q1, q2], free })
        }
        CtMethod::Ancilla => {
            b.encode_nonft(q0, &preps[0], false, None);
            b.encode_nonft(q2, &preps[2], false, None);
            b.logical_1q(q0, Logical1q::H, None);
            // Controlled-T first (diagonals commute); q1's block is the AND
            // ancilla and is re-prepared as data afterwards.
            ancilla_assisted_cp(&mut b, q2, q0, q1, anc, std::f64::consts::FRAC_PI_4)?;
            b.encode_nonft(q1, &preps[1], false, None);
            let (q1, q0, free) = controlled_s(&mut b, q1, q0, anc, false)?;
            b.logical_1q(q1, Logical1q::H, None);
            let (q2, q1, free) = controlled_s(&mut b, q2, q1, free, false)?;
            b.logical_1q(q2, Logical1q::H, None);
            Ok(Qft3 { builder: b, outputs: [q0, q1, q2], free })
        }
    }
}
