//! Two-qubit logical randomized benchmarking: random Clifford sequences on
//! two code blocks, closed by the exact group inverse, with fault-tolerant
//! initialization and decoded destructive readout.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::clifford::{CliffordElement, Gen, TwoQubitCliffordGroup};
use crate::ir::{LogicalProgram, MeasBasis, QubitRef};
use crate::sim::exec::{run_program, ShotRecord};
use crate::sim::noise::NoiseModel;
use crate::steane::builder::{Logical1q, LogicalBlock, ProgramBuilder};

use super::series::DecaySeries;
use super::ProtocolError;

/// One RB circuit and the register names its survival check reads.
pub struct RbCircuit {
    pub program: LogicalProgram,
    pub length: u32,
    /// Names of the decoded-logical registers for the two blocks.
    pub log_regs: [String; 2],
    /// Expected decoded outcome (always |00> for inverse-closed sequences).
    pub expected: (bool, bool),
    /// Indices of the sampled group elements, for composition checks.
    pub sampled: Vec<usize>,
}

fn apply_gen(b: &mut ProgramBuilder, gen: Gen, blocks: [LogicalBlock; 2]) {
    use Logical1q::*;
    match gen {
        Gen::X0 => b.logical_1q(blocks[0], X, None),
        Gen::Z0 => b.logical_1q(blocks[0], Z, None),
        Gen::Y0 => {
            b.logical_1q(blocks[0], Z, None);
            b.logical_1q(blocks[0], X, None);
        }
        Gen::H0 => b.logical_1q(blocks[0], H, None),
        Gen::S0 => b.logical_1q(blocks[0], S, None),
        Gen::Sdg0 => b.logical_1q(blocks[0], Sdg, None),
        Gen::X1 => b.logical_1q(blocks[1], X, None),
        Gen::Z1 => b.logical_1q(blocks[1], Z, None),
        Gen::Y1 => {
            b.logical_1q(blocks[1], Z, None);
            b.logical_1q(blocks[1], X, None);
        }
        Gen::H1 => b.logical_1q(blocks[1], H, None),
        Gen::S1 => b.logical_1q(blocks[1], S, None),
        Gen::Sdg1 => b.logical_1q(blocks[1], Sdg, None),
        Gen::Cx01 => b.transversal_cx(blocks[0], blocks[1], None).expect("distinct blocks"),
        Gen::Cx10 => b.transversal_cx(blocks[1], blocks[0], None).expect("distinct blocks"),
    }
}

/// Generate the RB circuits: per length, `circuits_per_length` random
/// sequences, each closed by its inverse.
pub fn build_rb_circuits(
    group: &TwoQubitCliffordGroup,
    lengths: &[u32],
    circuits_per_length: u32,
    seed: u64,
) -> Result<Vec<RbCircuit>, ProtocolError> {
    if lengths.is_empty() {
        return Err(ProtocolError::EmptyLengths);
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for &length in lengths {
        for c in 0..circuits_per_length {
            let mut b = ProgramBuilder::new(format!("rb-l{length}-c{c}"));
            let q0 = b.add_block("q0");
            let q1 = b.add_block("q1");
            let ia = b.add_phys_reg("ia", 2);
            b.init_zero_ft_rus(q0, QubitRef { reg: ia, index: 0 }, "init0", 3)?;
            b.init_zero_ft_rus(q1, QubitRef { reg: ia, index: 1 }, "init1", 3)?;

            let mut sampled = Vec::with_capacity(length as usize);
            let mut total = CliffordElement::identity();
            for _ in 0..length {
                let idx = rng.gen_range(0..group.len());
                sampled.push(idx);
                let elem = group.get(idx);
                for &g in elem.gate_word() {
                    apply_gen(&mut b, g, [q0, q1]);
                }
                total = elem.multiply(&total);
            }
            let inverse = group.invert(&total).expect("closed group");
            for &g in inverse.gate_word() {
                apply_gen(&mut b, g, [q0, q1]);
            }

            b.meas_decode(q0, MeasBasis::Z, false, "m0", None);
            b.meas_decode(q1, MeasBasis::Z, false, "m1", None);
            out.push(RbCircuit {
                program: b.finish(),
                length,
                log_regs: ["m0Log".to_string(), "m1Log".to_string()],
                expected: (false, false),
                sampled,
            });
        }
    }
    Ok(out)
}

fn survived(circuit: &RbCircuit, record: &ShotRecord) -> bool {
    let b0 = record.registers[&circuit.log_regs[0]] & 1 == 1;
    let b1 = record.registers[&circuit.log_regs[1]] & 1 == 1;
    (b0, b1) == circuit.expected
}

/// Run the circuits and pool survival per length. Shots that exhausted the
/// fault-tolerant initialization are discarded.
pub fn run_rb(
    circuits: &[RbCircuit],
    noise: &NoiseModel,
    shots_per_circuit: u64,
    seed: u64,
) -> Result<DecaySeries, ProtocolError> {
    let mut lengths: Vec<u32> = circuits.iter().map(|c| c.length).collect();
    lengths.sort_unstable();
    lengths.dedup();
    let mut survived_count = vec![0u64; lengths.len()];
    let mut retained = vec![0u64; lengths.len()];
    let mut total = vec![0u64; lengths.len()];
    for (ci, circuit) in circuits.iter().enumerate() {
        let li = lengths.iter().position(|&l| l == circuit.length).unwrap();
        let records =
            run_program(&circuit.program, noise, shots_per_circuit, seed ^ (ci as u64) << 20)?;
        for r in &records {
            total[li] += 1;
            if r.rus_discard {
                continue;
            }
            retained[li] += 1;
            if survived(circuit, r) {
                survived_count[li] += 1;
            }
        }
    }
    Ok(DecaySeries {
        protocol: "rb".into(),
        method: "two-qubit".into(),
        lengths,
        survival: survived_count
            .iter()
            .zip(&retained)
            .map(|(&s, &n)| if n == 0 { 0.0 } else { s as f64 / n as f64 })
            .collect(),
        shots: retained.clone(),
        retention: retained
            .iter()
            .zip(&total)
            .map(|(&r, &t)| if t == 0 { 0.0 } else { r as f64 / t as f64 })
            .collect(),
        seed,
    })
}
