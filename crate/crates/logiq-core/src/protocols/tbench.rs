//! Logical T-gate benchmarking: prepare |+>, apply the teleported T gate L
//! times (L a multiple of 4), measure in the logical X basis, and fit the
//! dephasing decay. A twirl over {I, SX} applied to the injected |T> state
//! symmetrizes the gadget noise into the dephasing form; the ideal state is
//! unchanged since SX fixes |T>.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::ir::{LogicalProgram, MeasBasis, QubitRef};
use crate::sim::exec::{run_program, ShotRecord};
use crate::sim::noise::NoiseModel;
use crate::steane::builder::{Logical1q, ProgramBuilder, SingleQubitPrep};
use crate::steane::gadgets::{
    prepare_t_state_partial_ft, teleport_p_gate_with, TeleportMethod,
};

use super::series::DecaySeries;
use super::ProtocolError;

pub struct TBenchCircuit {
    pub program: LogicalProgram,
    pub length: u32,
    pub log_reg: String,
    pub expected: bool,
}

/// Ancilla preparation used per gadget: non-fault-tolerant |T>, or the
/// flagged repeat-until-success preparation with the given attempt limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TPrep {
    NonFt,
    PartialFt { rus_limit: u32 },
}

/// Build the decay circuits. Each of the L gates teleports a fresh |T>
/// through the chosen gadget method, preceded (on the ancilla) by a sampled
/// twirl element when `twirl` is set.
pub fn build_t_bench_circuits(
    lengths: &[u32],
    method: TeleportMethod,
    circuits_per_length: u32,
    seed: u64,
    twirl: bool,
    prep: TPrep,
) -> Result<Vec<TBenchCircuit>, ProtocolError> {
    if lengths.is_empty() {
        return Err(ProtocolError::EmptyLengths);
    }
    if let Some(&l) = lengths.iter().find(|&&l| l % 4 != 0 || l == 0) {
        return Err(ProtocolError::LengthNotMultipleOfFour(l));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for &length in lengths {
        for c in 0..circuits_per_length {
            let mut b = ProgramBuilder::new(format!("tbench-l{length}-c{c}"));
            let mut data = b.add_block("q");
            let mut anc = b.add_block("a");
            let phys = b.add_phys_reg("ia", 3);
            b.init_zero_ft_rus(data, QubitRef { reg: phys, index: 0 }, "init", 3)?;
            b.logical_1q(data, Logical1q::H, None);

            for j in 0..length {
                let twirled = twirl && rng.gen::<bool>();
                let g = teleport_p_gate_with(
                    &mut b,
                    data,
                    anc,
                    std::f64::consts::FRAC_PI_4,
                    method,
                    None,
                    |b, anc| {
                        match prep {
                            TPrep::NonFt => b.encode_nonft(
                                anc,
                                &SingleQubitPrep::Phase(std::f64::consts::FRAC_PI_4),
                                true,
                                None,
                            ),
                            TPrep::PartialFt { rus_limit } => {
                                prepare_t_state_partial_ft(
                                    b,
                                    anc,
                                    QubitRef { reg: phys, index: 1 },
                                    QubitRef { reg: phys, index: 2 },
                                    rus_limit,
                                    &format!("ft{j}"),
                                )
                                .expect("valid limit");
                            }
                        }
                        if twirled {
                            // SX on the injected state: X then S, transversal.
                            b.logical_1q(anc, Logical1q::X, None);
                            b.logical_1q(anc, Logical1q::S, None);
                        }
                    },
                )?;
                if method == TeleportMethod::Two {
                    (data, anc) = (g.output, data);
                } else {
                    data = g.output;
                }
            }

            let prefix = format!("fin{c}");
            b.meas_decode(data, MeasBasis::X, false, &prefix, None);
            // T^L = Z^{L/4}: odd L/4 flips |+> to |->.
            let expected = (length / 4) % 2 == 1;
            out.push(TBenchCircuit {
                program: b.finish(),
                length,
                log_reg: format!("{prefix}Log"),
                expected,
            });
        }
    }
    Ok(out)
}

fn survived(circuit: &TBenchCircuit, record: &ShotRecord) -> bool {
    (record.registers[&circuit.log_reg] & 1 == 1) == circuit.expected
}

/// Pooled decay data. `postselect` additionally drops shots where a gadget
/// measurement decoded a nonzero syndrome.
pub fn run_t_bench(
    circuits: &[TBenchCircuit],
    noise: &NoiseModel,
    shots_per_circuit: u64,
    seed: u64,
    postselect: bool,
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
            if r.rus_discard || (postselect && r.detected) {
                continue;
            }
            retained[li] += 1;
            if survived(circuit, r) {
                survived_count[li] += 1;
            }
        }
    }
    Ok(DecaySeries {
        protocol: "t-bench".into(),
        method: if postselect { "ps".into() } else { "raw".into() },
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
