//! QFT and controlled-T benchmarking over two mutually unbiased bases, with
//! the Hofmann process-fidelity lower bound.
//!
//! The QFT maps |x> to a product of single-qubit phase states, so output
//! fidelities are measured with single-qubit settings: the computational
//! branch un-rotates each output qubit back to |0> (needing a teleported T
//! for half the inputs), and the Fourier branch prepares phase-state inputs
//! and expects the basis state |-x mod 8>.

use serde::Serialize;

use crate::ir::MeasBasis;
use crate::sim::exec::run_program;
use crate::sim::noise::NoiseModel;
use crate::steane::builder::{Logical1q, ProgramBuilder, SingleQubitPrep};
use crate::steane::gadgets::{ancilla_assisted_cp, teleport_p_gate, TeleportMethod};
use crate::steane::qft::{build_qft3, CtMethod};

use super::ProtocolError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MubBasis {
    Computational,
    Fourier,
}

impl MubBasis {
    pub fn name(self) -> &'static str {
        match self {
            MubBasis::Computational => "computational",
            MubBasis::Fourier => "fourier",
        }
    }
}

/// Measurement/preparation description for one QFT benchmark input.
///
/// The circuit omits the final qubit swap, so the output wires are read in
/// reversed significance (wire 0 is the least significant outcome bit); the
/// computational-branch ideal output puts the phase 2 pi x / 2^{3-j} on wire
/// j, while the Fourier-basis input puts 2 pi x / 2^{j+1} on wire j.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QftReference {
    pub basis: MubBasis,
    pub x: u8,
    /// Computational branch: phase of the ideal product state on wire j
    /// (what the un-rotation must undo). Fourier branch: input preparation
    /// phase on wire j.
    pub angles: [f64; 3],
    /// Expected decoded readout per wire.
    pub expected_bits: [bool; 3],
}

/// Ideal-output description for input `x` in the given basis (n = 3, d = 8).
pub fn qft_reference(x: u8, basis: MubBasis) -> Result<QftReference, ProtocolError> {
    if x > 7 {
        return Err(ProtocolError::InputOutOfRange(x));
    }
    let mut angles = [0.0; 3];
    let expected_bits = match basis {
        // Output wire j carries (|0> + e^{2 pi i x / 2^{3-j}} |1>)/sqrt(2);
        // after un-rotating by H Rz(-angle) per wire the ideal result is 000.
        MubBasis::Computational => {
            for (j, a) in angles.iter_mut().enumerate() {
                *a = 2.0 * std::f64::consts::PI * f64::from(x)
                    / f64::from(1u32 << (3 - j));
            }
            [false; 3]
        }
        // |f_x> = U|x> has e^{2 pi i x / 2^{j+1}} on wire j; applying the
        // circuit again gives |-x mod 8> with wire j the 2^j outcome bit.
        MubBasis::Fourier => {
            for (j, a) in angles.iter_mut().enumerate() {
                *a = 2.0 * std::f64::consts::PI * f64::from(x)
                    / f64::from(1u32 << (j + 1));
            }
            let y = (8 - u32::from(x)) % 8;
            [y & 1 == 1, (y >> 1) & 1 == 1, (y >> 2) & 1 == 1]
        }
    };
    Ok(QftReference { basis, x, angles, expected_bits })
}

/// Multiple of pi/4 (0..8) of the computational-branch un-rotation on output
/// qubit j for input x: P(-2 pi x / 2^{3-j}) = P(k pi / 4).
pub fn unrotation_quarter_turns(x: u8, j: usize) -> u8 {
    let k = (-(i32::from(x)) * (1 << j)).rem_euclid(8);
    k as u8
}

#[derive(Debug, Clone, Serialize)]
pub struct StateFidelity {
    pub basis: MubBasis,
    pub x: u8,
    /// None when no shots survived selection for this cell.
    pub fidelity: Option<f64>,
    pub shots: u64,
}

/// One side (raw or post-selected) of a benchmark result.
#[derive(Debug, Clone, Serialize)]
pub struct MubSide {
    pub per_state: Vec<StateFidelity>,
    pub f1: Option<f64>,
    pub f2: Option<f64>,
    pub f_lo: Option<f64>,
    pub favg_bound: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MubBenchmarkResult {
    pub d: u32,
    pub raw: MubSide,
    pub postselected: MubSide,
    /// Fraction of shots surviving post-selection, over all inputs.
    pub retention: f64,
}

/// Hofmann bound arithmetic: F_lo = F1 + F2 - 1 and the average-fidelity
/// bound (d F_lo + 1)/(d + 1), exact.
pub fn hofmann_bounds(f1: f64, f2: f64, d: u32) -> (f64, f64) {
    let f_lo = f1 + f2 - 1.0;
    (f_lo, (f64::from(d) * f_lo + 1.0) / (f64::from(d) + 1.0))
}

fn make_side(cells: Vec<(MubBasis, u8, u64, u64)>, d: u32) -> MubSide {
    let per_state: Vec<StateFidelity> = cells
        .iter()
        .map(|&(basis, x, retained, successes)| StateFidelity {
            basis,
            x,
            fidelity: (retained > 0).then(|| successes as f64 / retained as f64),
            shots: retained,
        })
        .collect();
    let mean = |basis: MubBasis| -> Option<f64> {
        let vals: Vec<f64> = per_state
            .iter()
            .filter(|s| s.basis == basis)
            .map(|s| s.fidelity)
            .collect::<Option<Vec<_>>>()?;
        Some(vals.iter().sum::<f64>() / vals.len() as f64)
    };
    let f1 = mean(MubBasis::Computational);
    let f2 = mean(MubBasis::Fourier);
    let (f_lo, favg_bound) = match (f1, f2) {
        (Some(a), Some(b)) => {
            let (lo, avg) = hofmann_bounds(a, b, d);
            (Some(lo), Some(avg))
        }
        _ => (None, None),
    };
    MubSide { per_state, f1, f2, f_lo, favg_bound }
}

/// Run the full 16-input QFT benchmark for one controlled-T method.
pub fn run_qft_benchmark(
    method: CtMethod,
    noise: &NoiseModel,
    shots_per_state: u64,
    seed: u64,
) -> Result<MubBenchmarkResult, ProtocolError> {
    let mut raw_cells = Vec::new();
    let mut ps_cells = Vec::new();
    let mut total_shots = 0u64;
    let mut ps_retained = 0u64;
    for (bi, basis) in [MubBasis::Computational, MubBasis::Fourier].into_iter().enumerate() {
        for x in 0u8..8 {
            let reference = qft_reference(x, basis)?;
            let program = build_qft_state_program(method, &reference)?;
            let records = run_program(
                &program.program,
                noise,
                shots_per_state,
                seed ^ ((bi as u64) << 40) ^ (u64::from(x) << 32),
            )?;
            let mut raw = (0u64, 0u64);
            let mut ps = (0u64, 0u64);
            for r in &records {
                total_shots += 1;
                if r.rus_discard {
                    continue;
                }
                let ok = program
                    .log_regs
                    .iter()
                    .zip(&reference.expected_bits)
                    .all(|(reg, &want)| (r.registers[reg] & 1 == 1) == want);
                raw.0 += 1;
                raw.1 += u64::from(ok);
                if !r.detected {
                    ps.0 += 1;
                    ps.1 += u64::from(ok);
                    ps_retained += 1;
                }
            }
            raw_cells.push((basis, x, raw.0, raw.1));
            ps_cells.push((basis, x, ps.0, ps.1));
        }
    }
    Ok(MubBenchmarkResult {
        d: 8,
        raw: make_side(raw_cells, 8),
        postselected: make_side(ps_cells, 8),
        retention: if total_shots == 0 {
            0.0
        } else {
            ps_retained as f64 / total_shots as f64
        },
    })
}

pub struct QftStateProgram {
    pub program: crate::ir::LogicalProgram,
    pub log_regs: [String; 3],
}

/// The full benchmark program for one input state: preparation, QFT, and
/// the measurement setting (un-rotations on the computational branch use
/// the teleported logical T where a quarter-turn remains).
pub fn build_qft_state_program(
    method: CtMethod,
    reference: &QftReference,
) -> Result<QftStateProgram, ProtocolError> {
    let preps: [SingleQubitPrep; 3] = match reference.basis {
        MubBasis::Computational => {
            let bit = |j: usize| (reference.x >> (2 - j)) & 1 == 1;
            [0, 1, 2].map(|j| if bit(j) { SingleQubitPrep::One } else { SingleQubitPrep::Zero })
        }
        MubBasis::Fourier => {
            [0, 1, 2].map(|j| SingleQubitPrep::Phase(reference.angles[j]))
        }
    };
    let name = format!("qft-{}-{}-x{}", method.name(), reference.basis.name(), reference.x);
    let qft = build_qft3(method, &preps, &name)?;
    let mut b = qft.builder;
    let mut outputs = qft.outputs;
    let mut free = qft.free;

    let mut log_regs: Vec<String> = Vec::with_capacity(3);
    match reference.basis {
        MubBasis::Computational => {
            // Un-rotate each output qubit by P(k pi/4), then X-basis decode.
            for j in 0..3 {
                let k = unrotation_quarter_turns(reference.x, j);
                if k & 4 != 0 {
                    b.logical_1q(outputs[j], Logical1q::Z, None);
                }
                if k & 2 != 0 {
                    b.logical_1q(outputs[j], Logical1q::S, None);
                }
                if k & 1 != 0 {
                    let g = teleport_p_gate(
                        &mut b,
                        outputs[j],
                        free,
                        std::f64::consts::FRAC_PI_4,
                        TeleportMethod::Two,
                        None,
                    )?;
                    (outputs[j], free) = (g.output, outputs[j]);
                }
            }
            for (j, out) in outputs.iter().enumerate() {
                let prefix = format!("f{j}");
                b.meas_decode(*out, MeasBasis::X, false, &prefix, None);
                log_regs.push(format!("{prefix}Log"));
            }
        }
        MubBasis::Fourier => {
            for (j, out) in outputs.iter().enumerate() {
                let prefix = format!("f{j}");
                b.meas_decode(*out, MeasBasis::Z, false, &prefix, None);
                log_regs.push(format!("{prefix}Log"));
            }
        }
    }
    Ok(QftStateProgram {
        program: b.finish(),
        log_regs: [log_regs[0].clone(), log_regs[1].clone(), log_regs[2].clone()],
    })
}

// ---------------------------------------------------------------------------
// Controlled-T benchmark over the mixed X/Z eigenbases
// ---------------------------------------------------------------------------

/// The eight controlled-T benchmark inputs: basis 1 is {|+->} x {|01>},
/// basis 2 is {|01>} x {|+->}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ControlTInput {
    /// Control in the X basis (false: |+>, true: |->) when `control_x` is
    /// set, else in Z (false: |0>, true: |1>); symmetrically for the target.
    pub control_x: bool,
    pub control_bit: bool,
    pub target_bit: bool,
}

impl ControlTInput {
    pub fn all() -> [ControlTInput; 8] {
        let mut out = [ControlTInput { control_x: true, control_bit: false, target_bit: false }; 8];
        let mut i = 0;
        for control_x in [true, false] {
            for control_bit in [false, true] {
                for target_bit in [false, true] {
                    out[i] = ControlTInput { control_x, control_bit, target_bit };
                    i += 1;
                }
            }
        }
        out
    }

    fn basis(&self) -> MubBasis {
        // Basis 1 (X-basis control) plays the role of F1.
        if self.control_x {
            MubBasis::Computational
        } else {
            MubBasis::Fourier
        }
    }
}

/// Run the controlled-T benchmark: apply the ancilla-assisted logical
/// controlled-T to the eight mixed-eigenbasis states, un-rotating |T>-type
/// ideal outputs with a teleported T-dagger.
pub fn run_control_t_benchmark(
    noise: &NoiseModel,
    shots_per_state: u64,
    seed: u64,
) -> Result<MubBenchmarkResult, ProtocolError> {
    let mut raw_cells = Vec::new();
    let mut ps_cells = Vec::new();
    let mut total_shots = 0u64;
    let mut ps_retained = 0u64;
    for (i, input) in ControlTInput::all().into_iter().enumerate() {
        let (program, log_regs, expected) = build_control_t_program(&input)?;
        let records = run_program(&program, noise, shots_per_state, seed ^ ((i as u64) << 32))?;
        let mut raw = (0u64, 0u64);
        let mut ps = (0u64, 0u64);
        for r in &records {
            total_shots += 1;
            if r.rus_discard {
                continue;
            }
            let ok = log_regs
                .iter()
                .zip(&expected)
                .all(|(reg, &want)| (r.registers[reg] & 1 == 1) == want);
            raw.0 += 1;
            raw.1 += u64::from(ok);
            if !r.detected {
                ps.0 += 1;
                ps.1 += u64::from(ok);
                ps_retained += 1;
            }
        }
        let x = i as u8;
        raw_cells.push((input.basis(), x, raw.0, raw.1));
        ps_cells.push((input.basis(), x, ps.0, ps.1));
    }
    Ok(MubBenchmarkResult {
        d: 4,
        raw: make_side(raw_cells, 4),
        postselected: make_side(ps_cells, 4),
        retention: if total_shots == 0 {
            0.0
        } else {
            ps_retained as f64 / total_shots as f64
        },
    })
}

fn build_control_t_program(
    input: &ControlTInput,
) -> Result<(crate::ir::LogicalProgram, [String; 2], [bool; 2]), ProtocolError> {
    let mut b = ProgramBuilder::new(format!(
        "ct-{}-{}{}",
        if input.control_x { "x" } else { "z" },
        u8::from(input.control_bit),
        u8::from(input.target_bit)
    ));
    let control = b.add_block("qc");
    let target = b.add_block("qt");
    let t = b.add_block("tb");
    let m = b.add_block("mb");

    let x_prep = |bit: bool| if bit { SingleQubitPrep::Minus } else { SingleQubitPrep::Plus };
    let z_prep = |bit: bool| if bit { SingleQubitPrep::One } else { SingleQubitPrep::Zero };
    let (c_prep, t_prep) = if input.control_x {
        (x_prep(input.control_bit), z_prep(input.target_bit))
    } else {
        (z_prep(input.control_bit), x_prep(input.target_bit))
    };
    b.encode_nonft(control, &c_prep, false, None);
    b.encode_nonft(target, &t_prep, false, None);
    ancilla_assisted_cp(&mut b, control, target, t, m, std::f64::consts::FRAC_PI_4)?;

    // Measurement settings and ideal outcomes per the controlled-T action on
    // the mixed bases: a |T>/|T-> ideal output is un-rotated by T-dagger.
    let mut control_blk = control;
    let mut free = t; // both AND blocks are free after the gadget
    let (c_basis, c_expected, t_basis, t_expected);
    if input.control_x {
        // Control out is |T(+-)> when the target is |1>: un-rotate.
        if input.target_bit {
            let g = teleport_p_gate(
                &mut b,
                control_blk,
                free,
                -std::f64::consts::FRAC_PI_4,
                TeleportMethod::Two,
                None,
            )?;
            (control_blk, free) = (g.output, control_blk);
        }
        c_basis = MeasBasis::X;
        c_expected = input.control_bit;
        t_basis = MeasBasis::Z;
        t_expected = input.target_bit;
    } else {
        c_basis = MeasBasis::Z;
        c_expected = input.control_bit;
        t_basis = MeasBasis::X;
        t_expected = input.target_bit;
    }
    let mut target_blk = target;
    if !input.control_x && input.control_bit {
        // Target out is |T(+-)>: un-rotate before the X readout.
        let g = teleport_p_gate(
            &mut b,
            target_blk,
            free,
            -std::f64::consts::FRAC_PI_4,
            TeleportMethod::Two,
            None,
        )?;
        target_blk = g.output;
    }
    b.meas_decode(control_blk, c_basis, false, "rc", None);
    b.meas_decode(target_blk, t_basis, false, "rt", None);
    Ok((
        b.finish(),
        ["rcLog".to_string(), "rtLog".to_string()],
        [c_expected, t_expected],
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_examples() {
        // Fourier x = 0 maps to |000>.
        let r = qft_reference(0, MubBasis::Fourier).unwrap();
        assert_eq!(r.expected_bits, [false, false, false]);
        // Fourier x = 3 maps to |101| = 5.
        let r = qft_reference(3, MubBasis::Fourier).unwrap();
        assert_eq!(r.expected_bits, [true, false, true]);
        // Computational x = 1: qubit 0 un-rotation is -pi/4, an odd quarter
        // turn, i.e. needs a T-type gate.
        assert_eq!(unrotation_quarter_turns(1, 0), 7);
        assert_eq!(unrotation_quarter_turns(1, 0) & 1, 1);
        assert!(qft_reference(8, MubBasis::Fourier).is_err());
    }

    #[test]
    fn hofmann_bound_arithmetic_is_exact() {
        let (lo, avg) = hofmann_bounds(0.78, 0.66, 8);
        assert!((lo - 0.44).abs() < 1e-12);
        assert!((avg - 0.50).abs() < 0.005);
        let (lo2, avg2) = hofmann_bounds(0.72, 0.65, 8);
        assert!((lo2 - 0.37).abs() < 1e-12);
        assert!((avg2 - 0.44).abs() < 0.005);
        let (lo3, avg3) = hofmann_bounds(0.79, 0.79, 4);
        assert!((lo3 - 0.58).abs() < 1e-12);
        assert!((avg3 - 0.66).abs() < 0.005);
    }
}
