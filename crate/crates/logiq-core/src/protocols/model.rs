//! Component-level depolarizing model of the ancilla-assisted QFT at the
//! bare three-qubit level (plus the AND ancilla).
//!
//! Every logical T (including the injected phase) is followed by a
//! single-qubit depolarizing channel and every logical CNOT/CZ by a
//! two-qubit one, with channel parameters derived from the component
//! average fidelities via 1 - F = (d-1)/d * eps. Trajectories sample a
//! uniformly random non-identity Pauli with probability
//! p = eps (d^2-1)/d^2, which averages to the same map.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::sim::gates::Gate;
use crate::sim::noise::{sample_depolarizing_1q, sample_depolarizing_2q};
use crate::sim::state::{FactoredState, QubitId};

use super::qft::MubBasis;
use super::ProtocolError;

/// Depolarizing channel parameter from an average fidelity (Hilbert space
/// dimension d): eps = (1 - F) d / (d - 1).
pub fn depolarizing_param(favg: f64, d: u32) -> f64 {
    (1.0 - favg) * f64::from(d) / (f64::from(d) - 1.0)
}

/// Trajectory probability of a non-identity uniform Pauli reproducing the
/// depolarizing map with parameter eps: p = eps (d^2 - 1) / d^2.
pub fn trajectory_prob(eps: f64, d: u32) -> f64 {
    let d2 = f64::from(d) * f64::from(d);
    eps * (d2 - 1.0) / d2
}

/// Predicted (F1, F2) for the ancilla-assisted QFT under component
/// depolarizing noise with the given CNOT and T average fidelities.
pub fn depolarizing_logical_model(
    f_cnot: f64,
    f_t: f64,
    trajectories_per_state: u64,
    seed: u64,
) -> Result<(f64, f64), ProtocolError> {
    if !(0.0 < f_cnot && f_cnot <= 1.0 && 0.0 < f_t && f_t <= 1.0) {
        return Err(ProtocolError::BadFidelity);
    }
    let p1 = trajectory_prob(depolarizing_param(f_t, 2), 2);
    let p2 = trajectory_prob(depolarizing_param(f_cnot, 4), 4);
    let mut f = [0.0f64; 2];
    for (bi, basis) in [MubBasis::Computational, MubBasis::Fourier].into_iter().enumerate() {
        let per_x: Vec<f64> = (0u8..8)
            .into_par_iter()
            .map(|x| {
                let mut sum = 0.0;
                for t in 0..trajectories_per_state {
                    let mut rng = ChaCha12Rng::seed_from_u64(seed ^ (u64::from(x) << 8) ^ ((bi as u64) << 16));
                    rng.set_stream(t);
                    sum += model_trajectory(x, basis, p1, p2, &mut rng);
                }
                sum / trajectories_per_state as f64
            })
            .collect();
        f[bi] = per_x.iter().sum::<f64>() / 8.0;
    }
    Ok((f[0], f[1]))
}

struct ModelCircuit {
    state: FactoredState,
    q: [QubitId; 4],
    p1: f64,
    p2: f64,
}

impl ModelCircuit {
    fn t_site<R: Rng>(&mut self, q: usize, dagger: bool, rng: &mut R) {
        let gate = if dagger { Gate::Tdg } else { Gate::T };
        self.state.apply_gate(gate, &[self.q[q]]).unwrap();
        if let Some(p) = sample_depolarizing_1q(self.p1, rng) {
            self.state.apply_pauli(p, self.q[q]).unwrap();
        }
    }

    fn phase_site<R: Rng>(&mut self, q: usize, theta: f64, rng: &mut R) {
        self.state.apply_gate(Gate::Phase(theta), &[self.q[q]]).unwrap();
        if let Some(p) = sample_depolarizing_1q(self.p1, rng) {
            self.state.apply_pauli(p, self.q[q]).unwrap();
        }
    }

    fn tq_site<R: Rng>(&mut self, gate: Gate, a: usize, b: usize, rng: &mut R) {
        self.state.apply_gate(gate, &[self.q[a], self.q[b]]).unwrap();
        if let Some((pa, pb)) = sample_depolarizing_2q(self.p2, rng) {
            self.state.apply_pauli(pa, self.q[a]).unwrap();
            self.state.apply_pauli(pb, self.q[b]).unwrap();
        }
    }

    fn clifford(&mut self, gate: Gate, q: usize) {
        self.state.apply_gate(gate, &[self.q[q]]).unwrap();
    }

    /// Fig.-5-style controlled-S: T(a) T(b) CX(a,b) Tdg(b) CX(a,b).
    fn controlled_s<R: Rng>(&mut self, a: usize, b: usize, rng: &mut R) {
        self.t_site(a, false, rng);
        self.t_site(b, false, rng);
        self.tq_site(Gate::Cx, a, b, rng);
        self.t_site(b, true, rng);
        self.tq_site(Gate::Cx, a, b, rng);
    }

    /// Ancilla-assisted controlled-T on (a, b) using qubit 3 as the AND
    /// block, with mid-circuit measurement and conditional CZ.
    fn controlled_t<R: Rng>(&mut self, a: usize, b: usize, rng: &mut R) {
        const T: usize = 3;
        self.clifford(Gate::H, T);
        self.t_site(T, false, rng);
        self.tq_site(Gate::Cx, b, T, rng);
        self.t_site(T, true, rng);
        self.tq_site(Gate::Cx, a, T, rng);
        self.t_site(T, false, rng);
        self.tq_site(Gate::Cx, b, T, rng);
        self.t_site(T, true, rng);
        // Close the AND: H, then S-dagger cancels the leftover i^{ab}.
        self.clifford(Gate::H, T);
        self.clifford(Gate::Sdg, T);
        // Injected P(pi/4) on the AND value.
        self.phase_site(T, std::f64::consts::FRAC_PI_4, rng);
        self.clifford(Gate::H, T);
        let outcome = self.state.measure(self.q[T], true, rng).unwrap();
        if outcome {
            self.tq_site(Gate::Cz, a, b, rng);
        }
        // Fresh ancilla for any later use (none in this circuit).
        self.q[T] = self.state.alloc();
    }
}

fn model_trajectory<R: Rng>(x: u8, basis: MubBasis, p1: f64, p2: f64, rng: &mut R) -> f64 {
    let mut state = FactoredState::new();
    let q = [state.alloc(), state.alloc(), state.alloc(), state.alloc()];
    let mut c = ModelCircuit { state, q, p1, p2 };
    // Input preparation (noiseless single-qubit settings).
    match basis {
        MubBasis::Computational => {
            for j in 0..3 {
                if (x >> (2 - j)) & 1 == 1 {
                    c.clifford(Gate::X, j);
                }
            }
        }
        MubBasis::Fourier => {
            for j in 0..3 {
                let angle = 2.0 * std::f64::consts::PI * f64::from(x)
                    / f64::from(1u32 << (j + 1));
                c.clifford(Gate::H, j);
                c.clifford(Gate::Phase(angle), j);
            }
        }
    }
    // H(q0); CS(q1,q0); CT(q2,q0); H(q1); CS(q2,q1); H(q2).
    c.clifford(Gate::H, 0);
    c.controlled_s(1, 0, rng);
    c.controlled_t(2, 0, rng);
    c.clifford(Gate::H, 1);
    c.controlled_s(2, 1, rng);
    c.clifford(Gate::H, 2);

    let amps = c.state.assemble(&[c.q[0], c.q[1], c.q[2]]).unwrap();
    let reference = ideal_output(x, basis);
    let ip: Complex64 = reference.iter().zip(&amps).map(|(r, a)| r.conj() * a).sum();
    ip.norm_sqr()
}

/// Ideal QFT output amplitudes over (q0, q1, q2) with q0 = index bit 0.
fn ideal_output(x: u8, basis: MubBasis) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); 8];
    match basis {
        MubBasis::Computational => {
            // Product of per-qubit phase states.
            let norm = 1.0 / (8.0f64).sqrt();
            for idx in 0..8usize {
                let mut phase = 0.0;
                for j in 0..3 {
                    if idx & (1 << j) != 0 {
                        phase += 2.0 * std::f64::consts::PI * f64::from(x)
                            / f64::from(1u32 << (3 - j));
                    }
                }
                out[idx] = Complex64::from_polar(norm, phase);
            }
        }
        MubBasis::Fourier => {
            // Wire j reads out the 2^j bit of -x mod 8 (reversed output
            // significance, no final swap).
            let y = (8 - usize::from(x)) % 8;
            out[y] = Complex64::new(1.0, 0.0);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conversion_examples() {
        // F_avg = 0.990 at d = 2 gives eps = 0.020.
        assert!((depolarizing_param(0.990, 2) - 0.020).abs() < 1e-12);
        assert!((depolarizing_param(0.9980, 4) - 0.0026667).abs() < 1e-6);
        assert!((trajectory_prob(0.02, 2) - 0.015).abs() < 1e-12);
    }

    #[test]
    fn noiseless_model_is_exact() {
        let (f1, f2) = depolarizing_logical_model(1.0, 1.0, 64, 11).unwrap();
        assert!((f1 - 1.0).abs() < 1e-9, "f1 = {f1}");
        assert!((f2 - 1.0).abs() < 1e-9, "f2 = {f2}");
    }

    #[test]
    fn bad_fidelities_rejected() {
        assert!(depolarizing_logical_model(0.0, 1.0, 10, 1).is_err());
        assert!(depolarizing_logical_model(1.0, 1.2, 10, 1).is_err());
    }
}
