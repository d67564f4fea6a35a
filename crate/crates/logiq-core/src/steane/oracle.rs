//! Independent verification oracles for the code primitives.
//!
//! These operate on dense amplitude vectors and Pauli algebra only; they
//! share no circuit-construction code with the builders they check. The
//! encoded reference for an arbitrary single-qubit state is built by brute
//! force: embed the state on the last qubit and apply the code projector
//! (I + s)/2 for all six generators.

use num_complex::Complex64;

use crate::pauli::PauliString;
use crate::sim::gates::{C64, ZERO};

use super::code;

/// Apply a Pauli string to a dense vector (qubit j = index bit j).
pub fn dense_apply_pauli(p: &PauliString, amps: &[C64]) -> Vec<C64> {
    let n = p.num_qubits();
    assert_eq!(amps.len(), 1 << n);
    let x = p.x_bits() as usize;
    let z = p.z_bits() as usize;
    let y_count = (p.x_bits() & p.z_bits()).count_ones();
    let mut global = Complex64::new(1.0, 0.0);
    for _ in 0..p.phase().exponent() {
        global *= Complex64::new(0.0, 1.0);
    }
    for _ in 0..y_count {
        global *= Complex64::new(0.0, 1.0);
    }
    let mut out = vec![ZERO; amps.len()];
    for (i, &a) in amps.iter().enumerate() {
        if a == ZERO {
            continue;
        }
        let sign = if ((i & z).count_ones()) % 2 == 1 { -1.0 } else { 1.0 };
        out[i ^ x] = global * sign * a;
    }
    out
}

/// <amps| P |amps> for a Hermitian Pauli.
pub fn dense_expectation(p: &PauliString, amps: &[C64]) -> f64 {
    let image = dense_apply_pauli(p, amps);
    let ip: Complex64 = amps.iter().zip(&image).map(|(a, b)| a.conj() * b).sum();
    ip.re
}

/// Project onto the +1 (or -1) eigenspace of a Pauli; returns the captured
/// norm-squared. The state is renormalized when the weight is nonzero.
pub fn dense_project(p: &PauliString, sign_plus: bool, amps: &mut Vec<C64>) -> f64 {
    let image = dense_apply_pauli(p, amps);
    let s = if sign_plus { 1.0 } else { -1.0 };
    for (a, b) in amps.iter_mut().zip(&image) {
        *a = 0.5 * (*a + s * b);
    }
    let w: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    if w > 1e-20 {
        let scale = 1.0 / w.sqrt();
        for a in amps.iter_mut() {
            *a *= scale;
        }
    }
    w
}

/// The 128-amplitude encoded version of alpha|0> + beta|1>, built by brute
/// force: |0-bar> is the code projector applied to |0>^7 (normalized) and
/// |1-bar> = logical-X |0-bar>. (Projecting a state carried on one physical
/// qubit does not work in this generator convention: every qubit lies in
/// some Z-type generator support, which annihilates the |1> component.)
pub fn encoded_reference(alpha: C64, beta: C64) -> Vec<C64> {
    let mut zero = vec![ZERO; 128];
    zero[0] = Complex64::new(1.0, 0.0);
    for g in code::stabilizer_generators() {
        let image = dense_apply_pauli(&g, &zero);
        for (a, b) in zero.iter_mut().zip(&image) {
            *a = 0.5 * (*a + b);
        }
    }
    let norm: f64 = zero.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut zero {
        *a /= norm;
    }
    let one = dense_apply_pauli(&code::logical_x(), &zero);
    zero.iter().zip(&one).map(|(z, o)| alpha * z + beta * o).collect()
}

/// Encoded basis and phase states.
pub fn encoded_zero() -> Vec<C64> {
    encoded_reference(Complex64::new(1.0, 0.0), ZERO)
}

pub fn encoded_one() -> Vec<C64> {
    encoded_reference(ZERO, Complex64::new(1.0, 0.0))
}

pub fn encoded_plus() -> Vec<C64> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    encoded_reference(Complex64::new(h, 0.0), Complex64::new(h, 0.0))
}

/// Encoded (|0> + e^{i theta} |1>)/sqrt(2).
pub fn encoded_phase_state(theta: f64) -> Vec<C64> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    encoded_reference(Complex64::new(h, 0.0), Complex64::from_polar(h, theta))
}

/// Tensor product of encoded blocks: bit layout is block 0 in the low 7
/// bits, block 1 next, and so on.
pub fn encoded_tensor(blocks: &[Vec<C64>]) -> Vec<C64> {
    let mut out = vec![Complex64::new(1.0, 0.0)];
    let mut width = 0usize;
    for b in blocks {
        let mut next = vec![ZERO; out.len() * b.len()];
        for (j, &bj) in b.iter().enumerate() {
            if bj == ZERO {
                continue;
            }
            for (i, &ai) in out.iter().enumerate() {
                next[(j << width) | i] = ai * bj;
            }
        }
        out = next;
        width += 7;
    }
    out
}

/// Encoded image of an arbitrary multi-logical-qubit state: amplitudes over
/// the logical computational basis, blocks in index-bit order.
pub fn encoded_logical_state(logical_amps: &[C64]) -> Vec<C64> {
    let n = logical_amps.len().trailing_zeros() as usize;
    assert_eq!(1 << n, logical_amps.len());
    let zero = encoded_zero();
    let one = encoded_one();
    let mut out = vec![ZERO; 1 << (7 * n)];
    for (y, &c) in logical_amps.iter().enumerate() {
        if c == ZERO {
            continue;
        }
        let blocks: Vec<Vec<C64>> = (0..n)
            .map(|j| if (y >> j) & 1 == 1 { one.clone() } else { zero.clone() })
            .collect();
        let t = encoded_tensor(&blocks);
        for (o, v) in out.iter_mut().zip(&t) {
            *o += c * v;
        }
    }
    out
}

/// Ideal error correction on a 7-qubit dense state: measure both syndrome
/// triples projectively (deterministic for Pauli-error states), apply the
/// lookup corrections, and return the corrected state.
pub fn ideal_qec(amps: &[C64]) -> Vec<C64> {
    assert_eq!(amps.len(), 128);
    let mut state = amps.to_vec();
    // Z-type generators detect X errors; correct with Z? No: an X error
    // anticommutes with Z-type stabilizers and is corrected by X on the
    // lookup qubit; symmetrically for Z errors via the X-type generators.
    let z_gens: Vec<PauliString> =
        code::Z_GENERATORS.iter().map(|s| s.parse().unwrap()).collect();
    let x_gens: Vec<PauliString> =
        code::X_GENERATORS.iter().map(|s| s.parse().unwrap()).collect();

    let mut syndrome = 0u8;
    for (i, g) in z_gens.iter().enumerate() {
        let plus = dense_expectation(g, &state) >= 0.0;
        dense_project(g, plus, &mut state);
        if !plus {
            syndrome |= 1 << i;
        }
    }
    if let Some(q) = code::lookup_qubit(syndrome) {
        let corr = PauliString::single(7, q, 'X');
        state = dense_apply_pauli(&corr, &state);
    }
    let mut syndrome = 0u8;
    for (i, g) in x_gens.iter().enumerate() {
        let plus = dense_expectation(g, &state) >= 0.0;
        dense_project(g, plus, &mut state);
        if !plus {
            syndrome |= 1 << i;
        }
    }
    if let Some(q) = code::lookup_qubit(syndrome) {
        let corr = PauliString::single(7, q, 'Z');
        state = dense_apply_pauli(&corr, &state);
    }
    state
}

/// |<a|b>|^2 between dense vectors.
pub fn overlap2(a: &[C64], b: &[C64]) -> f64 {
    let ip: Complex64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    ip.norm_sqr()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encoded_zero_is_stabilized() {
        let amps = encoded_zero();
        for g in code::stabilizer_generators() {
            assert!((dense_expectation(&g, &amps) - 1.0).abs() < 1e-12);
        }
        assert!((dense_expectation(&code::logical_z(), &amps) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn encoded_plus_has_logical_x() {
        let amps = encoded_plus();
        assert!((dense_expectation(&code::logical_x(), &amps) - 1.0).abs() < 1e-12);
        assert!(dense_expectation(&code::logical_z(), &amps).abs() < 1e-12);
    }

    #[test]
    fn ideal_qec_fixes_every_single_pauli_on_zero() {
        let reference = encoded_zero();
        for q in 0..7 {
            for kind in ['X', 'Y', 'Z'] {
                let err = PauliString::single(7, q, kind);
                let corrupted = dense_apply_pauli(&err, &reference);
                let fixed = ideal_qec(&corrupted);
                assert!(
                    overlap2(&fixed, &reference) > 1.0 - 1e-9,
                    "{kind} on qubit {q} not corrected"
                );
            }
        }
    }

    #[test]
    fn encoded_logical_state_matches_tensor_for_products() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        // |+>|0> as a logical 2-qubit state (bit 0 = block 0).
        let amps = encoded_logical_state(&[
            Complex64::new(h, 0.0),
            Complex64::new(h, 0.0),
            ZERO,
            ZERO,
        ]);
        let tensor = encoded_tensor(&[encoded_plus(), encoded_zero()]);
        assert!(overlap2(&amps, &tensor) > 1.0 - 1e-12);
    }
}
