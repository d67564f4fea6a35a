//! Monolithic statevector on a fixed qubit count. Reference oracle for the
//! factored simulator and for small unitary checks; not used on the hot path.

use rand::Rng;

use super::gates::{Gate, C64, ONE, ZERO};

#[derive(Clone)]
pub struct DenseState {
    n: usize,
    amps: Vec<C64>,
}

impl DenseState {
    pub fn zeros(n: usize) -> Self {
        assert!(n <= 24);
        let mut amps = vec![ZERO; 1 << n];
        amps[0] = ONE;
        DenseState { n, amps }
    }

    pub fn from_amplitudes(n: usize, amps: Vec<C64>) -> Self {
        assert_eq!(amps.len(), 1 << n);
        DenseState { n, amps }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn apply_gate(&mut self, gate: Gate, qubits: &[usize]) {
        match gate.arity() {
            1 => self.apply_1q(gate.matrix1().unwrap(), qubits[0]),
            2 => self.apply_2q(gate.matrix2().unwrap(), qubits[0], qubits[1]),
            _ => unreachable!(),
        }
    }

    pub fn apply_1q(&mut self, m: [[C64; 2]; 2], q: usize) {
        let stride = 1usize << q;
        for base in 0..self.amps.len() {
            if base & stride == 0 {
                let a0 = self.amps[base];
                let a1 = self.amps[base | stride];
                self.amps[base] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[base | stride] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }

    /// `m` indexed by (bit of q0) + 2*(bit of q1).
    pub fn apply_2q(&mut self, m: [[C64; 4]; 4], q0: usize, q1: usize) {
        assert_ne!(q0, q1);
        let (s0, s1) = (1usize << q0, 1usize << q1);
        for base in 0..self.amps.len() {
            if base & s0 == 0 && base & s1 == 0 {
                let idx = [base, base | s0, base | s1, base | s0 | s1];
                let a: Vec<C64> = idx.iter().map(|&i| self.amps[i]).collect();
                for (row, &i) in idx.iter().enumerate() {
                    self.amps[i] = (0..4).map(|col| m[row][col] * a[col]).sum();
                }
            }
        }
    }

    /// Apply an X/Y/Z Pauli (as a unitary, with phase) on one qubit.
    pub fn apply_pauli(&mut self, kind: char, q: usize) {
        match kind {
            'X' => self.apply_1q([[ZERO, ONE], [ONE, ZERO]], q),
            'Y' => self.apply_1q(
                [[ZERO, C64::new(0.0, -1.0)], [C64::new(0.0, 1.0), ZERO]],
                q,
            ),
            'Z' => self.apply_1q([[ONE, ZERO], [ZERO, -ONE]], q),
            'I' => {}
            _ => panic!("bad Pauli {kind}"),
        }
    }

    pub fn prob_one(&self, q: usize) -> f64 {
        let stride = 1usize << q;
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & stride != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    pub fn measure<R: Rng>(&mut self, q: usize, rng: &mut R) -> bool {
        let p1 = self.prob_one(q);
        let outcome = rng.gen::<f64>() < p1;
        self.project(q, outcome);
        outcome
    }

    pub fn project(&mut self, q: usize, outcome: bool) {
        let stride = 1usize << q;
        let mut norm = 0.0;
        for (i, a) in self.amps.iter_mut().enumerate() {
            if ((i & stride) != 0) != outcome {
                *a = ZERO;
            } else {
                norm += a.norm_sqr();
            }
        }
        let scale = 1.0 / norm.sqrt();
        for a in &mut self.amps {
            *a *= scale;
        }
    }

    pub fn fidelity(&self, reference: &[C64]) -> f64 {
        assert_eq!(reference.len(), self.amps.len());
        let ip: C64 = reference
            .iter()
            .zip(&self.amps)
            .map(|(r, a)| r.conj() * a)
            .sum();
        ip.norm_sqr()
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bell_state() {
        let mut s = DenseState::zeros(2);
        s.apply_gate(Gate::H, &[0]);
        s.apply_gate(Gate::Cx, &[0, 1]);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.amplitudes()[0].re - h).abs() < 1e-12);
        assert!((s.amplitudes()[3].re - h).abs() < 1e-12);
        assert!(s.amplitudes()[1].norm() < 1e-12);
        assert!((s.norm() - 1.0).abs() < 1e-12);
    }
}
