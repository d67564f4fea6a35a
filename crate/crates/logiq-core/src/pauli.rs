//! Pauli operators in binary symplectic form with exact phase tracking.
//!
//! An n-qubit Pauli is stored as a pair of bit masks (X part, Z part) plus a
//! power of i. The single-qubit operator at position j is `i^{x·z} X^x Z^z`,
//! so (0,0)=I, (1,0)=X, (1,1)=Y, (0,1)=Z, all Hermitian; the global phase
//! exponent is carried separately.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Maximum supported qubit count (bit-mask representation).
pub const MAX_QUBITS: usize = 64;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PauliError {
    #[error("qubit count mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("qubit index {0} out of range for {1} qubits")]
    QubitOutOfRange(usize, usize),
    #[error("cannot parse Pauli string: {0}")]
    Parse(String),
}

/// Phase of a Pauli operator as a power of i: `i^0..i^3` = +1, +i, -1, -i.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    PlusOne,
    PlusI,
    MinusOne,
    MinusI,
}

impl Phase {
    pub fn from_exponent(e: u8) -> Self {
        match e % 4 {
            0 => Phase::PlusOne,
            1 => Phase::PlusI,
            2 => Phase::MinusOne,
            _ => Phase::MinusI,
        }
    }

    pub fn exponent(self) -> u8 {
        match self {
            Phase::PlusOne => 0,
            Phase::PlusI => 1,
            Phase::MinusOne => 2,
            Phase::MinusI => 3,
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Phase::PlusOne => "+",
            Phase::PlusI => "+i",
            Phase::MinusOne => "-",
            Phase::MinusI => "-i",
        };
        write!(f, "{s}")
    }
}

/// An n-qubit Pauli operator with phase.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    x: u64,
    z: u64,
    /// Phase exponent k in i^k, modulo 4.
    phase: u8,
}

impl PauliString {
    /// The identity on `n` qubits.
    pub fn identity(n: usize) -> Self {
        assert!(n <= MAX_QUBITS);
        PauliString { n, x: 0, z: 0, phase: 0 }
    }

    /// Build from explicit bit masks (bit j = qubit j).
    pub fn from_masks(n: usize, x: u64, z: u64, phase: Phase) -> Self {
        assert!(n <= MAX_QUBITS);
        let m = mask(n);
        PauliString { n, x: x & m, z: z & m, phase: phase.exponent() }
    }

    /// Single-qubit X/Y/Z embedded in `n` qubits.
    pub fn single(n: usize, qubit: usize, kind: char) -> Self {
        assert!(qubit < n);
        let (x, z) = match kind {
            'X' => (1u64 << qubit, 0),
            'Y' => (1u64 << qubit, 1u64 << qubit),
            'Z' => (0, 1u64 << qubit),
            'I' => (0, 0),
            _ => panic!("invalid Pauli kind {kind}"),
        };
        PauliString { n, x, z, phase: 0 }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn x_bits(&self) -> u64 {
        self.x
    }

    pub fn z_bits(&self) -> u64 {
        self.z
    }

    pub fn phase(&self) -> Phase {
        Phase::from_exponent(self.phase)
    }

    /// Number of non-identity tensor factors.
    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    pub fn is_identity_op(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// Hermitian iff the phase is real (the per-qubit factors are Hermitian).
    pub fn is_hermitian(&self) -> bool {
        self.phase % 2 == 0
    }

    /// The per-qubit letter at `qubit`.
    pub fn letter(&self, qubit: usize) -> char {
        let x = (self.x >> qubit) & 1;
        let z = (self.z >> qubit) & 1;
        match (x, z) {
            (0, 0) => 'I',
            (1, 0) => 'X',
            (1, 1) => 'Y',
            (0, 1) => 'Z',
            _ => unreachable!(),
        }
    }

    /// Set the letter at `qubit` without touching the phase.
    pub fn set_letter(&mut self, qubit: usize, kind: char) {
        assert!(qubit < self.n);
        let b = 1u64 << qubit;
        self.x &= !b;
        self.z &= !b;
        match kind {
            'I' => {}
            'X' => self.x |= b,
            'Y' => {
                self.x |= b;
                self.z |= b;
            }
            'Z' => self.z |= b,
            _ => panic!("invalid Pauli kind {kind}"),
        }
    }

    /// Operator product `self · other` with exact phase.
    pub fn multiply(&self, other: &PauliString) -> Result<PauliString, PauliError> {
        if self.n != other.n {
            return Err(PauliError::DimensionMismatch(self.n, other.n));
        }
        // Per qubit: i^{x1 z1} X^{x1} Z^{z1} · i^{x2 z2} X^{x2} Z^{z2}
        //   = i^{x1 z1 + x2 z2 + 2 z1 x2 - x3 z3} · i^{x3 z3} X^{x3} Z^{z3}.
        let x3 = self.x ^ other.x;
        let z3 = self.z ^ other.z;
        let mut e = self.phase as i32 + other.phase as i32;
        e += popcnt(self.x & self.z) + popcnt(other.x & other.z);
        e += 2 * popcnt(self.z & other.x);
        e -= popcnt(x3 & z3);
        Ok(PauliString {
            n: self.n,
            x: x3,
            z: z3,
            phase: e.rem_euclid(4) as u8,
        })
    }

    /// True iff the symplectic inner product vanishes.
    pub fn commutes(&self, other: &PauliString) -> Result<bool, PauliError> {
        if self.n != other.n {
            return Err(PauliError::DimensionMismatch(self.n, other.n));
        }
        let s = popcnt(self.x & other.z) + popcnt(self.z & other.x);
        Ok(s % 2 == 0)
    }

    /// Flip the sign (multiply by -1).
    pub fn negate(&mut self) {
        self.phase = (self.phase + 2) % 4;
    }

    pub fn with_phase(mut self, phase: Phase) -> Self {
        self.phase = phase.exponent();
        self
    }

    /// Equality of the operator part, ignoring phase.
    pub fn same_op(&self, other: &PauliString) -> bool {
        self.n == other.n && self.x == other.x && self.z == other.z
    }

    /// Conjugate by a single Clifford gate: returns g · self · g†.
    pub fn conjugate_by_gate(&self, gate: CliffordGate) -> PauliString {
        let mut p = *self;
        match gate {
            CliffordGate::X(q) => {
                if bit(p.z, q) {
                    p.negate();
                }
            }
            CliffordGate::Y(q) => {
                if bit(p.x, q) != bit(p.z, q) {
                    p.negate();
                }
            }
            CliffordGate::Z(q) => {
                if bit(p.x, q) {
                    p.negate();
                }
            }
            CliffordGate::H(q) => {
                let (xb, zb) = (bit(p.x, q), bit(p.z, q));
                if xb && zb {
                    p.negate();
                }
                set(&mut p.x, q, zb);
                set(&mut p.z, q, xb);
            }
            CliffordGate::S(q) => {
                // S X S† = Y, S Y S† = -X, S Z S† = Z.
                let (xb, zb) = (bit(p.x, q), bit(p.z, q));
                if xb && zb {
                    p.negate();
                }
                set(&mut p.z, q, xb ^ zb);
            }
            CliffordGate::Sdg(q) => {
                // S† X S = -Y, S† Y S = X.
                let (xb, zb) = (bit(p.x, q), bit(p.z, q));
                if xb && !zb {
                    p.negate();
                }
                set(&mut p.z, q, xb ^ zb);
            }
            CliffordGate::Cx(c, t) => {
                let (xc, zc) = (bit(p.x, c), bit(p.z, c));
                let (xt, zt) = (bit(p.x, t), bit(p.z, t));
                if xc && zt && (xt == zc) {
                    p.negate();
                }
                set(&mut p.x, t, xt ^ xc);
                set(&mut p.z, c, zc ^ zt);
            }
            CliffordGate::Cz(c, t) => {
                let (xc, zc) = (bit(p.x, c), bit(p.z, c));
                let (xt, zt) = (bit(p.x, t), bit(p.z, t));
                if xc && xt && (zc != zt) {
                    p.negate();
                }
                set(&mut p.z, t, zt ^ xc);
                set(&mut p.z, c, zc ^ xt);
            }
        }
        p
    }
}

/// Clifford generators used for Pauli conjugation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CliffordGate {
    X(usize),
    Y(usize),
    Z(usize),
    H(usize),
    S(usize),
    Sdg(usize),
    Cx(usize, usize),
    Cz(usize, usize),
}

fn mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

fn popcnt(v: u64) -> i32 {
    v.count_ones() as i32
}

fn bit(m: u64, q: usize) -> bool {
    (m >> q) & 1 == 1
}

fn set(m: &mut u64, q: usize, v: bool) {
    if v {
        *m |= 1 << q;
    } else {
        *m &= !(1 << q);
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.phase() {
            Phase::PlusOne => {}
            p => write!(f, "{p}")?,
        }
        for q in 0..self.n {
            write!(f, "{}", self.letter(q))?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for PauliString {
    type Err = PauliError;

    /// Parse text like `XXXXIII`, `-iXY`, `+ZZ`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let body = s.trim();
        let (phase, rest) = if let Some(r) = body.strip_prefix("+i") {
            (Phase::PlusI, r)
        } else if let Some(r) = body.strip_prefix("-i") {
            (Phase::MinusI, r)
        } else if let Some(r) = body.strip_prefix('+') {
            (Phase::PlusOne, r)
        } else if let Some(r) = body.strip_prefix('-') {
            (Phase::MinusOne, r)
        } else {
            (Phase::PlusOne, body)
        };
        if rest.is_empty() || rest.len() > MAX_QUBITS {
            return Err(PauliError::Parse(s.to_string()));
        }
        let mut p = PauliString::identity(rest.len());
        for (q, ch) in rest.chars().enumerate() {
            match ch {
                'I' | 'X' | 'Y' | 'Z' => p.set_letter(q, ch),
                _ => return Err(PauliError::Parse(s.to_string())),
            }
        }
        Ok(p.with_phase(phase))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn multiply_xz_gives_minus_i_y() {
        let r = p("XI").multiply(&p("ZI")).unwrap();
        assert_eq!(r, p("-iYI"));
    }

    #[test]
    fn multiply_eq1_generators() {
        // s1 · s2 from the code's generating set.
        let s1 = p("XXXXIII");
        let s2 = p("IXXIXXI");
        let r = s1.multiply(&s2).unwrap();
        assert_eq!(r, p("XIIXXXI"));
        assert_eq!(r.phase(), Phase::PlusOne);
    }

    #[test]
    fn multiply_self_inverse_up_to_phase() {
        for s in ["XYZIX", "YYYY", "-iZXZX", "IIII"] {
            let q = p(s);
            let r = q.multiply(&q).unwrap();
            assert!(r.is_identity_op());
            assert!(matches!(r.phase(), Phase::PlusOne | Phase::MinusOne));
        }
    }

    #[test]
    fn multiply_associative_with_phases() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(7);
        for _ in 0..500 {
            let n = 5;
            let mut ops = [PauliString::identity(n); 3];
            for op in &mut ops {
                *op = PauliString::from_masks(
                    n,
                    rng.gen::<u64>(),
                    rng.gen::<u64>(),
                    Phase::from_exponent(rng.gen_range(0..4)),
                );
            }
            let [a, b, c] = ops;
            let left = a.multiply(&b).unwrap().multiply(&c).unwrap();
            let right = a.multiply(&b.multiply(&c).unwrap()).unwrap();
            assert_eq!(left, right);
        }
    }

    #[test]
    fn commutation_rules() {
        assert!(!p("X").commutes(&p("Z")).unwrap());
        assert!(p("XX").commutes(&p("ZZ")).unwrap());
        // Logical X vs logical Z of the code overlap on three qubits.
        assert!(!p("IIIIXXX").commutes(&p("IIIIZZZ")).unwrap());
        // CSS generators commute.
        assert!(p("XXXXIII").commutes(&p("ZZZZIII")).unwrap());
        assert!(p("XXXXIII").commutes(&p("IZZIZZI")).unwrap());
    }

    #[test]
    fn dimension_mismatch_rejected() {
        assert_eq!(
            p("XX").multiply(&p("X")),
            Err(PauliError::DimensionMismatch(2, 1))
        );
        assert!(p("XX").commutes(&p("X")).is_err());
    }

    #[test]
    fn hermitian_iff_real_phase() {
        assert!(p("XYZ").is_hermitian());
        assert!(p("-XYZ").is_hermitian());
        assert!(!p("+iXYZ").is_hermitian());
        assert!(!p("-iXYZ").is_hermitian());
    }

    #[test]
    fn parse_display_round_trip() {
        for s in ["XXXXIII", "-iYI", "+iZZZ", "-XIX", "IIIIXXX"] {
            let q = p(s);
            let shown = q.to_string();
            assert_eq!(p(&shown), q);
        }
        assert_eq!(p("XXXXIII").to_string(), "XXXXIII");
        assert_eq!(p("-iYI").to_string(), "-iYI");
    }

    #[test]
    fn conjugation_basics() {
        // H X H = Z, H Z H = X, H Y H = -Y.
        assert_eq!(p("X").conjugate_by_gate(CliffordGate::H(0)), p("Z"));
        assert_eq!(p("Z").conjugate_by_gate(CliffordGate::H(0)), p("X"));
        assert_eq!(p("Y").conjugate_by_gate(CliffordGate::H(0)), p("-Y"));
        // S X S† = Y with phase +1.
        assert_eq!(p("X").conjugate_by_gate(CliffordGate::S(0)), p("Y"));
        assert_eq!(p("Y").conjugate_by_gate(CliffordGate::S(0)), p("-X"));
        assert_eq!(p("X").conjugate_by_gate(CliffordGate::Sdg(0)), p("-Y"));
        // CNOT propagation.
        assert_eq!(p("XI").conjugate_by_gate(CliffordGate::Cx(0, 1)), p("XX"));
        assert_eq!(p("IZ").conjugate_by_gate(CliffordGate::Cx(0, 1)), p("ZZ"));
        assert_eq!(p("IX").conjugate_by_gate(CliffordGate::Cx(0, 1)), p("IX"));
        assert_eq!(p("ZI").conjugate_by_gate(CliffordGate::Cx(0, 1)), p("ZI"));
    }
}
