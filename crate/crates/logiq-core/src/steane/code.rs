//! The [[7,1,3]] color-code tables: stabilizer generators, logical
//! operators, and the single-error syndrome lookup used by decoded logical
//! measurements.
//!
//! Qubits are 0-indexed here; the generator convention is
//!   s1 = XXXXIII   s4 = ZZZZIII
//!   s2 = IXXIXXI   s5 = IZZIZZI
//!   s3 = IIXXIXX   s6 = IIZZIZZ
//! with logical X = IIIIXXX and logical Z = IIIIZZZ. X- and Z-type
//! generators share supports, so one syndrome table serves both measurement
//! bases.

use crate::pauli::PauliString;

/// Stabilizer generator supports (same for the X- and Z-type triples).
pub const GENERATOR_SUPPORTS: [[usize; 4]; 3] = [
    [0, 1, 2, 3],
    [1, 2, 4, 5],
    [2, 3, 5, 6],
];

/// Support of both logical operators.
pub const LOGICAL_SUPPORT: [usize; 3] = [4, 5, 6];

pub const X_GENERATORS: [&str; 3] = ["XXXXIII", "IXXIXXI", "IIXXIXX"];
pub const Z_GENERATORS: [&str; 3] = ["ZZZZIII", "IZZIZZI", "IIZZIZZ"];
pub const LOGICAL_X: &str = "IIIIXXX";
pub const LOGICAL_Z: &str = "IIIIZZZ";

/// All six generators as Pauli strings, X-type first.
pub fn stabilizer_generators() -> Vec<PauliString> {
    X_GENERATORS
        .iter()
        .chain(Z_GENERATORS.iter())
        .map(|s| s.parse().unwrap())
        .collect()
}

pub fn logical_x() -> PauliString {
    LOGICAL_X.parse().unwrap()
}

pub fn logical_z() -> PauliString {
    LOGICAL_Z.parse().unwrap()
}

/// Map a 3-bit syndrome (bit i = generator i violated) to the unique qubit a
/// single error on which produces it. Zero syndrome maps to None.
pub fn lookup_qubit(syndrome: u8) -> Option<usize> {
    // Build once from the supports: qubit q flips generator i iff q is in
    // its support.
    const fn syndrome_of(q: usize) -> u8 {
        let mut s = 0u8;
        let mut i = 0;
        while i < 3 {
            let sup = GENERATOR_SUPPORTS[i];
            let mut j = 0;
            while j < 4 {
                if sup[j] == q {
                    s |= 1 << i;
                }
                j += 1;
            }
            i += 1;
        }
        s
    }
    const TABLE: [u8; 7] = {
        let mut t = [0u8; 7];
        let mut q = 0;
        while q < 7 {
            t[q] = syndrome_of(q);
            q += 1;
        }
        t
    };
    if syndrome == 0 {
        return None;
    }
    let mut q = 0;
    while q < 7 {
        if TABLE[q] == syndrome {
            return Some(q);
        }
        q += 1;
    }
    None
}

/// Decoded destructive logical measurement from seven raw bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SyndromeRecord {
    pub raw_logical: bool,
    /// Bit i = parity over generator i's support (Z-type generators for a
    /// Z-basis measurement, X-type for X-basis; identical supports).
    pub syndrome: u8,
    pub decoded_logical: bool,
    /// True iff the syndrome is nonzero.
    pub detected: bool,
}

/// Decode seven measured bits (bit q of `bits` = qubit q's outcome).
pub fn decode_measurement(bits: u8) -> SyndromeRecord {
    let parity = |support: &[usize]| -> bool {
        support.iter().fold(false, |acc, &q| acc ^ ((bits >> q) & 1 == 1))
    };
    let raw_logical = parity(&LOGICAL_SUPPORT);
    let mut syndrome = 0u8;
    for (i, sup) in GENERATOR_SUPPORTS.iter().enumerate() {
        if parity(sup) {
            syndrome |= 1 << i;
        }
    }
    let correction_in_support = lookup_qubit(syndrome)
        .map(|q| LOGICAL_SUPPORT.contains(&q))
        .unwrap_or(false);
    SyndromeRecord {
        raw_logical,
        syndrome,
        decoded_logical: raw_logical ^ correction_in_support,
        detected: syndrome != 0,
    }
}
