//! Stochastic Pauli noise model for trajectory simulation.
//!
//! Depolarizing events insert a uniformly random non-identity Pauli on the
//! gate's support (3 choices for one qubit, 15 for two), which keeps every
//! trajectory pure. Averaged over trajectories this reproduces the
//! trace-preserving depolarizing map; the parameter conversion between the
//! two conventions lives with the analysis code.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NoiseError {
    #[error("probability {0} for field {1} is outside [0, 1]")]
    BadProbability(String, String),
    #[error("unknown noise preset '{0}' (expected zero, h1-1 or h2-1)")]
    UnknownPreset(String),
}

/// Error parameters for a trajectory run. All values are probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Depolarizing probability after each single-qubit gate.
    pub p1: f64,
    /// Depolarizing probability after each two-qubit gate.
    pub p2: f64,
    /// Bit-flip probability at state preparation and at measurement readout.
    pub p_spam: f64,
    /// Per-qubit depolarizing probability per idle scheduling tick.
    pub p_idle_per_tick: f64,
    /// Depolarizing probability on each spectator qubit per measurement.
    pub crosstalk: f64,
}

impl NoiseModel {
    pub const fn zero() -> Self {
        NoiseModel { p1: 0.0, p2: 0.0, p_spam: 0.0, p_idle_per_tick: 0.0, crosstalk: 0.0 }
    }

    /// Machine presets; printed table values are in units of 1e-4.
    pub fn preset(name: &str) -> Result<Self, NoiseError> {
        let m = match name {
            "zero" => NoiseModel::zero(),
            "h1-1" => NoiseModel {
                p1: 0.29e-4,
                p2: 8.8e-4,
                p_spam: 26e-4,
                p_idle_per_tick: 1.8e-4,
                crosstalk: 0.083e-4,
            },
            "h2-1" => NoiseModel {
                p1: 0.25e-4,
                p2: 18.3e-4,
                p_spam: 16e-4,
                p_idle_per_tick: 2.2e-4,
                crosstalk: 0.045e-4,
            },
            other => return Err(NoiseError::UnknownPreset(other.to_string())),
        };
        Ok(m)
    }

    pub fn is_noiseless(&self) -> bool {
        self.p1 == 0.0
            && self.p2 == 0.0
            && self.p_spam == 0.0
            && self.p_idle_per_tick == 0.0
            && self.crosstalk == 0.0
    }

    pub fn validate(&self) -> Result<(), NoiseError> {
        for (name, v) in [
            ("p1", self.p1),
            ("p2", self.p2),
            ("p_spam", self.p_spam),
            ("p_idle_per_tick", self.p_idle_per_tick),
            ("crosstalk", self.crosstalk),
        ] {
            if !(0.0..=1.0).contains(&v) || v.is_nan() {
                return Err(NoiseError::BadProbability(format!("{v}"), name.to_string()));
            }
        }
        Ok(())
    }
}

const PAULIS: [char; 3] = ['X', 'Y', 'Z'];

/// Sample a uniformly random non-identity Pauli on one qubit with
/// probability `p`; returns None for the identity outcome.
pub fn sample_depolarizing_1q<R: Rng>(p: f64, rng: &mut R) -> Option<char> {
    if p > 0.0 && rng.gen::<f64>() < p {
        Some(PAULIS[rng.gen_range(0..3)])
    } else {
        None
    }
}

/// Sample a uniformly random non-identity two-qubit Pauli (15 options) with
/// probability `p`.
pub fn sample_depolarizing_2q<R: Rng>(p: f64, rng: &mut R) -> Option<(char, char)> {
    if p > 0.0 && rng.gen::<f64>() < p {
        let k = rng.gen_range(1..16u8);
        let table = ['I', 'X', 'Y', 'Z'];
        Some((table[(k & 3) as usize], table[(k >> 2) as usize]))
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn presets_resolve_to_table_values() {
        let h1 = NoiseModel::preset("h1-1").unwrap();
        assert_eq!(h1.p2, 8.8e-4);
        assert_eq!(h1.p_spam, 26e-4);
        let h2 = NoiseModel::preset("h2-1").unwrap();
        assert_eq!(h2.p1, 0.25e-4);
        assert_eq!(h2.p2, 18.3e-4);
        assert_eq!(h2.p_idle_per_tick, 2.2e-4);
        assert_eq!(h2.crosstalk, 0.045e-4);
        assert!(NoiseModel::preset("zero").unwrap().is_noiseless());
        assert!(NoiseModel::preset("h9").is_err());
    }

    #[test]
    fn two_qubit_sampling_is_uniform_over_15() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(9);
        let mut counts = std::collections::HashMap::new();
        for _ in 0..30_000 {
            if let Some(pp) = sample_depolarizing_2q(1.0, &mut rng) {
                *counts.entry(pp).or_insert(0u32) += 1;
            }
        }
        assert_eq!(counts.len(), 15);
        assert!(!counts.contains_key(&('I', 'I')));
        for (_, c) in counts {
            assert!((c as f64 - 2000.0).abs() < 300.0);
        }
    }
}
