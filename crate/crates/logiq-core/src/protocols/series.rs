//! Decay-curve data: per-length survival probabilities, shot counts, and
//! post-selection retention.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SeriesError {
    #[error("sequence lengths must be strictly increasing")]
    LengthsNotIncreasing,
    #[error("lengths, survivals and shots must have equal size")]
    SizeMismatch,
    #[error("survival probability out of [0,1]")]
    BadProbability,
}

/// Survival-probability decay data for one experiment.
#[derive(Debug, Clone, Serialize)]
pub struct DecaySeries {
    pub protocol: String,
    pub method: String,
    pub lengths: Vec<u32>,
    /// Survival probability per length, over retained shots.
    pub survival: Vec<f64>,
    /// Retained shots per length.
    pub shots: Vec<u64>,
    /// Fraction of shots retained per length.
    pub retention: Vec<f64>,
    pub seed: u64,
}

impl DecaySeries {
    pub fn validate(&self) -> Result<(), SeriesError> {
        if self.lengths.len() != self.survival.len()
            || self.lengths.len() != self.shots.len()
            || self.lengths.len() != self.retention.len()
        {
            return Err(SeriesError::SizeMismatch);
        }
        if !self.lengths.windows(2).all(|w| w[0] < w[1]) {
            return Err(SeriesError::LengthsNotIncreasing);
        }
        if self
            .survival
            .iter()
            .chain(self.retention.iter())
            .any(|p| !(0.0..=1.0).contains(p))
        {
            return Err(SeriesError::BadProbability);
        }
        Ok(())
    }

    /// CSV with fixed columns: L, survival, shots, retention.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("L,survival,shots,retention\n");
        for i in 0..self.lengths.len() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                self.lengths[i], self.survival[i], self.shots[i], self.retention[i]
            ));
        }
        out
    }
}
