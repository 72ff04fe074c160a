//! Dataset types, the synthetic vibration corpus, normalization and file I/O.
//!
//! A [`Dataset`] keeps its training and held-out samples in separate lists;
//! the held-out side never feeds any training path, and every consumer that
//! augments or fits works off the train list alone. Normalization statistics
//! come from the train split only and are stored alongside the data so the
//! mapping survives serialization.

pub mod io;
pub mod surrogate;

use crate::error::{Error, Result};

pub use surrogate::{synth_dataset, SurrogateSpec};

/// Machining condition of one recording.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MachiningParams {
    pub rpm: f64,
    pub feed_mm_min: f64,
    pub depth_um: f64,
}

impl MachiningParams {
    /// Spindle rotation frequency in Hz.
    pub fn spindle_hz(&self) -> f64 {
        self.rpm / 60.0
    }
}

/// One vibration recording with its condition and roughness label.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSignal {
    pub id: u64,
    pub params: MachiningParams,
    /// Surface roughness (um), the regression target.
    pub ra_um: f64,
    pub signal: Vec<f64>,
}

/// Train-split statistics used to map signals to [-1, 1] and labels to [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormRecord {
    pub signal_min: f64,
    pub signal_max: f64,
    pub ra_min: f64,
    pub ra_max: f64,
}

impl NormRecord {
    pub fn from_signals(signals: &[LabeledSignal]) -> Result<Self> {
        if signals.is_empty() {
            return Err(Error::Invalid("cannot normalize an empty split".into()));
        }
        let mut signal_min = f64::INFINITY;
        let mut signal_max = f64::NEG_INFINITY;
        let mut ra_min = f64::INFINITY;
        let mut ra_max = f64::NEG_INFINITY;
        for s in signals {
            for &v in &s.signal {
                signal_min = signal_min.min(v);
                signal_max = signal_max.max(v);
            }
            ra_min = ra_min.min(s.ra_um);
            ra_max = ra_max.max(s.ra_um);
        }
        // negated form on purpose: it also rejects NaN extrema
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(signal_min < signal_max) || !(ra_min < ra_max) {
            return Err(Error::Invalid(
                "degenerate split: constant signals or constant labels".into(),
            ));
        }
        Ok(NormRecord {
            signal_min,
            signal_max,
            ra_min,
            ra_max,
        })
    }

    pub fn norm_signal_value(&self, v: f64) -> f64 {
        2.0 * (v - self.signal_min) / (self.signal_max - self.signal_min) - 1.0
    }

    pub fn denorm_signal_value(&self, v: f64) -> f64 {
        (v + 1.0) / 2.0 * (self.signal_max - self.signal_min) + self.signal_min
    }

    pub fn norm_label(&self, ra: f64) -> f64 {
        (ra - self.ra_min) / (self.ra_max - self.ra_min)
    }

    pub fn denorm_label(&self, y: f64) -> f64 {
        y * (self.ra_max - self.ra_min) + self.ra_min
    }

    pub fn norm_signal(&self, signal: &[f64]) -> Vec<f64> {
        signal.iter().map(|&v| self.norm_signal_value(v)).collect()
    }

    pub fn denorm_signal(&self, signal: &[f64]) -> Vec<f64> {
        signal
            .iter()
            .map(|&v| self.denorm_signal_value(v))
            .collect()
    }
}

/// Recordings split into a training set and a held-out evaluation set.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub sample_rate_hz: f64,
    pub train: Vec<LabeledSignal>,
    pub test: Vec<LabeledSignal>,
    /// Present once the training split has fixed the normalization.
    pub norm: Option<NormRecord>,
}

impl Dataset {
    pub fn signal_len(&self) -> usize {
        self.train
            .first()
            .or(self.test.first())
            .map_or(0, |s| s.signal.len())
    }

    pub fn all(&self) -> impl Iterator<Item = &LabeledSignal> {
        self.train.iter().chain(self.test.iter())
    }

    pub fn len(&self) -> usize {
        self.train.len() + self.test.len()
    }

    pub fn is_empty(&self) -> bool {
        self.train.is_empty() && self.test.is_empty()
    }

    /// Normalization record; errors when the dataset never fixed one.
    pub fn norm(&self) -> Result<NormRecord> {
        self.norm
            .ok_or_else(|| Error::Invalid("dataset carries no normalization record".into()))
    }

    pub fn validate(&self) -> Result<()> {
        let l = self.signal_len();
        let mut ids = std::collections::HashSet::new();
        for s in self.all() {
            if s.signal.len() != l {
                return Err(Error::Invalid(format!(
                    "sample {} has length {}, dataset has {}",
                    s.id,
                    s.signal.len(),
                    l
                )));
            }
            if !s.ra_um.is_finite() || s.ra_um <= 0.0 || s.signal.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("sample {}", s.id)));
            }
            if !ids.insert(s.id) {
                return Err(Error::Invalid(format!(
                    "sample id {} appears in both splits",
                    s.id
                )));
            }
        }
        Ok(())
    }

    /// Test-split members whose spindle frequency sits strictly above the
    /// median over the whole dataset.
    pub fn high_frequency_test(&self) -> Vec<&LabeledSignal> {
        let mut freqs: Vec<f64> = self.all().map(|s| s.params.spindle_hz()).collect();
        if freqs.is_empty() {
            return Vec::new();
        }
        freqs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = if freqs.len() % 2 == 1 {
            freqs[freqs.len() / 2]
        } else {
            0.5 * (freqs[freqs.len() / 2 - 1] + freqs[freqs.len() / 2])
        };
        self.test
            .iter()
            .filter(|s| s.params.spindle_hz() > median)
            .collect()
    }
}
