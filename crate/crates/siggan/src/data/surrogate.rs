//! Synthetic milling-vibration corpus with a known label-to-amplitude
//! coupling.
//!
//! Every combination of four spindle speeds, four feed rates and four cut
//! depths yields one recording: a five-harmonic series at the spindle
//! frequency whose amplitude grows affinely with the surface roughness the
//! cut produces, plus roughness-scaled measurement noise. Rougher cuts
//! vibrate harder, so a generator conditioned on roughness has a physical
//! relationship to learn, and a regressor can recover roughness from the
//! signal alone.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use std::f64::consts::TAU;

use crate::data::{Dataset, LabeledSignal, MachiningParams, NormRecord};
use crate::error::{Error, Result};

/// Grid and signal-model constants for the synthetic corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateSpec {
    pub rpms: Vec<f64>,
    pub feeds_mm_min: Vec<f64>,
    pub depths_um: Vec<f64>,
    pub signal_len: usize,
    pub sample_rate_hz: f64,
    pub harmonics: usize,
    /// Amplitude falloff per harmonic step.
    pub harmonic_decay: f64,
    /// Noise floor relative to the roughness-coupled amplitude.
    pub noise_level: f64,
    /// Training-split size; the rest of the grid is held out.
    pub train_count: usize,
}

impl Default for SurrogateSpec {
    fn default() -> Self {
        SurrogateSpec {
            rpms: vec![3000.0, 4200.0, 5400.0, 6600.0],
            feeds_mm_min: vec![10.0, 20.0, 30.0, 40.0],
            depths_um: vec![4.0, 8.0, 12.0, 16.0],
            signal_len: 1024,
            sample_rate_hz: 8192.0,
            harmonics: 5,
            harmonic_decay: 0.5,
            noise_level: 0.05,
            train_count: 52,
        }
    }
}

impl SurrogateSpec {
    pub fn n_samples(&self) -> usize {
        self.rpms.len() * self.feeds_mm_min.len() * self.depths_um.len()
    }

    fn validate(&self) -> Result<()> {
        let axis_ok = |axis: &[f64]| {
            let mut sorted = axis.to_vec();
            sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
            sorted.windows(2).all(|w| w[0] < w[1]) && !axis.is_empty()
        };
        if !axis_ok(&self.rpms) || !axis_ok(&self.feeds_mm_min) || !axis_ok(&self.depths_um) {
            return Err(Error::Invalid(
                "parameter grid axes must be nonempty and duplicate-free".into(),
            ));
        }
        if self.train_count == 0 || self.train_count >= self.n_samples() {
            return Err(Error::Invalid(format!(
                "grid yields {} samples, cannot hold out a test set around train_count {}",
                self.n_samples(),
                self.train_count
            )));
        }
        if self.signal_len < 64 {
            return Err(Error::Invalid("surrogate signals need length >= 64".into()));
        }
        if self.harmonics == 0 {
            return Err(Error::Invalid("surrogate needs >= 1 harmonic".into()));
        }
        let f_max = self.rpms.iter().cloned().fold(0.0, f64::max) / 60.0 * self.harmonics as f64;
        if f_max >= self.sample_rate_hz / 2.0 {
            return Err(Error::Invalid(format!(
                "highest harmonic {f_max} Hz exceeds Nyquist {}",
                self.sample_rate_hz / 2.0
            )));
        }
        Ok(())
    }
}

/// Mean surface roughness (um) produced by a cut, before measurement jitter:
/// grows with the square of feed, drops as depth stabilizes the tool.
pub fn roughness_mean(params: &MachiningParams) -> f64 {
    0.002 * params.feed_mm_min * params.feed_mm_min / (4.0 + params.depth_um)
}

/// Vibration amplitude coupled to roughness: `0.2 + 2 * Ra`.
pub fn amplitude_for_roughness(ra_um: f64) -> f64 {
    0.2 + 2.0 * ra_um
}

/// Builds the grid corpus, shuffles it with the seed, splits off the
/// training set and stamps the train-side normalization. The same seed
/// reproduces every draw bit-for-bit.
pub fn synth_dataset(spec: &SurrogateSpec, seed: u64) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit_normal = Normal::new(0.0, 1.0).expect("valid std");
    let dt = 1.0 / spec.sample_rate_hz;
    let mut signals = Vec::with_capacity(spec.n_samples());
    let mut id = 0u64;
    for &rpm in &spec.rpms {
        for &feed in &spec.feeds_mm_min {
            for &depth in &spec.depths_um {
                let params = MachiningParams {
                    rpm,
                    feed_mm_min: feed,
                    depth_um: depth,
                };
                let jitter: f64 = unit_normal.sample(&mut rng);
                let ra = (roughness_mean(&params) * (1.0 + 0.05 * jitter)).max(1e-4);
                let amp = amplitude_for_roughness(ra);
                let f0 = params.spindle_hz();
                let phases: Vec<f64> = (0..spec.harmonics)
                    .map(|_| rng.gen_range(0.0..TAU))
                    .collect();
                let mut signal = Vec::with_capacity(spec.signal_len);
                for n in 0..spec.signal_len {
                    let t = n as f64 * dt;
                    let mut v = 0.0;
                    for (h, &phase) in phases.iter().enumerate() {
                        let weight = spec.harmonic_decay.powi(h as i32);
                        v += amp * weight * (TAU * (h + 1) as f64 * f0 * t + phase).sin();
                    }
                    v += spec.noise_level * amp * unit_normal.sample(&mut rng);
                    signal.push(v);
                }
                signals.push(LabeledSignal {
                    id,
                    params,
                    ra_um: ra,
                    signal,
                });
                id += 1;
            }
        }
    }
    signals.shuffle(&mut rng);
    let test = signals.split_off(spec.train_count);
    let norm = NormRecord::from_signals(&signals)?;
    let ds = Dataset {
        sample_rate_hz: spec.sample_rate_hz,
        train: signals,
        test,
        norm: Some(norm),
    };
    ds.validate()?;
    Ok(ds)
}
