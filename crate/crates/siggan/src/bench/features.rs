//! Hand-made signal statistics for the feature-based regression baseline.

use crate::error::{Error, Result};
use crate::spectral::{fft_real, next_pow2};

pub const FEATURE_DIM: usize = 12;

/// 12 statistics: mean, standard deviation, RMS, peak-to-peak, skewness,
/// kurtosis, crest factor, spectral centroid (Hz), and 4 octave-band energy
/// ratios covering (0, Nyquist].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector {
    pub mean: f64,
    pub std: f64,
    pub rms: f64,
    pub peak_to_peak: f64,
    pub skewness: f64,
    /// Plain (non-excess) kurtosis: 3 for a Gaussian.
    pub kurtosis: f64,
    pub crest_factor: f64,
    pub spectral_centroid_hz: f64,
    pub band_ratios: [f64; 4],
    /// Zero-variance signal: skewness/kurtosis forced to 0.
    pub degenerate_moments: bool,
    /// Zero spectral energy: band ratios forced uniform.
    pub degenerate_spectrum: bool,
}

impl FeatureVector {
    pub fn to_array(&self) -> [f64; FEATURE_DIM] {
        [
            self.mean,
            self.std,
            self.rms,
            self.peak_to_peak,
            self.skewness,
            self.kurtosis,
            self.crest_factor,
            self.spectral_centroid_hz,
            self.band_ratios[0],
            self.band_ratios[1],
            self.band_ratios[2],
            self.band_ratios[3],
        ]
    }
}

/// Extracts the 12-dimensional feature vector. Spectral quantities come from
/// the magnitude spectrum of the zero-padded FFT; the DC bin is excluded so
/// constant offsets do not masquerade as band energy.
pub fn extract_features(signal: &[f64], sample_rate_hz: f64) -> Result<FeatureVector> {
    if signal.len() < 64 {
        return Err(Error::Invalid(format!(
            "feature extraction needs L >= 64, got {}",
            signal.len()
        )));
    }
    if sample_rate_hz <= 0.0 {
        return Err(Error::Invalid("sample rate must be positive".into()));
    }
    let n = signal.len() as f64;
    let mean = signal.iter().sum::<f64>() / n;
    let var = signal.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let std = var.sqrt();
    let rms = (signal.iter().map(|&v| v * v).sum::<f64>() / n).sqrt();
    let max = signal.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = signal.iter().cloned().fold(f64::INFINITY, f64::min);
    let peak_to_peak = max - min;
    let peak_abs = max.abs().max(min.abs());

    let degenerate_moments = std < 1e-300;
    let (skewness, kurtosis) = if degenerate_moments {
        (0.0, 0.0)
    } else {
        let m3 = signal.iter().map(|&v| (v - mean).powi(3)).sum::<f64>() / n;
        let m4 = signal.iter().map(|&v| (v - mean).powi(4)).sum::<f64>() / n;
        (m3 / std.powi(3), m4 / (var * var))
    };
    let crest_factor = if rms > 0.0 { peak_abs / rms } else { 0.0 };

    // magnitude spectrum over the zero-padded length; frequencies stay
    // physical because the bin width shrinks with the padding
    let padded_len = next_pow2(signal.len());
    let mut padded = signal.to_vec();
    padded.resize(padded_len, 0.0);
    let (re, im) = fft_real(&padded)?;
    let bin_hz = sample_rate_hz / padded_len as f64;
    let nyquist = sample_rate_hz / 2.0;
    let mut centroid_num = 0.0;
    let mut centroid_den = 0.0;
    let mut band_energy = [0.0f64; 4];
    for k in 1..=padded_len / 2 {
        let mag = (re[k] * re[k] + im[k] * im[k]).sqrt();
        let f = k as f64 * bin_hz;
        centroid_num += f * mag;
        centroid_den += mag;
        // octave split of (0, nyquist]: edges at nyquist/8, /4, /2
        let band = if f <= nyquist / 8.0 {
            0
        } else if f <= nyquist / 4.0 {
            1
        } else if f <= nyquist / 2.0 {
            2
        } else {
            3
        };
        band_energy[band] += mag * mag;
    }
    let total: f64 = band_energy.iter().sum();
    let degenerate_spectrum = !(total.is_finite() && total > 0.0) || centroid_den <= 0.0;
    let (spectral_centroid_hz, band_ratios) = if degenerate_spectrum {
        (0.0, [0.25; 4])
    } else {
        (
            centroid_num / centroid_den,
            [
                band_energy[0] / total,
                band_energy[1] / total,
                band_energy[2] / total,
                band_energy[3] / total,
            ],
        )
    };

    let fv = FeatureVector {
        mean,
        std,
        rms,
        peak_to_peak,
        skewness,
        kurtosis,
        crest_factor,
        spectral_centroid_hz,
        band_ratios,
        degenerate_moments,
        degenerate_spectrum,
    };
    if fv.to_array().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("feature extraction".into()));
    }
    Ok(fv)
}
