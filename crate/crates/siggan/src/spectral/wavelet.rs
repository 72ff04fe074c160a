//! Morlet continuous wavelet transform and magnitude-squared wavelet
//! coherence between two signals.
//!
//! The analytic Morlet mother (center frequency `omega0 = 6`) is applied in
//! the frequency domain: each scale multiplies the padded signal spectrum by
//! `pi^(-1/4) * sqrt(2*pi*s) * exp(-(s*w - omega0)^2 / 2)` on positive
//! frequencies and zero elsewhere, then transforms back. The Fourier period
//! of scale `s` is `lambda = 4*pi*s / (omega0 + sqrt(2 + omega0^2))`
//! (about `1.033 * s` at `omega0 = 6`), and edge effects reach
//! `sqrt(2) * s` samples into the signal (the cone of influence).
//!
//! Coherence divides the squared modulus of the smoothed cross-spectrum by
//! the product of the smoothed auto-spectra. Smoothing runs a per-scale
//! Gaussian over time (sigma = s, truncated at 3 sigma, weights renormalized
//! at the edges) followed by a 3-point boxcar across scales. Because the
//! identical smoothing is applied to numerator and denominator, coherence of
//! a signal with itself is exactly 1 wherever energy is present, and
//! Cauchy-Schwarz keeps every cell in [0, 1] up to rounding.

use crate::error::{Error, Result};
use crate::spectral::fft::{fft, ifft, next_pow2};
use std::f64::consts::{PI, TAU};

pub const MORLET_OMEGA0: f64 = 6.0;

/// `lambda / s`: Fourier period per unit scale for the Morlet mother.
pub fn fourier_period_factor() -> f64 {
    4.0 * PI / (MORLET_OMEGA0 + (2.0 + MORLET_OMEGA0 * MORLET_OMEGA0).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CwtSpec {
    /// Scales in samples, ascending.
    pub scales: Vec<f64>,
}

impl CwtSpec {
    /// `n` log-spaced scales covering `[2, len/4]` samples.
    pub fn for_len(len: usize, n: usize) -> Result<Self> {
        if len < 16 {
            return Err(Error::Invalid(format!(
                "signal too short for a wavelet analysis: {len}"
            )));
        }
        if n < 2 {
            return Err(Error::Invalid("need at least two scales".into()));
        }
        let s_min: f64 = 2.0;
        let s_max = len as f64 / 4.0;
        let ratio = s_max / s_min;
        let scales = (0..n)
            .map(|j| s_min * ratio.powf(j as f64 / (n - 1) as f64))
            .collect();
        Ok(CwtSpec { scales })
    }

    pub fn default_for_len(len: usize) -> Result<Self> {
        Self::for_len(len, 32)
    }

    /// Fourier periods (samples) matching each scale.
    pub fn periods(&self) -> Vec<f64> {
        let f = fourier_period_factor();
        self.scales.iter().map(|s| s * f).collect()
    }
}

/// Complex CWT coefficients: `re[scale][time]`, `im[scale][time]`.
#[derive(Debug, Clone)]
pub struct Cwt {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

/// Morlet CWT of `x` over the given scales (unit sample spacing).
pub fn morlet_cwt(x: &[f64], spec: &CwtSpec) -> Result<Cwt> {
    let l = x.len();
    if l < 4 {
        return Err(Error::Invalid("signal too short for cwt".into()));
    }
    let n = next_pow2(2 * l);
    let mut base_re = vec![0.0; n];
    let mut base_im = vec![0.0; n];
    base_re[..l].copy_from_slice(x);
    fft(&mut base_re, &mut base_im)?;

    // angular frequency of bin k; negative for k > n/2
    let omega: Vec<f64> = (0..n)
        .map(|k| {
            if k <= n / 2 {
                TAU * k as f64 / n as f64
            } else {
                -TAU * (n - k) as f64 / n as f64
            }
        })
        .collect();

    let norm0 = PI.powf(-0.25);
    let mut re = Vec::with_capacity(spec.scales.len());
    let mut im = Vec::with_capacity(spec.scales.len());
    let mut wr = vec![0.0; n];
    let mut wi = vec![0.0; n];
    for &s in &spec.scales {
        let norm = norm0 * (TAU * s).sqrt();
        for k in 0..n {
            let w = omega[k];
            if w > 0.0 {
                let arg = s * w - MORLET_OMEGA0;
                let daughter = norm * (-0.5 * arg * arg).exp();
                wr[k] = base_re[k] * daughter;
                wi[k] = base_im[k] * daughter;
            } else {
                wr[k] = 0.0;
                wi[k] = 0.0;
            }
        }
        ifft(&mut wr, &mut wi)?;
        re.push(wr[..l].to_vec());
        im.push(wi[..l].to_vec());
    }
    Ok(Cwt { re, im })
}

/// Gaussian smoothing along time, sigma = `scale`, truncated at 3 sigma with
/// the weights renormalized over the in-bounds support.
fn smooth_time(row: &[f64], scale: f64) -> Vec<f64> {
    let l = row.len();
    let radius = (3.0 * scale).ceil() as usize;
    let mut kernel = Vec::with_capacity(2 * radius + 1);
    for d in -(radius as isize)..=(radius as isize) {
        let z = d as f64 / scale;
        kernel.push((-0.5 * z * z).exp());
    }
    let mut out = vec![0.0; l];
    for t in 0..l {
        let lo = t.saturating_sub(radius);
        let hi = (t + radius).min(l - 1);
        let mut acc = 0.0;
        let mut wsum = 0.0;
        for u in lo..=hi {
            let w = kernel[(u + radius) - t];
            acc += w * row[u];
            wsum += w;
        }
        out[t] = acc / wsum;
    }
    out
}

/// 3-point boxcar across scales, renormalized at the first and last row.
fn smooth_scales(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let ns = rows.len();
    let l = rows[0].len();
    let mut out = vec![vec![0.0; l]; ns];
    for j in 0..ns {
        let lo = j.saturating_sub(1);
        let hi = (j + 1).min(ns - 1);
        let k = (hi - lo + 1) as f64;
        for t in 0..l {
            let mut acc = 0.0;
            for r in rows.iter().take(hi + 1).skip(lo) {
                acc += r[t];
            }
            out[j][t] = acc / k;
        }
    }
    out
}

fn smooth_field(field: &[Vec<f64>], scales: &[f64]) -> Vec<Vec<f64>> {
    let time_smoothed: Vec<Vec<f64>> = field
        .iter()
        .zip(scales)
        .map(|(row, &s)| smooth_time(row, s))
        .collect();
    smooth_scales(&time_smoothed)
}

/// Wavelet coherence map plus its cone of influence.
#[derive(Debug, Clone)]
pub struct CoherenceMap {
    pub scales: Vec<f64>,
    pub periods: Vec<f64>,
    /// `values[scale][time]` in `[0, 1]`.
    pub values: Vec<Vec<f64>>,
    /// Number of cells whose smoothed energy vanished (reported as 0).
    pub zero_energy_cells: usize,
}

impl CoherenceMap {
    /// True where the cell is clear of edge effects: distance to the nearest
    /// signal edge is at least `sqrt(2) * scale`.
    pub fn inside_coi(&self, scale_idx: usize, t: usize) -> bool {
        let l = self.values[scale_idx].len();
        let tau = std::f64::consts::SQRT_2 * self.scales[scale_idx];
        let dist = (t.min(l - 1 - t)) as f64;
        dist >= tau
    }

    /// Mean coherence over edge-clear cells; falls back to the full map when
    /// every cell is edge-contaminated.
    pub fn mean_inside_coi(&self) -> f64 {
        let mut acc = 0.0;
        let mut n = 0usize;
        for (j, row) in self.values.iter().enumerate() {
            for (t, &v) in row.iter().enumerate() {
                if self.inside_coi(j, t) {
                    acc += v;
                    n += 1;
                }
            }
        }
        if n == 0 {
            return self.mean_all();
        }
        acc / n as f64
    }

    pub fn mean_all(&self) -> f64 {
        let total: f64 = self.values.iter().flatten().sum();
        let count: usize = self.values.iter().map(|r| r.len()).sum();
        total / count as f64
    }
}

/// Magnitude-squared wavelet coherence of `x` and `y`.
pub fn wavelet_coherence(x: &[f64], y: &[f64], spec: &CwtSpec) -> Result<CoherenceMap> {
    if x.len() != y.len() {
        return Err(Error::Invalid(format!(
            "coherence needs equal lengths, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    let wx = morlet_cwt(x, spec)?;
    let wy = morlet_cwt(y, spec)?;
    let ns = spec.scales.len();
    let l = x.len();

    let mut cross_re = vec![vec![0.0; l]; ns];
    let mut cross_im = vec![vec![0.0; l]; ns];
    let mut auto_x = vec![vec![0.0; l]; ns];
    let mut auto_y = vec![vec![0.0; l]; ns];
    for j in 0..ns {
        for t in 0..l {
            let (xr, xi) = (wx.re[j][t], wx.im[j][t]);
            let (yr, yi) = (wy.re[j][t], wy.im[j][t]);
            // x * conj(y)
            cross_re[j][t] = xr * yr + xi * yi;
            cross_im[j][t] = xi * yr - xr * yi;
            auto_x[j][t] = xr * xr + xi * xi;
            auto_y[j][t] = yr * yr + yi * yi;
        }
    }

    let s_cross_re = smooth_field(&cross_re, &spec.scales);
    let s_cross_im = smooth_field(&cross_im, &spec.scales);
    let s_auto_x = smooth_field(&auto_x, &spec.scales);
    let s_auto_y = smooth_field(&auto_y, &spec.scales);

    let mut values = vec![vec![0.0; l]; ns];
    let mut zero_energy_cells = 0usize;
    for j in 0..ns {
        for t in 0..l {
            let denom = s_auto_x[j][t] * s_auto_y[j][t];
            if denom <= 0.0 || !denom.is_normal() {
                zero_energy_cells += 1;
                continue;
            }
            let num = s_cross_re[j][t] * s_cross_re[j][t] + s_cross_im[j][t] * s_cross_im[j][t];
            // rounding can nudge a hair past 1; the exact value cannot
            values[j][t] = (num / denom).clamp(0.0, 1.0);
        }
    }
    Ok(CoherenceMap {
        scales: spec.scales.clone(),
        periods: spec.periods(),
        values,
        zero_energy_cells,
    })
}
