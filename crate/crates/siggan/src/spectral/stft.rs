//! Short-time Fourier transform and the magnitude-spectrogram distance used
//! as the spectral training loss, with its exact analytic gradient.
//!
//! Frames start at `t*hop` and must fit entirely inside the signal, so a
//! signal of length `L` yields `floor((L - W)/H) + 1` frames. Each frame is
//! multiplied by a periodic Hann window before the transform; only the
//! non-redundant bins `0..=W/2` of the real-input spectrum are kept.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::spectral::fft::fft;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StftSpec {
    pub window: usize,
    pub hop: usize,
}

impl Default for StftSpec {
    fn default() -> Self {
        StftSpec {
            window: 64,
            hop: 32,
        }
    }
}

impl StftSpec {
    pub fn new(window: usize, hop: usize) -> Result<Self> {
        if window < 2 || !window.is_power_of_two() {
            return Err(Error::Invalid(format!(
                "stft window must be a power of two >= 2, got {window}"
            )));
        }
        if hop == 0 {
            return Err(Error::Invalid("stft hop must be >= 1".into()));
        }
        Ok(StftSpec { window, hop })
    }

    /// Periodic Hann: `0.5 * (1 - cos(2*pi*n/W))`.
    pub fn hann(&self) -> Vec<f64> {
        (0..self.window)
            .map(|n| 0.5 * (1.0 - (TAU * n as f64 / self.window as f64).cos()))
            .collect()
    }

    pub fn n_frames(&self, signal_len: usize) -> Result<usize> {
        if signal_len < self.window {
            return Err(Error::Invalid(format!(
                "signal of length {signal_len} shorter than stft window {}",
                self.window
            )));
        }
        Ok((signal_len - self.window) / self.hop + 1)
    }

    pub fn n_bins(&self) -> usize {
        self.window / 2 + 1
    }
}

/// Magnitude spectrogram, `values[frame][bin]`, `bin <= W/2`.
#[derive(Debug, Clone)]
pub struct Spectrogram {
    pub spec: StftSpec,
    pub values: Vec<Vec<f64>>,
}

impl Spectrogram {
    pub fn n_frames(&self) -> usize {
        self.values.len()
    }

    pub fn n_bins(&self) -> usize {
        self.spec.n_bins()
    }

    /// Squared Frobenius distance to another spectrogram of the same shape.
    pub fn sq_distance(&self, other: &Spectrogram) -> Result<f64> {
        if self.spec != other.spec || self.n_frames() != other.n_frames() {
            return Err(Error::Invalid(
                "spectrogram shapes differ; cannot take a distance".into(),
            ));
        }
        let mut acc = 0.0;
        for (fa, fb) in self.values.iter().zip(&other.values) {
            for (a, b) in fa.iter().zip(fb) {
                let d = a - b;
                acc += d * d;
            }
        }
        Ok(acc)
    }
}

/// Full complex STFT of one signal: `(re, im)` per frame over bins `0..=W/2`.
fn stft_complex(x: &[f64], spec: StftSpec, hann: &[f64]) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
    let frames = spec.n_frames(x.len())?;
    let w = spec.window;
    let bins = spec.n_bins();
    let mut out = Vec::with_capacity(frames);
    let mut re = vec![0.0; w];
    let mut im = vec![0.0; w];
    for t in 0..frames {
        let start = t * spec.hop;
        for n in 0..w {
            re[n] = x[start + n] * hann[n];
            im[n] = 0.0;
        }
        fft(&mut re, &mut im)?;
        out.push((re[..bins].to_vec(), im[..bins].to_vec()));
    }
    Ok(out)
}

/// Magnitude spectrogram of one signal.
pub fn stft_magnitude(x: &[f64], spec: StftSpec) -> Result<Spectrogram> {
    let hann = spec.hann();
    let frames = stft_complex(x, spec, &hann)?;
    let values = frames
        .into_iter()
        .map(|(re, im)| {
            re.iter()
                .zip(&im)
                .map(|(a, b)| (a * a + b * b).sqrt())
                .collect()
        })
        .collect();
    Ok(Spectrogram { spec, values })
}

fn check_batch(reference: &[Vec<f64>], generated: &[Vec<f64>]) -> Result<usize> {
    if reference.is_empty() || reference.len() != generated.len() {
        return Err(Error::Invalid(format!(
            "spectral loss needs equal nonzero batch sizes, got {} and {}",
            reference.len(),
            generated.len()
        )));
    }
    let l = reference[0].len();
    for s in reference.iter().chain(generated) {
        if s.len() != l {
            return Err(Error::Invalid(
                "spectral loss needs signals of a single common length".into(),
            ));
        }
    }
    Ok(l)
}

/// Mean squared spectrogram distance over a batch of signal pairs:
/// `(1/M) * (1/T) * sum_i || |STFT(ref_i)| - |STFT(gen_i)| ||_F^2`
/// with `T` the frame count.
pub fn spectral_loss(
    reference: &[Vec<f64>],
    generated: &[Vec<f64>],
    spec: StftSpec,
) -> Result<f64> {
    let l = check_batch(reference, generated)?;
    let frames = spec.n_frames(l)? as f64;
    let m = reference.len() as f64;
    let mut acc = 0.0;
    for (r, g) in reference.iter().zip(generated) {
        let sr = stft_magnitude(r, spec)?;
        let sg = stft_magnitude(g, spec)?;
        acc += sr.sq_distance(&sg)?;
    }
    Ok(acc / (m * frames))
}

/// Loss plus `dL/d(generated_i[n])` for every signal in the batch.
///
/// The magnitude derivative at a zero bin uses the subgradient 0; everywhere
/// else `d|X|/dRe = Re/|X|`, `d|X|/dIm = Im/|X|`. The Fourier kernel pulls
/// back to the frame as `dL/dxw[n] = sum_f gRe[f] cos(th) - gIm[f] sin(th)`
/// with `th = 2*pi*f*n/W`, restricted to the retained bins, and the Hann
/// weight maps the frame gradient onto the signal with overlapping frames
/// accumulating.
pub fn spectral_loss_grad(
    reference: &[Vec<f64>],
    generated: &[Vec<f64>],
    spec: StftSpec,
) -> Result<(f64, Vec<Vec<f64>>)> {
    let l = check_batch(reference, generated)?;
    let frames = spec.n_frames(l)?;
    let m = reference.len();
    let w = spec.window;
    let bins = spec.n_bins();
    let hann = spec.hann();
    let norm = 1.0 / (m as f64 * frames as f64);

    // cos/sin table over the retained bins
    let mut cos_t = vec![0.0; bins * w];
    let mut sin_t = vec![0.0; bins * w];
    for f in 0..bins {
        for n in 0..w {
            let ang = TAU * ((f * n) % w) as f64 / w as f64;
            cos_t[f * w + n] = ang.cos();
            sin_t[f * w + n] = ang.sin();
        }
    }

    let mut loss = 0.0;
    let mut grads = Vec::with_capacity(m);
    for (r, g) in reference.iter().zip(generated) {
        let sr = stft_magnitude(r, spec)?;
        let cg = stft_complex(g, spec, &hann)?;
        let mut gx = vec![0.0; l];
        for (t, (g_re, g_im)) in cg.iter().enumerate() {
            let start = t * spec.hop;
            let mut g_bre = vec![0.0; bins];
            let mut g_bim = vec![0.0; bins];
            // bins whose true magnitude is zero (a bin-centered tone zeroes
            // everything outside the Hann mainlobe) come out of the FFT as
            // rounding dust ~1e-15; dividing by that turns Re/|X| into an
            // arbitrary direction, so anything far below the frame peak
            // takes the subgradient 0 instead
            let peak = (0..bins)
                .map(|f| g_re[f] * g_re[f] + g_im[f] * g_im[f])
                .fold(0.0f64, f64::max)
                .sqrt();
            let floor = peak * 1e-9;
            for f in 0..bins {
                let mag = (g_re[f] * g_re[f] + g_im[f] * g_im[f]).sqrt();
                let diff = mag - sr.values[t][f];
                loss += diff * diff * norm;
                // dL/d|G| scaled by the batch/frame normalization
                let gm = 2.0 * norm * diff;
                if mag > floor && mag > 0.0 {
                    g_bre[f] = gm * g_re[f] / mag;
                    g_bim[f] = gm * g_im[f] / mag;
                }
            }
            for n in 0..w {
                let mut acc = 0.0;
                for f in 0..bins {
                    acc += g_bre[f] * cos_t[f * w + n] - g_bim[f] * sin_t[f * w + n];
                }
                gx[start + n] += acc * hann[n];
            }
        }
        grads.push(gx);
    }
    // loss accumulated against generated magnitudes; same value as spectral_loss
    Ok((loss, grads))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn noise(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    #[test]
    fn hann_window_is_periodic_form() {
        let spec = StftSpec::new(4, 2).unwrap();
        let w = spec.hann();
        let want = [0.0, 0.5, 1.0, 0.5];
        for (a, b) in w.iter().zip(&want) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn frame_count_formula() {
        let spec = StftSpec::default();
        assert_eq!(spec.n_frames(1024).unwrap(), 31);
        assert_eq!(spec.n_frames(64).unwrap(), 1);
        assert!(spec.n_frames(63).is_err());
        let tight = StftSpec::new(64, 64).unwrap();
        assert_eq!(tight.n_frames(1024).unwrap(), 16);
    }

    #[test]
    fn pure_tone_peaks_at_its_bin() {
        // bin-8 tone in a 64-sample window
        let spec = StftSpec::new(64, 32).unwrap();
        let x: Vec<f64> = (0..256)
            .map(|n| (TAU * 8.0 * n as f64 / 64.0).sin())
            .collect();
        let sg = stft_magnitude(&x, spec).unwrap();
        for frame in &sg.values {
            let peak = frame
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .unwrap()
                .0;
            assert_eq!(peak, 8);
        }
    }

    #[test]
    fn loss_of_identical_batches_is_zero() {
        let x = vec![noise(256, 1), noise(256, 2)];
        let loss = spectral_loss(&x, &x, StftSpec::default()).unwrap();
        assert_eq!(loss, 0.0);
    }

    #[test]
    fn loss_is_symmetric_and_positive() {
        let a = vec![noise(256, 1)];
        let b = vec![noise(256, 2)];
        let spec = StftSpec::default();
        let ab = spectral_loss(&a, &b, spec).unwrap();
        let ba = spectral_loss(&b, &a, spec).unwrap();
        assert!(ab > 0.0);
        assert!((ab - ba).abs() < 1e-12);
    }

    #[test]
    fn grad_matches_loss_value() {
        let a = vec![noise(128, 5), noise(128, 6)];
        let b = vec![noise(128, 7), noise(128, 8)];
        let spec = StftSpec::default();
        let loss = spectral_loss(&a, &b, spec).unwrap();
        let (loss2, grads) = spectral_loss_grad(&a, &b, spec).unwrap();
        assert!((loss - loss2).abs() < 1e-12);
        assert_eq!(grads.len(), 2);
        assert_eq!(grads[0].len(), 128);
    }

    #[test]
    fn grad_matches_finite_differences() {
        let reference = vec![noise(96, 11)];
        let mut generated = vec![noise(96, 12)];
        let spec = StftSpec::new(32, 16).unwrap();
        let (_, grads) = spectral_loss_grad(&reference, &generated, spec).unwrap();
        let h = 1e-6;
        let mut worst = 0.0f64;
        for n in (0..96).step_by(7) {
            let orig = generated[0][n];
            generated[0][n] = orig + h;
            let up = spectral_loss(&reference, &generated, spec).unwrap();
            generated[0][n] = orig - h;
            let down = spectral_loss(&reference, &generated, spec).unwrap();
            generated[0][n] = orig;
            let numeric = (up - down) / (2.0 * h);
            let denom = grads[0][n].abs().max(numeric.abs()).max(1e-8);
            worst = worst.max((grads[0][n] - numeric).abs() / denom);
        }
        assert!(worst < 1e-6, "max rel error {worst}");
    }

    #[test]
    fn bin_centered_tones_keep_exact_gradients() {
        // a tone on an exact DFT bin zeroes every magnitude outside the Hann
        // mainlobe; the gradient must not divide by that rounding dust
        let tone = |period: f64| -> Vec<f64> {
            (0..256)
                .map(|t| (std::f64::consts::TAU * t as f64 / period).sin())
                .collect()
        };
        let reference = vec![tone(16.0), tone(24.0)];
        let mut generated = vec![tone(64.0), tone(4.0)];
        let spec = StftSpec::default();
        let (_, grads) = spectral_loss_grad(&reference, &generated, spec).unwrap();
        let h = 1e-6;
        let mut worst = 0.0f64;
        for i in 0..2 {
            for n in (0..256).step_by(13) {
                let orig = generated[i][n];
                generated[i][n] = orig + h;
                let up = spectral_loss(&reference, &generated, spec).unwrap();
                generated[i][n] = orig - h;
                let down = spectral_loss(&reference, &generated, spec).unwrap();
                generated[i][n] = orig;
                let numeric = (up - down) / (2.0 * h);
                let denom = grads[i][n].abs().max(numeric.abs()).max(1.0);
                worst = worst.max((grads[i][n] - numeric).abs() / denom);
            }
        }
        assert!(worst < 1e-6, "max rel error {worst}");
    }

    #[test]
    fn zero_signals_give_zero_grad_without_nan() {
        // both spectrograms are all-zero: subgradient at |X| = 0 must kick in
        let z = vec![vec![0.0; 128]];
        let (loss, grads) = spectral_loss_grad(&z, &z, StftSpec::default()).unwrap();
        assert_eq!(loss, 0.0);
        assert!(grads[0].iter().all(|&v| v == 0.0));
    }
}
