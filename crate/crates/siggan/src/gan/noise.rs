//! Sinusoidal latent noise.
//!
//! Each latent vector is one sine tone: `z[k] = sin(2*pi*f*k/d + phi)` with
//! a per-sample frequency `f ~ U[f_lo, f_hi]` (cycles across the vector) and
//! phase `phi ~ U[0, 2*pi)`. Every element lies in [-1, 1] by construction.

use rand::Rng;
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::nn::Tensor;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub latent_dim: usize,
    pub f_lo: f64,
    pub f_hi: f64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec {
            latent_dim: 100,
            f_lo: 0.5,
            f_hi: 8.0,
        }
    }
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        if self.latent_dim == 0 {
            return Err(Error::Invalid("latent dimension must be >= 1".into()));
        }
        // negated form on purpose: it also rejects NaN bounds
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(self.f_lo <= self.f_hi) || self.f_lo <= 0.0 {
            return Err(Error::Invalid(format!(
                "noise frequency range [{}, {}] is invalid",
                self.f_lo, self.f_hi
            )));
        }
        Ok(())
    }
}

/// One batch of latent vectors, shape `[M, latent_dim]`.
pub fn sample_sinusoidal_noise<R: Rng>(spec: &NoiseSpec, rng: &mut R, batch: usize) -> Tensor {
    let d = spec.latent_dim;
    let mut data = Vec::with_capacity(batch * d);
    for _ in 0..batch {
        let f = rng.gen_range(spec.f_lo..=spec.f_hi);
        let phi = rng.gen_range(0.0..TAU);
        for k in 0..d {
            data.push((TAU * f * k as f64 / d as f64 + phi).sin());
        }
    }
    Tensor::from_vec(&[batch, d], data).expect("shape/volume agree")
}

/// Latent batch with the normalized label appended: `[M, latent_dim + 1]`.
pub fn conditioned_noise<R: Rng>(spec: &NoiseSpec, rng: &mut R, labels: &[f64]) -> Result<Tensor> {
    for &y in labels {
        if !(0.0..=1.0).contains(&y) {
            return Err(Error::Invalid(format!(
                "conditioning label {y} outside [0, 1]; normalize first"
            )));
        }
    }
    let z = sample_sinusoidal_noise(spec, rng, labels.len());
    let d = spec.latent_dim;
    let mut data = Vec::with_capacity(labels.len() * (d + 1));
    for (i, &y) in labels.iter().enumerate() {
        data.extend_from_slice(&z.data()[i * d..(i + 1) * d]);
        data.push(y);
    }
    Tensor::from_vec(&[labels.len(), d + 1], data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn shape_range_and_determinism() {
        let spec = NoiseSpec::default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let z = sample_sinusoidal_noise(&spec, &mut rng, 7);
        assert_eq!(z.shape(), &[7, 100]);
        assert!(z.data().iter().all(|v| (-1.0..=1.0).contains(v)));

        let mut rng2 = ChaCha8Rng::seed_from_u64(5);
        let z2 = sample_sinusoidal_noise(&spec, &mut rng2, 7);
        assert_eq!(z.data(), z2.data());
    }

    #[test]
    fn rows_are_single_tones() {
        // a pure sine has a near-perfect autocorrelation structure; cheap
        // proxy: consecutive differences change sign at most 2f+1 times
        let spec = NoiseSpec {
            latent_dim: 100,
            f_lo: 2.0,
            f_hi: 2.0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let z = sample_sinusoidal_noise(&spec, &mut rng, 1);
        let d = z.data();
        let mut crossings = 0;
        for k in 1..d.len() - 1 {
            let a = d[k] - d[k - 1];
            let b = d[k + 1] - d[k];
            if a.signum() != b.signum() {
                crossings += 1;
            }
        }
        assert!(crossings <= 5, "2-cycle tone had {crossings} extrema");
    }

    #[test]
    fn conditioning_appends_label() {
        let spec = NoiseSpec::default();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let z = conditioned_noise(&spec, &mut rng, &[0.25, 1.0]).unwrap();
        assert_eq!(z.shape(), &[2, 101]);
        assert_eq!(z.data()[100], 0.25);
        assert_eq!(z.data()[201], 1.0);
    }

    #[test]
    fn unnormalized_labels_are_rejected() {
        let spec = NoiseSpec::default();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        assert!(conditioned_noise(&spec, &mut rng, &[1.5]).is_err());
        assert!(conditioned_noise(&spec, &mut rng, &[-0.1]).is_err());
    }
}
