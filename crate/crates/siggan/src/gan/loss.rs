//! Adversarial losses for all five variants, each paired with its exact
//! gradient with respect to the scores (or logits) it consumes.
//!
//! Conventions:
//! * every loss is a minimization objective;
//! * probabilities entering a logarithm are clamped to
//!   `[1e-7, 1 - 1e-7]` and each clamp event is counted, so saturated
//!   discriminators are visible in the training log instead of producing
//!   infinities;
//! * gradients at a clamped score use the clamped value in the denominator
//!   (finite, nonzero), letting a saturated net recover.

use rand::Rng;

use crate::error::{Error, Result};
use crate::nn::Tensor;

pub const SCORE_CLAMP: f64 = 1e-7;

fn clamp_prob(y: f64) -> (f64, bool) {
    if y < SCORE_CLAMP {
        (SCORE_CLAMP, true)
    } else if y > 1.0 - SCORE_CLAMP {
        (1.0 - SCORE_CLAMP, true)
    } else {
        (y, false)
    }
}

fn reject_empty(scores: &[f64], what: &str) -> Result<()> {
    if scores.is_empty() {
        return Err(Error::Invalid(format!("{what} got an empty batch")));
    }
    Ok(())
}

/// Mean-score generator loss: `-(1/M) * sum(scores)`. Gradient is `-1/M`.
pub fn g_loss_mean(scores: &[f64]) -> Result<(f64, Vec<f64>)> {
    reject_empty(scores, "generator loss")?;
    let m = scores.len() as f64;
    let loss = -scores.iter().sum::<f64>() / m;
    Ok((loss, vec![-1.0 / m; scores.len()]))
}

/// Conventional log-form generator loss: `-(1/M) * sum(ln(scores))`.
/// Returns `(loss, grads, clamp_events)`.
pub fn g_loss_log(scores: &[f64]) -> Result<(f64, Vec<f64>, usize)> {
    reject_empty(scores, "generator loss")?;
    let m = scores.len() as f64;
    let mut loss = 0.0;
    let mut grads = Vec::with_capacity(scores.len());
    let mut clamped = 0usize;
    for &y in scores {
        let (yc, hit) = clamp_prob(y);
        clamped += hit as usize;
        loss -= yc.ln() / m;
        grads.push(-1.0 / (m * yc));
    }
    Ok((loss, grads, clamped))
}

/// Weighted mix of the adversarial and spectral components.
pub fn g_loss_hybrid(adv: f64, spec_loss: f64, gamma1: f64, gamma2: f64) -> Result<f64> {
    if (gamma1 + gamma2 - 1.0).abs() > 1e-12 {
        return Err(Error::Invalid(format!(
            "hybrid weights must sum to 1, got {gamma1} + {gamma2}"
        )));
    }
    Ok(gamma1 * adv + gamma2 * spec_loss)
}

/// `-(1/M) * sum(ln(y))`: the real-side BCE term (target 1).
pub fn bce_real(scores: &[f64]) -> Result<(f64, Vec<f64>, usize)> {
    reject_empty(scores, "discriminator real loss")?;
    let m = scores.len() as f64;
    let mut loss = 0.0;
    let mut grads = Vec::with_capacity(scores.len());
    let mut clamped = 0usize;
    for &y in scores {
        let (yc, hit) = clamp_prob(y);
        clamped += hit as usize;
        loss -= yc.ln() / m;
        grads.push(-1.0 / (m * yc));
    }
    Ok((loss, grads, clamped))
}

/// `-(1/M) * sum(ln(1 - y))`: the fake-side BCE term (target 0).
pub fn bce_fake(scores: &[f64]) -> Result<(f64, Vec<f64>, usize)> {
    reject_empty(scores, "discriminator fake loss")?;
    let m = scores.len() as f64;
    let mut loss = 0.0;
    let mut grads = Vec::with_capacity(scores.len());
    let mut clamped = 0usize;
    for &y in scores {
        let (yc, hit) = clamp_prob(y);
        clamped += hit as usize;
        loss -= (1.0 - yc).ln() / m;
        grads.push(1.0 / (m * (1.0 - yc)));
    }
    Ok((loss, grads, clamped))
}

/// Two-sided discriminator loss:
/// `-(1/M) * sum(ln(real)) - (1/M) * sum(ln(1 - fake))`.
/// Returns `(loss, real grads, fake grads, clamp_events)`.
pub fn d_loss_cgan(
    real_scores: &[f64],
    fake_scores: &[f64],
) -> Result<(f64, Vec<f64>, Vec<f64>, usize)> {
    let (lr, gr, cr) = bce_real(real_scores)?;
    let (lf, gf, cf) = bce_fake(fake_scores)?;
    Ok((lr + lf, gr, gf, cr + cf))
}

/// Equal-width bin of a normalized label in `[0, 1]`.
pub fn label_bin(y: f64, bins: usize) -> usize {
    ((y * bins as f64) as usize).min(bins - 1)
}

/// Mean softmax cross-entropy of `logits [M, B]` against target bins.
/// Returns `(loss, dL/dlogits)` with the usual `(softmax - onehot)/M` form.
pub fn softmax_ce(logits: &Tensor, bins: &[usize]) -> Result<(f64, Tensor)> {
    let (m, b) = match *logits.shape() {
        [m, b] => (m, b),
        _ => return Err(Error::shape("class logits", &[0, 0], logits.shape())),
    };
    if bins.len() != m || m == 0 {
        return Err(Error::Invalid(format!(
            "classification needs one target per row: {} rows, {} targets",
            m,
            bins.len()
        )));
    }
    if let Some(&bad) = bins.iter().find(|&&t| t >= b) {
        return Err(Error::Invalid(format!(
            "class bin {bad} out of range for {b} bins"
        )));
    }
    let mut loss = 0.0;
    let mut grad = Tensor::zeros(&[m, b]);
    for i in 0..m {
        let row = &logits.data()[i * b..(i + 1) * b];
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = row.iter().map(|&v| (v - max).exp()).collect();
        let z: f64 = exps.iter().sum();
        loss -= ((exps[bins[i]] / z).max(f64::MIN_POSITIVE)).ln() / m as f64;
        let grow = &mut grad.data_mut()[i * b..(i + 1) * b];
        for (j, g) in grow.iter_mut().enumerate() {
            let p = exps[j] / z;
            *g = (p - ((j == bins[i]) as usize as f64)) / m as f64;
        }
    }
    Ok((loss, grad))
}

/// Both auxiliary-classifier losses as scalars:
/// `L_G = -mean ln D(fake) + alpha * CE(class_fake)`,
/// `L_D = BCE(real, fake) + CE(class_real)`.
pub fn acgan_losses(
    real_scores: &[f64],
    fake_scores: &[f64],
    class_logits_real: &Tensor,
    class_logits_fake: &Tensor,
    true_bins: &[usize],
    alpha: f64,
) -> Result<(f64, f64)> {
    let (adv_g, _, _) = g_loss_log(fake_scores)?;
    let (ce_fake, _) = softmax_ce(class_logits_fake, true_bins)?;
    let l_g = adv_g + alpha * ce_fake;
    let (adv_d, _, _, _) = d_loss_cgan(real_scores, fake_scores)?;
    let (ce_real, _) = softmax_ce(class_logits_real, true_bins)?;
    let l_d = adv_d + ce_real;
    Ok((l_g, l_d))
}

/// Critic losses: `L_G = -mean(fake)`, `L_D = -(mean(real) - mean(fake)) +
/// beta * penalty`.
pub fn wcgan_losses(
    critic_real: &[f64],
    critic_fake: &[f64],
    penalty: f64,
    beta: f64,
) -> Result<(f64, f64)> {
    reject_empty(critic_real, "critic loss")?;
    reject_empty(critic_fake, "critic loss")?;
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let l_g = -mean(critic_fake);
    let l_d = -(mean(critic_real) - mean(critic_fake)) + beta * penalty;
    Ok((l_g, l_d))
}

/// Critic-loss gradients: real scores get `-1/M`, fake scores get `+1/M`.
pub fn wcgan_d_grads(critic_real: &[f64], critic_fake: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mr = critic_real.len() as f64;
    let mf = critic_fake.len() as f64;
    (
        vec![-1.0 / mr; critic_real.len()],
        vec![1.0 / mf; critic_fake.len()],
    )
}

/// Per-sample convex combinations `theta*real + (1-theta)*fake`,
/// `theta ~ U[0,1]` drawn once per sample (leading dimension).
pub fn interpolate_pairs<R: Rng>(real: &Tensor, fake: &Tensor, rng: &mut R) -> Result<Tensor> {
    if real.shape() != fake.shape() {
        return Err(Error::shape(
            "interpolation pair",
            real.shape(),
            fake.shape(),
        ));
    }
    let m = real.shape()[0];
    let stride = real.len() / m.max(1);
    let mut out = Tensor::zeros(real.shape());
    for i in 0..m {
        let theta: f64 = rng.gen_range(0.0..=1.0);
        let r = &real.data()[i * stride..(i + 1) * stride];
        let f = &fake.data()[i * stride..(i + 1) * stride];
        let o = &mut out.data_mut()[i * stride..(i + 1) * stride];
        for k in 0..stride {
            o[k] = theta * r[k] + (1.0 - theta) * f[k];
        }
    }
    Ok(out)
}

/// Mean `(norm - 1)^2` over per-sample input-gradient norms.
pub fn gradient_penalty_from_norms(norms: &[f64]) -> Result<f64> {
    reject_empty(norms, "gradient penalty")?;
    Ok(norms.iter().map(|&n| (n - 1.0) * (n - 1.0)).sum::<f64>() / norms.len() as f64)
}
