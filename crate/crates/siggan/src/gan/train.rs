//! Two-phase adversarial training.
//!
//! Each epoch walks the shuffled real set in batches of `M`. Phase 1 updates
//! the discriminator against the frozen generator; phase 2 updates the
//! generator against the frozen discriminator. Freezing is not a convention
//! here, it is asserted: parameter checksums taken before each phase must be
//! bit-identical afterwards for the network that phase does not own.
//!
//! Fake samples are conditioned on the labels of the current real batch in
//! both phases, so the generator is always graded on label coverage the
//! discriminator just saw.

use std::time::Instant;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::gan::loss;
use crate::gan::model::{stack_with_label, GLossForm, GanModel, Variant};
use crate::nn::{ParamNet, Tensor};
use crate::spectral::spectral_loss_grad;

/// One completed epoch.
#[derive(Debug, Clone)]
pub struct EpochStats {
    pub epoch: u32,
    pub d_loss: f64,
    pub g_loss: f64,
    /// Spectral component of the generator objective; hybrid variant only.
    pub spectral: Option<f64>,
    /// Reported critic gradient penalty; critic variant only.
    pub penalty: Option<f64>,
    /// Probability clamps hit inside log terms this epoch.
    pub clamp_events: usize,
    pub wall_secs: f64,
}

/// Per-epoch history of one training run.
#[derive(Debug, Clone)]
pub struct TrainLog {
    pub variant: Variant,
    pub epochs: Vec<EpochStats>,
}

impl TrainLog {
    /// `epoch,d_loss,g_loss,spectral_component`; the spectral column is
    /// empty for variants without a spectral term.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,d_loss,g_loss,spectral_component\n");
        for e in &self.epochs {
            let spec = e.spectral.map(|v| format!("{v:.6e}")).unwrap_or_default();
            out.push_str(&format!(
                "{},{:.6e},{:.6e},{}\n",
                e.epoch, e.d_loss, e.g_loss, spec
            ));
        }
        out
    }

    pub fn all_finite(&self) -> bool {
        self.epochs.iter().all(|e| {
            e.d_loss.is_finite()
                && e.g_loss.is_finite()
                && e.spectral.map(|v| v.is_finite()).unwrap_or(true)
        })
    }
}

/// Normalized training arrays: signals `[N, 1, L]` in [-1, 1] and labels in
/// [0, 1], both taken from the dataset's stored normalization.
pub fn training_arrays(ds: &Dataset) -> Result<(Tensor, Vec<f64>)> {
    let norm = ds.norm()?;
    let n = ds.train.len();
    if n == 0 {
        return Err(Error::Invalid("training split is empty".into()));
    }
    let l = ds.signal_len();
    let mut data = Vec::with_capacity(n * l);
    let mut labels = Vec::with_capacity(n);
    for s in &ds.train {
        if s.signal.len() != l {
            return Err(Error::Invalid(format!(
                "sample {} length {} != {}",
                s.id,
                s.signal.len(),
                l
            )));
        }
        data.extend(s.signal.iter().map(|&v| norm.norm_signal_value(v)));
        labels.push(norm.norm_label(s.ra_um));
    }
    let signals = Tensor::from_vec(&[n, 1, l], data)?;
    Ok((signals, labels))
}

fn batch_rows(signals: &Tensor, labels: &[f64], rows: &[usize]) -> (Tensor, Vec<f64>) {
    let l = signals.shape()[2];
    let mut data = Vec::with_capacity(rows.len() * l);
    let mut lab = Vec::with_capacity(rows.len());
    for &r in rows {
        data.extend_from_slice(&signals.data()[r * l..(r + 1) * l]);
        lab.push(labels[r]);
    }
    (
        Tensor::from_vec(&[rows.len(), 1, l], data).expect("row volume matches"),
        lab,
    )
}

fn signal_rows(t: &Tensor) -> Vec<Vec<f64>> {
    let (m, l) = (t.shape()[0], t.shape()[2]);
    (0..m)
        .map(|i| t.data()[i * l..(i + 1) * l].to_vec())
        .collect()
}

fn check_finite(value: f64, what: &str, variant: Variant, epoch: u32, batch: usize) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite(format!(
            "{what} = {value} at epoch {epoch}, batch {batch}, variant {variant}"
        )))
    }
}

/// Discriminator update on one batch; returns (loss, clamp events).
fn phase1_discriminator(
    model: &mut GanModel,
    real: &Tensor,
    labels: &[f64],
    epoch: u32,
    batch: usize,
) -> Result<(f64, usize)> {
    let variant = model.hp.variant;
    let g_before = model.gen.checksum();
    let fake = model.generate_normalized(labels)?;
    model.disc.zero_grads();

    let (d_loss, clamps) = match variant {
        Variant::Wcgan => {
            let out_r = model.disc.forward(real, labels)?;
            let (gr, _) = loss::wcgan_d_grads(&out_r.scores, &out_r.scores);
            model.disc.backward(&gr, None)?;
            let out_f = model.disc.forward(&fake, labels)?;
            let (_, gf) = loss::wcgan_d_grads(&out_f.scores, &out_f.scores);
            model.disc.backward(&gf, None)?;
            // the reported loss excludes the penalty term; the penalty is a
            // per-epoch diagnostic, clipping enforces Lipschitz
            let (_, l_d) = loss::wcgan_losses(&out_r.scores, &out_f.scores, 0.0, 0.0)?;
            (l_d, 0)
        }
        Variant::Acgan => {
            let bins: Vec<usize> = labels
                .iter()
                .map(|&y| loss::label_bin(y, model.hp.class_bins))
                .collect();
            let out_r = model.disc.forward(real, labels)?;
            let (l_real, gr, c1) = loss::bce_real(&out_r.scores)?;
            let (l_ce, ce_grad) = loss::softmax_ce(
                out_r.class_logits.as_ref().expect("acgan has class head"),
                &bins,
            )?;
            model.disc.backward(&gr, Some(&ce_grad))?;
            let out_f = model.disc.forward(&fake, labels)?;
            let (l_fake, gf, c2) = loss::bce_fake(&out_f.scores)?;
            model.disc.backward(&gf, None)?;
            (l_real + l_fake + l_ce, c1 + c2)
        }
        _ => {
            let out_r = model.disc.forward(real, labels)?;
            let (l_real, gr, c1) = loss::bce_real(&out_r.scores)?;
            model.disc.backward(&gr, None)?;
            let out_f = model.disc.forward(&fake, labels)?;
            let (l_fake, gf, c2) = loss::bce_fake(&out_f.scores)?;
            model.disc.backward(&gf, None)?;
            (l_real + l_fake, c1 + c2)
        }
    };
    check_finite(d_loss, "discriminator loss", variant, epoch, batch)?;

    let mut pairs = model.disc.params_and_grads_mut();
    model.adam_d.step(&mut pairs)?;
    drop(pairs);
    if variant.uses_critic() {
        model.disc.clip_params(model.hp.clip);
    }

    if model.gen.checksum() != g_before {
        return Err(Error::Verification(format!(
            "generator parameters changed during the discriminator phase \
             (epoch {epoch}, batch {batch})"
        )));
    }
    Ok((d_loss, clamps))
}

/// Generator update on one batch; returns (g loss, spectral component,
/// clamp events).
fn phase2_generator(
    model: &mut GanModel,
    real: &Tensor,
    labels: &[f64],
    epoch: u32,
    batch: usize,
) -> Result<(f64, Option<f64>, usize)> {
    let variant = model.hp.variant;
    let d_before = model.disc.checksum();
    model.gen.zero_grads();
    model.disc.zero_grads();

    let z = crate::gan::noise::conditioned_noise(&model.hp.noise, &mut model.rng, labels)?;
    let fake = model.gen.forward(&z)?;
    let stacked = stack_with_label(&fake, labels)?;
    let out = model.disc.forward_input(&stacked)?;

    let mut clamps = 0usize;
    let mut class_grad: Option<Tensor> = None;
    let (adv_loss, score_grads) = match variant {
        Variant::Wcgan => {
            let (l, g) = loss::g_loss_mean(&out.scores)?;
            (l, g)
        }
        Variant::Acgan => {
            let bins: Vec<usize> = labels
                .iter()
                .map(|&y| loss::label_bin(y, model.hp.class_bins))
                .collect();
            let (l_adv, g, c) = loss::g_loss_log(&out.scores)?;
            clamps += c;
            let logits = out.class_logits.as_ref().expect("acgan has class head");
            let (l_ce, mut ce_grad) = loss::softmax_ce(logits, &bins)?;
            for v in ce_grad.data_mut() {
                *v *= model.hp.alpha_class;
            }
            class_grad = Some(ce_grad);
            (l_adv + model.hp.alpha_class * l_ce, g)
        }
        _ => match model.hp.g_loss {
            GLossForm::MeanScore => loss::g_loss_mean(&out.scores)?,
            GLossForm::LogScore => {
                let (l, g, c) = loss::g_loss_log(&out.scores)?;
                clamps += c;
                (l, g)
            }
        },
    };

    let input_grad = model.disc.backward(&score_grads, class_grad.as_ref())?;
    // adversarial pullback: signal channel only, the label channel is not a
    // function of the generator
    let (m, l) = (fake.shape()[0], fake.shape()[2]);
    let mut upstream = Tensor::zeros(&[m, 1, l]);
    for i in 0..m {
        let src = &input_grad.data()[i * 2 * l..i * 2 * l + l];
        upstream.data_mut()[i * l..(i + 1) * l].copy_from_slice(src);
    }

    let (g_loss, spectral) = if variant.uses_spectral() {
        let real_rows = signal_rows(real);
        let fake_rows = signal_rows(&fake);
        let (spec_loss, spec_grads) = spectral_loss_grad(&real_rows, &fake_rows, model.hp.stft)?;
        let (g1, g2) = (model.hp.gamma1, model.hp.gamma2);
        for i in 0..m {
            let dst = &mut upstream.data_mut()[i * l..(i + 1) * l];
            for (d, s) in dst.iter_mut().zip(&spec_grads[i]) {
                *d = g1 * *d + g2 * s;
            }
        }
        (
            loss::g_loss_hybrid(adv_loss, spec_loss, g1, g2)?,
            Some(spec_loss),
        )
    } else {
        (adv_loss, None)
    };
    check_finite(g_loss, "generator loss", variant, epoch, batch)?;

    model.gen.backward(&upstream)?;
    let mut pairs = model.gen.params_and_grads_mut();
    model.adam_g.step(&mut pairs)?;
    drop(pairs);
    // phase 2 borrowed the discriminator for the pullback; its scratch
    // gradients must not leak into the next phase 1 accumulation
    model.disc.zero_grads();

    if model.disc.checksum() != d_before {
        return Err(Error::Verification(format!(
            "discriminator parameters changed during the generator phase \
             (epoch {epoch}, batch {batch})"
        )));
    }
    Ok((g_loss, spectral, clamps))
}

/// One pass over the shuffled real set. The trailing partial batch (fewer
/// than `M` samples) is dropped, matching fixed-batch training.
pub fn train_epoch(
    model: &mut GanModel,
    signals: &Tensor,
    labels: &[f64],
    epoch: u32,
) -> Result<EpochStats> {
    use rand::seq::SliceRandom;
    let started = Instant::now();
    let n = signals.shape()[0];
    let m = model.hp.batch_size;
    if n < m {
        return Err(Error::Invalid(format!(
            "need at least one full batch: {n} samples < batch size {m}"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut model.rng);

    let mut d_sum = 0.0;
    let mut g_sum = 0.0;
    let mut spec_sum = 0.0;
    let mut clamps = 0usize;
    let mut batches = 0usize;
    let mut last_batch: Option<(Tensor, Vec<f64>)> = None;

    for rows in order.chunks_exact(m) {
        let (real, lab) = batch_rows(signals, labels, rows);
        let (d_loss, c1) = phase1_discriminator(model, &real, &lab, epoch, batches)?;
        let (g_loss, spectral, c2) = phase2_generator(model, &real, &lab, epoch, batches)?;
        d_sum += d_loss;
        g_sum += g_loss;
        spec_sum += spectral.unwrap_or(0.0);
        clamps += c1 + c2;
        batches += 1;
        last_batch = Some((real, lab));
    }

    // once per epoch: the critic's Lipschitz diagnostic on interpolates of
    // the last batch
    let penalty = if model.hp.variant.uses_critic() {
        let (real, lab) = last_batch.as_ref().expect("at least one batch ran");
        let fake = model.generate_normalized(lab)?;
        let mut theta_rng = model.rng.clone();
        let mixed = loss::interpolate_pairs(real, &fake, &mut theta_rng)?;
        Some(model.gradient_penalty(&mixed, lab)?)
    } else {
        None
    };

    let b = batches as f64;
    Ok(EpochStats {
        epoch,
        d_loss: d_sum / b,
        g_loss: g_sum / b,
        spectral: model.hp.variant.uses_spectral().then_some(spec_sum / b),
        penalty,
        clamp_events: clamps,
        wall_secs: started.elapsed().as_secs_f64(),
    })
}

/// Runs `model.hp.epochs` epochs over the dataset's training split.
/// `progress` receives each epoch's stats as they complete.
pub fn train(
    model: &mut GanModel,
    ds: &Dataset,
    mut progress: impl FnMut(&EpochStats),
) -> Result<TrainLog> {
    let (signals, labels) = training_arrays(ds)?;
    if signals.shape()[2] != model.hp.signal_len {
        return Err(Error::Invalid(format!(
            "dataset signal length {} != model signal length {}",
            signals.shape()[2],
            model.hp.signal_len
        )));
    }
    let mut log = TrainLog {
        variant: model.hp.variant,
        epochs: Vec::with_capacity(model.hp.epochs as usize),
    };
    let start = model.epochs_trained;
    for e in start..model.hp.epochs {
        let stats = train_epoch(model, &signals, &labels, e)?;
        model.epochs_trained = e + 1;
        progress(&stats);
        log.epochs.push(stats);
    }
    Ok(log)
}

/// Machining parameters of the training sample with the closest label:
/// generated signals have no process provenance of their own, so they borrow
/// the nearest real operating point.
pub fn impute_params(ds: &Dataset, ra_um: f64) -> Result<crate::data::MachiningParams> {
    ds.train
        .iter()
        .min_by(|a, b| (a.ra_um - ra_um).abs().total_cmp(&(b.ra_um - ra_um).abs()))
        .map(|s| s.params)
        .ok_or_else(|| Error::Invalid("training split is empty".into()))
}

/// Draws one signal per requested physical label from the trained model and
/// denormalizes to physical units. Labels outside the training range are
/// clamped into the conditioning interval and counted, not rejected:
/// extrapolation is a caller decision, silence is not.
pub fn generate_labeled(
    model: &mut GanModel,
    ds: &Dataset,
    ra_labels: &[f64],
    id_base: u64,
) -> Result<(Vec<crate::data::LabeledSignal>, usize)> {
    let norm = ds.norm()?;
    if ra_labels.is_empty() {
        return Err(Error::Invalid("no labels requested".into()));
    }
    let mut clamped = 0usize;
    let cond: Vec<f64> = ra_labels
        .iter()
        .map(|&ra| {
            let y = norm.norm_label(ra);
            if !(0.0..=1.0).contains(&y) {
                clamped += 1;
            }
            y.clamp(0.0, 1.0)
        })
        .collect();
    let mut out = Vec::with_capacity(ra_labels.len());
    // batch in model-sized chunks to bound peak memory
    let m = model.hp.batch_size.max(1);
    let l = model.hp.signal_len;
    for (chunk_idx, chunk) in cond.chunks(m).enumerate() {
        let fake = model.generate_normalized(chunk)?;
        for (j, _) in chunk.iter().enumerate() {
            let i = chunk_idx * m + j;
            let signal: Vec<f64> = fake.data()[j * l..(j + 1) * l]
                .iter()
                .map(|&v| norm.denorm_signal_value(v))
                .collect();
            out.push(crate::data::LabeledSignal {
                id: id_base + i as u64,
                params: impute_params(ds, ra_labels[i])?,
                ra_um: ra_labels[i],
                signal,
            });
        }
    }
    Ok((out, clamped))
}
