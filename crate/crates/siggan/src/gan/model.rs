//! Generator and discriminator networks plus the bundle tying them to their
//! optimizers and RNG.
//!
//! Geometry is fixed around a 64x upsampling path: the generator bootstraps
//! the conditioned noise vector into a `signal_len / 64` seed sequence and
//! grows it through three stride-4 transposed convolutions; the
//! discriminator mirrors that with three stride-4 convolutions over a
//! two-channel input (signal plus a constant label channel). Kernel 20 with
//! padding 8 makes every stage an exact factor of 4, so `signal_len` must be
//! a positive multiple of 64.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gan::noise::{conditioned_noise, NoiseSpec};
use crate::nn::{
    params_checksum, Activation, Adam, AdamConfig, Conv1d, ConvSpec, ConvTranspose1d, Dense, Layer,
    ParamNet, Tensor,
};
use crate::spectral::StftSpec;

pub const CONV_KERNEL: usize = 20;
pub const CONV_STRIDE: usize = 4;
pub const CONV_PADDING: usize = 8;
/// Three stride-4 stages on each side.
pub const UPSAMPLE_FACTOR: usize = 64;

// ---------------------------------------------------------------------------
// Variant
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    DenseCgan,
    ConvCgan,
    Acgan,
    Wcgan,
    HasCgan,
}

impl Variant {
    pub const ALL: [Variant; 5] = [
        Variant::DenseCgan,
        Variant::ConvCgan,
        Variant::Acgan,
        Variant::Wcgan,
        Variant::HasCgan,
    ];

    /// Accepts hyphen/underscore/concatenated spellings, case-insensitive.
    pub fn parse(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| *c != '-' && *c != '_')
            .collect::<String>()
            .to_ascii_lowercase();
        match key.as_str() {
            "densecgan" | "cgandense" => Ok(Variant::DenseCgan),
            "convcgan" | "cganconv" => Ok(Variant::ConvCgan),
            "acgan" => Ok(Variant::Acgan),
            "wcgan" => Ok(Variant::Wcgan),
            "hascgan" => Ok(Variant::HasCgan),
            _ => Err(Error::Config(format!(
                "unknown variant {s:?}; expected one of dense-cgan, conv-cgan, acgan, wcgan, has-cgan"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::DenseCgan => "dense-cgan",
            Variant::ConvCgan => "conv-cgan",
            Variant::Acgan => "acgan",
            Variant::Wcgan => "wcgan",
            Variant::HasCgan => "has-cgan",
        }
    }

    pub fn tag(self) -> u8 {
        match self {
            Variant::DenseCgan => 1,
            Variant::ConvCgan => 2,
            Variant::Acgan => 3,
            Variant::Wcgan => 4,
            Variant::HasCgan => 5,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        Variant::ALL.into_iter().find(|v| v.tag() == tag)
    }

    /// Unbounded score head, clipping, and the gradient-norm diagnostic.
    pub fn uses_critic(self) -> bool {
        matches!(self, Variant::Wcgan)
    }

    /// Auxiliary classification head over label bins.
    pub fn uses_class_head(self) -> bool {
        matches!(self, Variant::Acgan)
    }

    /// Spectral term mixed into the generator objective.
    pub fn uses_spectral(self) -> bool {
        matches!(self, Variant::HasCgan)
    }

    pub fn dense_generator(self) -> bool {
        matches!(self, Variant::DenseCgan)
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Which functional form the adversarial generator term takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GLossForm {
    /// `-(1/M) * sum(D(fake))`.
    #[default]
    MeanScore,
    /// `-(1/M) * sum(ln D(fake))`.
    LogScore,
}

impl GLossForm {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mean" => Ok(GLossForm::MeanScore),
            "log" => Ok(GLossForm::LogScore),
            _ => Err(Error::Config(format!(
                "unknown generator loss form {s:?}; expected mean or log"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GLossForm::MeanScore => "mean",
            GLossForm::LogScore => "log",
        }
    }

    pub fn tag(self) -> u8 {
        match self {
            GLossForm::MeanScore => 0,
            GLossForm::LogScore => 1,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(GLossForm::MeanScore),
            1 => Some(GLossForm::LogScore),
            _ => None,
        }
    }
}

// ---------------------------------------------------------------------------
// Architecture and hyper-parameters
// ---------------------------------------------------------------------------

/// Channel widths, exposed so verification can run on narrow stacks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NetArch {
    /// Generator channels seed -> output; last entry must be 1.
    pub gen_channels: [usize; 4],
    /// Discriminator channels input -> deepest; first entry must be 2.
    pub disc_channels: [usize; 4],
    /// Hidden widths of the dense generator form.
    pub dense_hidden: [usize; 2],
}

impl Default for NetArch {
    fn default() -> Self {
        NetArch {
            gen_channels: [64, 32, 16, 1],
            disc_channels: [2, 16, 32, 64],
            dense_hidden: [128, 256],
        }
    }
}

impl NetArch {
    /// Narrow stacks for finite-difference verification.
    pub fn reduced() -> Self {
        NetArch {
            gen_channels: [8, 4, 2, 1],
            disc_channels: [2, 4, 8, 16],
            dense_hidden: [16, 32],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.gen_channels[3] != 1 {
            return Err(Error::Invalid(format!(
                "generator must end in 1 channel, got {}",
                self.gen_channels[3]
            )));
        }
        if self.disc_channels[0] != 2 {
            return Err(Error::Invalid(format!(
                "discriminator input is signal+label = 2 channels, got {}",
                self.disc_channels[0]
            )));
        }
        if self.gen_channels.contains(&0)
            || self.disc_channels.contains(&0)
            || self.dense_hidden.contains(&0)
        {
            return Err(Error::Invalid("architecture widths must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GanHyperParams {
    pub variant: Variant,
    pub signal_len: usize,
    pub noise: NoiseSpec,
    pub arch: NetArch,
    pub batch_size: usize,
    pub lr_g: f64,
    pub lr_d: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epochs: u32,
    /// Adversarial weight of the hybrid objective.
    pub gamma1: f64,
    /// Spectral weight; `gamma1 + gamma2 = 1` is enforced at model build.
    pub gamma2: f64,
    /// Classification weight in the auxiliary-classifier generator loss.
    pub alpha_class: f64,
    /// Reported gradient-penalty weight for the critic variant.
    pub beta_penalty: f64,
    /// Critic weight-clipping bound.
    pub clip: f64,
    pub class_bins: usize,
    pub g_loss: GLossForm,
    pub stft: StftSpec,
}

impl GanHyperParams {
    pub fn new(variant: Variant, signal_len: usize) -> Result<Self> {
        let hp = GanHyperParams {
            variant,
            signal_len,
            noise: NoiseSpec::default(),
            arch: NetArch::default(),
            batch_size: 13,
            lr_g: 2e-4,
            lr_d: 2e-4,
            beta1: 0.5,
            beta2: 0.999,
            epochs: 500,
            gamma1: 0.8,
            gamma2: 0.2,
            alpha_class: 1.0,
            beta_penalty: 10.0,
            clip: 0.01,
            class_bins: 5,
            g_loss: GLossForm::default(),
            stft: StftSpec::default(),
        };
        hp.validate()?;
        Ok(hp)
    }

    pub fn validate(&self) -> Result<()> {
        if self.signal_len == 0 || !self.signal_len.is_multiple_of(UPSAMPLE_FACTOR) {
            return Err(Error::Invalid(format!(
                "signal length must be a positive multiple of {}, got {}",
                UPSAMPLE_FACTOR, self.signal_len
            )));
        }
        self.noise.validate()?;
        self.arch.validate()?;
        if self.batch_size == 0 {
            return Err(Error::Invalid("batch size must be >= 1".into()));
        }
        if self.lr_g <= 0.0 || self.lr_d <= 0.0 {
            return Err(Error::Invalid("learning rates must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return Err(Error::Invalid("Adam betas must lie in [0, 1)".into()));
        }
        if self.epochs == 0 {
            return Err(Error::Invalid("epoch count must be >= 1".into()));
        }
        if self.gamma1 < 0.0 || self.gamma2 < 0.0 || (self.gamma1 + self.gamma2 - 1.0).abs() > 1e-12
        {
            return Err(Error::Invalid(format!(
                "hybrid weights must be nonnegative and sum to 1, got {} + {}",
                self.gamma1, self.gamma2
            )));
        }
        if self.alpha_class < 0.0 {
            return Err(Error::Invalid("classification weight must be >= 0".into()));
        }
        if self.beta_penalty < 0.0 {
            return Err(Error::Invalid("penalty weight must be >= 0".into()));
        }
        if self.clip <= 0.0 {
            return Err(Error::Invalid("clip bound must be positive".into()));
        }
        if self.class_bins < 2 {
            return Err(Error::Invalid("label binning needs >= 2 bins".into()));
        }
        if self.stft.window > self.signal_len {
            return Err(Error::Invalid(format!(
                "analysis window {} exceeds signal length {}",
                self.stft.window, self.signal_len
            )));
        }
        Ok(())
    }

    /// Seed sequence length entering the first transposed convolution.
    pub fn seed_len(&self) -> usize {
        self.signal_len / UPSAMPLE_FACTOR
    }
}

fn stage_spec(in_ch: usize, out_ch: usize) -> ConvSpec {
    ConvSpec::new(in_ch, out_ch, CONV_KERNEL, CONV_STRIDE, CONV_PADDING)
        .expect("fixed stage geometry is valid")
}

// ---------------------------------------------------------------------------
// Generator
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct Generator {
    pub signal_len: usize,
    pub seed_len: usize,
    seed_channels: usize,
    dense_form: bool,
    layers: Vec<Layer>,
}

impl Generator {
    /// Transposed-convolution form: dense bootstrap to a
    /// `[seed_channels, seed_len]` grid, then three 4x upsampling stages
    /// ending in tanh.
    pub fn new_conv<R: Rng>(
        signal_len: usize,
        noise: &NoiseSpec,
        arch: &NetArch,
        rng: &mut R,
    ) -> Result<Self> {
        arch.validate()?;
        if signal_len == 0 || !signal_len.is_multiple_of(UPSAMPLE_FACTOR) {
            return Err(Error::Invalid(format!(
                "signal length must be a positive multiple of {UPSAMPLE_FACTOR}, got {signal_len}"
            )));
        }
        let seed_len = signal_len / UPSAMPLE_FACTOR;
        let [c0, c1, c2, c3] = arch.gen_channels;
        let layers = vec![
            Layer::Dense(Dense::new(
                noise.latent_dim + 1,
                c0 * seed_len,
                Activation::Relu,
                rng,
            )),
            Layer::ConvTranspose1d(ConvTranspose1d::new(
                stage_spec(c0, c1),
                Activation::Relu,
                rng,
            )),
            Layer::ConvTranspose1d(ConvTranspose1d::new(
                stage_spec(c1, c2),
                Activation::Relu,
                rng,
            )),
            Layer::ConvTranspose1d(ConvTranspose1d::new(
                stage_spec(c2, c3),
                Activation::Tanh,
                rng,
            )),
        ];
        Ok(Generator {
            signal_len,
            seed_len,
            seed_channels: c0,
            dense_form: false,
            layers,
        })
    }

    /// Fully-connected form: two hidden layers, tanh output.
    pub fn new_dense<R: Rng>(
        signal_len: usize,
        noise: &NoiseSpec,
        arch: &NetArch,
        rng: &mut R,
    ) -> Result<Self> {
        arch.validate()?;
        if signal_len == 0 {
            return Err(Error::Invalid("signal length must be >= 1".into()));
        }
        let [h0, h1] = arch.dense_hidden;
        let layers = vec![
            Layer::Dense(Dense::new(noise.latent_dim + 1, h0, Activation::Relu, rng)),
            Layer::Dense(Dense::new(h0, h1, Activation::Relu, rng)),
            Layer::Dense(Dense::new(h1, signal_len, Activation::Tanh, rng)),
        ];
        Ok(Generator {
            signal_len,
            seed_len: 0,
            seed_channels: 0,
            dense_form: true,
            layers,
        })
    }

    pub fn dense_form(&self) -> bool {
        self.dense_form
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    /// `[M, latent+1]` conditioned noise to `[M, 1, signal_len]` in (-1, 1).
    pub fn forward(&mut self, z: &Tensor) -> Result<Tensor> {
        let m = match *z.shape() {
            [m, _] => m,
            _ => return Err(Error::shape("generator input", &[0, 0], z.shape())),
        };
        let mut x = z.clone();
        if self.dense_form {
            for layer in &mut self.layers {
                x = layer.forward(&x)?;
            }
            return x.reshape(&[m, 1, self.signal_len]);
        }
        x = self.layers[0].forward(&x)?;
        x = x.reshape(&[m, self.seed_channels, self.seed_len])?;
        for layer in &mut self.layers[1..] {
            x = layer.forward(&x)?;
        }
        Ok(x)
    }

    /// Pulls `dL/d(output)` back through the stack, accumulating parameter
    /// gradients. The gradient with respect to the noise is discarded.
    pub fn backward(&mut self, upstream: &Tensor) -> Result<()> {
        let m = upstream.shape().first().copied().unwrap_or(0);
        let mut g = upstream.clone();
        if self.dense_form {
            g = g.reshape(&[m, self.signal_len])?;
            for layer in self.layers.iter_mut().rev() {
                g = layer.backward(&g)?;
            }
            return Ok(());
        }
        for layer in self.layers[1..].iter_mut().rev() {
            g = layer.backward(&g)?;
        }
        g = g.reshape(&[m, self.seed_channels * self.seed_len])?;
        self.layers[0].backward(&g)?;
        Ok(())
    }

    pub fn params(&self) -> Vec<&Tensor> {
        self.layers.iter().flat_map(|l| l.params()).collect()
    }

    pub fn checksum(&self) -> u64 {
        params_checksum(self.params())
    }
}

impl ParamNet for Generator {
    fn params_and_grads_mut(&mut self) -> Vec<(&mut Tensor, &mut Tensor)> {
        self.layers
            .iter_mut()
            .flat_map(|l| l.params_and_grads_mut())
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Discriminator
// ---------------------------------------------------------------------------

/// Scores (post-sigmoid probabilities, or raw critic values) plus optional
/// class logits from the auxiliary head.
#[derive(Debug, Clone)]
pub struct DiscOutput {
    pub scores: Vec<f64>,
    pub class_logits: Option<Tensor>,
}

#[derive(Debug, Clone)]
pub struct Discriminator {
    pub signal_len: usize,
    pub flat_dim: usize,
    trunk_channels: usize,
    trunk_len: usize,
    convs: Vec<Layer>,
    score: Dense,
    class: Option<Dense>,
}

impl Discriminator {
    pub fn new<R: Rng>(
        signal_len: usize,
        critic: bool,
        class_bins: Option<usize>,
        arch: &NetArch,
        rng: &mut R,
    ) -> Result<Self> {
        arch.validate()?;
        if signal_len == 0 || !signal_len.is_multiple_of(UPSAMPLE_FACTOR) {
            return Err(Error::Invalid(format!(
                "signal length must be a positive multiple of {UPSAMPLE_FACTOR}, got {signal_len}"
            )));
        }
        let [c0, c1, c2, c3] = arch.disc_channels;
        let convs = vec![
            Layer::Conv1d(Conv1d::new(stage_spec(c0, c1), Activation::LeakyRelu, rng)),
            Layer::Conv1d(Conv1d::new(stage_spec(c1, c2), Activation::LeakyRelu, rng)),
            Layer::Conv1d(Conv1d::new(stage_spec(c2, c3), Activation::LeakyRelu, rng)),
        ];
        let trunk_len = signal_len / UPSAMPLE_FACTOR;
        let flat_dim = c3 * trunk_len;
        let score_act = if critic {
            Activation::Identity
        } else {
            Activation::Sigmoid
        };
        let score = Dense::new(flat_dim, 1, score_act, rng);
        let class = match class_bins {
            Some(b) if b >= 2 => Some(Dense::new(flat_dim, b, Activation::Identity, rng)),
            Some(b) => {
                return Err(Error::Invalid(format!(
                    "label binning needs >= 2 bins, got {b}"
                )))
            }
            None => None,
        };
        Ok(Discriminator {
            signal_len,
            flat_dim,
            trunk_channels: c3,
            trunk_len,
            convs,
            score,
            class,
        })
    }

    pub fn has_class_head(&self) -> bool {
        self.class.is_some()
    }

    pub fn is_critic(&self) -> bool {
        self.score.activation == Activation::Identity
    }

    pub fn class_bins(&self) -> Option<usize> {
        self.class.as_ref().map(|c| c.out_dim)
    }

    /// Runs the trunk and heads on an assembled `[M, 2, L]` input.
    pub fn forward_input(&mut self, x: &Tensor) -> Result<DiscOutput> {
        let m = match *x.shape() {
            [m, 2, l] if l == self.signal_len => m,
            _ => {
                return Err(Error::shape(
                    "discriminator input",
                    &[0, 2, self.signal_len],
                    x.shape(),
                ))
            }
        };
        let mut t = x.clone();
        for conv in &mut self.convs {
            t = conv.forward(&t)?;
        }
        let flat = t.reshape(&[m, self.flat_dim])?;
        let scores = self.score.forward(&flat)?;
        let class_logits = match &mut self.class {
            Some(head) => Some(head.forward(&flat)?),
            None => None,
        };
        Ok(DiscOutput {
            scores: scores.data().to_vec(),
            class_logits,
        })
    }

    /// Convenience wrapper: stacks the label channel, then scores.
    pub fn forward(&mut self, signals: &Tensor, labels: &[f64]) -> Result<DiscOutput> {
        let x = stack_with_label(signals, labels)?;
        self.forward_input(&x)
    }

    /// Pulls score (and optional class) gradients back to the `[M, 2, L]`
    /// input, accumulating parameter gradients along the way.
    pub fn backward(
        &mut self,
        score_grads: &[f64],
        class_grads: Option<&Tensor>,
    ) -> Result<Tensor> {
        let m = score_grads.len();
        let up = Tensor::from_vec(&[m, 1], score_grads.to_vec())?;
        let mut flat_grad = self.score.backward(&up)?;
        match (&mut self.class, class_grads) {
            (Some(head), Some(cg)) => {
                let extra = head.backward(cg)?;
                if extra.shape() != flat_grad.shape() {
                    return Err(Error::shape(
                        "class-head gradient",
                        flat_grad.shape(),
                        extra.shape(),
                    ));
                }
                for (a, b) in flat_grad.data_mut().iter_mut().zip(extra.data()) {
                    *a += b;
                }
            }
            (Some(_), None) => {}
            (None, Some(_)) => {
                return Err(Error::Invalid(
                    "class gradients supplied but this discriminator has no class head".into(),
                ))
            }
            (None, None) => {}
        }
        let mut g = flat_grad.reshape(&[m, self.trunk_channels, self.trunk_len])?;
        for conv in self.convs.iter_mut().rev() {
            g = conv.backward(&g)?;
        }
        Ok(g)
    }

    /// Clamps every parameter into `[-bound, bound]`.
    pub fn clip_params(&mut self, bound: f64) {
        for (p, _) in self.params_and_grads_mut() {
            for v in p.data_mut() {
                *v = v.clamp(-bound, bound);
            }
        }
    }

    pub fn params(&self) -> Vec<&Tensor> {
        let mut out: Vec<&Tensor> = self.convs.iter().flat_map(|l| l.params()).collect();
        out.extend(self.score.params());
        if let Some(head) = &self.class {
            out.extend(head.params());
        }
        out
    }

    pub fn checksum(&self) -> u64 {
        params_checksum(self.params())
    }
}

impl ParamNet for Discriminator {
    fn params_and_grads_mut(&mut self) -> Vec<(&mut Tensor, &mut Tensor)> {
        let mut out: Vec<(&mut Tensor, &mut Tensor)> = self
            .convs
            .iter_mut()
            .flat_map(|l| l.params_and_grads_mut())
            .collect();
        out.extend(self.score.params_and_grads_mut());
        if let Some(head) = &mut self.class {
            out.extend(head.params_and_grads_mut());
        }
        out
    }
}

/// `[M, 1, L]` signals + per-sample labels to the `[M, 2, L]` discriminator
/// input; channel 1 is the label broadcast along time. Labels must already
/// be normalized into `[0, 1]`.
pub fn stack_with_label(signals: &Tensor, labels: &[f64]) -> Result<Tensor> {
    let (m, l) = match *signals.shape() {
        [m, 1, l] => (m, l),
        _ => return Err(Error::shape("signal batch", &[0, 1, 0], signals.shape())),
    };
    if labels.len() != m {
        return Err(Error::Invalid(format!(
            "label count {} does not match batch size {}",
            labels.len(),
            m
        )));
    }
    if let Some(&bad) = labels.iter().find(|&&y| !(0.0..=1.0).contains(&y)) {
        return Err(Error::Invalid(format!(
            "conditioning label {bad} outside the normalized range [0, 1]"
        )));
    }
    let mut out = Tensor::zeros(&[m, 2, l]);
    for i in 0..m {
        let src = &signals.data()[i * l..(i + 1) * l];
        let base = i * 2 * l;
        out.data_mut()[base..base + l].copy_from_slice(src);
        out.data_mut()[base + l..base + 2 * l].fill(labels[i]);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Model bundle
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct GanModel {
    pub hp: GanHyperParams,
    pub gen: Generator,
    pub disc: Discriminator,
    pub adam_g: Adam,
    pub adam_d: Adam,
    pub rng: ChaCha8Rng,
    pub epochs_trained: u32,
}

impl GanModel {
    pub fn new(hp: GanHyperParams, seed: u64) -> Result<Self> {
        use rand::SeedableRng;
        hp.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut gen = if hp.variant.dense_generator() {
            Generator::new_dense(hp.signal_len, &hp.noise, &hp.arch, &mut rng)?
        } else {
            Generator::new_conv(hp.signal_len, &hp.noise, &hp.arch, &mut rng)?
        };
        let class_bins = hp.variant.uses_class_head().then_some(hp.class_bins);
        let mut disc = Discriminator::new(
            hp.signal_len,
            hp.variant.uses_critic(),
            class_bins,
            &hp.arch,
            &mut rng,
        )?;
        let g_sizes: Vec<usize> = gen
            .params_and_grads_mut()
            .iter()
            .map(|(p, _)| p.len())
            .collect();
        let d_sizes: Vec<usize> = disc
            .params_and_grads_mut()
            .iter()
            .map(|(p, _)| p.len())
            .collect();
        let adam_g = Adam::new(
            AdamConfig {
                lr: hp.lr_g,
                beta1: hp.beta1,
                beta2: hp.beta2,
                eps: 1e-8,
            },
            &g_sizes,
        );
        let adam_d = Adam::new(
            AdamConfig {
                lr: hp.lr_d,
                beta1: hp.beta1,
                beta2: hp.beta2,
                eps: 1e-8,
            },
            &d_sizes,
        );
        Ok(GanModel {
            hp,
            gen,
            disc,
            adam_g,
            adam_d,
            rng,
            epochs_trained: 0,
        })
    }

    /// Draws conditioned noise from the model RNG and runs the generator.
    /// Labels must be normalized into `[0, 1]`.
    pub fn generate_normalized(&mut self, labels: &[f64]) -> Result<Tensor> {
        let z = conditioned_noise(&self.hp.noise, &mut self.rng, labels)?;
        self.gen.forward(&z)
    }

    /// Mean `(||d(score)/d(signal)||_2 - 1)^2` over a batch of interpolated
    /// signals `[M, 1, L]` conditioned on `labels`. The input gradient comes
    /// from exact backpropagation to the input; only the signal channel
    /// enters the norm, the label channel is conditioning, not data.
    /// Parameter gradients touched along the way are zeroed before
    /// returning, so this is a pure diagnostic.
    pub fn gradient_penalty(&mut self, signals: &Tensor, labels: &[f64]) -> Result<f64> {
        if !self.hp.variant.uses_critic() {
            return Err(Error::Invalid(format!(
                "gradient penalty is defined for the critic variant, not {}",
                self.hp.variant
            )));
        }
        let inputs = stack_with_label(signals, labels)?;
        let m = inputs.shape()[0];
        let out = self.disc.forward_input(&inputs)?;
        // Sum of scores: samples are independent, so each row of the input
        // gradient is that sample's own score gradient.
        let ones = vec![1.0; out.scores.len()];
        let input_grad = self.disc.backward(&ones, None)?;
        let l = self.hp.signal_len;
        let mut norms = Vec::with_capacity(m);
        for i in 0..m {
            let sig = &input_grad.data()[i * 2 * l..i * 2 * l + l];
            norms.push(sig.iter().map(|v| v * v).sum::<f64>().sqrt());
        }
        self.disc.zero_grads();
        crate::gan::loss::gradient_penalty_from_norms(&norms)
    }

    pub fn generator_checksum(&self) -> u64 {
        self.gen.checksum()
    }

    pub fn discriminator_checksum(&self) -> u64 {
        self.disc.checksum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gan::noise::sample_sinusoidal_noise;
    use crate::nn::grad_check;
    use rand::SeedableRng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(11)
    }

    fn small_hp(variant: Variant) -> GanHyperParams {
        let mut hp = GanHyperParams::new(variant, 64).unwrap();
        hp.arch = NetArch::reduced();
        hp.noise.latent_dim = 12;
        hp.batch_size = 3;
        hp.stft = StftSpec::new(32, 16).unwrap();
        hp
    }

    #[test]
    fn variant_parsing_accepts_spelling_aliases() {
        for (s, want) in [
            ("has-cgan", Variant::HasCgan),
            ("HAS_CGAN", Variant::HasCgan),
            ("hascgan", Variant::HasCgan),
            ("dense-cgan", Variant::DenseCgan),
            ("cgan-dense", Variant::DenseCgan),
            ("conv_cgan", Variant::ConvCgan),
            ("cgan-conv", Variant::ConvCgan),
            ("ACGAN", Variant::Acgan),
            ("wcgan", Variant::Wcgan),
        ] {
            assert_eq!(Variant::parse(s).unwrap(), want, "{s}");
        }
        assert!(Variant::parse("cgan").is_err());
        for v in Variant::ALL {
            assert_eq!(Variant::from_tag(v.tag()), Some(v));
            assert_eq!(Variant::parse(v.name()).unwrap(), v);
        }
    }

    #[test]
    fn defaults_are_valid_and_pinned() {
        let hp = GanHyperParams::new(Variant::HasCgan, 1024).unwrap();
        assert_eq!(hp.batch_size, 13);
        assert_eq!(hp.lr_g, 2e-4);
        assert_eq!(hp.beta1, 0.5);
        assert_eq!(hp.epochs, 500);
        assert_eq!(hp.gamma1, 0.8);
        assert_eq!(hp.gamma2, 0.2);
        assert_eq!(hp.clip, 0.01);
        assert_eq!(hp.class_bins, 5);
        assert_eq!(hp.noise.latent_dim, 100);
        assert_eq!(hp.seed_len(), 16);
    }

    #[test]
    fn bad_lengths_and_weights_are_rejected() {
        assert!(GanHyperParams::new(Variant::HasCgan, 1000).is_err());
        assert!(GanHyperParams::new(Variant::HasCgan, 0).is_err());
        let mut hp = GanHyperParams::new(Variant::HasCgan, 1024).unwrap();
        hp.gamma1 = 0.9;
        assert!(hp.validate().is_err());
        hp.gamma1 = 1.2;
        hp.gamma2 = -0.2;
        assert!(hp.validate().is_err());
        let mut hp = GanHyperParams::new(Variant::Wcgan, 1024).unwrap();
        hp.clip = 0.0;
        assert!(hp.validate().is_err());
    }

    #[test]
    fn conv_generator_maps_noise_to_bounded_signals() {
        let hp = small_hp(Variant::ConvCgan);
        let mut g = Generator::new_conv(64, &hp.noise, &hp.arch, &mut rng()).unwrap();
        let z = conditioned_noise(&hp.noise, &mut rng(), &[0.1, 0.5, 0.9]).unwrap();
        let out = g.forward(&z).unwrap();
        assert_eq!(out.shape(), &[3, 1, 64]);
        assert!(out.data().iter().all(|v| v.abs() < 1.0));
    }

    #[test]
    fn dense_generator_maps_noise_to_bounded_signals() {
        let hp = small_hp(Variant::DenseCgan);
        let mut g = Generator::new_dense(64, &hp.noise, &hp.arch, &mut rng()).unwrap();
        let z = conditioned_noise(&hp.noise, &mut rng(), &[0.0, 1.0, 0.4]).unwrap();
        let out = g.forward(&z).unwrap();
        assert_eq!(out.shape(), &[3, 1, 64]);
        assert!(out.data().iter().all(|v| v.abs() < 1.0));
    }

    #[test]
    fn discriminator_scores_are_probabilities_unless_critic() {
        let hp = small_hp(Variant::ConvCgan);
        let mut d = Discriminator::new(64, false, None, &hp.arch, &mut rng()).unwrap();
        let sig = Tensor::from_vec(
            &[2, 1, 64],
            (0..128).map(|i| (i as f64 * 0.1).sin()).collect(),
        )
        .unwrap();
        let out = d.forward(&sig, &[0.3, 0.8]).unwrap();
        assert_eq!(out.scores.len(), 2);
        assert!(out.scores.iter().all(|s| (0.0..=1.0).contains(s)));
        assert!(out.class_logits.is_none());

        let mut critic = Discriminator::new(64, true, None, &hp.arch, &mut rng()).unwrap();
        assert!(critic.is_critic());
        let out = critic.forward(&sig, &[0.3, 0.8]).unwrap();
        assert_eq!(out.scores.len(), 2);
    }

    #[test]
    fn class_head_emits_logits_per_bin() {
        let hp = small_hp(Variant::Acgan);
        let mut d = Discriminator::new(64, false, Some(5), &hp.arch, &mut rng()).unwrap();
        let sig = Tensor::zeros(&[3, 1, 64]);
        let out = d.forward(&sig, &[0.1, 0.2, 0.3]).unwrap();
        assert_eq!(out.class_logits.unwrap().shape(), &[3, 5]);
        assert!(Discriminator::new(64, false, Some(1), &hp.arch, &mut rng()).is_err());
    }

    #[test]
    fn label_channel_is_constant_and_range_checked() {
        let sig = Tensor::from_vec(&[1, 1, 4], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let x = stack_with_label(&sig, &[0.25]).unwrap();
        assert_eq!(x.data(), &[1.0, 2.0, 3.0, 4.0, 0.25, 0.25, 0.25, 0.25]);
        assert!(stack_with_label(&sig, &[1.25]).is_err());
        assert!(stack_with_label(&sig, &[-0.1]).is_err());
        assert!(stack_with_label(&sig, &[0.1, 0.2]).is_err());
    }

    #[test]
    fn generator_gradients_match_finite_differences() {
        let hp = small_hp(Variant::ConvCgan);
        let mut g = Generator::new_conv(64, &hp.noise, &hp.arch, &mut rng()).unwrap();
        // probe a few evaluation points: a ReLU kink within h of one point
        // fakes a mismatch at a single isolated parameter
        let report = crate::nn::best_over_points(4, 1e-6, |attempt| {
            let mut zr = ChaCha8Rng::seed_from_u64(100 + attempt);
            crate::nn::jitter_params(&mut g, &mut zr, 0.05);
            let z = conditioned_noise(&hp.noise, &mut zr, &[0.2, 0.7])?;
            let loss = |net: &mut Generator| {
                let y = net.forward(&z)?;
                Ok(y.data().iter().sum::<f64>() / y.len() as f64)
            };
            let grad = |net: &mut Generator| {
                let y = net.forward(&z)?;
                let n = y.len() as f64;
                let up = Tensor::from_vec(y.shape(), vec![1.0 / n; y.len()])?;
                net.backward(&up)
            };
            grad_check(&mut g, loss, grad, 1e-5, 1e-8)
        })
        .unwrap();
        assert!(
            report.max_rel_error < 1e-5,
            "max rel err {} at {:?}",
            report.max_rel_error,
            report.worst
        );
    }

    #[test]
    fn discriminator_gradients_match_finite_differences() {
        let hp = small_hp(Variant::Acgan);
        let mut d = Discriminator::new(64, false, Some(3), &hp.arch, &mut rng()).unwrap();
        let labels = [0.2, 0.9];
        let bins = [0usize, 2];
        let report = crate::nn::best_over_points(4, 1e-6, |attempt| {
            let mut data_rng = ChaCha8Rng::seed_from_u64(200 + attempt);
            crate::nn::jitter_params(&mut d, &mut data_rng, 0.05);
            let sig = sample_sinusoidal_noise(
                &NoiseSpec {
                    latent_dim: 64,
                    ..NoiseSpec::default()
                },
                &mut data_rng,
                2,
            );
            let sig = sig.reshape(&[2, 1, 64])?;
            // loss: mean score + class CE, exercising both heads and the trunk
            let loss = |net: &mut Discriminator| {
                let out = net.forward(&sig, &labels)?;
                let (ce, _) =
                    crate::gan::loss::softmax_ce(out.class_logits.as_ref().unwrap(), &bins)?;
                Ok(out.scores.iter().sum::<f64>() / out.scores.len() as f64 + ce)
            };
            let grad = |net: &mut Discriminator| {
                let out = net.forward(&sig, &labels)?;
                let m = out.scores.len() as f64;
                let sg = vec![1.0 / m; out.scores.len()];
                let (_, cg) =
                    crate::gan::loss::softmax_ce(out.class_logits.as_ref().unwrap(), &bins)?;
                net.backward(&sg, Some(&cg))?;
                Ok(())
            };
            grad_check(&mut d, loss, grad, 1e-5, 1e-8)
        })
        .unwrap();
        assert!(
            report.max_rel_error < 1e-4,
            "max rel err {} at {:?}",
            report.max_rel_error,
            report.worst
        );
    }

    #[test]
    fn clipping_bounds_every_parameter() {
        let hp = small_hp(Variant::Wcgan);
        let mut d = Discriminator::new(64, true, None, &hp.arch, &mut rng()).unwrap();
        for (p, _) in d.params_and_grads_mut() {
            for v in p.data_mut() {
                *v += 1.0;
            }
        }
        d.clip_params(0.01);
        for p in d.params() {
            assert!(p.data().iter().all(|v| v.abs() <= 0.01));
        }
    }

    #[test]
    fn penalty_requires_critic_and_is_finite() {
        let mut critic = GanModel::new(small_hp(Variant::Wcgan), 5).unwrap();
        let sig = Tensor::zeros(&[2, 1, 64]);
        let p = critic.gradient_penalty(&sig, &[0.5, 0.5]).unwrap();
        assert!(p.is_finite() && p >= 0.0);

        let mut plain = GanModel::new(small_hp(Variant::ConvCgan), 5).unwrap();
        assert!(plain.gradient_penalty(&sig, &[0.5, 0.5]).is_err());
    }

    #[test]
    fn zero_discriminator_penalty_is_one() {
        let mut critic = GanModel::new(small_hp(Variant::Wcgan), 5).unwrap();
        for (p, _) in critic.disc.params_and_grads_mut() {
            p.fill(0.0);
        }
        let sig =
            Tensor::from_vec(&[1, 1, 64], (0..64).map(|i| (i as f64).cos()).collect()).unwrap();
        let p = critic.gradient_penalty(&sig, &[0.5]).unwrap();
        assert_eq!(p, 1.0);
    }

    #[test]
    fn mean_critic_penalty_reaches_closed_form_via_input_backprop() {
        // A critic computing mean(x) over L inputs has input gradient 1/L at
        // every coordinate, so the norm is 1/sqrt(L) and the penalty is
        // (1/sqrt(L) - 1)^2; with L=1 the norm is 1 and the penalty 0.
        for l in [64usize, 1] {
            let mut head = Dense::new(l, 1, Activation::Identity, &mut rng());
            for (p, _) in head.params_and_grads_mut() {
                if p.len() == l {
                    p.fill(1.0 / l as f64);
                } else {
                    p.fill(0.0);
                }
            }
            let x = Tensor::from_vec(&[1, l], (0..l).map(|i| (i as f64).sin()).collect()).unwrap();
            head.forward(&x).unwrap();
            let up = Tensor::from_vec(&[1, 1], vec![1.0]).unwrap();
            let input_grad = head.backward(&up).unwrap();
            let norm = input_grad.data().iter().map(|v| v * v).sum::<f64>().sqrt();
            let penalty = crate::gan::loss::gradient_penalty_from_norms(&[norm]).unwrap();
            let want = (1.0 / (l as f64).sqrt() - 1.0).powi(2);
            assert!((penalty - want).abs() < 1e-12, "L={l}: {penalty} vs {want}");
        }
    }

    #[test]
    fn model_bundle_is_reproducible() {
        let a = GanModel::new(small_hp(Variant::HasCgan), 42).unwrap();
        let b = GanModel::new(small_hp(Variant::HasCgan), 42).unwrap();
        assert_eq!(a.generator_checksum(), b.generator_checksum());
        assert_eq!(a.discriminator_checksum(), b.discriminator_checksum());
        let c = GanModel::new(small_hp(Variant::HasCgan), 43).unwrap();
        assert_ne!(a.generator_checksum(), c.generator_checksum());
    }

    #[test]
    fn generate_normalized_respects_label_contract() {
        let mut m = GanModel::new(small_hp(Variant::HasCgan), 42).unwrap();
        let out = m.generate_normalized(&[0.0, 0.5, 1.0]).unwrap();
        assert_eq!(out.shape(), &[3, 1, 64]);
        assert!(m.generate_normalized(&[1.5]).is_err());
    }
}
