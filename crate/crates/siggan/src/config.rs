//! Flat `key = value` run configuration. One pair per line, `#` starts a
//! comment, unknown or repeated keys are rejected, and every key has a
//! default so a loaded config always carries the full set.

use sha2::{Digest, Sha256};
use std::collections::HashSet;
use std::path::Path;
use std::str::FromStr;

use crate::bench::{PredictorConfig, PredictorKind, SweepConfig};
use crate::data::SurrogateSpec;
use crate::error::{Error, Result};
use crate::gan::{GLossForm, GanHyperParams, Variant};
use crate::spectral::StftSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    // surrogate dataset
    pub signal_len: usize,
    pub sample_rate_hz: f64,
    pub train_count: usize,
    pub harmonics: usize,
    pub harmonic_decay: f64,
    pub noise_level: f64,
    pub rpms: Vec<f64>,
    pub feeds_mm_min: Vec<f64>,
    pub depths_um: Vec<f64>,
    // adversarial training
    pub batch_size: usize,
    pub lr_g: f64,
    pub lr_d: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epochs: u32,
    pub gamma1: f64,
    pub gamma2: f64,
    pub alpha_class: f64,
    pub beta_penalty: f64,
    pub clip: f64,
    pub class_bins: usize,
    pub latent_dim: usize,
    pub f_lo: f64,
    pub f_hi: f64,
    pub g_loss: GLossForm,
    pub stft_window: usize,
    pub stft_hop: usize,
    // predictors
    pub pred_epochs: u32,
    pub pred_lr: f64,
    pub pred_batch: usize,
    pub ridge_lambda: f64,
    // augmentation sweep
    pub sweep_scales: Vec<usize>,
    pub sweep_models: Vec<PredictorKind>,
    pub sweep_seeds: Vec<u64>,
    pub sweep_master_seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let ds = SurrogateSpec::default();
        let hp = GanHyperParams::new(Variant::HasCgan, ds.signal_len)
            .expect("default hyperparameters are valid");
        let pred = PredictorConfig::default();
        let sweep = SweepConfig::default();
        RunConfig {
            signal_len: ds.signal_len,
            sample_rate_hz: ds.sample_rate_hz,
            train_count: ds.train_count,
            harmonics: ds.harmonics,
            harmonic_decay: ds.harmonic_decay,
            noise_level: ds.noise_level,
            rpms: ds.rpms,
            feeds_mm_min: ds.feeds_mm_min,
            depths_um: ds.depths_um,
            batch_size: hp.batch_size,
            lr_g: hp.lr_g,
            lr_d: hp.lr_d,
            beta1: hp.beta1,
            beta2: hp.beta2,
            epochs: hp.epochs,
            gamma1: hp.gamma1,
            gamma2: hp.gamma2,
            alpha_class: hp.alpha_class,
            beta_penalty: hp.beta_penalty,
            clip: hp.clip,
            class_bins: hp.class_bins,
            latent_dim: hp.noise.latent_dim,
            f_lo: hp.noise.f_lo,
            f_hi: hp.noise.f_hi,
            g_loss: hp.g_loss,
            stft_window: hp.stft.window,
            stft_hop: hp.stft.hop,
            pred_epochs: pred.epochs,
            pred_lr: pred.lr,
            pred_batch: pred.batch,
            ridge_lambda: pred.ridge_lambda,
            sweep_scales: sweep.scales,
            sweep_models: sweep.kinds,
            sweep_seeds: sweep.seeds,
            sweep_master_seed: sweep.master_seed,
        }
    }
}

fn scalar<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("key {key}: cannot parse value {value:?}")))
}

fn list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    if value.trim().is_empty() {
        return Err(Error::Config(format!("key {key}: empty list")));
    }
    value.split(',').map(|v| scalar(key, v.trim())).collect()
}

fn join<T: std::fmt::Display>(items: &[T]) -> String {
    items
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut seen: HashSet<String> = HashSet::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", idx + 1)))?;
            let key = key.trim();
            let value = value.trim();
            if !seen.insert(key.to_string()) {
                return Err(Error::Config(format!("key {key} given twice")));
            }
            match key {
                "signal_len" => cfg.signal_len = scalar(key, value)?,
                "sample_rate_hz" => cfg.sample_rate_hz = scalar(key, value)?,
                "train_count" => cfg.train_count = scalar(key, value)?,
                "harmonics" => cfg.harmonics = scalar(key, value)?,
                "harmonic_decay" => cfg.harmonic_decay = scalar(key, value)?,
                "noise_level" => cfg.noise_level = scalar(key, value)?,
                "rpms" => cfg.rpms = list(key, value)?,
                "feeds_mm_min" => cfg.feeds_mm_min = list(key, value)?,
                "depths_um" => cfg.depths_um = list(key, value)?,
                "batch_size" => cfg.batch_size = scalar(key, value)?,
                "lr_g" => cfg.lr_g = scalar(key, value)?,
                "lr_d" => cfg.lr_d = scalar(key, value)?,
                "beta1" => cfg.beta1 = scalar(key, value)?,
                "beta2" => cfg.beta2 = scalar(key, value)?,
                "epochs" => cfg.epochs = scalar(key, value)?,
                "gamma1" => cfg.gamma1 = scalar(key, value)?,
                "gamma2" => cfg.gamma2 = scalar(key, value)?,
                "alpha_class" => cfg.alpha_class = scalar(key, value)?,
                "beta_penalty" => cfg.beta_penalty = scalar(key, value)?,
                "clip" => cfg.clip = scalar(key, value)?,
                "class_bins" => cfg.class_bins = scalar(key, value)?,
                "latent_dim" => cfg.latent_dim = scalar(key, value)?,
                "f_lo" => cfg.f_lo = scalar(key, value)?,
                "f_hi" => cfg.f_hi = scalar(key, value)?,
                "g_loss" => cfg.g_loss = GLossForm::parse(value)?,
                "stft_window" => cfg.stft_window = scalar(key, value)?,
                "stft_hop" => cfg.stft_hop = scalar(key, value)?,
                "pred_epochs" => cfg.pred_epochs = scalar(key, value)?,
                "pred_lr" => cfg.pred_lr = scalar(key, value)?,
                "pred_batch" => cfg.pred_batch = scalar(key, value)?,
                "ridge_lambda" => cfg.ridge_lambda = scalar(key, value)?,
                "sweep_scales" => cfg.sweep_scales = list(key, value)?,
                "sweep_models" => {
                    cfg.sweep_models = value
                        .split(',')
                        .map(|v| PredictorKind::parse(v.trim()))
                        .collect::<Result<_>>()?
                }
                "sweep_seeds" => cfg.sweep_seeds = list(key, value)?,
                "sweep_master_seed" => cfg.sweep_master_seed = scalar(key, value)?,
                _ => return Err(Error::Config(format!("unknown key {key}"))),
            }
        }
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        RunConfig::parse(&text)
    }

    /// Canonical text form: every key, fixed order. Parsing it back yields
    /// an equal config, and serializing again yields identical text.
    pub fn serialize(&self) -> String {
        let mut s = String::new();
        s.push_str("# surrogate dataset\n");
        s.push_str(&format!("signal_len = {}\n", self.signal_len));
        s.push_str(&format!("sample_rate_hz = {}\n", self.sample_rate_hz));
        s.push_str(&format!("train_count = {}\n", self.train_count));
        s.push_str(&format!("harmonics = {}\n", self.harmonics));
        s.push_str(&format!("harmonic_decay = {}\n", self.harmonic_decay));
        s.push_str(&format!("noise_level = {}\n", self.noise_level));
        s.push_str(&format!("rpms = {}\n", join(&self.rpms)));
        s.push_str(&format!("feeds_mm_min = {}\n", join(&self.feeds_mm_min)));
        s.push_str(&format!("depths_um = {}\n", join(&self.depths_um)));
        s.push_str("# adversarial training\n");
        s.push_str(&format!("batch_size = {}\n", self.batch_size));
        s.push_str(&format!("lr_g = {}\n", self.lr_g));
        s.push_str(&format!("lr_d = {}\n", self.lr_d));
        s.push_str(&format!("beta1 = {}\n", self.beta1));
        s.push_str(&format!("beta2 = {}\n", self.beta2));
        s.push_str(&format!("epochs = {}\n", self.epochs));
        s.push_str(&format!("gamma1 = {}\n", self.gamma1));
        s.push_str(&format!("gamma2 = {}\n", self.gamma2));
        s.push_str(&format!("alpha_class = {}\n", self.alpha_class));
        s.push_str(&format!("beta_penalty = {}\n", self.beta_penalty));
        s.push_str(&format!("clip = {}\n", self.clip));
        s.push_str(&format!("class_bins = {}\n", self.class_bins));
        s.push_str(&format!("latent_dim = {}\n", self.latent_dim));
        s.push_str(&format!("f_lo = {}\n", self.f_lo));
        s.push_str(&format!("f_hi = {}\n", self.f_hi));
        s.push_str(&format!("g_loss = {}\n", self.g_loss.name()));
        s.push_str(&format!("stft_window = {}\n", self.stft_window));
        s.push_str(&format!("stft_hop = {}\n", self.stft_hop));
        s.push_str("# predictors\n");
        s.push_str(&format!("pred_epochs = {}\n", self.pred_epochs));
        s.push_str(&format!("pred_lr = {}\n", self.pred_lr));
        s.push_str(&format!("pred_batch = {}\n", self.pred_batch));
        s.push_str(&format!("ridge_lambda = {}\n", self.ridge_lambda));
        s.push_str("# augmentation sweep\n");
        s.push_str(&format!("sweep_scales = {}\n", join(&self.sweep_scales)));
        s.push_str(&format!(
            "sweep_models = {}\n",
            self.sweep_models
                .iter()
                .map(|k| k.name().to_string())
                .collect::<Vec<_>>()
                .join(",")
        ));
        s.push_str(&format!("sweep_seeds = {}\n", join(&self.sweep_seeds)));
        s.push_str(&format!("sweep_master_seed = {}\n", self.sweep_master_seed));
        s
    }

    /// First 16 hex chars of the canonical form's SHA-256; embedded in every
    /// output artifact so results trace back to their settings.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.serialize().as_bytes());
        let mut out = String::with_capacity(16);
        for byte in &digest[..8] {
            out.push_str(&format!("{byte:02x}"));
        }
        out
    }

    pub fn surrogate_spec(&self) -> SurrogateSpec {
        SurrogateSpec {
            rpms: self.rpms.clone(),
            feeds_mm_min: self.feeds_mm_min.clone(),
            depths_um: self.depths_um.clone(),
            signal_len: self.signal_len,
            sample_rate_hz: self.sample_rate_hz,
            harmonics: self.harmonics,
            harmonic_decay: self.harmonic_decay,
            noise_level: self.noise_level,
            train_count: self.train_count,
        }
    }

    pub fn gan_hp(&self, variant: Variant) -> Result<GanHyperParams> {
        let mut hp = GanHyperParams::new(variant, self.signal_len)?;
        hp.batch_size = self.batch_size;
        hp.lr_g = self.lr_g;
        hp.lr_d = self.lr_d;
        hp.beta1 = self.beta1;
        hp.beta2 = self.beta2;
        hp.epochs = self.epochs;
        hp.gamma1 = self.gamma1;
        hp.gamma2 = self.gamma2;
        hp.alpha_class = self.alpha_class;
        hp.beta_penalty = self.beta_penalty;
        hp.clip = self.clip;
        hp.class_bins = self.class_bins;
        hp.noise.latent_dim = self.latent_dim;
        hp.noise.f_lo = self.f_lo;
        hp.noise.f_hi = self.f_hi;
        hp.g_loss = self.g_loss;
        hp.stft = StftSpec {
            window: self.stft_window,
            hop: self.stft_hop,
        };
        hp.validate()?;
        Ok(hp)
    }

    pub fn predictor_config(&self) -> PredictorConfig {
        PredictorConfig {
            epochs: self.pred_epochs,
            lr: self.pred_lr,
            batch: self.pred_batch,
            ridge_lambda: self.ridge_lambda,
        }
    }

    pub fn sweep_config(&self) -> SweepConfig {
        SweepConfig {
            kinds: self.sweep_models.clone(),
            scales: self.sweep_scales.clone(),
            seeds: self.sweep_seeds.clone(),
            master_seed: self.sweep_master_seed,
            predictor: self.predictor_config(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_idempotent() {
        let cfg = RunConfig::default();
        let text = cfg.serialize();
        let reparsed = RunConfig::parse(&text).unwrap();
        assert_eq!(reparsed, cfg);
        assert_eq!(reparsed.serialize(), text);
    }

    #[test]
    fn defaults_match_the_protocol() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.signal_len, 1024);
        assert_eq!(cfg.sample_rate_hz, 8192.0);
        assert_eq!(cfg.batch_size, 13);
        assert_eq!(cfg.epochs, 500);
        assert_eq!((cfg.gamma1, cfg.gamma2), (0.8, 0.2));
        assert_eq!(cfg.sweep_scales, vec![0, 5, 7, 10, 15, 20]);
        assert_eq!(cfg.pred_epochs, 300);
        assert_eq!(cfg.ridge_lambda, 1.0);
    }

    #[test]
    fn comments_blanks_and_overrides_parse() {
        let cfg = RunConfig::parse(
            "# comment only\n\n  epochs = 7   # trailing note\nsweep_models = ridge , cnn1d\n",
        )
        .unwrap();
        assert_eq!(cfg.epochs, 7);
        assert_eq!(
            cfg.sweep_models,
            vec![PredictorKind::Ridge, PredictorKind::Cnn1d]
        );
        // everything else stays at its default
        assert_eq!(cfg.batch_size, RunConfig::default().batch_size);
    }

    #[test]
    fn unknown_duplicate_and_malformed_keys_are_rejected() {
        let err = RunConfig::parse("no_such_key = 3\n").unwrap_err();
        assert!(err.to_string().contains("no_such_key"), "{err}");
        let err = RunConfig::parse("epochs = 3\nepochs = 4\n").unwrap_err();
        assert!(err.to_string().contains("twice"), "{err}");
        let err = RunConfig::parse("just words\n").unwrap_err();
        assert!(err.to_string().contains("expected key = value"), "{err}");
        let err = RunConfig::parse("epochs = fast\n").unwrap_err();
        assert!(err.to_string().contains("epochs"), "{err}");
    }

    #[test]
    fn hash_is_stable_and_value_sensitive() {
        let a = RunConfig::default().hash();
        let b = RunConfig::default().hash();
        assert_eq!(a, b);
        assert_eq!(a.len(), 16);
        assert!(a.chars().all(|c| c.is_ascii_hexdigit()));
        let cfg = RunConfig {
            epochs: 501,
            ..Default::default()
        };
        assert_ne!(cfg.hash(), a);
    }

    #[test]
    fn conversions_carry_overrides_and_validate() {
        let mut cfg = RunConfig {
            gamma1: 0.6,
            gamma2: 0.4,
            epochs: 9,
            ..Default::default()
        };
        let hp = cfg.gan_hp(Variant::HasCgan).unwrap();
        assert_eq!(hp.gamma1, 0.6);
        assert_eq!(hp.epochs, 9);
        cfg.gamma2 = 0.3;
        assert!(cfg.gan_hp(Variant::HasCgan).is_err());

        let spec = cfg.surrogate_spec();
        assert_eq!(spec.train_count, 52);
        let sw = cfg.sweep_config();
        assert_eq!(sw.predictor.epochs, cfg.pred_epochs);
    }
}
