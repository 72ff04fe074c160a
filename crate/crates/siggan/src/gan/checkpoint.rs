//! Checkpoint serialization.
//!
//! Layout (all integers little-endian):
//! magic "SGF1", format version u32, variant tag u8, generator-loss tag u8,
//! hyperparameters, epochs-trained u32, config text (u32 length + UTF-8),
//! then for generator and discriminator in declaration order: parameter
//! tensors as u32 length + f64 values, followed by each optimizer's step
//! count and first/second moments, and finally the RNG state (32-byte seed,
//! u128 word position, u64 stream).
//!
//! The format captures everything training touches, so save -> load ->
//! continue is bit-identical to an uninterrupted run.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gan::model::{GLossForm, GanHyperParams, GanModel, NetArch, Variant};
use crate::gan::noise::NoiseSpec;
use crate::nn::{ParamNet, Tensor};
use crate::spectral::StftSpec;

const MAGIC: &[u8; 4] = b"SGF1";
const FORMAT_VERSION: u32 = 1;

struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn new() -> Self {
        Writer { buf: Vec::new() }
    }
    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn u128(&mut self, v: u128) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn bytes(&mut self, v: &[u8]) {
        self.buf.extend_from_slice(v);
    }
    fn text(&mut self, s: &str) {
        self.u32(s.len() as u32);
        self.bytes(s.as_bytes());
    }
    fn tensor(&mut self, t: &Tensor) {
        self.u32(t.len() as u32);
        for &v in t.data() {
            self.f64(v);
        }
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Reader { buf, pos: 0 }
    }
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(Error::Format(format!(
                "checkpoint truncated: wanted {} bytes at offset {}, file has {}",
                n,
                self.pos,
                self.buf.len()
            )));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn u128(&mut self) -> Result<u128> {
        Ok(u128::from_le_bytes(self.take(16)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn text(&mut self) -> Result<String> {
        let n = self.u32()? as usize;
        String::from_utf8(self.take(n)?.to_vec())
            .map_err(|_| Error::Format("checkpoint config text is not UTF-8".into()))
    }
    fn values(&mut self, expected: usize, what: &str) -> Result<Vec<f64>> {
        let n = self.u32()? as usize;
        if n != expected {
            return Err(Error::Format(format!(
                "{what}: stored tensor has {n} values, model expects {expected}"
            )));
        }
        (0..n).map(|_| self.f64()).collect()
    }
    fn done(&self) -> Result<()> {
        if self.pos != self.buf.len() {
            return Err(Error::Format(format!(
                "checkpoint has {} trailing bytes",
                self.buf.len() - self.pos
            )));
        }
        Ok(())
    }
}

fn write_hp(w: &mut Writer, hp: &GanHyperParams) {
    w.u8(hp.variant.tag());
    w.u8(hp.g_loss.tag());
    w.u32(hp.signal_len as u32);
    w.u32(hp.noise.latent_dim as u32);
    w.f64(hp.noise.f_lo);
    w.f64(hp.noise.f_hi);
    for c in hp.arch.gen_channels {
        w.u32(c as u32);
    }
    for c in hp.arch.disc_channels {
        w.u32(c as u32);
    }
    for c in hp.arch.dense_hidden {
        w.u32(c as u32);
    }
    w.u32(hp.batch_size as u32);
    w.f64(hp.lr_g);
    w.f64(hp.lr_d);
    w.f64(hp.beta1);
    w.f64(hp.beta2);
    w.u32(hp.epochs);
    w.f64(hp.gamma1);
    w.f64(hp.gamma2);
    w.f64(hp.alpha_class);
    w.f64(hp.beta_penalty);
    w.f64(hp.clip);
    w.u32(hp.class_bins as u32);
    w.u32(hp.stft.window as u32);
    w.u32(hp.stft.hop as u32);
}

fn read_hp(r: &mut Reader) -> Result<GanHyperParams> {
    let variant = Variant::from_tag(r.u8()?)
        .ok_or_else(|| Error::Format("unknown variant tag in checkpoint".into()))?;
    let g_loss = GLossForm::from_tag(r.u8()?)
        .ok_or_else(|| Error::Format("unknown generator-loss tag in checkpoint".into()))?;
    let signal_len = r.u32()? as usize;
    let latent_dim = r.u32()? as usize;
    let f_lo = r.f64()?;
    let f_hi = r.f64()?;
    let mut gen_channels = [0usize; 4];
    for c in &mut gen_channels {
        *c = r.u32()? as usize;
    }
    let mut disc_channels = [0usize; 4];
    for c in &mut disc_channels {
        *c = r.u32()? as usize;
    }
    let mut dense_hidden = [0usize; 2];
    for c in &mut dense_hidden {
        *c = r.u32()? as usize;
    }
    let hp = GanHyperParams {
        variant,
        signal_len,
        noise: NoiseSpec {
            latent_dim,
            f_lo,
            f_hi,
        },
        arch: NetArch {
            gen_channels,
            disc_channels,
            dense_hidden,
        },
        batch_size: r.u32()? as usize,
        lr_g: r.f64()?,
        lr_d: r.f64()?,
        beta1: r.f64()?,
        beta2: r.f64()?,
        epochs: r.u32()?,
        gamma1: r.f64()?,
        gamma2: r.f64()?,
        alpha_class: r.f64()?,
        beta_penalty: r.f64()?,
        clip: r.f64()?,
        class_bins: r.u32()? as usize,
        g_loss,
        stft: StftSpec::new(r.u32()? as usize, r.u32()? as usize)?,
    };
    hp.validate()?;
    Ok(hp)
}

fn write_net<N: ParamNet>(w: &mut Writer, net: &mut N) {
    let pairs = net.params_and_grads_mut();
    w.u32(pairs.len() as u32);
    for (p, _) in pairs {
        w.tensor(p);
    }
}

fn write_adam(w: &mut Writer, adam: &crate::nn::Adam) {
    w.u64(adam.step_count());
    let (m, v) = adam.moments();
    for t in m.iter().chain(v) {
        w.tensor(t);
    }
}

/// Serializes the full training state plus the run configuration that
/// produced it.
pub fn model_to_bytes(model: &mut GanModel, config_text: &str) -> Vec<u8> {
    let mut w = Writer::new();
    w.bytes(MAGIC);
    w.u32(FORMAT_VERSION);
    write_hp(&mut w, &model.hp);
    w.u32(model.epochs_trained);
    w.text(config_text);
    write_net(&mut w, &mut model.gen);
    write_net(&mut w, &mut model.disc);
    write_adam(&mut w, &model.adam_g);
    write_adam(&mut w, &model.adam_d);
    w.bytes(&model.rng.get_seed());
    w.u128(model.rng.get_word_pos());
    w.u64(model.rng.get_stream());
    w.buf
}

fn read_net<N: ParamNet>(r: &mut Reader, net: &mut N, what: &str) -> Result<()> {
    let mut pairs = net.params_and_grads_mut();
    let stored = r.u32()? as usize;
    if stored != pairs.len() {
        return Err(Error::Format(format!(
            "{what}: checkpoint has {} tensors, model expects {}",
            stored,
            pairs.len()
        )));
    }
    for (p, _) in pairs.iter_mut() {
        let vals = r.values(p.len(), what)?;
        p.data_mut().copy_from_slice(&vals);
    }
    Ok(())
}

fn read_adam(
    r: &mut Reader,
    adam: &mut crate::nn::Adam,
    sizes: &[usize],
    what: &str,
) -> Result<()> {
    let t = r.u64()?;
    let mut read_set = |tag: &str| -> Result<Vec<Tensor>> {
        sizes
            .iter()
            .map(|&n| {
                let vals = r.values(n, &format!("{what} {tag}"))?;
                Tensor::from_vec(&[n], vals)
            })
            .collect()
    };
    let m = read_set("first moment")?;
    let v = read_set("second moment")?;
    adam.restore(m, v, t)
}

/// Rebuilds a model from bytes; returns it with the stored config text.
pub fn model_from_bytes(bytes: &[u8]) -> Result<(GanModel, String)> {
    let mut r = Reader::new(bytes);
    let magic = r.take(4)?;
    if magic != MAGIC {
        return Err(Error::Format(format!(
            "bad checkpoint magic {:?}, expected {:?}",
            magic, MAGIC
        )));
    }
    let version = r.u32()?;
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!(
            "unsupported checkpoint format version {version}, this build reads {FORMAT_VERSION}"
        )));
    }
    let hp = read_hp(&mut r)?;
    let epochs_trained = r.u32()?;
    let config_text = r.text()?;
    let mut model = GanModel::new(hp, 0)?;
    read_net(&mut r, &mut model.gen, "generator")?;
    read_net(&mut r, &mut model.disc, "discriminator")?;
    let g_sizes: Vec<usize> = model
        .gen
        .params_and_grads_mut()
        .iter()
        .map(|(p, _)| p.len())
        .collect();
    let d_sizes: Vec<usize> = model
        .disc
        .params_and_grads_mut()
        .iter()
        .map(|(p, _)| p.len())
        .collect();
    read_adam(&mut r, &mut model.adam_g, &g_sizes, "generator optimizer")?;
    read_adam(
        &mut r,
        &mut model.adam_d,
        &d_sizes,
        "discriminator optimizer",
    )?;
    let seed: [u8; 32] = r.take(32)?.try_into().unwrap();
    let word_pos = r.u128()?;
    let stream = r.u64()?;
    let mut rng = ChaCha8Rng::from_seed(seed);
    rng.set_stream(stream);
    rng.set_word_pos(word_pos);
    model.rng = rng;
    model.epochs_trained = epochs_trained;
    r.done()?;
    Ok((model, config_text))
}

pub fn write_checkpoint(path: &Path, model: &mut GanModel, config_text: &str) -> Result<()> {
    std::fs::write(path, model_to_bytes(model, config_text))?;
    Ok(())
}

pub fn read_checkpoint(path: &Path) -> Result<(GanModel, String)> {
    let bytes = std::fs::read(path)?;
    model_from_bytes(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::surrogate::{synth_dataset, SurrogateSpec};
    use crate::gan::train::train;

    fn trained_model(variant: Variant, epochs: u32) -> (GanModel, crate::data::Dataset) {
        let spec = SurrogateSpec {
            signal_len: 128,
            ..SurrogateSpec::default()
        };
        let ds = synth_dataset(&spec, 9).unwrap();
        let mut hp = GanHyperParams::new(variant, 128).unwrap();
        hp.arch = NetArch::reduced();
        hp.noise.latent_dim = 16;
        hp.epochs = epochs;
        hp.stft = StftSpec::new(32, 16).unwrap();
        let mut model = GanModel::new(hp, 21).unwrap();
        train(&mut model, &ds, |_| {}).unwrap();
        (model, ds)
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let (mut model, _) = trained_model(Variant::HasCgan, 2);
        let bytes = model_to_bytes(&mut model, "seed=21\n");
        let (mut loaded, cfg) = model_from_bytes(&bytes).unwrap();
        assert_eq!(cfg, "seed=21\n");
        let again = model_to_bytes(&mut loaded, &cfg);
        assert_eq!(bytes, again);
    }

    #[test]
    fn resume_matches_uninterrupted_run() {
        let (mut interrupted, ds) = trained_model(Variant::ConvCgan, 2);
        let bytes = model_to_bytes(&mut interrupted, "");
        let (mut resumed, _) = model_from_bytes(&bytes).unwrap();
        resumed.hp.epochs = 4;
        train(&mut resumed, &ds, |_| {}).unwrap();

        let (straight, _) = trained_model(Variant::ConvCgan, 4);
        assert_eq!(resumed.generator_checksum(), straight.generator_checksum());
        assert_eq!(
            resumed.discriminator_checksum(),
            straight.discriminator_checksum()
        );
        assert_eq!(resumed.epochs_trained, 4);
    }

    #[test]
    fn corrupt_magic_version_and_truncation_are_rejected() {
        let (mut model, _) = trained_model(Variant::Wcgan, 1);
        let bytes = model_to_bytes(&mut model, "");

        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(
            model_from_bytes(&bad),
            Err(Error::Format(msg)) if msg.contains("magic")
        ));

        let mut bad = bytes.clone();
        bad[4] = 99;
        assert!(matches!(
            model_from_bytes(&bad),
            Err(Error::Format(msg)) if msg.contains("version")
        ));

        let truncated = &bytes[..bytes.len() - 7];
        assert!(model_from_bytes(truncated).is_err());

        let mut padded = bytes.clone();
        padded.extend_from_slice(&[0, 1, 2]);
        assert!(matches!(
            model_from_bytes(&padded),
            Err(Error::Format(msg)) if msg.contains("trailing")
        ));
    }

    #[test]
    fn every_variant_round_trips() {
        for variant in Variant::ALL {
            let (mut model, _) = trained_model(variant, 1);
            let bytes = model_to_bytes(&mut model, "x=1");
            let (mut loaded, _) = model_from_bytes(&bytes).unwrap();
            assert_eq!(
                model.generator_checksum(),
                loaded.generator_checksum(),
                "{variant}"
            );
            assert_eq!(
                model.discriminator_checksum(),
                loaded.discriminator_checksum(),
                "{variant}"
            );
            assert_eq!(bytes, model_to_bytes(&mut loaded, "x=1"), "{variant}");
        }
    }
}
