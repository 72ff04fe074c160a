//! Command-line front end. Every command is a thin wrapper over library
//! calls: parse flags, load artifacts, run, write artifacts. All commands
//! are deterministic under (config, --seed), and every CSV artifact starts
//! with a `# config_hash=` comment tracing it back to its settings.

use clap::{Parser, Subcommand};
use rand::Rng as _;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::bench::{run_sweep, PredictorKind};
use crate::config::RunConfig;
use crate::data::io::{dataset_to_csv, read_dataset, write_dataset};
use crate::data::{synth_dataset, Dataset};
use crate::error::{Error, Result};
use crate::gan::{
    generate_labeled, read_checkpoint, stack_with_label, train, write_checkpoint, Discriminator,
    GanModel, Generator, NetArch, NoiseSpec, Variant,
};
use crate::nn::{
    best_over_points, grad_check, jitter_params, Activation, Conv1d, ConvSpec, ConvTranspose1d,
    Dense, GradCheckReport, Layer, ParamNet, Tensor,
};
use crate::spectral::{spectral_loss, spectral_loss_grad, wavelet_coherence, CwtSpec, StftSpec};

/// Scales used for every coherence map the CLI emits.
const COHERENCE_SCALES: usize = 24;

#[derive(Parser)]
#[command(
    name = "siggan",
    version,
    about = "Conditional signal generation and augmentation benchmark"
)]
pub struct Cli {
    /// Key=value configuration file; defaults apply when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed; every command is bit-reproducible under (config, seed).
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output path; each command has its own default.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Suppress progress lines (artifacts are still written).
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Subcommand)]
pub enum Cmd {
    /// Synthesize the surrogate dataset and write it as an SGD1 file.
    Synth,
    /// Train one adversarial variant; writes an SGF1 checkpoint plus a
    /// per-epoch loss CSV next to it.
    TrainGan {
        #[arg(long)]
        variant: String,
        /// SGD1 dataset to train on.
        #[arg(long)]
        data: PathBuf,
    },
    /// Sample labeled signals from a trained checkpoint.
    Generate {
        #[arg(long)]
        checkpoint: PathBuf,
        /// Dataset supplying normalization and the label range.
        #[arg(long)]
        data: PathBuf,
        /// Number of signals when --labels is not given.
        #[arg(long, default_value_t = 64)]
        count: usize,
        /// Explicit comma-separated roughness labels (um).
        #[arg(long)]
        labels: Option<String>,
    },
    /// Mean wavelet coherence between generated and same-label real signals,
    /// one row per held-out sample.
    Coherence {
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        data: PathBuf,
        /// Compare each real signal against itself; must report 1.000.
        #[arg(long)]
        self_check: bool,
    },
    /// Augmentation sweep over predictors x scales x seeds.
    Sweep {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Override configured scales, e.g. 0,5,10.
        #[arg(long)]
        scales: Option<String>,
        /// Override configured predictors, e.g. ridge,cnn1d.
        #[arg(long)]
        models: Option<String>,
        /// Override configured predictor seeds.
        #[arg(long)]
        seeds: Option<String>,
    },
    /// Finite-difference verification of every layer kind and both network
    /// stacks at reduced size; nonzero exit on any failure.
    Gradcheck {
        #[arg(long, hide = true)]
        corrupt: bool,
    },
    /// Summarize artifacts (trainlog/coherence/sweep CSVs) found in a
    /// directory.
    Report {
        #[arg(long, default_value = ".")]
        dir: PathBuf,
    },
}

macro_rules! say {
    ($quiet:expr, $($arg:tt)*) => {
        if !$quiet {
            println!($($arg)*);
        }
    };
}

/// Binary entry point: returns the process exit code.
pub fn main_entry() -> i32 {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(path) => RunConfig::from_path(path)?,
        None => RunConfig::default(),
    };
    let ctx = Ctx {
        cfg,
        seed: cli.seed,
        out: cli.out,
        quiet: cli.quiet,
    };
    match cli.cmd {
        Cmd::Synth => cmd_synth(&ctx),
        Cmd::TrainGan { variant, data } => cmd_train_gan(&ctx, &variant, &data),
        Cmd::Generate {
            checkpoint,
            data,
            count,
            labels,
        } => cmd_generate(&ctx, &checkpoint, &data, count, labels.as_deref()),
        Cmd::Coherence {
            checkpoint,
            data,
            self_check,
        } => cmd_coherence(&ctx, checkpoint.as_deref(), &data, self_check),
        Cmd::Sweep {
            checkpoint,
            data,
            scales,
            models,
            seeds,
        } => cmd_sweep(
            &ctx,
            &checkpoint,
            &data,
            scales.as_deref(),
            models.as_deref(),
            seeds.as_deref(),
        ),
        Cmd::Gradcheck { corrupt } => cmd_gradcheck(&ctx, corrupt),
        Cmd::Report { dir } => cmd_report(&ctx, &dir),
    }
}

struct Ctx {
    cfg: RunConfig,
    seed: u64,
    out: Option<PathBuf>,
    quiet: bool,
}

impl Ctx {
    fn out_or(&self, default: &str) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from(default))
    }
}

fn sha256_16(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

fn parse_comma<T: std::str::FromStr>(flag: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(|v| {
            v.trim()
                .parse()
                .map_err(|_| Error::Config(format!("--{flag}: cannot parse {v:?}")))
        })
        .collect()
}

/// Companion text file so binary artifacts stay traceable to their settings.
fn write_meta(path: &Path, artifact: &str, ctx: &Ctx, extra: &str) -> Result<()> {
    let meta = format!(
        "artifact={artifact}\nconfig_hash={}\nseed={}\n{extra}\n{}",
        ctx.cfg.hash(),
        ctx.seed,
        ctx.cfg.serialize()
    );
    std::fs::write(meta_path(path), meta)?;
    Ok(())
}

fn meta_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".meta.txt");
    path.with_file_name(name)
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

fn cmd_synth(ctx: &Ctx) -> Result<()> {
    let spec = ctx.cfg.surrogate_spec();
    let ds = synth_dataset(&spec, ctx.seed)?;
    let out = ctx.out_or("dataset.sgd1");
    write_dataset(&out, &ds)?;
    write_meta(&out, "dataset", ctx, "")?;
    let (lo, hi) = ds
        .all()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
            (lo.min(s.ra_um), hi.max(s.ra_um))
        });
    say!(
        ctx.quiet,
        "train={} test={} ra_um=[{lo:.3},{hi:.3}] config_hash={} out={}",
        ds.train.len(),
        ds.test.len(),
        ctx.cfg.hash(),
        out.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// train-gan
// ---------------------------------------------------------------------------

fn cmd_train_gan(ctx: &Ctx, variant: &str, data: &Path) -> Result<()> {
    let variant = Variant::parse(variant)?;
    let ds = read_dataset(data)?;
    let hp = ctx.cfg.gan_hp(variant)?;
    let mut model = GanModel::new(hp, ctx.seed)?;
    let quiet = ctx.quiet;
    let epochs = model.hp.epochs;
    let t0 = Instant::now();
    let log = train(&mut model, &ds, |st| {
        let spectral = st
            .spectral
            .map(|v| format!(" spectral={v:.5}"))
            .unwrap_or_default();
        let penalty = st
            .penalty
            .map(|v| format!(" penalty={v:.5}"))
            .unwrap_or_default();
        say!(
            quiet,
            "epoch {}/{epochs} d_loss={:.5} g_loss={:.5}{spectral}{penalty}",
            st.epoch + 1,
            st.d_loss,
            st.g_loss
        );
    })?;
    let out = ctx.out_or("model.sgf1");
    write_checkpoint(&out, &mut model, &ctx.cfg.serialize())?;
    let ck_hash = sha256_16(&std::fs::read(&out)?);
    let log_path = out.with_extension("trainlog.csv");
    let csv = format!(
        "# config_hash={}\n# variant={}\n{}",
        ctx.cfg.hash(),
        variant.name(),
        log.to_csv()
    );
    std::fs::write(&log_path, csv)?;
    say!(
        ctx.quiet,
        "trained {} for {} epochs in {:.1}s checkpoint_hash={ck_hash} out={} trainlog={}",
        variant.name(),
        log.epochs.len(),
        t0.elapsed().as_secs_f64(),
        out.display(),
        log_path.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

fn cmd_generate(
    ctx: &Ctx,
    checkpoint: &Path,
    data: &Path,
    count: usize,
    labels: Option<&str>,
) -> Result<()> {
    let ds = read_dataset(data)?;
    let (mut model, _config) = read_checkpoint(checkpoint)?;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let ra: Vec<f64> = match labels {
        Some(list) => parse_comma("labels", list)?,
        None => {
            if count == 0 {
                return Err(Error::Config("--count must be >= 1".into()));
            }
            let (lo, hi) = ds
                .train
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
                    (lo.min(s.ra_um), hi.max(s.ra_um))
                });
            (0..count).map(|_| rng.gen_range(lo..=hi)).collect()
        }
    };
    model.rng = rng;
    let (generated, clamped) = generate_labeled(&mut model, &ds, &ra, 10_000)?;
    let n = generated.len();
    let out_ds = Dataset {
        sample_rate_hz: ds.sample_rate_hz,
        train: generated,
        test: Vec::new(),
        norm: ds.norm,
    };
    let out = ctx.out_or("generated.sgd1");
    if out.extension().is_some_and(|e| e == "csv") {
        let csv = format!(
            "# config_hash={}\n{}",
            ctx.cfg.hash(),
            dataset_to_csv(&out_ds)
        );
        std::fs::write(&out, csv)?;
    } else {
        write_dataset(&out, &out_ds)?;
        write_meta(&out, "generated", ctx, "")?;
    }
    say!(
        ctx.quiet,
        "generated={n} clamped_labels={clamped} variant={} out={}",
        model.hp.variant.name(),
        out.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// coherence
// ---------------------------------------------------------------------------

fn cmd_coherence(
    ctx: &Ctx,
    checkpoint: Option<&Path>,
    data: &Path,
    self_check: bool,
) -> Result<()> {
    let ds = read_dataset(data)?;
    if ds.test.is_empty() {
        return Err(Error::Invalid("dataset has no held-out samples".into()));
    }
    let spec = CwtSpec::for_len(ds.signal_len(), COHERENCE_SCALES)?;
    let (label, rows) = if self_check {
        let mut rows = Vec::with_capacity(ds.test.len());
        for s in &ds.test {
            let wc = wavelet_coherence(&s.signal, &s.signal, &spec)?.mean_inside_coi();
            rows.push((s.id, s.ra_um, wc));
        }
        ("self-check".to_string(), rows)
    } else {
        let path = checkpoint.ok_or_else(|| {
            Error::Config("--checkpoint is required unless --self-check is set".into())
        })?;
        let (mut model, _config) = read_checkpoint(path)?;
        model.rng = ChaCha8Rng::seed_from_u64(ctx.seed);
        let ra: Vec<f64> = ds.test.iter().map(|s| s.ra_um).collect();
        let (generated, _clamped) = generate_labeled(&mut model, &ds, &ra, 20_000)?;
        let mut rows = Vec::with_capacity(ds.test.len());
        for (real, gen) in ds.test.iter().zip(&generated) {
            let wc = wavelet_coherence(&real.signal, &gen.signal, &spec)?.mean_inside_coi();
            rows.push((real.id, real.ra_um, wc));
        }
        (model.hp.variant.name().to_string(), rows)
    };
    let aggregate = rows.iter().map(|(_, _, wc)| wc).sum::<f64>() / rows.len() as f64;
    let mut csv = format!(
        "# config_hash={}\n# variant={label}\nid,ra_um,mean_wc\n",
        ctx.cfg.hash()
    );
    for (id, ra, wc) in &rows {
        csv.push_str(&format!("{id},{ra:.6},{wc:.6}\n"));
    }
    csv.push_str(&format!("# aggregate={aggregate:.6}\n"));
    let out = ctx.out_or("coherence.csv");
    std::fs::write(&out, csv)?;
    say!(
        ctx.quiet,
        "variant={label} pairs={} aggregate_mean_wc={aggregate:.6} out={}",
        rows.len(),
        out.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

fn cmd_sweep(
    ctx: &Ctx,
    checkpoint: &Path,
    data: &Path,
    scales: Option<&str>,
    models: Option<&str>,
    seeds: Option<&str>,
) -> Result<()> {
    let ds = read_dataset(data)?;
    let bytes = std::fs::read(checkpoint)?;
    let ck_hash = sha256_16(&bytes);
    let (model, _config) = crate::gan::model_from_bytes(&bytes)?;
    let mut sw = ctx.cfg.sweep_config();
    if let Some(list) = scales {
        sw.scales = parse_comma("scales", list)?;
    }
    if let Some(list) = models {
        sw.kinds = list
            .split(',')
            .map(|v| PredictorKind::parse(v.trim()))
            .collect::<Result<_>>()?;
    }
    if let Some(list) = seeds {
        sw.seeds = parse_comma("seeds", list)?;
    }
    let quiet = ctx.quiet;
    let t0 = Instant::now();
    let mut report = run_sweep(&model, &ds, &sw, |row| {
        say!(
            quiet,
            "{} scale={} seed={} train_size={} mape={:.3}%",
            row.kind.name(),
            row.scale,
            row.seed,
            row.train_size,
            row.mape_percent
        );
    })?;
    report.config_text = ctx.cfg.serialize();
    report.checkpoint_hash = ck_hash;
    let out = ctx.out_or("sweep.csv");
    let csv = format!("# config_hash={}\n{}", ctx.cfg.hash(), report.to_csv());
    std::fs::write(&out, csv)?;
    std::fs::write(meta_path(&out), report.metadata())?;
    say!(ctx.quiet, "test-leakage: none");
    for (kind, plateau) in &report.plateau {
        match plateau {
            Some(scale) => say!(ctx.quiet, "plateau {}: {scale}", kind.name()),
            None => say!(ctx.quiet, "plateau {}: none within the sweep", kind.name()),
        }
    }
    say!(
        ctx.quiet,
        "rows={} wall={:.1}s out={}",
        report.rows.len(),
        t0.elapsed().as_secs_f64(),
        out.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// gradcheck
// ---------------------------------------------------------------------------

/// Layer pile with a sum-of-outputs objective; enough structure to exercise
/// forward and backward of any layer kind.
struct LayerStack {
    layers: Vec<Layer>,
    input: Tensor,
    corrupt: bool,
}

impl ParamNet for LayerStack {
    fn params_and_grads_mut(&mut self) -> Vec<(&mut Tensor, &mut Tensor)> {
        self.layers
            .iter_mut()
            .flat_map(|l| l.params_and_grads_mut())
            .collect()
    }
}

impl LayerStack {
    fn loss(&mut self) -> Result<f64> {
        let mut t = self.input.clone();
        for layer in &mut self.layers {
            t = layer.forward(&t)?;
        }
        Ok(t.data().iter().sum())
    }

    fn grads(&mut self) -> Result<()> {
        let mut t = self.input.clone();
        for layer in &mut self.layers {
            t = layer.forward(&t)?;
        }
        let mut g = Tensor::zeros(t.shape());
        g.fill(1.0);
        for layer in self.layers.iter_mut().rev() {
            g = layer.backward(&g)?;
        }
        if self.corrupt {
            // negative control: poison one analytic gradient
            let pairs = self.params_and_grads_mut();
            if let Some((_, grad)) = pairs.into_iter().next() {
                grad.data_mut()[0] += 0.5;
            }
        }
        Ok(())
    }
}

fn random_tensor(shape: &[usize], rng: &mut ChaCha8Rng) -> Tensor {
    let n: usize = shape.iter().product();
    let data: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    Tensor::from_vec(shape, data).expect("shape/data agree")
}

fn check_stack(
    layers_for: impl Fn(&mut ChaCha8Rng) -> Result<Vec<Layer>>,
    input_shape: &[usize],
    corrupt: bool,
) -> Result<GradCheckReport> {
    best_over_points(4, 1e-6, |attempt| {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + attempt);
        let mut net = LayerStack {
            layers: layers_for(&mut rng)?,
            input: random_tensor(input_shape, &mut rng),
            corrupt,
        };
        jitter_params(&mut net, &mut rng, 0.05);
        grad_check(&mut net, |n| n.loss(), |n| n.grads(), 1e-5, 1e-8)
    })
}

fn check_generator(dense: bool) -> Result<GradCheckReport> {
    best_over_points(4, 1e-6, |attempt| {
        let mut rng = ChaCha8Rng::seed_from_u64(200 + attempt);
        let noise = NoiseSpec {
            latent_dim: 8,
            ..NoiseSpec::default()
        };
        let arch = NetArch::reduced();
        let mut gen = if dense {
            Generator::new_dense(64, &noise, &arch, &mut rng)?
        } else {
            Generator::new_conv(64, &noise, &arch, &mut rng)?
        };
        jitter_params(&mut gen, &mut rng, 0.05);
        let z = random_tensor(&[2, 9], &mut rng);
        let loss = |g: &mut Generator| Ok(g.forward(&z)?.data().iter().sum());
        let grad = |g: &mut Generator| {
            let out = g.forward(&z)?;
            let mut up = Tensor::zeros(out.shape());
            up.fill(1.0);
            g.backward(&up)
        };
        grad_check(&mut gen, loss, grad, 1e-5, 1e-8)
    })
}

fn check_discriminator(critic: bool) -> Result<GradCheckReport> {
    best_over_points(4, 1e-6, |attempt| {
        let mut rng = ChaCha8Rng::seed_from_u64(300 + attempt);
        let class_bins = if critic { None } else { Some(3) };
        let mut disc = Discriminator::new(64, critic, class_bins, &NetArch::reduced(), &mut rng)?;
        jitter_params(&mut disc, &mut rng, 0.05);
        let signals = random_tensor(&[2, 1, 64], &mut rng);
        let x = stack_with_label(&signals, &[0.25, 0.75])?;
        let loss = |d: &mut Discriminator| {
            let out = d.forward_input(&x)?;
            let mut acc: f64 = out.scores.iter().sum();
            if let Some(logits) = &out.class_logits {
                acc += logits.data().iter().sum::<f64>();
            }
            Ok(acc)
        };
        let grad = |d: &mut Discriminator| {
            let out = d.forward_input(&x)?;
            let ones = vec![1.0; out.scores.len()];
            let class = out.class_logits.as_ref().map(|l| {
                let mut g = Tensor::zeros(l.shape());
                g.fill(1.0);
                g
            });
            d.backward(&ones, class.as_ref())?;
            Ok(())
        };
        grad_check(&mut disc, loss, grad, 1e-5, 1e-8)
    })
}

fn check_spectral_path() -> Result<GradCheckReport> {
    best_over_points(4, 1e-5, |attempt| {
        let mut rng = ChaCha8Rng::seed_from_u64(400 + attempt);
        let noise = NoiseSpec {
            latent_dim: 8,
            ..NoiseSpec::default()
        };
        let mut gen = Generator::new_conv(64, &noise, &NetArch::reduced(), &mut rng)?;
        jitter_params(&mut gen, &mut rng, 0.05);
        let z = random_tensor(&[2, 9], &mut rng);
        let refs: Vec<Vec<f64>> = (0..2)
            .map(|i| {
                (0..64)
                    .map(|t| (0.3 + 0.1 * i as f64) * (0.4 * t as f64).sin())
                    .collect()
            })
            .collect();
        let spec = StftSpec::default();
        let rows = |out: &Tensor| -> Vec<Vec<f64>> {
            (0..2)
                .map(|i| out.data()[i * 64..(i + 1) * 64].to_vec())
                .collect()
        };
        let loss = |g: &mut Generator| {
            let out = g.forward(&z)?;
            spectral_loss(&refs, &rows(&out), spec)
        };
        let grad = |g: &mut Generator| {
            let out = g.forward(&z)?;
            let (_, grads) = spectral_loss_grad(&refs, &rows(&out), spec)?;
            let flat: Vec<f64> = grads.into_iter().flatten().collect();
            let up = Tensor::from_vec(&[2, 1, 64], flat)?;
            g.backward(&up)
        };
        grad_check(&mut gen, loss, grad, 1e-5, 1e-8)
    })
}

fn cmd_gradcheck(ctx: &Ctx, corrupt: bool) -> Result<()> {
    let t0 = Instant::now();
    let checks: Vec<(&str, f64, Result<GradCheckReport>)> = vec![
        (
            "dense",
            1e-4,
            check_stack(
                |rng| {
                    Ok(vec![
                        Layer::Dense(Dense::new(9, 6, Activation::Relu, rng)),
                        Layer::Dense(Dense::new(6, 1, Activation::Sigmoid, rng)),
                    ])
                },
                &[4, 9],
                corrupt,
            ),
        ),
        (
            "conv1d",
            1e-4,
            check_stack(
                |rng| {
                    Ok(vec![Layer::Conv1d(Conv1d::new(
                        ConvSpec::new(2, 3, 5, 2, 2)?,
                        Activation::LeakyRelu,
                        rng,
                    ))])
                },
                &[3, 2, 16],
                false,
            ),
        ),
        (
            "conv_transpose1d",
            1e-4,
            check_stack(
                |rng| {
                    Ok(vec![Layer::ConvTranspose1d(ConvTranspose1d::new(
                        ConvSpec::new(3, 2, 6, 2, 2)?,
                        Activation::Tanh,
                        rng,
                    ))])
                },
                &[2, 3, 8],
                false,
            ),
        ),
        ("generator-conv", 1e-4, check_generator(false)),
        ("generator-dense", 1e-4, check_generator(true)),
        ("discriminator", 1e-4, check_discriminator(false)),
        ("critic", 1e-4, check_discriminator(true)),
        ("spectral-path", 1e-3, check_spectral_path()),
    ];

    let mut failures = 0usize;
    for (name, tol, outcome) in &checks {
        match outcome {
            Ok(report) => {
                let ok = report.max_rel_error < *tol;
                if !ok {
                    failures += 1;
                }
                say!(
                    ctx.quiet,
                    "{name}: params={} max_rel_err={:.3e} tol={tol:.0e} {}",
                    report.checked,
                    report.max_rel_error,
                    if ok { "PASS" } else { "FAIL" }
                );
            }
            Err(e) => {
                failures += 1;
                say!(ctx.quiet, "{name}: error {e} FAIL");
            }
        }
    }
    say!(
        ctx.quiet,
        "gradcheck: {}/{} passed in {:.1}s",
        checks.len() - failures,
        checks.len(),
        t0.elapsed().as_secs_f64()
    );
    if failures > 0 {
        return Err(Error::Verification(format!(
            "{failures} gradient check(s) failed"
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

struct CsvFile {
    name: String,
    comments: Vec<String>,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

fn read_csv(path: &Path) -> Result<CsvFile> {
    let text = std::fs::read_to_string(path)?;
    let mut comments = Vec::new();
    let mut header = Vec::new();
    let mut rows = Vec::new();
    for line in text.lines() {
        if let Some(c) = line.strip_prefix('#') {
            comments.push(c.trim().to_string());
        } else if header.is_empty() {
            header = line.split(',').map(str::to_string).collect();
        } else if !line.trim().is_empty() {
            rows.push(line.split(',').map(str::to_string).collect());
        }
    }
    Ok(CsvFile {
        name: path
            .file_name()
            .unwrap_or_default()
            .to_string_lossy()
            .into_owned(),
        comments,
        header,
        rows,
    })
}

fn summarize(file: &CsvFile) -> Option<String> {
    let head = file.header.iter().map(String::as_str).collect::<Vec<_>>();
    let mut s = String::new();
    match head.as_slice() {
        ["epoch", "d_loss", "g_loss", "spectral_component"] => {
            let last = file.rows.last()?;
            s.push_str(&format!(
                "{}: training log, {} epochs, final d_loss={} g_loss={}",
                file.name,
                file.rows.len(),
                last.get(1)?,
                last.get(2)?
            ));
            let spectral: Vec<f64> = file
                .rows
                .iter()
                .filter_map(|r| r.get(3)?.parse().ok())
                .collect();
            if let (Some(first), Some(last)) = (spectral.first(), spectral.last()) {
                s.push_str(&format!(", spectral {first:.4e} -> {last:.4e}"));
            }
        }
        ["id", "ra_um", "mean_wc"] => {
            let values: Vec<f64> = file
                .rows
                .iter()
                .filter_map(|r| r.get(2)?.parse().ok())
                .collect();
            if values.is_empty() {
                return None;
            }
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            let variant = file
                .comments
                .iter()
                .find_map(|c| c.strip_prefix("variant="))
                .unwrap_or("?");
            s.push_str(&format!(
                "{}: coherence, variant={variant}, {} pairs, aggregate mean_wc={mean:.4}",
                file.name,
                values.len()
            ));
        }
        ["kind", "scale", "train_size", "seed", "mape_percent"] => {
            s.push_str(&format!("{}: sweep, {} rows", file.name, file.rows.len()));
            let mut kinds: Vec<String> = file
                .rows
                .iter()
                .filter_map(|r| r.first().cloned())
                .collect();
            kinds.sort();
            kinds.dedup();
            for kind in kinds {
                let mut by_scale: Vec<(usize, Vec<f64>)> = Vec::new();
                for row in file.rows.iter().filter(|r| r[0] == kind) {
                    let scale: usize = row.get(1)?.parse().ok()?;
                    let mape: f64 = row.get(4)?.parse().ok()?;
                    match by_scale.iter_mut().find(|(s, _)| *s == scale) {
                        Some((_, v)) => v.push(mape),
                        None => by_scale.push((scale, vec![mape])),
                    }
                }
                by_scale.sort_by_key(|(s, _)| *s);
                let medians: Vec<f64> = by_scale
                    .iter()
                    .map(|(_, v)| {
                        let mut v = v.clone();
                        v.sort_by(f64::total_cmp);
                        if v.len() % 2 == 1 {
                            v[v.len() / 2]
                        } else {
                            0.5 * (v[v.len() / 2 - 1] + v[v.len() / 2])
                        }
                    })
                    .collect();
                let scales: Vec<usize> = by_scale.iter().map(|(s, _)| *s).collect();
                let detail = scales
                    .iter()
                    .zip(&medians)
                    .map(|(sc, m)| format!("{sc}:{m:.2}%"))
                    .collect::<Vec<_>>()
                    .join(" ");
                s.push_str(&format!("\n  {kind} median MAPE by scale: {detail}"));
                match crate::bench::sweep::plateau_scale(&scales, &medians) {
                    Some(p) => s.push_str(&format!(" (plateau at {p})")),
                    None => s.push_str(" (no plateau within sweep)"),
                }
            }
        }
        _ => return None,
    }
    if let Some(hash) = file
        .comments
        .iter()
        .find_map(|c| c.strip_prefix("config_hash="))
    {
        s.push_str(&format!(" [config {hash}]"));
    }
    Some(s)
}

fn cmd_report(ctx: &Ctx, dir: &Path) -> Result<()> {
    let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .collect();
    entries.sort();
    let mut sections = Vec::new();
    for path in &entries {
        if let Ok(file) = read_csv(path) {
            if let Some(summary) = summarize(&file) {
                sections.push(summary);
            }
        }
    }
    let body = if sections.is_empty() {
        format!("no recognized artifacts under {}\n", dir.display())
    } else {
        format!("{}\n", sections.join("\n"))
    };
    match &ctx.out {
        Some(path) => {
            std::fs::write(path, &body)?;
            say!(ctx.quiet, "report written to {}", path.display());
        }
        None => print!("{body}"),
    }
    Ok(())
}
