//! Shipping gate. One test per release criterion; each prints a single
//! `criterion N: PASS|FAIL ...` line carrying the measured quantities next
//! to their pinned thresholds, then asserts.
//!
//! The expensive fixtures (full 500-epoch trainings at three seeds for two
//! variants) are built once behind `OnceLock` and shared by criteria 6-8.

use std::process::Command;
use std::sync::OnceLock;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use siggan::config::RunConfig;
use siggan::data::io::{dataset_from_bytes, dataset_to_bytes};
use siggan::data::surrogate::synth_dataset;
use siggan::data::Dataset;
use siggan::gan::{
    generate_labeled, loss, model_from_bytes, model_to_bytes, train, GanModel, Variant,
};
use siggan::nn::tensor::Tensor;
use siggan::spectral::fft::{dft_naive, fft};
use siggan::spectral::stft::{spectral_loss, stft_magnitude, StftSpec};
use siggan::spectral::wavelet::{wavelet_coherence, CwtSpec};

// ---------------------------------------------------------------------------
// shared fixtures
// ---------------------------------------------------------------------------

const TRAIN_SEEDS: [u64; 3] = [1, 2, 3];
/// Fixed stream for post-training generation, so comparisons across models
/// differ only in learned parameters, never in noise draws.
const GEN_SEED: u64 = 97;

fn dataset() -> &'static Dataset {
    static DS: OnceLock<Dataset> = OnceLock::new();
    DS.get_or_init(|| {
        let cfg = RunConfig::default();
        synth_dataset(&cfg.surrogate_spec(), 0).expect("surrogate synthesis")
    })
}

fn train_full(variant: Variant, seed: u64) -> GanModel {
    let cfg = RunConfig::default();
    let hp = cfg.gan_hp(variant).expect("default hyperparameters");
    let mut model = GanModel::new(hp, seed).expect("model init");
    train(&mut model, dataset(), |_| {}).expect("full training");
    model
}

fn has_models() -> &'static Vec<GanModel> {
    static MODELS: OnceLock<Vec<GanModel>> = OnceLock::new();
    MODELS.get_or_init(|| {
        TRAIN_SEEDS
            .iter()
            .map(|&s| train_full(Variant::HasCgan, s))
            .collect()
    })
}

fn conv_models() -> &'static Vec<GanModel> {
    static MODELS: OnceLock<Vec<GanModel>> = OnceLock::new();
    MODELS.get_or_init(|| {
        TRAIN_SEEDS
            .iter()
            .map(|&s| train_full(Variant::ConvCgan, s))
            .collect()
    })
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// Mean in-cone coherence between each held-out high-frequency sample and a
/// signal generated at that sample's label.
fn hf_coherence(model: &GanModel, ds: &Dataset) -> f64 {
    let hf = ds.high_frequency_test();
    assert!(!hf.is_empty(), "high-frequency subset must not be empty");
    let labels: Vec<f64> = hf.iter().map(|s| s.ra_um).collect();
    let mut m = model.clone();
    m.rng = ChaCha8Rng::seed_from_u64(GEN_SEED);
    let (gen, _) = generate_labeled(&mut m, ds, &labels, 30_000).expect("generation");
    let spec = CwtSpec::default_for_len(ds.signal_len()).expect("cwt spec");
    let per_pair: Vec<f64> = hf
        .iter()
        .zip(&gen)
        .map(|(real, fake)| {
            wavelet_coherence(&real.signal, &fake.signal, &spec)
                .expect("coherence")
                .mean_inside_coi()
        })
        .collect();
    mean(&per_pair)
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_siggan"))
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Writes through the raw stdout handle so the line lands in the terminal
/// even for passing tests (the harness only captures the print macros).
macro_rules! report {
    ($($arg:tt)*) => {{
        use std::io::Write;
        let mut out = std::io::stdout().lock();
        writeln!(out, $($arg)*).expect("stdout");
        out.flush().expect("stdout flush");
    }};
}

// ---------------------------------------------------------------------------
// criteria
// ---------------------------------------------------------------------------

/// Analytic gradients of every layer kind, both end-to-end stacks, and the
/// spectral path agree with central finite differences.
#[test]
fn criterion_1_gradient_exactness() {
    let start = Instant::now();
    let out = bin().arg("gradcheck").output().expect("spawn gradcheck");
    let secs = start.elapsed().as_secs_f64();
    let text = String::from_utf8_lossy(&out.stdout);

    let mut worst_layer: f64 = 0.0;
    let mut worst_spectral: f64 = 0.0;
    let mut checks = 0;
    for line in text.lines().filter(|l| l.contains("max_rel_err=")) {
        let err: f64 = line
            .split("max_rel_err=")
            .nth(1)
            .and_then(|s| s.split_whitespace().next())
            .and_then(|s| s.parse().ok())
            .unwrap_or(f64::INFINITY);
        if line.starts_with("spectral-path") {
            worst_spectral = worst_spectral.max(err);
        } else {
            worst_layer = worst_layer.max(err);
        }
        checks += 1;
    }

    let ok = out.status.success()
        && checks == 8
        && worst_layer < 1e-4
        && worst_spectral < 1e-3
        && secs < 60.0;
    report!(
        "criterion 1: {} gradient exactness: {checks}/8 checks, layers/stacks max_rel_err={worst_layer:.3e} (tol 1e-4), spectral path {worst_spectral:.3e} (tol 1e-3), {secs:.1}s (budget 60s)",
        verdict(ok)
    );
    assert!(ok, "{text}");
}

/// Closed-form values of every loss component, pinned to 1e-9.
#[test]
fn criterion_2_loss_identities() {
    const TOL: f64 = 1e-9;
    fn check(fails: &mut Vec<&'static str>, name: &'static str, got: f64, want: f64) {
        if (got - want).abs() > TOL {
            fails.push(name);
        }
    }
    let tol = TOL;
    let mut fails: Vec<&'static str> = Vec::new();

    // mean-score generator loss of [0.2, 0.8] is -0.5
    check(
        &mut fails,
        "g_mean",
        loss::g_loss_mean(&[0.2, 0.8]).unwrap().0,
        -0.5,
    );

    // hybrid objective is the exact weighted sum and rejects weights that do
    // not sum to one
    check(
        &mut fails,
        "hybrid",
        loss::g_loss_hybrid(-0.4, 2.5, 0.8, 0.2).unwrap(),
        0.8 * -0.4 + 0.2 * 2.5,
    );
    if loss::g_loss_hybrid(0.0, 0.0, 0.6, 0.3).is_ok() {
        fails.push("hybrid_weights");
    }

    // two-sided discriminator loss at D=0.5 everywhere is 2 ln 2
    check(
        &mut fails,
        "d_bce",
        loss::d_loss_cgan(&[0.5, 0.5], &[0.5, 0.5]).unwrap().0,
        2.0 * std::f64::consts::LN_2,
    );

    // with alpha=0 the classifier head drops out of the generator loss
    let logits = Tensor::from_vec(&[2, 5], vec![0.3; 10]).unwrap();
    let (lg_acgan, _) =
        loss::acgan_losses(&[0.7, 0.6], &[0.4, 0.3], &logits, &logits, &[1, 4], 0.0).unwrap();
    check(
        &mut fails,
        "acgan_alpha0",
        lg_acgan,
        loss::g_loss_log(&[0.4, 0.3]).unwrap().0,
    );

    // uniform logits over B classes cost exactly ln B
    check(
        &mut fails,
        "uniform_ce",
        loss::softmax_ce(&logits, &[0, 3]).unwrap().0,
        (5.0f64).ln(),
    );

    // critic generator loss is minus the mean critic score
    check(
        &mut fails,
        "critic_g",
        loss::wcgan_losses(&[0.0], &[0.1, 0.3, 0.5], 0.0, 10.0)
            .unwrap()
            .0,
        -0.3,
    );

    // unit gradient norms incur zero penalty
    check(
        &mut fails,
        "unit_penalty",
        loss::gradient_penalty_from_norms(&[1.0; 7]).unwrap(),
        0.0,
    );

    // interpolates lie exactly on the segment between their endpoints
    let real = Tensor::from_vec(&[3, 4], (0..12).map(|i| i as f64).collect()).unwrap();
    let fake = Tensor::from_vec(&[3, 4], (0..12).map(|i| (i * i) as f64 / 10.0).collect()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mixed = loss::interpolate_pairs(&real, &fake, &mut rng).unwrap();
    for i in 0..3 {
        let r = &real.data()[i * 4..(i + 1) * 4];
        let f = &fake.data()[i * 4..(i + 1) * 4];
        let m = &mixed.data()[i * 4..(i + 1) * 4];
        // recover theta from the best-separated coordinate
        let j = (0..4)
            .max_by(|&a, &b| (r[a] - f[a]).abs().total_cmp(&(r[b] - f[b]).abs()))
            .unwrap();
        let theta = (m[j] - f[j]) / (r[j] - f[j]);
        if !(0.0..=1.0).contains(&theta) {
            fails.push("interp_theta");
        }
        for k in 0..4 {
            if (m[k] - (theta * r[k] + (1.0 - theta) * f[k])).abs() > tol {
                fails.push("interp_segment");
            }
        }
    }
    let same = loss::interpolate_pairs(&real, &real, &mut rng).unwrap();
    if same.data() != real.data() {
        fails.push("interp_endpoint");
    }

    let ok = fails.is_empty();
    report!(
        "criterion 2: {} loss identities exact to 1e-9 ({})",
        verdict(ok),
        if ok {
            "10/10".to_string()
        } else {
            format!("failed: {fails:?}")
        }
    );
    assert!(ok, "{fails:?}");
}

/// FFT against the quadratic DFT oracle, Parseval, spectral-loss identity
/// and symmetry, and the exact frame-count formula.
#[test]
fn criterion_3_spectral_machinery() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst_dft: f64 = 0.0;
    let mut worst_parseval: f64 = 0.0;
    for exp in 1..=8 {
        let n = 1usize << exp; // 2 .. 256
        let re0: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let im0: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut re = re0.clone();
        let mut im = im0.clone();
        fft(&mut re, &mut im).unwrap();
        let (ore, oim) = dft_naive(&re0, &im0).unwrap();
        for k in 0..n {
            worst_dft = worst_dft.max((re[k] - ore[k]).abs().max((im[k] - oim[k]).abs()));
        }
        let spec_e: f64 = re.iter().zip(&im).map(|(a, b)| a * a + b * b).sum();
        let time_e: f64 = re0.iter().zip(&im0).map(|(a, b)| a * a + b * b).sum();
        worst_parseval = worst_parseval.max((spec_e / n as f64 - time_e).abs());
    }

    let x: Vec<Vec<f64>> = (0..3)
        .map(|_| (0..256).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let y: Vec<Vec<f64>> = (0..3)
        .map(|_| (0..256).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let spec = StftSpec::default();
    let self_loss = spectral_loss(&x, &x, spec).unwrap();
    let sym = (spectral_loss(&x, &y, spec).unwrap() - spectral_loss(&y, &x, spec).unwrap()).abs();

    let mut frames_ok = true;
    for (len, window, hop) in [(64, 64, 32), (256, 64, 32), (1024, 64, 32), (512, 128, 64)] {
        let s = StftSpec { window, hop };
        let sg = stft_magnitude(&vec![0.5; len], s).unwrap();
        frames_ok &= sg.n_frames() == (len - window) / hop + 1;
        frames_ok &= sg.n_bins() == window / 2 + 1;
    }

    let ok =
        worst_dft <= 1e-9 && worst_parseval <= 1e-9 && self_loss == 0.0 && sym <= 1e-9 && frames_ok;
    report!(
        "criterion 3: {} spectral machinery: |fft-dft|={worst_dft:.1e}, parseval={worst_parseval:.1e} (tol 1e-9), self_loss={self_loss:.1e}, symmetry_gap={sym:.1e}, frame counts {}",
        verdict(ok),
        if frames_ok { "exact" } else { "WRONG" }
    );
    assert!(ok);
}

/// Coherence identities: self-coherence one everywhere in the cone, amplitude
/// invariance, low coherence for independent noise, and values in [0, 1].
#[test]
fn criterion_4_wavelet_coherence() {
    let ds = dataset();
    let x = &ds.train[0].signal;
    let spec = CwtSpec::default_for_len(x.len()).unwrap();

    let self_map = wavelet_coherence(x, x, &spec).unwrap();
    let mut worst_self: f64 = 0.0;
    for (si, row) in self_map.values.iter().enumerate() {
        for (t, &v) in row.iter().enumerate() {
            if self_map.inside_coi(si, t) {
                worst_self = worst_self.max((v - 1.0).abs());
            }
        }
    }

    let doubled: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
    let amp_map = wavelet_coherence(x, &doubled, &spec).unwrap();
    let mut worst_amp: f64 = 0.0;
    for (si, row) in amp_map.values.iter().enumerate() {
        for (t, &v) in row.iter().enumerate() {
            if amp_map.inside_coi(si, t) {
                worst_amp = worst_amp.max((v - 1.0).abs());
            }
        }
    }

    let noise_spec = CwtSpec::default_for_len(256).unwrap();
    let mut noise_wc = Vec::new();
    for seed in 0..24u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a: Vec<f64> = (0..256).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..256).map(|_| rng.gen_range(-1.0..1.0)).collect();
        noise_wc.push(
            wavelet_coherence(&a, &b, &noise_spec)
                .unwrap()
                .mean_inside_coi(),
        );
    }
    let noise_mean = mean(&noise_wc);

    let mut bounded = true;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..8 {
        let n = 128;
        let f1 = rng.gen_range(1.0..20.0);
        let f2 = rng.gen_range(1.0..20.0);
        let a: Vec<f64> = (0..n)
            .map(|t| {
                (f1 * t as f64 / n as f64 * std::f64::consts::TAU).sin() + rng.gen_range(-0.3..0.3)
            })
            .collect();
        let b: Vec<f64> = (0..n)
            .map(|t| {
                (f2 * t as f64 / n as f64 * std::f64::consts::TAU).cos() + rng.gen_range(-0.3..0.3)
            })
            .collect();
        let map = wavelet_coherence(&a, &b, &CwtSpec::default_for_len(n).unwrap()).unwrap();
        for row in &map.values {
            for &v in row {
                bounded &= (-1e-12..=1.0 + 1e-12).contains(&v);
            }
        }
    }

    let ok = worst_self <= 1e-6 && worst_amp <= 1e-6 && noise_mean < 0.5 && bounded;
    report!(
        "criterion 4: {} wavelet coherence: |WC(x,x)-1|={worst_self:.1e}, |WC(x,2x)-1|={worst_amp:.1e} (tol 1e-6), noise mean={noise_mean:.3} (< 0.5 over 24 seeds), fuzzed values bounded: {bounded}",
        verdict(ok)
    );
    assert!(ok);
}

/// 50 epochs on the surrogate: phase freezing is checksum-asserted inside the
/// loop (any drift aborts training), losses stay finite, and the spectral
/// component trends down between the first and last five-epoch averages.
#[test]
fn criterion_5_training_protocol() {
    let start = Instant::now();
    let cfg = RunConfig {
        epochs: 50,
        ..Default::default()
    };
    let hp = cfg.gan_hp(Variant::HasCgan).unwrap();
    let mut model = GanModel::new(hp, 42).unwrap();
    let log = train(&mut model, dataset(), |_| {}).expect("50-epoch run");
    let secs = start.elapsed().as_secs_f64();

    let finite = log.all_finite();
    let spectral: Vec<f64> = log
        .epochs
        .iter()
        .map(|e| {
            e.spectral
                .expect("hybrid objective reports its spectral part")
        })
        .collect();
    assert_eq!(spectral.len(), 50);
    let ma_first = mean(&spectral[..5]);
    let ma_last = mean(&spectral[45..]);

    let ok = finite && ma_last < ma_first && secs < 600.0;
    report!(
        "criterion 5: {} training protocol: freeze checksums asserted per phase (run completed), losses finite: {finite}, spectral 5-epoch MA {ma_first:.3} -> {ma_last:.3} (must decrease), {secs:.0}s (budget 600s)",
        verdict(ok)
    );
    assert!(ok);
}

/// After full 500-epoch training at three seeds, the hybrid variant's mean
/// in-cone coherence on the high-frequency held-out subset is at least the
/// plain convolutional variant's, and both clear the untrained baseline.
#[test]
fn criterion_6_variant_comparison() {
    let ds = dataset();
    let has: Vec<f64> = has_models().iter().map(|m| hf_coherence(m, ds)).collect();
    let conv: Vec<f64> = conv_models().iter().map(|m| hf_coherence(m, ds)).collect();
    // both conv-generator variants share the same initial generator weights
    // at a given seed, so one untrained set baselines both
    let cfg = RunConfig::default();
    let untrained: Vec<f64> = TRAIN_SEEDS
        .iter()
        .map(|&s| {
            let m = GanModel::new(cfg.gan_hp(Variant::HasCgan).unwrap(), s).unwrap();
            hf_coherence(&m, ds)
        })
        .collect();

    let (h, c, u) = (mean(&has), mean(&conv), mean(&untrained));
    let ok = h >= c && h > u && c > u;
    report!(
        "criterion 6: {} variant comparison over seeds {TRAIN_SEEDS:?}: hybrid WC={h:.4} {:?}, conv WC={c:.4} {:?}, untrained WC={u:.4} {:?} (need hybrid >= conv, both > untrained; absolute levels reported, not asserted)",
        verdict(ok),
        has.iter().map(|v| (v * 1e4).round() / 1e4).collect::<Vec<_>>(),
        conv.iter().map(|v| (v * 1e4).round() / 1e4).collect::<Vec<_>>(),
        untrained.iter().map(|v| (v * 1e4).round() / 1e4).collect::<Vec<_>>(),
    );
    assert!(ok, "hybrid={h} conv={c} untrained={u}");
}

/// The conditioning label controls generated amplitude: Pearson correlation
/// between requested label and generated RMS exceeds 0.8 over 200 draws.
#[test]
fn criterion_7_conditioning_fidelity() {
    let ds = dataset();
    let norm = ds.norm().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let labels: Vec<f64> = (0..200)
        .map(|_| rng.gen_range(norm.ra_min..=norm.ra_max))
        .collect();
    let mut model = has_models()[0].clone();
    model.rng = ChaCha8Rng::seed_from_u64(GEN_SEED);
    let (gen, clamped) = generate_labeled(&mut model, ds, &labels, 40_000).unwrap();
    let rms: Vec<f64> = gen
        .iter()
        .map(|s| (s.signal.iter().map(|v| v * v).sum::<f64>() / s.signal.len() as f64).sqrt())
        .collect();
    let r = pearson(&labels, &rms);

    let ok = r > 0.8 && clamped == 0;
    report!(
        "criterion 7: {} conditioning fidelity: pearson(label, generated RMS)={r:.4} over 200 samples (need > 0.8), clamped labels={clamped}",
        verdict(ok)
    );
    assert!(ok, "r={r}");
}

/// Augmentation helps the weakest-data predictor: cnn1d median MAPE over
/// three seeds at scale 10 beats scale 0, the plateau detector fires by
/// scale 20, and the leakage audit holds on every row.
#[test]
fn criterion_8_sweep_study() {
    use siggan::bench::{run_sweep, PredictorKind, SweepConfig};
    let start = Instant::now();
    let ds = dataset();
    let model = &has_models()[0];
    let cfg = SweepConfig {
        kinds: vec![PredictorKind::Cnn1d],
        ..SweepConfig::default()
    };
    // run_sweep audits every row for held-out ids and errors on a hit, so a
    // completed report is itself the audit result
    let report = run_sweep(model, ds, &cfg, |_| {}).expect("sweep with leakage audit");
    let secs = start.elapsed().as_secs_f64();

    let median_at = |scale: usize| -> f64 {
        let mut v: Vec<f64> = report
            .rows
            .iter()
            .filter(|r| r.scale == scale)
            .map(|r| r.mape_percent)
            .collect();
        v.sort_by(f64::total_cmp);
        assert_eq!(v.len(), 3);
        v[1]
    };
    let m0 = median_at(0);
    let m10 = median_at(10);
    let plateau = report.plateau[0].1;

    let ok =
        m10 < m0 && plateau.is_some_and(|k| k <= 20) && report.rows.len() == 18 && secs < 1800.0;
    report!(
        "criterion 8: {} sweep study: cnn1d median MAPE scale0={m0:.2}% -> scale10={m10:.2}% (must drop), plateau at scale {plateau:?} (need <= 20), audit clean on {} rows, {secs:.0}s (budget 1800s)",
        verdict(ok),
        report.rows.len()
    );
    assert!(ok, "m0={m0} m10={m10} plateau={plateau:?}");
}

/// Same seeds, same bytes: every command's artifacts are bit-identical on a
/// rerun, and both serialization formats round-trip exactly.
#[test]
fn criterion_9_determinism_and_serialization() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("tiny.cfg");
    std::fs::write(
        &cfg_path,
        "signal_len = 128\nepochs = 2\npred_epochs = 25\n",
    )
    .unwrap();

    // run the whole command chain twice into separate directories
    let run_chain = |tag: &str| -> Vec<(String, Vec<u8>)> {
        let out_dir = dir.path().join(tag);
        std::fs::create_dir(&out_dir).unwrap();
        let arg = |p: &str| out_dir.join(p);
        let steps: Vec<(&str, Vec<std::ffi::OsString>)> = vec![
            (
                "synth",
                vec![
                    "synth".into(),
                    "--seed".into(),
                    "5".into(),
                    "--out".into(),
                    arg("ds.sgd1").into(),
                ],
            ),
            (
                "train",
                vec![
                    "train-gan".into(),
                    "--variant".into(),
                    "has-cgan".into(),
                    "--seed".into(),
                    "5".into(),
                    "--data".into(),
                    arg("ds.sgd1").into(),
                    "--out".into(),
                    arg("m.sgf1").into(),
                ],
            ),
            (
                "generate",
                vec![
                    "generate".into(),
                    "--count".into(),
                    "6".into(),
                    "--seed".into(),
                    "5".into(),
                    "--checkpoint".into(),
                    arg("m.sgf1").into(),
                    "--data".into(),
                    arg("ds.sgd1").into(),
                    "--out".into(),
                    arg("gen.sgd1").into(),
                ],
            ),
            (
                "coherence",
                vec![
                    "coherence".into(),
                    "--seed".into(),
                    "5".into(),
                    "--checkpoint".into(),
                    arg("m.sgf1").into(),
                    "--data".into(),
                    arg("ds.sgd1").into(),
                    "--out".into(),
                    arg("wc.csv").into(),
                ],
            ),
            (
                "sweep",
                vec![
                    "sweep".into(),
                    "--models".into(),
                    "ridge".into(),
                    "--scales".into(),
                    "0,2".into(),
                    "--seeds".into(),
                    "1".into(),
                    "--checkpoint".into(),
                    arg("m.sgf1").into(),
                    "--data".into(),
                    arg("ds.sgd1").into(),
                    "--out".into(),
                    arg("sweep.csv").into(),
                ],
            ),
        ];
        let mut artifacts = Vec::new();
        for (name, args) in steps {
            let out = bin()
                .args(&args)
                .arg("--config")
                .arg(&cfg_path)
                .arg("--quiet")
                .output()
                .unwrap();
            assert!(
                out.status.success(),
                "{name}: {}",
                String::from_utf8_lossy(&out.stderr)
            );
        }
        for name in [
            "ds.sgd1",
            "m.sgf1",
            "m.trainlog.csv",
            "gen.sgd1",
            "wc.csv",
            "sweep.csv",
        ] {
            artifacts.push((name.to_string(), std::fs::read(out_dir.join(name)).unwrap()));
        }
        artifacts
    };
    let a = run_chain("a");
    let b = run_chain("b");
    let mut identical = true;
    for ((name, bytes_a), (_, bytes_b)) in a.iter().zip(&b) {
        if bytes_a != bytes_b {
            identical = false;
            eprintln!("artifact {name} differs between identical-seed runs");
        }
    }

    // dataset bytes -> struct -> bytes is the identity
    let ds_bytes = a[0].1.clone();
    let ds = dataset_from_bytes(&ds_bytes).unwrap();
    let round_ds = dataset_to_bytes(&ds).unwrap() == ds_bytes;

    // checkpoint bytes -> model -> bytes is the identity
    let ck_bytes = a[1].1.clone();
    let (mut model, config_text) = model_from_bytes(&ck_bytes).unwrap();
    let round_ck = model_to_bytes(&mut model, &config_text) == ck_bytes;

    let ok = identical && round_ds && round_ck;
    report!(
        "criterion 9: {} determinism: {} artifacts bit-identical across reruns: {identical}; dataset round trip byte-exact: {round_ds}; checkpoint round trip byte-exact: {round_ck}",
        verdict(ok),
        a.len()
    );
    assert!(ok);
}
