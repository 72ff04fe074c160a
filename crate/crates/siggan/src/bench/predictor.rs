//! Roughness predictors: a closed-form ridge baseline on the 12 extracted
//! features, and two Adam-trained networks (dense and convolutional) on the
//! raw signal with the three machining parameters appended.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bench::features::{extract_features, FEATURE_DIM};
use crate::data::{LabeledSignal, NormRecord};
use crate::error::{Error, Result};
use crate::nn::{Activation, Adam, AdamConfig, Conv1d, ConvSpec, Dense, Layer, ParamNet, Tensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredictorKind {
    /// Ridge regression on the 12 features.
    Ridge,
    /// Two hidden dense layers on raw signal + parameters.
    Mlp,
    /// Two conv layers + dense head on raw signal + parameters.
    Cnn1d,
}

impl PredictorKind {
    pub const ALL: [PredictorKind; 3] = [
        PredictorKind::Ridge,
        PredictorKind::Mlp,
        PredictorKind::Cnn1d,
    ];

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ridge" => Ok(PredictorKind::Ridge),
            "mlp" => Ok(PredictorKind::Mlp),
            "cnn1d" | "cnn" => Ok(PredictorKind::Cnn1d),
            _ => Err(Error::Config(format!(
                "unknown predictor {s:?}; expected ridge, mlp, or cnn1d"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PredictorKind::Ridge => "ridge",
            PredictorKind::Mlp => "mlp",
            PredictorKind::Cnn1d => "cnn1d",
        }
    }
}

impl std::fmt::Display for PredictorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictorConfig {
    pub epochs: u32,
    pub lr: f64,
    pub batch: usize,
    pub ridge_lambda: f64,
}

impl Default for PredictorConfig {
    fn default() -> Self {
        PredictorConfig {
            epochs: 300,
            lr: 1e-3,
            batch: 16,
            ridge_lambda: 1.0,
        }
    }
}

/// `(100/n) * sum(|y_true - y_pred| / |y_true|)`.
pub fn mape(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    if y_true.is_empty() || y_true.len() != y_pred.len() {
        return Err(Error::Invalid(format!(
            "percentage error needs matched nonempty slices, got {} and {}",
            y_true.len(),
            y_pred.len()
        )));
    }
    if y_true.contains(&0.0) {
        return Err(Error::Invalid(
            "percentage error is undefined at a zero true value".into(),
        ));
    }
    Ok(100.0 / y_true.len() as f64
        * y_true
            .iter()
            .zip(y_pred)
            .map(|(&t, &p)| (t - p).abs() / t.abs())
            .sum::<f64>())
}

// ---------------------------------------------------------------------------
// Ridge
// ---------------------------------------------------------------------------

/// Closed-form ridge on standardized features:
/// `((1/n) Xs'Xs + lambda I) beta = (1/n) Xs'(y - mean(y))`.
/// The 1/n keeps the solution invariant under duplicating every row.
#[derive(Debug, Clone)]
pub struct RidgeModel {
    feat_mean: [f64; FEATURE_DIM],
    feat_std: [f64; FEATURE_DIM],
    y_mean: f64,
    beta: [f64; FEATURE_DIM],
}

/// Gaussian elimination with partial pivoting; `a` is square row-major.
fn solve_dense(mut a: Vec<f64>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    debug_assert_eq!(a.len(), n * n);
    let scale = a
        .iter()
        .map(|v| v.abs())
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))
            .unwrap();
        if a[pivot_row * n + col].abs() < 1e-12 * scale {
            return Err(Error::Invalid(
                "ridge system is singular; raise ridge_lambda above 0".into(),
            ));
        }
        if pivot_row != col {
            for k in 0..n {
                a.swap(col * n + k, pivot_row * n + k);
            }
            b.swap(col, pivot_row);
        }
        let pivot = a[col * n + col];
        for row in col + 1..n {
            let factor = a[row * n + col] / pivot;
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row * n + k] -= factor * a[col * n + k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let mut acc = b[col];
        for k in col + 1..n {
            acc -= a[col * n + k] * x[k];
        }
        x[col] = acc / a[col * n + col];
    }
    Ok(x)
}

impl RidgeModel {
    pub fn fit(x: &[[f64; FEATURE_DIM]], y: &[f64], lambda: f64) -> Result<Self> {
        if x.is_empty() || x.len() != y.len() {
            return Err(Error::Invalid("ridge needs matched nonempty data".into()));
        }
        if lambda < 0.0 {
            return Err(Error::Invalid("ridge_lambda must be >= 0".into()));
        }
        let n = x.len() as f64;
        let mut feat_mean = [0.0; FEATURE_DIM];
        let mut feat_std = [0.0; FEATURE_DIM];
        for row in x {
            for (m, v) in feat_mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        for m in &mut feat_mean {
            *m /= n;
        }
        for row in x {
            for j in 0..FEATURE_DIM {
                let d = row[j] - feat_mean[j];
                feat_std[j] += d * d;
            }
        }
        for s in &mut feat_std {
            *s = (*s / n).sqrt();
            if *s < 1e-12 {
                *s = 1.0; // constant feature: centered column is all zero
            }
        }
        let y_mean = y.iter().sum::<f64>() / n;

        let d = FEATURE_DIM;
        let mut gram = vec![0.0; d * d];
        let mut rhs = vec![0.0; d];
        for (row, &yv) in x.iter().zip(y) {
            let mut z = [0.0; FEATURE_DIM];
            for j in 0..d {
                z[j] = (row[j] - feat_mean[j]) / feat_std[j];
            }
            for (j, &zj) in z.iter().enumerate() {
                rhs[j] += zj * (yv - y_mean) / n;
                for (k, &zk) in z.iter().enumerate() {
                    gram[j * d + k] += zj * zk / n;
                }
            }
        }
        for j in 0..d {
            gram[j * d + j] += lambda;
        }
        let beta_v = solve_dense(gram, rhs)?;
        let mut beta = [0.0; FEATURE_DIM];
        beta.copy_from_slice(&beta_v);
        Ok(RidgeModel {
            feat_mean,
            feat_std,
            y_mean,
            beta,
        })
    }

    pub fn predict(&self, features: &[f64; FEATURE_DIM]) -> f64 {
        let mut acc = self.y_mean;
        for j in 0..FEATURE_DIM {
            acc += self.beta[j] * (features[j] - self.feat_mean[j]) / self.feat_std[j];
        }
        acc
    }

    /// Coefficients mapped back to unstandardized feature space, plus the
    /// intercept.
    pub fn coefficients(&self) -> ([f64; FEATURE_DIM], f64) {
        let mut coefs = [0.0; FEATURE_DIM];
        let mut intercept = self.y_mean;
        for j in 0..FEATURE_DIM {
            coefs[j] = self.beta[j] / self.feat_std[j];
            intercept -= coefs[j] * self.feat_mean[j];
        }
        (coefs, intercept)
    }
}

// ---------------------------------------------------------------------------
// Neural regressors
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct NeuralNet {
    pub kind: PredictorKind,
    signal_len: usize,
    conv: Vec<Layer>,
    trunk_channels: usize,
    trunk_len: usize,
    dense: Vec<Layer>,
    param_mean: [f64; 3],
    param_std: [f64; 3],
}

fn cnn_stage_lens(signal_len: usize) -> Result<(usize, usize)> {
    let s1 = ConvSpec::new(1, 8, 16, 4, 6)?;
    let s2 = ConvSpec::new(8, 16, 8, 4, 2)?;
    let l1 = s1.conv_out_len(signal_len)?;
    let l2 = s2.conv_out_len(l1)?;
    Ok((l1, l2))
}

impl NeuralNet {
    pub fn new<R: rand::Rng>(kind: PredictorKind, signal_len: usize, rng: &mut R) -> Result<Self> {
        match kind {
            PredictorKind::Ridge => Err(Error::Invalid(
                "the feature baseline has a closed form, not a network".into(),
            )),
            PredictorKind::Mlp => Ok(NeuralNet {
                kind,
                signal_len,
                conv: Vec::new(),
                trunk_channels: 0,
                trunk_len: 0,
                dense: vec![
                    Layer::Dense(Dense::new(signal_len + 3, 32, Activation::Relu, rng)),
                    Layer::Dense(Dense::new(32, 16, Activation::Relu, rng)),
                    Layer::Dense(Dense::new(16, 1, Activation::Identity, rng)),
                ],
                param_mean: [0.0; 3],
                param_std: [1.0; 3],
            }),
            PredictorKind::Cnn1d => {
                let (_, l2) = cnn_stage_lens(signal_len)?;
                let flat = 16 * l2;
                Ok(NeuralNet {
                    kind,
                    signal_len,
                    conv: vec![
                        Layer::Conv1d(Conv1d::new(
                            ConvSpec::new(1, 8, 16, 4, 6)?,
                            Activation::Relu,
                            rng,
                        )),
                        Layer::Conv1d(Conv1d::new(
                            ConvSpec::new(8, 16, 8, 4, 2)?,
                            Activation::Relu,
                            rng,
                        )),
                    ],
                    trunk_channels: 16,
                    trunk_len: l2,
                    dense: vec![Layer::Dense(Dense::new(
                        flat + 3,
                        1,
                        Activation::Identity,
                        rng,
                    ))],
                    param_mean: [0.0; 3],
                    param_std: [1.0; 3],
                })
            }
        }
    }

    fn set_param_stats(&mut self, samples: &[&LabeledSignal]) {
        let n = samples.len() as f64;
        let mut mean = [0.0f64; 3];
        let mut std = [0.0f64; 3];
        for s in samples {
            let p = [s.params.rpm, s.params.feed_mm_min, s.params.depth_um];
            for j in 0..3 {
                mean[j] += p[j];
            }
        }
        for m in &mut mean {
            *m /= n;
        }
        for s in samples {
            let p = [s.params.rpm, s.params.feed_mm_min, s.params.depth_um];
            for j in 0..3 {
                std[j] += (p[j] - mean[j]) * (p[j] - mean[j]);
            }
        }
        for s in &mut std {
            *s = (*s / n).sqrt();
            if *s < 1e-12 {
                *s = 1.0;
            }
        }
        self.param_mean = mean;
        self.param_std = std;
    }

    fn input_row(&self, sample: &LabeledSignal, norm: &NormRecord) -> Vec<f64> {
        let mut row: Vec<f64> = sample
            .signal
            .iter()
            .map(|&v| norm.norm_signal_value(v))
            .collect();
        let p = [
            sample.params.rpm,
            sample.params.feed_mm_min,
            sample.params.depth_um,
        ];
        for j in 0..3 {
            row.push((p[j] - self.param_mean[j]) / self.param_std[j]);
        }
        row
    }

    /// Normalized-label predictions for a batch of rows (each `L+3` long).
    fn forward_rows(&mut self, rows: &[Vec<f64>]) -> Result<Vec<f64>> {
        let m = rows.len();
        let l = self.signal_len;
        let mut y = match self.kind {
            PredictorKind::Mlp => {
                let flatv: Vec<f64> = rows.iter().flatten().copied().collect();
                Tensor::from_vec(&[m, l + 3], flatv)?
            }
            PredictorKind::Cnn1d => {
                let mut sig = Vec::with_capacity(m * l);
                for r in rows {
                    sig.extend_from_slice(&r[..l]);
                }
                let mut t = Tensor::from_vec(&[m, 1, l], sig)?;
                for conv in &mut self.conv {
                    t = conv.forward(&t)?;
                }
                let flat = self.trunk_channels * self.trunk_len;
                let trunk = t.reshape(&[m, flat])?;
                let mut joined = Vec::with_capacity(m * (flat + 3));
                for (i, r) in rows.iter().enumerate() {
                    joined.extend_from_slice(&trunk.data()[i * flat..(i + 1) * flat]);
                    joined.extend_from_slice(&r[l..]);
                }
                Tensor::from_vec(&[m, flat + 3], joined)?
            }
            PredictorKind::Ridge => unreachable!("constructor rejects ridge"),
        };
        for layer in &mut self.dense {
            y = layer.forward(&y)?;
        }
        Ok(y.data().to_vec())
    }

    /// Backpropagates `dL/d(prediction)` and accumulates parameter grads.
    fn backward(&mut self, dpred: &[f64]) -> Result<()> {
        let m = dpred.len();
        let mut g = Tensor::from_vec(&[m, 1], dpred.to_vec())?;
        for layer in self.dense.iter_mut().rev() {
            g = layer.backward(&g)?;
        }
        if self.kind == PredictorKind::Cnn1d {
            let flat = self.trunk_channels * self.trunk_len;
            let mut trunk_grad = Tensor::zeros(&[m, flat]);
            for i in 0..m {
                let src = &g.data()[i * (flat + 3)..i * (flat + 3) + flat];
                trunk_grad.data_mut()[i * flat..(i + 1) * flat].copy_from_slice(src);
            }
            let mut cg = trunk_grad.reshape(&[m, self.trunk_channels, self.trunk_len])?;
            for conv in self.conv.iter_mut().rev() {
                cg = conv.backward(&cg)?;
            }
        }
        Ok(())
    }
}

impl ParamNet for NeuralNet {
    fn params_and_grads_mut(&mut self) -> Vec<(&mut Tensor, &mut Tensor)> {
        self.conv
            .iter_mut()
            .chain(self.dense.iter_mut())
            .flat_map(|l| l.params_and_grads_mut())
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Unified training and evaluation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub enum Predictor {
    Ridge(RidgeModel),
    Neural(NeuralNet),
}

impl Predictor {
    pub fn kind(&self) -> PredictorKind {
        match self {
            Predictor::Ridge(_) => PredictorKind::Ridge,
            Predictor::Neural(n) => n.kind,
        }
    }
}

fn feature_rows(
    samples: &[&LabeledSignal],
    sample_rate_hz: f64,
) -> Result<Vec<[f64; FEATURE_DIM]>> {
    samples
        .iter()
        .map(|s| Ok(extract_features(&s.signal, sample_rate_hz)?.to_array()))
        .collect()
}

/// Trains one predictor on the given samples. `norm` must be the real
/// dataset's normalization record; neural kinds regress the normalized label
/// with a mean-squared-error objective, ridge fits the physical label
/// directly.
pub fn train_predictor(
    kind: PredictorKind,
    train: &[&LabeledSignal],
    norm: &NormRecord,
    sample_rate_hz: f64,
    cfg: &PredictorConfig,
    seed: u64,
) -> Result<Predictor> {
    if train.is_empty() {
        return Err(Error::Invalid("predictor training set is empty".into()));
    }
    match kind {
        PredictorKind::Ridge => {
            let x = feature_rows(train, sample_rate_hz)?;
            let y: Vec<f64> = train.iter().map(|s| s.ra_um).collect();
            Ok(Predictor::Ridge(RidgeModel::fit(&x, &y, cfg.ridge_lambda)?))
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let l = train[0].signal.len();
            let mut net = NeuralNet::new(kind, l, &mut rng)?;
            net.set_param_stats(train);
            let rows: Vec<Vec<f64>> = train.iter().map(|s| net.input_row(s, norm)).collect();
            let targets: Vec<f64> = train.iter().map(|s| norm.norm_label(s.ra_um)).collect();

            let sizes: Vec<usize> = net
                .params_and_grads_mut()
                .iter()
                .map(|(p, _)| p.len())
                .collect();
            let mut adam = Adam::new(AdamConfig::supervised(cfg.lr), &sizes);
            let mut order: Vec<usize> = (0..rows.len()).collect();
            for epoch in 0..cfg.epochs {
                order.shuffle(&mut rng);
                for chunk in order.chunks(cfg.batch.max(1)) {
                    let batch_rows: Vec<Vec<f64>> =
                        chunk.iter().map(|&i| rows[i].clone()).collect();
                    let batch_y: Vec<f64> = chunk.iter().map(|&i| targets[i]).collect();
                    net.zero_grads();
                    let pred = net.forward_rows(&batch_rows)?;
                    let m = pred.len() as f64;
                    let mut dpred = Vec::with_capacity(pred.len());
                    let mut loss = 0.0;
                    for (p, t) in pred.iter().zip(&batch_y) {
                        let d = p - t;
                        loss += d * d / m;
                        dpred.push(2.0 * d / m);
                    }
                    if !loss.is_finite() {
                        return Err(Error::NonFinite(format!(
                            "{kind} training loss at epoch {epoch}"
                        )));
                    }
                    net.backward(&dpred)?;
                    let mut pairs = net.params_and_grads_mut();
                    adam.step(&mut pairs)?;
                }
            }
            Ok(Predictor::Neural(net))
        }
    }
}

/// Physical-label predictions for a batch of samples.
pub fn predict(
    predictor: &mut Predictor,
    samples: &[&LabeledSignal],
    norm: &NormRecord,
    sample_rate_hz: f64,
) -> Result<Vec<f64>> {
    match predictor {
        Predictor::Ridge(model) => Ok(feature_rows(samples, sample_rate_hz)?
            .iter()
            .map(|row| model.predict(row))
            .collect()),
        Predictor::Neural(net) => {
            let rows: Vec<Vec<f64>> = samples.iter().map(|s| net.input_row(s, norm)).collect();
            let pred = net.forward_rows(&rows)?;
            Ok(pred.iter().map(|&y| norm.denorm_label(y)).collect())
        }
    }
}

/// Test MAPE (percent) against physical labels.
pub fn evaluate_mape(
    predictor: &mut Predictor,
    test: &[&LabeledSignal],
    norm: &NormRecord,
    sample_rate_hz: f64,
) -> Result<f64> {
    let y_true: Vec<f64> = test.iter().map(|s| s.ra_um).collect();
    let y_pred = predict(predictor, test, norm, sample_rate_hz)?;
    mape(&y_true, &y_pred)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn mape_known_values() {
        assert_eq!(mape(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert!((mape(&[100.0], &[110.0]).unwrap() - 10.0).abs() < 1e-12);
        assert!((mape(&[2.0, 4.0], &[1.0, 5.0]).unwrap() - 37.5).abs() < 1e-12);
        assert!(mape(&[0.0], &[1.0]).is_err());
        assert!(mape(&[], &[]).is_err());
        assert!(mape(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn mape_is_error_scale_covariant() {
        let t = [2.0, 5.0, 9.0];
        let p1 = [2.5, 4.0, 10.0];
        let p2: Vec<f64> = t
            .iter()
            .zip(&p1)
            .map(|(&tv, &pv)| tv + 2.0 * (pv - tv))
            .collect();
        let m1 = mape(&t, &p1).unwrap();
        let m2 = mape(&t, &p2).unwrap();
        assert!((m2 - 2.0 * m1).abs() < 1e-12);
    }

    fn planted_design(
        seed: u64,
        n: usize,
    ) -> (Vec<[f64; FEATURE_DIM]>, Vec<f64>, [f64; FEATURE_DIM], f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut beta = [0.0; FEATURE_DIM];
        for b in &mut beta {
            *b = rng.gen_range(-2.0..2.0);
        }
        let intercept = 0.7;
        let mut x = Vec::with_capacity(n);
        let mut y = Vec::with_capacity(n);
        for _ in 0..n {
            let mut row = [0.0; FEATURE_DIM];
            for v in &mut row {
                *v = rng.gen_range(-1.0..1.0);
            }
            let target: f64 = intercept + row.iter().zip(&beta).map(|(a, b)| a * b).sum::<f64>();
            x.push(row);
            y.push(target);
        }
        (x, y, beta, intercept)
    }

    #[test]
    fn tiny_lambda_recovers_planted_coefficients() {
        let (x, y, beta, intercept) = planted_design(4, 60);
        let model = RidgeModel::fit(&x, &y, 1e-10).unwrap();
        let (coefs, c) = model.coefficients();
        for (got, want) in coefs.iter().zip(&beta) {
            assert!((got - want).abs() < 1e-6, "{got} vs {want}");
        }
        assert!((c - intercept).abs() < 1e-6);
    }

    #[test]
    fn duplicating_rows_leaves_predictions_unchanged() {
        let (x, y, _, _) = planted_design(5, 30);
        let model_once = RidgeModel::fit(&x, &y, 1.0).unwrap();
        let mut x2 = x.clone();
        x2.extend_from_slice(&x);
        let mut y2 = y.clone();
        y2.extend_from_slice(&y);
        let model_twice = RidgeModel::fit(&x2, &y2, 1.0).unwrap();
        let (probe, _, _, _) = planted_design(6, 10);
        for row in &probe {
            let a = model_once.predict(row);
            let b = model_twice.predict(row);
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn singular_system_rejected_with_advice() {
        // duplicate feature columns make the centered Gram rank-deficient
        let (mut x, y, _, _) = planted_design(7, 40);
        for row in &mut x {
            row[1] = row[0];
        }
        let err = RidgeModel::fit(&x, &y, 0.0).unwrap_err();
        assert!(err.to_string().contains("raise ridge_lambda"), "{err}");
        // with regularization the same system solves fine
        assert!(RidgeModel::fit(&x, &y, 1.0).is_ok());
    }

    fn constant_label_set(n: usize, l: usize, ra: f64, seed: u64) -> Vec<LabeledSignal> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|i| LabeledSignal {
                id: i as u64,
                params: crate::data::MachiningParams {
                    rpm: 3000.0 + 100.0 * (i % 4) as f64,
                    feed_mm_min: 20.0,
                    depth_um: 8.0,
                },
                ra_um: ra,
                signal: (0..l).map(|_| rng.gen_range(-0.8..0.8)).collect(),
            })
            .collect()
    }

    fn test_norm() -> NormRecord {
        NormRecord {
            signal_min: -1.0,
            signal_max: 1.0,
            ra_min: 0.1,
            ra_max: 0.3,
        }
    }

    #[test]
    fn mlp_fits_a_constant_label() {
        let set = constant_label_set(24, 128, 0.2, 9);
        let refs: Vec<&LabeledSignal> = set.iter().collect();
        let cfg = PredictorConfig::default();
        let mut p =
            train_predictor(PredictorKind::Mlp, &refs, &test_norm(), 8192.0, &cfg, 1).unwrap();
        let m = evaluate_mape(&mut p, &refs, &test_norm(), 8192.0).unwrap();
        assert!(m < 1.0, "train MAPE {m}%");
    }

    #[test]
    fn cnn_forward_backward_shapes_hold() {
        let set = constant_label_set(8, 128, 0.15, 10);
        let refs: Vec<&LabeledSignal> = set.iter().collect();
        let cfg = PredictorConfig {
            epochs: 3,
            ..PredictorConfig::default()
        };
        let mut p =
            train_predictor(PredictorKind::Cnn1d, &refs, &test_norm(), 8192.0, &cfg, 1).unwrap();
        let preds = predict(&mut p, &refs, &test_norm(), 8192.0).unwrap();
        assert_eq!(preds.len(), 8);
        assert!(preds.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn cnn_gradients_match_finite_differences() {
        let set = constant_label_set(2, 64, 0.2, 11);
        let refs: Vec<&LabeledSignal> = set.iter().collect();
        let norm = test_norm();
        let report = crate::nn::best_over_points(4, 1e-6, |attempt| {
            let mut rng = ChaCha8Rng::seed_from_u64(40 + attempt);
            let mut net = NeuralNet::new(PredictorKind::Cnn1d, 64, &mut rng)?;
            crate::nn::jitter_params(&mut net, &mut rng, 0.05);
            net.set_param_stats(&refs);
            let rows: Vec<Vec<f64>> = refs.iter().map(|s| net.input_row(s, &norm)).collect();
            let y = [0.5, 0.5];
            let loss = |n: &mut NeuralNet| {
                let p = n.forward_rows(&rows)?;
                Ok(p.iter()
                    .zip(&y)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    / p.len() as f64)
            };
            let grad = |n: &mut NeuralNet| {
                let p = n.forward_rows(&rows)?;
                let m = p.len() as f64;
                let d: Vec<f64> = p.iter().zip(&y).map(|(a, b)| 2.0 * (a - b) / m).collect();
                n.backward(&d)
            };
            crate::nn::grad_check(&mut net, loss, grad, 1e-5, 1e-8)
        })
        .unwrap();
        assert!(
            report.max_rel_error < 1e-4,
            "max rel err {}",
            report.max_rel_error
        );
    }
}
