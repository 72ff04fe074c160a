//! Dense, 1D-convolution and 1D-transposed-convolution layers with exact
//! hand-derived gradients.
//!
//! Layout conventions (all row-major):
//! * dense input  `[M, n]`, weights `[m, n]`, bias `[m]`, output `[M, m]`
//! * conv input   `[M, C_in, L]`, weights `[F, C_in, K]`, bias `[F]`,
//!   output `[M, F, L_out]` with `L_out = floor((L + 2p - K)/s) + 1`
//! * transposed-conv input `[M, C_in, L]`, weights `[C_in, F, K]`, bias `[F]`,
//!   output `[M, F, L_out]` with `L_out = (L - 1)s - 2p + K`
//!
//! The transposed convolution is implemented as a scatter-add of kernel
//! copies, which makes it the exact adjoint of the convolution gather with
//! the same `(K, s, p)`; its input gradient is therefore a plain convolution
//! with the same kernel.
//!
//! A forward pass caches its input and post-activation output; `backward`
//! consumes that cache, accumulates parameter gradients into the layer and
//! returns the input gradient. Calling `backward` without a preceding
//! `forward` is an error.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::nn::activation::Activation;
use crate::nn::tensor::Tensor;

/// Standard deviation of the Gaussian weight init; biases start at zero.
pub const WEIGHT_INIT_STD: f64 = 0.02;

/// Geometry of one (transposed) convolution layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvSpec {
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel_size: usize,
    pub stride: usize,
    pub padding: usize,
}

impl ConvSpec {
    pub fn new(
        in_channels: usize,
        out_channels: usize,
        kernel_size: usize,
        stride: usize,
        padding: usize,
    ) -> Result<Self> {
        if in_channels == 0 || out_channels == 0 {
            return Err(Error::Invalid("conv channels must be >= 1".into()));
        }
        if kernel_size == 0 {
            return Err(Error::Invalid("kernel size must be >= 1".into()));
        }
        if stride == 0 {
            return Err(Error::Invalid("stride must be >= 1".into()));
        }
        Ok(ConvSpec {
            in_channels,
            out_channels,
            kernel_size,
            stride,
            padding,
        })
    }

    /// `L_out = floor((L + 2p - K)/s) + 1`; requires `L + 2p >= K`.
    pub fn conv_out_len(&self, input_len: usize) -> Result<usize> {
        let padded = input_len + 2 * self.padding;
        if padded < self.kernel_size {
            return Err(Error::Invalid(format!(
                "conv input too short: L={} with padding {} < kernel {}",
                input_len, self.padding, self.kernel_size
            )));
        }
        Ok((padded - self.kernel_size) / self.stride + 1)
    }

    /// `L_out = (L - 1)s - 2p + K`; requires `(L - 1)s + K > 2p`.
    pub fn conv_transpose_out_len(&self, input_len: usize) -> Result<usize> {
        if input_len == 0 {
            return Err(Error::Invalid("conv-transpose input is empty".into()));
        }
        let grown = (input_len - 1) * self.stride + self.kernel_size;
        if grown <= 2 * self.padding {
            return Err(Error::Invalid(format!(
                "conv-transpose output collapses: (L-1)s+K = {} <= 2p = {}",
                grown,
                2 * self.padding
            )));
        }
        Ok(grown - 2 * self.padding)
    }
}

/// Cached forward state, valid between one forward and its matching backward.
#[derive(Debug, Clone)]
struct Cache {
    input: Tensor,
    output: Tensor,
}

fn gaussian_tensor<R: Rng>(shape: &[usize], rng: &mut R) -> Tensor {
    let normal = Normal::new(0.0, WEIGHT_INIT_STD).expect("valid std");
    let n = shape.iter().product();
    let data = (0..n).map(|_| normal.sample(rng)).collect();
    Tensor::from_vec(shape, data).expect("shape/volume agree")
}

// ---------------------------------------------------------------------------
// Dense
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct Dense {
    pub in_dim: usize,
    pub out_dim: usize,
    pub activation: Activation,
    w: Tensor,
    b: Tensor,
    gw: Tensor,
    gb: Tensor,
    cache: Option<Cache>,
}

macro_rules! param_access {
    ($ty:ty) => {
        impl $ty {
            /// `(value, grad)` pairs in declaration order: weights, then bias.
            pub fn params_and_grads_mut(&mut self) -> Vec<(&mut Tensor, &mut Tensor)> {
                vec![(&mut self.w, &mut self.gw), (&mut self.b, &mut self.gb)]
            }

            pub fn params(&self) -> Vec<&Tensor> {
                vec![&self.w, &self.b]
            }
        }
    };
}

param_access!(Dense);
param_access!(Conv1d);
param_access!(ConvTranspose1d);

impl Dense {
    pub fn new<R: Rng>(in_dim: usize, out_dim: usize, activation: Activation, rng: &mut R) -> Self {
        Dense {
            in_dim,
            out_dim,
            activation,
            w: gaussian_tensor(&[out_dim, in_dim], rng),
            b: Tensor::zeros(&[out_dim]),
            gw: Tensor::zeros(&[out_dim, in_dim]),
            gb: Tensor::zeros(&[out_dim]),
            cache: None,
        }
    }

    /// Forward for a batch `[M, n] -> [M, m]`.
    pub fn forward(&mut self, x: &Tensor) -> Result<Tensor> {
        let (batch, n) = match *x.shape() {
            [batch, n] => (batch, n),
            _ => return Err(Error::shape("dense input", &[0, self.in_dim], x.shape())),
        };
        if n != self.in_dim {
            return Err(Error::shape(
                "dense input",
                &[batch, self.in_dim],
                x.shape(),
            ));
        }
        let mut y = Tensor::zeros(&[batch, self.out_dim]);
        let w = self.w.data();
        let b = self.b.data();
        for i in 0..batch {
            let xi = &x.data()[i * n..(i + 1) * n];
            let yi = &mut y.data_mut()[i * self.out_dim..(i + 1) * self.out_dim];
            for (o, yo) in yi.iter_mut().enumerate() {
                let row = &w[o * n..(o + 1) * n];
                let mut acc = b[o];
                for (wv, xv) in row.iter().zip(xi) {
                    acc += wv * xv;
                }
                *yo = self.activation.apply(acc);
            }
        }
        self.cache = Some(Cache {
            input: x.clone(),
            output: y.clone(),
        });
        Ok(y)
    }

    /// Backward for the cached batch; accumulates `gw`/`gb`, returns `dL/dx`.
    pub fn backward(&mut self, upstream: &Tensor) -> Result<Tensor> {
        let cache = self
            .cache
            .take()
            .ok_or_else(|| Error::Invalid("dense backward without forward".into()))?;
        if upstream.shape() != cache.output.shape() {
            return Err(Error::shape(
                "dense upstream grad",
                cache.output.shape(),
                upstream.shape(),
            ));
        }
        let batch = cache.input.shape()[0];
        let n = self.in_dim;
        let m = self.out_dim;
        let mut gx = Tensor::zeros(&[batch, n]);
        let w = self.w.data();
        for i in 0..batch {
            let xi = &cache.input.data()[i * n..(i + 1) * n];
            let yi = &cache.output.data()[i * m..(i + 1) * m];
            let gi = &upstream.data()[i * m..(i + 1) * m];
            let gxi = &mut gx.data_mut()[i * n..(i + 1) * n];
            for o in 0..m {
                let gz = gi[o] * self.activation.grad_from_output(yi[o]);
                if gz == 0.0 {
                    continue;
                }
                self.gb.data_mut()[o] += gz;
                let row = &w[o * n..(o + 1) * n];
                let grow = &mut self.gw.data_mut()[o * n..(o + 1) * n];
                for j in 0..n {
                    grow[j] += gz * xi[j];
                    gxi[j] += gz * row[j];
                }
            }
        }
        Ok(gx)
    }
}

// ---------------------------------------------------------------------------
// Conv1d
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct Conv1d {
    pub spec: ConvSpec,
    pub activation: Activation,
    w: Tensor,
    b: Tensor,
    gw: Tensor,
    gb: Tensor,
    cache: Option<Cache>,
}

impl Conv1d {
    pub fn new<R: Rng>(spec: ConvSpec, activation: Activation, rng: &mut R) -> Self {
        let w_shape = [spec.out_channels, spec.in_channels, spec.kernel_size];
        Conv1d {
            spec,
            activation,
            w: gaussian_tensor(&w_shape, rng),
            b: Tensor::zeros(&[spec.out_channels]),
            gw: Tensor::zeros(&w_shape),
            gb: Tensor::zeros(&[spec.out_channels]),
            cache: None,
        }
    }

    fn check_input(&self, x: &Tensor) -> Result<(usize, usize, usize)> {
        let (batch, c, l) = match *x.shape() {
            [batch, c, l] => (batch, c, l),
            _ => {
                return Err(Error::shape(
                    "conv1d input",
                    &[0, self.spec.in_channels, 0],
                    x.shape(),
                ))
            }
        };
        if c != self.spec.in_channels {
            return Err(Error::shape(
                "conv1d input channels",
                &[batch, self.spec.in_channels, l],
                x.shape(),
            ));
        }
        Ok((batch, c, l))
    }

    /// Windowed gather: `z[f][m] = b[f] + sum_{c,k} w[f][c][k] * x[c][m*s + k - p]`.
    pub fn forward(&mut self, x: &Tensor) -> Result<Tensor> {
        let (batch, c_in, l) = self.check_input(x)?;
        let spec = self.spec;
        let lo = spec.conv_out_len(l)?;
        let (f_out, k_len, s, p) = (
            spec.out_channels,
            spec.kernel_size,
            spec.stride,
            spec.padding,
        );
        let mut y = Tensor::zeros(&[batch, f_out, lo]);
        let w = self.w.data();
        let b = self.b.data();
        for i in 0..batch {
            let xs = &x.data()[i * c_in * l..(i + 1) * c_in * l];
            let ys = &mut y.data_mut()[i * f_out * lo..(i + 1) * f_out * lo];
            for f in 0..f_out {
                let out = &mut ys[f * lo..(f + 1) * lo];
                out.fill(b[f]);
                for c in 0..c_in {
                    let xc = &xs[c * l..(c + 1) * l];
                    let wf = &w[(f * c_in + c) * k_len..(f * c_in + c + 1) * k_len];
                    for (k, &wk) in wf.iter().enumerate() {
                        // valid m: 0 <= m*s + k - p < l
                        let m_lo = if k >= p { 0 } else { (p - k).div_ceil(s) };
                        if l + p < k + 1 {
                            continue;
                        }
                        let m_hi = ((l - 1 + p - k) / s).min(lo.saturating_sub(1));
                        let mut j = m_lo * s + k - p;
                        for m in m_lo..=m_hi {
                            out[m] += wk * xc[j];
                            j += s;
                        }
                    }
                }
                for v in out.iter_mut() {
                    *v = self.activation.apply(*v);
                }
            }
        }
        self.cache = Some(Cache {
            input: x.clone(),
            output: y.clone(),
        });
        Ok(y)
    }

    pub fn backward(&mut self, upstream: &Tensor) -> Result<Tensor> {
        let cache = self
            .cache
            .take()
            .ok_or_else(|| Error::Invalid("conv1d backward without forward".into()))?;
        if upstream.shape() != cache.output.shape() {
            return Err(Error::shape(
                "conv1d upstream grad",
                cache.output.shape(),
                upstream.shape(),
            ));
        }
        let spec = self.spec;
        let (batch, c_in, l) = (
            cache.input.shape()[0],
            cache.input.shape()[1],
            cache.input.shape()[2],
        );
        let lo = cache.output.shape()[2];
        let (f_out, k_len, s, p) = (
            spec.out_channels,
            spec.kernel_size,
            spec.stride,
            spec.padding,
        );
        let mut gx = Tensor::zeros(&[batch, c_in, l]);
        let w = self.w.data();
        let mut gz = vec![0.0; lo];
        for i in 0..batch {
            let xs = &cache.input.data()[i * c_in * l..(i + 1) * c_in * l];
            let ys = &cache.output.data()[i * f_out * lo..(i + 1) * f_out * lo];
            let gs = &upstream.data()[i * f_out * lo..(i + 1) * f_out * lo];
            for f in 0..f_out {
                let yf = &ys[f * lo..(f + 1) * lo];
                let gf = &gs[f * lo..(f + 1) * lo];
                for m in 0..lo {
                    gz[m] = gf[m] * self.activation.grad_from_output(yf[m]);
                }
                self.gb.data_mut()[f] += gz.iter().sum::<f64>();
                for c in 0..c_in {
                    let xc = &xs[c * l..(c + 1) * l];
                    let gxc = &mut gx.data_mut()[(i * c_in + c) * l..(i * c_in + c + 1) * l];
                    let wf = &w[(f * c_in + c) * k_len..(f * c_in + c + 1) * k_len];
                    let gwf =
                        &mut self.gw.data_mut()[(f * c_in + c) * k_len..(f * c_in + c + 1) * k_len];
                    for k in 0..k_len {
                        let m_lo = if k >= p { 0 } else { (p - k).div_ceil(s) };
                        if l + p < k + 1 {
                            continue;
                        }
                        let m_hi = ((l - 1 + p - k) / s).min(lo.saturating_sub(1));
                        let wk = wf[k];
                        let mut acc = 0.0;
                        let mut j = m_lo * s + k - p;
                        for m in m_lo..=m_hi {
                            let g = gz[m];
                            acc += g * xc[j];
                            gxc[j] += wk * g;
                            j += s;
                        }
                        gwf[k] += acc;
                    }
                }
            }
        }
        Ok(gx)
    }
}

// ---------------------------------------------------------------------------
// ConvTranspose1d
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct ConvTranspose1d {
    pub spec: ConvSpec,
    pub activation: Activation,
    w: Tensor,
    b: Tensor,
    gw: Tensor,
    gb: Tensor,
    cache: Option<Cache>,
}

impl ConvTranspose1d {
    pub fn new<R: Rng>(spec: ConvSpec, activation: Activation, rng: &mut R) -> Self {
        let w_shape = [spec.in_channels, spec.out_channels, spec.kernel_size];
        ConvTranspose1d {
            spec,
            activation,
            w: gaussian_tensor(&w_shape, rng),
            b: Tensor::zeros(&[spec.out_channels]),
            gw: Tensor::zeros(&w_shape),
            gb: Tensor::zeros(&[spec.out_channels]),
            cache: None,
        }
    }

    /// Scatter-add: every input sample emits a kernel copy at `n = j*s + k - p`.
    pub fn forward(&mut self, x: &Tensor) -> Result<Tensor> {
        let spec = self.spec;
        let (batch, c_in, l) = match *x.shape() {
            [batch, c, l] if c == spec.in_channels => (batch, c, l),
            _ => {
                return Err(Error::shape(
                    "conv-transpose input",
                    &[0, spec.in_channels, 0],
                    x.shape(),
                ))
            }
        };
        let lo = spec.conv_transpose_out_len(l)?;
        let (f_out, k_len, s, p) = (
            spec.out_channels,
            spec.kernel_size,
            spec.stride,
            spec.padding,
        );
        let mut y = Tensor::zeros(&[batch, f_out, lo]);
        let w = self.w.data();
        let b = self.b.data();
        for i in 0..batch {
            let xs = &x.data()[i * c_in * l..(i + 1) * c_in * l];
            let ys = &mut y.data_mut()[i * f_out * lo..(i + 1) * f_out * lo];
            for f in 0..f_out {
                ys[f * lo..(f + 1) * lo].fill(b[f]);
            }
            for c in 0..c_in {
                let xc = &xs[c * l..(c + 1) * l];
                for f in 0..f_out {
                    let wcf = &w[(c * f_out + f) * k_len..(c * f_out + f + 1) * k_len];
                    let out = &mut ys[f * lo..(f + 1) * lo];
                    for (j, &xj) in xc.iter().enumerate() {
                        let base = j * s;
                        // valid k: 0 <= base + k - p < lo
                        if base >= lo + p {
                            continue;
                        }
                        let k_lo = p.saturating_sub(base);
                        let k_hi = (lo + p - base).min(k_len);
                        if k_lo >= k_hi {
                            continue;
                        }
                        let off = base + k_lo - p;
                        let dst = &mut out[off..off + (k_hi - k_lo)];
                        let src = &wcf[k_lo..k_hi];
                        for (d, &wv) in dst.iter_mut().zip(src) {
                            *d += wv * xj;
                        }
                    }
                }
            }
            for f in 0..f_out {
                for v in ys[f * lo..(f + 1) * lo].iter_mut() {
                    *v = self.activation.apply(*v);
                }
            }
        }
        self.cache = Some(Cache {
            input: x.clone(),
            output: y.clone(),
        });
        Ok(y)
    }

    /// Input gradient is the adjoint gather, i.e. a conv1d with the same kernel.
    pub fn backward(&mut self, upstream: &Tensor) -> Result<Tensor> {
        let cache = self
            .cache
            .take()
            .ok_or_else(|| Error::Invalid("conv-transpose backward without forward".into()))?;
        if upstream.shape() != cache.output.shape() {
            return Err(Error::shape(
                "conv-transpose upstream grad",
                cache.output.shape(),
                upstream.shape(),
            ));
        }
        let spec = self.spec;
        let (batch, c_in, l) = (
            cache.input.shape()[0],
            cache.input.shape()[1],
            cache.input.shape()[2],
        );
        let lo = cache.output.shape()[2];
        let (f_out, k_len, s, p) = (
            spec.out_channels,
            spec.kernel_size,
            spec.stride,
            spec.padding,
        );
        let mut gx = Tensor::zeros(&[batch, c_in, l]);
        let w = self.w.data();
        let mut gz = vec![0.0; lo];
        for i in 0..batch {
            let xs = &cache.input.data()[i * c_in * l..(i + 1) * c_in * l];
            let ys = &cache.output.data()[i * f_out * lo..(i + 1) * f_out * lo];
            let gs = &upstream.data()[i * f_out * lo..(i + 1) * f_out * lo];
            for f in 0..f_out {
                let yf = &ys[f * lo..(f + 1) * lo];
                let gf = &gs[f * lo..(f + 1) * lo];
                for n in 0..lo {
                    gz[n] = gf[n] * self.activation.grad_from_output(yf[n]);
                }
                self.gb.data_mut()[f] += gz.iter().sum::<f64>();
                for c in 0..c_in {
                    let xc = &xs[c * l..(c + 1) * l];
                    let gxc = &mut gx.data_mut()[(i * c_in + c) * l..(i * c_in + c + 1) * l];
                    let wcf = &w[(c * f_out + f) * k_len..(c * f_out + f + 1) * k_len];
                    let gwcf = &mut self.gw.data_mut()
                        [(c * f_out + f) * k_len..(c * f_out + f + 1) * k_len];
                    for j in 0..l {
                        let base = j * s;
                        if base >= lo + p {
                            continue;
                        }
                        let k_lo = p.saturating_sub(base);
                        let k_hi = (lo + p - base).min(k_len);
                        if k_lo >= k_hi {
                            continue;
                        }
                        let off = base + k_lo - p;
                        let gzs = &gz[off..off + (k_hi - k_lo)];
                        let xj = xc[j];
                        let mut acc = 0.0;
                        for (t, &g) in gzs.iter().enumerate() {
                            gwcf[k_lo + t] += g * xj;
                            acc += g * wcf[k_lo + t];
                        }
                        gxc[j] += acc;
                    }
                }
            }
        }
        Ok(gx)
    }
}

// ---------------------------------------------------------------------------
// Layer: uniform access for stacks, optimizers and serialization
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub enum Layer {
    Dense(Dense),
    Conv1d(Conv1d),
    ConvTranspose1d(ConvTranspose1d),
}

impl Layer {
    pub fn forward(&mut self, x: &Tensor) -> Result<Tensor> {
        match self {
            Layer::Dense(l) => l.forward(x),
            Layer::Conv1d(l) => l.forward(x),
            Layer::ConvTranspose1d(l) => l.forward(x),
        }
    }

    pub fn backward(&mut self, upstream: &Tensor) -> Result<Tensor> {
        match self {
            Layer::Dense(l) => l.backward(upstream),
            Layer::Conv1d(l) => l.backward(upstream),
            Layer::ConvTranspose1d(l) => l.backward(upstream),
        }
    }

    pub fn params(&self) -> Vec<&Tensor> {
        match self {
            Layer::Dense(l) => l.params(),
            Layer::Conv1d(l) => l.params(),
            Layer::ConvTranspose1d(l) => l.params(),
        }
    }

    /// `(value, grad)` pairs in declaration order: weights, then bias.
    pub fn params_and_grads_mut(&mut self) -> Vec<(&mut Tensor, &mut Tensor)> {
        match self {
            Layer::Dense(l) => l.params_and_grads_mut(),
            Layer::Conv1d(l) => l.params_and_grads_mut(),
            Layer::ConvTranspose1d(l) => l.params_and_grads_mut(),
        }
    }

    pub fn zero_grads(&mut self) {
        for (_, g) in self.params_and_grads_mut() {
            g.fill(0.0);
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Layer::Dense(_) => "dense",
            Layer::Conv1d(_) => "conv1d",
            Layer::ConvTranspose1d(_) => "conv-transpose1d",
        }
    }
}
