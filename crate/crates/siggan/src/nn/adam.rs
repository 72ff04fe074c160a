//! Adam with bias correction.
//!
//! One `Adam` instance owns the first/second-moment buffers for every
//! parameter tensor of the network it drives, keyed by position in the
//! network's declaration order. The step count `t` is shared by all
//! parameters and increments once per `step` call.

use crate::error::{Error, Result};
use crate::nn::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamConfig {
    /// Common GAN setting: low momentum stabilizes the two-player updates.
    pub fn gan(lr: f64) -> Self {
        AdamConfig {
            lr,
            beta1: 0.5,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    /// Plain supervised setting.
    pub fn supervised(lr: f64) -> Self {
        AdamConfig {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Adam {
    pub config: AdamConfig,
    m: Vec<Tensor>,
    v: Vec<Tensor>,
    t: u64,
}

impl Adam {
    /// `sizes[i]` is the flat length of the i-th parameter tensor.
    pub fn new(config: AdamConfig, sizes: &[usize]) -> Self {
        Adam {
            config,
            m: sizes.iter().map(|&n| Tensor::zeros(&[n])).collect(),
            v: sizes.iter().map(|&n| Tensor::zeros(&[n])).collect(),
            t: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }

    pub fn moments(&self) -> (&[Tensor], &[Tensor]) {
        (&self.m, &self.v)
    }

    /// Restores serialized state. Lengths must match the tracked parameters.
    pub fn restore(&mut self, m: Vec<Tensor>, v: Vec<Tensor>, t: u64) -> Result<()> {
        if m.len() != self.m.len() || v.len() != self.v.len() {
            return Err(Error::Invalid(format!(
                "optimizer state has {}/{} tensors, expected {}",
                m.len(),
                v.len(),
                self.m.len()
            )));
        }
        for (cur, new) in self.m.iter().zip(&m) {
            if cur.len() != new.len() {
                return Err(Error::shape("adam m buffer", cur.shape(), new.shape()));
            }
        }
        for (cur, new) in self.v.iter().zip(&v) {
            if cur.len() != new.len() {
                return Err(Error::shape("adam v buffer", cur.shape(), new.shape()));
            }
        }
        self.m = m;
        self.v = v;
        self.t = t;
        Ok(())
    }

    /// Applies one update to every `(param, grad)` pair, in declaration order.
    ///
    /// Rejects non-finite gradients naming the offending parameter index so a
    /// diverging run fails loudly instead of poisoning the moments.
    pub fn step(&mut self, params: &mut [(&mut Tensor, &mut Tensor)]) -> Result<()> {
        if params.len() != self.m.len() {
            return Err(Error::Invalid(format!(
                "optimizer tracks {} tensors, got {}",
                self.m.len(),
                params.len()
            )));
        }
        for (idx, (p, g)) in params.iter().enumerate() {
            if p.len() != self.m[idx].len() {
                return Err(Error::shape("adam param", self.m[idx].shape(), p.shape()));
            }
            if let Some(pos) = g.data().iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!(
                    "gradient of parameter tensor {idx} (element {pos}, shape {:?})",
                    p.shape()
                )));
            }
        }
        self.t += 1;
        let t = self.t as i32;
        let AdamConfig {
            lr,
            beta1,
            beta2,
            eps,
        } = self.config;
        let bc1 = 1.0 - beta1.powi(t);
        let bc2 = 1.0 - beta2.powi(t);
        for (idx, (p, g)) in params.iter_mut().enumerate() {
            let m = self.m[idx].data_mut();
            let v = self.v[idx].data_mut();
            let pd = p.data_mut();
            for ((pv, &gv), (mv, vv)) in pd
                .iter_mut()
                .zip(g.data())
                .zip(m.iter_mut().zip(v.iter_mut()))
            {
                *mv = beta1 * *mv + (1.0 - beta1) * gv;
                *vv = beta2 * *vv + (1.0 - beta2) * gv * gv;
                let m_hat = *mv / bc1;
                let v_hat = *vv / bc2;
                *pv -= lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
        Ok(())
    }
}
