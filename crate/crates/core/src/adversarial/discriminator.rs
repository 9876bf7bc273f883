use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::adversarial::spectral::{backprop_normalized, normalize_with, SpectralState};
use crate::error::{Error, Result};
use crate::models::Gradients;

/// Lower and upper clamp applied to probabilities before BCE.
pub const PROB_CLAMP: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub struct DiscriminatorConfig {
    pub hidden: Vec<usize>,
    pub slope: f64,
    /// Running statistics follow `momentum * running + (1 - momentum) * batch`.
    pub momentum: f64,
    pub bn_eps: f64,
    pub dropout: f64,
    pub spectral_norm: bool,
}

impl Default for DiscriminatorConfig {
    fn default() -> Self {
        Self {
            hidden: vec![128, 64],
            slope: 0.2,
            momentum: 0.8,
            bn_eps: 1e-3,
            dropout: 0.3,
            spectral_norm: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    /// `out x in`.
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
    pub spectral: SpectralState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchNorm {
    pub gamma: Array1<f64>,
    pub beta: Array1<f64>,
    pub running_mean: Array1<f64>,
    pub running_var: Array1<f64>,
}

/// Per-layer dropout multipliers (`0` or `1 / (1 - rate)`), `batch x width`.
#[derive(Debug, Clone, PartialEq)]
pub struct DropoutMasks(pub Vec<Array2<f64>>);

#[derive(Debug, Clone, Copy)]
pub enum Pass<'a> {
    /// Batch statistics and the given dropout masks.
    Train(&'a DropoutMasks),
    /// Running statistics, no dropout.
    Eval,
}

#[derive(Debug, Clone)]
pub(crate) struct HiddenCache {
    pub input: Array2<f64>,
    pub z: Array2<f64>,
    pub xhat: Array2<f64>,
    pub inv_std: Array1<f64>,
    pub batch_mean: Array1<f64>,
    pub batch_var: Array1<f64>,
    pub w_hat: Array2<f64>,
    pub sigma: f64,
    pub mask: Option<Array2<f64>>,
}

#[derive(Debug, Clone)]
pub struct DiscCache {
    pub(crate) hidden: Vec<HiddenCache>,
    pub(crate) out_input: Array2<f64>,
    pub(crate) out_w_hat: Array2<f64>,
    pub(crate) out_sigma: f64,
    pub(crate) train: bool,
    pub logits: Array1<f64>,
    pub probs: Array1<f64>,
}

/// MLP critic `in -> hidden... -> 1` with sigmoid output.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscriminatorNet {
    pub config: DiscriminatorConfig,
    pub in_dim: usize,
    pub hidden: Vec<Dense>,
    pub norms: Vec<BatchNorm>,
    pub output: Dense,
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn dense<R: Rng>(out_dim: usize, in_dim: usize, rng: &mut R) -> Dense {
    let bound = (6.0 / (in_dim + out_dim) as f64).sqrt();
    let weight = Array2::from_shape_simple_fn((out_dim, in_dim), || rng.random_range(-bound..=bound));
    let u: Array1<f64> = Array1::from_shape_simple_fn(out_dim, || rng.sample(StandardNormal));
    let norm = u.dot(&u).sqrt().max(f64::MIN_POSITIVE);
    let mut spectral = SpectralState::new(u / norm, in_dim);
    spectral.iterate(weight.view(), 1);
    Dense {
        weight,
        bias: Array1::zeros(out_dim),
        spectral,
    }
}

impl DiscriminatorNet {
    /// Glorot-uniform weights, zero biases, unit batch-norm scale.
    pub fn new<R: Rng>(in_dim: usize, config: DiscriminatorConfig, rng: &mut R) -> Result<Self> {
        if in_dim == 0 || config.hidden.contains(&0) {
            return Err(Error::InvalidParameter("discriminator widths must be positive".into()));
        }
        if !(0.0..1.0).contains(&config.dropout) {
            return Err(Error::InvalidParameter(format!("dropout rate {} outside [0, 1)", config.dropout)));
        }
        let mut hidden = Vec::new();
        let mut norms = Vec::new();
        let mut width = in_dim;
        for &h in &config.hidden {
            hidden.push(dense(h, width, rng));
            norms.push(BatchNorm {
                gamma: Array1::ones(h),
                beta: Array1::zeros(h),
                running_mean: Array1::zeros(h),
                running_var: Array1::ones(h),
            });
            width = h;
        }
        let output = dense(1, width, rng);
        Ok(Self {
            config,
            in_dim,
            hidden,
            norms,
            output,
        })
    }

    fn effective(&self, layer: &Dense) -> (Array2<f64>, f64) {
        if self.config.spectral_norm {
            normalize_with(layer.weight.view(), &layer.spectral)
        } else {
            (layer.weight.clone(), 1.0)
        }
    }

    fn leaky(&self, z: f64) -> f64 {
        if z > 0.0 {
            z
        } else {
            self.config.slope * z
        }
    }

    pub(crate) fn leaky_slope(&self, z: f64) -> f64 {
        if z > 0.0 {
            1.0
        } else {
            self.config.slope
        }
    }

    /// One power-iteration round on every weight matrix.
    pub fn power_iterate(&mut self, iters: usize) {
        if !self.config.spectral_norm {
            return;
        }
        for layer in self.hidden.iter_mut().chain(std::iter::once(&mut self.output)) {
            layer.spectral.iterate(layer.weight.view(), iters);
        }
    }

    pub fn sample_masks<R: Rng>(&self, batch: usize, rng: &mut R) -> DropoutMasks {
        let rate = self.config.dropout;
        let keep = 1.0 / (1.0 - rate);
        DropoutMasks(
            self.config
                .hidden
                .iter()
                .map(|&h| {
                    Array2::from_shape_simple_fn((batch, h), || {
                        if rate > 0.0 && rng.random::<f64>() < rate {
                            0.0
                        } else {
                            keep
                        }
                    })
                })
                .collect(),
        )
    }

    /// All-ones masks (dropout disabled) for a train-mode pass.
    pub fn unit_masks(&self, batch: usize) -> DropoutMasks {
        DropoutMasks(self.config.hidden.iter().map(|&h| Array2::ones((batch, h))).collect())
    }

    /// Probabilities for each row of `x` (`batch x in_dim`).
    pub fn forward(&self, x: ArrayView2<'_, f64>, pass: Pass<'_>) -> Result<(Array1<f64>, DiscCache)> {
        if x.ncols() != self.in_dim {
            return Err(Error::ShapeMismatch(format!(
                "discriminator input has {} columns, expected {}",
                x.ncols(),
                self.in_dim
            )));
        }
        let batch = x.nrows();
        let masks = match pass {
            Pass::Train(m) => {
                if batch < 2 {
                    return Err(Error::InvalidParameter(
                        "batch norm needs at least two samples in training mode".into(),
                    ));
                }
                if m.0.len() != self.hidden.len() || m.0.iter().any(|a| a.nrows() != batch) {
                    return Err(Error::ShapeMismatch("dropout masks do not match the batch".into()));
                }
                Some(m)
            }
            Pass::Eval => None,
        };
        let eps = self.config.bn_eps;
        let mut act = x.to_owned();
        let mut hidden = Vec::with_capacity(self.hidden.len());
        for (l, (layer, bn)) in self.hidden.iter().zip(&self.norms).enumerate() {
            let (w_hat, sigma) = self.effective(layer);
            let z = act.dot(&w_hat.t()) + &layer.bias;
            let a = z.mapv(|v| self.leaky(v));
            let (batch_mean, batch_var, center, var) = if masks.is_some() {
                let m = a.mean_axis(Axis(0)).expect("batch is nonempty");
                let v = (&a - &m).mapv(|d| d * d).mean_axis(Axis(0)).expect("batch is nonempty");
                (m.clone(), v.clone(), m, v)
            } else {
                (
                    Array1::zeros(0),
                    Array1::zeros(0),
                    bn.running_mean.clone(),
                    bn.running_var.clone(),
                )
            };
            let inv_std = var.mapv(|v| 1.0 / (v + eps).sqrt());
            let xhat = (&a - &center) * &inv_std;
            let mut n = &xhat * &bn.gamma + &bn.beta;
            let mask = masks.map(|m| m.0[l].clone());
            if let Some(mk) = &mask {
                n *= mk;
            }
            hidden.push(HiddenCache {
                input: act,
                z,
                xhat,
                inv_std,
                batch_mean,
                batch_var,
                w_hat,
                sigma,
                mask,
            });
            act = n;
        }
        let (out_w_hat, out_sigma) = self.effective(&self.output);
        let logits = act.dot(&out_w_hat.row(0)) + self.output.bias[0];
        let probs = logits.mapv(sigmoid);
        Ok((
            probs.clone(),
            DiscCache {
                hidden,
                out_input: act,
                out_w_hat,
                out_sigma,
                train: masks.is_some(),
                logits,
                probs,
            },
        ))
    }

    /// Folds the batch statistics of a train-mode pass into the running
    /// averages.
    pub fn update_running(&mut self, cache: &DiscCache) {
        if !cache.train {
            return;
        }
        let m = self.config.momentum;
        for (bn, h) in self.norms.iter_mut().zip(&cache.hidden) {
            bn.running_mean = &bn.running_mean * m + &h.batch_mean * (1.0 - m);
            bn.running_var = &bn.running_var * m + &h.batch_var * (1.0 - m);
        }
    }

    /// Parameter gradients and input gradient given `dL/d logit` per row.
    pub fn backward(&self, cache: &DiscCache, dlogit: ArrayView1<'_, f64>) -> (Gradients, Array2<f64>) {
        let (hat_grads, norm_grads, dx) = self.backward_hat(cache, dlogit);
        (self.assemble(cache, hat_grads, norm_grads), dx)
    }

    /// Backward pass with weight gradients taken w.r.t. the normalized
    /// matrices. Returns (dense grads `[dW_hat, db]` per layer incl.
    /// output, batch-norm grads `[dgamma, dbeta]`, dX).
    #[allow(clippy::type_complexity)]
    pub(crate) fn backward_hat(
        &self,
        cache: &DiscCache,
        dlogit: ArrayView1<'_, f64>,
    ) -> (Vec<(Array2<f64>, Array1<f64>)>, Vec<(Array1<f64>, Array1<f64>)>, Array2<f64>) {
        let batch = dlogit.len() as f64;
        let dw_out = cache.out_input.t().dot(&dlogit).insert_axis(Axis(0));
        let db_out = Array1::from_elem(1, dlogit.sum());
        let mut dn = dlogit
            .to_owned()
            .insert_axis(Axis(1))
            .dot(&cache.out_w_hat);
        let mut dense_grads = vec![(dw_out, db_out)];
        let mut bn_grads = Vec::new();
        for (h, bn) in cache.hidden.iter().zip(&self.norms).rev() {
            if let Some(mk) = &h.mask {
                dn *= mk;
            }
            let dgamma = (&dn * &h.xhat).sum_axis(Axis(0));
            let dbeta = dn.sum_axis(Axis(0));
            let dxhat = &dn * &bn.gamma;
            let da = if cache.train {
                let s1 = dxhat.sum_axis(Axis(0));
                let s2 = (&dxhat * &h.xhat).sum_axis(Axis(0));
                ((&dxhat * batch) - &s1 - &(&h.xhat * &s2)) * &(&h.inv_std / batch)
            } else {
                &dxhat * &h.inv_std
            };
            let dz = &da * &h.z.mapv(|v| self.leaky_slope(v));
            let dw = dz.t().dot(&h.input);
            let db = dz.sum_axis(Axis(0));
            dn = dz.dot(&h.w_hat);
            dense_grads.push((dw, db));
            bn_grads.push((dgamma, dbeta));
        }
        dense_grads.reverse();
        bn_grads.reverse();
        (dense_grads, bn_grads, dn)
    }

    /// Maps normalized-weight gradients back to raw weights and orders them
    /// like [`Self::parameters_mut`].
    pub(crate) fn assemble(
        &self,
        cache: &DiscCache,
        dense_grads: Vec<(Array2<f64>, Array1<f64>)>,
        bn_grads: Vec<(Array1<f64>, Array1<f64>)>,
    ) -> Gradients {
        let mut g = Gradients::default();
        let n = self.hidden.len();
        for (l, ((dw, db), (dgamma, dbeta))) in dense_grads.iter().zip(bn_grads).enumerate() {
            let raw = self.raw_grad(&self.hidden[l], dw, cache.hidden[l].sigma);
            g.push(format!("dense{}.weight", l + 1), raw);
            g.push(format!("dense{}.bias", l + 1), db.iter().copied());
            g.push(format!("norm{}.gamma", l + 1), dgamma);
            g.push(format!("norm{}.beta", l + 1), dbeta);
        }
        let (dw, db) = &dense_grads[n];
        g.push("output.weight", self.raw_grad(&self.output, dw, cache.out_sigma));
        g.push("output.bias", db.iter().copied());
        g
    }

    fn raw_grad(&self, layer: &Dense, grad_hat: &Array2<f64>, sigma: f64) -> Array2<f64> {
        if self.config.spectral_norm {
            backprop_normalized(grad_hat.view(), layer.weight.view(), &layer.spectral, sigma)
        } else {
            grad_hat.clone()
        }
    }

    pub fn parameters_mut(&mut self) -> Vec<(String, &mut [f64])> {
        let mut out: Vec<(String, &mut [f64])> = Vec::new();
        for (l, (d, bn)) in self.hidden.iter_mut().zip(self.norms.iter_mut()).enumerate() {
            let i = l + 1;
            out.push((format!("dense{i}.weight"), d.weight.as_slice_mut().expect("standard layout")));
            out.push((format!("dense{i}.bias"), d.bias.as_slice_mut().expect("standard layout")));
            out.push((format!("norm{i}.gamma"), bn.gamma.as_slice_mut().expect("standard layout")));
            out.push((format!("norm{i}.beta"), bn.beta.as_slice_mut().expect("standard layout")));
        }
        out.push(("output.weight".into(), self.output.weight.as_slice_mut().expect("standard layout")));
        out.push(("output.bias".into(), self.output.bias.as_slice_mut().expect("standard layout")));
        out
    }

    /// `dD/dx` (of the probability, not the logit) in eval mode.
    pub fn input_gradient(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        let (p, cache) = self.forward(x, Pass::Eval)?;
        let ds = p.mapv(|p| p * (1.0 - p));
        Ok(self.backward_hat(&cache, ds.view()).2)
    }
}

/// `-[y ln p + (1 - y) ln(1 - p)]` with `p` clamped to
/// `[PROB_CLAMP, 1 - PROB_CLAMP]`.
pub fn bce(p: f64, label: f64) -> f64 {
    let pc = p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
    -(label * pc.ln() + (1.0 - label) * (1.0 - pc).ln())
}

/// Mean BCE over a batch with one label, and its gradient w.r.t. each
/// logit. The gradient is zero where the clamp is active.
pub fn bce_batch(probs: ArrayView1<'_, f64>, label: f64) -> (f64, Array1<f64>) {
    let n = probs.len() as f64;
    let loss = probs.iter().map(|&p| bce(p, label)).sum::<f64>() / n;
    let grad = probs.mapv(|p| {
        if !(PROB_CLAMP..=1.0 - PROB_CLAMP).contains(&p) {
            0.0
        } else {
            (p - label) / n
        }
    });
    (loss, grad)
}
