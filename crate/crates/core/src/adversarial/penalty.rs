use std::ops::Range;

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::adversarial::discriminator::{DiscriminatorNet, Pass};
use crate::error::{Error, Result};
use crate::models::Gradients;

/// Added under the square root so the norm is differentiable at zero.
pub const NORM_EPS: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct PenaltyOutput {
    /// `lambda * mean((||g|| - 1)^2)`.
    pub loss: f64,
    /// Parameter gradients of `loss`, ordered like the discriminator's
    /// parameters.
    pub grads: Gradients,
    /// `||g||` per sample.
    pub norms: Array1<f64>,
}

/// Penalty at `alpha * real + (1 - alpha) * fake`, one `alpha` per row.
/// Only the `candidate` columns are differentiated.
pub fn gradient_penalty(
    d: &DiscriminatorNet,
    real: ArrayView2<'_, f64>,
    fake: ArrayView2<'_, f64>,
    alpha: ArrayView1<'_, f64>,
    candidate: Range<usize>,
    lambda: f64,
) -> Result<PenaltyOutput> {
    if real.dim() != fake.dim() || alpha.len() != real.nrows() {
        return Err(Error::ShapeMismatch(format!(
            "penalty inputs: real {:?}, fake {:?}, {} mixing weights",
            real.dim(),
            fake.dim(),
            alpha.len()
        )));
    }
    let a = alpha.insert_axis(Axis(1));
    let mixed = &real * &a + &fake * &a.mapv(|v| 1.0 - v);
    penalty_at(d, mixed.view(), candidate, lambda)
}

/// Penalty and its parameter gradients at fixed points `x`.
///
/// With eval-mode batch norm the network is per-sample, so for one row
/// `g = s q` where `s = sigmoid'(o)` and `q = P W1^T delta_1` is the logit's
/// input gradient restricted to the candidate columns. Differentiating
/// `phi(g)` w.r.t. the parameters gives a term through `s` (ordinary
/// backward from the logit with upstream `(r . q) sigmoid''(o)`) and a term
/// through `q`, which is linear in every weight matrix and batch-norm scale
/// once the LeakyReLU slopes are fixed.
pub fn penalty_at(
    d: &DiscriminatorNet,
    x: ArrayView2<'_, f64>,
    candidate: Range<usize>,
    lambda: f64,
) -> Result<PenaltyOutput> {
    if candidate.end > d.in_dim || candidate.is_empty() {
        return Err(Error::ShapeMismatch(format!(
            "candidate columns {candidate:?} outside discriminator input of width {}",
            d.in_dim
        )));
    }
    let batch = x.nrows();
    let (p, cache) = d.forward(x, Pass::Eval)?;
    let n_hidden = d.hidden.len();

    // per-layer k = gamma / sqrt(var + eps) and slope matrices
    let k: Vec<Array1<f64>> = cache
        .hidden
        .iter()
        .zip(&d.norms)
        .map(|(h, bn)| &bn.gamma * &h.inv_std)
        .collect();
    let slopes: Vec<Array2<f64>> = cache.hidden.iter().map(|h| h.z.mapv(|v| d.leaky_slope(v))).collect();
    let a_out = cache.out_w_hat.row(0).to_owned();

    // e_l is the upstream vector of layer l's normalized output and
    // delta_l = k_l * D_l * e_l; what remains after layer 1 is dlogit/dx
    let mut e: Vec<Array2<f64>> = vec![Array2::zeros((0, 0)); n_hidden];
    let mut delta: Vec<Array2<f64>> = vec![Array2::zeros((0, 0)); n_hidden];
    let mut upstream = Array2::from_shape_fn((batch, a_out.len()), |(_, j)| a_out[j]);
    for l in (0..n_hidden).rev() {
        let dl = &slopes[l] * &upstream * &k[l];
        let next = dl.dot(&cache.hidden[l].w_hat);
        e[l] = std::mem::replace(&mut upstream, next);
        delta[l] = dl;
    }
    let q = upstream.slice(s![.., candidate.clone()]).to_owned();
    let sp = p.mapv(|v| v * (1.0 - v));
    let g = &q * &sp.view().insert_axis(Axis(1));
    let norms = g.rows().into_iter().map(|r| (r.dot(&r) + NORM_EPS).sqrt()).collect::<Array1<f64>>();
    let loss = lambda * norms.mapv(|n| (n - 1.0) * (n - 1.0)).mean().unwrap_or(0.0);

    // dL/dg per row
    let coef = &norms.mapv(|n| lambda * 2.0 * (n - 1.0) / (n * batch as f64));
    let r = &g * &coef.view().insert_axis(Axis(1));

    // term through s: upstream on the logit is (r . q) s''(o)
    let rq = (&r * &q).sum_axis(Axis(1));
    let spp = p.mapv(|v| v * (1.0 - v) * (1.0 - 2.0 * v));
    let (mut dense_grads, mut bn_grads, _) = d.backward_hat(&cache, (&rq * &spp).view());

    // term through q, scaled by s
    let mut rho = Array2::zeros((batch, d.in_dim));
    rho.slice_mut(s![.., candidate]).assign(&(&r * &sp.view().insert_axis(Axis(1))));
    let mut prev = rho;
    for l in 0..n_hidden {
        let h = &cache.hidden[l];
        let u = prev.dot(&h.w_hat.t());
        dense_grads[l].0 += &delta[l].t().dot(&prev);
        let dk = (&u * &slopes[l] * &e[l]).sum_axis(Axis(0));
        bn_grads[l].0 += &(&dk * &h.inv_std);
        prev = &u * &slopes[l] * &k[l];
    }
    dense_grads[n_hidden].0 += &prev.sum_axis(Axis(0)).insert_axis(Axis(0));

    Ok(PenaltyOutput {
        loss,
        grads: d.assemble(&cache, dense_grads, bn_grads),
        norms,
    })
}
