use ndarray::{s, Array1, Array2, Array3, ArrayView1, ArrayView2, ArrayView3, Axis};
use rand::Rng;

use crate::decompose::{check_kernel, embed_rows, trend_into};
use crate::error::{Error, Result};
use crate::frame::{InputLayout, ModelWindow};
use crate::models::linear::{LinearWeights, VariantKind};

/// Named flat gradient buffers, in the same order as
/// [`ModelVariant::parameters_mut`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Gradients {
    pub entries: Vec<(String, Vec<f64>)>,
}

impl Gradients {
    pub fn push(&mut self, name: impl Into<String>, values: impl IntoIterator<Item = f64>) {
        self.entries.push((name.into(), values.into_iter().collect()));
    }

    pub fn get(&self, name: &str) -> Option<&[f64]> {
        self.entries
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }

    /// Elementwise `self += other`; both must come from the same model.
    pub fn accumulate(&mut self, other: &Gradients) {
        for ((_, a), (_, b)) in self.entries.iter_mut().zip(&other.entries) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|(_, v)| v.iter().all(|&x| x == 0.0))
    }
}

/// Inputs retained by [`ModelVariant::forward`] for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    batch: usize,
    /// Design matrices, one per layer (columns are samples or
    /// sample-channel pairs).
    design: Vec<Array2<f64>>,
    noise: Option<Array2<f64>>,
}

/// A linear forecaster: variant kind, window sizes and weights.
///
/// Linear, NLinear and DLinear apply one `horizon x lookback` matrix to
/// each target channel independently. DELinear maps the flattened
/// embedded window (`lookback x d`) to all targets at once. An optional
/// noise matrix adds `W_z z` to every output, which widens the input by
/// `noise_dim` columns for adversarial training.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelVariant {
    pub kind: VariantKind,
    pub lookback: usize,
    pub horizon: usize,
    pub kernel: usize,
    pub layout: InputLayout,
    /// One layer, or `[seasonal, trend]` for DLinear.
    pub layers: Vec<LinearWeights>,
    pub noise: Option<Array2<f64>>,
}

impl ModelVariant {
    /// Random uniform initialization.
    pub fn new<R: Rng>(
        kind: VariantKind,
        lookback: usize,
        horizon: usize,
        kernel: usize,
        layout: InputLayout,
        use_bias: bool,
        rng: &mut R,
    ) -> Result<Self> {
        let (out_dim, in_dim) = Self::dims(kind, lookback, horizon, &layout)?;
        check_kernel(kernel)?;
        let n_layers = if kind == VariantKind::DLinear { 2 } else { 1 };
        let layers = (0..n_layers)
            .map(|_| LinearWeights::uniform(out_dim, in_dim, use_bias, rng))
            .collect();
        Ok(Self {
            kind,
            lookback,
            horizon,
            kernel,
            layout,
            layers,
            noise: None,
        })
    }

    /// Builds a model from explicit weights, checking their shapes.
    pub fn from_weights(
        kind: VariantKind,
        lookback: usize,
        horizon: usize,
        kernel: usize,
        layout: InputLayout,
        layers: Vec<LinearWeights>,
    ) -> Result<Self> {
        let (out_dim, in_dim) = Self::dims(kind, lookback, horizon, &layout)?;
        check_kernel(kernel)?;
        let expected = if kind == VariantKind::DLinear { 2 } else { 1 };
        if layers.len() != expected {
            return Err(Error::ShapeMismatch(format!(
                "{kind} needs {expected} weight layer(s), got {}",
                layers.len()
            )));
        }
        for l in &layers {
            if l.out_dim() != out_dim || l.in_dim() != in_dim {
                return Err(Error::ShapeMismatch(format!(
                    "{kind} weights must be {out_dim}x{in_dim}, got {}x{}",
                    l.out_dim(),
                    l.in_dim()
                )));
            }
        }
        Ok(Self {
            kind,
            lookback,
            horizon,
            kernel,
            layout,
            layers,
            noise: None,
        })
    }

    fn dims(
        kind: VariantKind,
        lookback: usize,
        horizon: usize,
        layout: &InputLayout,
    ) -> Result<(usize, usize)> {
        if lookback == 0 || horizon == 0 {
            return Err(Error::InvalidParameter(
                "look-back and horizon must be positive".into(),
            ));
        }
        if layout.targets.is_empty() || layout.targets.iter().any(|&t| t >= layout.n_numeric) {
            return Err(Error::InvalidParameter("invalid target channel selection".into()));
        }
        Ok(match kind {
            VariantKind::DELinear => (
                horizon * layout.n_targets(),
                lookback * layout.embedding_width(),
            ),
            _ => (horizon, lookback),
        })
    }

    pub fn n_targets(&self) -> usize {
        self.layout.n_targets()
    }

    /// Columns read per forward: window length (or flattened embedding)
    /// plus the noise width.
    pub fn input_width(&self) -> usize {
        self.layers[0].in_dim() + self.noise_dim()
    }

    pub fn noise_dim(&self) -> usize {
        self.noise.as_ref().map_or(0, |n| n.ncols())
    }

    pub fn has_bias(&self) -> bool {
        self.layers[0].bias.is_some()
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weight.len() + l.bias.as_ref().map_or(0, |b| b.len()))
            .sum::<usize>()
            + self.noise.as_ref().map_or(0, |n| n.len())
    }

    /// Adds `noise_dim` zero-initialized noise columns. The output for a
    /// zero noise vector is unchanged.
    pub fn with_noise(mut self, noise_dim: usize) -> Self {
        self.noise = (noise_dim > 0).then(|| Array2::zeros((self.layers[0].out_dim(), noise_dim)));
        self
    }

    fn layer_names(&self) -> &'static [&'static str] {
        match self.kind {
            VariantKind::Linear | VariantKind::NLinear => &["linear"],
            VariantKind::DLinear => &["seasonal", "trend"],
            VariantKind::DELinear => &["embedded"],
        }
    }

    /// Mutable flat views of every parameter, named.
    pub fn parameters_mut(&mut self) -> Vec<(String, &mut [f64])> {
        let names = self.layer_names();
        let mut out = Vec::new();
        for (name, layer) in names.iter().zip(self.layers.iter_mut()) {
            out.push((
                format!("{name}.weight"),
                layer.weight.as_slice_mut().expect("standard layout"),
            ));
            if let Some(b) = layer.bias.as_mut() {
                out.push((format!("{name}.bias"), b.as_slice_mut().expect("standard layout")));
            }
        }
        if let Some(n) = self.noise.as_mut() {
            out.push(("noise.weight".into(), n.as_slice_mut().expect("standard layout")));
        }
        out
    }

    /// Batched forward pass. Returns `batch x horizon x n_targets`.
    ///
    /// `noise`, when given, is `batch x noise_dim`; a model without noise
    /// columns ignores it.
    pub fn forward(
        &self,
        windows: &[ModelWindow<'_>],
        noise: Option<ArrayView2<'_, f64>>,
    ) -> Result<(Array3<f64>, ForwardCache)> {
        for w in windows {
            w.check(self.lookback, &self.layout)?;
        }
        let batch = windows.len();
        let noise = match (&self.noise, noise) {
            (Some(wz), Some(z)) => {
                if z.dim() != (batch, wz.ncols()) {
                    return Err(Error::ShapeMismatch(format!(
                        "noise is {:?}, expected ({batch}, {})",
                        z.dim(),
                        wz.ncols()
                    )));
                }
                Some(z.to_owned())
            }
            _ => None,
        };
        let (out, design) = if self.kind.is_channel_independent() {
            self.forward_channelwise(windows, noise.as_ref())
        } else {
            self.forward_embedded(windows, noise.as_ref())
        };
        Ok((
            out,
            ForwardCache {
                batch,
                design,
                noise,
            },
        ))
    }

    /// Deterministic point forecast for one window (zero noise).
    pub fn predict(&self, window: &ModelWindow<'_>) -> Result<Array2<f64>> {
        let (out, _) = self.forward(std::slice::from_ref(window), None)?;
        Ok(out.index_axis_move(Axis(0), 0))
    }

    fn forward_channelwise(
        &self,
        windows: &[ModelWindow<'_>],
        noise: Option<&Array2<f64>>,
    ) -> (Array3<f64>, Vec<Array2<f64>>) {
        let nt = self.n_targets();
        let cols = windows.len() * nt;
        let s_len = self.lookback;
        let mut design = vec![Array2::zeros((s_len, cols))];
        let mut lasts = Array1::zeros(cols);
        if self.kind == VariantKind::DLinear {
            design.push(Array2::zeros((s_len, cols)));
        }
        for (b, w) in windows.iter().enumerate() {
            for (j, &ch) in self.layout.targets.iter().enumerate() {
                let c = b * nt + j;
                let x = w.numeric.column(ch);
                match self.kind {
                    VariantKind::Linear => design[0].column_mut(c).assign(&x),
                    VariantKind::NLinear => {
                        let last = x[s_len - 1];
                        lasts[c] = last;
                        design[0].column_mut(c).assign(&x.mapv(|v| v - last));
                    }
                    VariantKind::DLinear => {
                        trend_into(x, self.kernel, design[1].column_mut(c));
                        let (seasonal, trend) = design.split_at_mut(1);
                        let t = trend[0].column(c);
                        let mut sc = seasonal[0].column_mut(c);
                        for i in 0..s_len {
                            sc[i] = x[i] - t[i];
                        }
                    }
                    VariantKind::DELinear => unreachable!(),
                }
            }
        }
        let mut y = Array2::zeros((self.horizon, cols));
        for (layer, x) in self.layers.iter().zip(&design) {
            y += &layer.weight.dot(x);
            if let Some(bias) = &layer.bias {
                y += &bias.view().insert_axis(Axis(1));
            }
        }
        if self.kind == VariantKind::NLinear {
            y += &lasts.view().insert_axis(Axis(0));
        }
        if let (Some(wz), Some(z)) = (&self.noise, noise) {
            let shift = wz.dot(&z.t());
            for b in 0..windows.len() {
                for j in 0..nt {
                    let mut col = y.column_mut(b * nt + j);
                    col += &shift.column(b);
                }
            }
        }
        let mut out = Array3::zeros((windows.len(), self.horizon, nt));
        for b in 0..windows.len() {
            for j in 0..nt {
                out.slice_mut(s![b, .., j]).assign(&y.column(b * nt + j));
            }
        }
        (out, design)
    }

    fn forward_embedded(
        &self,
        windows: &[ModelWindow<'_>],
        noise: Option<&Array2<f64>>,
    ) -> (Array3<f64>, Vec<Array2<f64>>) {
        let layer = &self.layers[0];
        let mut x = Array2::zeros((layer.in_dim(), windows.len()));
        for (b, w) in windows.iter().enumerate() {
            let emb = embed_rows(w.numeric, w.categorical, w.temporal, self.kernel);
            x.column_mut(b)
                .assign(&ArrayView1::from(emb.as_slice().expect("standard layout")));
        }
        let mut y = layer.weight.dot(&x);
        if let Some(bias) = &layer.bias {
            y += &bias.view().insert_axis(Axis(1));
        }
        if let (Some(wz), Some(z)) = (&self.noise, noise) {
            y += &wz.dot(&z.t());
        }
        let nt = self.n_targets();
        let mut out = Array3::zeros((windows.len(), self.horizon, nt));
        for b in 0..windows.len() {
            let col = y.column(b);
            for t in 0..self.horizon {
                for j in 0..nt {
                    out[[b, t, j]] = col[t * nt + j];
                }
            }
        }
        (out, vec![x])
    }

    /// Parameter gradients given `dL/d output` (`batch x horizon x n_targets`).
    pub fn backward(&self, cache: &ForwardCache, grad_out: ArrayView3<'_, f64>) -> Result<Gradients> {
        let nt = self.n_targets();
        if grad_out.dim() != (cache.batch, self.horizon, nt) {
            return Err(Error::ShapeMismatch(format!(
                "output gradient is {:?}, expected ({}, {}, {nt})",
                grad_out.dim(),
                cache.batch,
                self.horizon
            )));
        }
        // Gradient in design-matrix layout: rows are outputs, columns match
        // the design matrix columns.
        let g = if self.kind.is_channel_independent() {
            let mut g = Array2::zeros((self.horizon, cache.batch * nt));
            for b in 0..cache.batch {
                for j in 0..nt {
                    g.column_mut(b * nt + j).assign(&grad_out.slice(s![b, .., j]));
                }
            }
            g
        } else {
            let mut g = Array2::zeros((self.horizon * nt, cache.batch));
            for b in 0..cache.batch {
                for t in 0..self.horizon {
                    for j in 0..nt {
                        g[[t * nt + j, b]] = grad_out[[b, t, j]];
                    }
                }
            }
            g
        };

        let mut grads = Gradients::default();
        let bias_grad = g.sum_axis(Axis(1));
        for ((name, layer), x) in self.layer_names().iter().zip(&self.layers).zip(&cache.design) {
            grads.push(format!("{name}.weight"), g.dot(&x.t()));
            if layer.bias.is_some() {
                grads.push(format!("{name}.bias"), bias_grad.iter().copied());
            }
        }
        if self.noise.is_some() {
            let nz = self.noise_dim();
            let dwz = match &cache.noise {
                Some(z) if self.kind.is_channel_independent() => {
                    let mut per_sample = Array2::zeros((self.horizon, cache.batch));
                    for b in 0..cache.batch {
                        let mut col = per_sample.column_mut(b);
                        for j in 0..nt {
                            col += &g.column(b * nt + j);
                        }
                    }
                    per_sample.dot(z)
                }
                Some(z) => g.dot(z),
                None => Array2::zeros((self.layers[0].out_dim(), nz)),
            };
            grads.push("noise.weight", dwz);
        }
        Ok(grads)
    }
}
