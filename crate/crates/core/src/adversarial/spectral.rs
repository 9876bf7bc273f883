use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

/// Floor for the estimated singular value; below it the matrix is left
/// unscaled.
pub const SIGMA_EPS: f64 = 1e-12;

fn normalized(x: Array1<f64>) -> Option<Array1<f64>> {
    let n = x.dot(&x).sqrt();
    (n > 0.0 && n.is_finite()).then(|| x / n)
}

/// Power-iteration vectors for one weight matrix (`u` spans the output
/// side, `v` the input side).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralState {
    pub u: Array1<f64>,
    pub v: Array1<f64>,
}

impl SpectralState {
    pub fn new(u: Array1<f64>, in_dim: usize) -> Self {
        let v = Array1::from_elem(in_dim, 1.0 / (in_dim.max(1) as f64).sqrt());
        Self { u, v }
    }

    /// `iters` rounds of `v = norm(W^T u)`, `u = norm(W v)`. A zero matrix
    /// leaves the vectors untouched.
    pub fn iterate(&mut self, w: ArrayView2<'_, f64>, iters: usize) {
        for _ in 0..iters {
            let Some(v) = normalized(w.t().dot(&self.u)) else { return };
            let Some(u) = normalized(w.dot(&v)) else { return };
            self.v = v;
            self.u = u;
        }
    }

    /// `u^T W v` with the stored vectors.
    pub fn sigma(&self, w: ArrayView2<'_, f64>) -> f64 {
        self.u.dot(&w.dot(&self.v))
    }
}

/// `W / sigma` and `sigma`, or `W` unchanged when `sigma` is below
/// [`SIGMA_EPS`].
pub fn normalize_with(w: ArrayView2<'_, f64>, state: &SpectralState) -> (Array2<f64>, f64) {
    let sigma = state.sigma(w);
    if sigma.abs() <= SIGMA_EPS {
        (w.to_owned(), SIGMA_EPS)
    } else {
        (w.mapv(|x| x / sigma), sigma)
    }
}

/// Power iteration then scaling. Returns the normalized matrix, the
/// updated `u`, and the estimate of the top singular value.
pub fn spectral_normalize(
    w: ArrayView2<'_, f64>,
    u: ArrayView1<'_, f64>,
    iters: usize,
) -> (Array2<f64>, Array1<f64>, f64) {
    let mut state = SpectralState::new(u.to_owned(), w.ncols());
    state.iterate(w, iters);
    let (wn, sigma) = normalize_with(w, &state);
    (wn, state.u, sigma)
}

/// Maps `dL/dW_hat` to `dL/dW` for `W_hat = W / (u^T W v)` with `u`, `v`
/// held constant.
pub fn backprop_normalized(
    grad_hat: ArrayView2<'_, f64>,
    w: ArrayView2<'_, f64>,
    state: &SpectralState,
    sigma: f64,
) -> Array2<f64> {
    if sigma <= SIGMA_EPS {
        return grad_hat.to_owned();
    }
    let inner: f64 = grad_hat.iter().zip(w.iter()).map(|(g, x)| g * x).sum();
    let coef = inner / (sigma * sigma);
    let mut out = grad_hat.mapv(|g| g / sigma);
    for (i, &ui) in state.u.iter().enumerate() {
        for (j, &vj) in state.v.iter().enumerate() {
            out[[i, j]] -= coef * ui * vj;
        }
    }
    out
}
