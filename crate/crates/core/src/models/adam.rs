use crate::error::{Error, Result};
use crate::models::variant::Gradients;

/// Bias-corrected Adam. Moment buffers are sized on the first step.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub step: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl AdamState {
    pub fn new(lr: f64) -> Self {
        Self::with_betas(lr, 0.9, 0.999)
    }

    pub fn with_betas(lr: f64, beta1: f64, beta2: f64) -> Self {
        Self {
            lr,
            beta1,
            beta2,
            eps: 1e-8,
            step: 0,
            m: Vec::new(),
            v: Vec::new(),
        }
    }

    /// Applies one update. `params` and `grads` must list the same buffers
    /// in the same order. Nothing is modified if any gradient is non-finite.
    pub fn step(&mut self, params: Vec<(String, &mut [f64])>, grads: &Gradients) -> Result<()> {
        if params.len() != grads.entries.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} parameter buffers but {} gradients",
                params.len(),
                grads.entries.len()
            )));
        }
        for ((name, p), (_, g)) in params.iter().zip(&grads.entries) {
            if p.len() != g.len() {
                return Err(Error::ShapeMismatch(format!(
                    "gradient for {name} has {} entries, parameter has {}",
                    g.len(),
                    p.len()
                )));
            }
            if g.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFiniteGradient(name.clone()));
            }
        }
        if self.m.is_empty() {
            self.m = grads.entries.iter().map(|(_, g)| vec![0.0; g.len()]).collect();
            self.v = self.m.clone();
        }
        self.step += 1;
        let c1 = 1.0 - self.beta1.powi(self.step as i32);
        let c2 = 1.0 - self.beta2.powi(self.step as i32);
        for (k, ((_, p), (_, g))) in params.into_iter().zip(&grads.entries).enumerate() {
            let (m, v) = (&mut self.m[k], &mut self.v[k]);
            for i in 0..g.len() {
                m[i] = self.beta1 * m[i] + (1.0 - self.beta1) * g[i];
                v[i] = self.beta2 * v[i] + (1.0 - self.beta2) * g[i] * g[i];
                let m_hat = m[i] / c1;
                let v_hat = v[i] / c2;
                p[i] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grads(values: &[f64]) -> Gradients {
        let mut g = Gradients::default();
        g.push("w", values.iter().copied());
        g
    }

    #[test]
    fn zero_gradient_leaves_parameters() {
        let mut a = AdamState::new(1e-3);
        let mut p = vec![1.0, -2.0];
        a.step(vec![("w".into(), &mut p)], &grads(&[0.0, 0.0])).unwrap();
        assert_eq!(p, vec![1.0, -2.0]);
        assert_eq!(a.step, 1);
    }

    #[test]
    fn first_step_is_signed_lr() {
        let mut a = AdamState::new(1e-3);
        let mut p = vec![0.0, 0.0];
        a.step(vec![("w".into(), &mut p)], &grads(&[0.3, -5.0])).unwrap();
        assert!((p[0] + 1e-3 * 0.3 / (0.3 + 1e-8)).abs() < 1e-18);
        assert!((p[1] - 1e-3 * 5.0 / (5.0 + 1e-8)).abs() < 1e-18);
    }

    #[test]
    fn two_steps_match_unrolled_scalar() {
        let (lr, b1, b2, eps, g) = (0.01, 0.9, 0.999, 1e-8, 0.7);
        let mut a = AdamState::new(lr);
        let mut p = vec![1.0];
        for _ in 0..2 {
            a.step(vec![("w".into(), &mut p)], &grads(&[g])).unwrap();
        }
        let mut x = 1.0;
        let (mut m, mut v) = (0.0, 0.0);
        for t in 1..=2 {
            m = b1 * m + (1.0 - b1) * g;
            v = b2 * v + (1.0 - b2) * g * g;
            let mh = m / (1.0 - f64::powi(b1, t));
            let vh = v / (1.0 - f64::powi(b2, t));
            x -= lr * mh / (vh.sqrt() + eps);
        }
        assert_eq!(p[0], x);
    }

    #[test]
    fn non_finite_gradient_names_parameter() {
        let mut a = AdamState::new(1e-3);
        let mut p = vec![0.0];
        let err = a.step(vec![("trend.weight".into(), &mut p)], &grads(&[f64::NAN])).unwrap_err();
        assert!(err.to_string().contains("trend.weight"));
        assert_eq!(p[0], 0.0);
        assert_eq!(a.step, 0);
    }
}
