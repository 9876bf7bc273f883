use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2, ArrayView2};
use rand::Rng;

use crate::error::{Error, Result};

/// The four linear forecaster variants. Declaration order is the
/// tie-break preference used by model selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VariantKind {
    Linear,
    NLinear,
    DLinear,
    DELinear,
}

impl VariantKind {
    pub const ALL: [VariantKind; 4] = [
        VariantKind::Linear,
        VariantKind::NLinear,
        VariantKind::DLinear,
        VariantKind::DELinear,
    ];

    pub fn name(self) -> &'static str {
        match self {
            VariantKind::Linear => "Linear",
            VariantKind::NLinear => "NLinear",
            VariantKind::DLinear => "DLinear",
            VariantKind::DELinear => "DELinear",
        }
    }

    pub(crate) fn code(self) -> u8 {
        self as u8
    }

    pub(crate) fn from_code(code: u8) -> Option<Self> {
        Self::ALL.get(code as usize).copied()
    }

    /// Channel-independent variants share one weight matrix across all
    /// target channels; DELinear mixes channels.
    pub fn is_channel_independent(self) -> bool {
        !matches!(self, VariantKind::DELinear)
    }
}

impl fmt::Display for VariantKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for VariantKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "linear" => Ok(VariantKind::Linear),
            "nlinear" => Ok(VariantKind::NLinear),
            "dlinear" => Ok(VariantKind::DLinear),
            "delinear" => Ok(VariantKind::DELinear),
            other => Err(Error::Config(format!("unknown model variant `{other}`"))),
        }
    }
}

/// A dense `out x in` weight matrix with optional bias.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearWeights {
    pub weight: Array2<f64>,
    pub bias: Option<Array1<f64>>,
}

impl LinearWeights {
    pub fn new(weight: Array2<f64>, bias: Option<Array1<f64>>) -> Result<Self> {
        if let Some(b) = &bias {
            if b.len() != weight.nrows() {
                return Err(Error::ShapeMismatch(format!(
                    "bias has {} entries for {} outputs",
                    b.len(),
                    weight.nrows()
                )));
            }
        }
        Ok(Self { weight, bias })
    }

    pub fn zeros(out_dim: usize, in_dim: usize, bias: bool) -> Self {
        Self {
            weight: Array2::zeros((out_dim, in_dim)),
            bias: bias.then(|| Array1::zeros(out_dim)),
        }
    }

    /// Uniform in `[-1/sqrt(in_dim), 1/sqrt(in_dim)]`, weights then bias.
    pub fn uniform<R: Rng>(out_dim: usize, in_dim: usize, bias: bool, rng: &mut R) -> Self {
        let bound = 1.0 / (in_dim.max(1) as f64).sqrt();
        let weight = Array2::from_shape_simple_fn((out_dim, in_dim), || rng.random_range(-bound..=bound));
        let bias = bias.then(|| Array1::from_shape_simple_fn(out_dim, || rng.random_range(-bound..=bound)));
        Self { weight, bias }
    }

    pub fn out_dim(&self) -> usize {
        self.weight.nrows()
    }

    pub fn in_dim(&self) -> usize {
        self.weight.ncols()
    }

    /// `W x + b`.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.in_dim() {
            return Err(Error::ShapeMismatch(format!(
                "input has length {}, weights expect {}",
                x.len(),
                self.in_dim()
            )));
        }
        let mut y = self.weight.dot(&ndarray::aview1(x));
        if let Some(b) = &self.bias {
            y += b;
        }
        Ok(y.to_vec())
    }
}

/// `W x + b` on one variable's look-back window.
pub fn forward_linear(w: &LinearWeights, x: &[f64]) -> Result<Vec<f64>> {
    w.apply(x)
}

/// `W (x - x_last) + b + x_last`.
pub fn forward_nlinear(w: &LinearWeights, x: &[f64]) -> Result<Vec<f64>> {
    let last = *x
        .last()
        .ok_or_else(|| Error::ShapeMismatch("empty input window".into()))?;
    let shifted: Vec<f64> = x.iter().map(|v| v - last).collect();
    Ok(w.apply(&shifted)?.into_iter().map(|v| v + last).collect())
}

/// `W vec(D) + b` over a row-major flattened embedded window, reshaped to
/// `horizon x n_targets`.
pub fn forward_delinear(
    w: &LinearWeights,
    embedded: ArrayView2<'_, f64>,
    n_targets: usize,
) -> Result<Array2<f64>> {
    if n_targets == 0 || !w.out_dim().is_multiple_of(n_targets) {
        return Err(Error::ShapeMismatch(format!(
            "{} outputs do not divide into {n_targets} targets",
            w.out_dim()
        )));
    }
    let flat: Vec<f64> = embedded.iter().copied().collect();
    let y = w.apply(&flat)?;
    Ok(Array2::from_shape_vec((w.out_dim() / n_targets, n_targets), y).expect("sizes checked"))
}

/// `W_s x_s + b_s + W_tr x_tr + b_tr`.
pub fn forward_dlinear(
    seasonal: &LinearWeights,
    trend: &LinearWeights,
    x_seasonal: &[f64],
    x_trend: &[f64],
) -> Result<Vec<f64>> {
    if x_seasonal.len() != x_trend.len() {
        return Err(Error::ShapeMismatch(format!(
            "seasonal part has length {}, trend part {}",
            x_seasonal.len(),
            x_trend.len()
        )));
    }
    let ys = seasonal.apply(x_seasonal)?;
    let yt = trend.apply(x_trend)?;
    if ys.len() != yt.len() {
        return Err(Error::ShapeMismatch("seasonal and trend horizons differ".into()));
    }
    Ok(ys.iter().zip(&yt).map(|(a, b)| a + b).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{arr1, arr2, Array2};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn lw(w: Array2<f64>, b: Option<Vec<f64>>) -> LinearWeights {
        LinearWeights::new(w, b.map(Array1::from)).unwrap()
    }

    #[test]
    fn linear_examples() {
        let x = [0.5, -1.0, 2.0];
        assert_eq!(forward_linear(&lw(Array2::eye(3), None), &x).unwrap(), x.to_vec());
        let c = forward_linear(&lw(Array2::zeros((2, 3)), Some(vec![4.0, 4.0])), &x).unwrap();
        assert_eq!(c, vec![4.0, 4.0]);
        let y = forward_linear(&lw(arr2(&[[1.0, 1.0], [0.0, 2.0]]), None), &[3.0, 4.0]).unwrap();
        assert_eq!(y, vec![7.0, 8.0]);
        assert!(forward_linear(&lw(Array2::eye(2), None), &x).is_err());
    }

    #[test]
    fn nlinear_examples() {
        let x = [1.0, 5.0, 3.0];
        let z = forward_nlinear(&lw(Array2::zeros((4, 3)), None), &x).unwrap();
        assert_eq!(z, vec![3.0; 4]);
        assert_eq!(forward_nlinear(&lw(Array2::eye(3), None), &x).unwrap(), x.to_vec());
        let y = forward_nlinear(&lw(arr2(&[[2.0, 0.0]]), None), &[1.0, 3.0]).unwrap();
        assert_eq!(y, vec![-1.0]);
    }

    #[test]
    fn delinear_examples() {
        let emb = arr2(&[[0.25, 0.5]]);
        let zero = forward_delinear(&LinearWeights::zeros(1, 2, true), emb.view(), 1).unwrap();
        assert_eq!(zero, arr2(&[[0.0]]));
        // trend + seasonal of one numeric gives back the value
        let y = forward_delinear(&lw(arr2(&[[1.0, 1.0]]), None), emb.view(), 1).unwrap();
        assert_eq!(y[[0, 0]], 0.75);
    }

    #[test]
    fn delinear_matches_dense_matvec() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (s, d, t, nt) = (3, 4, 2, 2);
        let w = LinearWeights::uniform(t * nt, s * d, true, &mut rng);
        let emb = Array2::from_shape_fn((s, d), |(i, j)| (i * d + j) as f64 * 0.1 - 0.3);
        let got = forward_delinear(&w, emb.view(), nt).unwrap();
        for tt in 0..t {
            for j in 0..nt {
                let row = tt * nt + j;
                let mut acc = w.bias.as_ref().unwrap()[row];
                for i in 0..s {
                    for c in 0..d {
                        acc += w.weight[[row, i * d + c]] * emb[[i, c]];
                    }
                }
                assert!((got[[tt, j]] - acc).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn dlinear_examples() {
        let xs = [0.5, -0.5, 0.25];
        let xt = [1.0, 1.5, 2.0];
        let id = lw(Array2::eye(3), None);
        let y = forward_dlinear(&id, &id, &xs, &xt).unwrap();
        assert_eq!(y, vec![1.5, 1.0, 2.25]);
        let zero = LinearWeights::zeros(3, 3, false);
        assert_eq!(forward_dlinear(&zero, &id, &xs, &xt).unwrap(), xt.to_vec());
        assert!(forward_dlinear(&id, &id, &xs, &xt[..2]).is_err());
    }

    #[test]
    fn dlinear_matches_two_matvecs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let ws = LinearWeights::uniform(3, 5, true, &mut rng);
        let wt = LinearWeights::uniform(3, 5, true, &mut rng);
        let xs: Vec<f64> = (0..5).map(|i| (i as f64).sin()).collect();
        let xt: Vec<f64> = (0..5).map(|i| i as f64 * 0.2).collect();
        let got = forward_dlinear(&ws, &wt, &xs, &xt).unwrap();
        for r in 0..3 {
            let mut a = ws.bias.as_ref().unwrap()[r] + wt.bias.as_ref().unwrap()[r];
            for c in 0..5 {
                a += ws.weight[[r, c]] * xs[c] + wt.weight[[r, c]] * xt[c];
            }
            assert!((got[r] - a).abs() < 1e-14);
        }
    }

    #[test]
    fn uniform_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let w = LinearWeights::uniform(8, 16, true, &mut rng);
        assert!(w.weight.iter().all(|v| v.abs() <= 0.25));
        assert!(w.bias.unwrap().iter().all(|v| v.abs() <= 0.25));
        assert!(LinearWeights::new(Array2::zeros((2, 2)), Some(arr1(&[1.0]))).is_err());
    }

    #[test]
    fn kind_names_round_trip() {
        for k in VariantKind::ALL {
            assert_eq!(k.name().parse::<VariantKind>().unwrap(), k);
            assert_eq!(VariantKind::from_code(k.code()), Some(k));
        }
        assert!("transformer".parse::<VariantKind>().is_err());
    }
}
