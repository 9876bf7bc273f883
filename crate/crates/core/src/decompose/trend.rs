use ndarray::{Array2, ArrayView1, ArrayView2, ArrayViewMut1, Axis, Zip};

use crate::error::{Error, Result};

pub const DEFAULT_KERNEL: usize = 25;

pub(crate) fn check_kernel(kernel: usize) -> Result<()> {
    if kernel == 0 || kernel.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "pooling kernel must be odd and positive, got {kernel}"
        )));
    }
    Ok(())
}

/// Centered moving average of width `kernel` over `x`, padded by
/// replicating the edge values so the output keeps the input length.
pub fn extract_trend(x: &[f64], kernel: usize) -> Result<Vec<f64>> {
    check_kernel(kernel)?;
    if x.is_empty() {
        return Err(Error::InvalidParameter("cannot pool an empty series".into()));
    }
    let mut out = vec![0.0; x.len()];
    trend_into(ArrayView1::from(x), kernel, ArrayViewMut1::from(&mut out[..]));
    Ok(out)
}

/// Kernel must already be validated. Summation runs left to right over
/// the padded window before one division, the same order as a naive
/// pooled average, so results are reproducible element by element.
pub(crate) fn trend_into(x: ArrayView1<'_, f64>, kernel: usize, mut out: ArrayViewMut1<'_, f64>) {
    let n = x.len() as isize;
    let half = (kernel / 2) as isize;
    let k = kernel as f64;
    for i in 0..n {
        let mut sum = 0.0;
        for j in (i - half)..=(i + half) {
            sum += x[j.clamp(0, n - 1) as usize];
        }
        out[i as usize] = sum / k;
    }
}

/// `x - trend`, elementwise.
pub fn extract_seasonality(x: &[f64], trend: &[f64]) -> Result<Vec<f64>> {
    if x.len() != trend.len() {
        return Err(Error::ShapeMismatch(format!(
            "series has {} values but trend has {}",
            x.len(),
            trend.len()
        )));
    }
    Ok(x.iter().zip(trend).map(|(a, b)| a - b).collect())
}

/// Trend and seasonal parts of a multichannel series (rows are time steps).
#[derive(Debug, Clone, PartialEq)]
pub struct DecomposedSeries {
    pub trend: Array2<f64>,
    pub seasonal: Array2<f64>,
    pub kernel: usize,
}

pub fn decompose(x: ArrayView2<'_, f64>, kernel: usize) -> Result<DecomposedSeries> {
    check_kernel(kernel)?;
    if x.nrows() == 0 {
        return Err(Error::InvalidParameter("cannot pool an empty series".into()));
    }
    let (trend, seasonal) = decompose_unchecked(x, kernel);
    Ok(DecomposedSeries {
        trend,
        seasonal,
        kernel,
    })
}

pub(crate) fn decompose_unchecked(x: ArrayView2<'_, f64>, kernel: usize) -> (Array2<f64>, Array2<f64>) {
    let mut trend = Array2::zeros(x.raw_dim());
    for (col, out) in x.axis_iter(Axis(1)).zip(trend.axis_iter_mut(Axis(1))) {
        trend_into(col, kernel, out);
    }
    let mut seasonal = Array2::zeros(x.raw_dim());
    Zip::from(&mut seasonal)
        .and(&x)
        .and(&trend)
        .for_each(|s, &v, &t| *s = v - t);
    (trend, seasonal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_force(x: &[f64], kernel: usize) -> Vec<f64> {
        let half = kernel / 2;
        let mut padded = vec![x[0]; half];
        padded.extend_from_slice(x);
        padded.extend(std::iter::repeat_n(*x.last().unwrap(), half));
        (0..x.len())
            .map(|i| padded[i..i + kernel].iter().sum::<f64>() / kernel as f64)
            .collect()
    }

    #[test]
    fn constant_series() {
        assert_eq!(extract_trend(&[5.0; 5], 3).unwrap(), vec![5.0; 5]);
        let s = extract_seasonality(&[5.0; 5], &[5.0; 5]).unwrap();
        assert_eq!(s, vec![0.0; 5]);
    }

    #[test]
    fn short_ramp_against_oracle() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let oracle = brute_force(&x, 3);
        let expected = [4.0 / 3.0, 2.0, 3.0, 4.0, 14.0 / 3.0];
        for (a, b) in oracle.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-15);
        }
        let trend = extract_trend(&x, 3).unwrap();
        assert_eq!(trend, oracle);
        let seasonal = extract_seasonality(&x, &trend).unwrap();
        let expected = [-1.0 / 3.0, 0.0, 0.0, 0.0, 1.0 / 3.0];
        for (a, b) in seasonal.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn ramp_interior_is_exact() {
        let x: Vec<f64> = (0..60).map(|i| i as f64).collect();
        let trend = extract_trend(&x, 25).unwrap();
        for i in 12..=(60 - 13) {
            assert_eq!(trend[i], x[i]);
        }
    }

    #[test]
    fn kernel_one_is_identity() {
        let x = [0.3, -1.2, 7.5];
        assert_eq!(extract_trend(&x, 1).unwrap(), x.to_vec());
        let d = decompose(ndarray::arr2(&[[0.3], [-1.2], [7.5]]).view(), 1).unwrap();
        assert!(d.seasonal.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn invalid_kernels() {
        assert!(extract_trend(&[1.0], 4).is_err());
        assert!(extract_trend(&[1.0], 0).is_err());
        assert!(extract_seasonality(&[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn kernel_longer_than_series() {
        let x = [1.0, 3.0];
        assert_eq!(extract_trend(&x, 7).unwrap(), brute_force(&x, 7));
    }

    #[test]
    fn interior_shift_equivariance() {
        let x: Vec<f64> = (0..80).map(|i| ((i * 37) % 11) as f64 * 0.25).collect();
        let shift = 5;
        let shifted: Vec<f64> = x[shift..].to_vec();
        let a = extract_trend(&x, 25).unwrap();
        let b = extract_trend(&shifted, 25).unwrap();
        for i in 12..(shifted.len() - 12) {
            assert!((a[i + shift] - b[i]).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn reconstruction(x in proptest::collection::vec(-100.0f64..100.0, 1..200),
                          kernel in prop_oneof![Just(1usize), Just(3), Just(25)]) {
            let t = extract_trend(&x, kernel).unwrap();
            let s = extract_seasonality(&x, &t).unwrap();
            for i in 0..x.len() {
                prop_assert!((t[i] + s[i] - x[i]).abs() <= 1e-12);
            }
        }
    }
}
