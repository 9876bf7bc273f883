use ndarray::{ArrayView, Dimension, Zip};

use crate::error::{Error, Result};

fn check<D: Dimension>(y: &ArrayView<'_, f64, D>, y_hat: &ArrayView<'_, f64, D>) -> Result<()> {
    if y.shape() != y_hat.shape() {
        return Err(Error::ShapeMismatch(format!(
            "targets are {:?}, predictions {:?}",
            y.shape(),
            y_hat.shape()
        )));
    }
    if y.is_empty() {
        return Err(Error::InvalidParameter("cannot score empty arrays".into()));
    }
    Ok(())
}

/// Mean absolute error over every entry.
pub fn mae<D: Dimension>(y: ArrayView<'_, f64, D>, y_hat: ArrayView<'_, f64, D>) -> Result<f64> {
    check(&y, &y_hat)?;
    let mut sum = 0.0;
    Zip::from(&y).and(&y_hat).for_each(|a, b| sum += (a - b).abs());
    Ok(sum / y.len() as f64)
}

/// Mean squared error over every entry.
pub fn mse<D: Dimension>(y: ArrayView<'_, f64, D>, y_hat: ArrayView<'_, f64, D>) -> Result<f64> {
    check(&y, &y_hat)?;
    let mut sum = 0.0;
    Zip::from(&y).and(&y_hat).for_each(|a, b| sum += (a - b) * (a - b));
    Ok(sum / y.len() as f64)
}

/// `100 * (best_other - ours) / best_other`.
pub fn improvement_pct(ours: f64, best_other: f64) -> Result<f64> {
    if !(best_other > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "baseline error must be positive, got {best_other}"
        )));
    }
    Ok(100.0 * (best_other - ours) / best_other)
}
