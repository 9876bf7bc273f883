use std::ops::Range;

use ndarray::{s, Array2, ArrayView2};

use crate::error::{Error, Result};

/// One supervised sample: `lookback` input rows followed by `horizon`
/// target rows.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowedSample {
    pub start: usize,
    pub input: Array2<f64>,
    pub target: Array2<f64>,
}

/// Window start positions over a series, stored without copying rows.
///
/// Sample `k` reads inputs `[starts[k], starts[k] + lookback)` and targets
/// `[starts[k] + lookback + gap, starts[k] + lookback + gap + horizon)`.
/// A nonzero `gap` is used when training the k-th model of a direct
/// multi-step ensemble.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowIndex {
    pub lookback: usize,
    pub horizon: usize,
    pub gap: usize,
    pub starts: Vec<usize>,
}

impl WindowIndex {
    /// Dense windows over a series of `n_rows` rows.
    pub fn new(n_rows: usize, lookback: usize, horizon: usize, stride: usize) -> Result<Self> {
        Self::for_targets(n_rows, 0..n_rows, lookback, horizon, 0, stride)
    }

    /// Windows whose targets fall entirely inside `targets`. Inputs may
    /// reach back before `targets.start`, so a validation or test split
    /// can use the tail of the preceding split as context.
    pub fn for_targets(
        n_rows: usize,
        targets: Range<usize>,
        lookback: usize,
        horizon: usize,
        gap: usize,
        stride: usize,
    ) -> Result<Self> {
        if lookback == 0 || horizon == 0 || stride == 0 {
            return Err(Error::InvalidParameter(
                "look-back, horizon and stride must be positive".into(),
            ));
        }
        let span = lookback + gap + horizon;
        let end = targets.end.min(n_rows);
        let first = targets.start.saturating_sub(lookback + gap);
        if end < first + span {
            return Err(Error::TooShort {
                len: end - first,
                required: span,
            });
        }
        let starts = (first..=end - span).step_by(stride).collect();
        Ok(Self {
            lookback,
            horizon,
            gap,
            starts,
        })
    }

    pub fn len(&self) -> usize {
        self.starts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.starts.is_empty()
    }

    pub fn input_rows(&self, k: usize) -> Range<usize> {
        let s = self.starts[k];
        s..s + self.lookback
    }

    pub fn target_rows(&self, k: usize) -> Range<usize> {
        let s = self.starts[k] + self.lookback + self.gap;
        s..s + self.horizon
    }
}

/// Materializes sliding windows over `series` (rows are time steps);
/// inputs and targets carry every column.
pub fn make_windows(
    series: ArrayView2<'_, f64>,
    lookback: usize,
    horizon: usize,
    stride: usize,
) -> Result<Vec<WindowedSample>> {
    let index = WindowIndex::new(series.nrows(), lookback, horizon, stride)?;
    Ok((0..index.len())
        .map(|k| WindowedSample {
            start: index.starts[k],
            input: series.slice(s![index.input_rows(k), ..]).to_owned(),
            target: series.slice(s![index.target_rows(k), ..]).to_owned(),
        })
        .collect())
}
