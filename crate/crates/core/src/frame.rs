//! Numeric view of a prepared table that the forecasters read windows from.

use std::ops::Range;

use chrono::NaiveDateTime;
use ndarray::{s, Array2, ArrayView2};

use crate::dataset::{TimeTable, WindowIndex};
use crate::decompose::{
    check_kernel, embedding_width, extract_temporal, CategoricalEncoder, ChannelMap,
    TEMPORAL_WIDTH,
};
use crate::error::{Error, Result};

/// Column layout a model was built for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputLayout {
    /// Number of numeric columns in the frame.
    pub n_numeric: usize,
    /// Total width of the encoded categorical block.
    pub cat_width: usize,
    /// Indices into the numeric columns that are forecast.
    pub targets: Vec<usize>,
}

impl InputLayout {
    pub fn n_targets(&self) -> usize {
        self.targets.len()
    }

    pub fn embedding_width(&self) -> usize {
        embedding_width(self.n_numeric, self.cat_width)
    }
}

/// A prepared table as dense blocks: numeric values, encoded categoricals
/// and temporal features, one row per timestep.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureFrame {
    pub datetime_name: String,
    pub timestamps: Vec<NaiveDateTime>,
    pub numeric_names: Vec<String>,
    pub numeric: Array2<f64>,
    pub encoders: Vec<CategoricalEncoder>,
    pub categorical: Array2<f64>,
    pub temporal: Array2<f64>,
    pub targets: Vec<usize>,
    /// The target columns of `numeric`, copied contiguous.
    pub target_values: Array2<f64>,
    pub kernel: usize,
}

impl FeatureFrame {
    /// `t` must be imputed and normalized. An empty `target_names` selects
    /// every numeric column.
    pub fn from_table(
        t: &TimeTable,
        encoders: &[CategoricalEncoder],
        target_names: &[String],
        kernel: usize,
    ) -> Result<Self> {
        check_kernel(kernel)?;
        if t.has_missing() {
            return Err(Error::InvalidParameter(
                "table must be imputed before building features".into(),
            ));
        }
        let numeric_names: Vec<String> = t.numeric_names().into_iter().map(String::from).collect();
        if numeric_names.is_empty() {
            return Err(Error::InvalidParameter("table has no numeric columns".into()));
        }
        let targets: Vec<usize> = if target_names.is_empty() {
            (0..numeric_names.len()).collect()
        } else {
            target_names
                .iter()
                .map(|name| {
                    numeric_names
                        .iter()
                        .position(|n| n == name)
                        .ok_or_else(|| Error::UnknownColumn(name.clone()))
                })
                .collect::<Result<_>>()?
        };

        let n = t.len();
        let mut numeric = Array2::zeros((n, numeric_names.len()));
        for (j, name) in numeric_names.iter().enumerate() {
            numeric
                .column_mut(j)
                .assign(&ndarray::aview1(t.numeric(name).expect("numeric column")));
        }
        let cat_width = encoders.iter().map(CategoricalEncoder::width).sum();
        let mut categorical = Array2::zeros((n, cat_width));
        let mut offset = 0;
        for e in encoders {
            let values = t
                .categorical(&e.column)
                .ok_or_else(|| Error::UnknownColumn(e.column.clone()))?;
            categorical
                .slice_mut(s![.., offset..offset + e.width()])
                .assign(&e.encode(values).encoded);
            offset += e.width();
        }
        let temporal = extract_temporal(t.timestamps()).values;
        let target_values = numeric.select(ndarray::Axis(1), &targets);
        Ok(Self {
            datetime_name: t.datetime_name().to_owned(),
            timestamps: t.timestamps().to_vec(),
            numeric_names,
            numeric,
            encoders: encoders.to_vec(),
            categorical,
            temporal,
            targets,
            target_values,
            kernel,
        })
    }

    /// Assembles a frame from raw blocks (used for forecasting contexts).
    pub fn from_blocks(
        template: &FeatureFrame,
        timestamps: Vec<NaiveDateTime>,
        numeric: Array2<f64>,
        categorical: Array2<f64>,
    ) -> Self {
        let temporal = extract_temporal(&timestamps).values;
        let target_values = numeric.select(ndarray::Axis(1), &template.targets);
        Self {
            datetime_name: template.datetime_name.clone(),
            timestamps,
            numeric_names: template.numeric_names.clone(),
            numeric,
            encoders: template.encoders.clone(),
            categorical,
            temporal,
            targets: template.targets.clone(),
            target_values,
            kernel: template.kernel,
        }
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    /// Owned copy of a row range.
    pub fn rows(&self, rows: Range<usize>) -> FeatureFrame {
        FeatureFrame {
            datetime_name: self.datetime_name.clone(),
            timestamps: self.timestamps[rows.clone()].to_vec(),
            numeric_names: self.numeric_names.clone(),
            numeric: self.numeric.slice(s![rows.clone(), ..]).to_owned(),
            encoders: self.encoders.clone(),
            categorical: self.categorical.slice(s![rows.clone(), ..]).to_owned(),
            temporal: self.temporal.slice(s![rows.clone(), ..]).to_owned(),
            targets: self.targets.clone(),
            target_values: self.target_values.slice(s![rows, ..]).to_owned(),
            kernel: self.kernel,
        }
    }

    pub fn layout(&self) -> InputLayout {
        InputLayout {
            n_numeric: self.numeric.ncols(),
            cat_width: self.categorical.ncols(),
            targets: self.targets.clone(),
        }
    }

    pub fn target_names(&self) -> Vec<String> {
        self.targets.iter().map(|&i| self.numeric_names[i].clone()).collect()
    }

    pub fn channel_map(&self) -> ChannelMap {
        ChannelMap::new(&self.numeric_names, &self.encoders, &self.datetime_name)
    }

    pub fn window(&self, rows: Range<usize>) -> ModelWindow<'_> {
        ModelWindow {
            numeric: self.numeric.slice(s![rows.clone(), ..]),
            categorical: self.categorical.slice(s![rows.clone(), ..]),
            temporal: self.temporal.slice(s![rows, ..]),
        }
    }
}

/// Borrowed look-back window handed to a forecaster.
#[derive(Debug, Clone, Copy)]
pub struct ModelWindow<'a> {
    pub numeric: ArrayView2<'a, f64>,
    pub categorical: ArrayView2<'a, f64>,
    pub temporal: ArrayView2<'a, f64>,
}

impl ModelWindow<'_> {
    pub fn len(&self) -> usize {
        self.numeric.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub(crate) fn check(&self, lookback: usize, layout: &InputLayout) -> Result<()> {
        if self.numeric.nrows() != lookback
            || self.categorical.nrows() != lookback
            || self.temporal.nrows() != lookback
        {
            return Err(Error::ShapeMismatch(format!(
                "window has {} rows, model expects {lookback}",
                self.numeric.nrows()
            )));
        }
        if self.numeric.ncols() != layout.n_numeric
            || self.categorical.ncols() != layout.cat_width
            || self.temporal.ncols() != TEMPORAL_WIDTH
        {
            return Err(Error::ShapeMismatch(format!(
                "window has {} numeric / {} categorical columns, model expects {} / {}",
                self.numeric.ncols(),
                self.categorical.ncols(),
                layout.n_numeric,
                layout.cat_width
            )));
        }
        Ok(())
    }
}

/// Supervised windows over a frame.
#[derive(Debug, Clone)]
pub struct WindowSet<'a> {
    pub frame: &'a FeatureFrame,
    pub index: WindowIndex,
}

impl<'a> WindowSet<'a> {
    pub fn new(frame: &'a FeatureFrame, index: WindowIndex) -> Self {
        Self { frame, index }
    }

    /// Windows whose targets lie in `targets` (rows of the frame).
    pub fn for_split(
        frame: &'a FeatureFrame,
        targets: Range<usize>,
        lookback: usize,
        horizon: usize,
        stride: usize,
    ) -> Result<Self> {
        Self::for_split_with_gap(frame, targets, lookback, horizon, 0, stride)
    }

    /// As [`Self::for_split`] with `gap` rows skipped between input and
    /// target, for the later models of a direct multi-step ensemble.
    pub fn for_split_with_gap(
        frame: &'a FeatureFrame,
        targets: Range<usize>,
        lookback: usize,
        horizon: usize,
        gap: usize,
        stride: usize,
    ) -> Result<Self> {
        let index = WindowIndex::for_targets(frame.len(), targets, lookback, horizon, gap, stride)?;
        Ok(Self { frame, index })
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn lookback(&self) -> usize {
        self.index.lookback
    }

    pub fn horizon(&self) -> usize {
        self.index.horizon
    }

    pub fn window(&self, k: usize) -> ModelWindow<'a> {
        self.frame.window(self.index.input_rows(k))
    }

    /// `horizon x n_targets` ground truth of sample `k`.
    pub fn target(&self, k: usize) -> ArrayView2<'a, f64> {
        self.frame.target_values.slice(s![self.index.target_rows(k), ..])
    }

    /// `lookback x n_targets` history of the target columns for sample `k`.
    pub fn history(&self, k: usize) -> ArrayView2<'a, f64> {
        self.frame.target_values.slice(s![self.index.input_rows(k), ..])
    }
}
