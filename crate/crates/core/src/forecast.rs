//! Single-step, iterative and direct multi-step forecasting, and test-split
//! evaluation.

use std::fmt;
use std::ops::Range;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use chrono::{Duration, NaiveDateTime};
use ndarray::{s, Array2, Axis};
use rayon::prelude::*;

use crate::dataset::NormalizationParams;
use crate::decompose::temporal_row;
use crate::error::{Error, Result};
use crate::frame::{FeatureFrame, ModelWindow};
use crate::models::ModelVariant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ForecastMode {
    Single,
    #[default]
    Iterative,
    Direct,
}

impl fmt::Display for ForecastMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ForecastMode::Single => "single",
            ForecastMode::Iterative => "iterative",
            ForecastMode::Direct => "direct",
        })
    }
}

impl FromStr for ForecastMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "single" => Ok(ForecastMode::Single),
            "iterative" => Ok(ForecastMode::Iterative),
            "direct" => Ok(ForecastMode::Direct),
            other => Err(Error::Config(format!("unknown forecast mode `{other}`"))),
        }
    }
}

/// Forecast rows for the target columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Forecast {
    pub timestamps: Vec<NaiveDateTime>,
    pub columns: Vec<String>,
    /// `steps x n_targets`.
    pub values: Array2<f64>,
}

impl Forecast {
    /// Maps values back to original units.
    pub fn denormalize(&self, params: &NormalizationParams) -> Result<Forecast> {
        let mut values = self.values.clone();
        for (j, name) in self.columns.iter().enumerate() {
            let c = params.get(name).ok_or_else(|| Error::UnknownColumn(name.clone()))?;
            values.column_mut(j).mapv_inplace(|v| params.inverse_value(c, v));
        }
        Ok(Forecast {
            values,
            ..self.clone()
        })
    }

    /// CSV with an ISO-8601 timestamp column followed by the targets.
    pub fn write_csv(&self, path: &Path, datetime_name: &str) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => Error::Config(format!("{other:?}")),
        })?;
        let mut header = vec![datetime_name.to_owned()];
        header.extend(self.columns.iter().cloned());
        w.write_record(&header)?;
        for (ts, row) in self.timestamps.iter().zip(self.values.rows()) {
            let mut rec = vec![ts.format("%Y-%m-%dT%H:%M:%S").to_string()];
            rec.extend(row.iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// Median spacing of consecutive timestamps.
pub fn median_interval(ts: &[NaiveDateTime]) -> Option<Duration> {
    let mut gaps: Vec<i64> = ts.windows(2).map(|w| (w[1] - w[0]).num_seconds()).collect();
    if gaps.is_empty() {
        return None;
    }
    gaps.sort_unstable();
    let mid = gaps.len() / 2;
    let secs = if gaps.len() % 2 == 1 {
        gaps[mid]
    } else {
        (gaps[mid - 1] + gaps[mid]) / 2
    };
    (secs > 0).then(|| Duration::seconds(secs))
}

/// One model forward on a window; the model must forecast one step.
pub fn predict_single(model: &ModelVariant, window: &ModelWindow<'_>) -> Result<Array2<f64>> {
    if model.horizon != 1 {
        return Err(Error::InvalidParameter(format!(
            "single-step forecasting needs a one-step model, this one forecasts {} steps",
            model.horizon
        )));
    }
    model.predict(window)
}

fn future_stamps(last: NaiveDateTime, interval: Duration, n: usize) -> Vec<NaiveDateTime> {
    (1..=n as i32).map(|i| last + interval * i).collect()
}

fn require_history(model: &ModelVariant, context: &FeatureFrame) -> Result<()> {
    if context.len() < model.lookback {
        return Err(Error::TooShort {
            len: context.len(),
            required: model.lookback,
        });
    }
    if context.layout() != model.layout {
        return Err(Error::ShapeMismatch(format!(
            "data has {} numeric / {} categorical columns, model was built for {} / {}",
            context.numeric.ncols(),
            context.categorical.ncols(),
            model.layout.n_numeric,
            model.layout.cat_width
        )));
    }
    Ok(())
}

/// `steps` rounds of: forecast `T` rows from the last `S`, append them,
/// slide. Appended rows carry the predicted targets, hold every other
/// numeric and categorical value at its last observation, and get temporal
/// features from timestamps spaced by `interval`.
pub fn predict_iterative_with(
    model: &ModelVariant,
    context: &FeatureFrame,
    steps: usize,
    interval: Duration,
) -> Result<Forecast> {
    if steps == 0 {
        return Err(Error::InvalidParameter("iterative forecasting needs at least one step".into()));
    }
    require_history(model, context)?;
    let (s_len, t_len) = (model.lookback, model.horizon);
    let total = s_len + steps * t_len;
    let start = context.len() - s_len;
    let f = context.numeric.ncols();
    let c = context.categorical.ncols();

    let mut numeric = Array2::zeros((total, f));
    let mut categorical = Array2::zeros((total, c));
    let mut temporal = Array2::zeros((total, context.temporal.ncols()));
    numeric.slice_mut(s![..s_len, ..]).assign(&context.numeric.slice(s![start.., ..]));
    categorical.slice_mut(s![..s_len, ..]).assign(&context.categorical.slice(s![start.., ..]));
    temporal.slice_mut(s![..s_len, ..]).assign(&context.temporal.slice(s![start.., ..]));
    let last = *context.timestamps.last().expect("history checked");
    let stamps = future_stamps(last, interval, steps * t_len);

    for (i, ts) in stamps.iter().enumerate() {
        let row = s_len + i;
        let prev_num = numeric.row(row - 1).to_owned();
        numeric.row_mut(row).assign(&prev_num);
        let prev_cat = categorical.row(row - 1).to_owned();
        categorical.row_mut(row).assign(&prev_cat);
        temporal.row_mut(row).assign(&ndarray::aview1(&temporal_row(ts)));
    }
    let mut values = Array2::zeros((steps * t_len, model.n_targets()));
    for h in 0..steps {
        let off = h * t_len;
        let window = ModelWindow {
            numeric: numeric.slice(s![off..off + s_len, ..]),
            categorical: categorical.slice(s![off..off + s_len, ..]),
            temporal: temporal.slice(s![off..off + s_len, ..]),
        };
        let pred = model.predict(&window)?;
        values.slice_mut(s![off..off + t_len, ..]).assign(&pred);
        for (j, &ch) in model.layout.targets.iter().enumerate() {
            numeric
                .slice_mut(s![off + s_len..off + s_len + t_len, ch])
                .assign(&pred.column(j));
        }
    }
    Ok(Forecast {
        timestamps: stamps,
        columns: context.target_names(),
        values,
    })
}

/// [`predict_iterative_with`] using the context's median sampling interval.
pub fn predict_iterative(model: &ModelVariant, context: &FeatureFrame, steps: usize) -> Result<Forecast> {
    let interval = median_interval(&context.timestamps).ok_or_else(|| {
        Error::InvalidParameter("need two increasing timestamps to infer the sampling interval".into())
    })?;
    predict_iterative_with(model, context, steps, interval)
}

/// Block `k` of the output is `models[k]` applied to the last look-back
/// window; `models[k]` must have been trained for offset `k * T`.
pub fn predict_direct_with(
    models: &[ModelVariant],
    context: &FeatureFrame,
    interval: Duration,
) -> Result<Forecast> {
    let first = models
        .first()
        .ok_or_else(|| Error::InvalidParameter("direct forecasting needs at least one model".into()))?;
    for m in models {
        require_history(m, context)?;
        if m.lookback != first.lookback || m.horizon != first.horizon {
            return Err(Error::ShapeMismatch("direct models must share look-back and horizon".into()));
        }
    }
    let (s_len, t_len) = (first.lookback, first.horizon);
    let n = context.len();
    let window = context.window(n - s_len..n);
    let blocks: Vec<Array2<f64>> = models.iter().map(|m| m.predict(&window)).collect::<Result<_>>()?;
    let views: Vec<_> = blocks.iter().map(|b| b.view()).collect();
    let values = ndarray::concatenate(Axis(0), &views).expect("equal widths");
    let last = *context.timestamps.last().expect("history checked");
    Ok(Forecast {
        timestamps: future_stamps(last, interval, models.len() * t_len),
        columns: context.target_names(),
        values,
    })
}

pub fn predict_direct(models: &[ModelVariant], context: &FeatureFrame) -> Result<Forecast> {
    let interval = median_interval(&context.timestamps).ok_or_else(|| {
        Error::InvalidParameter("need two increasing timestamps to infer the sampling interval".into())
    })?;
    predict_direct_with(models, context, interval)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub mode: ForecastMode,
    pub steps: usize,
    pub windows: usize,
    pub mse: f64,
    pub mae: f64,
    pub mse_raw: f64,
    pub mae_raw: f64,
    pub seconds: f64,
}

/// Scores forecasts over every stride-1 window whose `steps * T` targets lie
/// inside `targets`; contexts may reach back into earlier rows.
///
/// Iterative and single modes use `models[0]`; direct mode needs one model
/// per step. Raw metrics are computed after mapping both sides back with
/// `params`, or equal the normalized ones when `params` is `None`.
pub fn evaluate_forecasts(
    models: &[ModelVariant],
    frame: &FeatureFrame,
    targets: Range<usize>,
    steps: usize,
    mode: ForecastMode,
    params: Option<&NormalizationParams>,
) -> Result<EvalReport> {
    let started = Instant::now();
    let model = models
        .first()
        .ok_or_else(|| Error::InvalidParameter("no model to evaluate".into()))?;
    match mode {
        ForecastMode::Single if model.horizon != 1 || steps != 1 => {
            return Err(Error::InvalidParameter(
                "single-step evaluation needs a one-step model and one step".into(),
            ))
        }
        ForecastMode::Direct if models.len() != steps => {
            return Err(Error::InvalidParameter(format!(
                "direct forecasting over {steps} steps needs {steps} models, got {}",
                models.len()
            )))
        }
        _ => {}
    }
    if steps == 0 {
        return Err(Error::InvalidParameter("need at least one forecast step".into()));
    }
    if frame.layout() != model.layout {
        return Err(Error::ShapeMismatch(format!(
            "data has {} numeric / {} categorical columns, model expects {} / {}",
            frame.numeric.ncols(),
            frame.categorical.ncols(),
            model.layout.n_numeric,
            model.layout.cat_width
        )));
    }
    let (s_len, t_len) = (model.lookback, model.horizon);
    let span = steps * t_len;
    let index = crate::dataset::WindowIndex::for_targets(frame.len(), targets, s_len, span, 0, 1)?;
    let interval = median_interval(&frame.timestamps).unwrap_or_else(|| Duration::seconds(1));
    let scales: Option<Vec<_>> = params
        .map(|p| {
            frame
                .target_names()
                .iter()
                .map(|n| p.get(n).cloned().ok_or_else(|| Error::UnknownColumn(n.clone())))
                .collect::<Result<Vec<_>>>()
        })
        .transpose()?;

    let per_window: Vec<[f64; 4]> = (0..index.len())
        .into_par_iter()
        .map(|k| -> Result<[f64; 4]> {
            let ctx = frame.rows(index.input_rows(k));
            let pred = match mode {
                ForecastMode::Direct => predict_direct_with(models, &ctx, interval)?.values,
                _ => predict_iterative_with(model, &ctx, steps, interval)?.values,
            };
            let truth = frame.target_values.slice(s![index.target_rows(k), ..]);
            let mut acc = [0.0; 4];
            for ((j, y), p) in truth.indexed_iter().map(|((_, j), y)| (j, *y)).zip(pred.iter()) {
                let d = y - p;
                acc[0] += d * d;
                acc[1] += d.abs();
                let dr = match (&scales, params) {
                    (Some(sc), Some(pm)) => pm.inverse_value(&sc[j], y) - pm.inverse_value(&sc[j], *p),
                    _ => d,
                };
                acc[2] += dr * dr;
                acc[3] += dr.abs();
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let count = (index.len() * span * model.n_targets()) as f64;
    let mut tot = [0.0; 4];
    for a in &per_window {
        for i in 0..4 {
            tot[i] += a[i];
        }
    }
    Ok(EvalReport {
        mode,
        steps,
        windows: index.len(),
        mse: tot[0] / count,
        mae: tot[1] / count,
        mse_raw: tot[2] / count,
        mae_raw: tot[3] / count,
        seconds: started.elapsed().as_secs_f64(),
    })
}
