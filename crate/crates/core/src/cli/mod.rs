//! Pipeline commands behind the `hcast` binary: `prepare`, `train`,
//! `evaluate`, `forecast` and `report`.
//!
//! Every command reads a [`RunConfig`] and works inside its output
//! directory:
//!
//! | file | written by |
//! |---|---|
//! | `train.csv`, `val.csv`, `test.csv` | prepare (imputed, normalized) |
//! | `normalization.txt`, `encoders.csv`, `channels.txt`, `windows.txt` | prepare |
//! | `model.hcast`, `selection.csv`, `gan_log.csv` | train |
//! | `results.csv` | evaluate |
//! | `forecast.csv` | forecast |
//! | `report.txt` | report |

mod args;
mod config;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::Duration;

pub use args::{run, Cli, Command};
pub use config::{default_lookback, parse_candidates, RunConfig, DEFAULT_HORIZON};

use crate::adversarial::{train_gan, GanOutcome};
use crate::container::ModelContainer;
use crate::dataset::{
    impute_missing, load_table, temporal_split, NormalizationParams, TimeTable,
};
use crate::decompose::CategoricalEncoder;
use crate::error::{Error, Result};
use crate::forecast::{
    evaluate_forecasts, median_interval, predict_direct_with, predict_iterative_with, EvalReport,
    Forecast, ForecastMode,
};
use crate::frame::{FeatureFrame, WindowSet};
use crate::models::{init_variant, train_supervised, ModelVariant, VariantKind};
use crate::selection::{available_candidates, select_model, SelectionConfig, SelectionReport};

pub const MODEL_FILE: &str = "model.hcast";
pub const RESULTS_HEADER: &str = "dataset,variant,S,T,H,mode,mse_norm,mae_norm,mse_raw,mae_raw,seconds";

/// Process exit status for an error: 1 for numerical failures, 2 for
/// input and configuration problems.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        1
    } else {
        2
    }
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn read(path: &Path) -> Result<String> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrepareSummary {
    pub rows: [usize; 3],
    pub windows: [usize; 3],
    pub numeric: Vec<String>,
    pub categorical: Vec<String>,
}

/// Loads, imputes and splits the data, fits scaling and encoders on the
/// training rows and writes the prepared splits.
pub fn cmd_prepare(cfg: &RunConfig) -> Result<PrepareSummary> {
    cfg.validate()?;
    let raw = load_table(&cfg.data, &cfg.schema).map_err(|e| e.in_stage("dataset"))?;
    let prep = Prepared::from_table(&raw, cfg)?;
    let frame = FeatureFrame::from_table(&prep.table, &prep.encoders, &cfg.targets, cfg.kernel)
        .map_err(|e| e.in_stage("decompose"))?;
    let windows = split_windows(&frame, prep.rows, cfg.lookback(), cfg.horizon * cfg.steps)
        .map_err(|e| e.in_stage("dataset"))?;

    fs::create_dir_all(&cfg.output).map_err(|e| Error::io(&cfg.output, e))?;
    let mut start = 0;
    for (name, n) in ["train.csv", "val.csv", "test.csv"].iter().zip(prep.rows) {
        prep.table.slice_rows(start, start + n).write_csv(&cfg.output.join(name))?;
        start += n;
    }
    write(&cfg.output.join("normalization.txt"), prep.params.to_text())?;
    write_encoders(&cfg.output.join("encoders.csv"), &prep.encoders)?;
    write(&cfg.output.join("channels.txt"), frame.channel_map().to_text())?;
    write(
        &cfg.output.join("windows.txt"),
        format!(
            "lookback = {}\nhorizon = {}\nsteps = {}\ntrain = {}\nval = {}\ntest = {}\n",
            cfg.lookback(),
            cfg.horizon,
            cfg.steps,
            windows[0],
            windows[1],
            windows[2]
        ),
    )?;
    Ok(PrepareSummary {
        rows: prep.rows,
        windows,
        numeric: frame.numeric_names.clone(),
        categorical: prep.encoders.iter().map(|e| e.column.clone()).collect(),
    })
}

fn split_windows(frame: &FeatureFrame, rows: [usize; 3], s: usize, span: usize) -> Result<[usize; 3]> {
    let mut out = [0; 3];
    let mut start = 0;
    for (k, n) in rows.iter().enumerate() {
        out[k] = WindowSet::for_split(frame, start..start + n, s, span, 1)?.len();
        start += n;
    }
    Ok(out)
}

fn write_encoders(path: &Path, encoders: &[CategoricalEncoder]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_path(path)?;
    for e in encoders {
        let mut record = vec![e.column.as_str()];
        record.extend(e.vocabulary.iter().map(String::as_str));
        w.write_record(&record)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn read_encoders(path: &Path) -> Result<Vec<CategoricalEncoder>> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_path(path)?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let mut it = rec.iter().map(str::to_owned);
        let column = it.next().unwrap_or_default();
        out.push(CategoricalEncoder::from_vocabulary(column, it.collect())?);
    }
    Ok(out)
}

/// Imputed and normalized splits with the scaling and encoders fitted on
/// the training rows.
#[derive(Debug, Clone)]
pub struct Prepared {
    /// Train, validation and test rows, in order.
    pub table: TimeTable,
    pub rows: [usize; 3],
    pub params: NormalizationParams,
    pub encoders: Vec<CategoricalEncoder>,
}

impl Prepared {
    /// Imputes and splits `raw`, then fits scaling and encoders on the
    /// training rows and applies them to every split.
    pub fn from_table(raw: &TimeTable, cfg: &RunConfig) -> Result<Self> {
        let full = impute_missing(raw).map_err(|e| e.in_stage("dataset"))?;
        let (train, val, test) = temporal_split(&full, &cfg.split).map_err(|e| e.in_stage("dataset"))?;
        let params = NormalizationParams::fit(&train, cfg.normalization).map_err(|e| e.in_stage("dataset"))?;
        let encoders = train
            .categorical_names()
            .into_iter()
            .map(|c| CategoricalEncoder::fit(c, train.categorical(c).expect("categorical column")))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| e.in_stage("decompose"))?;
        let rows = [train.len(), val.len(), test.len()];
        let table = params
            .apply(&train)?
            .concat(&params.apply(&val)?)?
            .concat(&params.apply(&test)?)?;
        Ok(Self {
            table,
            rows,
            params,
            encoders,
        })
    }

    /// A frame over every prepared row with the configured targets and kernel.
    pub fn frame(&self, cfg: &RunConfig) -> Result<FeatureFrame> {
        FeatureFrame::from_table(&self.table, &self.encoders, &cfg.targets, cfg.kernel)
    }

    pub fn train_range(&self) -> std::ops::Range<usize> {
        0..self.rows[0]
    }

    pub fn val_range(&self) -> std::ops::Range<usize> {
        self.rows[0]..self.rows[0] + self.rows[1]
    }

    pub fn test_range(&self) -> std::ops::Range<usize> {
        let start = self.rows[0] + self.rows[1];
        start..start + self.rows[2]
    }
}

pub fn load_prepared(cfg: &RunConfig) -> Result<Prepared> {
    let dir = &cfg.output;
    let mut tables = Vec::new();
    for name in ["train.csv", "val.csv", "test.csv"] {
        let path = dir.join(name);
        if !path.exists() {
            return Err(Error::Stage {
                stage: "prepare",
                source: Box::new(Error::MissingFile(path)),
            });
        }
        tables.push(load_table(&path, &cfg.schema)?);
    }
    let rows = [tables[0].len(), tables[1].len(), tables[2].len()];
    let table = tables[0].concat(&tables[1])?.concat(&tables[2])?;
    let params = NormalizationParams::from_text(&read(&dir.join("normalization.txt"))?)?;
    let encoders = read_encoders(&dir.join("encoders.csv"))?;
    Ok(Prepared {
        table,
        rows,
        params,
        encoders,
    })
}

#[derive(Debug, Clone)]
pub struct TrainSummary {
    pub selection: SelectionReport,
    pub gan: Option<GanOutcome>,
    pub container: ModelContainer,
    pub model_path: PathBuf,
}

/// Selection, then adversarial refinement unless `cfg.skip_gan`; writes
/// `model.hcast`, `selection.csv` and `gan_log.csv`.
pub fn cmd_train(cfg: &RunConfig) -> Result<TrainSummary> {
    cfg.validate()?;
    let prep = load_prepared(cfg)?;
    let fit_rows = prep.table.slice_rows(0, prep.rows[0] + prep.rows[1]);
    let frame = FeatureFrame::from_table(&fit_rows, &prep.encoders, &cfg.targets, cfg.kernel)
        .map_err(|e| e.in_stage("decompose"))?;
    let (s, t) = (cfg.lookback(), cfg.horizon);
    let train = WindowSet::for_split(&frame, prep.train_range(), s, t, 1).map_err(|e| e.in_stage("selection"))?;
    let val = WindowSet::for_split(&frame, prep.val_range(), s, t, 1).map_err(|e| e.in_stage("selection"))?;
    let candidates = cfg
        .candidates
        .clone()
        .unwrap_or_else(|| available_candidates(!prep.encoders.is_empty()));
    let sel_cfg = SelectionConfig {
        lookback: s,
        horizon: t,
        kernel: cfg.kernel,
        train: cfg.train_config(),
    };
    let (winner, selection) =
        select_model(&train, &val, &sel_cfg, &candidates).map_err(|e| e.in_stage("selection"))?;
    write(&cfg.output.join("selection.csv"), selection.to_csv())?;

    let (model, gan) = if cfg.skip_gan {
        (winner, None)
    } else {
        let out = train_gan(winner, &train, &val, &cfg.gan_config()).map_err(|e| e.in_stage("adversarial"))?;
        (out.model.clone(), Some(out))
    };
    let log = match &gan {
        Some(g) => g.log_csv(),
        None => GanOutcome::LOG_HEADER.to_owned() + "\n",
    };
    write(&cfg.output.join("gan_log.csv"), log)?;

    let interval = median_interval(&frame.timestamps)
        .map(|d| d.num_seconds())
        .filter(|&s| s > 0)
        .ok_or_else(|| Error::InvalidParameter("cannot infer the sampling interval".into()))?;
    let container = ModelContainer {
        model,
        normalization: prep.params,
        numeric_names: frame.numeric_names.clone(),
        datetime_name: frame.datetime_name.clone(),
        encoders: prep.encoders,
        channels: frame.channel_map(),
        interval_seconds: interval,
    };
    let model_path = cfg.output.join(MODEL_FILE);
    container.save(&model_path)?;
    Ok(TrainSummary {
        selection,
        gan,
        container,
        model_path,
    })
}

fn model_path(cfg: &RunConfig, explicit: Option<&Path>) -> PathBuf {
    explicit.map(Path::to_path_buf).unwrap_or_else(|| cfg.output.join(MODEL_FILE))
}

/// The prepared table as a frame laid out for `container`'s model.
fn frame_for(container: &ModelContainer, table: &TimeTable) -> Result<FeatureFrame> {
    let m = &container.model;
    let targets: Vec<String> = m
        .layout
        .targets
        .iter()
        .map(|&i| container.numeric_names.get(i).cloned().ok_or_else(|| Error::BadModelFile("target index out of range".into())))
        .collect::<Result<_>>()?;
    let frame = FeatureFrame::from_table(table, &container.encoders, &targets, m.kernel)?;
    if frame.numeric_names != container.numeric_names || frame.layout() != m.layout {
        return Err(Error::ShapeMismatch(format!(
            "data has numeric columns {:?} and {} categorical features; model expects {:?} and {}",
            frame.numeric_names,
            frame.categorical.ncols(),
            container.numeric_names,
            m.layout.cat_width
        )));
    }
    Ok(frame)
}

/// Models for direct forecasting over `steps` blocks: the trained model
/// for the first block, then one model of the same kind per later offset,
/// trained with supervision only.
pub fn direct_models(
    model: &ModelVariant,
    frame: &FeatureFrame,
    prep: &Prepared,
    steps: usize,
    cfg: &RunConfig,
) -> Result<Vec<ModelVariant>> {
    let (s, t) = (model.lookback, model.horizon);
    let mut out = vec![model.clone()];
    let train_cfg = cfg.train_config();
    for k in 1..steps {
        let gap = k * t;
        let train = WindowSet::for_split_with_gap(frame, prep.train_range(), s, t, gap, 1)?;
        let val = WindowSet::for_split_with_gap(frame, prep.val_range(), s, t, gap, 1)?;
        let init = init_variant(model.kind, model.layout.clone(), s, t, model.kernel, model.has_bias(), train_cfg.seed)?;
        out.push(train_supervised(init, &train, &val, &train_cfg)?.model);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub dataset: String,
    pub variant: VariantKind,
    pub lookback: usize,
    pub horizon: usize,
    pub steps: usize,
    pub report: EvalReport,
}

impl ResultRow {
    pub fn to_csv_line(&self) -> String {
        let r = &self.report;
        format!(
            "{},{},{},{},{},{},{},{},{},{},{:.3}",
            self.dataset,
            self.variant,
            self.lookback,
            self.horizon,
            self.steps,
            r.mode,
            r.mse,
            r.mae,
            r.mse_raw,
            r.mae_raw,
            r.seconds
        )
    }
}

/// Scores the model on the test split, once per forecast length in
/// `sweep` (timesteps, each a multiple of the model horizon) or at
/// `cfg.steps` blocks. Writes `results.csv`.
pub fn cmd_evaluate(cfg: &RunConfig, model: Option<&Path>, sweep: Option<&[usize]>) -> Result<Vec<ResultRow>> {
    let container = ModelContainer::load(&model_path(cfg, model))?;
    let prep = load_prepared(cfg)?;
    let frame = frame_for(&container, &prep.table).map_err(|e| e.in_stage("evaluate"))?;
    let m = &container.model;
    let steps_list: Vec<usize> = match sweep {
        Some(hs) => hs
            .iter()
            .map(|&h| {
                if h == 0 || h % m.horizon != 0 {
                    Err(Error::Config(format!(
                        "sweep length {h} is not a positive multiple of the model horizon {}",
                        m.horizon
                    )))
                } else {
                    Ok(h / m.horizon)
                }
            })
            .collect::<Result<_>>()?,
        None => vec![cfg.steps],
    };
    let mut rows = Vec::new();
    for steps in steps_list {
        let models = match cfg.mode {
            ForecastMode::Direct => direct_models(m, &frame, &prep, steps, cfg).map_err(|e| e.in_stage("evaluate"))?,
            _ => vec![m.clone()],
        };
        let report = evaluate_forecasts(&models, &frame, prep.test_range(), steps, cfg.mode, Some(&container.normalization))
            .map_err(|e| e.in_stage("evaluate"))?;
        rows.push(ResultRow {
            dataset: cfg.dataset_name(),
            variant: m.kind,
            lookback: m.lookback,
            horizon: m.horizon,
            steps,
            report,
        });
    }
    let mut text = String::from(RESULTS_HEADER);
    text.push('\n');
    for r in &rows {
        text.push_str(&r.to_csv_line());
        text.push('\n');
    }
    write(&cfg.output.join("results.csv"), text)?;
    Ok(rows)
}

/// Forecasts `steps` blocks past the end of the prepared data and writes
/// the denormalized values to `forecast.csv`.
pub fn cmd_forecast(cfg: &RunConfig, model: Option<&Path>, steps: Option<usize>) -> Result<(Forecast, PathBuf)> {
    let container = ModelContainer::load(&model_path(cfg, model))?;
    let prep = load_prepared(cfg)?;
    let frame = frame_for(&container, &prep.table).map_err(|e| e.in_stage("forecast"))?;
    let steps = steps.unwrap_or(cfg.steps);
    let m = &container.model;
    if frame.len() < m.lookback {
        return Err(Error::TooShort {
            len: frame.len(),
            required: m.lookback,
        }
        .in_stage("forecast"));
    }
    let interval = Duration::seconds(container.interval_seconds);
    let forecast = match cfg.mode {
        ForecastMode::Direct => {
            let models = direct_models(m, &frame, &prep, steps, cfg)?;
            predict_direct_with(&models, &frame, interval)
        }
        _ => predict_iterative_with(m, &frame, steps, interval),
    }
    .map_err(|e| e.in_stage("forecast"))?
    .denormalize(&container.normalization)?;
    let path = cfg.output.join("forecast.csv");
    forecast.write_csv(&path, &container.datetime_name)?;
    Ok((forecast, path))
}

/// Plain-text summary of whatever artifacts exist in the output
/// directory; also written to `report.txt`.
pub fn cmd_report(cfg: &RunConfig) -> Result<String> {
    let dir = &cfg.output;
    let mut out = String::new();
    let _ = writeln!(out, "run directory: {}", dir.display());
    if let Ok(w) = read(&dir.join("windows.txt")) {
        let _ = writeln!(out, "\n[windows]\n{}", w.trim_end());
    }
    let model = dir.join(MODEL_FILE);
    if model.exists() {
        let c = ModelContainer::load(&model)?;
        let m = &c.model;
        let _ = writeln!(
            out,
            "\n[model]\nvariant = {}\nlookback = {}\nhorizon = {}\ntargets = {}\nparameters = {}\nnormalization = {}",
            m.kind,
            m.lookback,
            m.horizon,
            m.layout
                .targets
                .iter()
                .map(|&i| c.numeric_names[i].as_str())
                .collect::<Vec<_>>()
                .join(","),
            m.param_count(),
            c.normalization.mode
        );
    }
    if let Ok(s) = read(&dir.join("selection.csv")) {
        let _ = writeln!(out, "\n[selection]\n{}", s.trim_end());
    }
    if let Ok(g) = read(&dir.join("gan_log.csv")) {
        let rows: Vec<&str> = g.lines().skip(1).collect();
        let _ = writeln!(out, "\n[adversarial]");
        match rows.last() {
            None => {
                let _ = writeln!(out, "skipped");
            }
            Some(last) => {
                let best = last.rsplit(',').next().unwrap_or("");
                let _ = writeln!(out, "epochs = {}\nbest val mse = {best}", rows.len());
            }
        }
    }
    if let Ok(r) = read(&dir.join("results.csv")) {
        let _ = writeln!(out, "\n[results]\n{}", r.trim_end());
    }
    write(&dir.join("report.txt"), &out)?;
    Ok(out)
}
