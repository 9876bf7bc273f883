//! Flat `key = value` run configuration.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::adversarial::GanConfig;
use crate::dataset::{ColumnKind, ScaleMode, Schema, SplitSpec};
use crate::decompose::DEFAULT_KERNEL;
use crate::error::{Error, Result};
use crate::forecast::ForecastMode;
use crate::models::{TrainConfig, VariantKind};

/// Horizon used when the config does not set one.
pub const DEFAULT_HORIZON: usize = 24;

/// Look-back for a horizon: `T` for short horizons, `max(24, T / 2)` beyond 48.
pub fn default_lookback(horizon: usize) -> usize {
    if horizon <= 48 {
        horizon
    } else {
        (horizon / 2).max(24)
    }
}

/// Every setting of a pipeline run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub data: PathBuf,
    /// Label written to the results file; defaults to the data file stem.
    pub dataset: Option<String>,
    pub output: PathBuf,
    pub schema: Schema,
    /// Forecast columns; empty means every numeric column.
    pub targets: Vec<String>,
    pub horizon: usize,
    /// `None` applies [`default_lookback`].
    pub lookback: Option<usize>,
    /// Number of chained horizon blocks (H).
    pub steps: usize,
    pub kernel: usize,
    pub normalization: ScaleMode,
    pub split: SplitSpec,
    /// `None` evaluates every variant the data supports.
    pub candidates: Option<Vec<VariantKind>>,
    pub mode: ForecastMode,
    pub skip_gan: bool,
    pub seed: u64,
    pub train: TrainConfig,
    pub gan: GanConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            data: PathBuf::from("data.csv"),
            dataset: None,
            output: PathBuf::from("run"),
            schema: Schema::new(),
            targets: Vec::new(),
            horizon: DEFAULT_HORIZON,
            lookback: None,
            steps: 1,
            kernel: DEFAULT_KERNEL,
            normalization: ScaleMode::MinMax,
            split: SplitSpec::default(),
            candidates: None,
            mode: ForecastMode::Iterative,
            skip_gan: false,
            seed: 0,
            train: TrainConfig::default(),
            gan: GanConfig::default(),
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("bad value `{value}` for `{key}`")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(Error::Config(format!("bad value `{value}` for `{key}`, expected true or false"))),
    }
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

/// Parses a comma list of variant names.
pub fn parse_candidates(value: &str) -> Result<Vec<VariantKind>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| Error::Config(format!("unknown variant `{s}`"))))
        .collect()
}

impl RunConfig {
    /// Reads a config file. Relative `data` and `output` paths resolve
    /// against the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::MissingFile(path.to_path_buf()));
        }
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.data = base.join(&cfg.data);
        cfg.output = base.join(&cfg.output);
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", n + 1)))?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {}", n + 1, strip_prefix(e))))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies one setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "data" => self.data = PathBuf::from(value),
            "dataset" => self.dataset = Some(value.to_owned()),
            "output" => self.output = PathBuf::from(value),
            "column" => self.schema.declare_spec(value)?,
            "targets" => self.targets = parse_list(key, value)?,
            "horizon" => self.horizon = parse(key, value)?,
            "lookback" => {
                self.lookback = match value {
                    "auto" => None,
                    v => Some(parse(key, v)?),
                }
            }
            "steps" => self.steps = parse(key, value)?,
            "kernel" => self.kernel = parse(key, value)?,
            "normalization" => self.normalization = value.parse()?,
            "split" => {
                let f: Vec<f64> = parse_list(key, value)?;
                let [a, b, c] = f[..] else {
                    return Err(Error::Config("split needs three fractions".into()));
                };
                self.split = SplitSpec::new(a, b, c)?;
            }
            "candidates" => {
                self.candidates = match value {
                    "auto" | "" => None,
                    v => Some(parse_candidates(v)?),
                }
            }
            "mode" => self.mode = value.parse()?,
            "skip_gan" => self.skip_gan = parse_bool(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "epochs" => self.train.max_epochs = parse(key, value)?,
            "patience" => self.train.patience = parse(key, value)?,
            "batch_size" => self.train.batch_size = parse(key, value)?,
            "lr" => self.train.lr = parse(key, value)?,
            "bias" => self.train.use_bias = parse_bool(key, value)?,
            "gan_epochs" => self.gan.epochs = parse(key, value)?,
            "gan_patience" => self.gan.patience = parse(key, value)?,
            "gan_batch_size" => self.gan.batch_size = parse(key, value)?,
            "gen_lr" => self.gan.gen_lr = parse(key, value)?,
            "disc_lr" => self.gan.disc_lr = parse(key, value)?,
            "beta1" => self.gan.beta1 = parse(key, value)?,
            "beta2" => self.gan.beta2 = parse(key, value)?,
            "lambda_gp" => self.gan.lambda_gp = parse(key, value)?,
            "gradient_penalty" => self.gan.gradient_penalty = parse_bool(key, value)?,
            "noise_dim" => self.gan.noise_dim = parse(key, value)?,
            "disc_hidden" => self.gan.discriminator.hidden = parse_list(key, value)?,
            "leaky_slope" => self.gan.discriminator.slope = parse(key, value)?,
            "bn_momentum" => self.gan.discriminator.momentum = parse(key, value)?,
            "bn_eps" => self.gan.discriminator.bn_eps = parse(key, value)?,
            "dropout" => self.gan.discriminator.dropout = parse(key, value)?,
            "spectral_norm" => self.gan.discriminator.spectral_norm = parse_bool(key, value)?,
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    pub fn lookback(&self) -> usize {
        self.lookback.unwrap_or_else(|| default_lookback(self.horizon))
    }

    pub fn dataset_name(&self) -> String {
        self.dataset.clone().unwrap_or_else(|| {
            self.data
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "data".into())
        })
    }

    /// Training settings with the run seed applied.
    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            seed: self.seed,
            ..self.train.clone()
        }
    }

    pub fn gan_config(&self) -> GanConfig {
        GanConfig {
            seed: self.seed,
            ..self.gan.clone()
        }
    }

    /// Checks every module precondition that can be checked without data.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.horizon == 0 || self.steps == 0 {
            return bad("horizon and steps must be positive".into());
        }
        if self.lookback == Some(0) {
            return bad("lookback must be positive".into());
        }
        if self.kernel == 0 || self.kernel.is_multiple_of(2) {
            return bad(format!("kernel must be odd and positive, got {}", self.kernel));
        }
        if self.mode == ForecastMode::Single && (self.horizon != 1 || self.steps != 1) {
            return bad("single mode needs horizon = 1 and steps = 1".into());
        }
        if matches!(&self.candidates, Some(c) if c.is_empty()) {
            return bad("candidate list is empty".into());
        }
        let datetimes = self
            .schema
            .declared()
            .iter()
            .filter(|(_, k)| *k == ColumnKind::Datetime)
            .count();
        if datetimes != 1 {
            return bad("declare exactly one `column = <name>:datetime`".into());
        }
        self.split.validate()?;
        self.train.validate()?;
        self.gan.validate()?;
        Ok(())
    }

    /// Canonical text form; parsing it gives back an equal config.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let list = |v: &[String]| v.join(",");
        let _ = writeln!(s, "data = {}", self.data.display());
        if let Some(d) = &self.dataset {
            let _ = writeln!(s, "dataset = {d}");
        }
        let _ = writeln!(s, "output = {}", self.output.display());
        for (name, kind) in self.schema.declared() {
            let _ = writeln!(s, "column = {name}:{kind}");
        }
        let _ = writeln!(s, "targets = {}", list(&self.targets));
        let _ = writeln!(s, "horizon = {}", self.horizon);
        match self.lookback {
            Some(l) => writeln!(s, "lookback = {l}"),
            None => writeln!(s, "lookback = auto"),
        }
        .ok();
        let _ = writeln!(s, "steps = {}", self.steps);
        let _ = writeln!(s, "kernel = {}", self.kernel);
        let _ = writeln!(s, "normalization = {}", self.normalization);
        let sp = &self.split;
        let _ = writeln!(s, "split = {},{},{}", sp.train_frac, sp.val_frac, sp.test_frac);
        let cands = match &self.candidates {
            Some(c) => c.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(","),
            None => "auto".into(),
        };
        let _ = writeln!(s, "candidates = {cands}");
        let _ = writeln!(s, "mode = {}", self.mode);
        let _ = writeln!(s, "skip_gan = {}", self.skip_gan);
        let _ = writeln!(s, "seed = {}", self.seed);
        let t = &self.train;
        let _ = writeln!(s, "epochs = {}", t.max_epochs);
        let _ = writeln!(s, "patience = {}", t.patience);
        let _ = writeln!(s, "batch_size = {}", t.batch_size);
        let _ = writeln!(s, "lr = {}", t.lr);
        let _ = writeln!(s, "bias = {}", t.use_bias);
        let g = &self.gan;
        let _ = writeln!(s, "gan_epochs = {}", g.epochs);
        let _ = writeln!(s, "gan_patience = {}", g.patience);
        let _ = writeln!(s, "gan_batch_size = {}", g.batch_size);
        let _ = writeln!(s, "gen_lr = {}", g.gen_lr);
        let _ = writeln!(s, "disc_lr = {}", g.disc_lr);
        let _ = writeln!(s, "beta1 = {}", g.beta1);
        let _ = writeln!(s, "beta2 = {}", g.beta2);
        let _ = writeln!(s, "lambda_gp = {}", g.lambda_gp);
        let _ = writeln!(s, "gradient_penalty = {}", g.gradient_penalty);
        let _ = writeln!(s, "noise_dim = {}", g.noise_dim);
        let d = &g.discriminator;
        let hidden: Vec<String> = d.hidden.iter().map(|h| h.to_string()).collect();
        let _ = writeln!(s, "disc_hidden = {}", list(&hidden));
        let _ = writeln!(s, "leaky_slope = {}", d.slope);
        let _ = writeln!(s, "bn_momentum = {}", d.momentum);
        let _ = writeln!(s, "bn_eps = {}", d.bn_eps);
        let _ = writeln!(s, "dropout = {}", d.dropout);
        let _ = writeln!(s, "spectral_norm = {}", d.spectral_norm);
        s
    }
}

fn strip_prefix(e: Error) -> String {
    match e {
        Error::Config(m) => m,
        other => other.to_string(),
    }
}
