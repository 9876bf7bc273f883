use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use super::{
    cmd_evaluate, cmd_forecast, cmd_prepare, cmd_report, cmd_train, exit_code, parse_candidates,
    RunConfig, RESULTS_HEADER,
};
use crate::error::Result;

#[derive(Debug, Parser)]
#[command(name = "hcast", version, about = "Decompose, select, refine and evaluate linear time-series forecasters")]
pub struct Cli {
    /// Run configuration (`key = value` lines).
    #[arg(long, global = true, default_value = "hcast.conf")]
    pub config: PathBuf,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// minmax or zscore.
    #[arg(long, global = true)]
    pub normalization: Option<String>,
    /// Keep the selected model without adversarial refinement.
    #[arg(long, global = true)]
    pub skip_gan: bool,
    /// Comma list of variants to compare, e.g. `linear,dlinear`.
    #[arg(long, global = true)]
    pub candidates: Option<String>,
    /// Comma list of forecast lengths in timesteps, each a multiple of the
    /// model horizon.
    #[arg(long, global = true, value_delimiter = ',')]
    pub horizon_sweep: Option<Vec<usize>>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Impute, split, normalize and encode the data file.
    Prepare,
    /// Select a variant and refine it adversarially.
    Train,
    /// Score the trained model on the test split.
    Evaluate {
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Forecast past the end of the data.
    Forecast {
        #[arg(long)]
        model: Option<PathBuf>,
        /// Number of horizon blocks; defaults to the configured `steps`.
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Summarize the artifacts of a run.
    Report,
}

impl Cli {
    /// The config file with command-line overrides applied.
    pub fn run_config(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::load(&self.config)?;
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(n) = &self.normalization {
            cfg.normalization = n.parse()?;
        }
        if self.skip_gan {
            cfg.skip_gan = true;
        }
        if let Some(c) = &self.candidates {
            cfg.candidates = Some(parse_candidates(c)?);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn execute(&self) -> Result<()> {
        let cfg = self.run_config()?;
        match &self.command {
            Command::Prepare => {
                let s = cmd_prepare(&cfg)?;
                println!(
                    "rows train/val/test: {}/{}/{}; windows: {}/{}/{}",
                    s.rows[0], s.rows[1], s.rows[2], s.windows[0], s.windows[1], s.windows[2]
                );
                println!("numeric: {}", s.numeric.join(","));
                if !s.categorical.is_empty() {
                    println!("categorical: {}", s.categorical.join(","));
                }
                println!("artifacts in {}", cfg.output.display());
            }
            Command::Train => {
                let s = cmd_train(&cfg)?;
                print!("{}", s.selection.to_csv());
                println!("winner: {} (config {})", s.selection.winner, s.selection.config_hash);
                if let Some(g) = &s.gan {
                    println!(
                        "adversarial: val mse {:.6} -> {:.6} (best epoch {})",
                        g.initial_val_mse, g.best_val_mse, g.best_epoch
                    );
                    for w in &g.warnings {
                        eprintln!("warning: {w}");
                    }
                }
                println!("model written to {}", s.model_path.display());
            }
            Command::Evaluate { model } => {
                let rows = cmd_evaluate(&cfg, model.as_deref(), self.horizon_sweep.as_deref())?;
                println!("{RESULTS_HEADER}");
                for r in rows {
                    println!("{}", r.to_csv_line());
                }
            }
            Command::Forecast { model, steps } => {
                let (f, path) = cmd_forecast(&cfg, model.as_deref(), *steps)?;
                println!("{} rows of {} written to {}", f.values.nrows(), f.columns.join(","), path.display());
            }
            Command::Report => print!("{}", cmd_report(&cfg)?),
        }
        Ok(())
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match cli.execute() {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
