//! Train every candidate variant and keep the one with the lowest
//! validation MSE.

use std::fmt::Write as _;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::frame::WindowSet;
use crate::models::{init_variant, train_supervised, ModelVariant, TrainConfig, TrainOutcome, VariantKind};

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionConfig {
    pub lookback: usize,
    pub horizon: usize,
    pub kernel: usize,
    pub train: TrainConfig,
}

impl SelectionConfig {
    /// Stable digest of every setting that influences training.
    pub fn hash(&self) -> String {
        let t = &self.train;
        let text = format!(
            "S={};T={};kernel={};epochs={};patience={};batch={};lr={:e};bias={};seed={}",
            self.lookback, self.horizon, self.kernel, t.max_epochs, t.patience, t.batch_size, t.lr, t.use_bias, t.seed
        );
        let digest = Sha256::digest(text.as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateResult {
    pub kind: VariantKind,
    pub val_mse: f64,
    pub epochs: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionReport {
    pub entries: Vec<CandidateResult>,
    pub winner: VariantKind,
    pub config_hash: String,
    /// Candidates that failed to train, with the error text.
    pub failures: Vec<(VariantKind, String)>,
}

impl SelectionReport {
    pub fn winner_entry(&self) -> &CandidateResult {
        self.entries
            .iter()
            .find(|e| e.kind == self.winner)
            .expect("winner is among the entries")
    }

    /// `variant,val_mse,epochs,seconds`, one row per trained candidate.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("variant,val_mse,epochs,seconds\n");
        for e in &self.entries {
            let _ = writeln!(out, "{},{},{},{:.3}", e.kind, e.val_mse, e.epochs, e.seconds);
        }
        out
    }
}

/// Candidates that make sense for a frame: DELinear only when the
/// embedding carries categorical channels.
pub fn available_candidates(has_categorical: bool) -> Vec<VariantKind> {
    VariantKind::ALL
        .into_iter()
        .filter(|&k| k != VariantKind::DELinear || has_categorical)
        .collect()
}

/// Trains each candidate from the same seed on the same batches and returns
/// the argmin of validation MSE. Ties go to the earlier kind in
/// [`VariantKind::ALL`].
pub fn select_model(
    train: &WindowSet<'_>,
    val: &WindowSet<'_>,
    cfg: &SelectionConfig,
    candidates: &[VariantKind],
) -> Result<(ModelVariant, SelectionReport)> {
    if candidates.is_empty() {
        return Err(Error::InvalidParameter("no candidate variants given".into()));
    }
    let mut kinds = candidates.to_vec();
    kinds.sort();
    kinds.dedup();
    let layout = train.frame.layout();
    if kinds.contains(&VariantKind::DELinear) && layout.cat_width == 0 {
        return Err(Error::MissingPreprocessing {
            variant: VariantKind::DELinear.to_string(),
            requirement: "categorical channels in the embedding",
        });
    }

    let outcomes: Vec<(VariantKind, Result<TrainOutcome>)> = kinds
        .par_iter()
        .map(|&kind| {
            let run = init_variant(
                kind,
                layout.clone(),
                cfg.lookback,
                cfg.horizon,
                cfg.kernel,
                cfg.train.use_bias,
                cfg.train.seed,
            )
            .and_then(|m| train_supervised(m, train, val, &cfg.train));
            (kind, run)
        })
        .collect();

    let mut entries = Vec::new();
    let mut failures = Vec::new();
    let mut best: Option<(f64, TrainOutcome)> = None;
    for (kind, run) in outcomes {
        match run {
            Ok(out) => {
                entries.push(CandidateResult {
                    kind,
                    val_mse: out.best_val_mse,
                    epochs: out.epochs_run(),
                    seconds: out.seconds,
                });
                log::info!("{kind}: val mse {:.6} after {} epochs", out.best_val_mse, out.epochs_run());
                // kinds are sorted, so strict `<` keeps the preferred kind on ties
                if best.as_ref().is_none_or(|(v, _)| out.best_val_mse < *v) {
                    best = Some((out.best_val_mse, out));
                }
            }
            Err(e) => {
                if !e.is_numerical() {
                    return Err(e);
                }
                log::warn!("{kind} failed: {e}");
                failures.push((kind, e.to_string()));
            }
        }
    }
    let Some((_, outcome)) = best else {
        let detail = failures
            .iter()
            .map(|(k, e)| format!("{k}: {e}"))
            .collect::<Vec<_>>()
            .join("; ");
        return Err(Error::AllCandidatesFailed(detail));
    };
    let report = SelectionReport {
        entries,
        winner: outcome.model.kind,
        config_hash: cfg.hash(),
        failures,
    };
    Ok((outcome.model, report))
}
