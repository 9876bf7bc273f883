use std::time::Instant;

use ndarray::{Array3, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::frame::{InputLayout, ModelWindow, WindowSet};
use crate::models::adam::AdamState;
use crate::models::linear::VariantKind;
use crate::models::variant::ModelVariant;

/// RNG stream used for minibatch shuffling; every candidate draws the same
/// batch order from it.
const SHUFFLE_STREAM: u64 = 1;
const INIT_STREAM: u64 = 2;
const EVAL_CHUNK: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub max_epochs: usize,
    pub patience: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub use_bias: bool,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            max_epochs: 100,
            patience: 10,
            batch_size: 32,
            lr: 1e-3,
            use_bias: true,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.patience == 0 || self.batch_size == 0 {
            return Err(Error::InvalidParameter(
                "patience and batch size must be positive".into(),
            ));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::InvalidParameter(format!("learning rate {} is not positive", self.lr)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_mse: f64,
    pub val_mse: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Weights from the epoch with the lowest validation MSE (epoch 0 is
    /// the initialization).
    pub model: ModelVariant,
    pub best_epoch: usize,
    pub best_val_mse: f64,
    pub history: Vec<EpochRecord>,
    pub seconds: f64,
}

impl TrainOutcome {
    pub fn epochs_run(&self) -> usize {
        self.history.len()
    }
}

/// Seeded initialization of a fresh model. All kinds draw from the same
/// stream, so the result depends only on the seed and the shapes.
pub fn init_variant(
    kind: VariantKind,
    layout: InputLayout,
    lookback: usize,
    horizon: usize,
    kernel: usize,
    use_bias: bool,
    seed: u64,
) -> Result<ModelVariant> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(INIT_STREAM);
    ModelVariant::new(kind, lookback, horizon, kernel, layout, use_bias, &mut rng)
}

/// Stacks the targets of samples `ks` into `batch x horizon x n_targets`.
pub(crate) fn stack_targets(set: &WindowSet<'_>, ks: &[usize]) -> Array3<f64> {
    let mut y = Array3::zeros((ks.len(), set.horizon(), set.frame.targets.len()));
    for (b, &k) in ks.iter().enumerate() {
        y.index_axis_mut(Axis(0), b).assign(&set.target(k));
    }
    y
}

pub(crate) fn gather_windows<'a>(set: &WindowSet<'a>, ks: &[usize]) -> Vec<ModelWindow<'a>> {
    ks.iter().map(|&k| set.window(k)).collect()
}

/// Mean squared error of `model` over every window of `set`, in the
/// frame's (normalized) units. Chunks are reduced in order.
pub fn evaluate_mse(model: &ModelVariant, set: &WindowSet<'_>) -> Result<f64> {
    if set.is_empty() {
        return Err(Error::InvalidParameter("evaluation set is empty".into()));
    }
    let ks: Vec<usize> = (0..set.len()).collect();
    let partial: Vec<f64> = ks
        .par_chunks(EVAL_CHUNK)
        .map(|chunk| -> Result<f64> {
            let (pred, _) = model.forward(&gather_windows(set, chunk), None)?;
            let y = stack_targets(set, chunk);
            Ok((&pred - &y).mapv(|d| d * d).sum())
        })
        .collect::<Result<_>>()?;
    let count = set.len() * set.horizon() * set.frame.targets.len();
    Ok(partial.iter().sum::<f64>() / count as f64)
}

/// Minibatch Adam on the MSE loss with early stopping on validation MSE.
pub fn train_supervised(
    model: ModelVariant,
    train: &WindowSet<'_>,
    val: &WindowSet<'_>,
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if train.is_empty() || val.is_empty() {
        return Err(Error::InvalidParameter("training and validation sets must be nonempty".into()));
    }
    if train.lookback() != model.lookback || train.horizon() != model.horizon {
        return Err(Error::ShapeMismatch(format!(
            "windows are {}->{}, model is {}->{}",
            train.lookback(),
            train.horizon(),
            model.lookback,
            model.horizon
        )));
    }
    let started = Instant::now();
    let mut model = model;
    let mut best = model.clone();
    let mut best_val = evaluate_mse(&model, val)?;
    let mut best_epoch = 0;
    let mut history = Vec::new();
    let mut adam = AdamState::new(cfg.lr);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(SHUFFLE_STREAM);
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut stale = 0;

    for epoch in 1..=cfg.max_epochs {
        order.shuffle(&mut rng);
        let mut sq_sum = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let windows = gather_windows(train, batch);
            let (pred, cache) = model.forward(&windows, None)?;
            let resid = &pred - &stack_targets(train, batch);
            sq_sum += resid.mapv(|d| d * d).sum();
            let scale = 2.0 / resid.len() as f64;
            let grads = model.backward(&cache, resid.mapv(|d| d * scale).view())?;
            adam.step(model.parameters_mut(), &grads)?;
        }
        let train_mse = sq_sum / (train.len() * train.horizon() * train.frame.targets.len()) as f64;
        if !train_mse.is_finite() {
            return Err(Error::Diverged { epoch, loss: train_mse });
        }
        let val_mse = evaluate_mse(&model, val)?;
        if !val_mse.is_finite() {
            return Err(Error::Diverged { epoch, loss: val_mse });
        }
        history.push(EpochRecord {
            epoch,
            train_mse,
            val_mse,
        });
        log::debug!("{} epoch {epoch}: train {train_mse:.6} val {val_mse:.6}", model.kind);
        if val_mse < best_val {
            best_val = val_mse;
            best = model.clone();
            best_epoch = epoch;
            stale = 0;
        } else {
            stale += 1;
            if stale >= cfg.patience {
                break;
            }
        }
    }
    Ok(TrainOutcome {
        model: best,
        best_epoch,
        best_val_mse: best_val,
        history,
        seconds: started.elapsed().as_secs_f64(),
    })
}
