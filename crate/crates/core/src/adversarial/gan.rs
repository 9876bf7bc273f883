use std::fmt::Write as _;
use std::time::Instant;

use ndarray::{concatenate, s, Array1, Array2, Array3, ArrayView1, Axis};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::adversarial::discriminator::{bce_batch, DiscriminatorConfig, DiscriminatorNet, Pass};
use crate::adversarial::penalty::gradient_penalty;
use crate::error::{Error, Result};
use crate::frame::WindowSet;
use crate::models::{evaluate_mse, gather_windows, AdamState, ModelVariant};

const GAN_STREAM: u64 = 3;
/// Mean discriminator outputs this close to 0 or 1 count as saturated.
const SATURATION: f64 = 1e-3;
const SATURATION_EPOCHS: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct GanConfig {
    pub epochs: usize,
    pub patience: usize,
    pub batch_size: usize,
    pub gen_lr: f64,
    pub disc_lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub lambda_gp: f64,
    pub gradient_penalty: bool,
    pub noise_dim: usize,
    pub seed: u64,
    pub discriminator: DiscriminatorConfig,
}

impl Default for GanConfig {
    fn default() -> Self {
        Self {
            epochs: 200,
            patience: 10,
            batch_size: 64,
            gen_lr: 2e-4,
            disc_lr: 1e-4,
            beta1: 0.5,
            beta2: 0.999,
            lambda_gp: 10.0,
            gradient_penalty: true,
            noise_dim: 16,
            seed: 0,
            discriminator: DiscriminatorConfig::default(),
        }
    }
}

impl GanConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x > 0.0 && x.is_finite();
        if !positive(self.gen_lr) || !positive(self.disc_lr) {
            return Err(Error::InvalidParameter("GAN learning rates must be positive".into()));
        }
        if !(self.lambda_gp >= 0.0) {
            return Err(Error::InvalidParameter("gradient-penalty weight must be nonnegative".into()));
        }
        if self.batch_size < 2 || self.patience == 0 {
            return Err(Error::InvalidParameter(
                "GAN batch size must be at least 2 and patience positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GanEpochLog {
    pub epoch: usize,
    pub l_d: f64,
    pub l_g: f64,
    pub l_gp: f64,
    pub val_mse: f64,
    pub best_so_far: f64,
}

#[derive(Debug, Clone)]
pub struct GanOutcome {
    /// The generator from the epoch with the lowest validation MSE. When no
    /// epoch beat the input, this is the input itself.
    pub model: ModelVariant,
    pub best_epoch: usize,
    pub best_val_mse: f64,
    pub initial_val_mse: f64,
    pub log: Vec<GanEpochLog>,
    pub warnings: Vec<String>,
    pub seconds: f64,
}

impl GanOutcome {
    pub const LOG_HEADER: &'static str = "epoch,L_D,L_G,L_GP,val_mse,best_so_far";

    pub fn log_csv(&self) -> String {
        let mut out = format!("{}\n", Self::LOG_HEADER);
        for r in &self.log {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.epoch, r.l_d, r.l_g, r.l_gp, r.val_mse, r.best_so_far
            );
        }
        out
    }
}

/// Appends `z` to a flattened condition vector.
pub fn inject_noise(condition: ArrayView1<'_, f64>, z: ArrayView1<'_, f64>) -> Array1<f64> {
    concatenate(Axis(0), &[condition, z]).expect("1-d views concatenate")
}

fn flatten_rows(set: &WindowSet<'_>, ks: &[usize], history: bool) -> Array2<f64> {
    let (rows, nt) = if history {
        (set.lookback(), set.frame.targets.len())
    } else {
        (set.horizon(), set.frame.targets.len())
    };
    let mut out = Array2::zeros((ks.len(), rows * nt));
    for (b, &k) in ks.iter().enumerate() {
        let src = if history { set.history(k) } else { set.target(k) };
        for (i, v) in src.iter().enumerate() {
            out[[b, i]] = *v;
        }
    }
    out
}

/// Adversarial refinement of a trained generator.
///
/// Each batch runs one discriminator step on `BCE(D(c, y), 1) + BCE(D(c,
/// G(c, z)), 0)` plus the gradient penalty, then one generator step on
/// `BCE(D(c, G(c, z)), 1)` with the gradient flowing through the
/// discriminator. The condition `c` is the target channels' look-back.
pub fn train_gan(
    generator: ModelVariant,
    train: &WindowSet<'_>,
    val: &WindowSet<'_>,
    cfg: &GanConfig,
) -> Result<GanOutcome> {
    cfg.validate()?;
    if train.len() < 2 || val.is_empty() {
        return Err(Error::InvalidParameter(
            "adversarial training needs at least two training windows and one validation window".into(),
        ));
    }
    let started = Instant::now();
    let initial_val = evaluate_mse(&generator, val)?;
    let mut outcome = GanOutcome {
        model: generator.clone(),
        best_epoch: 0,
        best_val_mse: initial_val,
        initial_val_mse: initial_val,
        log: Vec::new(),
        warnings: Vec::new(),
        seconds: 0.0,
    };
    if cfg.epochs == 0 {
        return Ok(outcome);
    }

    let mut g = generator.with_noise(cfg.noise_dim);
    let nt = g.n_targets();
    let cond_w = g.lookback * nt;
    let cand_w = g.horizon * nt;
    let candidate = cond_w..cond_w + cand_w;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(GAN_STREAM);
    let mut d = DiscriminatorNet::new(cond_w + cand_w, cfg.discriminator.clone(), &mut rng)?;
    let mut adam_g = AdamState::with_betas(cfg.gen_lr, cfg.beta1, cfg.beta2);
    let mut adam_d = AdamState::with_betas(cfg.disc_lr, cfg.beta1, cfg.beta2);
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut stale = 0;
    let mut saturated_run = 0;

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let (mut sum_d, mut sum_g, mut sum_gp, mut sum_pr, mut sum_pf) = (0.0, 0.0, 0.0, 0.0, 0.0);
        let mut n_batches = 0usize;
        for (bi, batch) in order.chunks(cfg.batch_size).enumerate() {
            let bsz = batch.len();
            if bsz < 2 {
                continue;
            }
            let windows = gather_windows(train, batch);
            let cond = flatten_rows(train, batch, true);
            let real = flatten_rows(train, batch, false);
            let z = (cfg.noise_dim > 0)
                .then(|| Array2::from_shape_simple_fn((bsz, cfg.noise_dim), || rng.sample(StandardNormal)));
            let (fake3, gcache) = g.forward(&windows, z.as_ref().map(|z| z.view()))?;
            let fake = fake3.into_shape_with_order((bsz, cand_w)).expect("contiguous output");
            let real_in = concatenate(Axis(1), &[cond.view(), real.view()]).expect("same rows");
            let fake_in = concatenate(Axis(1), &[cond.view(), fake.view()]).expect("same rows");

            // discriminator
            d.power_iterate(1);
            let masks_r = d.sample_masks(bsz, &mut rng);
            let masks_f = d.sample_masks(bsz, &mut rng);
            let (pr, cache_r) = d.forward(real_in.view(), Pass::Train(&masks_r))?;
            let (pf, cache_f) = d.forward(fake_in.view(), Pass::Train(&masks_f))?;
            let (l_real, dr) = bce_batch(pr.view(), 1.0);
            let (l_fake, df) = bce_batch(pf.view(), 0.0);
            let (mut grads, _) = d.backward(&cache_r, dr.view());
            grads.accumulate(&d.backward(&cache_f, df.view()).0);
            let mut l_gp = 0.0;
            if cfg.gradient_penalty && cfg.lambda_gp > 0.0 {
                let alpha = Array1::from_shape_simple_fn(bsz, || rng.random_range(0.0..1.0));
                let pen = gradient_penalty(
                    &d,
                    real_in.view(),
                    fake_in.view(),
                    alpha.view(),
                    candidate.clone(),
                    cfg.lambda_gp,
                )?;
                grads.accumulate(&pen.grads);
                l_gp = pen.loss;
            }
            let l_d = l_real + l_fake + l_gp;
            if !l_d.is_finite() {
                return Err(Error::GanDiverged {
                    epoch,
                    batch: bi,
                    what: "discriminator loss",
                });
            }
            d.update_running(&cache_r);
            d.update_running(&cache_f);
            adam_d.step(d.parameters_mut(), &grads)?;

            // generator
            let masks_g = d.sample_masks(bsz, &mut rng);
            let (pg, cache_g) = d.forward(fake_in.view(), Pass::Train(&masks_g))?;
            let (l_g, dg) = bce_batch(pg.view(), 1.0);
            if !l_g.is_finite() {
                return Err(Error::GanDiverged {
                    epoch,
                    batch: bi,
                    what: "generator loss",
                });
            }
            let (_, dx) = d.backward(&cache_g, dg.view());
            let dfake: Array3<f64> = dx
                .slice(s![.., candidate.clone()])
                .to_owned()
                .into_shape_with_order((bsz, g.horizon, nt))
                .expect("contiguous slice copy");
            let ggrads = g.backward(&gcache, dfake.view())?;
            adam_g.step(g.parameters_mut(), &ggrads)?;

            sum_d += l_d;
            sum_g += l_g;
            sum_gp += l_gp;
            sum_pr += pr.mean().unwrap_or(0.5);
            sum_pf += pf.mean().unwrap_or(0.5);
            n_batches += 1;
        }
        let nb = n_batches.max(1) as f64;
        let val_mse = evaluate_mse(&g, val)?;
        if !val_mse.is_finite() {
            return Err(Error::GanDiverged {
                epoch,
                batch: n_batches,
                what: "validation MSE",
            });
        }
        if val_mse < outcome.best_val_mse {
            outcome.best_val_mse = val_mse;
            outcome.best_epoch = epoch;
            outcome.model = g.clone();
            stale = 0;
        } else {
            stale += 1;
        }
        outcome.log.push(GanEpochLog {
            epoch,
            l_d: sum_d / nb,
            l_g: sum_g / nb,
            l_gp: sum_gp / nb,
            val_mse,
            best_so_far: outcome.best_val_mse,
        });
        log::debug!("gan epoch {epoch}: L_D {:.4} L_G {:.4} val {val_mse:.6}", sum_d / nb, sum_g / nb);

        let near_edge = |p: f64| !(SATURATION..=1.0 - SATURATION).contains(&p);
        if near_edge(sum_pr / nb) && near_edge(sum_pf / nb) {
            saturated_run += 1;
            if saturated_run == SATURATION_EPOCHS {
                let msg = format!("discriminator output saturated for {SATURATION_EPOCHS} epochs (epoch {epoch})");
                log::warn!("{msg}");
                outcome.warnings.push(msg);
            }
        } else {
            saturated_run = 0;
        }
        if stale >= cfg.patience {
            break;
        }
    }
    outcome.seconds = started.elapsed().as_secs_f64();
    Ok(outcome)
}
