//! Conditional adversarial refinement of a trained forecaster.

mod discriminator;
mod gan;
mod penalty;
mod spectral;

pub use discriminator::{
    bce, bce_batch, BatchNorm, Dense, DiscCache, DiscriminatorConfig, DiscriminatorNet, DropoutMasks, Pass,
    PROB_CLAMP,
};
pub use gan::{inject_noise, train_gan, GanConfig, GanEpochLog, GanOutcome};
pub use penalty::{gradient_penalty, penalty_at, PenaltyOutput, NORM_EPS};
pub use spectral::{backprop_normalized, normalize_with, spectral_normalize, SpectralState, SIGMA_EPS};
