//! Linear forecasters, their gradients, Adam and supervised training.

mod adam;
mod linear;
mod train;
mod variant;

pub use adam::AdamState;
pub use linear::{
    forward_delinear, forward_dlinear, forward_linear, forward_nlinear, LinearWeights, VariantKind,
};
pub use train::{evaluate_mse, init_variant, train_supervised, EpochRecord, TrainConfig, TrainOutcome};
pub use variant::{ForwardCache, Gradients, ModelVariant};

pub(crate) use train::gather_windows;
