//! Trend/seasonal decomposition, categorical encoding, calendar features
//! and their concatenation into per-timestep embedded vectors.

mod categorical;
mod embedding;
mod temporal;
mod trend;

pub use categorical::{
    encode_categoricals, CategoricalEncoder, CategoricalEncoding, EncodingMode, ONE_HOT_LIMIT,
};
pub use embedding::{
    build_embedding, build_embedding_with, embed_rows, embedding_width, Channel, ChannelMap,
    ChannelRole, DecomposedEmbedding,
};
pub use temporal::{extract_temporal, temporal_row, TemporalFeatures, TEMPORAL_NAMES, TEMPORAL_WIDTH};
pub use trend::{decompose, extract_seasonality, extract_trend, DecomposedSeries, DEFAULT_KERNEL};

pub(crate) use trend::{check_kernel, trend_into};
