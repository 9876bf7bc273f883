//! Ingestion and preparation of mixed-type time-series tables: loading,
//! imputation, scaling, chronological splits, look-back aggregation and
//! sliding windows.

mod scale;
mod split;
mod table;
mod windows;

pub use scale::{normalize, normalize_with, ColumnScale, NormalizationParams, ScaleMode};
pub use split::{aggregate_blocks, aggregate_window, temporal_split, AggregatedRow, Cell, SplitSpec};
pub use table::{
    format_timestamp, impute_missing, load_table, parse_timestamp, Column, ColumnData, ColumnKind,
    Schema, TimeTable,
};
pub use windows::{make_windows, WindowIndex, WindowedSample};
