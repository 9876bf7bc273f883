use chrono::{Datelike, NaiveDateTime, Timelike};
use ndarray::Array2;

pub const TEMPORAL_WIDTH: usize = 6;

pub const TEMPORAL_NAMES: [&str; TEMPORAL_WIDTH] = [
    "day_of_week",
    "day_of_month",
    "month",
    "hour",
    "minute",
    "quarter",
];

const DIVISORS: [f64; TEMPORAL_WIDTH] = [6.0, 31.0, 12.0, 23.0, 59.0, 4.0];

/// Calendar features of one timestamp, each divided by its range maximum.
/// Day of week counts from Monday = 0.
pub fn temporal_row(ts: &NaiveDateTime) -> [f64; TEMPORAL_WIDTH] {
    let raw = [
        ts.weekday().num_days_from_monday() as f64,
        ts.day() as f64,
        ts.month() as f64,
        ts.hour() as f64,
        ts.minute() as f64,
        ((ts.month() - 1) / 3 + 1) as f64,
    ];
    std::array::from_fn(|i| raw[i] / DIVISORS[i])
}

/// Per-timestep temporal proxy features, `N x 6` in `TEMPORAL_NAMES` order.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalFeatures {
    pub values: Array2<f64>,
}

pub fn extract_temporal(datetimes: &[NaiveDateTime]) -> TemporalFeatures {
    let mut values = Array2::zeros((datetimes.len(), TEMPORAL_WIDTH));
    for (ts, mut row) in datetimes.iter().zip(values.rows_mut()) {
        row.assign(&ndarray::aview1(&temporal_row(ts)));
    }
    TemporalFeatures { values }
}
