//! Seeded synthetic series for examples and tests. All tables are hourly
//! from 2022-01-01 with a datetime column named `date`.

use chrono::{NaiveDate, NaiveDateTime};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dataset::{Column, ColumnData, TimeTable};

pub fn hourly(n: usize) -> Vec<NaiveDateTime> {
    let base = NaiveDate::from_ymd_opt(2022, 1, 1)
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .expect("valid date");
    (0..n).map(|i| base + chrono::Duration::hours(i as i64)).collect()
}

fn noise(rng: &mut ChaCha8Rng, sd: f64) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    sd * z
}

fn single(name: &str, values: Vec<f64>) -> TimeTable {
    let n = values.len();
    TimeTable::new("date", hourly(n), vec![Column::new(name, ColumnData::numeric(values))])
        .expect("valid synthetic table")
}

/// `sin(2 pi i / period)` plus Gaussian noise, column `y`.
pub fn sinusoid(n: usize, period: f64, noise_sd: f64, seed: u64) -> TimeTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..n)
        .map(|i| (std::f64::consts::TAU * i as f64 / period).sin() + noise(&mut rng, noise_sd))
        .collect();
    single("y", values)
}

/// Linear trend rising by `rise` over the series plus a unit sinusoid of
/// period 24 and Gaussian noise, column `y`.
pub fn trend_sinusoid(n: usize, rise: f64, noise_sd: f64, seed: u64) -> TimeTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..n)
        .map(|i| {
            rise * i as f64 / n as f64
                + (std::f64::consts::TAU * i as f64 / 24.0).sin()
                + noise(&mut rng, noise_sd)
        })
        .collect();
    single("y", values)
}

/// Cumulative sum of unit-variance Gaussian steps, column `y`.
pub fn random_walk(n: usize, seed: u64) -> TimeTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut level = 0.0;
    let values = (0..n)
        .map(|_| {
            level += noise(&mut rng, 1.0);
            level
        })
        .collect();
    single("y", values)
}

/// Two numeric columns and a day/night categorical: `load` follows a daily
/// cycle whose amplitude depends on the shift, `temp` is a lagged cosine.
/// Every 37th `temp` reading is missing.
pub fn load_with_shift(n: usize, seed: u64) -> TimeTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let stamps = hourly(n);
    let mut load = Vec::with_capacity(n);
    let mut temp = Vec::with_capacity(n);
    let mut shift = Vec::with_capacity(n);
    for (i, ts) in stamps.iter().enumerate() {
        let hour = chrono::Timelike::hour(ts);
        let day = (6..18).contains(&hour);
        let phase = std::f64::consts::TAU * i as f64 / 24.0;
        let amp = if day { 1.5 } else { 0.5 };
        load.push(amp * phase.sin() + 0.001 * i as f64 + noise(&mut rng, 0.1));
        temp.push((i % 37 != 0).then(|| (phase - 1.0).cos() + noise(&mut rng, 0.1)));
        shift.push(if day { "day" } else { "night" });
    }
    TimeTable::new(
        "date",
        stamps,
        vec![
            Column::new("load", ColumnData::numeric(load)),
            Column::new("temp", ColumnData::numeric_with_missing(temp)),
            Column::new("shift", ColumnData::categorical(shift)),
        ],
    )
    .expect("valid synthetic table")
}
