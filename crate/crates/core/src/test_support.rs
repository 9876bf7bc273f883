use chrono::NaiveDate;
use ndarray::{Array2, Array3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::{Column, ColumnData, TimeTable};
use crate::decompose::CategoricalEncoder;
use crate::frame::FeatureFrame;
use crate::models::ModelVariant;

fn hourly(n: usize) -> Vec<chrono::NaiveDateTime> {
    let base = NaiveDate::from_ymd_opt(2021, 3, 1).unwrap().and_hms_opt(0, 0, 0).unwrap();
    (0..n).map(|i| base + chrono::Duration::hours(i as i64)).collect()
}

/// Random-ish smooth series with `n_numeric` columns and an optional
/// three-level categorical column. Every numeric column is a target.
pub fn small_frame(n: usize, n_numeric: usize, with_cat: bool, seed: u64) -> FeatureFrame {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cols = Vec::new();
    for j in 0..n_numeric {
        let phase: f64 = rng.random_range(0.0..6.0);
        let values = (0..n)
            .map(|i| (i as f64 * 0.3 + phase).sin() * 0.5 + 0.1 * j as f64 + rng.random_range(-0.1..0.1))
            .collect();
        cols.push(Column::new(format!("x{j}"), ColumnData::numeric(values)));
    }
    if with_cat {
        let cats: Vec<&str> = (0..n).map(|i| ["lo", "mid", "hi"][(i / 5) % 3]).collect();
        cols.push(Column::new("regime", ColumnData::categorical(cats)));
    }
    let t = TimeTable::new("date", hourly(n), cols).unwrap();
    let encoders: Vec<CategoricalEncoder> = t
        .categorical_names()
        .into_iter()
        .map(|c| CategoricalEncoder::fit(c, t.categorical(c).unwrap()).unwrap())
        .collect();
    FeatureFrame::from_table(&t, &encoders, &[], 3).unwrap()
}

/// One straight line `slope * i / n`.
pub fn ramp_frame(n: usize, slope: f64) -> FeatureFrame {
    let values = (0..n).map(|i| slope * i as f64 / n as f64).collect();
    let t = TimeTable::new("date", hourly(n), vec![Column::new("y", ColumnData::numeric(values))]).unwrap();
    FeatureFrame::from_table(&t, &[], &[], 3).unwrap()
}

/// Largest relative error between analytic and central-difference
/// gradients of a random-target MSE loss, over every parameter.
pub fn finite_difference_check(model: &ModelVariant, frame: &FeatureFrame, starts: &[usize], seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let windows: Vec<_> = starts.iter().map(|&s| frame.window(s..s + model.lookback)).collect();
    let nt = model.n_targets();
    let y = Array3::from_shape_fn((windows.len(), model.horizon, nt), |_| rng.random_range(-1.0..1.0));
    let z = Array2::from_shape_fn((windows.len(), model.noise_dim().max(1)), |_| rng.random_range(-1.0..1.0));
    let zv = (model.noise_dim() > 0).then(|| z.view());
    let mut m = model.clone();
    if let Some(n) = m.noise.as_mut() {
        n.mapv_inplace(|_| rng.random_range(-0.5..0.5));
    }
    let loss = |m: &ModelVariant| {
        let (p, _) = m.forward(&windows, zv).unwrap();
        (&p - &y).mapv(|d| d * d).mean().unwrap()
    };
    let (p, cache) = m.forward(&windows, zv).unwrap();
    let scale = 2.0 / p.len() as f64;
    let grads = m.backward(&cache, (&p - &y).mapv(|d| d * scale).view()).unwrap();
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    let n_params = grads.entries.len();
    for k in 0..n_params {
        let len = grads.entries[k].1.len();
        for i in 0..len {
            let orig = m.parameters_mut()[k].1[i];
            m.parameters_mut()[k].1[i] = orig + h;
            let up = loss(&m);
            m.parameters_mut()[k].1[i] = orig - h;
            let down = loss(&m);
            m.parameters_mut()[k].1[i] = orig;
            let numeric = (up - down) / (2.0 * h);
            let analytic = grads.entries[k].1[i];
            let denom = analytic.abs().max(numeric.abs()).max(1e-6);
            worst = worst.max((analytic - numeric).abs() / denom);
        }
    }
    worst
}
