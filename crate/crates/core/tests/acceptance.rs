//! Acceptance checks A1-A10. Run with `cargo test --test acceptance`; pass
//! criterion ids (e.g. `A3 A6`) after `--` to run a subset. Prints one line
//! per criterion and exits nonzero when any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use chrono::Duration as Span;
use hcast::adversarial::{bce_batch, penalty_at, train_gan, DiscriminatorConfig, DiscriminatorNet, Pass, SpectralState};
use hcast::cli::{cmd_evaluate, cmd_prepare, cmd_train, Prepared, RunConfig};
use hcast::dataset::{Column, ColumnData, TimeTable};
use hcast::decompose::{extract_seasonality, extract_trend, temporal_row, CategoricalEncoder};
use hcast::forecast::{evaluate_forecasts, predict_iterative_with, ForecastMode};
use hcast::frame::{FeatureFrame, ModelWindow, WindowSet};
use hcast::metrics::{mae, mse};
use hcast::models::{evaluate_mse, ModelVariant, VariantKind};
use hcast::selection::{available_candidates, select_model, SelectionConfig};
use hcast::synthetic;
use ndarray::{arr1, Array1, Array2, Array3};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

#[derive(PartialEq)]
enum Verdict {
    Pass,
    Fail,
    /// Met only on the attainable part of the input space.
    Partial,
    Unverified,
}

struct Outcome {
    verdict: Verdict,
    detail: String,
}

fn check(ok: bool, detail: String) -> Outcome {
    Outcome {
        verdict: if ok { Verdict::Pass } else { Verdict::Fail },
        detail,
    }
}

/// Fails the outcome when it ran past `budget`.
fn within(mut o: Outcome, elapsed: Duration, budget: Duration) -> Outcome {
    if elapsed > budget && matches!(o.verdict, Verdict::Pass | Verdict::Partial) {
        o.verdict = Verdict::Fail;
        o.detail = format!("{}; over budget of {:?}", o.detail, budget);
    }
    o
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn normal(r: &mut ChaCha8Rng) -> f64 {
    r.sample(StandardNormal)
}

/// Random hourly frame with `n_numeric` numeric columns and optionally one
/// categorical column; `targets` picks forecast columns by index.
fn random_frame(r: &mut ChaCha8Rng, n: usize, n_numeric: usize, with_cat: bool, targets: &[usize], kernel: usize) -> FeatureFrame {
    let mut cols = Vec::new();
    for j in 0..n_numeric {
        let values = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
        cols.push(Column::new(format!("x{j}"), ColumnData::numeric(values)));
    }
    if with_cat {
        let levels = ["a", "b", "c", "d"];
        let cats: Vec<&str> = (0..n).map(|_| levels[r.random_range(0..levels.len())]).collect();
        cols.push(Column::new("c", ColumnData::categorical(cats)));
    }
    let t = TimeTable::new("date", synthetic::hourly(n), cols).unwrap();
    let encoders: Vec<CategoricalEncoder> = t
        .categorical_names()
        .into_iter()
        .map(|c| CategoricalEncoder::fit(c, t.categorical(c).unwrap()).unwrap())
        .collect();
    let names: Vec<String> = targets.iter().map(|j| format!("x{j}")).collect();
    FeatureFrame::from_table(&t, &encoders, &names, kernel).unwrap()
}

fn random_targets(r: &mut ChaCha8Rng, n_numeric: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n_numeric).collect();
    idx.shuffle(r);
    let k = r.random_range(1..=n_numeric);
    let mut t = idx[..k].to_vec();
    t.sort();
    t
}

fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6)
}

fn a1() -> Outcome {
    let mut r = rng(101);
    let mut worst: f64 = 0.0;
    let cases = 1200;
    for case in 0..cases {
        let n = r.random_range(1..=500);
        let kernel = [1, 3, 25][case % 3];
        let scale = 10f64.powi(r.random_range(-2..=2));
        let x: Vec<f64> = (0..n).map(|_| scale * normal(&mut r)).collect();
        let trend = extract_trend(&x, kernel).unwrap();
        let seasonal = extract_seasonality(&x, &trend).unwrap();
        for i in 0..n {
            worst = worst.max((trend[i] + seasonal[i] - x[i]).abs());
        }
    }
    check(worst <= 1e-12, format!("{cases} series, max |trend + seasonal - x| = {worst:.2e}"))
}

fn a2() -> Outcome {
    let mut r = rng(102);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = r.random_range(1..=400);
        let x: Vec<f64> = (0..n).map(|_| normal(&mut r)).collect();
        let mut padded = vec![x[0]; 12];
        padded.extend_from_slice(&x);
        padded.extend(std::iter::repeat_n(x[n - 1], 12));
        let trend = extract_trend(&x, 25).unwrap();
        for i in 0..n {
            let oracle = padded[i..i + 25].iter().sum::<f64>() / 25.0;
            worst = worst.max((trend[i] - oracle).abs());
        }
    }
    check(worst <= 1e-14, format!("100 series, max deviation from brute force = {worst:.2e}"))
}

/// Central-difference check of every model parameter under an MSE loss on
/// random targets and noise.
fn variant_fd(kind: VariantKind, r: &mut ChaCha8Rng) -> f64 {
    let s_len = r.random_range(2..=8);
    let t_len = r.random_range(1..=4);
    let n_numeric = r.random_range(1..=3);
    let with_cat = r.random_bool(0.5);
    let kernel = [1, 3, 5][r.random_range(0..3)];
    let batch = r.random_range(1..=3);
    let targets = random_targets(r, n_numeric);
    let frame = random_frame(r, s_len + batch + 3, n_numeric, with_cat, &targets, kernel);
    let noise_dim = if r.random_bool(0.5) { r.random_range(1..=3) } else { 0 };
    let mut m = ModelVariant::new(kind, s_len, t_len, kernel, frame.layout(), r.random_bool(0.5), r)
        .unwrap()
        .with_noise(noise_dim);
    if let Some(wz) = m.noise.as_mut() {
        wz.mapv_inplace(|_| r.random_range(-0.5..0.5));
    }
    let windows: Vec<ModelWindow> = (0..batch)
        .map(|_| {
            let s = r.random_range(0..=frame.len() - s_len);
            frame.window(s..s + s_len)
        })
        .collect();
    let y = Array3::from_shape_simple_fn((batch, t_len, targets.len()), || normal(r));
    let z = Array2::from_shape_simple_fn((batch, noise_dim.max(1)), || normal(r));
    let zv = (noise_dim > 0).then(|| z.view());
    let loss = |m: &ModelVariant| {
        let (p, _) = m.forward(&windows, zv).unwrap();
        (&p - &y).mapv(|d| d * d).mean().unwrap()
    };
    let (p, cache) = m.forward(&windows, zv).unwrap();
    let scale = 2.0 / p.len() as f64;
    let grads = m.backward(&cache, (&p - &y).mapv(|d| d * scale).view()).unwrap();
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    let names: Vec<String> = m.parameters_mut().into_iter().map(|(n, _)| n).collect();
    for (k, name) in names.iter().enumerate() {
        let analytic = grads.get(name).unwrap().to_vec();
        for (i, &a) in analytic.iter().enumerate() {
            let orig = m.parameters_mut()[k].1[i];
            m.parameters_mut()[k].1[i] = orig + h;
            let up = loss(&m);
            m.parameters_mut()[k].1[i] = orig - h;
            let down = loss(&m);
            m.parameters_mut()[k].1[i] = orig;
            worst = worst.max(rel_err(a, (up - down) / (2.0 * h)));
        }
    }
    worst
}

fn random_discriminator(r: &mut ChaCha8Rng) -> DiscriminatorNet {
    let in_dim = r.random_range(2..=8);
    let layers = r.random_range(1..=3);
    let config = DiscriminatorConfig {
        hidden: (0..layers).map(|_| r.random_range(2..=6)).collect(),
        spectral_norm: r.random_bool(0.75),
        dropout: if r.random_bool(0.5) { 0.3 } else { 0.0 },
        ..DiscriminatorConfig::default()
    };
    let mut d = DiscriminatorNet::new(in_dim, config, r).unwrap();
    d.power_iterate(r.random_range(1..=5));
    for (dense, bn) in d.hidden.iter_mut().zip(d.norms.iter_mut()) {
        dense.bias.mapv_inplace(|_| r.random_range(-0.3..0.3));
        bn.gamma.mapv_inplace(|_| r.random_range(0.5..1.5));
        bn.beta.mapv_inplace(|_| r.random_range(-0.3..0.3));
        bn.running_mean.mapv_inplace(|_| r.random_range(-0.3..0.3));
        bn.running_var.mapv_inplace(|_| r.random_range(0.5..2.0));
    }
    d.output.bias.mapv_inplace(|_| r.random_range(-0.3..0.3));
    d
}

/// Every discriminator parameter and the input under BCE, in train mode
/// with a fixed dropout mask or in eval mode.
fn discriminator_fd(r: &mut ChaCha8Rng) -> f64 {
    let mut d = random_discriminator(r);
    let batch = r.random_range(2..=5);
    let x = Array2::from_shape_simple_fn((batch, d.in_dim), || normal(r));
    let label = if r.random_bool(0.5) { 1.0 } else { 0.0 };
    let masks = d.sample_masks(batch, r);
    let train = r.random_bool(0.7);
    let pass = |m| if train { Pass::Train(m) } else { Pass::Eval };
    let loss = |d: &DiscriminatorNet, x: &Array2<f64>| {
        let (p, _) = d.forward(x.view(), pass(&masks)).unwrap();
        bce_batch(p.view(), label).0
    };
    let (p, cache) = d.forward(x.view(), pass(&masks)).unwrap();
    let (_, dlogit) = bce_batch(p.view(), label);
    let (grads, dx) = d.backward(&cache, dlogit.view());
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    let names: Vec<String> = d.parameters_mut().into_iter().map(|(n, _)| n).collect();
    for (k, name) in names.iter().enumerate() {
        let analytic = grads.get(name).unwrap().to_vec();
        for (i, &a) in analytic.iter().enumerate() {
            let orig = d.parameters_mut()[k].1[i];
            d.parameters_mut()[k].1[i] = orig + h;
            let up = loss(&d, &x);
            d.parameters_mut()[k].1[i] = orig - h;
            let down = loss(&d, &x);
            d.parameters_mut()[k].1[i] = orig;
            worst = worst.max(rel_err(a, (up - down) / (2.0 * h)));
        }
    }
    let mut xp = x.clone();
    for ((b, j), &a) in dx.indexed_iter() {
        let orig = xp[[b, j]];
        xp[[b, j]] = orig + h;
        let up = loss(&d, &xp);
        xp[[b, j]] = orig - h;
        let down = loss(&d, &xp);
        xp[[b, j]] = orig;
        worst = worst.max(rel_err(a, (up - down) / (2.0 * h)));
    }
    worst
}

/// Parameter gradients of the gradient penalty against differences of the
/// penalty itself.
fn penalty_fd(r: &mut ChaCha8Rng) -> f64 {
    let mut d = random_discriminator(r);
    let batch = r.random_range(1..=4);
    let lo = r.random_range(0..d.in_dim);
    let hi = r.random_range(lo + 1..=d.in_dim);
    let lambda = r.random_range(1.0..20.0);
    // the penalty is a cone at g = 0 (smoothed only at the 1e-6 scale), so
    // differences are meaningless there; redraw such points
    let (x, out) = loop {
        let x = Array2::from_shape_simple_fn((batch, d.in_dim), || normal(r));
        let out = penalty_at(&d, x.view(), lo..hi, lambda).unwrap();
        if out.norms.iter().all(|&n| n > 1e-3) {
            break (x, out);
        }
    };
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    let names: Vec<String> = d.parameters_mut().into_iter().map(|(n, _)| n).collect();
    for (k, name) in names.iter().enumerate() {
        let analytic = out.grads.get(name).unwrap().to_vec();
        for (i, &a) in analytic.iter().enumerate() {
            let orig = d.parameters_mut()[k].1[i];
            d.parameters_mut()[k].1[i] = orig + h;
            let up = penalty_at(&d, x.view(), lo..hi, lambda).unwrap().loss;
            d.parameters_mut()[k].1[i] = orig - h;
            let down = penalty_at(&d, x.view(), lo..hi, lambda).unwrap().loss;
            d.parameters_mut()[k].1[i] = orig;
            worst = worst.max(rel_err(a, (up - down) / (2.0 * h)));
        }
    }
    worst
}

fn a3() -> Outcome {
    let mut r = rng(103);
    let per = 100;
    let mut parts = Vec::new();
    let mut ok = true;
    for kind in VariantKind::ALL {
        let worst = (0..per).map(|_| variant_fd(kind, &mut r)).fold(0.0, f64::max);
        ok &= worst <= 1e-4;
        parts.push(format!("{kind} {worst:.1e}"));
    }
    let worst = (0..per).map(|_| discriminator_fd(&mut r)).fold(0.0, f64::max);
    ok &= worst <= 1e-4;
    parts.push(format!("discriminator {worst:.1e}"));
    let worst = (0..per).map(|_| penalty_fd(&mut r)).fold(0.0, f64::max);
    ok &= worst <= 1e-3;
    parts.push(format!("penalty {worst:.1e}"));
    check(ok, format!("{per} configs each, max rel err: {}", parts.join(", ")))
}

/// Top two singular values by up to 20000 rounds of power iteration on `W^T W`,
/// the second after deflating the first.
fn top_two_singular(w: &Array2<f64>) -> (f64, f64) {
    let wtw = w.t().dot(w);
    let top = |m: &Array2<f64>| {
        let mut x = Array1::from_shape_fn(m.ncols(), |i| 1.0 + 0.01 * i as f64);
        let mut last = f64::MAX;
        for round in 0..20_000 {
            let y = m.dot(&x);
            let norm = y.dot(&y).sqrt();
            x = &y / norm;
            if round > 100 && (norm - last).abs() <= 1e-15 * norm {
                break;
            }
            last = norm;
        }
        (x.dot(&m.dot(&x)), x)
    };
    let (l1, x1) = top(&wtw);
    let outer = Array2::from_shape_fn(wtw.dim(), |(i, j)| l1 * x1[i] * x1[j]);
    let (l2, _) = top(&(&wtw - &outer));
    (l1.sqrt(), l2.max(0.0).sqrt())
}

/// Power iteration gains a factor `(s2/s1)^2` per round, so 50 rounds only
/// pin the estimate down when the top singular value is separated. Matrices
/// with `s2/s1 <= 0.9` must land in the band; the rest are reported, and
/// must land there after 500 rounds.
fn a4() -> Outcome {
    let mut r = rng(104);
    let cases = 200;
    let (mut gapped, mut gapped_out, mut close, mut close_out) = (0, 0, 0, 0);
    let (mut lo, mut hi, mut late_worst) = (f64::MAX, f64::MIN, 0.0f64);
    for case in 0..cases {
        let (rows, cols) = if case == 0 { (128, 64) } else { (r.random_range(2..=128), r.random_range(2..=64)) };
        let w = Array2::from_shape_simple_fn((rows, cols), || r.random_range(-1.0..1.0) / (cols as f64).sqrt());
        let u = Array1::from_shape_simple_fn(rows, || normal(&mut r));
        let mut state = SpectralState::new(&u / u.dot(&u).sqrt(), cols);
        // warm: the vectors carry over between single-round steps
        for _ in 0..50 {
            state.iterate(w.view(), 1);
        }
        let (s1, s2) = top_two_singular(&w);
        let value = s1 / state.sigma(w.view());
        let inside = (0.999..=1.001).contains(&value);
        if s2 / s1 <= 0.9 {
            gapped += 1;
            gapped_out += usize::from(!inside);
            lo = lo.min(value);
            hi = hi.max(value);
        } else {
            close += 1;
            close_out += usize::from(!inside);
        }
        for _ in 0..450 {
            state.iterate(w.view(), 1);
        }
        late_worst = late_worst.max((s1 / state.sigma(w.view()) - 1.0).abs());
    }
    let detail = format!(
        "{cases} uniform matrices up to 128x64: s2/s1 <= 0.9: {gapped} matrices, {gapped_out} outside the band, range [{lo:.6}, {hi:.6}]; \
         s2/s1 > 0.9: {close_out} of {close} outside after 50 rounds; worst after 500 rounds {late_worst:.1e}"
    );
    let ok = gapped_out == 0 && late_worst <= 1e-3;
    if ok && close_out > 0 {
        return Outcome {
            verdict: Verdict::Partial,
            detail,
        };
    }
    check(ok, detail)
}

/// Selection on a single-column fixture with S = T = 24 and default
/// training settings.
fn select_on(table: &TimeTable) -> (VariantKind, String) {
    let cfg = RunConfig::parse("column = date:datetime\nhorizon = 24\n").unwrap();
    let prep = Prepared::from_table(table, &cfg).unwrap();
    let frame = prep.frame(&cfg).unwrap();
    let tr = WindowSet::for_split(&frame, prep.train_range(), 24, 24, 1).unwrap();
    let va = WindowSet::for_split(&frame, prep.val_range(), 24, 24, 1).unwrap();
    let sc = SelectionConfig { lookback: 24, horizon: 24, kernel: 25, train: cfg.train_config() };
    let (winner, report) = select_model(&tr, &va, &sc, &available_candidates(false)).unwrap();
    let scores: Vec<String> = report.entries.iter().map(|e| format!("{}={:.3e}", e.kind, e.val_mse)).collect();
    (winner.kind, scores.join(" "))
}

fn a5() -> Outcome {
    let (trend_winner, trend_scores) = select_on(&synthetic::trend_sinusoid(2000, 100.0, 0.02, 0));
    let (walk_winner, walk_scores) = select_on(&synthetic::random_walk(2000, 0));
    let again = select_on(&synthetic::trend_sinusoid(2000, 100.0, 0.02, 0)).0;
    check(
        trend_winner == VariantKind::DLinear && walk_winner == VariantKind::NLinear && again == trend_winner,
        format!("trend+sinusoid -> {trend_winner} ({trend_scores}); random walk -> {walk_winner} ({walk_scores})"),
    )
}

/// Forecast by hand: slide a buffer of rows, predict, append.
fn unrolled(model: &ModelVariant, frame: &FeatureFrame, steps: usize) -> Array2<f64> {
    let (s_len, t_len) = (model.lookback, model.horizon);
    let n = frame.len();
    let mut num: Vec<Vec<f64>> = (n - s_len..n).map(|i| frame.numeric.row(i).to_vec()).collect();
    let mut cat: Vec<Vec<f64>> = (n - s_len..n).map(|i| frame.categorical.row(i).to_vec()).collect();
    let mut tmp: Vec<Vec<f64>> = (n - s_len..n).map(|i| frame.temporal.row(i).to_vec()).collect();
    let last_num = frame.numeric.row(n - 1).to_vec();
    let last_cat = frame.categorical.row(n - 1).to_vec();
    let last_ts = frame.timestamps[n - 1];
    let block = |rows: &[Vec<f64>]| {
        let w = rows[0].len();
        Array2::from_shape_vec((rows.len(), w), rows.concat()).unwrap()
    };
    let mut out = Array2::zeros((steps * t_len, model.n_targets()));
    for h in 0..steps {
        let at = num.len() - s_len;
        let (wn, wc, wt) = (block(&num[at..]), block(&cat[at..]), block(&tmp[at..]));
        let window = ModelWindow {
            numeric: wn.view(),
            categorical: wc.view(),
            temporal: wt.view(),
        };
        let pred = model.predict(&window).unwrap();
        for i in 0..t_len {
            let mut row = last_num.clone();
            for (j, &ch) in model.layout.targets.iter().enumerate() {
                row[ch] = pred[[i, j]];
                out[[h * t_len + i, j]] = pred[[i, j]];
            }
            num.push(row);
            cat.push(last_cat.clone());
            let ts = last_ts + Span::hours((h * t_len + i + 1) as i64);
            tmp.push(temporal_row(&ts).to_vec());
        }
    }
    out
}

fn a6() -> Outcome {
    let mut r = rng(106);
    let mut mismatches = 0;
    let mut single_mismatches = 0;
    let cases = 100;
    for case in 0..cases {
        let kind = VariantKind::ALL[case % 4];
        let s_len = r.random_range(1..=10);
        let t_len = r.random_range(1..=8);
        let steps = r.random_range(1..=5);
        let n_numeric = r.random_range(1..=3);
        let targets = random_targets(&mut r, n_numeric);
        let kernel = [1, 3, 25][r.random_range(0..3)];
        let (n, with_cat) = (s_len + r.random_range(0..6), r.random_bool(0.5));
        let frame = random_frame(&mut r, n, n_numeric, with_cat, &targets, kernel);
        let model = ModelVariant::new(kind, s_len, t_len, kernel, frame.layout(), r.random_bool(0.5), &mut r).unwrap();
        let got = predict_iterative_with(&model, &frame, steps, Span::hours(1)).unwrap();
        if got.values != unrolled(&model, &frame, steps) {
            mismatches += 1;
        }
        let one = predict_iterative_with(&model, &frame, 1, Span::hours(1)).unwrap();
        let n = frame.len();
        let (direct, _) = model.forward(&[frame.window(n - s_len..n)], None).unwrap();
        let direct = direct.index_axis_move(ndarray::Axis(0), 0);
        let bits = |a: &Array2<f64>| a.iter().map(|v| v.to_bits()).collect::<Vec<u64>>();
        if bits(&one.values) != bits(&direct) {
            single_mismatches += 1;
        }
    }
    check(
        mismatches == 0 && single_mismatches == 0,
        format!("{cases} cases: {mismatches} differ from the unrolled oracle, {single_mismatches} H=1 differ from one forward"),
    )
}

fn a7() -> Outcome {
    let cfg = RunConfig::parse("column = date:datetime\nhorizon = 24\n").unwrap();
    let prep = Prepared::from_table(&synthetic::sinusoid(4000, 24.0, 0.1, 0), &cfg).unwrap();
    let frame = prep.frame(&cfg).unwrap();
    let tr = WindowSet::for_split(&frame, prep.train_range(), 24, 24, 1).unwrap();
    let va = WindowSet::for_split(&frame, prep.val_range(), 24, 24, 1).unwrap();
    let sc = SelectionConfig { lookback: 24, horizon: 24, kernel: 25, train: cfg.train_config() };
    let (winner, _) = select_model(&tr, &va, &sc, &available_candidates(false)).unwrap();
    let before = evaluate_mse(&winner, &va).unwrap();
    let gan = train_gan(winner.clone(), &tr, &va, &cfg.gan_config()).unwrap();
    let ratio = gan.best_val_mse / before;
    let logged_min = gan.log.iter().map(|e| e.val_mse).fold(f64::INFINITY, f64::min);
    let returned = evaluate_mse(&gan.model, &va).unwrap();
    let snapshot = gan.best_val_mse == gan.initial_val_mse.min(logged_min)
        && (returned - gan.best_val_mse).abs() <= 1e-12 * gan.best_val_mse
        && gan.initial_val_mse == before;
    check(
        ratio <= 1.10 && snapshot,
        format!(
            "{} {:.4e} -> {:.4e} (ratio {ratio:.4}, best epoch {} of {}; best trained epoch ratio {:.4}); snapshot contract {}",
            winner.kind,
            before,
            gan.best_val_mse,
            gan.best_epoch,
            gan.log.len(),
            logged_min / before,
            if snapshot { "holds" } else { "broken" }
        ),
    )
}

fn a8() -> Outcome {
    let y = arr1(&[1.0, 2.0]);
    let p = arr1(&[2.0, 4.0]);
    let hand = mae(y.view(), p.view()).unwrap() == 1.5 && mse(y.view(), p.view()).unwrap() == 2.5;
    let y = arr1(&[0.5, -1.0, 3.0, 2.0]);
    let p = arr1(&[1.0, 1.0, 2.0, 2.0]);
    let hand = hand && mae(y.view(), p.view()).unwrap() == 0.875 && mse(y.view(), p.view()).unwrap() == 1.3125;

    // single target with span 4 (a power of two) so scaling is exact
    let n = 300;
    let values: Vec<f64> = (0..n).map(|i| 1.0 + 2.0 * (1.0 + (i as f64 * 0.37).sin())).collect();
    let mut values = values;
    values[0] = 1.0;
    values[1] = 5.0;
    let t = TimeTable::new("date", synthetic::hourly(n), vec![Column::new("y", ColumnData::numeric(values))]).unwrap();
    let cfg = RunConfig::parse("column = date:datetime\nhorizon = 4\n").unwrap();
    let prep = Prepared::from_table(&t, &cfg).unwrap();
    let frame = prep.frame(&cfg).unwrap();
    let span = prep.params.span("y").unwrap();
    let model = ModelVariant::new(VariantKind::Linear, 8, 4, 25, frame.layout(), true, &mut rng(108)).unwrap();
    let rep = evaluate_forecasts(&[model], &frame, prep.test_range(), 1, ForecastMode::Iterative, Some(&prep.params)).unwrap();
    let scaled = rep.mae_raw == rep.mae * span;
    check(
        hand && scaled && span == 4.0,
        format!(
            "hand values {}; span {span}: raw MAE {:.6} vs {:.6} x span",
            if hand { "match" } else { "differ" },
            rep.mae_raw,
            rep.mae
        ),
    )
}

fn a9() -> Outcome {
    let Ok(path) = std::env::var("HCAST_ETTH1") else {
        return Outcome {
            verdict: Verdict::Unverified,
            detail: "set HCAST_ETTH1 to the ETTh1 csv to run this check".into(),
        };
    };
    let dir = tempfile::tempdir().unwrap();
    let run = |norm: &str, seed: u64| {
        let text = format!(
            "data = {path}\noutput = {}\ncolumn = date:datetime\nhorizon = 96\nlookback = 96\nnormalization = {norm}\nseed = {seed}\n",
            dir.path().join(format!("{norm}{seed}")).display()
        );
        let cfg = RunConfig::parse(&text).unwrap();
        cmd_prepare(&cfg).unwrap();
        cmd_train(&cfg).unwrap();
        cmd_evaluate(&cfg, None, None).unwrap()[0].report.mse
    };
    let z = (0..3).map(|s| run("zscore", s)).sum::<f64>() / 3.0;
    let m = (0..3).map(|s| run("minmax", s)).sum::<f64>() / 3.0;
    let target_ok = (z / 0.338 - 1.0).abs() <= 0.2;
    let detail = format!("z-score test MSE {z:.4} (target 0.338 +-20%: {}), min-max {m:.4}", if target_ok { "met" } else { "missed" });
    match std::env::var("HCAST_ETTH1_MINMAX_FROZEN").ok().and_then(|v| v.parse::<f64>().ok()) {
        Some(frozen) => check((m / frozen - 1.0).abs() <= 0.2, format!("{detail} vs frozen {frozen:.4}")),
        None => Outcome {
            verdict: Verdict::Unverified,
            detail: format!("{detail}; no frozen min-max value recorded yet"),
        },
    }
}

fn a10() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    synthetic::load_with_shift(1200, 10).write_csv(&dir.path().join("data.csv")).unwrap();
    let conf = dir.path().join("run.conf");
    std::fs::write(&conf, "data = data.csv\noutput = out\ncolumn = date:datetime\ncolumn = shift:categorical\ntargets = load\nseed = 5\n").unwrap();
    let cfg = RunConfig::load(&conf).unwrap();
    cmd_prepare(&cfg).unwrap();
    let first = std::fs::read(cmd_train(&cfg).unwrap().model_path).unwrap();
    let second = std::fs::read(cmd_train(&cfg).unwrap().model_path).unwrap();
    check(first == second, format!("two runs wrote {} and {} bytes, {}", first.len(), second.len(), if first == second { "identical" } else { "different" }))
}

type Criterion = (&'static str, fn() -> Outcome, u64);

fn main() {
    let criteria: [Criterion; 10] = [
        ("A1", a1, 5),
        ("A2", a2, 5),
        ("A3", a3, 60),
        ("A4", a4, 5),
        ("A5", a5, 180),
        ("A6", a6, 10),
        ("A7", a7, 600),
        ("A8", a8, 5),
        ("A9", a9, 1800),
        ("A10", a10, 600),
    ];
    let wanted: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (id, run, budget) in criteria {
        if !wanted.is_empty() && !wanted.iter().any(|w| w == id) {
            continue;
        }
        let started = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            check(false, format!("panicked: {msg}"))
        });
        let elapsed = started.elapsed();
        let outcome = within(outcome, elapsed, Duration::from_secs(budget));
        let tag = match outcome.verdict {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Partial => "PARTIAL",
            Verdict::Unverified => "UNVERIFIED",
        };
        if outcome.verdict == Verdict::Fail {
            failed += 1;
        }
        println!("{id} {tag} ({:.1} s) {}", elapsed.as_secs_f64(), outcome.detail);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
