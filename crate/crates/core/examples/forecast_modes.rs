//! One-step, iterative and direct multi-step forecasts scored on the test
//! split, in normalized and original units.

use hcast::cli::{direct_models, Prepared, RunConfig};
use hcast::forecast::{evaluate_forecasts, ForecastMode};
use hcast::frame::WindowSet;
use hcast::models::{init_variant, train_supervised, VariantKind};
use hcast::synthetic;

fn main() -> hcast::Result<()> {
    let raw = synthetic::load_with_shift(1500, 4);
    let text = "column = date:datetime\ncolumn = shift:categorical\ntargets = load\nhorizon = 6\nlookback = 24\n";
    let cfg = RunConfig::parse(text)?;
    let prep = Prepared::from_table(&raw, &cfg)?;
    let frame = prep.frame(&cfg)?;
    let tc = cfg.train_config();

    let fit = |horizon: usize| -> hcast::Result<_> {
        let train = WindowSet::for_split(&frame, prep.train_range(), 24, horizon, 1)?;
        let val = WindowSet::for_split(&frame, prep.val_range(), 24, horizon, 1)?;
        let init = init_variant(VariantKind::DELinear, frame.layout(), 24, horizon, cfg.kernel, tc.use_bias, tc.seed)?;
        Ok(train_supervised(init, &train, &val, &tc)?.model)
    };

    let one_step = fit(1)?;
    let r = evaluate_forecasts(&[one_step], &frame, prep.test_range(), 1, ForecastMode::Single, Some(&prep.params))?;
    println!("single     T=1        mse {:.5}  mae_raw {:.4}", r.mse, r.mae_raw);

    let model = fit(6)?;
    for steps in [1, 2, 4] {
        let r = evaluate_forecasts(std::slice::from_ref(&model), &frame, prep.test_range(), steps, ForecastMode::Iterative, Some(&prep.params))?;
        println!("iterative  H={:<3}      mse {:.5}  mae_raw {:.4}", steps * 6, r.mse, r.mae_raw);
    }
    let ensemble = direct_models(&model, &frame, &prep, 4, &cfg)?;
    let r = evaluate_forecasts(&ensemble, &frame, prep.test_range(), 4, ForecastMode::Direct, Some(&prep.params))?;
    println!("direct     H={:<3}      mse {:.5}  mae_raw {:.4}", 24, r.mse, r.mae_raw);
    Ok(())
}
