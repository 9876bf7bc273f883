//! Trains every applicable variant on the same batches and keeps the one
//! with the lowest validation MSE.

use hcast::cli::{Prepared, RunConfig};
use hcast::frame::WindowSet;
use hcast::selection::{available_candidates, select_model, SelectionConfig};
use hcast::synthetic;

fn main() -> hcast::Result<()> {
    let cfg = RunConfig::parse("column = date:datetime\nhorizon = 24\n")?;
    for (name, table) in [
        ("trend + sinusoid", synthetic::trend_sinusoid(2000, 100.0, 0.02, 0)),
        ("random walk", synthetic::random_walk(2000, 0)),
    ] {
        let prep = Prepared::from_table(&table, &cfg)?;
        let frame = prep.frame(&cfg)?;
        let train = WindowSet::for_split(&frame, prep.train_range(), 24, 24, 1)?;
        let val = WindowSet::for_split(&frame, prep.val_range(), 24, 24, 1)?;
        let sc = SelectionConfig {
            lookback: 24,
            horizon: 24,
            kernel: cfg.kernel,
            train: cfg.train_config(),
        };
        let (winner, report) = select_model(&train, &val, &sc, &available_candidates(false))?;
        println!("{name}: winner {} (config {})", winner.kind, report.config_hash);
        print!("{}", report.to_csv());
        println!();
    }
    Ok(())
}
