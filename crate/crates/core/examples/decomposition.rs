//! Trend/seasonal split of one series and the full per-timestep embedding
//! of a table with a categorical column.

use hcast::cli::{Prepared, RunConfig};
use hcast::decompose::{build_embedding_with, extract_seasonality, extract_trend};
use hcast::synthetic;

fn main() -> hcast::Result<()> {
    let raw = synthetic::load_with_shift(240, 1);
    let load = raw.numeric("load").expect("load column");
    let trend = extract_trend(load, 25)?;
    let seasonal = extract_seasonality(load, &trend)?;
    println!("{:>4} {:>9} {:>9} {:>9}", "t", "load", "trend", "seasonal");
    for i in (0..48).step_by(4) {
        println!("{i:>4} {:>9.4} {:>9.4} {:>9.4}", load[i], trend[i], seasonal[i]);
    }

    let cfg = RunConfig::parse("column = date:datetime\ncolumn = shift:categorical\n")?;
    let prep = Prepared::from_table(&raw, &cfg)?;
    let emb = build_embedding_with(&prep.table, &prep.encoders, cfg.kernel)?;
    println!("\nembedding: {} rows x {} channels", emb.values.nrows(), emb.width());
    print!("{}", emb.channels.to_text());
    Ok(())
}
