//! The command sequence end to end in a scratch directory: prepare, train,
//! evaluate with a horizon sweep, forecast and report.

use hcast::cli::{cmd_evaluate, cmd_forecast, cmd_prepare, cmd_report, cmd_train, RunConfig};
use hcast::synthetic;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    synthetic::load_with_shift(1200, 9).write_csv(&dir.path().join("data.csv"))?;
    let conf = dir.path().join("run.conf");
    std::fs::write(
        &conf,
        "data = data.csv\noutput = out\ncolumn = date:datetime\ncolumn = shift:categorical\n\
         targets = load\nhorizon = 12\ngan_epochs = 10\n",
    )?;
    let cfg = RunConfig::load(&conf)?;

    let p = cmd_prepare(&cfg)?;
    println!("prepared {:?} rows, {:?} windows", p.rows, p.windows);
    let t = cmd_train(&cfg)?;
    println!("selected {}", t.selection.winner);
    for row in cmd_evaluate(&cfg, None, Some(&[12, 24, 48]))? {
        println!("{}", row.to_csv_line());
    }
    let (f, path) = cmd_forecast(&cfg, None, Some(2))?;
    println!("forecast {} rows -> {}", f.values.nrows(), path.display());
    print!("{}", cmd_report(&cfg)?);
    Ok(())
}
