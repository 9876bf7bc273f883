//! Refines a selected forecaster with the conditional GAN and prints the
//! per-epoch log. The returned generator is the best validation snapshot.

use hcast::adversarial::train_gan;
use hcast::cli::{Prepared, RunConfig};
use hcast::frame::WindowSet;
use hcast::models::{evaluate_mse, init_variant, train_supervised, VariantKind};
use hcast::synthetic;

fn main() -> hcast::Result<()> {
    let cfg = RunConfig::parse("column = date:datetime\nhorizon = 24\ngan_epochs = 20\n")?;
    let prep = Prepared::from_table(&synthetic::sinusoid(3000, 24.0, 0.1, 2), &cfg)?;
    let frame = prep.frame(&cfg)?;
    let train = WindowSet::for_split(&frame, prep.train_range(), 24, 24, 1)?;
    let val = WindowSet::for_split(&frame, prep.val_range(), 24, 24, 1)?;

    let tc = cfg.train_config();
    let init = init_variant(VariantKind::NLinear, frame.layout(), 24, 24, cfg.kernel, tc.use_bias, tc.seed)?;
    let fitted = train_supervised(init, &train, &val, &tc)?;
    println!("supervised NLinear: val mse {:.6}", evaluate_mse(&fitted.model, &val)?);

    let out = train_gan(fitted.model, &train, &val, &cfg.gan_config())?;
    print!("{}", out.log_csv());
    println!(
        "kept epoch {} with val mse {:.6} (input {:.6})",
        out.best_epoch, out.best_val_mse, out.initial_val_mse
    );
    for w in &out.warnings {
        println!("warning: {w}");
    }
    Ok(())
}
