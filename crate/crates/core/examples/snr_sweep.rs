//! A mean-SNR sweep emitted as CSV, with the numeric oracle alongside.

use fadingmgf::errorrates::{aser_sweep, db_grid, modulation_spec, Scheme};
use fadingmgf::mgf::MgfStrategy;
use fadingmgf::{FadingModel, FitCache};

fn main() -> fadingmgf::Result<()> {
    let cache = FitCache::default();
    let model = FadingModel::AlphaMu { alpha: 3.0, mu: 1.5, gbar: 1.0 };
    let spec = modulation_spec(Scheme::Mqam, 16)?;
    let grid = db_grid(-5.0, 30.0, 2.5)?;
    let approx = aser_sweep(&model, &grid, &spec, MgfStrategy::Approx, &cache)?;
    let numeric = aser_sweep(&model, &grid, &spec, MgfStrategy::Numeric, &cache)?;
    print!("{}", approx.to_csv());
    println!("\ngbar_db, approx/numeric - 1");
    for ((db, a), (_, n)) in approx.values().into_iter().zip(numeric.values()) {
        println!("{db:>6}, {:+.3e}", a / n - 1.0);
    }
    Ok(())
}
