//! Runs the self-validation suite, then again with a perturbed exponent.

use fadingmgf::cli::validate::run_suite;
use fadingmgf::models::Exponent;
use fadingmgf::FitCache;

fn main() {
    let cache = FitCache::default();
    let clean = run_suite(&[], &cache);
    print!("{}", clean.summary());
    println!();
    let broken = run_suite(&[(Exponent::M, 0.5)], &cache);
    print!("{}", broken.summary());
}
