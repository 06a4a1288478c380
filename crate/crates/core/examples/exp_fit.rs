//! Four-term exponential-sum fits of e^{-z^{1/alpha_bar}}, the quality gate
//! and the persistent fit store.

use fadingmgf::expfit::{fit_exp_sum_with, FitCache, FitOptions, GridSpec};

fn main() -> fadingmgf::Result<()> {
    let opts = FitOptions {
        gate: f64::INFINITY,
        ..FitOptions::default()
    };
    let dense = GridSpec::default().denser(10);
    println!("{:>6} {:>11} {:>11} {:>11}  terms (a_i, B_i)", "abar", "fit grid", "dense grid", "mellin rel");
    for ab in [0.5, 0.75, 1.0, 1.25, 1.5, 2.0, 3.0] {
        let f = fit_exp_sum_with(ab, &opts)?;
        let terms: Vec<String> = f.a.iter().zip(&f.b).map(|(a, b)| format!("({a:.4}, {b:.4})")).collect();
        println!(
            "{ab:>6} {:>11.3e} {:>11.3e} {:>11.3e}  {}",
            f.max_abs_err,
            f.sup_error_on(&dense),
            f.max_mellin_rel_err(),
            terms.join(" ")
        );
    }

    let dir = std::env::temp_dir().join("fadingmgf-exp-fit-example");
    std::fs::create_dir_all(&dir)?;
    let store = dir.join("fits.txt");
    let _ = std::fs::remove_file(&store);
    let cache = FitCache::with_store(&store, FitOptions::default())?;
    cache.get_or_fit(1.25)?;
    println!("\nfitted once, optimizer runs = {}", cache.optimizer_runs());
    let reloaded = FitCache::with_store(&store, FitOptions::default())?;
    reloaded.get_or_fit(1.25)?;
    println!("reloaded store, optimizer runs = {}", reloaded.optimizer_runs());
    println!("{}", std::fs::read_to_string(&store)?);

    match cache.get_or_fit(2.0) {
        Err(e) => println!("gate: {e}"),
        Ok(f) => println!("alpha_bar = 2 passed with {:.3e}", f.max_abs_err),
    }
    Ok(())
}
