//! The three MGF routes side by side: numerical oracle, exact closed forms
//! and the exponential-sum approximation.

use fadingmgf::mgf::{mgf_eta_lambda_mu_hyp, mgf_eta_lambda_mu_rational, mgf_numeric, MgfEvaluator, MgfStrategy};
use fadingmgf::{FadingModel, FitCache};

fn main() -> fadingmgf::Result<()> {
    let elm = FadingModel::EtaLambdaMu { eta: 2.0, lambda: 0.3, mu: 1.5, gbar: 2.0 };
    println!("eta-lambda-mu: rational form, hypergeometric form, numeric oracle");
    for s in [0.0, 0.1, 1.0, 10.0, 100.0] {
        println!(
            "  s = {s:>5}: {:.15e} {:.15e} {:.15e}",
            mgf_eta_lambda_mu_rational(&elm, s)?,
            mgf_eta_lambda_mu_hyp(&elm, s)?,
            mgf_numeric(&elm, s)?
        );
    }

    let cache = FitCache::default();
    let models = [
        FadingModel::AlphaMu { alpha: 2.0, mu: 2.5, gbar: 1.0 },
        FadingModel::AlphaKappaMu { alpha: 2.0, kappa: 3.0, mu: 1.0, gbar: 1.0 },
        FadingModel::AlphaMu { alpha: 1.5, mu: 1.0, gbar: 1.0 },
        FadingModel::AlphaEtaMu { alpha: 2.5, eta: 0.5, mu: 1.0, gbar: 1.0 },
    ];
    for m in models {
        let approx = MgfEvaluator::new(&m, MgfStrategy::Approx, &cache)?;
        let numeric = MgfEvaluator::new(&m, MgfStrategy::Numeric, &cache)?;
        println!("\n{m:?} (fit residual {:.2e})", approx.fit().map_or(0.0, |f| f.max_abs_err));
        for s in [0.1, 1.0, 10.0, 100.0] {
            let (a, n) = (approx.eval(s)?, numeric.eval(s)?);
            println!("  s = {s:>5}: approx {a:.8e}  numeric {n:.8e}  rel diff {:.1e}", ((a - n) / n).abs());
        }
    }

    let k = FadingModel::AlphaKappaMu { alpha: 2.0, kappa: 1.0, mu: 1.0, gbar: 1.0 };
    match MgfEvaluator::new(&k, MgfStrategy::Exact, &cache) {
        Err(e) => println!("\nexact strategy on alpha-kappa-mu: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
