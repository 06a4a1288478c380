//! Densities of the six families and their named special cases.

use fadingmgf::models::ExponentShifts;
use fadingmgf::FadingModel;

fn main() -> fadingmgf::Result<()> {
    let gbar = 2.0;
    let models = [
        ("eta-lambda-mu", FadingModel::EtaLambdaMu { eta: 0.5, lambda: 0.3, mu: 1.2, gbar }),
        ("alpha-mu", FadingModel::AlphaMu { alpha: 3.0, mu: 2.0, gbar }),
        ("alpha-eta-mu", FadingModel::AlphaEtaMu { alpha: 2.5, eta: 0.4, mu: 0.8, gbar }),
        ("alpha-lambda-mu", FadingModel::AlphaLambdaMu { alpha: 1.8, lambda: 0.5, mu: 1.3, gbar }),
        ("alpha-kappa-mu", FadingModel::AlphaKappaMu { alpha: 2.2, kappa: 1.5, mu: 1.1, gbar }),
        ("alpha-lambda-eta-mu", FadingModel::AlphaLambdaEtaMu { alpha: 3.0, lambda: 0.4, eta: 2.0, mu: 0.9, gbar }),
        ("rayleigh", FadingModel::rayleigh(gbar)?),
        ("hoyt q=0.5", FadingModel::hoyt(0.5, gbar)?),
        ("rician-like kappa-mu", FadingModel::kappa_mu(3.0, 1.0, gbar)?),
        ("weibull alpha=1.5", FadingModel::weibull(1.5, gbar)?),
    ];
    println!("{:<22} {:>12} {:>12} {:>12} {:>14} {:>14}", "model", "f(0.5)", "f(2)", "f(6)", "integral-1", "mean/gbar-1");
    for (name, m) in models {
        let cp = m.compact_params()?;
        let norm = cp.damped_moment(0, 0.0, gbar, 1e-10)?.value;
        let mean = cp.damped_moment(1, 0.0, gbar, 1e-10)?.value;
        println!(
            "{name:<22} {:>12.6e} {:>12.6e} {:>12.6e} {:>14.2e} {:>14.2e}",
            m.pdf(0.5)?,
            m.pdf(2.0)?,
            m.pdf(6.0)?,
            norm - 1.0,
            mean / gbar - 1.0
        );
    }

    let m = FadingModel::AlphaKappaMu { alpha: 2.2, kappa: 1.5, mu: 1.1, gbar };
    let cp = m.compact_params_shifted(&ExponentShifts::default())?;
    println!("\ncompact form of {m:?}:\n{cp:#?}");

    let bad = FadingModel::AlphaMu { alpha: 12.0, mu: -1.0, gbar };
    if let Err(v) = bad.validate() {
        for x in v {
            println!("rejected: {x}");
        }
    }
    Ok(())
}
