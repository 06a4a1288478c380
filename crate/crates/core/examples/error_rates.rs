//! Average symbol error rates for every modulation row.

use fadingmgf::errorrates::{aser_with, modulation_spec, rayleigh_bpsk_reference, Scheme};
use fadingmgf::mgf::MgfStrategy;
use fadingmgf::{FadingModel, FitCache};

fn main() -> fadingmgf::Result<()> {
    let cache = FitCache::default();
    let rayleigh = FadingModel::rayleigh(10.0)?;
    let bpsk = modulation_spec(Scheme::Mpsk, 2)?;
    let v = aser_with(&rayleigh, &bpsk, MgfStrategy::Numeric, &cache)?;
    println!(
        "Rayleigh BPSK at 10 dB: {:.12e} (closed form {:.12e}, quadrature error {:.1e})",
        v.ser,
        rayleigh_bpsk_reference(10.0),
        v.quad_error
    );

    let model = FadingModel::AlphaKappaMu { alpha: 2.0, kappa: 2.0, mu: 1.5, gbar: 10.0 };
    println!("\n{model:?}");
    for (scheme, orders) in [
        (Scheme::Mpsk, vec![2, 4, 8, 16]),
        (Scheme::Mpam, vec![2, 4, 8]),
        (Scheme::Mqam, vec![4, 16, 64]),
        (Scheme::Mdpsk, vec![2, 4]),
    ] {
        for m in orders {
            let spec = modulation_spec(scheme, m)?;
            match aser_with(&model, &spec, MgfStrategy::Auto, &cache) {
                Ok(v) => println!("  {m:>3}-{scheme:<6} {:.6e} ({:?})", v.ser, spec.verification),
                Err(e) => println!("  {m:>3}-{scheme:<6} {e}"),
            }
        }
    }
    Ok(())
}
