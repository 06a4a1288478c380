//! Gamma, Bessel and hypergeometric functions plus the adaptive integrators.

use fadingmgf::specfun::{bessel_i, gamma, hyp1f1, hyp2f1, integrate_semi_infinite, ln_bessel_i, ln_hyp1f1};

fn main() -> fadingmgf::Result<()> {
    println!("Gamma(4.5)           = {}", gamma(4.5));
    println!("I_1.3(7.5)           = {}", bessel_i(1.3, 7.5)?);
    println!("ln I_2(5000)         = {}", ln_bessel_i(2.0, 5000.0)?);
    println!("2F1(0.75,1.25;1.5;.6)= {}", hyp2f1(0.75, 1.25, 1.5, 0.6)?);
    println!("2F1(1,1;2;0.999)     = {}", hyp2f1(1.0, 1.0, 2.0, 0.999)?);
    println!("1F1(1.5;2.5;10)      = {}", hyp1f1(1.5, 2.5, 10.0)?);
    println!("ln 1F1(3;3;2500)     = {}", ln_hyp1f1(3.0, 3.0, 2500.0)?);

    let q = integrate_semi_infinite(|g: f64| g.powf(0.7) * (-g.powf(1.3)).exp(), 1e-12)?;
    println!(
        "int_0^inf g^0.7 e^(-g^1.3) dg = {} (error {:.1e}, {} evaluations; Gamma(1.7/1.3)/1.3 = {})",
        q.value,
        q.error_estimate,
        q.evaluations,
        gamma(1.7 / 1.3) / 1.3
    );
    Ok(())
}
