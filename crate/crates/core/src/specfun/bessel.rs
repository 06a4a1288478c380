//! Modified Bessel function of the first kind, I_ν(x), for real ν > −1 and x ≥ 0.
//!
//! Everything is computed as a logarithm. The power series
//! Σ (x²/4)^k / (k! Γ(k+ν+1)) has only positive terms for ν > −1 and is used
//! while x ≤ 30 + ν²; beyond that the Hankel expansion
//! e^x/√(2πx) Σ (−1)^k a_k(ν) x^{−k} converges to full precision before its
//! terms turn around.

use std::f64::consts::PI;

use super::gamma::lgamma;
use super::log_sum_exp;
use crate::error::{domain, Result};

fn check(nu: f64, x: f64) -> Result<()> {
    if !nu.is_finite() || nu <= -1.0 {
        return Err(domain("bessel_i", format!("order nu = {nu} must be finite and > -1")));
    }
    if !x.is_finite() || x < 0.0 {
        return Err(domain("bessel_i", format!("x = {x} must be finite and >= 0")));
    }
    Ok(())
}

/// ln Σ_k (x²/4)^k / (k! Γ(k+ν+1)), i.e. ln[I_ν(x) / (x/2)^ν].
fn ln_series_ratio(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return -lgamma(nu + 1.0);
    }
    let lq = 2.0 * (0.5 * x).ln();
    let mut terms = Vec::with_capacity(64);
    let mut t = -lgamma(nu + 1.0);
    let mut best = t;
    let mut k = 0.0f64;
    loop {
        terms.push(t);
        best = best.max(t);
        k += 1.0;
        t += lq - k.ln() - (k + nu).ln();
        if t.is_nan() {
            return f64::NAN;
        }
        if t < best - 40.0 && k > 0.5 * x {
            break;
        }
    }
    log_sum_exp(&terms)
}

/// ln[ Σ (−1)^k a_k(ν)/x^k ] of the Hankel expansion.
fn ln_hankel_sum(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    for k in 1..200 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        let next = -term * (mu - odd * odd) / (8.0 * kf * x);
        if next.abs() > term.abs() && kf > nu + 1.0 {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum.ln()
}

fn use_series(nu: f64, x: f64) -> bool {
    x <= 30.0 + nu * nu
}

/// ln I_ν(x). Returns −∞ for x = 0 and ν > 0.
pub fn ln_bessel_i(nu: f64, x: f64) -> Result<f64> {
    check(nu, x)?;
    Ok(ln_bessel_i_unchecked(nu, x))
}

pub(crate) fn ln_bessel_i_unchecked(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if nu == 0.0 {
            0.0
        } else if nu > 0.0 {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        };
    }
    if use_series(nu, x) {
        nu * (0.5 * x).ln() + ln_series_ratio(nu, x)
    } else {
        x - 0.5 * (2.0 * PI * x).ln() + ln_hankel_sum(nu, x)
    }
}

/// ln[ I_ν(x) / (x/2)^ν ], finite at x = 0 where it equals −ln Γ(ν+1).
///
/// This is the form the densities use: the (x/2)^ν factor is folded into
/// the normalisation constant so that d = 0 needs no special casing.
pub fn ln_bessel_i_ratio(nu: f64, x: f64) -> Result<f64> {
    check(nu, x)?;
    Ok(ln_bessel_i_ratio_unchecked(nu, x))
}

pub(crate) fn ln_bessel_i_ratio_unchecked(nu: f64, x: f64) -> f64 {
    if use_series(nu, x) {
        ln_series_ratio(nu, x)
    } else {
        x - 0.5 * (2.0 * PI * x).ln() + ln_hankel_sum(nu, x) - nu * (0.5 * x).ln()
    }
}

/// I_ν(x).
pub fn bessel_i(nu: f64, x: f64) -> Result<f64> {
    Ok(ln_bessel_i(nu, x)?.exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn order_zero_at_origin() {
        assert_eq!(bessel_i(0.0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_i(1.5, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn half_integer_closed_forms() {
        for &x in &[0.1, 2.0, 10.0, 29.0, 31.0, 45.0] {
            let i_half = (2.0 / (PI * x)).sqrt() * x.sinh();
            assert!(rel(bessel_i(0.5, x).unwrap(), i_half) < 1e-13, "x={x}");
            let i_mhalf = (2.0 / (PI * x)).sqrt() * x.cosh();
            assert!(rel(bessel_i(-0.5, x).unwrap(), i_mhalf) < 1e-13, "x={x}");
        }
    }

    #[test]
    fn large_argument_log_does_not_overflow() {
        let l = ln_bessel_i(0.5, 1e4).unwrap();
        // ln sinh(x) ≈ x - ln 2 for large x
        let expect = 0.5 * (2.0 / (PI * 1e4)).ln() + 1e4 - 2f64.ln();
        assert!((l - expect).abs() < 1e-10);
    }

    #[test]
    fn ratio_at_zero() {
        let r = ln_bessel_i_ratio(2.5, 0.0).unwrap();
        assert!((r + lgamma(3.5)).abs() < 1e-15);
    }

    #[test]
    fn domain_errors() {
        assert!(bessel_i(-1.0, 1.0).is_err());
        assert!(bessel_i(0.0, -1.0).is_err());
    }

    #[test]
    fn series_and_hankel_agree_at_switch() {
        for &nu in &[0.0f64, 0.7, 2.0, 4.5] {
            let x = 30.0 + nu * nu;
            let s = nu * (0.5 * x).ln() + ln_series_ratio(nu, x);
            let h = x - 0.5 * (2.0 * PI * x).ln() + ln_hankel_sum(nu, x);
            assert!((s - h).abs() < 1e-12, "nu={nu}: {s} vs {h}");
        }
    }
}
