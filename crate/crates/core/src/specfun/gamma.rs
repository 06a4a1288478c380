//! Gamma-family functions on the real line.

use std::f64::consts::PI;

use crate::error::{domain, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Above this the asymptotic series is accurate to a few ulps.
const STIRLING_FROM: f64 = 15.0;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Γ(x) for 0.5 ≤ x < 15 (Lanczos product form; `powf` keeps the
/// large-argument error near one ulp instead of |ln Γ|·ε).
fn gamma_lanczos(x: f64) -> f64 {
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * acc
}

fn stirling_series(x: f64) -> f64 {
    let r = 1.0 / x;
    let r2 = r * r;
    r * (1.0 / 12.0 - r2 * (1.0 / 360.0 - r2 * (1.0 / 1260.0 - r2 * (1.0 / 1680.0 - r2 / 1188.0))))
}

fn ln_gamma_stirling(x: f64) -> f64 {
    (x - 0.5) * x.ln() - x + LN_SQRT_2PI + stirling_series(x)
}

/// Γ(x) for 15 ≤ x < 171.6 from the asymptotic series in product form,
/// with the power split in two so it cannot overflow early.
fn gamma_stirling(x: f64) -> f64 {
    let half = x.powf(0.5 * (x - 0.5)) * (-0.5 * x).exp();
    (2.0 * PI).sqrt() * half * half * stirling_series(x).exp()
}

const GAMMA_OVERFLOW: f64 = 171.6;

/// ln Γ(x) for x > 0 without argument checks.
pub(crate) fn lgamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection; Γ(x)Γ(1-x) = π / sin(πx)
        PI.ln() - (PI * x).sin().ln() - lgamma(1.0 - x)
    } else if x < STIRLING_FROM {
        gamma_lanczos(x).ln()
    } else if x < GAMMA_OVERFLOW {
        gamma_stirling(x).ln()
    } else {
        ln_gamma_stirling(x)
    }
}

/// Natural log of the gamma function.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(domain("ln_gamma", format!("x = {x} must be finite and > 0")));
    }
    Ok(lgamma(x))
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.round()
}

/// ln |Γ(x)| and the sign of Γ(x) for any real x that is not a pole.
pub(crate) fn ln_gamma_abs(x: f64) -> (f64, f64) {
    if x > 0.0 {
        return (lgamma(x), 1.0);
    }
    debug_assert!(!is_nonpositive_integer(x));
    let s = (PI * x).sin();
    let (l, sg) = ln_gamma_abs(1.0 - x);
    (PI.ln() - s.abs().ln() - l, s.signum() * sg)
}

/// 1/Γ(x), equal to zero at the poles.
pub fn rgamma(x: f64) -> f64 {
    if is_nonpositive_integer(x) {
        return 0.0;
    }
    if x > 0.5 && x < STIRLING_FROM {
        return 1.0 / gamma_lanczos(x);
    }
    if (STIRLING_FROM..GAMMA_OVERFLOW).contains(&x) {
        return 1.0 / gamma_stirling(x);
    }
    let (l, s) = ln_gamma_abs(x);
    s * (-l).exp()
}

/// Γ(x) on the real line (±∞ at poles).
pub fn gamma(x: f64) -> f64 {
    if is_nonpositive_integer(x) {
        return f64::INFINITY;
    }
    if x >= 0.5 && x < STIRLING_FROM {
        return gamma_lanczos(x);
    }
    if (STIRLING_FROM..GAMMA_OVERFLOW).contains(&x) {
        return gamma_stirling(x);
    }
    let (l, s) = ln_gamma_abs(x);
    s * l.exp()
}

/// Digamma ψ(x) = Γ'(x)/Γ(x).
pub fn digamma(x: f64) -> f64 {
    if is_nonpositive_integer(x) {
        return f64::NAN;
    }
    if x < 0.5 {
        return digamma(1.0 - x) - PI / (PI * x).tan();
    }
    let mut x = x;
    let mut acc = 0.0;
    while x < STIRLING_FROM {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let r2 = 1.0 / (x * x);
    let tail = r2
        * (1.0 / 12.0
            - r2 * (1.0 / 120.0 - r2 * (1.0 / 252.0 - r2 * (1.0 / 240.0 - r2 * (1.0 / 132.0)))));
    acc + x.ln() - 0.5 / x - tail
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn small_integer_and_half_values() {
        assert!(ln_gamma(1.0).unwrap().abs() < 1e-15);
        assert!(rel(ln_gamma(5.0).unwrap(), 24f64.ln()) < 1e-14);
        assert!(rel(ln_gamma(0.5).unwrap(), PI.sqrt().ln()) < 1e-14);
    }

    #[test]
    fn factorials_up_to_170() {
        let mut fact = 1.0f64;
        for n in 1..=170u32 {
            let g = ln_gamma(n as f64 + 1.0).unwrap().exp();
            fact *= n as f64;
            assert!(rel(g, fact) < 1e-13, "n = {n}: {g} vs {fact}");
        }
    }

    #[test]
    fn tiny_argument() {
        // Γ(x) ≈ 1/x - γ_E for small x
        let x = 1e-3;
        let expect = 1.0 / x - 0.577_215_664_901_532_9 + 0.989_055_995_327_972_6 * x;
        assert!(rel(ln_gamma(x).unwrap().exp(), expect) < 1e-6);
    }

    #[test]
    fn rejects_nonpositive() {
        assert!(ln_gamma(0.0).is_err());
        assert!(ln_gamma(-2.5).is_err());
        assert!(ln_gamma(f64::NAN).is_err());
    }

    #[test]
    fn negative_arguments_and_reciprocal() {
        // Γ(-0.5) = -2√π
        assert!(rel(gamma(-0.5), -2.0 * PI.sqrt()) < 1e-14);
        assert_eq!(rgamma(-3.0), 0.0);
        assert!(rel(rgamma(-1.5), 1.0 / (4.0 / 3.0 * PI.sqrt())) < 1e-13);
    }

    #[test]
    fn digamma_values() {
        let euler = 0.577_215_664_901_532_9;
        assert!((digamma(1.0) + euler).abs() < 1e-14);
        // ψ(1/2) = -γ - 2 ln 2
        assert!((digamma(0.5) + euler + 2.0 * 2f64.ln()).abs() < 1e-14);
        // ψ(-0.5) = ψ(0.5) + 2
        assert!((digamma(-0.5) - digamma(0.5) - 2.0).abs() < 1e-13);
    }
}
