//! Gauss ₂F₁ and Kummer ₁F₁ hypergeometric functions for real arguments.

use super::gamma::{digamma, ln_gamma_abs};
use super::log_sum_exp;
use crate::error::{domain, Result};

const MAX_TERMS: usize = 200_000;

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.round()
}

/// Π Γ(num) / Π Γ(den) through log-magnitudes and signs. A pole in the
/// denominator gives 0.
fn gamma_ratio(num: &[f64], den: &[f64]) -> f64 {
    if den.iter().any(|&x| is_nonpositive_integer(x)) {
        return 0.0;
    }
    let mut l = 0.0;
    let mut s = 1.0;
    for &x in num {
        let (lx, sx) = ln_gamma_abs(x);
        l += lx;
        s *= sx;
    }
    for &x in den {
        let (lx, sx) = ln_gamma_abs(x);
        l -= lx;
        s *= sx;
    }
    s * l.exp()
}

/// Σ (a)_n (b)_n / ((c)_n n!) zⁿ by forward recurrence on the term ratio.
fn series_2f1(a: f64, b: f64, c: f64, z: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 0..MAX_TERMS {
        let nf = n as f64;
        term *= (a + nf) * (b + nf) / ((c + nf) * (nf + 1.0)) * z;
        sum += term;
        if term == 0.0 {
            break;
        }
        let ratio = ((a + nf + 1.0) * (b + nf + 1.0) / ((c + nf + 1.0) * (nf + 2.0)) * z).abs();
        if term.abs() <= 1e-17 * sum.abs() && ratio < 1.0 {
            break;
        }
    }
    sum
}

/// Connection formula to 1−z for non-integer c−a−b.
fn connection_general(a: f64, b: f64, c: f64, z: f64) -> f64 {
    let w = 1.0 - z;
    let m = c - a - b;
    let t1 = gamma_ratio(&[c, m], &[c - a, c - b]) * series_2f1(a, b, 1.0 - m, w);
    let t2 = gamma_ratio(&[c, -m], &[a, b]) * w.powf(m) * series_2f1(c - a, c - b, m + 1.0, w);
    t1 + t2
}

/// Connection formula for c = a + b + m, m a non-negative integer
/// (logarithmic case).
fn connection_integer(a: f64, b: f64, m: usize, z: f64) -> f64 {
    let w = 1.0 - z;
    let lw = w.ln();
    let mf = m as f64;
    let c = a + b + mf;
    if m == 0 {
        let pref = gamma_ratio(&[c], &[a, b]);
        let mut sum = 0.0;
        let mut coef = 1.0; // (a)_n (b)_n / (n!)² wⁿ
        for n in 0..MAX_TERMS {
            let nf = n as f64;
            let t = coef * (2.0 * digamma(nf + 1.0) - digamma(a + nf) - digamma(b + nf) - lw);
            sum += t;
            coef *= (a + nf) * (b + nf) / ((nf + 1.0) * (nf + 1.0)) * w;
            if n > 2 && t.abs() <= 1e-17 * sum.abs() && coef.abs() <= 1e-17 * sum.abs() {
                break;
            }
        }
        return pref * sum;
    }

    let mut finite = 0.0;
    let mut coef = 1.0;
    for n in 0..m {
        let nf = n as f64;
        finite += coef;
        coef *= (a + nf) * (b + nf) / ((nf + 1.0) * (1.0 - mf + nf)) * w;
    }
    let t1 = gamma_ratio(&[mf, c], &[a + mf, b + mf]) * finite;

    let mut sum = 0.0;
    // (a+m)_n (b+m)_n / (n! (n+m)!) wⁿ, starting from 1/m!
    let mut coef = gamma_ratio(&[], &[mf + 1.0]);
    for n in 0..MAX_TERMS {
        let nf = n as f64;
        let t = coef
            * (lw - digamma(nf + 1.0) - digamma(nf + mf + 1.0) + digamma(a + nf + mf) + digamma(b + nf + mf));
        sum += t;
        coef *= (a + mf + nf) * (b + mf + nf) / ((nf + 1.0) * (nf + mf + 1.0)) * w;
        if n > 2 && t.abs() <= 1e-17 * sum.abs() && coef.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    let t2 = sign * w.powi(m as i32) * gamma_ratio(&[c], &[a, b]) * sum;
    t1 - t2
}

/// ₂F₁ near z = 1 when no transformation terminates.
fn near_one(a: f64, b: f64, c: f64, z: f64) -> f64 {
    let m = c - a - b;
    let mr = m.round();
    let delta = m - mr;
    if delta == 0.0 {
        if mr >= 0.0 {
            connection_integer(a, b, mr as usize, z)
        } else {
            // Euler: F(a,b;c;z) = (1−z)^{c−a−b} F(c−a, c−b; c; z)
            (1.0 - z).powf(m) * connection_integer(c - a, c - b, (-mr) as usize, z)
        }
    } else if delta.abs() < NEAR_INTEGER {
        // quadratic through δ ∈ {−h, 0, +h}, evaluated by shifting c
        let h = NEAR_INTEGER;
        let c0 = c - delta;
        let f0 = near_one(a, b, c0, z);
        let fm = connection_general(a, b, c0 - h, z);
        let fp = connection_general(a, b, c0 + h, z);
        let d1 = (fp - fm) / (2.0 * h);
        let d2 = (fp - 2.0 * f0 + fm) / (h * h);
        f0 + d1 * delta + 0.5 * d2 * delta * delta
    } else {
        connection_general(a, b, c, z)
    }
}

const NEAR_INTEGER: f64 = 1e-4;

/// Gauss hypergeometric function ₂F₁(a, b; c; z) for c > 0 and z ∈ [0, 1).
///
/// Summed directly for z ≤ 0.9. Above that, a Pfaff transformation is used
/// when it reduces the series to a polynomial (always the case for the
/// closed-form MGFs, where b = c); otherwise the 1−z connection formulas
/// take over, including the logarithmic case of integer c − a − b.
pub fn hyp2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite() && c.is_finite() && z.is_finite()) {
        return Err(domain("hyp2f1", "arguments must be finite"));
    }
    if c <= 0.0 {
        return Err(domain("hyp2f1", format!("c = {c} must be > 0")));
    }
    if !(0.0..1.0).contains(&z) {
        return Err(domain("hyp2f1", format!("z = {z} must lie in [0, 1)")));
    }
    Ok(hyp2f1_unchecked(a, b, c, z))
}

pub(crate) fn hyp2f1_unchecked(a: f64, b: f64, c: f64, z: f64) -> f64 {
    if z == 0.0 {
        return 1.0;
    }
    if z <= 0.9 || is_nonpositive_integer(a) || is_nonpositive_integer(b) {
        return series_2f1(a, b, c, z);
    }
    // Pfaff: F(a,b;c;z) = (1−z)^{−a} F(a, c−b; c; z/(z−1))
    if is_nonpositive_integer(c - b) {
        return (1.0 - z).powf(-a) * series_2f1(a, c - b, c, z / (z - 1.0));
    }
    if is_nonpositive_integer(c - a) {
        return (1.0 - z).powf(-b) * series_2f1(b, c - a, c, z / (z - 1.0));
    }
    near_one(a, b, c, z)
}

/// Log-terms of the ₁F₁ series for a > 0, b > 0, z > 0.
fn ln_series_1f1(a: f64, b: f64, z: f64) -> f64 {
    let lz = z.ln();
    let mut terms = Vec::with_capacity(64);
    let mut t = 0.0f64;
    let mut best = 0.0f64;
    for k in 0..MAX_TERMS {
        terms.push(t);
        best = best.max(t);
        let kf = k as f64;
        let step = (a + kf).ln() - (b + kf).ln() + lz - (kf + 1.0).ln();
        t += step;
        if step < 0.0 && t < best - 40.0 {
            break;
        }
    }
    log_sum_exp(&terms)
}

fn signed_series_1f1(a: f64, b: f64, z: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..MAX_TERMS {
        let kf = k as f64;
        term *= (a + kf) / ((b + kf) * (kf + 1.0)) * z;
        sum += term;
        if term == 0.0 {
            break;
        }
        let ratio = ((a + kf + 1.0) / ((b + kf + 1.0) * (kf + 2.0)) * z).abs();
        if term.abs() <= 1e-17 * sum.abs() && ratio < 1.0 {
            break;
        }
    }
    sum
}

/// Largest |z| for which a negative argument is summed directly.
const DIRECT_NEGATIVE_LIMIT: f64 = 10.0;

/// Kummer confluent hypergeometric function ₁F₁(a; b; z), b > 0.
pub fn hyp1f1(a: f64, b: f64, z: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite() && z.is_finite()) {
        return Err(domain("hyp1f1", "arguments must be finite"));
    }
    if b <= 0.0 {
        return Err(domain("hyp1f1", format!("b = {b} must be > 0")));
    }
    if z == 0.0 || a == 0.0 {
        return Ok(1.0);
    }
    if is_nonpositive_integer(a) {
        return Ok(signed_series_1f1(a, b, z));
    }
    if z > 0.0 {
        if a > 0.0 {
            return Ok(ln_series_1f1(a, b, z).exp());
        }
        return Ok(signed_series_1f1(a, b, z));
    }
    if -z <= DIRECT_NEGATIVE_LIMIT || b - a < 0.0 && !is_nonpositive_integer(b - a) {
        return Ok(signed_series_1f1(a, b, z));
    }
    // Kummer: ₁F₁(a;b;z) = e^z ₁F₁(b−a; b; −z)
    Ok(z.exp() * hyp1f1(b - a, b, -z)?)
}

/// ln ₁F₁(a; b; z) for a > 0, b > 0, z ≥ 0, summed in the log domain so
/// arguments in the thousands do not overflow.
pub fn ln_hyp1f1(a: f64, b: f64, z: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite() && z.is_finite()) {
        return Err(domain("ln_hyp1f1", "arguments must be finite"));
    }
    if a <= 0.0 || b <= 0.0 || z < 0.0 {
        return Err(domain(
            "ln_hyp1f1",
            format!("requires a > 0, b > 0, z >= 0 (got a = {a}, b = {b}, z = {z})"),
        ));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    Ok(ln_series_1f1(a, b, z))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn hyp2f1_trivial_values() {
        assert_eq!(hyp2f1(0.3, 4.0, 1.2, 0.0).unwrap(), 1.0);
        let v = hyp2f1(1.0, 1.0, 2.0, 0.5).unwrap();
        assert!(rel(v, 2.0 * 2f64.ln()) < 1e-14);
    }

    #[test]
    fn hyp2f1_log_identity_near_one() {
        // ₂F₁(1,1;2;z) = −ln(1−z)/z, integer c−a−b = 0
        for &z in &[0.95, 0.99, 0.999_999] {
            let v = hyp2f1(1.0, 1.0, 2.0, z).unwrap();
            let e = -(1.0 - z).ln() / z;
            assert!(rel(v, e) < 1e-12, "z={z}: {v} vs {e}");
        }
    }

    #[test]
    fn hyp2f1_binomial_near_one() {
        // ₂F₁(a,b;b;z) = (1−z)^{−a}
        let v = hyp2f1(2.3, 1.7, 1.7, 0.97).unwrap();
        assert!(rel(v, 0.03f64.powf(-2.3)) < 1e-12);
    }

    #[test]
    fn hyp2f1_asin_identity() {
        // ₂F₁(1/2,1/2;3/2;z²) = asin(z)/z; c−a−b = 1/2
        for &x in &[0.96f64, 0.99, 0.9999] {
            let v = hyp2f1(0.5, 0.5, 1.5, x * x).unwrap();
            assert!(rel(v, x.asin() / x) < 1e-12, "x={x}");
        }
    }

    #[test]
    fn hyp2f1_integer_gap_matches_neighbours() {
        // continuity across c−a−b = 1 (log case) and its near-integer shell
        let f = |c: f64| hyp2f1(0.25, 0.75, c, 0.97).unwrap();
        let at = f(2.0);
        let lo = f(2.0 - 1e-3);
        let hi = f(2.0 + 1e-3);
        assert!(rel(at, 0.5 * (lo + hi)) < 1e-6);
        let near = f(2.0 + 3e-5);
        assert!(rel(near, at) < 1e-4);
    }

    #[test]
    fn hyp2f1_domain() {
        assert!(hyp2f1(1.0, 1.0, 0.0, 0.5).is_err());
        assert!(hyp2f1(1.0, 1.0, 2.0, 1.0).is_err());
        assert!(hyp2f1(1.0, 1.0, 2.0, -0.1).is_err());
    }

    #[test]
    fn hyp1f1_trivial_values() {
        assert_eq!(hyp1f1(2.0, 3.0, 0.0).unwrap(), 1.0);
        for &z in &[0.5f64, 3.0, 40.0] {
            assert!(rel(hyp1f1(1.7, 1.7, z).unwrap(), z.exp()) < 1e-13);
        }
        assert!(hyp1f1(1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn ln_hyp1f1_large_argument() {
        // ₁F₁(a;a;z) = e^z, so the log is z even past overflow
        let l = ln_hyp1f1(3.0, 3.0, 2500.0).unwrap();
        assert!((l - 2500.0).abs() < 1e-9);
    }

    #[test]
    fn hyp1f1_negative_argument_paths() {
        // ₁F₁(1;2;z) = (e^z − 1)/z
        for &z in &[-0.5f64, -8.0, -40.0] {
            let e = (z.exp() - 1.0) / z;
            assert!(rel(hyp1f1(1.0, 2.0, z).unwrap(), e) < 1e-10, "z={z}");
        }
    }
}
