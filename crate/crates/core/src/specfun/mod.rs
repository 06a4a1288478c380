//! Real special functions and adaptive quadrature.

mod bessel;
mod gamma;
mod hyper;
mod quad;

pub use bessel::{bessel_i, ln_bessel_i, ln_bessel_i_ratio};
pub use gamma::{digamma, gamma, ln_gamma, rgamma};
pub use hyper::{hyp1f1, hyp2f1, ln_hyp1f1};
pub use quad::{
    integrate_adaptive, integrate_adaptive_with, integrate_semi_infinite,
    integrate_semi_infinite_with, QuadOptions, QuadResult, SemiInfiniteOptions,
};

pub(crate) use bessel::ln_bessel_i_ratio_unchecked;
pub(crate) use gamma::lgamma;
pub(crate) use hyper::hyp2f1_unchecked;

/// ln Σ exp(tᵢ) without overflow. Empty input gives −∞.
pub(crate) fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}
