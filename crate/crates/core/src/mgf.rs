//! Moment generating functions M(s) = E[e^{−sγ}], s ≥ 0.
//!
//! Three routes: the numerical oracle (quadrature of the density, never a
//! closed form), the exact η-λ-μ closed forms, and the approximate closed
//! forms that replace e^{−sγ} by the exponential sum in the stretched
//! variable, with θᵢ(s) = Bᵢ s^ᾱ.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::expfit::{ExpSumFit, FitCache};
use crate::models::{CompactParams, FadingModel, Family};
use crate::specfun::{hyp2f1, lgamma, ln_hyp1f1, QuadResult};

/// Relative tolerance of the numerical oracle.
pub const ORACLE_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MgfStrategy {
    Numeric,
    Exact,
    Approx,
    Auto,
}

impl MgfStrategy {
    pub fn name(self) -> &'static str {
        match self {
            MgfStrategy::Numeric => "numeric",
            MgfStrategy::Exact => "exact",
            MgfStrategy::Approx => "approx",
            MgfStrategy::Auto => "auto",
        }
    }

    /// The concrete strategy used for `family`; `Auto` picks the exact form
    /// for η-λ-μ and the approximation otherwise.
    pub fn resolve(self, family: Family) -> Result<MgfStrategy> {
        match (self, family) {
            (MgfStrategy::Auto, Family::EtaLambdaMu) => Ok(MgfStrategy::Exact),
            (MgfStrategy::Auto, _) => Ok(MgfStrategy::Approx),
            (MgfStrategy::Exact, f) if f != Family::EtaLambdaMu => Err(Error::InapplicableStrategy {
                strategy: "exact",
                family: f.name(),
                reason: "no exact closed form for this family in scope",
            }),
            (MgfStrategy::Approx, Family::EtaLambdaMu) => Err(Error::InapplicableStrategy {
                strategy: "approx",
                family: Family::EtaLambdaMu.name(),
                reason: "the family has an exact closed form and no stretch exponent",
            }),
            (s, _) => Ok(s),
        }
    }
}

impl fmt::Display for MgfStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MgfStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "numeric" | "numeric_oracle" | "numeric-oracle" => Ok(MgfStrategy::Numeric),
            "exact" | "exact_closed_form" => Ok(MgfStrategy::Exact),
            "approx" | "approx_closed_form" => Ok(MgfStrategy::Approx),
            "auto" => Ok(MgfStrategy::Auto),
            other => Err(Error::Config(format!(
                "strategy: unknown `{other}` (expected auto, exact, approx or numeric)"
            ))),
        }
    }
}

fn check_s(s: f64) -> Result<()> {
    if s >= 0.0 && s.is_finite() {
        Ok(())
    } else {
        Err(domain("mgf", format!("s = {s} must be finite and >= 0")))
    }
}

/// Oracle value with its quadrature record.
pub fn mgf_numeric_detailed(model: &FadingModel, s: f64) -> Result<QuadResult> {
    check_s(s)?;
    let cp = model.compact_params()?;
    numeric_from_params(&cp, model.gbar(), 0, s)
}

fn numeric_from_params(cp: &CompactParams, gbar: f64, k: u32, s: f64) -> Result<QuadResult> {
    cp.damped_moment(k, s, gbar, ORACLE_REL_TOL)
}

/// ∫₀^∞ f(γ) e^{−sγ} dγ by adaptive quadrature.
pub fn mgf_numeric(model: &FadingModel, s: f64) -> Result<f64> {
    Ok(mgf_numeric_detailed(model, s)?.value)
}

/// (−1)^k ∫₀^∞ γ^k f(γ) e^{−sγ} dγ, the k-th derivative of the MGF.
pub fn mgf_derivative_numeric(model: &FadingModel, k: u32, s: f64) -> Result<f64> {
    check_s(s)?;
    if k > 4 {
        return Err(domain("mgf_derivative_numeric", format!("order k = {k} must be <= 4")));
    }
    let cp = model.compact_params()?;
    let v = numeric_from_params(&cp, model.gbar(), k, s)?.value;
    Ok(if k % 2 == 0 { v } else { -v })
}

fn expect_eta_lambda_mu(model: &FadingModel) -> Result<(f64, f64, f64, f64)> {
    match *model {
        FadingModel::EtaLambdaMu { eta, lambda, mu, gbar } => Ok((eta, lambda, mu, gbar)),
        other => Err(Error::FamilyMismatch {
            expected: Family::EtaLambdaMu.name(),
            found: other.family().name(),
        }),
    }
}

/// [4η(1−λ²)b̄² / ((c̄+sγ̄)² − d̄²)]^μ, evaluated in the log domain.
pub fn mgf_eta_lambda_mu_rational(model: &FadingModel, s: f64) -> Result<f64> {
    let (eta, lambda, mu, gbar) = expect_eta_lambda_mu(model)?;
    model.checked()?;
    check_s(s)?;
    let one_l = 1.0 - lambda * lambda;
    let b = mu * (1.0 + eta) / (2.0 * eta * one_l);
    let c = b * (1.0 + eta);
    let d = b * ((eta - 1.0).powi(2) + 4.0 * eta * lambda * lambda).sqrt();
    let num = 4.0 * eta * one_l * b * b;
    // c̄ − d̄ written as (c̄² − d̄²)/(c̄ + d̄) to avoid cancellation
    let lo = num / (c + d) + s * gbar;
    let hi = c + d + s * gbar;
    Ok((mu * (num.ln() - lo.ln() - hi.ln())).exp())
}

/// ψ d^ν Γ(m+ν) / (2^ν (β+s)^{m+ν} Γ(ν+1)) · ₂F₁((m+ν)/2, (m+ν+1)/2; ν+1; d²/(β+s)²).
pub fn mgf_eta_lambda_mu_hyp(model: &FadingModel, s: f64) -> Result<f64> {
    expect_eta_lambda_mu(model)?;
    check_s(s)?;
    let cp = model.compact_params()?;
    let b = cp.bessel.expect("eta-lambda-mu has a Bessel factor");
    let p = cp.beta + s;
    if p <= b.d {
        return Err(Error::ParameterRegime(format!(
            "beta + s = {p} does not exceed d = {}; the parameter mapping is inconsistent",
            b.d
        )));
    }
    let mn = cp.m + b.nu;
    let ln_pref = cp.ln_psi_dnu - b.nu * std::f64::consts::LN_2 + lgamma(mn) - lgamma(b.nu + 1.0) - mn * p.ln();
    let f = hyp2f1(0.5 * mn, 0.5 * (mn + 1.0), b.nu + 1.0, (b.d / p).powi(2))?;
    Ok(ln_pref.exp() * f)
}

/// Approximate MGF value with the pre-clipping sum kept for diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ApproxValue {
    /// Clipped to (0, 1].
    pub value: f64,
    pub unclipped: f64,
}

fn clip(v: f64) -> ApproxValue {
    ApproxValue {
        value: v.clamp(f64::MIN_POSITIVE, 1.0),
        unclipped: v,
    }
}

fn check_fit(model: &FadingModel, fit: &ExpSumFit) -> Result<()> {
    let ab = model.alpha_bar();
    if (fit.alpha_bar - ab).abs() > 1e-12 {
        return Err(Error::FitMismatch {
            fit_alpha_bar: fit.alpha_bar,
            model_alpha_bar: ab,
        });
    }
    Ok(())
}

/// Σᵢ aᵢ (β/(β+θᵢ(s)))^μ for α-μ.
pub fn mgf_alpha_mu_approx(model: &FadingModel, s: f64, fit: &ExpSumFit) -> Result<f64> {
    Ok(mgf_alpha_mu_approx_detailed(model, s, fit)?.value)
}

pub fn mgf_alpha_mu_approx_detailed(model: &FadingModel, s: f64, fit: &ExpSumFit) -> Result<ApproxValue> {
    if model.family() != Family::AlphaMu {
        return Err(Error::FamilyMismatch {
            expected: Family::AlphaMu.name(),
            found: model.family().name(),
        });
    }
    check_s(s)?;
    check_fit(model, fit)?;
    let cp = model.compact_params()?;
    Ok(clip(alpha_mu_sum(&cp, model.alpha_bar(), s, fit)))
}

fn alpha_mu_sum(cp: &CompactParams, alpha_bar: f64, s: f64, fit: &ExpSumFit) -> f64 {
    // ψ Γ(m/ᾱ) / (ᾱ (β+θ)^{m/ᾱ}); equals (β/(β+θ))^μ when m = ᾱμ
    let q = cp.m / alpha_bar;
    let sa = s.powf(alpha_bar);
    let ln_base = cp.ln_psi_dnu + lgamma(q) - alpha_bar.ln();
    fit.a
        .iter()
        .zip(&fit.b)
        .map(|(a, b)| a * (ln_base - q * (cp.beta + b * sa).ln()).exp())
        .sum()
}

/// The approximate MGF of the Bessel families (α-η-μ, α-λ-μ, α-λ-η-μ with
/// a ₂F₁ kernel, α-κ-μ with a ₁F₁ kernel).
pub fn mgf_unified_approx(model: &FadingModel, s: f64, fit: &ExpSumFit) -> Result<f64> {
    Ok(mgf_unified_approx_detailed(model, s, fit)?.value)
}

pub fn mgf_unified_approx_detailed(model: &FadingModel, s: f64, fit: &ExpSumFit) -> Result<ApproxValue> {
    match model.family() {
        Family::EtaLambdaMu | Family::AlphaMu => {
            return Err(Error::FamilyMismatch {
                expected: "alpha-eta-mu, alpha-lambda-mu, alpha-lambda-eta-mu or alpha-kappa-mu",
                found: model.family().name(),
            })
        }
        _ => {}
    }
    check_s(s)?;
    check_fit(model, fit)?;
    let cp = model.compact_params()?;
    unified_sum(&cp, model.alpha_bar(), s, fit).map(clip)
}

fn unified_sum(cp: &CompactParams, alpha_bar: f64, s: f64, fit: &ExpSumFit) -> Result<f64> {
    let bp = cp.bessel.expect("Bessel family");
    let (nu, d) = (bp.nu, bp.d);
    let q = cp.m / alpha_bar;
    let sa = s.powf(alpha_bar);
    let ln_common = cp.ln_psi_dnu - nu * std::f64::consts::LN_2 - alpha_bar.ln() - lgamma(nu + 1.0);
    let mut total = 0.0;
    for (a, b) in fit.a.iter().zip(&fit.b) {
        if *a == 0.0 {
            continue;
        }
        let p = cp.beta + b * sa;
        let ln_term = if bp.r == 1.0 {
            if p <= d {
                return Err(Error::ParameterRegime(format!(
                    "beta + theta = {p} does not exceed d = {d}; the Gauss series diverges"
                )));
            }
            let e = q + nu;
            let f = hyp2f1(0.5 * e, 0.5 * (e + 1.0), nu + 1.0, (d / p).powi(2))?;
            ln_common + lgamma(e) - e * p.ln() + f.ln()
        } else {
            let e = q + 0.5 * nu;
            let l1f1 = ln_hyp1f1(e, nu + 1.0, d * d / (4.0 * p))?;
            ln_common + lgamma(e) - e * p.ln() + l1f1
        };
        total += a * ln_term.exp();
    }
    Ok(total)
}

/// Value of a prepared evaluation with whatever diagnostics the strategy
/// produces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MgfValue {
    pub value: f64,
    /// Pre-clipping value of an approximate strategy.
    pub unclipped: Option<f64>,
    /// Quadrature record of the numeric strategy.
    pub quad: Option<QuadResult>,
}

/// A model prepared for repeated MGF evaluation under one strategy.
#[derive(Debug, Clone)]
pub struct MgfEvaluator {
    model: FadingModel,
    cp: CompactParams,
    strategy: MgfStrategy,
    fit: Option<ExpSumFit>,
}

impl MgfEvaluator {
    /// Resolves the strategy and fetches the fit from `cache` when needed.
    pub fn new(model: &FadingModel, strategy: MgfStrategy, cache: &FitCache) -> Result<Self> {
        let cp = model.compact_params()?;
        let strategy = strategy.resolve(model.family())?;
        let fit = match strategy {
            MgfStrategy::Approx => Some(cache.get_or_fit(model.alpha_bar())?),
            _ => None,
        };
        Ok(Self {
            model: *model,
            cp,
            strategy,
            fit,
        })
    }

    /// Uses the given fit for the approximate strategy instead of a cache.
    pub fn with_fit(model: &FadingModel, fit: ExpSumFit) -> Result<Self> {
        check_fit(model, &fit)?;
        let strategy = MgfStrategy::Approx.resolve(model.family())?;
        Ok(Self {
            model: *model,
            cp: model.compact_params()?,
            strategy,
            fit: Some(fit),
        })
    }

    pub fn strategy(&self) -> MgfStrategy {
        self.strategy
    }

    pub fn fit(&self) -> Option<&ExpSumFit> {
        self.fit.as_ref()
    }

    pub fn model(&self) -> &FadingModel {
        &self.model
    }

    pub fn eval(&self, s: f64) -> Result<f64> {
        Ok(self.eval_detailed(s)?.value)
    }

    pub fn eval_detailed(&self, s: f64) -> Result<MgfValue> {
        check_s(s)?;
        match self.strategy {
            MgfStrategy::Numeric => {
                let q = numeric_from_params(&self.cp, self.model.gbar(), 0, s)?;
                Ok(MgfValue {
                    value: q.value,
                    unclipped: None,
                    quad: Some(q),
                })
            }
            MgfStrategy::Exact => Ok(MgfValue {
                value: mgf_eta_lambda_mu_rational(&self.model, s)?,
                unclipped: None,
                quad: None,
            }),
            MgfStrategy::Approx => {
                let fit = self.fit.as_ref().expect("approx strategy carries a fit");
                let raw = match self.model.family() {
                    Family::AlphaMu => alpha_mu_sum(&self.cp, self.model.alpha_bar(), s, fit),
                    _ => unified_sum(&self.cp, self.model.alpha_bar(), s, fit)?,
                };
                let v = clip(raw);
                Ok(MgfValue {
                    value: v.value,
                    unclipped: Some(v.unclipped),
                    quad: None,
                })
            }
            MgfStrategy::Auto => unreachable!("strategies are resolved on construction"),
        }
    }
}

/// M(s) under `strategy`, with approximate fits taken from the process-wide
/// cache.
pub fn mgf(model: &FadingModel, s: f64, strategy: MgfStrategy) -> Result<f64> {
    mgf_with(model, s, strategy, FitCache::global())
}

pub fn mgf_with(model: &FadingModel, s: f64, strategy: MgfStrategy, cache: &FitCache) -> Result<f64> {
    MgfEvaluator::new(model, strategy, cache)?.eval(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expfit::GridSpec;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn rayleigh_numeric() {
        let r = FadingModel::rayleigh(1.0).unwrap();
        assert!((mgf_numeric(&r, 0.0).unwrap() - 1.0).abs() < 1e-9);
        assert!(rel(mgf_numeric(&r, 1.0).unwrap(), 0.5) < 1e-9);
    }

    #[test]
    fn rational_form_examples() {
        let m = FadingModel::EtaLambdaMu { eta: 1.0, lambda: 0.0, mu: 0.5, gbar: 1.0 };
        assert!((mgf_eta_lambda_mu_rational(&m, 0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(rel(mgf_eta_lambda_mu_rational(&m, 3.0).unwrap(), 0.25) < 1e-14);
        let m = FadingModel::EtaLambdaMu { eta: 2.0, lambda: 0.3, mu: 1.5, gbar: 2.0 };
        let exact = mgf_eta_lambda_mu_rational(&m, 0.7).unwrap();
        assert!(rel(exact, mgf_numeric(&m, 0.7).unwrap()) < 1e-8);
        assert!(rel(exact, mgf_eta_lambda_mu_hyp(&m, 0.7).unwrap()) < 1e-10);
    }

    #[test]
    fn hyp_form_degenerate_case() {
        let m = FadingModel::EtaLambdaMu { eta: 1.0, lambda: 0.0, mu: 1.3, gbar: 2.0 };
        for &s in &[0.0f64, 0.4, 5.0] {
            let expect = (1.0 + s * 2.0 / (2.0 * 1.3)).powf(-2.0 * 1.3);
            assert!(rel(mgf_eta_lambda_mu_hyp(&m, s).unwrap(), expect) < 1e-12);
        }
    }

    #[test]
    fn family_checks() {
        let a = FadingModel::rayleigh(1.0).unwrap();
        assert!(matches!(mgf_eta_lambda_mu_rational(&a, 1.0), Err(Error::FamilyMismatch { .. })));
        let k = FadingModel::kappa_mu(1.0, 1.0, 1.0).unwrap();
        assert!(matches!(
            mgf(&k, 1.0, MgfStrategy::Exact),
            Err(Error::InapplicableStrategy { .. })
        ));
        let fit = ExpSumFit::identity(GridSpec::default());
        let w = FadingModel::weibull(3.0, 1.0).unwrap();
        assert!(matches!(mgf_alpha_mu_approx(&w, 1.0, &fit), Err(Error::FitMismatch { .. })));
        assert!(mgf(&a, -1.0, MgfStrategy::Numeric).is_err());
    }

    #[test]
    fn nakagami_is_exact_at_unit_stretch() {
        let m = FadingModel::AlphaMu { alpha: 2.0, mu: 2.5, gbar: 1.0 };
        let fit = ExpSumFit::identity(GridSpec::default());
        let v = mgf_alpha_mu_approx(&m, 1.0, &fit).unwrap();
        assert!(rel(v, (2.5f64 / 3.5).powf(2.5)) < 1e-13);
    }

    #[test]
    fn alpha_eta_mu_near_one_collapses() {
        let m = FadingModel::AlphaEtaMu { alpha: 2.0, eta: 1.0 + 1e-9, mu: 1.0, gbar: 1.0 };
        let fit = ExpSumFit::identity(GridSpec::default());
        let v = mgf_unified_approx(&m, 1.0, &fit).unwrap();
        // η-μ with η = 1 is Nakagami with m = 2μ
        assert!((v - (2.0f64 / 3.0).powi(2)).abs() < 1e-5);
    }

    #[test]
    fn kappa_mu_approx_at_unit_stretch_matches_oracle() {
        let m = FadingModel::AlphaKappaMu { alpha: 2.0, kappa: 2.0, mu: 1.5, gbar: 1.0 };
        let fit = ExpSumFit::identity(GridSpec::default());
        for &s in &[0.5, 2.0, 8.0] {
            let a = mgf_unified_approx(&m, s, &fit).unwrap();
            assert!(rel(a, mgf_numeric(&m, s).unwrap()) < 1e-9, "s={s}");
        }
    }

    #[test]
    fn derivatives() {
        let r = FadingModel::rayleigh(1.0).unwrap();
        assert!(rel(mgf_derivative_numeric(&r, 1, 0.0).unwrap(), -1.0) < 1e-9);
        assert!(rel(mgf_derivative_numeric(&r, 2, 0.0).unwrap(), 2.0) < 1e-9);
        assert!(mgf_derivative_numeric(&r, 5, 0.0).is_err());
    }

    #[test]
    fn strategy_parsing() {
        assert_eq!("AUTO".parse::<MgfStrategy>().unwrap(), MgfStrategy::Auto);
        assert!("bogus".parse::<MgfStrategy>().is_err());
    }
}
