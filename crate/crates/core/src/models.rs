//! Generalized fading models and their unified compact density
//!
//! f(γ) = ψ γ^{m−1} e^{−βγ^ᾱ} I_ν(d γ^{rᾱ}).
//!
//! Every model is stored with its mean SNR γ̄ (linear). The tabulated
//! coefficients are written in terms of a scale that is the mean only when
//! ᾱ = 1; for the stretched families the scale is found from the fractional
//! moment E[X^{1/ᾱ}] of the unstretched variable so that E[γ] = γ̄ holds for
//! every model.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::{
    hyp2f1_unchecked, integrate_semi_infinite_with, lgamma, ln_bessel_i_ratio_unchecked, ln_hyp1f1,
    QuadResult, SemiInfiniteOptions,
};

pub const MU_MAX: f64 = 50.0;
pub const ALPHA_MAX: f64 = 10.0;
pub const KAPPA_MAX: f64 = 50.0;
pub const ETA_MIN: f64 = 1e-3;
pub const ETA_MAX: f64 = 1e3;
pub const LAMBDA_MAX: f64 = 0.999;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    EtaLambdaMu,
    AlphaMu,
    AlphaEtaMu,
    AlphaLambdaMu,
    AlphaKappaMu,
    AlphaLambdaEtaMu,
}

impl Family {
    pub const ALL: [Family; 6] = [
        Family::EtaLambdaMu,
        Family::AlphaMu,
        Family::AlphaEtaMu,
        Family::AlphaLambdaMu,
        Family::AlphaKappaMu,
        Family::AlphaLambdaEtaMu,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::EtaLambdaMu => "eta-lambda-mu",
            Family::AlphaMu => "alpha-mu",
            Family::AlphaEtaMu => "alpha-eta-mu",
            Family::AlphaLambdaMu => "alpha-lambda-mu",
            Family::AlphaKappaMu => "alpha-kappa-mu",
            Family::AlphaLambdaEtaMu => "alpha-lambda-eta-mu",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A fading model with its shape parameters and linear mean SNR `gbar`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelRecord", into = "ModelRecord")]
pub enum FadingModel {
    EtaLambdaMu { eta: f64, lambda: f64, mu: f64, gbar: f64 },
    AlphaMu { alpha: f64, mu: f64, gbar: f64 },
    AlphaEtaMu { alpha: f64, eta: f64, mu: f64, gbar: f64 },
    AlphaLambdaMu { alpha: f64, lambda: f64, mu: f64, gbar: f64 },
    AlphaKappaMu { alpha: f64, kappa: f64, mu: f64, gbar: f64 },
    AlphaLambdaEtaMu { alpha: f64, lambda: f64, eta: f64, mu: f64, gbar: f64 },
}

/// One out-of-range parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub parameter: String,
    pub value: f64,
    pub requirement: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {} but {} must {}", self.parameter, self.value, self.parameter, self.requirement)
    }
}

fn check_range(out: &mut Vec<Violation>, name: &str, v: f64, lo: f64, lo_open: bool, hi: f64, hi_open: bool) {
    let lo_ok = if lo_open { v > lo } else { v >= lo };
    let hi_ok = if hi_open { v < hi } else { v <= hi };
    if !(lo_ok && hi_ok && v.is_finite()) {
        let requirement = format!(
            "lie in {}{}, {}{}",
            if lo_open { "(" } else { "[" },
            lo,
            hi,
            if hi_open { ")" } else { "]" }
        );
        out.push(Violation {
            parameter: name.to_string(),
            value: v,
            requirement,
        });
    }
}

impl FadingModel {
    pub fn family(&self) -> Family {
        match self {
            FadingModel::EtaLambdaMu { .. } => Family::EtaLambdaMu,
            FadingModel::AlphaMu { .. } => Family::AlphaMu,
            FadingModel::AlphaEtaMu { .. } => Family::AlphaEtaMu,
            FadingModel::AlphaLambdaMu { .. } => Family::AlphaLambdaMu,
            FadingModel::AlphaKappaMu { .. } => Family::AlphaKappaMu,
            FadingModel::AlphaLambdaEtaMu { .. } => Family::AlphaLambdaEtaMu,
        }
    }

    pub fn gbar(&self) -> f64 {
        match *self {
            FadingModel::EtaLambdaMu { gbar, .. }
            | FadingModel::AlphaMu { gbar, .. }
            | FadingModel::AlphaEtaMu { gbar, .. }
            | FadingModel::AlphaLambdaMu { gbar, .. }
            | FadingModel::AlphaKappaMu { gbar, .. }
            | FadingModel::AlphaLambdaEtaMu { gbar, .. } => gbar,
        }
    }

    pub fn gbar_db(&self) -> f64 {
        10.0 * self.gbar().log10()
    }

    /// The same model with mean SNR replaced.
    pub fn with_gbar(&self, g: f64) -> FadingModel {
        let mut out = *self;
        match &mut out {
            FadingModel::EtaLambdaMu { gbar, .. }
            | FadingModel::AlphaMu { gbar, .. }
            | FadingModel::AlphaEtaMu { gbar, .. }
            | FadingModel::AlphaLambdaMu { gbar, .. }
            | FadingModel::AlphaKappaMu { gbar, .. }
            | FadingModel::AlphaLambdaEtaMu { gbar, .. } => *gbar = g,
        }
        out
    }

    pub fn with_gbar_db(&self, db: f64) -> FadingModel {
        self.with_gbar(10f64.powf(db / 10.0))
    }

    pub fn mu(&self) -> f64 {
        match *self {
            FadingModel::EtaLambdaMu { mu, .. }
            | FadingModel::AlphaMu { mu, .. }
            | FadingModel::AlphaEtaMu { mu, .. }
            | FadingModel::AlphaLambdaMu { mu, .. }
            | FadingModel::AlphaKappaMu { mu, .. }
            | FadingModel::AlphaLambdaEtaMu { mu, .. } => mu,
        }
    }

    /// α, or `None` for η-λ-μ.
    pub fn alpha(&self) -> Option<f64> {
        match *self {
            FadingModel::EtaLambdaMu { .. } => None,
            FadingModel::AlphaMu { alpha, .. }
            | FadingModel::AlphaEtaMu { alpha, .. }
            | FadingModel::AlphaLambdaMu { alpha, .. }
            | FadingModel::AlphaKappaMu { alpha, .. }
            | FadingModel::AlphaLambdaEtaMu { alpha, .. } => Some(alpha),
        }
    }

    /// ᾱ = α/2 (1 for η-λ-μ).
    pub fn alpha_bar(&self) -> f64 {
        self.alpha().map_or(1.0, |a| 0.5 * a)
    }

    /// Every out-of-range parameter; empty when the model is admissible.
    pub fn violations(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        let alpha = |v: &mut Vec<Violation>, a: f64| check_range(v, "alpha", a, 0.0, true, ALPHA_MAX, false);
        let mu = |v: &mut Vec<Violation>, m: f64| check_range(v, "mu", m, 0.0, true, MU_MAX, false);
        let eta = |v: &mut Vec<Violation>, e: f64| check_range(v, "eta", e, ETA_MIN, false, ETA_MAX, false);
        let lambda = |v: &mut Vec<Violation>, l: f64| check_range(v, "lambda", l, 0.0, false, LAMBDA_MAX, false);
        match *self {
            FadingModel::EtaLambdaMu { eta: e, lambda: l, mu: m, .. } => {
                eta(&mut v, e);
                lambda(&mut v, l);
                mu(&mut v, m);
            }
            FadingModel::AlphaMu { alpha: a, mu: m, .. } => {
                alpha(&mut v, a);
                mu(&mut v, m);
            }
            FadingModel::AlphaEtaMu { alpha: a, eta: e, mu: m, .. } => {
                alpha(&mut v, a);
                eta(&mut v, e);
                mu(&mut v, m);
            }
            FadingModel::AlphaLambdaMu { alpha: a, lambda: l, mu: m, .. } => {
                alpha(&mut v, a);
                lambda(&mut v, l);
                mu(&mut v, m);
            }
            FadingModel::AlphaKappaMu { alpha: a, kappa, mu: m, .. } => {
                alpha(&mut v, a);
                check_range(&mut v, "kappa", kappa, 0.0, false, KAPPA_MAX, false);
                mu(&mut v, m);
            }
            FadingModel::AlphaLambdaEtaMu { alpha: a, lambda: l, eta: e, mu: m, .. } => {
                alpha(&mut v, a);
                lambda(&mut v, l);
                eta(&mut v, e);
                mu(&mut v, m);
            }
        }
        let g = self.gbar();
        if !(g > 0.0 && g.is_finite()) {
            v.push(Violation {
                parameter: "gbar".into(),
                value: g,
                requirement: "be finite and > 0".into(),
            });
        }
        v
    }

    pub fn validate(&self) -> std::result::Result<(), Vec<Violation>> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(v)
        }
    }

    pub(crate) fn checked(&self) -> Result<()> {
        self.validate().map_err(Error::InvalidModel)
    }

    pub fn compact_params(&self) -> Result<CompactParams> {
        self.compact_params_shifted(&ExponentShifts::default())
    }

    /// Compact parameters with additive perturbations of the tabulated
    /// exponents. Used by the validation suite to show its audits react to
    /// a mistyped exponent.
    pub fn compact_params_shifted(&self, shifts: &ExponentShifts) -> Result<CompactParams> {
        self.checked()?;
        Ok(build_compact(self, shifts))
    }

    /// Density of the instantaneous SNR at `gamma` > 0.
    pub fn pdf(&self, gamma: f64) -> Result<f64> {
        let cp = self.compact_params()?;
        cp.pdf(gamma)
    }

    // --- special cases -------------------------------------------------

    pub fn rayleigh(gbar: f64) -> Result<FadingModel> {
        Self::nakagami_m(1.0, gbar)
    }

    pub fn nakagami_m(m: f64, gbar: f64) -> Result<FadingModel> {
        if !(m >= 0.5) {
            return Err(Error::InvalidModel(vec![Violation {
                parameter: "m".into(),
                value: m,
                requirement: "be >= 0.5".into(),
            }]));
        }
        FadingModel::AlphaMu { alpha: 2.0, mu: m, gbar }.validated()
    }

    pub fn weibull(alpha: f64, gbar: f64) -> Result<FadingModel> {
        FadingModel::AlphaMu { alpha, mu: 1.0, gbar }.validated()
    }

    pub fn one_sided_gaussian(gbar: f64) -> Result<FadingModel> {
        FadingModel::AlphaMu { alpha: 2.0, mu: 0.5, gbar }.validated()
    }

    /// Hoyt (Nakagami-q) with q ∈ (0, 1].
    pub fn hoyt(q: f64, gbar: f64) -> Result<FadingModel> {
        if !(q > 0.0 && q <= 1.0) {
            return Err(Error::InvalidModel(vec![Violation {
                parameter: "q".into(),
                value: q,
                requirement: "lie in (0, 1]".into(),
            }]));
        }
        FadingModel::EtaLambdaMu { eta: q * q, lambda: 0.0, mu: 0.5, gbar }.validated()
    }

    pub fn eta_mu(eta: f64, mu: f64, gbar: f64) -> Result<FadingModel> {
        FadingModel::EtaLambdaMu { eta, lambda: 0.0, mu, gbar }.validated()
    }

    pub fn lambda_mu(lambda: f64, mu: f64, gbar: f64) -> Result<FadingModel> {
        FadingModel::EtaLambdaMu { eta: 1.0, lambda, mu, gbar }.validated()
    }

    /// κ-μ; Rice is κ-μ with μ = 1 and K = κ.
    pub fn kappa_mu(kappa: f64, mu: f64, gbar: f64) -> Result<FadingModel> {
        FadingModel::AlphaKappaMu { alpha: 2.0, kappa, mu, gbar }.validated()
    }

    fn validated(self) -> Result<FadingModel> {
        self.checked()?;
        Ok(self)
    }
}

/// Slots of the tabulated exponents that the mutation audit can perturb.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exponent {
    /// power of the mean-SNR scale in ψ
    GbarInPsi,
    /// power of the mean-SNR scale in β
    GbarInBeta,
    /// power of the mean-SNR scale in d
    GbarInD,
    /// the power-law exponent m
    M,
    /// the Bessel order ν
    Nu,
    /// the μ-power in the numerator of ψ
    MuPowerInPsi,
    /// the power of the Bessel-rate factor in the denominator of ψ
    BesselPowerInPsi,
    /// the stretch exponent ᾱ in e^{−βγ^ᾱ}
    Stretch,
    /// the (1+η) power in c̄
    OnePlusEtaInC,
    /// the (1−λ²) power in h and H
    OneMinusLambdaInH,
}

impl Exponent {
    pub const ALL: [Exponent; 10] = [
        Exponent::GbarInPsi,
        Exponent::GbarInBeta,
        Exponent::GbarInD,
        Exponent::M,
        Exponent::Nu,
        Exponent::MuPowerInPsi,
        Exponent::BesselPowerInPsi,
        Exponent::Stretch,
        Exponent::OnePlusEtaInC,
        Exponent::OneMinusLambdaInH,
    ];

    fn index(self) -> usize {
        Self::ALL.iter().position(|&e| e == self).unwrap()
    }

    pub fn name(self) -> &'static str {
        match self {
            Exponent::GbarInPsi => "gbar_in_psi",
            Exponent::GbarInBeta => "gbar_in_beta",
            Exponent::GbarInD => "gbar_in_d",
            Exponent::M => "m",
            Exponent::Nu => "nu",
            Exponent::MuPowerInPsi => "mu_power_in_psi",
            Exponent::BesselPowerInPsi => "bessel_power_in_psi",
            Exponent::Stretch => "stretch",
            Exponent::OnePlusEtaInC => "one_plus_eta_in_c",
            Exponent::OneMinusLambdaInH => "one_minus_lambda_in_h",
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Exponent> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        Exponent::ALL
            .into_iter()
            .find(|e| e.name() == key)
            .ok_or_else(|| Error::Config(format!("unknown exponent slot `{s}`")))
    }
}

/// Additive shifts on the exponent slots; all zero by default.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ExponentShifts([f64; 10]);

impl ExponentShifts {
    pub fn single(slot: Exponent, delta: f64) -> Self {
        let mut s = Self::default();
        s.0[slot.index()] = delta;
        s
    }

    /// A copy with `slot` set to `delta`.
    pub fn with(mut self, slot: Exponent, delta: f64) -> Self {
        self.0[slot.index()] = delta;
        self
    }

    pub fn get(&self, slot: Exponent) -> f64 {
        self.0[slot.index()]
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0.0)
    }
}

/// Bessel part of the compact form: I_ν(d γ^{power}), power = rᾱ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BesselPart {
    pub nu: f64,
    pub d: f64,
    pub r: f64,
    pub power: f64,
}

/// Model-internal quantities kept for diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Internals {
    pub c_bar: Option<f64>,
    pub b_bar: Option<f64>,
    pub h: Option<f64>,
    pub big_h: Option<f64>,
    pub d_bar: Option<f64>,
}

/// The unified compact-form parameters of a model.
///
/// ψ itself diverges when d = 0 and ν > 0, so the product ψ·d^ν is carried
/// as a logarithm instead and paired with ln[I_ν(x)/(x/2)^ν].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompactParams {
    /// ln(ψ d^ν); plain ln ψ when there is no Bessel factor.
    pub ln_psi_dnu: f64,
    pub m: f64,
    pub beta: f64,
    pub alpha_bar: f64,
    pub bessel: Option<BesselPart>,
    /// Scale substituted for γ̄ in the coefficient formulas.
    pub scale: f64,
    pub internals: Internals,
}

impl CompactParams {
    pub fn nu(&self) -> Option<f64> {
        self.bessel.map(|b| b.nu)
    }

    pub fn d(&self) -> Option<f64> {
        self.bessel.map(|b| b.d)
    }

    pub fn r(&self) -> f64 {
        self.bessel.map_or(1.0, |b| b.r)
    }

    /// ψ (infinite when d = 0 and ν > 0).
    pub fn psi(&self) -> f64 {
        match self.bessel {
            None => self.ln_psi_dnu.exp(),
            Some(b) => (self.ln_psi_dnu - b.nu * b.d.ln()).exp(),
        }
    }

    /// Exponent q of the small-γ behaviour γ^{q−1}.
    pub fn leading_power(&self) -> f64 {
        match self.bessel {
            None => self.m,
            Some(b) => self.m + b.power * b.nu,
        }
    }

    pub fn ln_pdf(&self, gamma: f64) -> f64 {
        let lg = gamma.ln();
        let stretch = self.beta * gamma.powf(self.alpha_bar);
        match self.bessel {
            None => self.ln_psi_dnu + (self.m - 1.0) * lg - stretch,
            Some(b) => {
                let x = b.d * gamma.powf(b.power);
                self.ln_psi_dnu - b.nu * std::f64::consts::LN_2 + (self.m - 1.0 + b.power * b.nu) * lg - stretch
                    + ln_bessel_i_ratio_unchecked(b.nu, x)
            }
        }
    }

    pub fn pdf(&self, gamma: f64) -> Result<f64> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(crate::error::domain("pdf", format!("gamma = {gamma} must be finite and > 0")));
        }
        Ok(self.pdf_unchecked(gamma))
    }

    pub(crate) fn pdf_unchecked(&self, gamma: f64) -> f64 {
        let l = self.ln_pdf(gamma);
        if l.is_nan() {
            0.0
        } else {
            l.exp()
        }
    }

    /// ∫₀^∞ γ^k f(γ) e^{−sγ} dγ by quadrature, with the map tuned to the
    /// density's endpoint behaviour and the exponential damping.
    pub fn damped_moment(&self, k: u32, s: f64, gbar: f64, rel_tol: f64) -> Result<QuadResult> {
        let lead = self.leading_power() + k as f64;
        let opts = SemiInfiniteOptions {
            scale: gbar / (1.0 + s * gbar),
            leading_power: lead,
            quad: crate::specfun::QuadOptions {
                rel_tol,
                abs_tol: 0.0,
                ..Default::default()
            },
        };
        let kf = k as i32;
        integrate_semi_infinite_with(
            |g| {
                let l = self.ln_pdf(g) - s * g + if kf > 0 { kf as f64 * g.ln() } else { 0.0 };
                if l.is_nan() {
                    0.0
                } else {
                    l.exp()
                }
            },
            &opts,
        )
    }
}

/// Rates c ± d of the unit-mean sum of two Gamma(μ) variables underlying
/// every r = 1 family, returned as (c, d, c² − d²).
fn base_rates(model: &FadingModel) -> Option<(f64, f64, f64)> {
    match *model {
        FadingModel::EtaLambdaMu { eta, lambda, mu, .. } | FadingModel::AlphaLambdaEtaMu { eta, lambda, mu, .. } => {
            let b = mu * (1.0 + eta) / (2.0 * eta * (1.0 - lambda * lambda));
            let c = b * (1.0 + eta);
            let d = b * ((eta - 1.0).powi(2) + 4.0 * eta * lambda * lambda).sqrt();
            Some((c, d, 4.0 * eta * (1.0 - lambda * lambda) * b * b))
        }
        FadingModel::AlphaEtaMu { .. } | FadingModel::AlphaLambdaMu { .. } => {
            let (h, big_h) = h_pair(model, 0.0);
            let mu = model.mu();
            Some((2.0 * h * mu, 2.0 * big_h.abs() * mu, 4.0 * mu * mu * h))
        }
        _ => None,
    }
}

fn h_pair(model: &FadingModel, shift: f64) -> (f64, f64) {
    match *model {
        FadingModel::AlphaLambdaMu { lambda, .. } => {
            let w = (1.0 - lambda * lambda).powf(-1.0 - shift);
            (w, lambda * w)
        }
        FadingModel::AlphaEtaMu { eta, .. } => (0.25 * (2.0 + eta + 1.0 / eta), 0.25 * (1.0 / eta - eta)),
        _ => unreachable!("h and H exist only for the alpha-eta-mu and alpha-lambda-mu families"),
    }
}

/// E[γ]/scale for the tabulated coefficients, i.e. E[X^{1/ᾱ}] for the
/// unit-mean unstretched variable X.
pub(crate) fn mean_factor(model: &FadingModel) -> f64 {
    let p = 1.0 / model.alpha_bar();
    if p == 1.0 {
        return 1.0;
    }
    let mu = model.mu();
    match *model {
        FadingModel::AlphaMu { .. } => (lgamma(mu + p) - lgamma(mu) - p * mu.ln()).exp(),
        FadingModel::AlphaKappaMu { kappa, .. } => {
            let l1f1 = if kappa == 0.0 {
                0.0
            } else {
                ln_hyp1f1(mu + p, mu, mu * kappa).expect("in-range arguments")
            };
            (lgamma(mu + p) - lgamma(mu) - p * (mu * (1.0 + kappa)).ln() - mu * kappa + l1f1).exp()
        }
        _ => {
            let (c, d, prod) = base_rates(model).expect("two-gamma family");
            let a2 = c + d;
            let a1 = prod / a2;
            let z = 2.0 * d / a2;
            (-p * a1.ln() + lgamma(2.0 * mu + p) - lgamma(2.0 * mu)).exp() * hyp2f1_unchecked(-p, mu, 2.0 * mu, z)
        }
    }
}

/// ln ψ d^ν assembled from the parts that do not vanish with d plus the
/// vanishing factor D, where ψ ∝ D^{−k} and d ∝ D. When k = ν the D terms
/// cancel exactly, which covers d = 0.
fn combine(ln_psi_rest: f64, ln_d_rest: f64, ln_vanishing: f64, nu: f64, k: f64) -> (f64, f64) {
    let e = nu - k;
    let extra = if e == 0.0 { 0.0 } else { e * ln_vanishing };
    (ln_psi_rest + nu * ln_d_rest + extra, (ln_d_rest + ln_vanishing).exp())
}

fn build_compact(model: &FadingModel, sh: &ExponentShifts) -> CompactParams {
    use Exponent::*;
    let mu = model.mu();
    let ab = model.alpha_bar();
    let scale = model.gbar() / mean_factor(model);
    let lg = scale.ln();
    let stretch = ab + sh.get(Stretch);
    let ln_sqrt_pi = 0.5 * PI.ln();

    match *model {
        FadingModel::AlphaMu { .. } => {
            let beta = mu / scale.powf(ab + sh.get(GbarInBeta));
            let ln_psi = ab.ln() + (mu + sh.get(MuPowerInPsi)) * beta.ln() - lgamma(mu);
            CompactParams {
                ln_psi_dnu: ln_psi,
                m: ab * mu + sh.get(M),
                beta,
                alpha_bar: stretch,
                bessel: None,
                scale,
                internals: Internals::default(),
            }
        }
        FadingModel::EtaLambdaMu { eta, lambda, .. } => {
            let one_l = 1.0 - lambda * lambda;
            let b = mu * (1.0 + eta) / (2.0 * eta * one_l);
            let c = mu * (1.0 + eta).powf(2.0 + sh.get(OnePlusEtaInC)) / (2.0 * eta * one_l);
            let root = ((eta - 1.0).powi(2) + 4.0 * eta * lambda * lambda).sqrt();
            let nu0 = mu - 0.5;
            let k = nu0 + sh.get(BesselPowerInPsi);
            let nu = nu0 + sh.get(Nu);
            // ψ = √π (2√(η(1−λ²)) b̄)^{2μ} / (2^{μ−½} Γ(μ) d̄^{μ−½} γ̄^{μ+½}), d̄ = b̄·root
            let ln_psi_rest = ln_sqrt_pi
                + (2.0 * mu + sh.get(MuPowerInPsi)) * (2.0 * (eta * one_l).sqrt() * b).ln()
                - nu0 * std::f64::consts::LN_2
                - lgamma(mu)
                - k * b.ln()
                - (mu + 0.5 + sh.get(GbarInPsi)) * lg;
            let ln_d_rest = b.ln() - (1.0 + sh.get(GbarInD)) * lg;
            let (ln_psi_dnu, d) = combine(ln_psi_rest, ln_d_rest, root.ln(), nu, k);
            CompactParams {
                ln_psi_dnu,
                m: mu + 0.5 + sh.get(M),
                beta: c / scale.powf(1.0 + sh.get(GbarInBeta)),
                alpha_bar: 1.0 + sh.get(Stretch),
                bessel: Some(BesselPart { nu, d, r: 1.0, power: 1.0 }),
                scale,
                internals: Internals {
                    c_bar: Some(c),
                    b_bar: Some(b),
                    d_bar: Some(b * root),
                    ..Internals::default()
                },
            }
        }
        FadingModel::AlphaEtaMu { .. } | FadingModel::AlphaLambdaMu { .. } => {
            let (h, big_h) = h_pair(model, sh.get(OneMinusLambdaInH));
            let nu0 = mu - 0.5;
            let k = nu0 + sh.get(BesselPowerInPsi);
            let nu = nu0 + sh.get(Nu);
            let m = ab * (mu + 0.5);
            // ψ = 2√π ᾱ h^μ μ^{μ+½} / (Γ(μ) H^{μ−½} γ̄^m), d = 2Hμ/γ̄^ᾱ
            let ln_psi_rest = (2.0 * ab).ln() + ln_sqrt_pi + (mu + sh.get(MuPowerInPsi)) * h.ln()
                + (mu + 0.5) * mu.ln()
                - lgamma(mu)
                - (m + sh.get(GbarInPsi)) * lg;
            let ln_d_rest = (2.0 * mu).ln() - (ab + sh.get(GbarInD)) * lg;
            let (ln_psi_dnu, d) = combine(ln_psi_rest, ln_d_rest, big_h.abs().ln(), nu, k);
            CompactParams {
                ln_psi_dnu,
                m: m + sh.get(M),
                beta: 2.0 * h * mu / scale.powf(ab + sh.get(GbarInBeta)),
                alpha_bar: stretch,
                bessel: Some(BesselPart { nu, d, r: 1.0, power: ab }),
                scale,
                internals: Internals {
                    h: Some(h),
                    big_h: Some(big_h),
                    ..Internals::default()
                },
            }
        }
        FadingModel::AlphaKappaMu { kappa, .. } => {
            let nu0 = mu - 1.0;
            let k = nu0 + sh.get(BesselPowerInPsi);
            let nu = nu0 + sh.get(Nu);
            let m = ab * (mu + 1.0) / 2.0;
            // ψ = ᾱμ(1+κ)^{(μ+1)/2} / (κ^{(μ−1)/2} e^{μκ} γ̄^{ᾱ(μ+1)/2}), vanishing factor √κ
            let ln_psi_rest = ab.ln() + mu.ln() + ((mu + 1.0) / 2.0 + sh.get(MuPowerInPsi)) * (1.0 + kappa).ln()
                - mu * kappa
                - (m + sh.get(GbarInPsi)) * lg;
            let ln_d_rest = (2.0 * mu).ln() + 0.5 * (1.0 + kappa).ln() - (ab / 2.0 + sh.get(GbarInD)) * lg;
            let (ln_psi_dnu, d) = combine(ln_psi_rest, ln_d_rest, 0.5 * kappa.ln(), nu, k);
            CompactParams {
                ln_psi_dnu,
                m: m + sh.get(M),
                beta: mu * (1.0 + kappa) / scale.powf(ab + sh.get(GbarInBeta)),
                alpha_bar: stretch,
                bessel: Some(BesselPart { nu, d, r: 0.5, power: 0.5 * ab }),
                scale,
                internals: Internals::default(),
            }
        }
        FadingModel::AlphaLambdaEtaMu { eta, lambda, .. } => {
            let one_l = 1.0 - lambda * lambda;
            let root = ((eta - 1.0).powi(2) + 4.0 * eta * lambda * lambda).sqrt();
            let b_tilde = root / one_l;
            let c = mu * (1.0 + eta).powf(2.0 + sh.get(OnePlusEtaInC)) / (2.0 * eta * one_l);
            let nu0 = mu - 0.5;
            let k = nu0 + sh.get(BesselPowerInPsi);
            let nu = nu0 + sh.get(Nu);
            let m = ab * (mu + 0.5);
            // ψ = ᾱ η^μ √π (μ(1+1/η))^{μ+½} / ((1−λ²)^μ Γ(μ) γ̄^m b̃^{μ−½}),
            // d = μ(1+η) b̃ / (2η γ̄^ᾱ), b̃ = root/(1−λ²)
            let ln_psi_rest = ab.ln() + (mu + sh.get(MuPowerInPsi)) * eta.ln() + ln_sqrt_pi
                + (mu + 0.5) * (mu * (1.0 + 1.0 / eta)).ln()
                - mu * one_l.ln()
                - lgamma(mu)
                - (m + sh.get(GbarInPsi)) * lg
                + k * one_l.ln();
            let ln_d_rest = (mu * (1.0 + eta) / (2.0 * eta * one_l)).ln() - (ab + sh.get(GbarInD)) * lg;
            let (ln_psi_dnu, d) = combine(ln_psi_rest, ln_d_rest, root.ln(), nu, k);
            CompactParams {
                ln_psi_dnu,
                m: m + sh.get(M),
                beta: c / scale.powf(ab + sh.get(GbarInBeta)),
                alpha_bar: stretch,
                bessel: Some(BesselPart { nu, d, r: 1.0, power: ab }),
                scale,
                internals: Internals {
                    c_bar: Some(c),
                    b_bar: Some(b_tilde),
                    ..Internals::default()
                },
            }
        }
    }
}

// --- external record ---------------------------------------------------

/// Flat key-value form of a model with the mean SNR in dB.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelRecord {
    pub family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    /// Hoyt q, only for `family = "hoyt"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    pub gbar_db: f64,
}

impl From<FadingModel> for ModelRecord {
    fn from(m: FadingModel) -> Self {
        let mut r = ModelRecord {
            family: m.family().name().to_string(),
            gbar_db: m.gbar_db(),
            mu: Some(m.mu()),
            alpha: m.alpha(),
            ..Default::default()
        };
        match m {
            FadingModel::EtaLambdaMu { eta, lambda, .. } | FadingModel::AlphaLambdaEtaMu { eta, lambda, .. } => {
                r.eta = Some(eta);
                r.lambda = Some(lambda);
            }
            FadingModel::AlphaEtaMu { eta, .. } => r.eta = Some(eta),
            FadingModel::AlphaLambdaMu { lambda, .. } => r.lambda = Some(lambda),
            FadingModel::AlphaKappaMu { kappa, .. } => r.kappa = Some(kappa),
            FadingModel::AlphaMu { .. } => {}
        }
        r
    }
}

impl TryFrom<ModelRecord> for FadingModel {
    type Error = Error;

    fn try_from(r: ModelRecord) -> Result<FadingModel> {
        let family = r.family.trim().to_ascii_lowercase().replace('_', "-");
        let gbar = 10f64.powf(r.gbar_db / 10.0);
        if !r.gbar_db.is_finite() {
            return Err(Error::Config(format!("gbar_db = {} must be finite", r.gbar_db)));
        }
        let fields = [
            ("alpha", r.alpha),
            ("eta", r.eta),
            ("lambda", r.lambda),
            ("kappa", r.kappa),
            ("mu", r.mu),
            ("q", r.q),
        ];
        let allowed: &[&str] = match family.as_str() {
            "alpha-lambda-eta-mu" => &["alpha", "lambda", "eta", "mu"],
            "eta-lambda-mu" => &["eta", "lambda", "mu"],
            "alpha-mu" => &["alpha", "mu"],
            "alpha-eta-mu" => &["alpha", "eta", "mu"],
            "alpha-lambda-mu" => &["alpha", "lambda", "mu"],
            "alpha-kappa-mu" => &["alpha", "kappa", "mu"],
            "rayleigh" | "one-sided-gaussian" => &[],
            "nakagami-m" | "nakagami" => &["mu"],
            "weibull" => &["alpha"],
            "hoyt" => &["q"],
            "eta-mu" => &["eta", "mu"],
            "lambda-mu" => &["lambda", "mu"],
            "kappa-mu" => &["kappa", "mu"],
            other => return Err(Error::Config(format!("family: unknown model family `{other}`"))),
        };
        for (name, v) in fields {
            if v.is_some() && !allowed.contains(&name) {
                return Err(Error::Config(format!("field `{name}` does not apply to family `{family}`")));
            }
        }
        let need = |name: &str, v: Option<f64>| {
            v.ok_or_else(|| Error::Config(format!("family `{family}` requires field `{name}`")))
        };
        let model = match family.as_str() {
            "eta-lambda-mu" => FadingModel::EtaLambdaMu {
                eta: need("eta", r.eta)?,
                lambda: need("lambda", r.lambda)?,
                mu: need("mu", r.mu)?,
                gbar,
            },
            "alpha-mu" => FadingModel::AlphaMu {
                alpha: need("alpha", r.alpha)?,
                mu: need("mu", r.mu)?,
                gbar,
            },
            "alpha-eta-mu" => FadingModel::AlphaEtaMu {
                alpha: need("alpha", r.alpha)?,
                eta: need("eta", r.eta)?,
                mu: need("mu", r.mu)?,
                gbar,
            },
            "alpha-lambda-mu" => FadingModel::AlphaLambdaMu {
                alpha: need("alpha", r.alpha)?,
                lambda: need("lambda", r.lambda)?,
                mu: need("mu", r.mu)?,
                gbar,
            },
            "alpha-kappa-mu" => FadingModel::AlphaKappaMu {
                alpha: need("alpha", r.alpha)?,
                kappa: need("kappa", r.kappa)?,
                mu: need("mu", r.mu)?,
                gbar,
            },
            "alpha-lambda-eta-mu" => FadingModel::AlphaLambdaEtaMu {
                alpha: need("alpha", r.alpha)?,
                lambda: need("lambda", r.lambda)?,
                eta: need("eta", r.eta)?,
                mu: need("mu", r.mu)?,
                gbar,
            },
            "rayleigh" => FadingModel::rayleigh(gbar)?,
            "one-sided-gaussian" => FadingModel::one_sided_gaussian(gbar)?,
            "nakagami-m" | "nakagami" => FadingModel::nakagami_m(need("mu", r.mu)?, gbar)?,
            "weibull" => FadingModel::weibull(need("alpha", r.alpha)?, gbar)?,
            "hoyt" => FadingModel::hoyt(need("q", r.q)?, gbar)?,
            "eta-mu" => FadingModel::eta_mu(need("eta", r.eta)?, need("mu", r.mu)?, gbar)?,
            "lambda-mu" => FadingModel::lambda_mu(need("lambda", r.lambda)?, need("mu", r.mu)?, gbar)?,
            "kappa-mu" => FadingModel::kappa_mu(need("kappa", r.kappa)?, need("mu", r.mu)?, gbar)?,
            _ => unreachable!(),
        };
        Ok(model)
    }
}

/// Parses `family=…,alpha=…,mu=…,gbar-db=…`.
impl FromStr for ModelRecord {
    type Err = Error;

    fn from_str(s: &str) -> Result<ModelRecord> {
        let mut r = ModelRecord::default();
        let mut have_gbar = false;
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("model: expected key=value, got `{part}`")))?;
            let key = k.trim().to_ascii_lowercase().replace('-', "_");
            let v = v.trim();
            if key == "family" {
                r.family = v.to_string();
                continue;
            }
            let x: f64 = v
                .parse()
                .map_err(|_| Error::Config(format!("model: field `{key}` has non-numeric value `{v}`")))?;
            match key.as_str() {
                "alpha" => r.alpha = Some(x),
                "eta" => r.eta = Some(x),
                "lambda" => r.lambda = Some(x),
                "kappa" => r.kappa = Some(x),
                "mu" | "m" => r.mu = Some(x),
                "q" => r.q = Some(x),
                "gbar_db" => {
                    r.gbar_db = x;
                    have_gbar = true;
                }
                other => return Err(Error::Config(format!("model: unknown field `{other}`"))),
            }
        }
        if r.family.is_empty() {
            return Err(Error::Config("model: missing field `family`".into()));
        }
        if !have_gbar {
            return Err(Error::Config("model: missing field `gbar-db`".into()));
        }
        Ok(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    fn audit(model: &FadingModel) -> (f64, f64) {
        let cp = model.compact_params().unwrap();
        let n = cp.damped_moment(0, 0.0, model.gbar(), 1e-10).unwrap().value;
        let m = cp.damped_moment(1, 0.0, model.gbar(), 1e-10).unwrap().value;
        (n, m)
    }

    #[test]
    fn alpha_mu_table_example() {
        let cp = FadingModel::AlphaMu { alpha: 2.0, mu: 1.0, gbar: 1.0 }.compact_params().unwrap();
        assert_eq!(cp.alpha_bar, 1.0);
        assert!(rel(cp.beta, 1.0) < 1e-15);
        assert!(rel(cp.m, 1.0) < 1e-15);
        assert!(rel(cp.psi(), 1.0) < 1e-14);
        assert!(rel(cp.pdf(1.0).unwrap(), (-1f64).exp()) < 1e-14);
    }

    #[test]
    fn eta_lambda_mu_degenerate_example() {
        let model = FadingModel::EtaLambdaMu { eta: 1.0, lambda: 0.0, mu: 0.5, gbar: 1.0 };
        let cp = model.compact_params().unwrap();
        let i = cp.internals;
        assert!(rel(i.b_bar.unwrap(), 0.5) < 1e-15);
        assert!(rel(i.c_bar.unwrap(), 1.0) < 1e-15);
        assert_eq!(i.d_bar.unwrap(), 0.0);
        assert_eq!(cp.nu().unwrap(), 0.0);
        assert!(rel(cp.m, 1.0) < 1e-15 && rel(cp.beta, 1.0) < 1e-15);
        assert!(rel(cp.pdf(0.7).unwrap(), (-0.7f64).exp()) < 1e-13);
    }

    #[test]
    fn kappa_to_zero_is_rayleigh() {
        let model = FadingModel::AlphaKappaMu { alpha: 2.0, kappa: 1e-9, mu: 1.0, gbar: 1.0 };
        for &g in &[0.5, 1.0, 2.0] {
            assert!((model.pdf(g).unwrap() - (-g as f64).exp()).abs() < 1e-6);
        }
    }

    #[test]
    fn special_cases() {
        let r = FadingModel::rayleigh(1.0).unwrap();
        for &g in &[0.1, 1.0, 3.0] {
            assert!((r.pdf(g).unwrap() - (-g as f64).exp()).abs() < 1e-10);
        }
        let n = FadingModel::nakagami_m(2.0, 1.0).unwrap();
        assert!((n.pdf(1.0).unwrap() - 4.0 * (-2f64).exp()).abs() < 1e-10);
        let (norm, _) = audit(&FadingModel::hoyt(0.5, 1.0).unwrap());
        assert!((norm - 1.0).abs() < 1e-6);
        assert!(FadingModel::nakagami_m(0.3, 1.0).is_err());
        assert!(FadingModel::hoyt(1.5, 1.0).is_err());
    }

    #[test]
    fn validation_reports_each_parameter() {
        let v = FadingModel::AlphaMu { alpha: -1.0, mu: 1.0, gbar: 1.0 }.violations();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].parameter, "alpha");
        let v = FadingModel::AlphaLambdaMu { alpha: 2.0, lambda: 1.0, mu: 0.0, gbar: -1.0 }.violations();
        let names: Vec<_> = v.iter().map(|x| x.parameter.as_str()).collect();
        assert_eq!(names, ["lambda", "mu", "gbar"]);
        assert!(FadingModel::AlphaMu { alpha: 2.0, mu: f64::NAN, gbar: 1.0 }.validate().is_err());
        assert!(FadingModel::rayleigh(1.0).unwrap().validate().is_ok());
    }

    #[test]
    fn every_family_normalises_with_unit_mean() {
        let models = [
            FadingModel::EtaLambdaMu { eta: 0.3, lambda: 0.6, mu: 1.7, gbar: 2.5 },
            FadingModel::AlphaMu { alpha: 3.3, mu: 0.8, gbar: 0.4 },
            FadingModel::AlphaEtaMu { alpha: 1.4, eta: 4.0, mu: 2.2, gbar: 7.0 },
            FadingModel::AlphaLambdaMu { alpha: 4.5, lambda: 0.8, mu: 0.6, gbar: 0.2 },
            FadingModel::AlphaKappaMu { alpha: 2.7, kappa: 6.0, mu: 1.3, gbar: 3.0 },
            FadingModel::AlphaLambdaEtaMu { alpha: 1.2, lambda: 0.4, eta: 0.2, mu: 3.0, gbar: 12.0 },
        ];
        for m in models {
            let (n, mean) = audit(&m);
            assert!((n - 1.0).abs() < 1e-8, "{m:?}: norm {n}");
            assert!(rel(mean, m.gbar()) < 1e-8, "{m:?}: mean {mean}");
        }
    }

    #[test]
    fn alpha_lambda_eta_mu_at_alpha_two_is_eta_lambda_mu() {
        let a = FadingModel::AlphaLambdaEtaMu { alpha: 2.0, lambda: 0.35, eta: 2.5, mu: 1.1, gbar: 3.0 };
        let b = FadingModel::EtaLambdaMu { eta: 2.5, lambda: 0.35, mu: 1.1, gbar: 3.0 };
        for &g in &[0.05, 1.0, 6.0] {
            assert!(rel(a.pdf(g).unwrap(), b.pdf(g).unwrap()) < 1e-12);
        }
    }

    #[test]
    fn record_round_trip_and_errors() {
        let m = FadingModel::AlphaKappaMu { alpha: 2.0, kappa: 1.0, mu: 1.5, gbar: 10.0 };
        let json = serde_json::to_string(&m).unwrap();
        assert!(json.contains("\"family\":\"alpha-kappa-mu\""));
        let back: FadingModel = serde_json::from_str(&json).unwrap();
        assert!(rel(back.gbar(), 10.0) < 1e-14);
        let bad = serde_json::from_str::<FadingModel>(r#"{"family":"alpha-nu","gbar_db":0}"#);
        assert!(bad.unwrap_err().to_string().contains("family"));
        let rec: ModelRecord = "family=rayleigh,gbar-db=10".parse().unwrap();
        let r = FadingModel::try_from(rec).unwrap();
        assert!(rel(r.gbar(), 10.0) < 1e-14);
        let e = FadingModel::try_from("family=alpha-mu,alpha=2,gbar-db=0".parse::<ModelRecord>().unwrap());
        assert!(e.unwrap_err().to_string().contains("`mu`"));
    }

    #[test]
    fn exponent_shift_breaks_audit() {
        let m = FadingModel::AlphaKappaMu { alpha: 3.0, kappa: 2.0, mu: 1.5, gbar: 4.0 };
        let cp = m.compact_params_shifted(&ExponentShifts::single(Exponent::GbarInD, 0.5)).unwrap();
        let n = cp.damped_moment(0, 0.0, m.gbar(), 1e-10).unwrap().value;
        assert!((n - 1.0).abs() > 1e-3);
    }
}
