//! Special functions and MGFs against independent oracles. Each oracle is
//! computed here with its own quadrature or summation; the frozen literals
//! are 40-digit reference evaluations of the same quantities.

use std::f64::consts::PI;

use fadingmgf::expfit::{ExpSumFit, GridSpec};
use fadingmgf::mgf::{mgf_eta_lambda_mu_hyp, mgf_eta_lambda_mu_rational, mgf_numeric, mgf_unified_approx, MgfEvaluator, MgfStrategy};
use fadingmgf::specfun::{bessel_i, gamma, hyp1f1, hyp2f1, integrate_semi_infinite};
use fadingmgf::{FadingModel, FitCache};

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

/// Composite Simpson rule, independent of the library integrator.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let n = panels * 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + h * i as f64);
    }
    s * h / 3.0
}

#[test]
fn bessel_i_against_integral_representation() {
    const FROZEN: f64 = 237.566_958_363_190_78;
    let (nu, x) = (1.3f64, 7.5f64);
    let first = simpson(|t| (x * t.cos()).exp() * (nu * t).cos(), 0.0, PI, 20_000) / PI;
    let second = simpson(|t| (-x * t.cosh() - nu * t).exp(), 0.0, 12.0, 40_000);
    let oracle = first - (nu * PI).sin() / PI * second;
    assert!(rel(oracle, FROZEN) < 1e-12, "oracle {oracle}");
    assert!(rel(bessel_i(nu, x).unwrap(), FROZEN) < 1e-12);
}

/// Neumaier-compensated term-by-term sum of the Gauss series.
fn compensated_2f1(a: f64, b: f64, c: f64, z: f64) -> f64 {
    let (mut sum, mut comp, mut term) = (1.0f64, 0.0f64, 1.0f64);
    for n in 0..2000 {
        let nf = n as f64;
        term *= (a + nf) * (b + nf) / ((c + nf) * (nf + 1.0)) * z;
        let t = sum + term;
        comp += if sum.abs() >= term.abs() { (sum - t) + term } else { (term - t) + sum };
        sum = t;
        if term.abs() < 1e-22 {
            break;
        }
    }
    sum + comp
}

#[test]
fn hyp2f1_against_compensated_series() {
    const FROZEN: f64 = 1.750_105_872_907_703_3;
    let oracle = compensated_2f1(0.75, 1.25, 1.5, 0.6);
    assert!(rel(oracle, FROZEN) < 1e-15);
    assert!(rel(hyp2f1(0.75, 1.25, 1.5, 0.6).unwrap(), FROZEN) < 1e-14);
}

#[test]
fn hyp1f1_against_euler_integral() {
    const FROZEN: f64 = 3128.735_299_684_091_6;
    let (a, b, z) = (1.5f64, 2.5f64, 10.0f64);
    // t = u² removes the square-root endpoint behaviour
    let integral = simpson(|u| 2.0 * u * u * (z * u * u).exp(), 0.0, 1.0, 20_000);
    let oracle = gamma(b) / (gamma(a) * gamma(b - a)) * integral;
    assert!(rel(oracle, FROZEN) < 1e-12, "oracle {oracle}");
    assert!(rel(hyp1f1(a, b, z).unwrap(), FROZEN) < 1e-13);
}

#[test]
fn semi_infinite_against_gamma_substitution() {
    // u = γ^{1.3} turns the integral into Γ(1.7/1.3)/1.3
    const FROZEN: f64 = 0.689_487_248_934_880_2;
    let oracle = gamma(1.7 / 1.3) / 1.3;
    assert!(rel(oracle, FROZEN) < 1e-14);
    let q = integrate_semi_infinite(|g: f64| g.powf(0.7) * (-g.powf(1.3)).exp(), 1e-12).unwrap();
    assert!(rel(q.value, FROZEN) < 1e-11, "{q:?}");
}

fn kappa_mu_mgf(kappa: f64, mu: f64, gbar: f64, s: f64) -> f64 {
    let p = mu * (1.0 + kappa);
    (p / (p + s * gbar)).powf(mu) * (mu * mu * kappa * (1.0 + kappa) / (p + s * gbar) - mu * kappa).exp()
}

#[test]
fn kappa_mu_mgf_against_closed_form() {
    const FROZEN: f64 = 0.477_687_540_382_526_17;
    assert!(rel(kappa_mu_mgf(1.0, 1.0, 1.0, 1.0), FROZEN) < 1e-15);
    let m = FadingModel::AlphaKappaMu { alpha: 2.0, kappa: 1.0, mu: 1.0, gbar: 1.0 };
    assert!(rel(mgf_numeric(&m, 1.0).unwrap(), FROZEN) < 1e-9);
    let fit = ExpSumFit::identity(GridSpec::default());
    assert!(rel(mgf_unified_approx(&m, 1.0, &fit).unwrap(), FROZEN) < 1e-12);

    let frozen = [(0.5, 0.632_521_685_567_021_04), (2.0, 0.228_855_588_268_863_39), (8.0, 0.031_667_103_820_155_63)];
    let m = FadingModel::AlphaKappaMu { alpha: 2.0, kappa: 2.0, mu: 1.5, gbar: 1.0 };
    for (s, v) in frozen {
        assert!(rel(kappa_mu_mgf(2.0, 1.5, 1.0, s), v) < 1e-14);
        assert!(rel(mgf_unified_approx(&m, s, &fit).unwrap(), v) < 1e-2);
        assert!(rel(mgf_numeric(&m, s).unwrap(), v) < 1e-9);
    }
}

#[test]
fn peaked_kappa_mu_deep_tail() {
    // a narrow density probed far into the MGF tail
    let m = FadingModel::AlphaKappaMu { alpha: 2.0, kappa: 21.3, mu: 11.77, gbar: 7.36 };
    for s in [1.0, 7.35, 40.0] {
        let e = kappa_mu_mgf(21.3, 11.77, 7.36, s);
        assert!(rel(mgf_numeric(&m, s).unwrap(), e) < 1e-8, "s = {s}");
    }
}

#[test]
fn eta_lambda_mu_reductions() {
    // η = 1, λ = 0, μ = 1/2 is Rayleigh: M(s) = 1/(1 + sγ̄)
    let r = FadingModel::EtaLambdaMu { eta: 1.0, lambda: 0.0, mu: 0.5, gbar: 1.0 };
    assert!(rel(mgf_eta_lambda_mu_rational(&r, 3.0).unwrap(), 0.25) < 1e-14);
    assert!(rel(mgf_eta_lambda_mu_hyp(&r, 3.0).unwrap(), 0.25) < 1e-14);
    assert!(rel(mgf_numeric(&r, 3.0).unwrap(), 0.25) < 1e-9);
    assert!(rel(r.pdf(0.7).unwrap(), (-0.7f64).exp()) < 1e-12);

    // vanishing Bessel argument in general: (1 + sγ̄/(2μ))^{−2μ}
    let m = FadingModel::EtaLambdaMu { eta: 1.0, lambda: 0.0, mu: 1.7, gbar: 2.0 };
    for s in [0.1, 1.0, 10.0] {
        let e = (1.0 + s * 2.0 / 3.4f64).powf(-3.4);
        assert!(rel(mgf_eta_lambda_mu_hyp(&m, s).unwrap(), e) < 1e-12);
    }

    let m = FadingModel::EtaLambdaMu { eta: 2.0, lambda: 0.3, mu: 1.5, gbar: 2.0 };
    assert!(rel(mgf_eta_lambda_mu_rational(&m, 0.7).unwrap(), mgf_numeric(&m, 0.7).unwrap()) < 1e-8);
}

#[test]
fn nakagami_and_collapse_cases() {
    const FROZEN: f64 = 0.431_201_150_371_692_13;
    let cache = FitCache::default();
    let m = FadingModel::AlphaMu { alpha: 2.0, mu: 2.5, gbar: 1.0 };
    let v = MgfEvaluator::new(&m, MgfStrategy::Approx, &cache).unwrap().eval(1.0).unwrap();
    assert!(rel(v, FROZEN) < 1e-14);
    assert!(rel((2.5f64 / 3.5).powf(2.5), FROZEN) < 1e-15);

    // η → 1 gives Nakagami with m = 2μ, so μ = 1/2 is Rayleigh
    for (mu, expected) in [(0.5, 0.5), (1.0, 4.0 / 9.0)] {
        let a = FadingModel::AlphaEtaMu { alpha: 2.0, eta: 1.0 + 1e-9, mu, gbar: 1.0 };
        let v = MgfEvaluator::new(&a, MgfStrategy::Approx, &cache).unwrap().eval(1.0).unwrap();
        assert!((v - expected).abs() < 1e-5, "mu = {mu}: {v}");
    }
}

#[test]
fn alpha_mu_approx_near_oracle() {
    let cache = FitCache::default();
    let m = FadingModel::AlphaMu { alpha: 3.0, mu: 1.5, gbar: 2.0 };
    let e = MgfEvaluator::new(&m, MgfStrategy::Approx, &cache).unwrap();
    for s in [0.1, 1.0, 10.0] {
        let r = rel(e.eval(s).unwrap(), mgf_numeric(&m, s).unwrap());
        assert!(r < 1e-2, "s = {s}: {r}");
    }
}

#[test]
fn kappa_limit_is_rayleigh() {
    let m = FadingModel::AlphaKappaMu { alpha: 2.0, kappa: 1e-9, mu: 1.0, gbar: 1.0 };
    for g in [0.5f64, 1.0, 2.0] {
        assert!((m.pdf(g).unwrap() - (-g).exp()).abs() < 1e-6);
    }
}

#[test]
fn hoyt_normalizes() {
    let h = FadingModel::hoyt(0.5, 1.0).unwrap();
    let q = h.compact_params().unwrap().damped_moment(0, 0.0, 1.0, 1e-10).unwrap();
    assert!((q.value - 1.0).abs() < 1e-6);
}
