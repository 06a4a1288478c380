//! Adaptive 15-point Gauss–Kronrod quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Outcome of a quadrature run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadResult {
    pub value: f64,
    /// Absolute error estimate, always ≥ 0.
    pub error_estimate: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_subdivisions: 2000,
        }
    }
}

// Kronrod abscissae on [0, 1]; odd indices are the 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_3,
    0.949_107_912_342_758_524_526_189_684_047_9,
    0.864_864_423_359_769_072_789_712_788_640_9,
    0.741_531_185_599_394_439_863_864_773_280_8,
    0.586_087_235_467_691_130_294_144_845_693_0,
    0.405_845_151_377_397_166_906_606_412_076_9,
    0.207_784_955_007_898_467_600_689_403_773_2,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_97,
    0.063_092_092_629_978_553_290_700_663_189_20,
    0.104_790_010_322_250_183_839_876_322_541_5,
    0.140_653_259_715_525_918_745_189_590_510_2,
    0.169_004_726_639_267_902_826_583_426_598_6,
    0.190_350_578_064_785_409_913_256_402_421_0,
    0.204_432_940_075_298_892_414_161_999_234_6,
    0.209_482_141_084_727_828_012_999_174_891_7,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_1,
    0.279_705_391_489_276_667_901_467_771_423_8,
    0.381_830_050_505_118_944_950_369_775_489_0,
    0.417_959_183_673_469_387_755_102_040_816_3,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Result<Segment> {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let eval = |x: f64| -> Result<f64> {
        let y = f(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::NonFiniteIntegrand { at: x })
        }
    };

    let fc = eval(center)?;
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = eval(center - dx)?;
        let f2 = eval(center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let value = res_k * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok(Segment {
        lo,
        hi,
        value,
        error: err,
    })
}

/// Adaptive Gauss–Kronrod integration of `f` over the finite interval
/// `[lo, hi]`, bisecting the worst segment until the summed error estimate
/// meets `max(rel_tol·|value|, abs_tol)`.
pub fn integrate_adaptive<F>(f: F, lo: f64, hi: f64, rel_tol: f64, abs_tol: f64) -> Result<QuadResult>
where
    F: Fn(f64) -> f64,
{
    integrate_adaptive_with(
        f,
        lo,
        hi,
        &QuadOptions {
            rel_tol,
            abs_tol,
            ..QuadOptions::default()
        },
    )
}

pub fn integrate_adaptive_with<F>(f: F, lo: f64, hi: f64, opts: &QuadOptions) -> Result<QuadResult>
where
    F: Fn(f64) -> f64,
{
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(domain(
            "integrate_adaptive",
            format!("interval [{lo}, {hi}] must be finite with lo < hi"),
        ));
    }
    if !(opts.rel_tol >= 0.0 && opts.abs_tol >= 0.0) {
        return Err(domain("integrate_adaptive", "tolerances must be non-negative"));
    }

    let first = gk15(&f, lo, hi)?;
    let mut evaluations = 15;
    let mut total = first.value;
    let mut total_err = first.error;
    let mut heap = BinaryHeap::new();
    // segments too narrow to bisect in floating point
    let mut retired: Vec<Segment> = Vec::new();
    heap.push(first);

    let tolerance = |v: f64| (opts.rel_tol * v.abs()).max(opts.abs_tol);
    let mut subdivisions = 1;
    loop {
        if total_err <= tolerance(total) {
            // running totals lose everything to cancellation when early
            // segments dwarf the integral, so confirm with a fresh sum
            let (v, e) = heap.iter().chain(retired.iter()).fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
            if e <= tolerance(v) {
                break;
            }
            (total, total_err) = (v, e);
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo || mid >= worst.hi {
            retired.push(worst);
            continue;
        }
        if subdivisions >= opts.max_subdivisions {
            heap.push(worst);
            break;
        }
        let left = gk15(&f, worst.lo, mid)?;
        let right = gk15(&f, mid, worst.hi)?;
        evaluations += 30;
        subdivisions += 1;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }

    // re-sum to shed drift in the running totals
    let segments = heap.iter().chain(retired.iter());
    let (value, error_estimate) = segments.fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
    let result = QuadResult {
        value,
        error_estimate,
        evaluations,
    };
    if error_estimate > tolerance(value) {
        return Err(Error::ToleranceNotMet { partial: result });
    }
    Ok(result)
}

/// Options for integrals over [0, ∞).
///
/// The integrand is mapped by γ = scale·(t/(1−t))^(1/p) onto t ∈ [0, 1),
/// where p = min(leading_power, 1). With `leading_power` set to the
/// exponent m of an endpoint behaviour γ^(m−1), the transformed integrand
/// is bounded at t = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemiInfiniteOptions {
    pub scale: f64,
    pub leading_power: f64,
    pub quad: QuadOptions,
}

impl Default for SemiInfiniteOptions {
    fn default() -> Self {
        Self {
            scale: 1.0,
            leading_power: 1.0,
            quad: QuadOptions::default(),
        }
    }
}

/// ∫₀^∞ f(γ) dγ via γ = t/(1−t).
pub fn integrate_semi_infinite<F>(f: F, rel_tol: f64) -> Result<QuadResult>
where
    F: Fn(f64) -> f64,
{
    let opts = SemiInfiniteOptions {
        quad: QuadOptions {
            rel_tol,
            ..QuadOptions::default()
        },
        ..SemiInfiniteOptions::default()
    };
    integrate_semi_infinite_with(f, &opts)
}

pub fn integrate_semi_infinite_with<F>(f: F, opts: &SemiInfiniteOptions) -> Result<QuadResult>
where
    F: Fn(f64) -> f64,
{
    if !(opts.scale > 0.0 && opts.scale.is_finite()) {
        return Err(domain("integrate_semi_infinite", "scale must be finite and > 0"));
    }
    if !(opts.leading_power > 0.0 && opts.leading_power.is_finite()) {
        return Err(domain("integrate_semi_infinite", "leading_power must be finite and > 0"));
    }
    let q = 1.0 / opts.leading_power.min(1.0);
    let scale = opts.scale;
    let g = |t: f64| {
        let u = t / (1.0 - t);
        let x = scale * u.powf(q);
        if !x.is_finite() {
            return 0.0;
        }
        let fx = f(x);
        if fx == 0.0 {
            return 0.0;
        }
        let jac = if q == 1.0 {
            scale / ((1.0 - t) * (1.0 - t))
        } else {
            scale * q * u.powf(q - 1.0) / ((1.0 - t) * (1.0 - t))
        };
        fx * jac
    };
    integrate_adaptive_with(g, 0.0, 1.0, &opts.quad)
}
