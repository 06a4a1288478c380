//! Average symbol error rates through the MGF single-integral form
//!
//! P = Σ_ℓ E_ℓ ∫₀^{θ_ℓ} M(φ / (V − 2Λ sin²θ)) dθ.

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expfit::FitCache;
use crate::mgf::{MgfEvaluator, MgfStrategy};
use crate::models::{FadingModel, ModelRecord};
use crate::specfun::integrate_adaptive;

pub const SER_REL_TOL: f64 = 1e-8;
/// Below this the quadrature tolerance dominates the reported value.
pub const NUMERICAL_FLOOR: f64 = 1e-15;
pub const SCHEMA: &str = "fadingmgf/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Mpsk,
    Mdpsk,
    Mpam,
    Mqam,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Mpsk => "mpsk",
            Scheme::Mdpsk => "mdpsk",
            Scheme::Mpam => "mpam",
            Scheme::Mqam => "mqam",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "").as_str() {
            "mpsk" | "psk" => Ok(Scheme::Mpsk),
            "mdpsk" | "dpsk" => Ok(Scheme::Mdpsk),
            "mpam" | "pam" => Ok(Scheme::Mpam),
            "mqam" | "qam" => Ok(Scheme::Mqam),
            other => Err(Error::Config(format!(
                "scheme: unknown `{other}` (expected mpsk, mdpsk, mpam or mqam)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verification {
    Verified,
    /// The row is used as tabulated but disagrees with a classical result.
    Pending,
}

/// One summand: prefactor E_ℓ and upper limit θ_ℓ (radians).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SerTerm {
    pub prefactor: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulationSpec {
    pub scheme: Scheme,
    pub order: u32,
    pub terms: Vec<SerTerm>,
    #[serde(rename = "big_lambda")]
    pub lambda: f64,
    pub v: f64,
    pub phi: f64,
    pub verification: Verification,
}

impl ModulationSpec {
    pub fn n(&self) -> usize {
        self.terms.len()
    }

    pub fn denominator(&self, theta: f64) -> f64 {
        let s = theta.sin();
        self.v - 2.0 * self.lambda * s * s
    }

    /// φ/(V − 2Λ sin²θ); +∞ where the denominator vanishes.
    pub fn mgf_argument(&self, theta: f64) -> f64 {
        let d = self.denominator(theta);
        if d <= 0.0 {
            f64::INFINITY
        } else {
            self.phi / d
        }
    }
}

fn invalid(msg: String) -> Error {
    Error::InvalidModulation(msg)
}

/// The parameter row for `scheme` at order `m`.
pub fn modulation_spec(scheme: Scheme, m: u32) -> Result<ModulationSpec> {
    if m < 2 {
        return Err(invalid(format!("order M = {m} must be >= 2")));
    }
    let mf = m as f64;
    let spec = match scheme {
        Scheme::Mpsk => ModulationSpec {
            scheme,
            order: m,
            terms: vec![SerTerm {
                prefactor: 1.0 / PI,
                theta: PI * (mf - 1.0) / mf,
            }],
            lambda: -0.5,
            v: 0.0,
            phi: (PI / mf).sin().powi(2),
            verification: Verification::Verified,
        },
        Scheme::Mdpsk => {
            let lambda = (PI / mf).cos();
            ModulationSpec {
                scheme,
                order: m,
                terms: vec![SerTerm {
                    prefactor: 2.0 / PI,
                    theta: PI * (mf - 1.0) / mf,
                }],
                lambda,
                v: 1.0 + lambda,
                phi: (PI / mf).sin().powi(2),
                verification: Verification::Pending,
            }
        }
        Scheme::Mpam => ModulationSpec {
            scheme,
            order: m,
            terms: vec![SerTerm {
                prefactor: 2.0 * (1.0 - 1.0 / mf) / PI,
                theta: PI / 2.0,
            }],
            lambda: -0.5,
            v: 0.0,
            phi: 3.0 / (mf * mf - 1.0),
            verification: Verification::Verified,
        },
        Scheme::Mqam => {
            let root = (m as f64).sqrt().round() as u32;
            if root * root != m || m < 4 {
                return Err(invalid(format!("M-QAM order M = {m} must be a perfect square >= 4")));
            }
            let k = 1.0 - 1.0 / root as f64;
            ModulationSpec {
                scheme,
                order: m,
                terms: vec![
                    SerTerm {
                        prefactor: 4.0 * k / PI,
                        theta: PI / 2.0,
                    },
                    SerTerm {
                        prefactor: -4.0 * k * k / PI,
                        theta: PI / 4.0,
                    },
                ],
                lambda: -0.5,
                v: 0.0,
                phi: 1.5 / (mf - 1.0),
                verification: Verification::Verified,
            }
        }
    };
    for t in &spec.terms {
        if !(t.theta > 0.0 && t.theta < PI) {
            return Err(invalid(format!("upper limit {} outside (0, pi)", t.theta)));
        }
        for i in 1..=64 {
            let th = t.theta * i as f64 / 64.0;
            if spec.denominator(th) <= 0.0 {
                return Err(invalid(format!("V - 2 Lambda sin^2 is not positive at theta = {th}")));
            }
        }
    }
    Ok(spec)
}

/// 0.5 (1 − √(γ̄/(1+γ̄))), written without cancellation.
pub fn rayleigh_bpsk_reference(gbar: f64) -> f64 {
    let r = gbar / (1.0 + gbar);
    0.5 * (1.0 / (1.0 + gbar)) / (1.0 + r.sqrt())
}

/// An error rate with its quadrature record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SerValue {
    pub ser: f64,
    /// Summed absolute error estimate of the θ integrals.
    pub quad_error: f64,
    pub evaluations: usize,
    pub below_floor: bool,
}

/// Average symbol error rate with fits from the process-wide cache.
pub fn aser(model: &FadingModel, spec: &ModulationSpec, strategy: MgfStrategy) -> Result<f64> {
    Ok(aser_with(model, spec, strategy, FitCache::global())?.ser)
}

pub fn aser_with(
    model: &FadingModel,
    spec: &ModulationSpec,
    strategy: MgfStrategy,
    cache: &FitCache,
) -> Result<SerValue> {
    let eval = MgfEvaluator::new(model, strategy, cache)?;
    aser_evaluator(&eval, spec)
}

/// Error rate for an already prepared MGF.
pub fn aser_evaluator(eval: &MgfEvaluator, spec: &ModulationSpec) -> Result<SerValue> {
    let memo: RefCell<HashMap<u64, f64>> = RefCell::new(HashMap::new());
    let memoise = eval.strategy() == MgfStrategy::Numeric;
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let mgf_at = |s: f64| -> f64 {
        if s.is_infinite() {
            return 0.0;
        }
        if memoise {
            if let Some(v) = memo.borrow().get(&s.to_bits()) {
                return *v;
            }
        }
        let v = match eval.eval(s) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        };
        if memoise {
            memo.borrow_mut().insert(s.to_bits(), v);
        }
        v
    };

    let mut ser = 0.0;
    let mut quad_error = 0.0;
    let mut evaluations = 0;
    for term in &spec.terms {
        let r = integrate_adaptive(|th| mgf_at(spec.mgf_argument(th)), 0.0, term.theta, SER_REL_TOL, 1e-300);
        if let Some(e) = failure.borrow_mut().take() {
            return Err(e);
        }
        let r = r?;
        ser += term.prefactor * r.value;
        quad_error += term.prefactor.abs() * r.error_estimate;
        evaluations += r.evaluations;
    }
    if !(ser > 0.0 && ser < 1.0) {
        return Err(Error::Integrity {
            value: ser,
            detail: format!(
                "{}-{} error rate must lie in (0, 1)",
                spec.order,
                spec.scheme.name()
            ),
        });
    }
    Ok(SerValue {
        ser,
        quad_error,
        evaluations,
        below_floor: ser < NUMERICAL_FLOOR,
    })
}

/// One sweep point; failures are kept in `error` rather than aborting.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SerPoint {
    pub gbar_db: f64,
    pub ser: Option<f64>,
    pub quad_error: Option<f64>,
    pub evaluations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SerCurve {
    pub schema: &'static str,
    /// Model with the first sweep point's mean SNR.
    pub model: ModelRecord,
    pub spec: ModulationSpec,
    pub strategy: MgfStrategy,
    pub points: Vec<SerPoint>,
}

impl SerCurve {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("gbar_db,ser,strategy,quad_error\n");
        for p in &self.points {
            let ser = p.ser.map(|v| format!("{v:?}")).unwrap_or_default();
            let qe = p.quad_error.map(|v| format!("{v:?}")).unwrap_or_default();
            out.push_str(&format!("{:?},{},{},{}\n", p.gbar_db, ser, self.strategy, qe));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("curve serialises")
    }

    /// Successful (γ̄ dB, SER) pairs.
    pub fn values(&self) -> Vec<(f64, f64)> {
        self.points.iter().filter_map(|p| p.ser.map(|s| (p.gbar_db, s))).collect()
    }
}

/// Sweeps the mean SNR of `template` over `gbar_db` (strictly increasing).
/// Points run in parallel on the current rayon pool; the output keeps the
/// input order.
pub fn aser_sweep(
    template: &FadingModel,
    gbar_db: &[f64],
    spec: &ModulationSpec,
    strategy: MgfStrategy,
    cache: &FitCache,
) -> Result<SerCurve> {
    if gbar_db.is_empty() {
        return Err(Error::Config("sweep grid is empty".into()));
    }
    if gbar_db.windows(2).any(|w| !(w[1] > w[0])) || gbar_db.iter().any(|x| !x.is_finite()) {
        return Err(Error::Config("sweep grid must be finite and strictly increasing".into()));
    }
    template.with_gbar_db(gbar_db[0]).checked()?;
    let resolved = strategy.resolve(template.family())?;
    // fetch the fit once, outside the parallel section
    if resolved == MgfStrategy::Approx {
        cache.get_or_fit(template.alpha_bar())?;
    }
    let points = gbar_db
        .par_iter()
        .map(|&db| {
            let model = template.with_gbar_db(db);
            match aser_with(&model, spec, resolved, cache) {
                Ok(v) => SerPoint {
                    gbar_db: db,
                    ser: Some(v.ser),
                    quad_error: Some(v.quad_error),
                    evaluations: v.evaluations,
                    warning: v.below_floor.then(|| "below numerical floor".to_string()),
                    error: None,
                },
                Err(e) => SerPoint {
                    gbar_db: db,
                    ser: None,
                    quad_error: None,
                    evaluations: 0,
                    warning: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    Ok(SerCurve {
        schema: SCHEMA,
        model: template.with_gbar_db(gbar_db[0]).into(),
        spec: spec.clone(),
        strategy: resolved,
        points,
    })
}

/// Convenience: dB grid `start, start+step, …` up to `stop` inclusive.
pub fn db_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step.is_finite() && start.is_finite() && stop.is_finite()) {
        return Err(Error::Config(format!("sweep step {step} must be finite and > 0")));
    }
    if stop < start {
        return Err(Error::Config(format!("sweep stop {stop} is below start {start}")));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| start + step * i as f64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_rows() {
        let s = modulation_spec(Scheme::Mpsk, 2).unwrap();
        assert_eq!(s.n(), 1);
        assert!((s.terms[0].prefactor - 1.0 / PI).abs() < 1e-16);
        assert_eq!((s.lambda, s.v), (-0.5, 0.0));
        assert!((s.phi - 1.0).abs() < 1e-15 && (s.terms[0].theta - PI / 2.0).abs() < 1e-15);

        let q = modulation_spec(Scheme::Mqam, 16).unwrap();
        assert!((q.phi - 0.1).abs() < 1e-15);
        assert!((q.terms[0].prefactor - 3.0 / PI).abs() < 1e-15);
        assert!((q.terms[1].prefactor + 2.25 / PI).abs() < 1e-15);

        let p = modulation_spec(Scheme::Mpam, 4).unwrap();
        assert!((p.terms[0].prefactor - 1.5 / PI).abs() < 1e-15);
        assert!((p.phi - 0.2).abs() < 1e-15);

        assert_eq!(modulation_spec(Scheme::Mdpsk, 4).unwrap().verification, Verification::Pending);
        assert!(modulation_spec(Scheme::Mqam, 8).is_err());
        assert!(modulation_spec(Scheme::Mpsk, 1).is_err());
    }

    #[test]
    fn reference_values() {
        assert!((rayleigh_bpsk_reference(1.0) - 0.5 * (1.0 - 0.5f64.sqrt())).abs() < 1e-16);
        assert!((rayleigh_bpsk_reference(10.0) - 0.5 * (1.0 - (10.0f64 / 11.0).sqrt())).abs() < 1e-15);
        assert!(rayleigh_bpsk_reference(1e300) < 1e-300);
    }

    #[test]
    fn rayleigh_bpsk_exact() {
        let spec = modulation_spec(Scheme::Mpsk, 2).unwrap();
        let r = FadingModel::rayleigh(10.0).unwrap();
        let v = aser(&r, &spec, MgfStrategy::Numeric).unwrap();
        assert!(((v - rayleigh_bpsk_reference(10.0)) / v).abs() < 1e-6);
    }

    #[test]
    fn grid_validation() {
        assert_eq!(db_grid(-5.0, 30.0, 5.0).unwrap().len(), 8);
        assert!(db_grid(0.0, 1.0, 0.0).is_err());
    }
}
