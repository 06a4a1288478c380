//! Four-term exponential-sum approximation e^{−z^{1/ᾱ}} ≈ Σ aᵢ e^{−Bᵢ z}.
//!
//! The fit minimises a combined least-squares objective. One block is the
//! pointwise residual on a log-spaced grid. The other is the relative error
//! of the damped Mellin transforms
//!
//!   ∫₀^∞ w^{q−1} e^{−λw} (Σ aᵢ e^{−Bᵢw}) dw = Σ aᵢ Γ(q) (λ+Bᵢ)^{−q},
//!
//! which is exactly the relative error the sum induces in the approximate
//! MGFs (q plays the role of the density's power exponent, λ the ratio of
//! the exponential rate to the MGF argument). A small pointwise weight
//! gives the best MGFs; it is raised step by step until the pointwise
//! sup error also meets the gate, if any weight achieves that.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{SMatrix, SVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::specfun::{integrate_semi_infinite_with, lgamma, QuadOptions, SemiInfiniteOptions};

/// Pointwise sup-error gate on the fitting grid.
pub const QUALITY_GATE: f64 = 5e-3;
/// Default multi-start seed, recorded in the fit store.
pub const DEFAULT_SEED: u64 = 0x00fa_d1e5;
pub const STARTS: usize = 16;

const MELLIN_Q: [f64; 9] = [0.5, 0.75, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0];
const MELLIN_LAMBDA_DECADES: (f64, f64, usize) = (-6.0, 4.0, 21);
const POINTWISE_WEIGHTS: [f64; 5] = [0.1, 0.3, 1.0, 3.0, 10.0];
const NP: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub z_min: f64,
    pub z_max: f64,
    pub points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            z_min: 1e-4,
            z_max: 50.0,
            points: 400,
        }
    }
}

impl GridSpec {
    pub fn nodes(&self) -> Vec<f64> {
        let (l0, l1) = (self.z_min.ln(), self.z_max.ln());
        let n = self.points.max(2);
        (0..n)
            .map(|i| (l0 + (l1 - l0) * i as f64 / (n - 1) as f64).exp())
            .collect()
    }

    /// The same range sampled `factor` times more densely.
    pub fn denser(&self, factor: usize) -> GridSpec {
        GridSpec {
            points: self.points * factor,
            ..*self
        }
    }
}

/// A fitted sum Σ aᵢ e^{−Bᵢ z} with Σ aᵢ = 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpSumFit {
    pub alpha_bar: f64,
    pub a: [f64; 4],
    pub b: [f64; 4],
    /// Sup-norm residual over the fitting grid.
    pub max_abs_err: f64,
    pub grid: GridSpec,
}

impl ExpSumFit {
    /// The exact representation for ᾱ = 1.
    pub fn identity(grid: GridSpec) -> ExpSumFit {
        ExpSumFit {
            alpha_bar: 1.0,
            a: [1.0, 0.0, 0.0, 0.0],
            b: [1.0, 2.0, 4.0, 8.0],
            max_abs_err: 0.0,
            grid,
        }
    }

    pub fn eval(&self, z: f64) -> f64 {
        eval_exp_sum(self, z)
    }

    /// Sup |Σ aᵢe^{−Bᵢz} − e^{−z^{1/ᾱ}}| over `grid`.
    pub fn sup_error_on(&self, grid: &GridSpec) -> f64 {
        grid.nodes()
            .into_iter()
            .map(|z| (eval_exp_sum(self, z) - target(self.alpha_bar, z)).abs())
            .fold(0.0, f64::max)
    }

    /// Largest relative error of the damped Mellin transforms over the
    /// objective's (q, λ) table.
    pub fn max_mellin_rel_err(&self) -> f64 {
        let table = MellinTable::new(self.alpha_bar);
        table
            .entries
            .iter()
            .map(|e| (mellin_sum(&self.a, &self.b, e) / e.target - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Σ aᵢ e^{−Bᵢ z}.
pub fn eval_exp_sum(fit: &ExpSumFit, z: f64) -> f64 {
    fit.a.iter().zip(&fit.b).map(|(a, b)| a * (-b * z).exp()).sum()
}

fn target(alpha_bar: f64, z: f64) -> f64 {
    (-z.powf(1.0 / alpha_bar)).exp()
}

struct MellinEntry {
    q: f64,
    lambda: f64,
    ln_gamma_q: f64,
    target: f64,
}

struct MellinTable {
    entries: Vec<MellinEntry>,
}

impl MellinTable {
    fn new(alpha_bar: f64) -> Self {
        let (l0, l1, n) = MELLIN_LAMBDA_DECADES;
        let mut entries = Vec::with_capacity(MELLIN_Q.len() * n);
        for &q in &MELLIN_Q {
            for i in 0..n {
                let lambda = 10f64.powf(l0 + (l1 - l0) * i as f64 / (n - 1) as f64);
                entries.push(MellinEntry {
                    q,
                    lambda,
                    ln_gamma_q: lgamma(q),
                    target: damped_mellin_target(alpha_bar, q, lambda),
                });
            }
        }
        Self { entries }
    }
}

/// ∫₀^∞ w^{q−1} e^{−λw} e^{−w^{1/ᾱ}} dw, written with w = u^ᾱ as
/// ᾱ ∫₀^∞ u^{ᾱq−1} e^{−λu^ᾱ − u} du.
fn damped_mellin_target(ab: f64, q: f64, lambda: f64) -> f64 {
    let opts = SemiInfiniteOptions {
        scale: if lambda > 1.0 { lambda.powf(-1.0 / ab) } else { 1.0 },
        leading_power: ab * q,
        quad: QuadOptions {
            rel_tol: 1e-12,
            abs_tol: 0.0,
            ..Default::default()
        },
    };
    let f = |u: f64| ab * ((ab * q - 1.0) * u.ln() - lambda * u.powf(ab) - u).exp();
    match integrate_semi_infinite_with(f, &opts) {
        Ok(r) => r.value,
        Err(Error::ToleranceNotMet { partial }) => partial.value,
        Err(e) => panic!("damped Mellin target: {e}"),
    }
}

fn mellin_sum(a: &[f64; 4], b: &[f64; 4], e: &MellinEntry) -> f64 {
    a.iter()
        .zip(b)
        .map(|(ai, bi)| ai * (e.ln_gamma_q - e.q * (e.lambda + bi).ln()).exp())
        .sum()
}

type Params = SVector<f64, NP>;

fn unpack(p: &Params) -> ([f64; 4], [f64; 4]) {
    let a = [p[0], p[1], p[2], 1.0 - p[0] - p[1] - p[2]];
    let b = [p[3].exp(), p[4].exp(), p[5].exp(), p[6].exp()];
    (a, b)
}

struct Problem<'a> {
    z: &'a [f64],
    t: &'a [f64],
    table: &'a MellinTable,
    wp: f64,
}

impl Problem<'_> {
    fn len(&self) -> usize {
        self.z.len() + self.table.entries.len()
    }

    /// Residuals and, when `jac` is given, their Jacobian rows.
    fn eval(&self, p: &Params, r: &mut [f64], mut jac: Option<&mut [[f64; NP]]>) {
        let (a, b) = unpack(p);
        let mut row = 0;
        for (&z, &t) in self.z.iter().zip(self.t) {
            let e: [f64; 4] = std::array::from_fn(|i| (-b[i] * z).exp());
            r[row] = self.wp * ((0..4).map(|i| a[i] * e[i]).sum::<f64>() - t);
            if let Some(j) = jac.as_deref_mut() {
                for k in 0..3 {
                    j[row][k] = self.wp * (e[k] - e[3]);
                }
                for i in 0..4 {
                    j[row][3 + i] = -self.wp * a[i] * b[i] * z * e[i];
                }
            }
            row += 1;
        }
        for en in &self.table.entries {
            let g: [f64; 4] = std::array::from_fn(|i| (en.ln_gamma_q - en.q * (en.lambda + b[i]).ln()).exp());
            r[row] = (0..4).map(|i| a[i] * g[i]).sum::<f64>() / en.target - 1.0;
            if let Some(j) = jac.as_deref_mut() {
                for k in 0..3 {
                    j[row][k] = (g[k] - g[3]) / en.target;
                }
                for i in 0..4 {
                    j[row][3 + i] = -a[i] * en.q * g[i] * b[i] / (en.lambda + b[i]) / en.target;
                }
            }
            row += 1;
        }
    }
}

fn cost(r: &[f64]) -> f64 {
    0.5 * r.iter().map(|x| x * x).sum::<f64>()
}

/// Levenberg–Marquardt with Marquardt diagonal scaling.
fn levenberg_marquardt(prob: &Problem, mut p: Params) -> Option<(Params, f64)> {
    let n = prob.len();
    let mut r = vec![0.0; n];
    let mut jac = vec![[0.0; NP]; n];
    let mut trial = vec![0.0; n];
    prob.eval(&p, &mut r, Some(&mut jac));
    let mut c = cost(&r);
    if !c.is_finite() {
        return None;
    }
    let mut damping = 1e-3;
    for _ in 0..600 {
        let mut jtj = SMatrix::<f64, NP, NP>::zeros();
        let mut g = Params::zeros();
        for (row, ri) in jac.iter().zip(&r) {
            for i in 0..NP {
                g[i] += row[i] * ri;
                for k in 0..NP {
                    jtj[(i, k)] += row[i] * row[k];
                }
            }
        }
        let mut improved = false;
        while damping < 1e12 {
            let mut m = jtj;
            for i in 0..NP {
                m[(i, i)] += damping * jtj[(i, i)].max(1e-12);
            }
            let Some(step) = m.lu().solve(&(-g)) else {
                damping *= 4.0;
                continue;
            };
            let cand = p + step;
            if cand.iter().skip(3).any(|x| x.abs() > 14.0) || !cand.iter().all(|x| x.is_finite()) {
                damping *= 4.0;
                continue;
            }
            prob.eval(&cand, &mut trial, None);
            let ct = cost(&trial);
            if ct.is_finite() && ct < c {
                let small = (c - ct) <= 1e-13 * c && step.norm() <= 1e-10 * (1.0 + p.norm());
                p = cand;
                c = ct;
                damping = (damping / 3.0).max(1e-12);
                improved = true;
                prob.eval(&p, &mut r, Some(&mut jac));
                if small {
                    return Some((p, c));
                }
                break;
            }
            damping *= 4.0;
        }
        if !improved {
            break;
        }
    }
    Some((p, c))
}

fn distinct(b: &[f64; 4]) -> bool {
    for i in 0..4 {
        for k in 0..i {
            if (b[i] - b[k]).abs() <= 1e-6 * b[i].max(b[k]) {
                return false;
            }
        }
    }
    true
}

/// Options for a single fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub grid: GridSpec,
    /// Pointwise sup-error gate; `f64::INFINITY` disables it.
    pub gate: f64,
    pub seed: u64,
    pub starts: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            grid: GridSpec::default(),
            gate: QUALITY_GATE,
            seed: DEFAULT_SEED,
            starts: STARTS,
        }
    }
}

/// Fits the four-term sum for `alpha_bar` with default options.
pub fn fit_exp_sum(alpha_bar: f64, grid: GridSpec) -> Result<ExpSumFit> {
    fit_exp_sum_with(alpha_bar, &FitOptions { grid, ..Default::default() })
}

pub fn fit_exp_sum_with(alpha_bar: f64, opts: &FitOptions) -> Result<ExpSumFit> {
    if !(0.25..=10.0).contains(&alpha_bar) {
        return Err(domain("fit_exp_sum", format!("alpha_bar = {alpha_bar} must lie in [0.25, 10]")));
    }
    let g = opts.grid;
    if !(g.z_min > 0.0 && g.z_max > g.z_min && g.points >= 8 && g.z_max.is_finite()) {
        return Err(domain("fit_exp_sum", "grid needs 0 < z_min < z_max and at least 8 points"));
    }
    let fit = if alpha_bar == 1.0 {
        let mut f = ExpSumFit::identity(g);
        f.max_abs_err = f.sup_error_on(&g);
        f
    } else {
        optimise(alpha_bar, opts)?
    };
    if fit.max_abs_err > opts.gate {
        return Err(Error::FitQuality {
            fit: Box::new(fit),
            gate: opts.gate,
        });
    }
    Ok(fit)
}

fn optimise(alpha_bar: f64, opts: &FitOptions) -> Result<ExpSumFit> {
    let z = opts.grid.nodes();
    let t: Vec<f64> = z.iter().map(|&z| target(alpha_bar, z)).collect();
    let table = MellinTable::new(alpha_bar);

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let starts: Vec<Params> = (0..opts.starts.max(1))
        .map(|k| {
            let mut lb: [f64; 4] = if k == 0 {
                [-2.0, -2.0 / 3.0, 2.0 / 3.0, 2.0].map(|d: f64| d * std::f64::consts::LN_10)
            } else {
                std::array::from_fn(|i| {
                    let base = -3.0 + 6.0 * (i as f64 + 0.5) / 4.0;
                    (base + rng.gen_range(-0.75..0.75)) * std::f64::consts::LN_10
                })
            };
            lb.sort_by(f64::total_cmp);
            Params::from_column_slice(&[0.25, 0.25, 0.25, lb[0], lb[1], lb[2], lb[3]])
        })
        .collect();

    let mut fallback: Option<(f64, ExpSumFit)> = None;
    for &wp in &POINTWISE_WEIGHTS {
        let prob = Problem {
            z: &z,
            t: &t,
            table: &table,
            wp,
        };
        let mut best: Option<(f64, Params)> = None;
        for p0 in &starts {
            let Some((p, c)) = levenberg_marquardt(&prob, *p0) else { continue };
            let (_, b) = unpack(&p);
            if !distinct(&b) {
                continue;
            }
            if best.as_ref().map_or(true, |(bc, _)| c < *bc) {
                best = Some((c, p));
            }
        }
        let Some((_, p)) = best else { continue };
        let (a, b) = unpack(&p);
        let mut order = [0usize, 1, 2, 3];
        order.sort_by(|&i, &k| b[i].total_cmp(&b[k]));
        let mut fit = ExpSumFit {
            alpha_bar,
            a: order.map(|i| a[i]),
            b: order.map(|i| b[i]),
            max_abs_err: 0.0,
            grid: opts.grid,
        };
        // a₄ absorbs the rounding so that Σaᵢ = 1 holds in floating point
        fit.a[3] = 1.0 - fit.a[0] - fit.a[1] - fit.a[2];
        fit.max_abs_err = fit.sup_error_on(&opts.grid);
        if fit.max_abs_err <= QUALITY_GATE {
            return Ok(fit);
        }
        if fallback.is_none() {
            let mel = fit.max_mellin_rel_err();
            fallback = Some((mel, fit));
        }
    }
    fallback.map(|(_, f)| f).ok_or(Error::FitNonConvergence { alpha_bar })
}

// --- cache and fit store --------------------------------------------------

type Cell = Arc<OnceLock<Result<ExpSumFit>>>;

/// Process-wide fit cache with single-flight semantics: concurrent requests
/// for the same ᾱ share one optimisation, other keys are never blocked.
pub struct FitCache {
    cells: Mutex<Vec<(f64, Cell)>>,
    runs: AtomicU64,
    store: Option<PathBuf>,
    store_lock: Mutex<()>,
    options: FitOptions,
}

impl Default for FitCache {
    fn default() -> Self {
        Self::new(FitOptions::default())
    }
}

impl FitCache {
    pub fn new(options: FitOptions) -> Self {
        Self {
            cells: Mutex::new(Vec::new()),
            runs: AtomicU64::new(0),
            store: None,
            store_lock: Mutex::new(()),
            options,
        }
    }

    /// A cache backed by a fit-store file; existing records are loaded.
    pub fn with_store(path: impl Into<PathBuf>, options: FitOptions) -> Result<Self> {
        let path = path.into();
        let cache = Self {
            store: Some(path.clone()),
            ..Self::new(options)
        };
        if path.exists() {
            let store = FitStore::read(&path)?;
            let mut cells = cache.cells.lock().unwrap();
            for fit in store.fits {
                let key = fit.alpha_bar;
                let cell: Cell = Arc::new(OnceLock::new());
                let _ = cell.set(gate_result(fit, options.gate));
                cells.push((key, cell));
            }
        }
        Ok(cache)
    }

    pub fn global() -> &'static FitCache {
        static GLOBAL: OnceLock<FitCache> = OnceLock::new();
        GLOBAL.get_or_init(FitCache::default)
    }

    pub fn options(&self) -> &FitOptions {
        &self.options
    }

    /// Number of optimisations this cache has run.
    pub fn optimizer_runs(&self) -> u64 {
        self.runs.load(Ordering::SeqCst)
    }

    /// Whether a result for `alpha_bar` is already present.
    pub fn contains(&self, alpha_bar: f64) -> bool {
        alpha_bar == 1.0
            || self
                .cells
                .lock()
                .unwrap()
                .iter()
                .any(|(k, c)| (k - alpha_bar).abs() <= 1e-12 && c.get().is_some())
    }

    pub fn get_or_fit(&self, alpha_bar: f64) -> Result<ExpSumFit> {
        if alpha_bar == 1.0 {
            return fit_exp_sum_with(1.0, &self.options);
        }
        let cell = {
            let mut cells = self.cells.lock().unwrap();
            match cells.iter().find(|(k, _)| (k - alpha_bar).abs() <= 1e-12) {
                Some((_, c)) => c.clone(),
                None => {
                    let c: Cell = Arc::new(OnceLock::new());
                    cells.push((alpha_bar, c.clone()));
                    c
                }
            }
        };
        let mut fresh = false;
        let out = cell
            .get_or_init(|| {
                fresh = true;
                self.runs.fetch_add(1, Ordering::SeqCst);
                fit_exp_sum_with(alpha_bar, &self.options)
            })
            .clone();
        if fresh {
            self.persist()?;
        }
        out
    }

    fn persist(&self) -> Result<()> {
        let Some(path) = &self.store else { return Ok(()) };
        let _guard = self.store_lock.lock().unwrap();
        let mut fits: Vec<ExpSumFit> = self
            .cells
            .lock()
            .unwrap()
            .iter()
            .filter_map(|(_, c)| match c.get()? {
                Ok(f) => Some(f.clone()),
                Err(Error::FitQuality { fit, .. }) => Some((**fit).clone()),
                Err(_) => None,
            })
            .collect();
        fits.sort_by(|a, b| a.alpha_bar.total_cmp(&b.alpha_bar));
        FitStore {
            seed: self.options.seed,
            fits,
        }
        .write(path)
    }
}

fn gate_result(fit: ExpSumFit, gate: f64) -> Result<ExpSumFit> {
    if fit.max_abs_err > gate {
        Err(Error::FitQuality {
            fit: Box::new(fit),
            gate,
        })
    } else {
        Ok(fit)
    }
}

/// The persistent text store: a versioned header, the multi-start seed as
/// a comment, then one comma-separated record per ᾱ.
#[derive(Debug, Clone, PartialEq)]
pub struct FitStore {
    pub seed: u64,
    pub fits: Vec<ExpSumFit>,
}

pub const STORE_HEADER: &str = "expfit-v1";

impl FitStore {
    pub fn to_text(&self) -> String {
        let mut s = format!("{STORE_HEADER}\n# seed={}\n", self.seed);
        for f in &self.fits {
            let nums: Vec<String> = [f.alpha_bar, f.grid.z_min, f.grid.z_max]
                .iter()
                .map(|x| format!("{x:?}"))
                .chain(std::iter::once(f.grid.points.to_string()))
                .chain(f.a.iter().chain(&f.b).map(|x| format!("{x:?}")))
                .chain(std::iter::once(format!("{:?}", f.max_abs_err)))
                .collect();
            let _ = writeln!(s, "{}", nums.join(","));
        }
        s
    }

    pub fn parse(text: &str) -> Result<FitStore> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some(STORE_HEADER) {
            return Err(Error::FitStore(format!("missing `{STORE_HEADER}` header")));
        }
        let mut seed = DEFAULT_SEED;
        let mut fits = Vec::new();
        for (n, line) in lines.enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(c) = line.strip_prefix('#') {
                if let Some(v) = c.trim().strip_prefix("seed=") {
                    seed = v
                        .parse()
                        .map_err(|_| Error::FitStore(format!("line {}: bad seed `{v}`", n + 2)))?;
                }
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() != 13 {
                return Err(Error::FitStore(format!("line {}: expected 13 fields, found {}", n + 2, cols.len())));
            }
            let num = |i: usize| -> Result<f64> {
                cols[i]
                    .parse()
                    .map_err(|_| Error::FitStore(format!("line {}: field {} is not a number", n + 2, i + 1)))
            };
            let points = cols[3]
                .parse()
                .map_err(|_| Error::FitStore(format!("line {}: points is not an integer", n + 2)))?;
            fits.push(ExpSumFit {
                alpha_bar: num(0)?,
                grid: GridSpec {
                    z_min: num(1)?,
                    z_max: num(2)?,
                    points,
                },
                a: [num(4)?, num(5)?, num(6)?, num(7)?],
                b: [num(8)?, num(9)?, num(10)?, num(11)?],
                max_abs_err: num(12)?,
            });
        }
        Ok(FitStore { seed, fits })
    }

    pub fn read(path: &Path) -> Result<FitStore> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, self.to_text())?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_case_is_exact() {
        let f = fit_exp_sum(1.0, GridSpec::default()).unwrap();
        assert!(f.max_abs_err <= 1e-12);
        assert_eq!(eval_exp_sum(&f, 0.0), 1.0);
        assert!((eval_exp_sum(&f, 3.0) - (-3f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn coefficients_sum_to_one() {
        let opts = FitOptions {
            gate: f64::INFINITY,
            starts: 4,
            ..Default::default()
        };
        let f = fit_exp_sum_with(0.75, &opts).unwrap();
        assert_eq!(f.a.iter().sum::<f64>(), 1.0);
        assert!(distinct(&f.b));
        assert!(f.b.iter().all(|&b| b > 0.0));
    }

    #[test]
    fn store_round_trip_is_exact() {
        let fit = ExpSumFit {
            alpha_bar: 1.5,
            a: [0.1, 0.2, 0.3 + 1e-17, 0.4],
            b: [0.01, 0.3, 7.0 / 3.0, 90.0],
            max_abs_err: 1.234_567_890_123_456_7e-3,
            grid: GridSpec::default(),
        };
        let store = FitStore { seed: 7, fits: vec![fit] };
        let back = FitStore::parse(&store.to_text()).unwrap();
        assert_eq!(back, store);
    }

    #[test]
    fn store_rejects_garbage() {
        assert!(FitStore::parse("nope\n").is_err());
        assert!(FitStore::parse("expfit-v1\n1,2,3\n").is_err());
    }

    #[test]
    fn domain_checks() {
        assert!(fit_exp_sum(0.1, GridSpec::default()).is_err());
        let bad = GridSpec {
            z_min: 1.0,
            z_max: 0.5,
            points: 10,
        };
        assert!(fit_exp_sum(2.0, bad).is_err());
    }
}
