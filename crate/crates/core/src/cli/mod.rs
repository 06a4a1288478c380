//! Command-line front end. The `fadingmgf` binary is a thin wrapper around
//! [`run`].

mod presets;
pub mod validate;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::errorrates::{aser_sweep, db_grid, modulation_spec, Scheme, SerCurve, SCHEMA};
use crate::expfit::{ExpSumFit, FitCache, FitOptions};
use crate::mgf::{MgfEvaluator, MgfStrategy};
use crate::models::{Exponent, FadingModel, ModelRecord};

pub use presets::{preset, Preset, PresetCurve, PresetDef};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_FIT: i32 = 3;

/// Fit-store used by `fit` when none is given.
pub const DEFAULT_FIT_STORE: &str = "fadingmgf-fits.txt";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Pdf,
    Mgf,
    Fit,
    Ser,
    Sweep,
    Validate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "fadingmgf", version, about = "Fading-channel densities, MGFs and symbol error rates")]
pub struct Args {
    #[arg(value_enum)]
    pub command: Command,
    /// JSON run configuration; flags override its values
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// e.g. family=alpha-mu,alpha=3,mu=2,gbar-db=10
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub scheme: Option<String>,
    #[arg(long)]
    pub order: Option<u32>,
    /// auto, exact, approx or numeric; `mgf` takes a comma-separated list
    #[arg(long)]
    pub strategy: Option<String>,
    /// start:stop:step in dB
    #[arg(long, allow_hyphen_values = true)]
    pub sweep: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub fit_store: Option<PathBuf>,
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Comma-separated MGF arguments for `mgf`
    #[arg(long, allow_hyphen_values = true)]
    pub s_values: Option<String>,
    /// Comma-separated stretch exponents for `fit`
    #[arg(long)]
    pub alpha_bar: Option<String>,
    /// slot=delta exponent perturbation for `validate` (repeatable)
    #[arg(long, allow_hyphen_values = true)]
    pub mutate: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    pub start_db: f64,
    pub stop_db: f64,
    pub step_db: f64,
}

impl SweepGrid {
    pub fn points(&self) -> Result<Vec<f64>> {
        db_grid(self.start_db, self.stop_db, self.step_db)
    }
}

impl std::str::FromStr for SweepGrid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::Config(format!("sweep: expected start:stop:step, got `{s}`"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let num = |p: &str| p.trim().parse::<f64>().map_err(|_| bad());
        let g = SweepGrid {
            start_db: num(parts[0])?,
            stop_db: num(parts[1])?,
            step_db: num(parts[2])?,
        };
        g.points()?;
        Ok(g)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Overrides the exponential-fit quality gate.
    pub fit_gate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MutationRecord {
    pub slot: Exponent,
    pub delta: f64,
}

/// Everything a run needs; the JSON config file has this shape.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub model: Option<ModelRecord>,
    pub scheme: Option<Scheme>,
    pub order: Option<u32>,
    pub strategy: Vec<MgfStrategy>,
    pub sweep: Option<SweepGrid>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub fit_store: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub preset: Option<Preset>,
    pub s_values: Vec<f64>,
    pub alpha_bars: Vec<f64>,
    pub tolerances: Tolerances,
    pub mutations: Vec<MutationRecord>,
}

fn parse_list<T: std::str::FromStr>(what: &str, s: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            p.parse::<T>()
                .map_err(|_| Error::Config(format!("{what}: cannot parse `{p}`")))
        })
        .collect()
}

impl RunConfig {
    /// Config file (if any) overlaid with the flags.
    pub fn from_args(args: &Args) -> Result<RunConfig> {
        let mut c = match &args.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
                serde_json::from_str::<RunConfig>(&text)
                    .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
            }
            None => RunConfig::default(),
        };
        c.command = Some(args.command);
        if let Some(m) = &args.model {
            c.model = Some(m.parse()?);
        }
        if let Some(s) = &args.scheme {
            c.scheme = Some(s.parse()?);
        }
        if args.order.is_some() {
            c.order = args.order;
        }
        if let Some(s) = &args.strategy {
            c.strategy = s
                .split(',')
                .map(str::trim)
                .filter(|p| !p.is_empty())
                .map(str::parse)
                .collect::<Result<_>>()?;
        }
        if let Some(s) = &args.sweep {
            c.sweep = Some(s.parse()?);
        }
        if args.out.is_some() {
            c.out = args.out.clone();
        }
        if args.format.is_some() {
            c.format = args.format;
        }
        if args.fit_store.is_some() {
            c.fit_store = args.fit_store.clone();
        }
        if args.jobs.is_some() {
            c.jobs = args.jobs;
        }
        if args.preset.is_some() {
            c.preset = args.preset;
        }
        if let Some(s) = &args.s_values {
            c.s_values = parse_list("s-values", s)?;
        }
        if let Some(s) = &args.alpha_bar {
            c.alpha_bars = parse_list("alpha-bar", s)?;
        }
        for m in &args.mutate {
            let (slot, delta) = m
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("mutate: expected slot=delta, got `{m}`")))?;
            c.mutations.push(MutationRecord {
                slot: slot.parse()?,
                delta: delta
                    .trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("mutate: bad delta `{delta}`")))?,
            });
        }
        c.check()?;
        Ok(c)
    }

    fn check(&self) -> Result<()> {
        if let Some(g) = &self.sweep {
            g.points()?;
        }
        if self.jobs == Some(0) {
            return Err(Error::Config("jobs must be >= 1".into()));
        }
        if let Some(g) = self.tolerances.fit_gate {
            if !(g > 0.0) {
                return Err(Error::Config(format!("tolerances.fit_gate = {g} must be > 0")));
            }
        }
        if self.s_values.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
            return Err(Error::Config("s-values must be finite and >= 0".into()));
        }
        Ok(())
    }

    fn model(&self) -> Result<FadingModel> {
        let rec = self
            .model
            .clone()
            .ok_or_else(|| Error::Config("a model is required (--model family=…,gbar-db=…)".into()))?;
        let m = FadingModel::try_from(rec)?;
        m.validate().map_err(Error::InvalidModel)?;
        Ok(m)
    }

    fn single_strategy(&self) -> Result<MgfStrategy> {
        match self.strategy.as_slice() {
            [] => Ok(MgfStrategy::Auto),
            [s] => Ok(*s),
            _ => Err(Error::Config("this command takes a single strategy".into())),
        }
    }

    fn fit_options(&self) -> FitOptions {
        let mut o = FitOptions::default();
        if let Some(g) = self.tolerances.fit_gate {
            o.gate = g;
        }
        o
    }

    fn cache(&self, default_store: Option<&Path>) -> Result<FitCache> {
        match self.fit_store.as_deref().or(default_store) {
            Some(p) => FitCache::with_store(p, self.fit_options()),
            None => Ok(FitCache::new(self.fit_options())),
        }
    }

    fn format(&self) -> Format {
        self.format.unwrap_or(Format::Csv)
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::FitQuality { .. } => EXIT_FIT,
        _ => EXIT_USAGE,
    }
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(argv, &mut std::io::stdout(), &mut std::io::stderr())
}

pub fn run_with<I, T>(argv: I, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    let outcome = RunConfig::from_args(&args).and_then(|cfg| {
        let threads = cfg.jobs.unwrap_or(0);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        pool.install(|| execute(&cfg, out, err))
    });
    match outcome {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn emit(cfg: &RunConfig, text: &str, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> Result<()> {
    match &cfg.out {
        Some(path) => {
            fs::write(path, text)?;
            let _ = writeln!(err, "wrote {}", path.display());
        }
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn execute(cfg: &RunConfig, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> Result<i32> {
    match cfg.command.expect("command is always set") {
        Command::Pdf => cmd_pdf(cfg, out, err),
        Command::Mgf => cmd_mgf(cfg, out, err),
        Command::Fit => cmd_fit(cfg, out, err),
        Command::Ser | Command::Sweep => cmd_ser(cfg, out, err),
        Command::Validate => cmd_validate(cfg, out, err),
    }
}

/// Column table shared by `pdf` and `mgf`.
struct Table {
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl Table {
    fn render(&self, format: Format, command: &str, model: &FadingModel) -> String {
        match format {
            Format::Csv => {
                let mut s = self.columns.join(",");
                s.push('\n');
                for r in &self.rows {
                    let cells: Vec<String> = r.iter().map(|v| format!("{v:?}")).collect();
                    s.push_str(&cells.join(","));
                    s.push('\n');
                }
                s
            }
            Format::Json => {
                let v = json!({
                    "schema": SCHEMA,
                    "command": command,
                    "model": ModelRecord::from(*model),
                    "columns": self.columns,
                    "rows": self.rows,
                });
                let mut s = serde_json::to_string_pretty(&v).expect("table serialises");
                s.push('\n');
                s
            }
        }
    }
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

fn cmd_pdf(cfg: &RunConfig, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> Result<i32> {
    let model = cfg.model()?;
    let gammas = match &cfg.sweep {
        Some(g) => g.points()?.into_iter().map(|db| 10f64.powf(db / 10.0)).collect(),
        None => log_grid(1e-3 * model.gbar(), 10.0 * model.gbar(), 200),
    };
    let cp = model.compact_params()?;
    let rows = gammas
        .iter()
        .map(|&g| Ok(vec![g, cp.pdf(g)?]))
        .collect::<Result<Vec<_>>>()?;
    let table = Table {
        columns: vec!["gamma".into(), "pdf".into()],
        rows,
    };
    emit(cfg, &table.render(cfg.format(), "pdf", &model), out, err)?;
    Ok(EXIT_OK)
}

fn cmd_mgf(cfg: &RunConfig, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> Result<i32> {
    let model = cfg.model()?;
    let cache = cfg.cache(None)?;
    let requested = if cfg.strategy.is_empty() {
        vec![MgfStrategy::Auto]
    } else {
        cfg.strategy.clone()
    };
    let mut evaluators: Vec<MgfEvaluator> = Vec::new();
    for s in requested {
        let e = MgfEvaluator::new(&model, s, &cache)?;
        if !evaluators.iter().any(|x| x.strategy() == e.strategy()) {
            evaluators.push(e);
        }
    }
    let s_values = if cfg.s_values.is_empty() {
        log_grid(1e-2, 1e2, 60)
    } else {
        cfg.s_values.clone()
    };
    let numeric = evaluators.iter().position(|e| e.strategy() == MgfStrategy::Numeric);
    let others: Vec<usize> = (0..evaluators.len()).filter(|&i| Some(i) != numeric).collect();

    let mut columns = vec!["s".to_string()];
    columns.extend(evaluators.iter().map(|e| e.strategy().name().to_string()));
    if numeric.is_some() {
        for &i in &others {
            columns.push(if others.len() == 1 {
                "rel_diff_vs_numeric".into()
            } else {
                format!("rel_diff_vs_numeric_{}", evaluators[i].strategy())
            });
        }
    }
    let mut rows = Vec::with_capacity(s_values.len());
    for &s in &s_values {
        let vals = evaluators.iter().map(|e| e.eval(s)).collect::<Result<Vec<f64>>>()?;
        let mut row = vec![s];
        row.extend(&vals);
        if let Some(n) = numeric {
            for &i in &others {
                row.push(((vals[i] - vals[n]) / vals[n]).abs());
            }
        }
        rows.push(row);
    }
    let table = Table { columns, rows };
    emit(cfg, &table.render(cfg.format(), "mgf", &model), out, err)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct FitRow {
    alpha_bar: f64,
    source: &'static str,
    passed: bool,
    max_abs_err: f64,
    a: [f64; 4],
    b: [f64; 4],
}

fn cmd_fit(cfg: &RunConfig, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> Result<i32> {
    let mut alpha_bars = cfg.alpha_bars.clone();
    if alpha_bars.is_empty() {
        if cfg.model.is_some() {
            alpha_bars.push(cfg.model()?.alpha_bar());
        } else {
            return Err(Error::Config("fit needs --alpha-bar or --model".into()));
        }
    }
    let cache = cfg.cache(Some(Path::new(DEFAULT_FIT_STORE)))?;
    let gate = cache.options().gate;
    let mut rows = Vec::new();
    for &ab in &alpha_bars {
        let source = if ab == 1.0 {
            "identity"
        } else if cache.contains(ab) {
            "cached"
        } else {
            "fitted"
        };
        let fit: ExpSumFit = match cache.get_or_fit(ab) {
            Ok(f) => f,
            Err(Error::FitQuality { fit, .. }) => *fit,
            Err(e) => return Err(e),
        };
        rows.push(FitRow {
            alpha_bar: ab,
            source,
            passed: fit.max_abs_err <= gate,
            max_abs_err: fit.max_abs_err,
            a: fit.a,
            b: fit.b,
        });
    }
    let text = match cfg.format() {
        Format::Csv => {
            let mut s = String::from("alpha_bar,source,passed,max_abs_err,a1,a2,a3,a4,b1,b2,b3,b4\n");
            for r in &rows {
                let nums: Vec<String> = r.a.iter().chain(&r.b).map(|v| format!("{v:?}")).collect();
                s.push_str(&format!(
                    "{:?},{},{},{:?},{}\n",
                    r.alpha_bar,
                    r.source,
                    r.passed,
                    r.max_abs_err,
                    nums.join(",")
                ));
            }
            s
        }
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&json!({
                "schema": SCHEMA,
                "command": "fit",
                "gate": gate,
                "seed": cache.options().seed,
                "fits": rows,
            }))
            .expect("fit report serialises");
            s.push('\n');
            s
        }
    };
    emit(cfg, &text, out, err)?;
    let failed: Vec<String> = rows.iter().filter(|r| !r.passed).map(|r| r.alpha_bar.to_string()).collect();
    if failed.is_empty() {
        Ok(EXIT_OK)
    } else {
        let _ = writeln!(err, "error: fit quality gate {gate} missed for alpha_bar = {}", failed.join(", "));
        Ok(EXIT_FIT)
    }
}

fn cmd_ser(cfg: &RunConfig, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> Result<i32> {
    let strategy = cfg.single_strategy()?;
    let scheme = cfg.scheme.unwrap_or(Scheme::Mpsk);
    let order = cfg.order.unwrap_or(2);
    let spec = modulation_spec(scheme, order)?;
    let cache = cfg.cache(None)?;

    if let Some(p) = cfg.preset {
        let def = preset(p);
        let grid = match &cfg.sweep {
            Some(g) => g.points()?,
            None => def.grid.points()?,
        };
        let mut curves = Vec::new();
        for c in &def.curves {
            curves.push((c.label.clone(), aser_sweep(&c.model, &grid, &spec, strategy, &cache)?));
        }
        emit(cfg, &render_preset(&def, &curves, cfg.format()), out, err)?;
        return Ok(EXIT_OK);
    }

    let model = cfg.model()?;
    let grid = match (cfg.command, &cfg.sweep) {
        (Some(Command::Sweep), Some(g)) => g.points()?,
        (Some(Command::Sweep), None) => {
            return Err(Error::Config("sweep needs --sweep start:stop:step or --preset".into()))
        }
        _ => vec![model.gbar_db()],
    };
    let curve = aser_sweep(&model, &grid, &spec, strategy, &cache)?;
    for p in &curve.points {
        if let Some(e) = &p.error {
            let _ = writeln!(err, "warning: {} dB: {e}", p.gbar_db);
        }
    }
    let text = match cfg.format() {
        Format::Csv => curve.to_csv(),
        Format::Json => curve.to_json() + "\n",
    };
    emit(cfg, &text, out, err)?;
    Ok(EXIT_OK)
}

fn render_preset(def: &PresetDef, curves: &[(String, SerCurve)], format: Format) -> String {
    match format {
        Format::Csv => {
            let mut s = format!("# preset {}: {}\n", def.name, def.pinned);
            s.push_str("curve,gbar_db,ser,strategy,quad_error\n");
            for (label, c) in curves {
                for line in c.to_csv().lines().skip(1) {
                    s.push_str(&format!("{label},{line}\n"));
                }
            }
            s
        }
        Format::Json => {
            let list: Vec<_> = curves
                .iter()
                .map(|(label, c)| json!({ "label": label, "curve": c }))
                .collect();
            let mut s = serde_json::to_string_pretty(&json!({
                "schema": SCHEMA,
                "preset": def.name,
                "pinned": def.pinned,
                "curves": list,
            }))
            .expect("preset serialises");
            s.push('\n');
            s
        }
    }
}

fn cmd_validate(cfg: &RunConfig, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> Result<i32> {
    let cache = cfg.cache(None)?;
    let mutations: Vec<(Exponent, f64)> = cfg.mutations.iter().map(|m| (m.slot, m.delta)).collect();
    let report = validate::run_suite(&mutations, &cache);
    let json = serde_json::to_string_pretty(&report).expect("report serialises") + "\n";
    match (&cfg.out, cfg.format) {
        (Some(path), _) => {
            fs::write(path, &json)?;
            out.write_all(report.summary().as_bytes())?;
            let _ = writeln!(err, "wrote {}", path.display());
        }
        (None, Some(Format::Json)) => out.write_all(json.as_bytes())?,
        (None, _) => out.write_all(report.summary().as_bytes())?,
    }
    Ok(if report.passed { EXIT_OK } else { EXIT_VALIDATE })
}
