//! The `ident` command line. [`run`] is the whole program; `main` only
//! wires it to the process.

pub mod report;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use thiserror::Error;

use sde_ident::dsl::{builtin_model, parse_model, ModelSpec};
use sde_ident::elimination::Eliminator;
use sde_ident::ident::{analyze, compare_with_known, known_regimes, known_results, KnownSet};
use sde_ident::moments::{check_applicability, Applicability, MomentModel, MomentSymbol};
use sde_ident::ou::OuSystem;
use sde_ident::sim::{
    default_theta, matched_parameters, simulate, verify_indistinguishable, SimConfig, SimError, VerifyOptions,
};
use sde_ident::symbolic::{fmt_rational, rational_from_f64, rational_to_f64, Rational};

use report::{inputs_hash, Report};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_ANALYSIS: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "ident", version, about = "Structural identifiability of partially observed polynomial SDEs")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Args)]
struct Output {
    /// Print the JSON report instead of text.
    #[arg(long)]
    json: bool,
    /// Write the JSON report to a file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum What {
    Stationary,
    Autocov,
    Sigma,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Print the moment stencil and the applicability verdict.
    Stencil {
        model: String,
        #[command(flatten)]
        output: Output,
    },
    /// Print every moment equation up to a total order.
    Moments {
        model: String,
        #[arg(long, default_value_t = 2)]
        order: u32,
        #[command(flatten)]
        output: Output,
    },
    /// Derive necessarily satisfied equations of orders 1..=order.
    Nse {
        model: String,
        #[arg(long, default_value_t = 1)]
        order: u32,
        #[command(flatten)]
        output: Output,
    },
    /// Extract and reduce identifiable combinations.
    Analyze {
        model: String,
        #[arg(long, default_value_t = 3)]
        max_order: u32,
        #[arg(long, default_value_t = 5)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Closed-form Gaussian quantities for a linear model, as CSV.
    Ou {
        #[arg(long)]
        model: String,
        #[arg(long)]
        theta: Option<PathBuf>,
        #[arg(long, value_enum)]
        what: What,
        /// Comma list or `start:step:stop`.
        #[arg(long, default_value = "0")]
        t: String,
        /// Observed initial values for `sigma` (comma list).
        #[arg(long)]
        x0: Option<String>,
        /// Write the CSV to a file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Euler-Maruyama ensemble written as CSV.
    Simulate {
        model: String,
        #[arg(long)]
        theta: Option<PathBuf>,
        #[arg(long)]
        cfg: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// CSV destination (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write a JSON report.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Simulate a matched pair and test the observed statistics.
    Verify {
        model_id: String,
        #[arg(long)]
        regime: String,
        #[arg(long)]
        theta: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        plots: Option<PathBuf>,
        #[arg(long)]
        paths: Option<usize>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long = "T")]
        t_end: Option<f64>,
        #[arg(long, default_value_t = 4.0)]
        threshold: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Published identifiable sets.
    Known {
        model_id: String,
        #[arg(long)]
        regime: Option<String>,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Analysis(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Analysis(_) => EXIT_ANALYSIS,
        }
    }
}

fn usage<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Usage(e.to_string())
}

/// A model argument: `builtin:<id>` or a path to a DSL file. Returns the
/// model and its source text.
pub fn load_model(arg: &str) -> Result<(ModelSpec, String), String> {
    if let Some(id) = arg.strip_prefix("builtin:") {
        let b = sde_ident::dsl::Builtin::parse(id).map_err(|e| e.to_string())?;
        return Ok((b.model(), b.source()));
    }
    let text = std::fs::read_to_string(arg).map_err(|e| format!("{arg}: {e}"))?;
    let model = parse_model(&text).map_err(|e| format!("{arg}: {e}"))?;
    Ok((model, text))
}

/// Parameter file: a JSON object of numbers or rational strings (`"3/4"`).
pub fn load_theta(path: &Path) -> Result<BTreeMap<String, Rational>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_theta(&text).map_err(|e| format!("{}: {e}", path.display()))
}

pub fn parse_theta(text: &str) -> Result<BTreeMap<String, Rational>, String> {
    let v: BTreeMap<String, Value> = serde_json::from_str(text).map_err(|e| e.to_string())?;
    v.into_iter()
        .map(|(k, v)| {
            let r = match &v {
                Value::Number(n) => n
                    .as_f64()
                    .and_then(|x| rational_from_f64(x, 1_000_000_000))
                    .ok_or_else(|| format!("`{k}`: not a finite number")),
                Value::String(s) => Rational::from_str(s.trim()).map_err(|_| format!("`{k}`: bad rational `{s}`")),
                _ => Err(format!("`{k}`: expected a number or a rational string")),
            }?;
            Ok((k, r))
        })
        .collect()
}

fn theta_f64(t: &BTreeMap<String, Rational>) -> BTreeMap<String, f64> {
    t.iter().map(|(k, v)| (k.clone(), rational_to_f64(v))).collect()
}

fn theta_text(t: &BTreeMap<String, Rational>) -> String {
    t.iter().map(|(k, v)| format!("{k}={}", fmt_rational(v))).collect::<Vec<_>>().join(",")
}

/// `0,0.5,1` or `0:0.1:2` (inclusive).
pub fn parse_grid(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |x: &str| x.trim().parse::<f64>().map_err(|_| format!("bad number `{x}` in grid"));
    if parts.len() == 3 {
        let (a, h, b) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if !(h > 0.0) || b < a {
            return Err("grid needs step > 0 and stop >= start".into());
        }
        let n = ((b - a) / h + 1e-9).floor() as usize;
        return Ok((0..=n).map(|k| a + k as f64 * h).collect());
    }
    s.split(',').map(num).collect()
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| usage(format!("{}: {e}", parent.display())))?;
        }
    }
    std::fs::write(path, text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

/// Emit a report according to `--json` / `--out`; text goes to stdout
/// otherwise.
fn emit(out: &mut dyn Write, output: &Output, report: &Report, text: &str) -> Result<(), CliError> {
    if let Some(p) = &output.out {
        write_file(p, &report.to_json())?;
    }
    if output.json {
        let _ = writeln!(out, "{}", report.to_json());
    } else {
        let _ = write!(out, "{text}");
    }
    Ok(())
}

/// A failed analysis still produces a report when one was requested.
fn fail(out: &mut dyn Write, output: &Output, report: Report) -> CliError {
    let reason = report.error.clone().unwrap_or_default();
    if let Some(p) = &output.out {
        let _ = write_file(p, &report.to_json());
    }
    if output.json {
        let _ = writeln!(out, "{}", report.to_json());
    }
    CliError::Analysis(reason)
}

fn configure_threads() {
    if let Some(n) = std::env::var("IDENT_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

/// Run the program; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if code == EXIT_OK {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    configure_threads();
    match dispatch(cli.cmd, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.code()
        }
    }
}

fn dispatch(cmd: Cmd, out: &mut dyn Write) -> Result<(), CliError> {
    match cmd {
        Cmd::Stencil { model, output } => cmd_stencil(&model, &output, out),
        Cmd::Moments { model, order, output } => cmd_moments(&model, order, &output, out),
        Cmd::Nse { model, order, output } => cmd_nse(&model, order, &output, out),
        Cmd::Analyze { model, max_order, trials, seed, output } => {
            cmd_analyze(&model, max_order, trials, seed, &output, out)
        }
        Cmd::Ou { model, theta, what, t, x0, out: dest } => cmd_ou(&model, theta.as_deref(), what, &t, x0.as_deref(), dest.as_deref(), out),
        Cmd::Simulate { model, theta, cfg, seed, out: dest, report } => {
            cmd_simulate(&model, theta.as_deref(), cfg.as_deref(), seed, dest.as_deref(), report.as_deref(), out)
        }
        Cmd::Verify { model_id, regime, theta, seed, plots, paths, dt, t_end, threshold, output } => {
            let opts = VerifyArgs { regime, theta, seed, plots, paths, dt, t_end, threshold };
            cmd_verify(&model_id, &opts, &output, out)
        }
        Cmd::Known { model_id, regime, output } => cmd_known(&model_id, regime.as_deref(), &output, out),
    }
}

fn cmd_stencil(arg: &str, output: &Output, out: &mut dyn Write) -> Result<(), CliError> {
    let (model, src) = load_model(arg).map_err(CliError::Usage)?;
    let hash = inputs_hash(["stencil", src.as_str()]);
    let mm = MomentModel::new(&model).map_err(usage)?;
    let stencil = mm.stencil();
    let verdict = check_applicability(&stencil);
    let (applicable, detail) = match &verdict {
        Applicability::Applicable { notes } => (true, notes.clone()),
        Applicability::NotApplicable { reason } => (false, vec![reason.clone()]),
    };
    let mut text = stencil.grid();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    text.push_str(if applicable { "applicable\n" } else { "not applicable\n" });
    for d in &detail {
        text.push_str(&format!("  {d}\n"));
    }
    let offsets: Vec<[i64; 2]> = stencil.offsets.iter().map(|(p, q)| [*p, *q]).collect();
    let results = json!({"offsets": offsets, "applicable": applicable, "details": detail});
    let report = Report::ok("stencil", &model.name, hash, None, results, model.warnings.clone());
    emit(out, output, &report, &text)
}

fn cmd_moments(arg: &str, order: u32, output: &Output, out: &mut dyn Write) -> Result<(), CliError> {
    let (model, src) = load_model(arg).map_err(CliError::Usage)?;
    let hash = inputs_hash(["moments", src.as_str(), &order.to_string()]);
    let mm = MomentModel::new(&model).map_err(usage)?;
    let mut text = String::new();
    let mut eqs = Vec::new();
    for k in 1..=order {
        for i in (0..=k).rev() {
            let lhs = MomentSymbol::with_deriv(i, k - i, 1).to_text();
            let rhs = mm.moment_ode(i, k - i).to_text();
            text.push_str(&format!("{lhs} = {rhs}\n"));
            eqs.push(json!({"lhs": lhs, "rhs": rhs}));
        }
    }
    let report = Report::ok("moments", &model.name, hash, None, json!({"order": order, "equations": eqs}), model.warnings.clone());
    emit(out, output, &report, &text)
}

fn cmd_nse(arg: &str, order: u32, output: &Output, out: &mut dyn Write) -> Result<(), CliError> {
    let (model, src) = load_model(arg).map_err(CliError::Usage)?;
    let hash = inputs_hash(["nse", src.as_str(), &order.to_string()]);
    let derived = (|| {
        let mut el = Eliminator::new(&model)?;
        let nses = (1..=order.max(1)).map(|k| el.nse(k)).collect::<Result<Vec<_>, _>>()?;
        el.verify_resubstitution()?;
        Ok::<_, sde_ident::elimination::ElimError>(nses)
    })();
    let nses = match derived {
        Ok(n) => n,
        Err(e) => return Err(fail(out, output, Report::failure("nse", &model.name, hash, None, e.to_string()))),
    };
    let mut text = String::new();
    let mut warnings = model.warnings.clone();
    for n in &nses {
        text.push_str(&format!("order {}: {} = 0\n", n.order, n.monic().to_text()));
        if !n.conditions.is_empty() {
            let conds: Vec<String> = n.conditions.iter().map(|c| format!("{} != 0", c.to_text())).collect();
            text.push_str(&format!("  assuming {}\n", conds.join(", ")));
        }
        for w in &n.warnings {
            text.push_str(&format!("  warning: {w}\n"));
            warnings.push(format!("order {}: {w}", n.order));
        }
    }
    let results = json!({"nses": nses.iter().map(|n| n.to_json()).collect::<Vec<_>>()});
    let report = Report::ok("nse", &model.name, hash, None, results, warnings);
    emit(out, output, &report, &text)
}

fn cmd_analyze(arg: &str, max_order: u32, trials: usize, seed: u64, output: &Output, out: &mut dyn Write) -> Result<(), CliError> {
    let (model, src) = load_model(arg).map_err(CliError::Usage)?;
    let hash = inputs_hash([
        "analyze",
        src.as_str(),
        &max_order.to_string(),
        &trials.to_string(),
        &seed.to_string(),
    ]);
    let analysis = match analyze(&model, max_order, trials, seed) {
        Ok(a) => a,
        Err(e) => return Err(fail(out, output, Report::failure("analyze", &model.name, hash, Some(seed), e.to_string()))),
    };
    let builtin_id = arg.strip_prefix("builtin:");
    let comparisons: Vec<Value> = builtin_id
        .map(|id| {
            known_regimes(id)
                .iter()
                .filter_map(|r| known_results(id, r).ok())
                .filter(|k| k.compare_order.is_some_and(|o| o <= max_order))
                .filter_map(|k| compare_with_known(&analysis, &k, trials, seed))
                .map(|c| serde_json::to_value(c).expect("comparison serialises"))
                .collect()
        })
        .unwrap_or_default();

    let mut text = String::new();
    for o in &analysis.orders {
        text.push_str(&format!("order {}: {} = 0\n", o.order, o.nse.monic().to_text()));
        let c: Vec<String> = o.combos.iter().map(|c| c.to_text()).collect();
        text.push_str(&format!("  coefficients: {{{}}}\n", c.join(", ")));
    }
    text.push_str(&format!(
        "identifiable combinations (rank {} of {} parameters):\n",
        analysis.reduced.rank,
        analysis.params.len()
    ));
    for c in analysis.reduced.texts() {
        text.push_str(&format!("  {c}\n"));
    }
    if !analysis.conditions.is_empty() {
        let conds: Vec<String> = analysis.conditions.iter().map(|c| format!("{} != 0", c.to_text())).collect();
        text.push_str(&format!("assuming {}\n", conds.join(", ")));
    }
    for c in &comparisons {
        text.push_str(&format!(
            "published set `{}` (order {}): same information = {}\n",
            c["regime"].as_str().unwrap_or(""),
            c["order"],
            c["same_information"]
        ));
    }
    for n in &analysis.notes {
        text.push_str(&format!("note: {n}\n"));
    }
    let mut warnings = model.warnings.clone();
    warnings.extend(analysis.warnings.iter().cloned());
    warnings.extend(analysis.conditions.iter().map(|c| format!("non-degeneracy: {} != 0", c.to_text())));
    warnings.push("reduced set produced by heuristic rewriting, checked to keep the Jacobian rank".into());
    let results = json!({
        "params": analysis.params.names(),
        "max_order": max_order,
        "orders": analysis.orders.iter().map(|o| json!({
            "order": o.order,
            "nse": o.nse.to_json(),
            "combos": o.combos.iter().map(|c| c.to_text()).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
        "raw": analysis.raw.to_json(),
        "reduced": analysis.reduced.to_json(),
        "conditions": analysis.conditions.iter().map(|c| c.to_text()).collect::<Vec<_>>(),
        "comparisons": comparisons,
        "notes": analysis.notes,
    });
    let report = Report::ok("analyze", &model.name, hash, Some(seed), results, warnings);
    emit(out, output, &report, &text)
}

fn matrix_row(m: &nalgebra::DMatrix<f64>) -> Vec<String> {
    let mut v = Vec::new();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            v.push(format!("{}", m[(i, j)]));
        }
    }
    v
}

fn matrix_header(prefix: &str, n: usize) -> Vec<String> {
    let mut v = Vec::new();
    for i in 0..n {
        for j in 0..n {
            v.push(format!("{prefix}{i}{j}"));
        }
    }
    v
}

fn resolve_theta(path: Option<&Path>, model_arg: &str) -> Result<BTreeMap<String, Rational>, CliError> {
    match path {
        Some(p) => load_theta(p).map_err(CliError::Usage),
        None => model_arg
            .strip_prefix("builtin:")
            .or(Some(model_arg))
            .and_then(default_theta)
            .ok_or_else(|| usage("--theta is required for this model")),
    }
}

fn cmd_ou(
    arg: &str,
    theta: Option<&Path>,
    what: What,
    grid: &str,
    x0: Option<&str>,
    dest: Option<&Path>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let (model, _) = load_model(arg).map_err(CliError::Usage)?;
    let theta = theta_f64(&resolve_theta(theta, arg)?);
    let sys = OuSystem::from_model(&model, &theta).map_err(|e| CliError::Analysis(e.to_string()))?;
    let n = sys.dim();
    let ts = parse_grid(grid).map_err(CliError::Usage)?;
    let analysis = |e: sde_ident::ou::OuError| CliError::Analysis(e.to_string());
    let mut csv = String::new();
    match what {
        What::Stationary => {
            let s = sys.stationary_cov().map_err(analysis)?;
            for i in 0..n {
                let row: Vec<String> = (0..n).map(|j| format!("{}", s[(i, j)])).collect();
                csv.push_str(&row.join(","));
                csv.push('\n');
            }
        }
        What::Autocov => {
            csv.push_str(&format!("t,{}\n", matrix_header("rho", n).join(",")));
            for t in &ts {
                let m = sys.autocov(*t).map_err(analysis)?;
                csv.push_str(&format!("{t},{}\n", matrix_row(&m).join(",")));
            }
        }
        What::Sigma => {
            let x0: Vec<f64> = match x0 {
                Some(s) => parse_grid(s).map_err(CliError::Usage)?,
                None => sys.b.rows(0, sys.m).iter().copied().collect(),
            };
            let (_, cov0) = sys.conditional_init(&x0).map_err(analysis)?;
            csv.push_str(&format!("t,{}\n", matrix_header("sigma", n).join(",")));
            for t in &ts {
                let m = sys.time_cov(&cov0, *t).map_err(analysis)?;
                csv.push_str(&format!("{t},{}\n", matrix_row(&m).join(",")));
            }
        }
    }
    match dest {
        Some(p) => write_file(p, &csv),
        None => {
            let _ = write!(out, "{csv}");
            Ok(())
        }
    }
}

fn cmd_simulate(
    arg: &str,
    theta: Option<&Path>,
    cfg: Option<&Path>,
    seed: Option<u64>,
    dest: Option<&Path>,
    report: Option<&Path>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let (model, src) = load_model(arg).map_err(CliError::Usage)?;
    let theta_q = resolve_theta(theta, arg)?;
    let mut config = match cfg {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| usage(format!("{}: {e}", p.display())))?;
            serde_json::from_str::<SimConfig>(&text).map_err(|e| usage(format!("{}: {e}", p.display())))?
        }
        None => SimConfig { n_paths: 100, ..SimConfig::default() },
    };
    if let Some(s) = seed {
        config.seed = s;
    }
    let cfg_json = serde_json::to_string(&config).expect("config serialises");
    let hash = inputs_hash(["simulate", src.as_str(), &theta_text(&theta_q), &cfg_json]);
    let ens = match simulate(&model, &theta_f64(&theta_q), &config) {
        Ok(e) => e,
        Err(e @ (SimError::Config(_) | SimError::MissingParameter(_))) => return Err(usage(e)),
        Err(e) => return Err(CliError::Analysis(e.to_string())),
    };
    let csv = ens.to_csv();
    match dest {
        Some(p) => write_file(p, &csv)?,
        None => {
            let _ = write!(out, "{csv}");
        }
    }
    if let Some(r) = report {
        let mut warnings = model.warnings.clone();
        if ens.total_clamped() > 0 {
            warnings.push(format!(
                "{} diffusion evaluations clamped ({:.4}% of steps)",
                ens.total_clamped(),
                100.0 * ens.clamp_fraction()
            ));
        }
        if ens.unreliable() {
            warnings.push("run marked unreliable: clamped fraction above 0.1%".into());
        }
        let results = json!({
            "n_paths": ens.n_paths,
            "grid_points": ens.grid.len(),
            "clamped_steps": ens.total_clamped(),
            "unreliable": ens.unreliable(),
            "config": config,
        });
        write_file(r, &Report::ok("simulate", &model.name, hash, Some(config.seed), results, warnings).to_json())?;
    }
    Ok(())
}

struct VerifyArgs {
    regime: String,
    theta: Option<PathBuf>,
    seed: u64,
    plots: Option<PathBuf>,
    paths: Option<usize>,
    dt: Option<f64>,
    t_end: Option<f64>,
    threshold: f64,
}

fn cmd_verify(model_id: &str, a: &VerifyArgs, output: &Output, out: &mut dyn Write) -> Result<(), CliError> {
    let id = model_id.strip_prefix("builtin:").unwrap_or(model_id);
    let model = builtin_model(id).map_err(usage)?;
    let theta = resolve_theta(a.theta.as_deref(), id)?;
    let mut sim = SimConfig { seed: a.seed, ..SimConfig::default() };
    if let Some(p) = a.paths {
        sim.n_paths = p;
    }
    if let Some(dt) = a.dt {
        sim.dt = dt;
    }
    if let Some(t) = a.t_end {
        sim.t_end = t;
    }
    let hash = inputs_hash([
        "verify",
        id,
        a.regime.as_str(),
        &theta_text(&theta),
        &a.seed.to_string(),
        &serde_json::to_string(&sim).expect("config serialises"),
        &a.threshold.to_string(),
    ]);
    let failure = |reason: String| Report::failure("verify", id, hash.clone(), Some(a.seed), reason);
    let pair = match matched_parameters(id, &a.regime, &theta, a.seed) {
        Ok(p) => p,
        Err(e @ (SimError::Catalog(_) | SimError::MissingParameter(_))) => return Err(usage(e)),
        Err(e) => return Err(fail(out, output, failure(e.to_string()))),
    };
    let opts = VerifyOptions { sim, threshold: a.threshold, ..VerifyOptions::default() };
    let rep = match verify_indistinguishable(&model, &pair, &opts) {
        Ok(r) => r,
        Err(e) => return Err(fail(out, output, failure(e.to_string()))),
    };
    if let Some(dir) = &a.plots {
        for (name, svg) in rep.plots() {
            write_file(&dir.join(name), &svg)?;
        }
    }
    let mut warnings = vec![rep.multiplicity_note.clone()];
    if rep.unreliable {
        warnings.push("at least one ensemble clamped more than 0.1% of diffusion evaluations".into());
    }
    let mut text = format!(
        "{}/{}: {}\n  construction: {}\n  θ  = {}\n  θ* = {}\n",
        rep.model,
        rep.regime,
        rep.verdict,
        rep.construction,
        theta_text(&pair.theta),
        theta_text(&pair.theta_star)
    );
    for s in &rep.statistics {
        text.push_str(&format!(
            "  {:<8} {:<28} vs {:<10} max|z| = {:>8.2}  {}\n",
            if s.observed { "observed" } else { "hidden" },
            s.name,
            s.against,
            s.max_abs_z.min(1e6),
            if s.pass { "PASS" } else { "FAIL" }
        ));
    }
    let results = serde_json::to_value(&rep).expect("report serialises");
    let report = Report::ok("verify", id, hash, Some(a.seed), results, warnings);
    emit(out, output, &report, &text)
}

fn known_json(k: &KnownSet) -> Value {
    json!({
        "regime": k.regime,
        "combos": k.texts(),
        "symbols": k.symbols.names(),
        "compare_order": k.compare_order,
        "description": k.description,
    })
}

fn cmd_known(model_id: &str, regime: Option<&str>, output: &Output, out: &mut dyn Write) -> Result<(), CliError> {
    let id = model_id.strip_prefix("builtin:").unwrap_or(model_id);
    let regimes: Vec<String> = match regime {
        Some(r) => vec![r.to_string()],
        None => known_regimes(id),
    };
    if regimes.is_empty() {
        return Err(usage(format!("no published sets for `{id}`")));
    }
    let sets = regimes
        .iter()
        .map(|r| known_results(id, r))
        .collect::<Result<Vec<_>, _>>()
        .map_err(usage)?;
    let mut text = String::new();
    for k in &sets {
        text.push_str(&format!("{} ({}): {{{}}}\n", k.regime, k.description, k.texts().join(", ")));
    }
    let hash = inputs_hash(["known", id, &regimes.join(",")]);
    let results = json!({"sets": sets.iter().map(known_json).collect::<Vec<_>>()});
    let report = Report::ok("known", id, hash, None, results, Vec::new());
    emit(out, output, &report, &text)
}
