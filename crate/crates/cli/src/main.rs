mod grid;
mod manifest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use manifest::Artifacts;
use replab_core::bounds::{bound_sweep, outside_option_bound, BoundError};
use replab_core::equilibria::{DEFAULT_FIRST_REGIME_DEPTH, DEFAULT_MAX_STATES};
use replab_core::fei::{binary_threshold, check_fei, uniform_failure_horizon, FeiError};
use replab_core::simulate::{analytic_long_run_effort, martingale_diagnostic, simulate, thread_cap, SimulationConfig, SimulationError};
use replab_core::verifier::{verify, VerifyError, DEFAULT_DEPTH, DEFAULT_TOL};
use replab_core::{
    construct_full_effort, construct_non_efe, AutomatonError, ConfigError, ConstructionError, EquilibriumAutomaton, Model,
    ModelConfig, ModelError, NonEfeOptions, ValidationLevel,
};

const DEFAULT_PI0: f64 = 0.5;

#[derive(Parser)]
#[command(name = "replab", version, about = "Reputation and replacement: incentives, equilibria, bounds, simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Model inputs. Flags override values read from `--config`.
#[derive(Args, Debug, Clone, Default)]
struct ModelArgs {
    /// TOML or JSON model document
    #[arg(long)]
    config: Option<PathBuf>,
    /// Binary monitoring with P(Pass | work) = P(Fail | shirk) = p
    #[arg(long = "binary-precision")]
    binary_precision: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    pi0: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
}

#[derive(Args, Debug, Clone, Default)]
struct OutArgs {
    /// Directory for artifacts and the run manifest
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Kind {
    Fe,
    NonEfe,
}

#[derive(Subcommand)]
enum Command {
    /// Decide full-effort incentives and print a certificate
    CheckFei {
        #[command(flatten)]
        model: ModelArgs,
        /// `delta=a:b:step` or `kappa=a:b:step`; emits CSV instead
        #[arg(long)]
        sweep: Option<String>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Uniform-failure horizon T when full-effort incentives fail
    Horizon {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Build an equilibrium automaton
    Construct {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum)]
        kind: Kind,
        /// Initial work probability for the non-EFE construction
        #[arg(long)]
        a0: Option<f64>,
        /// Cap on consecutive first-regime fail steps
        #[arg(long, default_value_t = DEFAULT_FIRST_REGIME_DEPTH)]
        depth: usize,
        #[arg(long, default_value_t = DEFAULT_MAX_STATES)]
        max_states: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Check an automaton for equilibrium; exit 3 unless it passes
    Verify {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        automaton: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = DEFAULT_DEPTH)]
        depth: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Monte Carlo careers under an automaton
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        automaton: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        paths: usize,
        #[arg(long, default_value_t = 500)]
        horizon: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Keep full per-path traces in the summary
        #[arg(long)]
        traces: bool,
        /// Also write per_period.csv (needs --out)
        #[arg(long)]
        per_period: bool,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Upper bound on the outside option when full-effort incentives fail
    BoundOutsideOption {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Outside-option bound over a (pi0, c) grid, as CSV
    BoundSweep {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long = "pi0-grid")]
        pi0_grid: String,
        #[arg(long = "c-grid", default_value = "0")]
        c_grid: String,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Phase diagram over a (delta, kappa) or (p, delta) grid, as CSV
    PhaseSweep(PhaseArgs),
}

#[derive(Args, Debug, Clone)]
struct PhaseArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Grid of binary precisions
    #[arg(long = "binary-precision")]
    binary_precision: Option<String>,
    #[arg(long)]
    kappa: Option<String>,
    #[arg(long)]
    delta: Option<String>,
    #[arg(long)]
    pi0: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[arg(long, default_value_t = DEFAULT_DEPTH)]
    depth: usize,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug)]
enum CliError {
    Validation { code: &'static str, message: String },
    Verification { code: &'static str, message: String },
    Runtime { code: &'static str, message: String },
}

impl CliError {
    fn validation(code: &'static str, message: impl ToString) -> Self {
        Self::Validation { code, message: message.to_string() }
    }

    fn verification(code: &'static str, message: impl ToString) -> Self {
        Self::Verification { code, message: message.to_string() }
    }

    fn runtime(code: &'static str, message: impl ToString) -> Self {
        Self::Runtime { code, message: message.to_string() }
    }

    fn exit_code(&self) -> u8 {
        match self {
            Self::Runtime { .. } => 1,
            Self::Validation { .. } => 2,
            Self::Verification { .. } => 3,
        }
    }

    fn report(&self) -> Value {
        let (code, message) = match self {
            Self::Validation { code, message } | Self::Verification { code, message } | Self::Runtime { code, message } => {
                (code, message)
            }
        };
        json!({ "error": code, "message": message, "exit_code": self.exit_code() })
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Io { .. } => Self::validation("config_unreadable", e),
            ConfigError::Parse(_) => Self::validation("config_parse", e),
            ConfigError::MonitoringSpec => Self::validation("monitoring_unspecified", e),
            ConfigError::Model(m) => m.into(),
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        Self::validation("invalid_model", e)
    }
}

impl From<FeiError> for CliError {
    fn from(e: FeiError) -> Self {
        match e {
            FeiError::FeiHoldsNoHorizon => Self::validation("fei_holds", e),
            _ => Self::runtime("fei", e),
        }
    }
}

impl From<BoundError> for CliError {
    fn from(e: BoundError) -> Self {
        match e {
            BoundError::FeiHoldsNoBound => Self::validation("fei_holds", e),
            BoundError::Model(m) => m.into(),
            BoundError::Fei(f) => f.into(),
        }
    }
}

impl From<ConstructionError> for CliError {
    fn from(e: ConstructionError) -> Self {
        Self::validation("construction_unavailable", e)
    }
}

fn io_err(e: String) -> CliError {
    CliError::runtime("io", e)
}

impl ModelArgs {
    /// Flags over `--config` over `base` (usually an automaton's echo).
    fn resolve(&self, base: Option<&ModelConfig>) -> Result<ModelConfig, CliError> {
        let start = match &self.config {
            Some(path) => Some(ModelConfig::load(path)?),
            None => base.cloned(),
        };
        let mut cfg = match start {
            Some(cfg) => cfg,
            None => ModelConfig {
                kappa: self.kappa.ok_or_else(|| missing("--kappa"))?,
                delta: self.delta.ok_or_else(|| missing("--delta"))?,
                pi0: DEFAULT_PI0,
                c: 0.0,
                binary_precision: Some(self.binary_precision.ok_or_else(|| missing("--binary-precision or --config"))?),
                signals: None,
            },
        };
        if let Some(p) = self.binary_precision {
            cfg.binary_precision = Some(p);
            cfg.signals = None;
        }
        cfg.kappa = self.kappa.unwrap_or(cfg.kappa);
        cfg.delta = self.delta.unwrap_or(cfg.delta);
        cfg.pi0 = self.pi0.unwrap_or(cfg.pi0);
        cfg.c = self.c.unwrap_or(cfg.c);
        Ok(cfg)
    }
}

fn missing(flag: &str) -> CliError {
    CliError::validation("missing_parameter", format!("{flag} is required"))
}

fn config_value(cfg: &ModelConfig) -> Value {
    serde_json::to_value(cfg).expect("config serialises")
}

fn pretty(v: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(v).expect("serialisable") + "\n"
}

fn opt_csv(x: Option<f64>) -> String {
    x.map(|v| format!("{v:?}")).unwrap_or_default()
}

fn opt_bool(x: Option<bool>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn read_automaton(path: &Path, artifacts: &mut Artifacts) -> Result<EquilibriumAutomaton, AutomatonError> {
    let bytes = std::fs::read(path).map_err(|e| AutomatonError::Parse(format!("cannot read {}: {e}", path.display())))?;
    artifacts.record_input(path, &bytes);
    let text = String::from_utf8(bytes).map_err(|e| AutomatonError::Parse(e.to_string()))?;
    let a = EquilibriumAutomaton::from_json(&text)?;
    a.check_well_formed()?;
    Ok(a)
}

fn check_fei_cmd(model: &ModelArgs, sweep: Option<&str>, out: &OutArgs) -> Result<(), CliError> {
    let swept = sweep.map(grid::parse_named).transpose().map_err(|e| CliError::validation("bad_grid", e))?;
    // the swept parameter need not be given on its own
    let mut model = model.clone();
    if let Some((name, values)) = &swept {
        match name.as_str() {
            "delta" => model.delta = model.delta.or(values.first().copied()),
            "kappa" => model.kappa = model.kappa.or(values.first().copied()),
            _ => return Err(CliError::validation("bad_grid", format!("cannot sweep {name:?}; use delta or kappa"))),
        }
    }
    let cfg = model.resolve(None)?;
    let mut art = Artifacts::new(out.out.clone()).map_err(io_err)?;
    match swept {
        None => {
            let m = cfg.to_model(ValidationLevel::Relaxed)?;
            let cert = check_fei(&m);
            let slack = match (&cert.witness, &cert.refutation) {
                (Some(w), _) => Some(w.slack),
                (None, Some(r)) => Some(r.best_slack),
                _ => None,
            };
            let threshold = cfg.binary_precision.and_then(|p| binary_threshold(p, cfg.kappa).ok());
            let body = json!({
                "config": config_value(&cfg),
                "holds": cert.holds,
                "slack": slack,
                "v_bar": cert.witness.as_ref().map(|w| w.v_bar),
                "binary_threshold": threshold,
                "witness": cert.witness,
                "refutation": cert.refutation,
            });
            art.primary("fei.json", &pretty(&body)).map_err(io_err)?;
            art.finish("check-fei", &config_value(&cfg), None).map_err(io_err)
        }
        Some((name, values)) => {
            let mut csv = format!("{name},holds,slack,v_bar\n");
            for &v in &values {
                let mut c = cfg.clone();
                if name == "delta" {
                    c.delta = v;
                } else {
                    c.kappa = v;
                }
                let cert = check_fei(&c.to_model(ValidationLevel::Relaxed)?);
                let slack = cert.witness.as_ref().map(|w| w.slack).or(cert.refutation.as_ref().map(|r| r.best_slack));
                csv.push_str(&format!(
                    "{v:?},{},{},{}\n",
                    cert.holds,
                    opt_csv(slack),
                    opt_csv(cert.witness.as_ref().map(|w| w.v_bar))
                ));
            }
            art.primary("fei_sweep.csv", &csv).map_err(io_err)?;
            let inputs = json!({ "config": config_value(&cfg), "sweep": sweep });
            art.finish("check-fei", &inputs, None).map_err(io_err)
        }
    }
}

fn horizon_cmd(model: &ModelArgs, out: &OutArgs) -> Result<(), CliError> {
    let cfg = model.resolve(None)?;
    let m = cfg.to_model(ValidationLevel::Relaxed)?;
    let h = uniform_failure_horizon(&m)?;
    let mut body = serde_json::to_value(&h).expect("serialisable");
    body["config"] = config_value(&cfg);
    let mut art = Artifacts::new(out.out.clone()).map_err(io_err)?;
    art.primary("horizon.json", &pretty(&body)).map_err(io_err)?;
    art.finish("horizon", &config_value(&cfg), None).map_err(io_err)
}

fn construct_cmd(model: &ModelArgs, kind: Kind, options: NonEfeOptions, out: &OutArgs) -> Result<(), CliError> {
    let cfg = model.resolve(None)?;
    let m = cfg.to_model(ValidationLevel::Strict)?;
    let mut art = Artifacts::new(out.out.clone()).map_err(io_err)?;
    let (automaton, params) = match kind {
        Kind::Fe => (construct_full_effort(&m)?, None),
        Kind::NonEfe => {
            let (a, q) = construct_non_efe(&m, options)?;
            (a, Some(q))
        }
    };
    let automaton = automaton.with_params_echo(cfg.clone());
    eprintln!("{} states{}", automaton.len(), if automaton.is_truncated() { ", truncated" } else { "" });
    art.primary("automaton.json", &(automaton.to_json() + "\n")).map_err(io_err)?;
    if let Some(q) = params {
        art.file("non_efe_parameters.json", &pretty(&q)).map_err(io_err)?;
    }
    let inputs = json!({
        "config": config_value(&cfg),
        "kind": format!("{kind:?}"),
        "a0": options.a0_override,
        "depth": options.depth,
        "max_states": options.max_states,
    });
    art.finish("construct", &inputs, None).map_err(io_err)
}

fn verify_cmd(model: &ModelArgs, path: &Path, tol: f64, depth: usize, out: &OutArgs) -> Result<(), CliError> {
    let mut art = Artifacts::new(out.out.clone()).map_err(io_err)?;
    // an unreadable automaton cannot be certified
    let a = read_automaton(path, &mut art).map_err(|e| CliError::verification("automaton_invalid", e))?;
    let cfg = model.resolve(a.params_echo())?;
    let m = cfg.to_model(ValidationLevel::Strict)?;
    let report = match verify(&a, &m, tol, depth) {
        Ok(r) => r,
        Err(e @ VerifyError::Automaton(_)) => return Err(CliError::verification("automaton_invalid", e)),
        Err(e @ VerifyError::DepthInsufficient { .. }) => return Err(CliError::verification("depth_insufficient", e)),
        Err(e @ VerifyError::Values(_)) => return Err(CliError::runtime("values", e)),
    };
    eprintln!("{}", report.summary());
    art.primary("report.json", &pretty(&report)).map_err(io_err)?;
    let inputs = json!({ "config": config_value(&cfg), "tol": tol, "depth": depth });
    art.finish("verify", &inputs, None).map_err(io_err)?;
    if report.passed {
        Ok(())
    } else {
        Err(CliError::verification("verification_failed", report.summary()))
    }
}

struct SimArgs {
    paths: usize,
    horizon: usize,
    seed: u64,
    traces: bool,
    per_period: bool,
}

fn simulate_cmd(model: &ModelArgs, path: &Path, s: SimArgs, out: &OutArgs) -> Result<(), CliError> {
    let mut art = Artifacts::new(out.out.clone()).map_err(io_err)?;
    if s.per_period && !art.has_dir() {
        return Err(CliError::validation("missing_parameter", "--per-period needs --out"));
    }
    let a = read_automaton(path, &mut art).map_err(|e| CliError::validation("automaton_invalid", e))?;
    let cfg = model.resolve(a.params_echo())?;
    let m = cfg.to_model(ValidationLevel::Strict)?;
    let config = SimulationConfig { record_traces: s.traces, ..SimulationConfig::new(s.horizon, s.paths, s.seed) };
    let stats = simulate(&a, &m, &config).map_err(|e| match e {
        SimulationError::InvalidConfig | SimulationError::SignalMismatch { .. } => CliError::validation("invalid_simulation", e),
        SimulationError::DepthInsufficient { .. } => CliError::runtime("depth_insufficient", e),
        SimulationError::ThreadPool(_) => CliError::runtime("thread_pool", e),
    })?;
    let analytic = analytic_long_run_effort(&a, &m);
    let z = martingale_diagnostic(&stats);
    eprintln!(
        "long-run effort {:.6} ± {:.2e} (analytic {:.6}); martingale z {:.3}; favorable replacements {}",
        stats.long_run_effort.estimate, stats.long_run_effort.std_error, analytic.value, z, stats.favorable_replacement_total
    );
    let body = json!({ "config": config_value(&cfg), "stats": stats, "analytic": analytic, "martingale_z": z });
    art.primary("summary.json", &pretty(&body)).map_err(io_err)?;
    if s.per_period {
        art.file("per_period.csv", &stats.per_period_csv()).map_err(io_err)?;
    }
    art.finish("simulate", &json!({ "config": config_value(&cfg), "simulation": config }), Some(s.seed))
        .map_err(io_err)
}

fn bound_cmd(model: &ModelArgs, out: &OutArgs) -> Result<(), CliError> {
    let cfg = model.resolve(None)?;
    let m = cfg.to_model(ValidationLevel::Relaxed)?;
    let b = outside_option_bound(&m)?;
    let mut body = serde_json::to_value(b).expect("serialisable");
    body["config"] = config_value(&cfg);
    body["below_one"] = json!(b.bound_value < 1.0);
    let mut art = Artifacts::new(out.out.clone()).map_err(io_err)?;
    art.primary("outside_option_bound.json", &pretty(&body)).map_err(io_err)?;
    art.finish("bound-outside-option", &config_value(&cfg), None).map_err(io_err)
}

fn bound_sweep_cmd(model: &ModelArgs, pi0_grid: &str, c_grid: &str, out: &OutArgs) -> Result<(), CliError> {
    let cfg = model.resolve(None)?;
    let pi0s = grid::parse(pi0_grid).map_err(|e| CliError::validation("bad_grid", e))?;
    let cs = grid::parse(c_grid).map_err(|e| CliError::validation("bad_grid", e))?;
    let m = cfg.to_model(ValidationLevel::Relaxed)?;
    let sweep = bound_sweep(&m, &pi0s, &cs)?;
    let mut art = Artifacts::new(out.out.clone()).map_err(io_err)?;
    art.primary("bound_sweep.csv", &sweep.to_csv()).map_err(io_err)?;
    let checks = json!({
        "monotone_in_pi0": sweep.monotone_in_pi0,
        "monotone_in_c": sweep.monotone_in_c,
        "below_one_under_threshold": sweep.below_one_under_threshold,
    });
    eprintln!("{checks}");
    art.file("bound_sweep_checks.json", &pretty(&checks)).map_err(io_err)?;
    let inputs = json!({ "config": config_value(&cfg), "pi0_grid": pi0s, "c_grid": cs });
    art.finish("bound-sweep", &inputs, None).map_err(io_err)?;
    if sweep.checks_pass() {
        Ok(())
    } else {
        Err(CliError::verification("bound_checks_failed", checks))
    }
}

struct PhaseCell {
    precision: Option<f64>,
    kappa: f64,
    delta: f64,
    holds: bool,
    fe_verified: Option<bool>,
    non_efe_verified: Option<bool>,
    bound: Option<f64>,
    threshold: Option<f64>,
}

fn verified(a: Result<EquilibriumAutomaton, ConstructionError>, m: &Model, tol: f64, depth: usize) -> bool {
    a.ok().and_then(|a| verify(&a, m, tol, depth).ok()).is_some_and(|r| r.passed)
}

fn phase_sweep_cmd(args: &PhaseArgs) -> Result<(), CliError> {
    let base = args.config.as_deref().map(ModelConfig::load).transpose()?;
    let axis = |flag: &Option<String>, fallback: Option<f64>, name: &str| -> Result<Vec<f64>, CliError> {
        match (flag, fallback) {
            (Some(text), _) => grid::parse(text).map_err(|e| CliError::validation("bad_grid", e)),
            (None, Some(v)) => Ok(vec![v]),
            (None, None) => Err(missing(name)),
        }
    };
    let kappas = axis(&args.kappa, base.as_ref().map(|b| b.kappa), "--kappa")?;
    let deltas = axis(&args.delta, base.as_ref().map(|b| b.delta), "--delta")?;
    let precisions: Vec<Option<f64>> = match (&args.binary_precision, &base) {
        (Some(text), _) => grid::parse(text).map_err(|e| CliError::validation("bad_grid", e))?.into_iter().map(Some).collect(),
        (None, Some(b)) => vec![b.binary_precision],
        (None, None) => return Err(missing("--binary-precision or --config")),
    };
    let binary = precisions.iter().all(Option::is_some);
    let pi0 = args.pi0.or(base.as_ref().map(|b| b.pi0)).unwrap_or(DEFAULT_PI0);
    let c = args.c.or(base.as_ref().map(|b| b.c)).unwrap_or(0.0);

    let mut models = Vec::new();
    for &p in &precisions {
        for &kappa in &kappas {
            for &delta in &deltas {
                let cfg = ModelConfig {
                    kappa,
                    delta,
                    pi0,
                    c,
                    binary_precision: p,
                    signals: if p.is_some() { None } else { base.as_ref().and_then(|b| b.signals.clone()) },
                };
                models.push((p, cfg.to_model(ValidationLevel::Strict)?));
            }
        }
    }

    let (tol, depth) = (args.tol, args.depth);
    let cells: Vec<PhaseCell> = models
        .par_iter()
        .map(|(p, m)| {
            let params = m.params();
            let holds = check_fei(m).holds;
            let options = NonEfeOptions { depth, ..Default::default() };
            PhaseCell {
                precision: *p,
                kappa: params.kappa,
                delta: params.delta,
                holds,
                fe_verified: holds.then(|| verified(construct_full_effort(m), m, tol, depth)),
                non_efe_verified: holds.then(|| verified(construct_non_efe(m, options).map(|(a, _)| a), m, tol, depth)),
                bound: if holds { None } else { outside_option_bound(m).ok().map(|b| b.bound_value) },
                threshold: p.and_then(|p| binary_threshold(p, params.kappa).ok()),
            }
        })
        .collect();

    // frontier neighbours along the innermost axis that actually varies
    let (nk, nd) = (kappas.len(), deltas.len());
    let stride = if nd > 1 {
        1
    } else if nk > 1 {
        nd
    } else {
        nk * nd
    };
    let axis_len = if nd > 1 { nd } else if nk > 1 { nk } else { precisions.len() };
    let class = |h: bool| if h { "holds" } else { "fails" };

    let mut csv = String::new();
    if binary {
        csv.push_str("binary_precision,");
    }
    csv.push_str("kappa,delta,pi0,c,fei_holds,fe_construction_verified,non_efe_construction_verified,outside_option_bound,delta_threshold,frontier\n");
    let mut unverified = 0;
    for (i, cell) in cells.iter().enumerate() {
        let pos = (i / stride) % axis_len;
        let frontier = if pos > 0 && cells[i - stride].holds != cell.holds {
            format!("{}->{}", class(cells[i - stride].holds), class(cell.holds))
        } else {
            String::new()
        };
        if cell.fe_verified == Some(false) || cell.non_efe_verified == Some(false) {
            unverified += 1;
        }
        if binary {
            csv.push_str(&format!("{},", opt_csv(cell.precision)));
        }
        csv.push_str(&format!(
            "{:?},{:?},{:?},{:?},{},{},{},{},{},{}\n",
            cell.kappa,
            cell.delta,
            pi0,
            c,
            cell.holds,
            opt_bool(cell.fe_verified),
            opt_bool(cell.non_efe_verified),
            opt_csv(cell.bound),
            opt_csv(cell.threshold),
            frontier
        ));
    }
    let mut art = Artifacts::new(args.out.out.clone()).map_err(io_err)?;
    art.primary("phase_sweep.csv", &csv).map_err(io_err)?;
    let inputs = json!({
        "base": base.as_ref().map(config_value),
        "binary_precision": precisions,
        "kappa": kappas,
        "delta": deltas,
        "pi0": pi0,
        "c": c,
        "tol": tol,
        "depth": depth,
    });
    art.finish("phase-sweep", &inputs, None).map_err(io_err)?;
    if unverified > 0 {
        Err(CliError::verification("verification_failed", format!("{unverified} cells with an unverified construction")))
    } else {
        Ok(())
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::CheckFei { model, sweep, out } => check_fei_cmd(&model, sweep.as_deref(), &out),
        Command::Horizon { model, out } => horizon_cmd(&model, &out),
        Command::Construct { model, kind, a0, depth, max_states, out } => {
            construct_cmd(&model, kind, NonEfeOptions { a0_override: a0, depth, max_states }, &out)
        }
        Command::Verify { model, automaton, tol, depth, out } => verify_cmd(&model, &automaton, tol, depth, &out),
        Command::Simulate { model, automaton, paths, horizon, seed, traces, per_period, out } => {
            simulate_cmd(&model, &automaton, SimArgs { paths, horizon, seed, traces, per_period }, &out)
        }
        Command::BoundOutsideOption { model, out } => bound_cmd(&model, &out),
        Command::BoundSweep { model, pi0_grid, c_grid, out } => bound_sweep_cmd(&model, &pi0_grid, &c_grid, &out),
        Command::PhaseSweep(args) => phase_sweep_cmd(&args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = thread_cap() {
        // a pool that is already up is fine
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.report());
            ExitCode::from(e.exit_code())
        }
    }
}
