//! The `chronoscope` command line: JSON configs, preset experiments, and
//! one-shot subcommands.
//!
//! Exit codes: 0 success, 2 configuration or usage error, 3 computation or
//! I/O failure. `CHRONOSCOPE_THREADS` sizes the worker pool.

pub mod config;
pub mod output;
pub mod run;
pub mod stats;

use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

pub use config::{ConfigError, Experiment, ExperimentConfig, Plan};

use config::{CiMethodSpec, CiSpec, InitialStateSpec, ModelSpec, QecSpec, SdoSpec, TheoremSpec};
use crate::qec::CodeName;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_COMPUTE: i32 = 3;
pub const THREADS_ENV: &str = "CHRONOSCOPE_THREADS";

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Compute(crate::Error),
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Compute(_) | CliError::Io(_) => EXIT_COMPUTE,
        }
    }

    pub fn io(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Compute(e) => write!(f, "computation failed: {e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        CliError::Compute(e)
    }
}

#[derive(Parser, Debug)]
#[command(name = "chronoscope", version, about = "Causal influence and arrow-of-time fields on small qubit chains")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run a preset experiment and write its outputs.
    Run {
        experiment: Experiment,
        #[command(flatten)]
        common: Common,
    },
    /// Field over the model and state of a config file.
    AotField {
        #[command(flatten)]
        common: Common,
    },
    /// Evolve for T and print energy, <Z> and site entropies.
    Evolve {
        #[command(flatten)]
        common: Common,
    },
    /// Influence of one site on another.
    Ci {
        #[arg(long)]
        source: Option<usize>,
        #[arg(long)]
        target: Option<usize>,
        #[arg(long)]
        tau: Option<f64>,
        /// Also estimate by Monte Carlo with this many samples.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Sector conditions on the engineered acausal state.
    TheoremCheck {
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long)]
        q: Option<usize>,
        #[arg(long)]
        x: Option<usize>,
        #[arg(long = "x-prime")]
        x_prime: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Error-corrected influence table for a code.
    Qec {
        /// `five-qubit-blocks:K`, `iceberg:K` or `repetition-x:N`.
        #[arg(long, value_parser = parse_code)]
        code: Option<CodeName>,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long = "h-z")]
        h_z: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Two-time correlators from the ancilla register.
    Sdo {
        /// Comma-separated sites of the first region.
        #[arg(long, value_parser = parse_sites)]
        a: Option<Sites>,
        #[arg(long = "t-a")]
        t_a: Option<f64>,
        #[arg(long, value_parser = parse_sites)]
        b: Option<Sites>,
        #[arg(long = "t-b")]
        t_b: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Names and one-line descriptions of the presets.
    ListExperiments,
}

/// Flags shared by every subcommand; each overrides the config file.
#[derive(Args, Debug, Default, Clone)]
pub struct Common {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long = "n")]
    pub n: Option<usize>,
    /// Window length.
    #[arg(long = "T")]
    pub duration: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    /// `ising:J,HX,HZ` or `pxp`.
    #[arg(long, value_parser = parse_model)]
    pub model: Option<ModelSpec>,
    /// A product label such as `0+01`, `neel`, or `random:SEED`.
    #[arg(long, value_parser = parse_state)]
    pub state: Option<InitialStateSpec>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long = "no-svg")]
    pub no_svg: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sites(pub Vec<usize>);

fn parse_sites(s: &str) -> Result<Sites, String> {
    s.split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|e| format!("bad site {p:?}: {e}")))
        .collect::<Result<_, _>>()
        .map(Sites)
}

fn parse_code(s: &str) -> Result<CodeName, String> {
    let (family, size) = s.split_once(':').ok_or("expected FAMILY:SIZE")?;
    let size: usize = size.parse().map_err(|e| format!("bad size: {e}"))?;
    match family {
        "five-qubit-blocks" => Ok(CodeName::FiveQubitBlocks(size)),
        "iceberg" => Ok(CodeName::Iceberg(size)),
        "repetition-x" => Ok(CodeName::RepetitionX(size)),
        _ => Err(format!("unknown code family {family:?}")),
    }
}

fn parse_model(s: &str) -> Result<ModelSpec, String> {
    if s == "pxp" {
        return Ok(ModelSpec::Pxp);
    }
    let rest = s.strip_prefix("ising:").ok_or("expected `pxp` or `ising:J,HX,HZ`")?;
    let v = rest
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("bad coupling {p:?}: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    match v[..] {
        [j, hx, hz] => Ok(ModelSpec::Ising { j, hx, hz }),
        _ => Err("ising takes three couplings J,HX,HZ".into()),
    }
}

fn parse_state(s: &str) -> Result<InitialStateSpec, String> {
    if s == "neel" {
        return Ok(InitialStateSpec::Neel);
    }
    if let Some(seed) = s.strip_prefix("random:") {
        return Ok(InitialStateSpec::Random { seed: seed.parse().map_err(|e| format!("bad seed: {e}"))? });
    }
    Ok(InitialStateSpec::Product { label: s.to_string() })
}

/// Loads the config file (or the preset for `fallback`) and applies flags.
fn load(common: &Common, fallback: Option<Experiment>) -> Result<(ExperimentConfig, Option<String>), CliError> {
    let (mut cfg, source) = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            let cfg = ExperimentConfig::from_json(&text).map_err(|e| anchored(path, e))?;
            (cfg, Some(text))
        }
        None => match fallback {
            Some(exp) => (ExperimentConfig::new(exp), None),
            None => return Err(CliError::Config("--config is required here".into())),
        },
    };
    if common.n.is_some() {
        cfg.n_qubits = common.n;
    }
    if common.duration.is_some() {
        cfg.duration = common.duration;
        cfg.n_steps = None;
    }
    if common.dt.is_some() {
        cfg.dt = common.dt;
    }
    if common.steps.is_some() {
        cfg.n_steps = common.steps;
    }
    if let Some(m) = &common.model {
        cfg.model = Some(m.clone());
    }
    if let Some(s) = &common.state {
        cfg.initial_state = Some(s.clone());
    }
    if common.tol.is_some() {
        cfg.tolerance = common.tol;
    }
    if common.out.is_some() || common.no_svg {
        let mut o = cfg.output.take().unwrap_or_default();
        if let Some(d) = &common.out {
            o.dir = d.clone();
        }
        o.svg &= !common.no_svg;
        cfg.output = Some(o);
    }
    Ok((cfg, source))
}

fn anchored(path: &Path, e: ConfigError) -> CliError {
    CliError::Config(format!("{}: {e}", path.display()))
}

fn resolve(cfg: &ExperimentConfig, source: Option<&str>, common: &Common) -> Result<Plan, CliError> {
    cfg.resolve_with_source(source).map_err(|e| match &common.config {
        Some(p) => anchored(p, e),
        None => CliError::Config(e.to_string()),
    })
}

fn check_field(plan: &Plan) -> Result<(), CliError> {
    if plan.n_steps == 0 {
        return Err(CliError::Config("a field needs at least one step; set n_steps or duration".into()));
    }
    if matches!(plan.ci_method, CiMethodSpec::MonteCarlo { .. }) {
        return Err(CliError::Config("fields are built from exact influences".into()));
    }
    Ok(())
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("json"));
}

/// Either writes a full output set (when `--out` is given) or prints the report.
fn report_or_run(plan: &Plan, common: &Common, report: impl FnOnce(&Plan) -> crate::Result<Value>) -> Result<(), CliError> {
    if common.out.is_some() {
        let o = run::run_plan(plan)?;
        print_json(&o.summary);
    } else {
        print_json(&report(plan)?);
    }
    Ok(())
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { experiment, common } => {
            let (cfg, src) = load(&common, Some(experiment))?;
            if cfg.experiment != experiment {
                return Err(CliError::Config(format!(
                    "config describes {}, not {experiment}",
                    cfg.experiment
                )));
            }
            let plan = resolve(&cfg, src.as_deref(), &common)?;
            if plan.experiment.is_field() {
                check_field(&plan)?;
            }
            let o = run::run_plan(&plan)?;
            print_json(&o.summary);
        }
        Command::AotField { common } => {
            let (cfg, src) = load(&common, None)?;
            if !cfg.experiment.is_field() {
                return Err(CliError::Config(format!("{} has no field; use `run`", cfg.experiment)));
            }
            let plan = resolve(&cfg, src.as_deref(), &common)?;
            check_field(&plan)?;
            let o = run::run_plan(&plan)?;
            print_json(&o.summary);
        }
        Command::Evolve { common } => {
            let (cfg, src) = load(&common, Some(Experiment::Custom))?;
            let plan = resolve(&cfg, src.as_deref(), &common)?;
            print_json(&run::evolve_report(&plan)?);
        }
        Command::Ci { source, target, tau, samples, seed, common } => {
            let (mut cfg, src) = load(&common, Some(Experiment::Custom))?;
            let mut ci = cfg.ci.clone().unwrap_or(CiSpec { source: 0, target: 1, tau: cfg.dt.unwrap_or(config::DEFAULT_DT) });
            ci.source = source.unwrap_or(ci.source);
            ci.target = target.unwrap_or(ci.target);
            ci.tau = tau.unwrap_or(ci.tau);
            cfg.ci = Some(ci);
            if let Some(samples) = samples {
                cfg.ci_method = Some(CiMethodSpec::MonteCarlo { samples, seed });
            }
            let plan = resolve(&cfg, src.as_deref(), &common)?;
            print_json(&run::ci_report(&plan)?);
        }
        Command::TheoremCheck { tau, q, x, x_prime, common } => {
            let (mut cfg, src) = load(&common, Some(Experiment::Theorem))?;
            let mut t = cfg.theorem.clone().unwrap_or_else(TheoremSpec::default);
            t.tau = tau.unwrap_or(t.tau);
            t.q = q.unwrap_or(t.q);
            t.x = x.unwrap_or(t.x);
            t.x_prime = x_prime.unwrap_or(t.x_prime);
            if let Some(tol) = common.tol {
                t.tolerance = tol;
            }
            cfg.theorem = Some(t);
            let plan = resolve(&cfg, src.as_deref(), &common)?;
            report_or_run(&plan, &common, run::theorem_report)?;
        }
        Command::Qec { code, tau, h_z, common } => {
            let (mut cfg, src) = load(&common, Some(Experiment::Qec))?;
            let mut q = cfg.qec.clone().unwrap_or_else(QecSpec::default);
            q.code = code.unwrap_or(q.code);
            q.tau = tau.unwrap_or(q.tau);
            q.h_z = h_z.unwrap_or(q.h_z);
            cfg.qec = Some(q);
            let plan = resolve(&cfg, src.as_deref(), &common)?;
            report_or_run(&plan, &common, run::qec_report)?;
        }
        Command::Sdo { a, t_a, b, t_b, common } => {
            let (mut cfg, src) = load(&common, Some(Experiment::Sdo))?;
            let mut s = cfg.sdo.clone().unwrap_or_else(SdoSpec::default);
            if let Some(Sites(v)) = a {
                s.a = v;
            }
            if let Some(Sites(v)) = b {
                s.b = v;
            }
            s.t_a = t_a.unwrap_or(s.t_a);
            s.t_b = t_b.unwrap_or(s.t_b);
            cfg.sdo = Some(s);
            let plan = resolve(&cfg, src.as_deref(), &common)?;
            report_or_run(&plan, &common, run::sdo_report)?;
        }
        Command::ListExperiments => {
            for e in Experiment::ALL {
                println!("{:<14} {}", e.name(), e.description());
            }
        }
    }
    Ok(())
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
    // a second call in the same process fails harmlessly
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Parses `args`, runs, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match configure_threads().and_then(|_| execute(cli)) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("chronoscope: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flag_parsers() {
        assert_eq!(parse_code("iceberg:2"), Ok(CodeName::Iceberg(2)));
        assert!(parse_code("steane:1").is_err());
        assert_eq!(parse_model("ising:1,0.01,-0.21"), Ok(config::FIG_ISING));
        assert!(parse_model("ising:1,2").is_err());
        assert_eq!(parse_state("neel"), Ok(InitialStateSpec::Neel));
        assert_eq!(parse_state("random:4"), Ok(InitialStateSpec::Random { seed: 4 }));
        assert_eq!(parse_sites("0, 2"), Ok(Sites(vec![0, 2])));
    }

    #[test]
    fn flags_override_presets() {
        let c = Common { n: Some(4), duration: Some(0.1), no_svg: true, ..Default::default() };
        let (cfg, _) = load(&c, Some(Experiment::IsingFringe)).unwrap();
        let plan = cfg.resolve().unwrap();
        assert_eq!((plan.n, plan.n_steps, plan.output.svg), (4, 20, false));
        assert_eq!(plan.initial, InitialStateSpec::BackwardEvolved { label: "0000".into(), time: 0.05 });
    }

    #[test]
    fn usage_errors_exit_with_config_code() {
        assert_eq!(main_with_args(["chronoscope", "run", "nonsense"]), EXIT_CONFIG);
        assert_eq!(main_with_args(["chronoscope", "aot-field"]), EXIT_CONFIG);
        assert_eq!(main_with_args(["chronoscope", "list-experiments"]), EXIT_OK);
    }
}
