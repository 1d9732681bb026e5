//! Experiment configuration: JSON documents, defaults per experiment, and
//! validation into a fully resolved [`Plan`].

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::hamlib::{build_ising, build_pxp, neel_state, Hamiltonian};
use crate::qcore::{PauliString, StateVector};
use crate::qec::CodeName;
use crate::C64;

pub const DEFAULT_DT: f64 = 0.005;
pub const DEFAULT_TOLERANCE: f64 = 1e-12;
pub const FIG_ISING: ModelSpec = ModelSpec::Ising { j: 1.0, hx: 0.01, hz: -0.21 };

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    IsingFringe,
    TwoArrows,
    PxpScars,
    Wavepacket,
    Theorem,
    Qec,
    Sdo,
    Custom,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::IsingFringe,
        Experiment::TwoArrows,
        Experiment::PxpScars,
        Experiment::Wavepacket,
        Experiment::Theorem,
        Experiment::Qec,
        Experiment::Sdo,
        Experiment::Custom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::IsingFringe => "ising-fringe",
            Experiment::TwoArrows => "two-arrows",
            Experiment::PxpScars => "pxp-scars",
            Experiment::Wavepacket => "wavepacket",
            Experiment::Theorem => "theorem",
            Experiment::Qec => "qec",
            Experiment::Sdo => "sdo",
            Experiment::Custom => "custom",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Experiment::IsingFringe => "Ising chain evolved back by T/2 then forward: low-entropy fringe at T/2",
            Experiment::TwoArrows => "left half unevolved, right half evolved back by T: opposite arrows",
            Experiment::PxpScars => "PXP chain from the Neel state: periodic revivals",
            Experiment::Wavepacket => "single-magnon packet crossing an Ising chain",
            Experiment::Theorem => "engineered acausal Ising state and its single branches",
            Experiment::Qec => "error-corrected influence of a stabilizer code",
            Experiment::Sdo => "two-time correlators from the ancilla register",
            Experiment::Custom => "field over a user-specified model and state",
        }
    }

    /// Experiments whose main output is an arrow-of-time field.
    pub fn is_field(self) -> bool {
        matches!(
            self,
            Experiment::IsingFringe
                | Experiment::TwoArrows
                | Experiment::PxpScars
                | Experiment::Wavepacket
                | Experiment::Custom
        )
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelSpec {
    /// `j sum XX + hx sum X + hz sum Z`, open chain.
    Ising { j: f64, hx: f64, hz: f64 },
    Pxp,
    /// Explicit Pauli terms, e.g. `{"coeff": 0.5, "string": "XXI"}`.
    Pauli { terms: Vec<PauliTerm> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PauliTerm {
    pub coeff: f64,
    pub string: String,
}

impl ModelSpec {
    pub fn build(&self, n: usize) -> crate::Result<Hamiltonian> {
        match self {
            ModelSpec::Ising { j, hx, hz } => build_ising(n, *j, *hx, *hz),
            ModelSpec::Pxp => build_pxp(n),
            ModelSpec::Pauli { terms } => {
                let parsed = terms
                    .iter()
                    .map(|t| Ok((t.coeff, PauliString::parse(&t.string)?)))
                    .collect::<crate::Result<Vec<_>>>()?;
                Hamiltonian::new(n, parsed)
            }
        }
    }

    /// Same model on a sub-chain of `n` sites; explicit Pauli models do not restrict.
    fn on_sites(&self, n: usize) -> Option<crate::Result<Hamiltonian>> {
        match self {
            ModelSpec::Pauli { .. } => None,
            m => Some(m.build(n)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialStateSpec {
    /// Computational / X-basis label over `0 1 + -`.
    Product { label: String },
    Neel,
    /// Product state evolved backwards by `time`.
    BackwardEvolved { label: String, time: f64 },
    /// Left half evolved forward by `forward`, right half backward by
    /// `backward`, each under the model restricted to its half.
    TwoSided { label: String, forward: f64, backward: f64 },
    /// Gaussian single-magnon packet, centred on `center` a `time` after
    /// the window opens.
    Wavepacket { center: f64, width: f64, momentum: f64, time: f64 },
    /// Encoded logical amplitudes, `[re, im]` pairs, logical qubit 0 first.
    Encoded { code: CodeName, amplitudes: Vec<[f64; 2]> },
    /// Haar-random state from a seed.
    Random { seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CiMethodSpec {
    Exact,
    MonteCarlo { samples: usize, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_out_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_true")]
    pub svg: bool,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("chronoscope-out")
}

fn default_true() -> bool {
    true
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec { dir: default_out_dir(), svg: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TheoremSpec {
    pub tau: f64,
    pub q: usize,
    pub x: usize,
    pub x_prime: usize,
    pub tolerance: f64,
}

impl Default for TheoremSpec {
    fn default() -> Self {
        TheoremSpec { tau: 0.3, q: 3, x: 2, x_prime: 1, tolerance: 1e-10 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QecSpec {
    pub code: CodeName,
    /// Logical evolution time for the kernel route.
    #[serde(default)]
    pub tau: f64,
    /// Transverse field on the logical chain.
    #[serde(default)]
    pub h_z: f64,
}

impl Default for QecSpec {
    fn default() -> Self {
        QecSpec { code: CodeName::FiveQubitBlocks(1), tau: 0.0, h_z: 0.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SdoSpec {
    pub a: Vec<usize>,
    pub t_a: f64,
    pub b: Vec<usize>,
    pub t_b: f64,
}

impl Default for SdoSpec {
    fn default() -> Self {
        SdoSpec { a: vec![0], t_a: 0.0, b: vec![1], t_b: 0.5 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CiSpec {
    pub source: usize,
    pub target: usize,
    pub tau: f64,
}

/// The on-disk document. Everything but `experiment` is optional and filled
/// from the experiment's defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_qubits: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_steps: Option<usize>,
    /// Window length `T`; `n_steps` wins when both are given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<InitialStateSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ci_method: Option<CiMethodSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theorem: Option<TheoremSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qec: Option<QecSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sdo: Option<SdoSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ci: Option<CiSpec>,
}

/// A configuration problem, anchored to a line of the source when known.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl ConfigError {
    pub fn new(message: impl Into<String>) -> Self {
        ConfigError { line: None, column: None, message: message.into() }
    }

    fn at_key(source: Option<&str>, key: &str, message: impl Into<String>) -> Self {
        let line = source.and_then(|s| {
            let quoted = format!("\"{key}\"");
            s.lines().position(|l| l.contains(&quoted)).map(|i| i + 1)
        });
        ConfigError { line, column: None, message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.column) {
            (Some(l), Some(c)) => write!(f, "line {l}, column {c}: {}", self.message),
            (Some(l), None) => write!(f, "line {l}: {}", self.message),
            _ => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        ExperimentConfig {
            experiment,
            n_qubits: None,
            model: None,
            dt: None,
            n_steps: None,
            duration: None,
            initial_state: None,
            ci_method: None,
            tolerance: None,
            output: None,
            theorem: None,
            qec: None,
            sdo: None,
            ci: None,
        }
    }

    pub fn from_json(source: &str) -> Result<Self, ConfigError> {
        if source.trim().is_empty() {
            return Err(ConfigError { line: Some(1), column: Some(1), message: "empty configuration".into() });
        }
        serde_json::from_str(source).map_err(|e| ConfigError {
            line: Some(e.line()),
            column: Some(e.column()),
            message: e.to_string(),
        })
    }

    /// Parses and resolves in one go, so semantic errors can point at lines.
    pub fn parse_and_resolve(source: &str) -> Result<(Self, Plan), ConfigError> {
        let cfg = Self::from_json(source)?;
        let plan = cfg.resolve_with_source(Some(source))?;
        Ok((cfg, plan))
    }

    pub fn resolve(&self) -> Result<Plan, ConfigError> {
        self.resolve_with_source(None)
    }

    /// As [`ExperimentConfig::resolve`], anchoring errors in `src` when given.
    pub fn resolve_with_source(&self, src: Option<&str>) -> Result<Plan, ConfigError> {
        let err = |key: &str, msg: String| ConfigError::at_key(src, key, msg);
        let exp = self.experiment;
        let d = defaults(exp);
        let n = if exp == Experiment::Qec {
            let code = self.qec.clone().unwrap_or_default().code;
            let (cn, _) = code_size(code).map_err(|e| err("code", e))?;
            if self.n_qubits.is_some_and(|n| n != cn) {
                return Err(err("n_qubits", format!("{code} has {cn} physical qubits")));
            }
            if self.model.is_some() {
                return Err(err("model", "qec evolves under the logical XX chain; set qec.h_z instead".into()));
            }
            cn
        } else {
            self.n_qubits.or(d.n).ok_or_else(|| err("n_qubits", format!("{exp} needs n_qubits")))?
        };
        if !(1..=crate::qec::CODE_QUBIT_LIMIT).contains(&n) {
            return Err(err("n_qubits", format!("n_qubits must be in 1..={}, got {n}", crate::qec::CODE_QUBIT_LIMIT)));
        }
        let model = self.model.clone().or(d.model).ok_or_else(|| err("model", format!("{exp} needs a model")))?;
        let dt = self.dt.unwrap_or(d.dt);
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(err("dt", format!("dt must be positive, got {dt}")));
        }
        let duration = self.duration.unwrap_or(d.duration);
        if !(duration >= 0.0 && duration.is_finite()) {
            return Err(err("duration", format!("duration must be non-negative, got {duration}")));
        }
        let n_steps = match self.n_steps {
            Some(s) => s,
            None => (duration / dt).round() as usize,
        };
        if exp.is_field() && exp != Experiment::Custom && n_steps == 0 {
            return Err(err("n_steps", "a field needs at least one step".into()));
        }
        let window = n_steps as f64 * dt;
        let initial = match &self.initial_state {
            Some(s) => s.clone(),
            None => default_state(exp, n, window).ok_or_else(|| err("initial_state", format!("{exp} needs initial_state")))?,
        };
        let ci_method = self.ci_method.unwrap_or(CiMethodSpec::Exact);
        if let CiMethodSpec::MonteCarlo { samples, .. } = ci_method {
            if exp.is_field() && exp != Experiment::Custom {
                return Err(err("ci_method", "fields are built from exact influences; monte-carlo applies to `ci` only".into()));
            }
            if samples < 10 {
                return Err(err("samples", format!("monte-carlo needs at least 10 samples, got {samples}")));
            }
        }
        let tolerance = self.tolerance.unwrap_or(DEFAULT_TOLERANCE);
        if !(tolerance > 1e-14 && tolerance < 1e-4) {
            return Err(err("tolerance", format!("tolerance must lie in (1e-14, 1e-4), got {tolerance:e}")));
        }
        let plan = Plan {
            experiment: exp,
            n,
            model,
            dt,
            n_steps,
            initial,
            ci_method,
            tolerance,
            output: self.output.clone().unwrap_or_default(),
            theorem: self.theorem.clone().unwrap_or_default(),
            qec: self.qec.clone().unwrap_or_default(),
            sdo: self.sdo.clone().unwrap_or_default(),
            ci: self.ci.clone().unwrap_or(CiSpec { source: 0, target: 1.min(n - 1), tau: dt }),
        };
        plan.check(src)?;
        Ok(plan)
    }
}

struct Defaults {
    n: Option<usize>,
    model: Option<ModelSpec>,
    dt: f64,
    duration: f64,
}

fn defaults(exp: Experiment) -> Defaults {
    let fig = Defaults { n: Some(8), model: Some(FIG_ISING), dt: DEFAULT_DT, duration: 0.3 };
    match exp {
        Experiment::IsingFringe | Experiment::TwoArrows => fig,
        Experiment::PxpScars => Defaults { n: Some(8), model: Some(ModelSpec::Pxp), dt: 0.02, duration: 10.0 },
        Experiment::Wavepacket => {
            Defaults { n: Some(8), model: Some(ModelSpec::Ising { j: 0.5, hx: 0.0, hz: -1.0 }), dt: 0.02, duration: 4.0 }
        }
        Experiment::Theorem => Defaults {
            n: Some(6),
            model: Some(ModelSpec::Ising { j: 1.0, hx: 0.0, hz: 0.0 }),
            dt: DEFAULT_DT,
            duration: 0.0,
        },
        Experiment::Qec => Defaults { n: Some(5), model: Some(ModelSpec::Pxp), dt: DEFAULT_DT, duration: 0.0 },
        Experiment::Sdo => Defaults { n: Some(4), model: Some(FIG_ISING), dt: DEFAULT_DT, duration: 0.0 },
        Experiment::Custom => Defaults { n: None, model: None, dt: DEFAULT_DT, duration: 0.0 },
    }
}

fn zeros(n: usize) -> String {
    "0".repeat(n)
}

fn default_state(exp: Experiment, n: usize, window: f64) -> Option<InitialStateSpec> {
    Some(match exp {
        Experiment::IsingFringe => InitialStateSpec::BackwardEvolved { label: zeros(n), time: window / 2.0 },
        Experiment::TwoArrows => InitialStateSpec::TwoSided { label: zeros(n), forward: 0.0, backward: window },
        Experiment::PxpScars => InitialStateSpec::Neel,
        Experiment::Wavepacket => InitialStateSpec::Wavepacket {
            center: (n as f64 - 1.0) / 2.0,
            width: 1.0,
            momentum: -std::f64::consts::FRAC_PI_2,
            time: window / 2.0,
        },
        Experiment::Sdo | Experiment::Qec => InitialStateSpec::Random { seed: 7 },
        Experiment::Theorem => InitialStateSpec::Product { label: zeros(n) },
        Experiment::Custom => return None,
    })
}

/// A validated configuration with every default applied.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Plan {
    pub experiment: Experiment,
    pub n: usize,
    pub model: ModelSpec,
    pub dt: f64,
    pub n_steps: usize,
    pub initial: InitialStateSpec,
    pub ci_method: CiMethodSpec,
    pub tolerance: f64,
    pub output: OutputSpec,
    pub theorem: TheoremSpec,
    pub qec: QecSpec,
    pub sdo: SdoSpec,
    pub ci: CiSpec,
}

impl Plan {
    pub fn for_experiment(exp: Experiment) -> Result<Plan, ConfigError> {
        ExperimentConfig::new(exp).resolve()
    }

    pub fn duration(&self) -> f64 {
        self.n_steps as f64 * self.dt
    }

    fn check(&self, src: Option<&str>) -> Result<(), ConfigError> {
        let err = |key: &str, msg: String| ConfigError::at_key(src, key, msg);
        let n = self.n;
        let label_ok = |l: &str, key: &str| {
            if l.chars().count() != n {
                return Err(err(key, format!("label {l:?} has {} sites, expected {n}", l.chars().count())));
            }
            StateVector::from_label(l).map(|_| ()).map_err(|e| err(key, e.to_string()))
        };
        match &self.initial {
            InitialStateSpec::Product { label }
            | InitialStateSpec::BackwardEvolved { label, .. }
            | InitialStateSpec::TwoSided { label, .. } => label_ok(label, "label")?,
            InitialStateSpec::Wavepacket { width, .. } if *width <= 0.0 => {
                return Err(err("width", format!("wavepacket width must be positive, got {width}")))
            }
            InitialStateSpec::Encoded { code, amplitudes } => {
                let (cn, ck) = code_size(*code).map_err(|e| err("code", e))?;
                if cn != n {
                    return Err(err("code", format!("{code} has {cn} physical qubits, n_qubits is {n}")));
                }
                if amplitudes.len() != 1 << ck {
                    return Err(err("amplitudes", format!("{code} needs {} amplitudes", 1usize << ck)));
                }
            }
            _ => {}
        }
        if let InitialStateSpec::TwoSided { .. } = self.initial {
            if n < 2 || matches!(self.model, ModelSpec::Pauli { .. }) {
                return Err(err("initial_state", "two-sided preparation needs a chain model and n >= 2".into()));
            }
        }
        if let ModelSpec::Pauli { terms } = &self.model {
            for t in terms {
                let p = PauliString::parse(&t.string).map_err(|e| err("string", e.to_string()))?;
                if p.n_sites() != n {
                    return Err(err("string", format!("term {:?} has {} sites, expected {n}", t.string, p.n_sites())));
                }
            }
        }
        self.model.build(n).map_err(|e| err("model", e.to_string()))?;
        match self.experiment {
            Experiment::Theorem => {
                let t = &self.theorem;
                if [t.q, t.x, t.x_prime].iter().any(|&s| s >= n) {
                    return Err(err("theorem", format!("theorem sites must be below {n}")));
                }
            }
            Experiment::Sdo => {
                let s = &self.sdo;
                if s.a.iter().chain(&s.b).any(|&x| x >= n) {
                    return Err(err("sdo", format!("region sites must be below {n}")));
                }
            }
            Experiment::Qec => {
                code_size(self.qec.code).map_err(|e| err("code", e))?;
            }
            _ => {}
        }
        if self.ci.source >= n || self.ci.target >= n {
            return Err(err("ci", format!("influence sites must be below {n}")));
        }
        Ok(())
    }

    pub fn hamiltonian(&self) -> crate::Result<Hamiltonian> {
        self.model.build(self.n)
    }

    /// The state at the start of the window.
    pub fn initial_state(&self) -> crate::Result<StateVector> {
        let h = self.hamiltonian()?;
        let tol = self.tolerance;
        let evolve = |s: &StateVector, h: &Hamiltonian, t: f64| -> crate::Result<StateVector> {
            if t == 0.0 {
                return Ok(s.clone());
            }
            Ok(crate::hamlib::evolve(s, h, t, tol)?.state)
        };
        match &self.initial {
            InitialStateSpec::Product { label } => StateVector::from_label(label),
            InitialStateSpec::Neel => Ok(neel_state(self.n)),
            InitialStateSpec::BackwardEvolved { label, time } => evolve(&StateVector::from_label(label)?, &h, -time),
            InitialStateSpec::TwoSided { label, forward, backward } => {
                let half = self.n / 2;
                let (l, r) = label.split_at(half);
                let hl = self.model.on_sites(half).expect("checked")?;
                let hr = self.model.on_sites(self.n - half).expect("checked")?;
                let left = if half >= 2 { evolve(&StateVector::from_label(l)?, &hl, *forward)? } else { StateVector::from_label(l)? };
                let right =
                    if self.n - half >= 2 { evolve(&StateVector::from_label(r)?, &hr, -backward)? } else { StateVector::from_label(r)? };
                Ok(kron(&left, &right))
            }
            InitialStateSpec::Wavepacket { center, width, momentum, time } => {
                evolve(&magnon_packet(self.n, *center, *width, *momentum)?, &h, -time)
            }
            InitialStateSpec::Encoded { code, amplitudes } => {
                let code = build_code(*code)?;
                let amps: Vec<C64> = amplitudes.iter().map(|[re, im]| C64::new(*re, *im)).collect();
                let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
                if norm == 0.0 {
                    return Err(crate::Error::InvalidArgument("encoded amplitudes are all zero".into()));
                }
                code.encode(&amps.iter().map(|a| a / norm).collect::<Vec<_>>())
            }
            InitialStateSpec::Random { seed } => {
                let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(*seed);
                Ok(StateVector::random(self.n, &mut rng))
            }
        }
    }
}

fn kron(a: &StateVector, b: &StateVector) -> StateVector {
    let amps = a.amplitudes().iter().flat_map(|x| b.amplitudes().iter().map(move |y| x * y)).collect();
    StateVector::new(a.n_qubits() + b.n_qubits(), amps).expect("dimensions match")
}

/// `sum_x exp(-(x - c)^2 / 4 w^2 + i k x) |0..1_x..0>`, normalized.
pub fn magnon_packet(n: usize, center: f64, width: f64, momentum: f64) -> crate::Result<StateVector> {
    let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
    for x in 0..n {
        let w = (-(x as f64 - center).powi(2) / (4.0 * width * width)).exp();
        amps[1 << (n - 1 - x)] = C64::from_polar(w, momentum * x as f64);
    }
    let mut s = StateVector::new(n, amps)?;
    if s.norm() == 0.0 {
        return Err(crate::Error::InvalidArgument("wavepacket has no weight on the chain".into()));
    }
    s.normalize();
    Ok(s)
}

pub fn build_code(name: CodeName) -> crate::Result<crate::qec::StabilizerCode> {
    use crate::qec::StabilizerCode;
    match name {
        CodeName::RepetitionX(n) => StabilizerCode::repetition_x(n),
        CodeName::FiveQubitBlocks(k) => StabilizerCode::five_qubit_blocks(k),
        CodeName::Iceberg(k) => StabilizerCode::iceberg(k),
    }
}

fn code_size(name: CodeName) -> Result<(usize, usize), String> {
    build_code(name).map(|c| (c.n, c.k)).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_resolve_for_every_experiment() {
        for exp in Experiment::ALL {
            let r = Plan::for_experiment(exp);
            if exp == Experiment::Custom {
                assert!(r.is_err());
            } else {
                let plan = r.unwrap();
                plan.initial_state().unwrap();
            }
        }
        let p = Plan::for_experiment(Experiment::TwoArrows).unwrap();
        assert_eq!((p.n, p.n_steps), (8, 60));
    }

    #[test]
    fn unknown_keys_and_syntax_errors_are_anchored() {
        let e = ExperimentConfig::from_json("{\n  \"experiment\": \"two-arrows\",\n  \"n_qbits\": 8\n}").unwrap_err();
        assert_eq!(e.line, Some(3));
        assert!(e.message.contains("n_qbits"));
        let e = ExperimentConfig::from_json("{\n \"experiment\": \"two-arrows\",\n").unwrap_err();
        assert!(e.line.is_some());
        assert!(ExperimentConfig::from_json("   ").is_err());
        let e = ExperimentConfig::from_json("{\"experiment\": \"ising-fringe\", \"model\": {\"kind\": \"ising\", \"j\": 1}}")
            .unwrap_err();
        assert!(e.message.contains("hx"));
    }

    #[test]
    fn semantic_errors_point_at_keys() {
        let src = "{\n  \"experiment\": \"ising-fringe\",\n  \"n_qubits\": 4,\n  \"dt\": -0.1\n}";
        let e = ExperimentConfig::parse_and_resolve(src).unwrap_err();
        assert_eq!(e.line, Some(4));
        let src = "{\n  \"experiment\": \"custom\",\n  \"n_qubits\": 3,\n  \"model\": {\"kind\": \"pxp\"},\n  \"n_steps\": 2,\n  \"initial_state\": {\"kind\": \"product\", \"label\": \"0101\"}\n}";
        let e = ExperimentConfig::parse_and_resolve(src).unwrap_err();
        assert_eq!(e.line, Some(6));
        let src = "{\"experiment\": \"ising-fringe\", \"ci_method\": {\"kind\": \"monte-carlo\", \"samples\": 100, \"seed\": 1}}";
        assert!(ExperimentConfig::parse_and_resolve(src).is_err());
    }

    #[test]
    fn round_trips_through_json() {
        let mut cfg = ExperimentConfig::new(Experiment::Custom);
        cfg.n_qubits = Some(3);
        cfg.model = Some(ModelSpec::Pauli {
            terms: vec![PauliTerm { coeff: 0.5, string: "XXI".into() }, PauliTerm { coeff: -1.0, string: "IZZ".into() }],
        });
        cfg.initial_state = Some(InitialStateSpec::Product { label: "0+1".into() });
        cfg.n_steps = Some(3);
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        let back = ExperimentConfig::from_json(&text).unwrap();
        assert_eq!(back, cfg);
        let plan = back.resolve().unwrap();
        assert_eq!(plan.hamiltonian().unwrap().terms().len(), 2);
    }

    #[test]
    fn two_sided_halves_are_evolved_separately() {
        let plan = Plan::for_experiment(Experiment::TwoArrows).unwrap();
        let s = plan.initial_state().unwrap();
        // left half untouched
        let rho = crate::qcore::dense::partial_trace(&s, &[0, 1, 2, 3]).unwrap();
        assert!((rho.purity().unwrap() - 1.0).abs() < 1e-12);
        assert!((rho.matrix()[(0, 0)].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn packet_is_a_single_excitation() {
        let s = magnon_packet(6, 2.5, 1.0, 0.3).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-12);
        let ones: f64 = s.amplitudes().iter().enumerate().filter(|(i, _)| i.count_ones() == 1).map(|(_, a)| a.norm_sqr()).sum();
        assert!((ones - 1.0).abs() < 1e-12);
    }
}
