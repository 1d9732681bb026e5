//! Experiment runners. Everything is computed before the first file is
//! written; the output set is rolled back on any later failure.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use super::config::{build_code, CiMethodSpec, Experiment, InitialStateSpec, Plan};
use super::output::{entropy_csv, field_records, field_svg, OutputSet};
use super::stats;
use super::CliError;
use crate::acausal::{acausal_branches, build_ising_acausal_state, theorem_check};
use crate::aot::{aot_field, AotField, SpacetimeLattice};
use crate::causal::{ci_exact_with_tol, ci_monte_carlo};
use crate::hamlib::evolve;
use crate::qcore::dense::{partial_trace, von_neumann_entropy};
use crate::qcore::{Pauli, PauliString, StateVector};
use crate::qec::{
    eci_exact, iceberg_self_influence, logical_to_logical_closed_form, phys_to_ancilla_closed_form, protected_eci,
    protected_states_513, rep_code_ci, rep_code_formulas, ChannelVariant, CodeName, EciSource, EciTarget, EciProblem,
    RecoveryChannel,
};
use crate::sdo::{correlator_table, direct_correlator_table, sdo_build, Region};
use crate::C64;

pub struct FieldRun {
    pub lattice: SpacetimeLattice,
    pub field: AotField,
}

pub fn compute_field(plan: &Plan) -> crate::Result<FieldRun> {
    let lattice = SpacetimeLattice::with_tolerance(
        plan.initial_state()?,
        plan.hamiltonian()?,
        plan.dt,
        plan.n_steps,
        plan.tolerance,
    )?;
    let field = aot_field(&lattice)?;
    Ok(FieldRun { lattice, field })
}

pub fn field_summary(plan: &Plan, run: &FieldRun) -> Value {
    let f = &run.field;
    let base = json!({ "max_equal_time_ci": stats::max_equal_time_ci(f) });
    let extra = match plan.experiment {
        Experiment::IsingFringe => serde_json::to_value(stats::fringe_summary(f)),
        Experiment::TwoArrows => serde_json::to_value(stats::two_arrows_summary(f)),
        Experiment::PxpScars => serde_json::to_value(stats::revival_summary(f, plan.dt)),
        Experiment::Wavepacket => serde_json::to_value(stats::packet_summary(&run.lattice, f)),
        _ => Ok(Value::Null),
    }
    .expect("summaries serialize");
    merge(base, extra)
}

fn merge(mut a: Value, b: Value) -> Value {
    if let (Some(m), Value::Object(o)) = (a.as_object_mut(), b) {
        m.extend(o);
    }
    a
}

/// Notes on where defaults were scaled down to desk size.
fn substitutions(plan: &Plan) -> Vec<String> {
    let mut out = Vec::new();
    if plan.experiment.is_field() && plan.n <= 8 {
        out.push(format!("chain of {} sites, exact state vectors", plan.n));
    }
    if plan.experiment == Experiment::PxpScars {
        out.push(format!("window sampled at dt = {} over T = {}", plan.dt, plan.duration()));
    }
    if plan.experiment == Experiment::Wavepacket {
        out.push("single-magnon packet on an Ising chain; centred at mid-window".into());
    }
    out
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    experiment: Experiment,
    plan: &'a Plan,
    seeds: BTreeMap<&'static str, u64>,
    tolerances: BTreeMap<&'static str, f64>,
    substitutions: Vec<String>,
    threads: usize,
    outputs: Vec<String>,
    summary: &'a Value,
    wall_time_seconds: f64,
}

fn seeds(plan: &Plan) -> BTreeMap<&'static str, u64> {
    let mut s = BTreeMap::new();
    if let InitialStateSpec::Random { seed } = plan.initial {
        s.insert("initial_state", seed);
    }
    if let CiMethodSpec::MonteCarlo { seed, .. } = plan.ci_method {
        s.insert("monte_carlo", seed);
    }
    s
}

/// Result of one `run`: the summary also printed to stdout, plus the files.
#[derive(Debug)]
pub struct RunOutcome {
    pub summary: Value,
    pub files: Vec<PathBuf>,
}

pub fn run_plan(plan: &Plan) -> Result<RunOutcome, CliError> {
    let start = Instant::now();
    let mut artifacts: Vec<(String, Vec<u8>)> = Vec::new();
    let json_bytes = |v: &Value| {
        let mut b = serde_json::to_vec_pretty(v).expect("json");
        b.push(b'\n');
        b
    };
    let summary = match plan.experiment {
        e if e.is_field() => {
            let run = compute_field(plan)?;
            let summary = field_summary(plan, &run);
            let mut records = serde_json::to_vec_pretty(&field_records(&run.field, plan.dt)).expect("json");
            records.push(b'\n');
            artifacts.push(("field.json".into(), records));
            artifacts.push(("entropy.csv".into(), entropy_csv(&run.field, plan.dt).into_bytes()));
            if plan.output.svg {
                let title = format!("{} n={} dt={} T={}", plan.experiment, plan.n, plan.dt, plan.duration());
                artifacts.push(("field.svg".into(), field_svg(&run.field, plan.dt, &title).into_bytes()));
            }
            summary
        }
        Experiment::Theorem => theorem_report(plan)?,
        Experiment::Qec => qec_report(plan)?,
        Experiment::Sdo => sdo_report(plan)?,
        _ => unreachable!("field experiments handled above"),
    };
    artifacts.push(("summary.json".into(), json_bytes(&summary)));

    let mut set = OutputSet::create(&plan.output.dir).map_err(CliError::io)?;
    for (name, bytes) in &artifacts {
        set.write(name, bytes).map_err(CliError::io)?;
    }
    let mut outputs: Vec<String> = artifacts.iter().map(|(n, _)| n.clone()).collect();
    outputs.push("manifest.json".into());
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        experiment: plan.experiment,
        plan,
        seeds: seeds(plan),
        tolerances: BTreeMap::from([
            ("evolution", plan.tolerance),
            ("theorem", plan.theorem.tolerance),
            ("psd", SDO_PSD_TOL),
        ]),
        substitutions: substitutions(plan),
        threads: rayon::current_num_threads(),
        outputs,
        summary: &summary,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    };
    set.write_json("manifest.json", &manifest).map_err(CliError::io)?;
    Ok(RunOutcome { summary, files: set.commit() })
}

pub fn theorem_report(plan: &Plan) -> crate::Result<Value> {
    let t = &plan.theorem;
    let h = plan.hamiltonian()?;
    let state = build_ising_acausal_state(plan.n, t.tau, t.q, t.x, t.x_prime)?;
    let engineered = theorem_check(&state, t.q, t.x, &h, t.tau, t.tolerance)?;
    let branches = acausal_branches(plan.n, t.tau, t.q, t.x, t.x_prime)?
        .iter()
        .map(|b| theorem_check(b, t.q, t.x, &h, t.tau, t.tolerance))
        .collect::<crate::Result<Vec<_>>>()?;
    Ok(json!({
        "engineered": {
            "verdict": engineered.verdict,
            "ci": engineered.ci,
            "max_residual": engineered.max_residual(),
            "report": engineered,
        },
        "branches": branches.iter().map(|b| json!({
            "verdict": b.verdict,
            "ci": b.ci,
            "max_residual": b.max_residual(),
        })).collect::<Vec<_>>(),
    }))
}

fn logical_amplitudes(plan: &Plan, k: usize) -> crate::Result<Vec<C64>> {
    match &plan.initial {
        InitialStateSpec::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            Ok(StateVector::random(k, &mut rng).into_amplitudes())
        }
        InitialStateSpec::Encoded { amplitudes, .. } => {
            let v: Vec<C64> = amplitudes.iter().map(|[r, i]| C64::new(*r, *i)).collect();
            let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            Ok(v.into_iter().map(|a| a / norm).collect())
        }
        InitialStateSpec::Product { label } if label.chars().count() == k => {
            Ok(StateVector::from_label(label)?.into_amplitudes())
        }
        _ => Err(crate::Error::InvalidArgument(
            "qec states are random, encoded, or a product label over the logical qubits".into(),
        )),
    }
}

pub fn qec_report(plan: &Plan) -> crate::Result<Value> {
    let spec = &plan.qec;
    let code = build_code(spec.code)?;
    let logical = logical_amplitudes(plan, code.k)?;
    let state = code.encode(&logical)?;
    let h = code.logical_xx_chain(spec.h_z)?;
    let all: Vec<usize> = (0..code.k).collect();
    let bare = RecoveryChannel::new(code.clone(), ChannelVariant::Bare);
    let run = |variant, source: EciSource, target: EciTarget| {
        let ch = bare.with_variant(variant);
        eci_exact(&EciProblem {
            channel: &ch,
            state: &state,
            source: &source,
            target: &target,
            hamiltonian: &h,
            tau: spec.tau,
        })
    };
    let pairs = vec![
        run(ChannelVariant::Bare, EciSource::Logical(all.clone()), EciTarget::Logical(all.clone()))?,
        run(ChannelVariant::Dilated, EciSource::Logical(all.clone()), EciTarget::Ancilla)?,
        run(ChannelVariant::Bare, EciSource::Physical(0), EciTarget::Logical(all.clone()))?,
        run(ChannelVariant::Dilated, EciSource::Physical(0), EciTarget::Ancilla)?,
        run(ChannelVariant::Measured, EciSource::Physical(0), EciTarget::Ancilla)?,
    ];
    let mut out = json!({
        "code": spec.code,
        "n": code.n,
        "k": code.k,
        "tau": spec.tau,
        "h_z": spec.h_z,
        "pairs": pairs,
        "closed_forms_at_zero_time": {
            "logical_to_logical": logical_to_logical_closed_form(code.code_dim()),
            "logical_to_ancilla": 0.0,
            "physical_to_logical": 0.0,
            "physical_to_ancilla_pre": phys_to_ancilla_closed_form(code.ancilla_dim(), false),
            "physical_to_ancilla_post": phys_to_ancilla_closed_form(code.ancilla_dim(), true),
        },
    });
    let extra = match spec.code {
        CodeName::RepetitionX(3) => {
            let z = state.expectation(&code.logical_z[0]).re;
            json!({ "repetition": {
                "channel": rep_code_ci(logical[0], logical[1], 0)?,
                "closed_form": rep_code_formulas(z),
            }})
        }
        CodeName::Iceberg(k) => {
            let rows = [0.05, 0.1, 0.3]
                .iter()
                .map(|&dt| Ok(json!({ "dt": dt, "self_influence": iceberg_self_influence(k, dt, spec.h_z)?.value })))
                .collect::<crate::Result<Vec<_>>>()?;
            json!({ "iceberg": rows })
        }
        CodeName::FiveQubitBlocks(k @ 2..=3) => {
            let rows = protected_states_513(k, spec.tau)?
                .iter()
                .map(|p| Ok(json!({ "family": p.family, "eci": protected_eci(&p.state, k, spec.tau)?.value })))
                .collect::<crate::Result<Vec<_>>>()?;
            json!({ "protected_families": rows, "this_state": protected_eci(&state, k, spec.tau)?.value })
        }
        _ => Value::Null,
    };
    out = merge(out, extra);
    Ok(out)
}

const SDO_PSD_TOL: f64 = 1e-10;

pub fn sdo_report(plan: &Plan) -> crate::Result<Value> {
    let s = &plan.sdo;
    let state = plan.initial_state()?;
    let h = plan.hamiltonian()?;
    let a = Region { sites: s.a.clone(), time: s.t_a };
    let b = Region { sites: s.b.clone(), time: s.t_b };
    let sdo = sdo_build(&state, &h, &a, &b)?;
    let table = correlator_table(&sdo)?;
    let direct = direct_correlator_table(&state, &h, &a, &b)?;
    let deviation = table
        .iter()
        .zip(&direct)
        .map(|(x, y)| (x.re - y.re).hypot(x.im - y.im))
        .fold(0.0, f64::max);
    let tr = sdo.trace();
    Ok(json!({
        "a": a,
        "b": b,
        "ancillas": sdo.ancilla_count(),
        "trace": [tr.re, tr.im],
        "hermiticity_defect": sdo.hermiticity_defect(),
        "psd": sdo.is_psd(SDO_PSD_TOL),
        "max_deviation_from_direct": deviation,
        "correlators": table,
    }))
}

/// One influence value between `plan.ci.source` and `plan.ci.target`.
pub fn ci_report(plan: &Plan) -> crate::Result<Value> {
    let state = plan.initial_state()?;
    let h = plan.hamiltonian()?;
    let c = &plan.ci;
    let exact = ci_exact_with_tol(&state, &h, c.source, c.target, c.tau, plan.tolerance)?;
    let mut out = json!({ "source": c.source, "target": c.target, "tau": c.tau, "exact": exact });
    if let CiMethodSpec::MonteCarlo { samples, seed } = plan.ci_method {
        let mc = ci_monte_carlo(&state, &h, c.source, c.target, c.tau, samples, seed)?;
        let sigma = mc.stderr.unwrap_or(0.0);
        out["monte_carlo"] = serde_json::to_value(mc).expect("json");
        // floor for influences that vanish up to rounding
        out["deviation_in_stderr"] = json!((mc.value - exact.value).abs() / (sigma + 1e-15));
    }
    Ok(out)
}

/// State at the end of the window: energy, `<Z_x>` and site entropies.
pub fn evolve_report(plan: &Plan) -> crate::Result<Value> {
    let state = plan.initial_state()?;
    let h = plan.hamiltonian()?;
    let t = plan.duration();
    let r = evolve(&state, &h, t, plan.tolerance)?;
    let s = &r.state;
    let n = plan.n;
    let z: Vec<f64> = (0..n).map(|x| s.expectation(&PauliString::single(n, x, Pauli::Z)).re).collect();
    let entropy = (0..n)
        .map(|x| von_neumann_entropy(&partial_trace(s, &[x])?))
        .collect::<crate::Result<Vec<_>>>()?;
    Ok(json!({
        "t": t,
        "norm": s.norm(),
        "energy": h.energy(s),
        "z": z,
        "entropy": entropy,
    }))
}
