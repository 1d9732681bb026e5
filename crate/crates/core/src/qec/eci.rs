use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use super::recovery::{recovery_adjoint, ChannelVariant, RecoveryChannel, DENSE_CHANNEL_LIMIT};
use super::CodeName;
use crate::causal::design::single_qubit_cliffords;
use crate::causal::{InfluenceKernel, MomentCoefficients};
use crate::hamlib::{evolve_vec, evolved_dyads, Hamiltonian, DEFAULT_TOL};
use crate::qcore::dense::{partial_trace_operator, DenseOperator};
use crate::qcore::schmidt::{schmidt_split, SchmidtPair};
use crate::qcore::state::{inner, ZERO};
use crate::qcore::{Pauli, StateVector};
use crate::{Error, Result, C64};

/// Codespace membership tolerance on `|| Psi - Pi_0 Psi ||`.
pub const CODESPACE_TOL: f64 = 1e-10;

/// Allowed gap between the moment and channel routes.
pub const ROUTE_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "sites")]
pub enum EciSource {
    Physical(usize),
    /// Either one logical qubit or the whole register.
    Logical(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "sites")]
pub enum EciTarget {
    Logical(Vec<usize>),
    Ancilla,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelPair {
    LogicalToLogical,
    LogicalToAncilla,
    PhysicalToLogical,
    PhysicalToAncilla,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EciMethod {
    /// Closed forms and the Heisenberg-kernel route.
    Moment,
    /// Kicks averaged over a unitary design, recovery applied branch by branch.
    Channel,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EciValue {
    pub value: f64,
    pub channel_pair: ChannelPair,
    pub measured: bool,
    pub method: EciMethod,
    /// `max_alpha tr(R^dag[sigma]^2) / tr(sigma^2)` for the readout
    /// observables, when the kernel route ran on a code small enough to check.
    pub adjoint_norm: Option<f64>,
}

/// One influence evaluation: the state is kicked at `source`, evolved for
/// `tau` under a logical Hamiltonian, recovered, then read at `target`.
#[derive(Clone, Copy, Debug)]
pub struct EciProblem<'a> {
    pub channel: &'a RecoveryChannel,
    pub state: &'a StateVector,
    pub source: &'a EciSource,
    pub target: &'a EciTarget,
    pub hamiltonian: &'a Hamiltonian,
    pub tau: f64,
}

impl EciProblem<'_> {
    fn pair(&self) -> ChannelPair {
        match (self.source, self.target) {
            (EciSource::Logical(_), EciTarget::Logical(_)) => ChannelPair::LogicalToLogical,
            (EciSource::Logical(_), EciTarget::Ancilla) => ChannelPair::LogicalToAncilla,
            (EciSource::Physical(_), EciTarget::Logical(_)) => ChannelPair::PhysicalToLogical,
            (EciSource::Physical(_), EciTarget::Ancilla) => ChannelPair::PhysicalToAncilla,
        }
    }

    fn measured(&self) -> bool {
        self.channel.variant == ChannelVariant::Measured
    }

    fn full_register(&self, region: &[usize]) -> bool {
        region.len() == self.channel.code.k
    }

    fn validate(&self) -> Result<()> {
        let code = &self.channel.code;
        code.check_codespace(self.state, CODESPACE_TOL)?;
        if self.hamiltonian.n_qubits() != code.n {
            return Err(Error::DimensionMismatch(self.hamiltonian.n_qubits(), code.n));
        }
        if let Some((_, t)) = self.hamiltonian.terms().iter().find(|(_, t)| !code.is_logical(t)) {
            return Err(Error::InvalidArgument(format!("Hamiltonian term {t} does not commute with the checks")));
        }
        let check_region = |r: &[usize]| -> Result<()> {
            if r.is_empty() {
                return Err(Error::InvalidArgument("empty logical region".into()));
            }
            for (i, &j) in r.iter().enumerate() {
                if j >= code.k {
                    return Err(Error::SiteOutOfRange { site: j, n: code.k });
                }
                if r[..i].contains(&j) {
                    return Err(Error::InvalidArgument(format!("logical qubit {j} listed twice")));
                }
            }
            Ok(())
        };
        match self.source {
            EciSource::Physical(q) if *q >= code.n => return Err(Error::SiteOutOfRange { site: *q, n: code.n }),
            EciSource::Logical(r) => {
                check_region(r)?;
                if r.len() != 1 && !self.full_register(r) {
                    return Err(Error::InvalidArgument(
                        "a logical kick acts on one logical qubit or on the whole register".into(),
                    ));
                }
            }
            _ => {}
        }
        if let EciTarget::Logical(r) = self.target {
            check_region(r)?;
        }
        Ok(())
    }

    fn target_dim(&self) -> usize {
        match self.target {
            EciTarget::Logical(r) => 1 << r.len(),
            EciTarget::Ancilla => self.channel.code.ancilla_dim(),
        }
    }
}

fn value(p: &EciProblem, v: f64, method: EciMethod, adjoint_norm: Option<f64>) -> EciValue {
    EciValue { value: v, channel_pair: p.pair(), measured: p.measured(), method, adjoint_norm }
}

/// `b(D)` of the Hilbert-Schmidt ensemble.
fn hs_b(dim: usize) -> f64 {
    MomentCoefficients::new(dim).b
}

/// Error-corrected influence by both routes where a moment form exists,
/// checked against each other; channel route alone otherwise.
pub fn eci_exact(p: &EciProblem) -> Result<EciValue> {
    p.validate()?;
    let channel = eci_channel_route(p)?;
    match eci_moment_route(p)? {
        Some(m) => {
            if (m.value - channel.value).abs() > ROUTE_TOL {
                return Err(Error::Consistency(format!(
                    "influence routes disagree: moment {:e}, channel {:e}",
                    m.value, channel.value
                )));
            }
            Ok(m)
        }
        None => Ok(channel),
    }
}

/// Closed forms and the Heisenberg-kernel route; `None` when neither applies.
pub fn eci_moment_route(p: &EciProblem) -> Result<Option<EciValue>> {
    p.validate()?;
    let code = &p.channel.code;
    let out = match (p.source, p.target) {
        (EciSource::Logical(r), EciTarget::Logical(b)) if p.full_register(r) => {
            // Haar kick on the whole code space leaves a Haar-random code state
            let (d, db) = (code.code_dim() as f64, (1usize << b.len()) as f64);
            let purity = (db + d / db) / (d + 1.0);
            Some(hs_b(1 << b.len()) * (purity - 1.0 / db))
        }
        (EciSource::Logical(_), EciTarget::Logical(_)) => None,
        (EciSource::Logical(_), EciTarget::Ancilla) => Some(0.0),
        (EciSource::Physical(_), EciTarget::Ancilla) if p.tau == 0.0 || p.measured() => {
            let da = code.ancilla_dim();
            let base = 1.0 / (da as f64 * ((da * da) as f64 + 1.0));
            if code.corrects_single_qubit_errors() {
                Some(super::phys_to_ancilla_closed_form(da, p.measured()))
            } else if matches!(code.name, CodeName::RepetitionX(_)) {
                let z = p.state.expectation(&code.logical_z[0]).re;
                Some(if p.measured() { base / 6.0 } else { base / 3.0 * (1.0 + z * z / 2.0) })
            } else {
                None
            }
        }
        (EciSource::Physical(_), EciTarget::Ancilla) => None,
        (EciSource::Physical(q), EciTarget::Logical(b)) if b.len() == 1 => {
            let k = eci_kernel(p.channel, p.state, *q, b[0], p.hamiltonian, p.tau)?;
            let norm = adjoint_norm(p.channel, b[0])?;
            return Ok(Some(value(p, k.ci()?, EciMethod::Moment, norm)));
        }
        (EciSource::Physical(_), EciTarget::Logical(_)) => {
            (p.tau == 0.0 && code.corrects_single_qubit_errors()).then_some(0.0)
        }
    };
    Ok(out.map(|v| value(p, v, EciMethod::Moment, None)))
}

fn adjoint_norm(channel: &RecoveryChannel, j: usize) -> Result<Option<f64>> {
    if channel.code.n > DENSE_CHANNEL_LIMIT {
        return Ok(None);
    }
    let d = (1usize << channel.code.n) as f64;
    let mut worst: f64 = 0.0;
    for alpha in Pauli::XYZ {
        let adj = recovery_adjoint(channel, &channel.code.logical_pauli(j, alpha)?)?.to_dense()?;
        worst = worst.max(adj.iter().map(|z| z.norm_sqr()).sum::<f64>() / d);
    }
    Ok(Some(worst))
}

/// Influence kernel of physical site `q` on logical qubit `j`, the readout
/// being `R^dag[sigma_j^alpha]` after logical evolution for `tau`.
pub fn eci_kernel(
    channel: &RecoveryChannel,
    state: &StateVector,
    q: usize,
    j: usize,
    h: &Hamiltonian,
    tau: f64,
) -> Result<InfluenceKernel> {
    let pair = schmidt_split(state, q)?;
    eci_kernel_for_pair(channel, pair, j, h, tau)
}

pub fn eci_kernel_for_pair(
    channel: &RecoveryChannel,
    pair: SchmidtPair,
    j: usize,
    h: &Hamiltonian,
    tau: f64,
) -> Result<InfluenceKernel> {
    let q = pair.q_site;
    let ev = evolved_dyads(h, &pair.complement, q, tau, DEFAULT_TOL)?;
    let mut kernels = [[[ZERO; 4]; 4]; 3];
    for (ai, alpha) in Pauli::XYZ.iter().enumerate() {
        let adj = recovery_adjoint(channel, &channel.code.logical_pauli(j, *alpha)?)?;
        let images: Vec<Vec<C64>> = ev.iter().map(|e| adj.apply(e)).collect();
        for r in 0..4 {
            for c in r..4 {
                let v = inner(&ev[r], &images[c]);
                kernels[ai][r][c] = v;
                kernels[ai][c][r] = v.conj();
            }
        }
    }
    Ok(InfluenceKernel { pair, source: q, target: j, tau, kernels })
}

/// Kicked and evolved inputs for the channel route.
enum Inputs {
    /// Equal-weight ensemble from a unitary 2-design.
    Design(Vec<Vec<C64>>),
    /// `U|b>` over the logical basis, for Haar kicks on the whole register.
    Register(Vec<Vec<C64>>),
}

fn kicked_inputs(p: &EciProblem, basis: &[Vec<C64>]) -> Result<Inputs> {
    let code = &p.channel.code;
    let evolve = |v: Vec<C64>| evolve_vec(&v, p.hamiltonian, p.tau, DEFAULT_TOL).map(|r| r.0);
    let cliffords = single_qubit_cliffords();
    match p.source {
        EciSource::Physical(q) => {
            let kicked: Result<Vec<_>> =
                cliffords.par_iter().map(|c| evolve(p.state.apply_single(*q, c).into_amplitudes())).collect();
            Ok(Inputs::Design(kicked?))
        }
        EciSource::Logical(r) if r.len() == 1 => {
            let j = r[0];
            let paulis: Vec<_> = Pauli::ALL.iter().map(|&a| code.logical_pauli(j, a)).collect::<Result<_>>()?;
            let images: Vec<Vec<C64>> = paulis.iter().map(|s| s.apply(p.state.amplitudes())).collect();
            let kicked: Result<Vec<_>> = cliffords
                .par_iter()
                .map(|c| {
                    // C = sum_mu c_mu sigma^mu with c_mu = tr(sigma^mu C) / 2
                    let mut v = vec![ZERO; p.state.dim()];
                    for (a, img) in Pauli::ALL.iter().zip(&images) {
                        let m = a.matrix();
                        let cm = (m[0][0] * c[0][0] + m[0][1] * c[1][0] + m[1][0] * c[0][1] + m[1][1] * c[1][1]) * 0.5;
                        v.iter_mut().zip(img).for_each(|(o, x)| *o += cm * x);
                    }
                    evolve(v)
                })
                .collect();
            Ok(Inputs::Design(kicked?))
        }
        EciSource::Logical(_) => {
            let evolved: Result<Vec<_>> = basis.par_iter().map(|b| evolve(b.clone())).collect();
            Ok(Inputs::Register(evolved?))
        }
    }
}

/// Per-input readout data: logical amplitudes per syndrome branch, or the
/// branches themselves for the ancilla register.
enum Readout {
    Logical(Vec<(usize, Vec<C64>)>),
    Ancilla(Vec<(usize, Vec<C64>)>),
}

fn readout(p: &EciProblem, v: &[C64], basis: &[Vec<C64>]) -> Readout {
    let branches = p.channel.branches(v);
    match p.target {
        EciTarget::Logical(_) => Readout::Logical(
            branches.into_iter().map(|(s, w)| (s, p.channel.code.decode_amplitudes(&w, basis))).collect(),
        ),
        EciTarget::Ancilla => Readout::Ancilla(branches),
    }
}

/// Output block for the operator `|a><b|` pushed through the channel.
fn output(p: &EciProblem, a: &Readout, b: &Readout, syndromes: &[usize]) -> Result<DMatrix<C64>> {
    match (a, b) {
        (Readout::Logical(ra), Readout::Logical(rb)) => {
            let d = p.channel.code.code_dim();
            let mut m = DMatrix::zeros(d, d);
            for (s, x) in ra {
                if let Some((_, y)) = rb.iter().find(|(t, _)| t == s) {
                    for i in 0..d {
                        for j in 0..d {
                            m[(i, j)] += x[i] * y[j].conj();
                        }
                    }
                }
            }
            let EciTarget::Logical(region) = p.target else { unreachable!() };
            let k = p.channel.code.k;
            if region.len() == k && region.iter().enumerate().all(|(i, &j)| i == j) {
                return Ok(m);
            }
            let full = DenseOperator::new((0..k).collect(), m)?;
            Ok(partial_trace_operator(&full, region)?.matrix().clone())
        }
        (Readout::Ancilla(ra), Readout::Ancilla(rb)) => Ok(p.channel.ancilla_block(ra, rb, syndromes)),
        _ => unreachable!("readouts of one problem share a kind"),
    }
}

fn tr_prod(a: &DMatrix<C64>, b: &DMatrix<C64>) -> C64 {
    (a * b).trace()
}

/// Kicks averaged exactly (Clifford design on one qubit, symmetric-subspace
/// twirl on the full register), recovery applied branch by branch.
pub fn eci_channel_route(p: &EciProblem) -> Result<EciValue> {
    p.validate()?;
    let basis = p.channel.code.logical_basis()?;
    let inputs = kicked_inputs(p, &basis)?;
    let (vectors, register) = match inputs {
        Inputs::Design(v) => (v, false),
        Inputs::Register(v) => (v, true),
    };
    let reads: Vec<Readout> = vectors.par_iter().map(|v| readout(p, v, &basis)).collect();
    let mut syndromes: Vec<usize> = reads
        .iter()
        .flat_map(|r| match r {
            Readout::Ancilla(b) => b.iter().map(|(s, _)| *s).collect::<Vec<_>>(),
            Readout::Logical(_) => Vec::new(),
        })
        .collect();
    syndromes.sort_unstable();
    syndromes.dedup();
    let b = hs_b(p.target_dim());
    let v = if register {
        // E[(V rho V^dag)^(x)2] = (1 + F) / (D (D + 1)) on the code space
        let d = reads.len();
        let block = |i: usize, j: usize| output(p, &reads[i], &reads[j], &syndromes);
        let diag: Vec<DMatrix<C64>> = (0..d).map(|i| block(i, i)).collect::<Result<_>>()?;
        let mut second = C64::new(0.0, 0.0);
        for i in 0..d {
            for j in 0..d {
                second += tr_prod(&diag[i], &diag[j]) + tr_prod(&block(i, j)?, &block(j, i)?);
            }
        }
        let second = second.re / (d * (d + 1)) as f64;
        let mean = diag.iter().fold(DMatrix::zeros(diag[0].nrows(), diag[0].ncols()), |acc, m| acc + m)
            / C64::new(d as f64, 0.0);
        b * (second - tr_prod(&mean, &mean).re)
    } else {
        let outs: Vec<DMatrix<C64>> = reads.iter().map(|r| output(p, r, r, &syndromes)).collect::<Result<_>>()?;
        let m = outs.len() as f64;
        let second = outs.iter().map(|o| tr_prod(o, o).re).sum::<f64>() / m;
        let mean = outs.iter().fold(DMatrix::zeros(outs[0].nrows(), outs[0].ncols()), |acc, o| acc + o)
            / C64::new(m, 0.0);
        b * (second - tr_prod(&mean, &mean).re)
    };
    Ok(value(p, v, EciMethod::Channel, None))
}
