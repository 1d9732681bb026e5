use serde::Serialize;

use super::code::StabilizerCode;
use super::eci::{eci_exact, eci_kernel_for_pair, EciProblem, EciSource, EciTarget, EciValue};
use super::recovery::{ChannelVariant, RecoveryChannel};
use crate::acausal::{theorem_check_with, TheoremReport};
use crate::causal::{ci_exact, CiValue};
use crate::hamlib::Hamiltonian;
use crate::qcore::schmidt::schmidt_split;
use crate::qcore::state::ZERO;
use crate::qcore::StateVector;
use crate::{Error, Result, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProtectedFamily {
    /// first block in a Zbar eigenstate
    ZEigen,
    /// target block in an Xbar eigenstate
    XEigen,
    /// `(|00> + |11>) / sqrt 2` on the two highest blocks
    BellLike,
    /// `cos(t + pi/4)|++> + i cos(t - pi/4)|-->` on the same blocks, normalized
    OneParameter,
}

#[derive(Clone, Debug)]
pub struct ProtectedState {
    pub family: ProtectedFamily,
    /// Logical amplitudes, logical qubit 0 most significant.
    pub logical: Vec<C64>,
    pub state: StateVector,
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn kron(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
}

fn normalized(v: Vec<C64>) -> Vec<C64> {
    let n = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|a| a / n).collect()
}

/// Kick site, physical qubit 0; read-out block, logical qubit 1.
pub const PROTECTED_SOURCE: usize = 0;
pub const PROTECTED_TARGET: usize = 1;

/// Logical states of `k` five-qubit blocks whose first physical qubit has
/// no error-corrected influence on block 1 after `t` under `sum Xbar Xbar`.
pub fn protected_states_513(k: usize, t: f64) -> Result<Vec<ProtectedState>> {
    if !(2..=3).contains(&k) {
        return Err(Error::InvalidArgument(format!("protected families are built for 2 or 3 blocks, got {k}")));
    }
    let code = StabilizerCode::five_qubit_blocks(k)?;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    // a generic superposition on the first block
    let first = normalized(vec![c(0.8, 0.0), c(0.36, 0.48)]);
    let spare = normalized(vec![c(0.3, -0.2), c(0.7, 0.6)]);
    let zero = vec![c(1.0, 0.0), ZERO];
    let plus = vec![c(h, 0.0), c(h, 0.0)];
    let minus = vec![c(h, 0.0), c(-h, 0.0)];
    let mut out = Vec::new();
    let mut push = |family, logical: Vec<C64>| -> Result<()> {
        let state = code.encode(&logical)?;
        out.push(ProtectedState { family, logical, state });
        Ok(())
    };
    let rest = |v: Vec<C64>| if k == 3 { kron(&v, &spare) } else { v };
    push(ProtectedFamily::ZEigen, kron(&zero, &rest(spare.clone())))?;
    push(ProtectedFamily::XEigen, kron(&first, &rest(plus.clone())))?;

    let pi4 = std::f64::consts::FRAC_PI_4;
    let bell = vec![c(h, 0.0), ZERO, ZERO, c(h, 0.0)];
    let (pp, mm) = (kron(&plus, &plus), kron(&minus, &minus));
    let (a, b) = ((t + pi4).cos(), (t - pi4).cos());
    let one = normalized(pp.iter().zip(&mm).map(|(x, y)| x * a + y * c(0.0, b)).collect());
    let pad = |v: Vec<C64>| if k == 3 { kron(&first, &v) } else { v };
    push(ProtectedFamily::BellLike, pad(bell))?;
    push(ProtectedFamily::OneParameter, pad(one))?;
    Ok(out)
}

/// Sector conditions for the error-corrected influence of physical site `q`
/// on logical qubit `j`.
pub fn eci_theorem_check(
    channel: &RecoveryChannel,
    state: &StateVector,
    q: usize,
    j: usize,
    h: &Hamiltonian,
    tau: f64,
    tol: f64,
) -> Result<TheoremReport> {
    channel.code.check_codespace(state, super::eci::CODESPACE_TOL)?;
    let pair = schmidt_split(state, q)?;
    theorem_check_with(pair, tol, |p| eci_kernel_for_pair(channel, p, j, h, tau))
}

/// Error-corrected influence of physical qubit 0 on logical qubit 1 under
/// `sum Xbar Xbar` for `t`, through the bare recovery.
pub fn protected_eci(state: &StateVector, k: usize, t: f64) -> Result<EciValue> {
    let code = StabilizerCode::five_qubit_blocks(k)?;
    let h = code.logical_xx_chain(0.0)?;
    let channel = RecoveryChannel::new(code, ChannelVariant::Bare);
    eci_exact(&EciProblem {
        channel: &channel,
        state,
        source: &EciSource::Physical(PROTECTED_SOURCE),
        target: &EciTarget::Logical(vec![PROTECTED_TARGET]),
        hamiltonian: &h,
        tau: t,
    })
}

/// Largest same-site influence over the physical qubits of an encoded
/// basis state of the iceberg code, under `sum Xbar Xbar + h_z sum Zbar`.
pub fn iceberg_self_influence(k: usize, dt: f64, h_z: f64) -> Result<CiValue> {
    iceberg_self_influence_from(k, dt, h_z, 0)
}

/// As [`iceberg_self_influence`], starting from encoded basis state `basis`.
pub fn iceberg_self_influence_from(k: usize, dt: f64, h_z: f64, basis: usize) -> Result<CiValue> {
    let code = StabilizerCode::iceberg(k)?;
    if basis >= code.code_dim() {
        return Err(Error::InvalidArgument(format!("basis index {basis} out of range")));
    }
    let mut logical = vec![ZERO; code.code_dim()];
    logical[basis] = c(1.0, 0.0);
    let state = code.encode(&logical)?;
    let h = code.logical_xx_chain(h_z)?;
    let mut worst = 0.0f64;
    for q in 0..code.n {
        worst = worst.max(ci_exact(&state, &h, q, q, dt)?.value);
    }
    Ok(CiValue::exact(worst))
}

/// Influences of a kicked physical qubit in the three-qubit X-basis
/// repetition code, for the logical state `alpha|0> + beta|1>`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RepCodeInfluence {
    pub z_logical: f64,
    pub phys_to_logical: f64,
    pub phys_to_ancilla_pre: f64,
    pub phys_to_ancilla_post: f64,
}

/// Closed forms in `<Z_L>`, with `D_anc = 4`.
pub fn rep_code_formulas(z_logical: f64) -> RepCodeInfluence {
    let da = 4.0;
    let base = 1.0 / (da * (da * da + 1.0));
    let z2 = z_logical * z_logical;
    RepCodeInfluence {
        z_logical,
        phys_to_logical: (1.0 - z2) / 30.0,
        phys_to_ancilla_pre: base / 3.0 * (1.0 + z2 / 2.0),
        phys_to_ancilla_post: base / 6.0,
    }
}

/// The same three influences by the channel route, kicking physical `site`.
pub fn rep_code_ci(alpha: C64, beta: C64, site: usize) -> Result<RepCodeInfluence> {
    let code = StabilizerCode::repetition_x(3)?;
    let state = code.encode(&normalized(vec![alpha, beta]))?;
    let z = state.expectation(&code.logical_z[0]).re;
    let h = Hamiltonian::zero(3);
    let channel = RecoveryChannel::new(code, ChannelVariant::Bare);
    let run = |variant, target: EciTarget| {
        let ch = channel.with_variant(variant);
        super::eci::eci_channel_route(&EciProblem {
            channel: &ch,
            state: &state,
            source: &EciSource::Physical(site),
            target: &target,
            hamiltonian: &h,
            tau: 0.0,
        })
        .map(|v| v.value)
    };
    Ok(RepCodeInfluence {
        z_logical: z,
        phys_to_logical: run(ChannelVariant::Bare, EciTarget::Logical(vec![0]))?,
        phys_to_ancilla_pre: run(ChannelVariant::Dilated, EciTarget::Ancilla)?,
        phys_to_ancilla_post: run(ChannelVariant::Measured, EciTarget::Ancilla)?,
    })
}
