//! Stabilizer codes, recovery channels, and the error-corrected influence:
//! a kick on a physical or logical region, logical evolution, recovery,
//! then a Hilbert-Schmidt random observable on logical qubits or on the
//! syndrome register.

mod code;
mod eci;
mod families;
mod recovery;

pub use code::{CodeName, StabilizerCode, CODE_QUBIT_LIMIT};
pub use eci::{
    eci_channel_route, eci_exact, eci_kernel, eci_kernel_for_pair, eci_moment_route, ChannelPair, EciMethod,
    EciProblem, EciSource, EciTarget, EciValue, CODESPACE_TOL, ROUTE_TOL,
};
pub use families::{
    eci_theorem_check, iceberg_self_influence, iceberg_self_influence_from, protected_eci, protected_states_513,
    rep_code_ci, rep_code_formulas, ProtectedFamily, ProtectedState, RepCodeInfluence, PROTECTED_SOURCE,
    PROTECTED_TARGET,
};
pub use recovery::{
    recovery_adjoint, recovery_adjoint_dense, ChannelVariant, RecoveryAdjoint, RecoveryChannel, DENSE_CHANNEL_LIMIT,
};

/// `(D - 1) / (D^2 (D^2 + 1))` for a code space of dimension `D`.
pub fn logical_to_logical_closed_form(code_dim: usize) -> f64 {
    let d = code_dim as f64;
    (d - 1.0) / (d * d * (d * d + 1.0))
}

/// `(3/4) / (D (D^2 + 1))` before and `(1/4) / (D (D^2 + 1))` after the
/// syndrome measurement, `D` the ancilla dimension.
pub fn phys_to_ancilla_closed_form(ancilla_dim: usize, measured: bool) -> f64 {
    let d = ancilla_dim as f64;
    let base = 1.0 / (d * (d * d + 1.0));
    if measured {
        0.25 * base
    } else {
        0.75 * base
    }
}
