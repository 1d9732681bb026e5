//! Conditions for a vanishing single-site influence, checked sector by sector,
//! and an entangled Ising state that meets them.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::causal::{haar_unitary, InfluenceKernel};
use crate::hamlib::{evolved_dyads, Hamiltonian, DEFAULT_TOL};
use crate::qcore::schmidt::{schmidt_split, SchmidtPair};
use crate::qcore::state::ZERO;
use crate::qcore::{Pauli, StateVector};
use crate::{Error, Result, C64};

pub const DEFAULT_THEOREM_TOL: f64 = 1e-10;

/// Weights closer than this count as degenerate.
const DEGENERACY_TOL: f64 = 1e-9;

/// Per `(alpha, beta)` residuals `[|p1 <1|nu|1> - p2 <2|nu|2>|, |<1|nu|2>|]`.
pub type Residuals = [[[f64; 2]; 3]; 3];

#[derive(Clone, Debug, Serialize)]
pub struct TheoremReport {
    /// `[alpha][beta]`, both over X, Y, Z.
    pub residuals: Residuals,
    pub verdict: bool,
    pub tolerance: f64,
    /// Influence from the same kernel, for reference.
    pub ci: f64,
    /// Set when the Schmidt weights coincide and the complement basis is not unique.
    pub degenerate: bool,
    /// Verdicts in rotated complement bases, only filled when `degenerate`.
    pub rotated_verdicts: Vec<bool>,
}

impl TheoremReport {
    pub fn max_residual(&self) -> f64 {
        max_residual(&self.residuals)
    }
}

fn max_residual(r: &Residuals) -> f64 {
    r.iter().flatten().flatten().copied().fold(0.0, f64::max)
}

fn kernel_for(pair: SchmidtPair, h: &Hamiltonian, q: usize, x: usize, tau: f64) -> Result<InfluenceKernel> {
    let ev = evolved_dyads(h, &pair.complement, q, tau, DEFAULT_TOL)?;
    Ok(InfluenceKernel::from_evolved(pair, &ev, q, x, tau))
}

fn residuals(k: &InfluenceKernel) -> Residuals {
    let [p1, p2] = k.pair.weights;
    let mut out = [[[0.0; 2]; 3]; 3];
    for (ai, alpha) in Pauli::XYZ.iter().enumerate() {
        let nu = k.nu(*alpha);
        for (bi, beta) in Pauli::XYZ.iter().enumerate() {
            let diag = p1 * nu.get(*beta, 0, 0) - p2 * nu.get(*beta, 1, 1);
            out[ai][bi] = [diag.norm(), nu.get(*beta, 0, 1).norm()];
        }
    }
    out
}

/// Evaluate the sector conditions for the influence of `q` on `x` a time
/// `tau` later, with the state taken at `q`'s time.
pub fn theorem_check(
    state: &StateVector,
    q: usize,
    x: usize,
    h: &Hamiltonian,
    tau: f64,
    tol: f64,
) -> Result<TheoremReport> {
    if state.n_qubits() != h.n_qubits() {
        return Err(Error::DimensionMismatch(state.n_qubits(), h.n_qubits()));
    }
    state.check_site(x)?;
    let pair = schmidt_split(state, q)?;
    theorem_check_with(pair, tol, |p| kernel_for(p, h, q, x, tau))
}

/// Sector conditions for an arbitrary readout: `kernel` builds the influence
/// kernel for a given Schmidt pair at the source. Degenerate pairs are also
/// checked in two seeded rotations of the complement basis.
pub fn theorem_check_with(
    pair: SchmidtPair,
    tol: f64,
    kernel: impl Fn(SchmidtPair) -> Result<InfluenceKernel>,
) -> Result<TheoremReport> {
    let degenerate = pair.is_degenerate(DEGENERACY_TOL);
    let k = kernel(pair.clone())?;
    let res = residuals(&k);
    let mut rotated_verdicts = Vec::new();
    if degenerate {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        for _ in 0..2 {
            let u = haar_unitary(2, &mut rng);
            let u = [[u[(0, 0)], u[(0, 1)]], [u[(1, 0)], u[(1, 1)]]];
            let kr = kernel(pair.rotated(&u))?;
            rotated_verdicts.push(max_residual(&residuals(&kr)) <= tol);
        }
    }
    Ok(TheoremReport {
        verdict: max_residual(&res) <= tol,
        residuals: res,
        tolerance: tol,
        ci: k.ci()?,
        degenerate,
        rotated_verdicts,
    })
}

/// `(|0>_q |phi_1> + |1>_q |phi_2>) / sqrt 2` with
/// `|phi_{1,2}> = |+/->_{x'} (exp(+/- i X tau)|0>)_x |0...0>`.
pub fn build_ising_acausal_state(n: usize, tau: f64, q: usize, x: usize, x_prime: usize) -> Result<StateVector> {
    let [first, second] = acausal_branches(n, tau, q, x, x_prime)?;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let amps = first.amplitudes().iter().zip(second.amplitudes()).map(|(a, b)| (a + b) * h).collect();
    StateVector::new(n, amps)
}

/// The two branches `|0>_q|phi_1>` and `|1>_q|phi_2>`, each normalized.
pub fn acausal_branches(n: usize, tau: f64, q: usize, x: usize, x_prime: usize) -> Result<[StateVector; 2]> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("need at least 3 sites, got {n}")));
    }
    for s in [q, x, x_prime] {
        if s >= n {
            return Err(Error::SiteOutOfRange { site: s, n });
        }
    }
    if q == x || q == x_prime || x == x_prime {
        return Err(Error::InvalidArgument(format!("sites must be distinct: q={q} x={x} x'={x_prime}")));
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let (c, s) = (tau.cos(), tau.sin());
    let branch = |q_bit: usize, sign: f64| {
        let mut qubits = vec![[C64::new(1.0, 0.0), ZERO]; n];
        qubits[q] = if q_bit == 0 { [C64::new(1.0, 0.0), ZERO] } else { [ZERO, C64::new(1.0, 0.0)] };
        qubits[x_prime] = [C64::new(h, 0.0), C64::new(sign * h, 0.0)];
        // exp(i sign X tau)|0> = cos|0> + i sign sin|1>
        qubits[x] = [C64::new(c, 0.0), C64::new(0.0, sign * s)];
        StateVector::product(&qubits)
    };
    Ok([branch(0, 1.0), branch(1, -1.0)])
}
