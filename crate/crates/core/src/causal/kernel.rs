use super::{CiValue, QUBIT_PAULI_WEIGHT};
use crate::hamlib::{dyad_kernel, evolved_dyads, nu_from_kernel, Hamiltonian, NuElements, DEFAULT_TOL};
use crate::qcore::schmidt::{schmidt_split, SchmidtPair};
use crate::qcore::{Pauli, StateVector};
use crate::{Error, Result, C64};

pub(crate) type Mat4 = [[C64; 4]; 4];

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Everything the influence of site `source` (kicked at the state's time) on
/// site `target` (read out `tau` later) depends on: the Schmidt split at the
/// source and the matrix elements `K[(s a), (s' b)] = <s phi_a| sigma^alpha_target(tau) |s' phi_b>`.
#[derive(Clone, Debug)]
pub struct InfluenceKernel {
    pub pair: SchmidtPair,
    pub source: usize,
    pub target: usize,
    pub tau: f64,
    /// alpha = X, Y, Z
    pub kernels: [Mat4; 3],
}

pub(crate) fn check_state(state: &StateVector, h: &Hamiltonian, sites: &[usize]) -> Result<()> {
    if state.n_qubits() != h.n_qubits() {
        return Err(Error::DimensionMismatch(state.n_qubits(), h.n_qubits()));
    }
    for &s in sites {
        state.check_site(s)?;
    }
    if !state.is_normalized(1e-8) {
        return Err(Error::InvalidArgument(format!("state norm {} is not 1", state.norm())));
    }
    Ok(())
}

impl InfluenceKernel {
    pub fn new(state: &StateVector, h: &Hamiltonian, source: usize, target: usize, tau: f64, tol: f64) -> Result<Self> {
        check_state(state, h, &[source, target])?;
        let pair = schmidt_split(state, source)?;
        let ev = evolved_dyads(h, &pair.complement, source, tau, tol)?;
        Ok(Self::from_evolved(pair, &ev, source, target, tau))
    }

    /// Reuse dyads already evolved from `pair` (see [`evolved_dyads`]).
    pub fn from_evolved(pair: SchmidtPair, evolved: &[Vec<C64>; 4], source: usize, target: usize, tau: f64) -> Self {
        let n = pair.n_qubits();
        let kernels = Pauli::XYZ.map(|alpha| dyad_kernel(evolved, n, target, alpha));
        InfluenceKernel { pair, source, target, tau, kernels }
    }

    /// Spectral value, checked against the four-trace route.
    pub fn ci(&self) -> Result<f64> {
        let spectral = self.ci_spectral();
        let traced = self.ci_four_trace();
        if (spectral - traced).abs() > 1e-9 {
            return Err(Error::Consistency(format!("influence routes disagree: {spectral:e} vs {traced:e}")));
        }
        Ok(spectral)
    }

    pub fn nu(&self, alpha: Pauli) -> NuElements {
        nu_from_kernel(&self.kernels[alpha as usize - 1])
    }

    /// Dyad coordinates `<phi_r| u |phi_c>` (index `2r + c`) of the three
    /// operators `u^i = tr_A(sigma^i_A O(tau)) / 2`, i = X, Y, Z.
    pub fn gamma_vectors(&self, alpha: Pauli) -> [[C64; 4]; 3] {
        gamma_vectors_from(&self.nu(alpha))
    }

    pub fn variance_spectral(&self, alpha: Pauli) -> f64 {
        let th = theta_unscaled(&self.pair);
        self.gamma_vectors(alpha).iter().map(|x| quad(&th, x)).sum()
    }

    pub fn variance_four_trace(&self, alpha: Pauli) -> f64 {
        four_trace_variance(&self.kernels[alpha as usize - 1], self.pair.weights)
    }

    pub fn ci_spectral(&self) -> f64 {
        QUBIT_PAULI_WEIGHT * Pauli::XYZ.iter().map(|&a| self.variance_spectral(a)).sum::<f64>()
    }

    pub fn ci_four_trace(&self) -> f64 {
        QUBIT_PAULI_WEIGHT * Pauli::XYZ.iter().map(|&a| self.variance_four_trace(a)).sum::<f64>()
    }
}

pub(crate) fn gamma_vectors_from(nu: &NuElements) -> [[C64; 4]; 3] {
    let mut out = [[ZERO; 4]; 3];
    for i in 0..3 {
        for r in 0..2 {
            for c in 0..2 {
                out[i][2 * r + c] = nu.elements[i + 1][r][c];
            }
        }
    }
    out
}

/// x^dag M x
pub(crate) fn quad(m: &Mat4, x: &[C64; 4]) -> f64 {
    let mut acc = ZERO;
    for i in 0..4 {
        for j in 0..4 {
            acc += x[i].conj() * m[i][j] * x[j];
        }
    }
    acc.re
}

/// The state factor in dyad coordinates, without the `d/2` scale:
/// `T[(r c), (r' c')] = (1/3) sum_k conj(w^k_{c r}) w^k_{c' r'}` with
/// `w^k_{ab} = sqrt(p_a p_b) <psi_b| sigma^k |psi_a>`.
pub(crate) fn theta_unscaled(pair: &SchmidtPair) -> Mat4 {
    let p = pair.weights;
    let mut w = [[[ZERO; 2]; 2]; 3];
    for (k, sig) in Pauli::XYZ.iter().enumerate() {
        let m = sig.matrix();
        for a in 0..2 {
            for b in 0..2 {
                let mut e = ZERO;
                for s in 0..2 {
                    for t in 0..2 {
                        e += pair.local[b][s].conj() * m[s][t] * pair.local[a][t];
                    }
                }
                w[k][a][b] = e * (p[a] * p[b]).sqrt();
            }
        }
    }
    let mut th = [[ZERO; 4]; 4];
    for r in 0..2 {
        for c in 0..2 {
            for rp in 0..2 {
                for cp in 0..2 {
                    let mut acc = ZERO;
                    for wk in &w {
                        acc += wk[c][r].conj() * wk[cp][rp];
                    }
                    th[2 * r + c][2 * rp + cp] = acc / 3.0;
                }
            }
        }
    }
    th
}

/// Haar variance over the source kick for one observable, from its kernel
/// `K` and the Schmidt weights: `(1/3){tr(PKPK) - tr(M_A^2)/2 - tr(M_c^2)/2 + tr(PK)^2/4}`.
pub(crate) fn four_trace_variance(k: &Mat4, p: [f64; 2]) -> f64 {
    let w = |i: usize| p[i & 1];
    let mut t1 = ZERO;
    for i in 0..4 {
        for j in 0..4 {
            t1 += w(i) * k[i][j] * w(j) * k[j][i];
        }
    }
    // reduced onto the source site
    let mut ma = [[ZERO; 2]; 2];
    // reduced onto the complement (Schmidt labels)
    let mut mc = [[ZERO; 2]; 2];
    for s in 0..2 {
        for sp in 0..2 {
            for a in 0..2 {
                ma[s][sp] += p[a] * k[2 * s + a][2 * sp + a];
            }
        }
    }
    for a in 0..2 {
        for b in 0..2 {
            for s in 0..2 {
                mc[a][b] += k[2 * s + a][2 * s + b] * p[b];
            }
        }
    }
    let sq = |m: &[[C64; 2]; 2]| m[0][0] * m[0][0] + 2.0 * m[0][1] * m[1][0] + m[1][1] * m[1][1];
    let tr: C64 = (0..4).map(|i| w(i) * k[i][i]).sum();
    ((t1 - sq(&ma) * 0.5 - sq(&mc) * 0.5 + tr * tr * 0.25) / 3.0).re
}

/// Averaged causal influence of site `source` on site `target` a signed time
/// `tau` later, with the state taken at the source time.
pub fn ci_exact(state: &StateVector, h: &Hamiltonian, source: usize, target: usize, tau: f64) -> Result<CiValue> {
    ci_exact_with_tol(state, h, source, target, tau, DEFAULT_TOL)
}

pub fn ci_exact_with_tol(
    state: &StateVector,
    h: &Hamiltonian,
    source: usize,
    target: usize,
    tau: f64,
    tol: f64,
) -> Result<CiValue> {
    Ok(CiValue::exact(InfluenceKernel::new(state, h, source, target, tau, tol)?.ci()?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamlib::build_ising;
    use crate::qcore::PauliString;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn equal_time_spacelike_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = StateVector::random(5, &mut rng);
        let h = build_ising(5, 1.0, 0.3, 0.2).unwrap();
        for (a, b) in [(0, 1), (2, 4), (3, 0)] {
            assert_eq!(ci_exact(&s, &h, a, b, 0.0).unwrap().value.abs() < 1e-15, true);
        }
    }

    #[test]
    fn same_site_product_state_constant() {
        let s = StateVector::from_label("0+1").unwrap();
        let h = build_ising(3, 1.0, 0.0, 0.0).unwrap();
        for a in 0..3 {
            assert!((ci_exact(&s, &h, a, a, 0.0).unwrap().value - 0.05).abs() < 1e-14);
        }
    }

    #[test]
    fn two_qubit_closed_form() {
        // H = J X_A Z_B, state |0>_A (|0> + i|1>)_B / sqrt 2
        let j = 0.7;
        let h = Hamiltonian::new(2, vec![(j, PauliString::parse("XZ").unwrap())]).unwrap();
        let s = StateVector::from_label("0r").unwrap();
        let flat = StateVector::from_label("00").unwrap();
        for k in 0..40 {
            let t = k as f64 * 0.08;
            let v = ci_exact(&s, &h, 0, 1, t).unwrap().value;
            assert!((v - (2.0 * j * t).sin().powi(2) / 60.0).abs() < 1e-12);
            assert!(ci_exact(&flat, &h, 0, 1, t).unwrap().value.abs() < 1e-14);
        }
    }

    #[test]
    fn routes_agree_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for n in [2usize, 3, 5] {
            let h = build_ising(n, 1.0, 0.4, -0.3).unwrap();
            let s = StateVector::random(n, &mut rng);
            for a in 0..n {
                for b in 0..n {
                    let k = InfluenceKernel::new(&s, &h, a, b, 0.45, 1e-12).unwrap();
                    assert!((k.ci_spectral() - k.ci_four_trace()).abs() < 1e-12);
                    assert!(k.ci_spectral() >= 0.0);
                }
            }
        }
    }
}
