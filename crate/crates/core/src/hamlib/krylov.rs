use nalgebra::DMatrix;

use crate::qcore::dense::{expm_i, jacobi_eigen};

use super::Hamiltonian;
use crate::qcore::state::{inner, norm, StateVector};
use crate::{Error, Result, C64};

/// Tolerance used internally when callers do not choose one.
pub const DEFAULT_TOL: f64 = 1e-12;

const MAX_KRYLOV_DIM: usize = 36;
const MAX_SUBSTEPS: usize = 200_000;

#[derive(Clone, Debug)]
pub struct EvolutionResult {
    pub state: StateVector,
    pub time: f64,
    pub residual_estimate: f64,
}

/// `exp(-i H t) |state>` by Lanczos with adaptive substeps.
pub fn evolve(state: &StateVector, h: &Hamiltonian, t: f64, tol: f64) -> Result<EvolutionResult> {
    if state.n_qubits() != h.n_qubits() {
        return Err(Error::DimensionMismatch(state.n_qubits(), h.n_qubits()));
    }
    let (amps, residual) = evolve_vec(state.amplitudes(), h, t, tol)?;
    let state = StateVector::new(state.n_qubits(), amps)?;
    Ok(EvolutionResult { state, time: t, residual_estimate: residual })
}

/// Same as [`evolve`] on a raw vector (need not be normalized). Returns the
/// evolved vector and the accumulated error estimate.
pub fn evolve_vec(v: &[C64], h: &Hamiltonian, t: f64, tol: f64) -> Result<(Vec<C64>, f64)> {
    if !(tol > 1e-14 && tol < 1e-4) {
        return Err(Error::InvalidArgument(format!("tolerance {tol:e} outside (1e-14, 1e-4)")));
    }
    if !t.is_finite() {
        return Err(Error::InvalidArgument("non-finite time".into()));
    }
    if v.len() != 1usize << h.n_qubits() {
        return Err(Error::DimensionMismatch(v.len(), 1usize << h.n_qubits()));
    }
    let scale = norm(v);
    if t == 0.0 || h.is_zero() || scale == 0.0 {
        return Ok((v.to_vec(), 0.0));
    }
    let mut cur: Vec<C64> = v.iter().map(|z| z / scale).collect();
    let total = t.abs();
    let sign = t.signum();
    let mut done = 0.0;
    let mut residual = 0.0;
    let mut dt = total;
    let mut steps = 0;
    while done < total {
        steps += 1;
        if steps > MAX_SUBSTEPS {
            return Err(Error::NonConvergence(format!("more than {MAX_SUBSTEPS} substeps")));
        }
        let remaining = total - done;
        dt = dt.min(remaining);
        let basis = lanczos(&cur, h);
        loop {
            let (y, err) = basis.propagate(sign * dt);
            // error budget proportional to the share of the interval
            if err <= 0.5 * tol * dt / total || basis.exact {
                cur = basis.combine(&y);
                residual += err;
                done += dt;
                if err < 0.05 * tol * dt / total && dt < remaining {
                    dt *= 1.5;
                }
                break;
            }
            dt *= 0.5;
            if dt < total * 1e-13 {
                return Err(Error::NonConvergence(format!("step size collapsed at t = {}", sign * done)));
            }
        }
    }
    // Lanczos vectors are orthonormal and the small propagator unitary, so the
    // norm only drifts by rounding; fold that back in.
    let nrm = norm(&cur);
    for z in &mut cur {
        *z *= scale / nrm;
    }
    Ok((cur, residual * scale))
}

struct KrylovBasis {
    vectors: Vec<Vec<C64>>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    // beta after the last vector, drives the error estimate
    tail: f64,
    exact: bool,
}

fn lanczos(v0: &[C64], h: &Hamiltonian) -> KrylovBasis {
    let dim = v0.len();
    let cap = MAX_KRYLOV_DIM.min(dim);
    let hn = h.norm_bound().max(1e-300);
    let mut vectors = vec![v0.to_vec()];
    let mut alpha = Vec::new();
    let mut beta = Vec::new();
    loop {
        let j = vectors.len() - 1;
        let mut w = h.apply(&vectors[j]);
        let a = inner(&vectors[j], &w).re;
        alpha.push(a);
        // full reorthogonalization, twice for safety
        for _ in 0..2 {
            for q in &vectors {
                let c = inner(q, &w);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= c * qi;
                }
            }
        }
        let b = norm(&w);
        if b <= 1e-13 * hn {
            return KrylovBasis { vectors, alpha, beta, tail: 0.0, exact: true };
        }
        if vectors.len() == cap {
            return KrylovBasis { vectors, alpha, beta, tail: b, exact: cap == dim };
        }
        beta.push(b);
        vectors.push(w.into_iter().map(|z| z / b).collect());
    }
}

impl KrylovBasis {
    /// Coefficients of exp(-i T s) e_1 and the a-posteriori error estimate.
    fn propagate(&self, s: f64) -> (Vec<C64>, f64) {
        let m = self.alpha.len();
        let mut t = DMatrix::<f64>::zeros(m, m);
        for k in 0..m {
            t[(k, k)] = self.alpha[k];
            if k + 1 < m {
                t[(k, k + 1)] = self.beta[k];
                t[(k + 1, k)] = self.beta[k];
            }
        }
        let (vals, vecs) = jacobi_eigen(t);
        let y: Vec<C64> = (0..m)
            .map(|r| {
                (0..m)
                    .map(|k| {
                        let q = vecs[(r, k)] * vecs[(0, k)];
                        C64::from_polar(q, -vals[k] * s)
                    })
                    .sum()
            })
            .collect();
        let err = if self.exact { 0.0 } else { self.tail * y[m - 1].norm() };
        (y, err)
    }

    fn combine(&self, y: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.vectors[0].len()];
        for (c, q) in y.iter().zip(&self.vectors) {
            for (o, qi) in out.iter_mut().zip(q) {
                *o += c * qi;
            }
        }
        out
    }
}

/// Dense `exp(-i H t)`. Test oracle
/// and small-system helper; refuses more than 10 qubits.
pub fn expm_dense(h: &Hamiltonian, t: f64) -> Result<DMatrix<C64>> {
    if h.n_qubits() > 10 {
        return Err(Error::SupportOverflow(h.n_qubits()));
    }
    Ok(expm_i(&h.to_dense(), t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamlib::{build_ising, build_pxp};
    use crate::qcore::pauli::{Pauli, PauliString};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dist(a: &[C64], b: &[C64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
    }

    #[test]
    fn zero_time_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = StateVector::random(4, &mut rng);
        let h = build_ising(4, 1.0, 0.3, 0.2).unwrap();
        let r = evolve(&s, &h, 0.0, 1e-12).unwrap();
        assert_eq!(r.state, s);
        assert_eq!(r.residual_estimate, 0.0);
    }

    #[test]
    fn single_qubit_rotation() {
        let h = Hamiltonian::new(1, vec![(1.0, PauliString::single(1, 0, Pauli::Z))]).unwrap();
        let s = StateVector::from_label("+").unwrap();
        for &t in &[0.3, -1.7, 5.0] {
            let r = evolve(&s, &h, t, 1e-12).unwrap();
            let a = std::f64::consts::FRAC_1_SQRT_2;
            let want = [C64::from_polar(a, -t), C64::from_polar(a, t)];
            assert!(dist(r.state.amplitudes(), &want) < 1e-12);
        }
    }

    #[test]
    fn matches_dense_exponential() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for n in [3usize, 5, 8] {
            let h = build_ising(n, 1.0, 0.01, -0.21).unwrap().plus(&build_pxp(n).unwrap().scaled(0.4)).unwrap();
            let s = StateVector::random(n, &mut rng);
            for &t in &[0.005, 0.4, -2.3] {
                let tol = 1e-10;
                let r = evolve(&s, &h, t, tol).unwrap();
                let u = expm_dense(&h, t).unwrap();
                let want = &u * nalgebra::DVector::from_column_slice(s.amplitudes());
                assert!(dist(r.state.amplitudes(), want.as_slice()) <= tol, "n={n} t={t} d={} u={}", dist(r.state.amplitudes(), want.as_slice()), (u.adjoint() * &u - DMatrix::<C64>::identity(u.nrows(), u.nrows())).norm());
                assert!(r.residual_estimate <= tol);
                assert!((r.state.norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn forward_then_back() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = build_pxp(7).unwrap();
        let s = StateVector::random(7, &mut rng);
        let tol = 1e-11;
        let f = evolve(&s, &h, 1.3, tol).unwrap();
        let b = evolve(&f.state, &h, -1.3, tol).unwrap();
        assert!(dist(b.state.amplitudes(), s.amplitudes()) <= 2.0 * tol);
    }

    #[test]
    fn rejects_bad_tolerance() {
        let s = StateVector::from_label("00").unwrap();
        let h = build_ising(2, 1.0, 0.0, 0.0).unwrap();
        assert!(matches!(evolve(&s, &h, 1.0, 1e-3), Err(Error::InvalidArgument(_))));
        assert!(matches!(evolve(&s, &h, 1.0, 1e-15), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn energy_drift_over_many_steps() {
        let h = build_ising(10, 1.0, 0.01, -0.21).unwrap();
        let mut s = StateVector::from_label("0000000000").unwrap();
        s = evolve(&s, &h, 0.2, 1e-12).unwrap().state;
        let e0 = h.energy(&s);
        for _ in 0..1000 {
            s = evolve(&s, &h, 0.005, 1e-12).unwrap().state;
        }
        assert!((h.energy(&s) - e0).abs() < 1e-9);
    }
}
