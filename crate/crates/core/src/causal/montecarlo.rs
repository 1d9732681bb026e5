use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::design::{single_qubit_cliffords, Mat2};
use super::kernel::check_state;
use super::{ci_exact, CiMethod, CiValue};
use crate::hamlib::{evolve_vec, Hamiltonian, DEFAULT_TOL};
use crate::qcore::state::{embed_site, project_site};
use crate::qcore::StateVector;
use crate::{Error, Result, C64};

const MIN_SAMPLES: usize = 100;
const BATCHES: usize = 20;

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random unitary: Gram-Schmidt on the columns of a complex Gaussian
/// matrix, which is QR with a positive real diagonal in R.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DMatrix<C64> {
    let mut m = DMatrix::from_fn(dim, dim, |_, _| gaussian(rng));
    for c in 0..dim {
        for p in 0..c {
            let proj = m.column(p).dotc(&m.column(c));
            let col_p = m.column(p).clone_owned();
            m.column_mut(c).axpy(-proj, &col_p, C64::new(1.0, 0.0));
        }
        let nrm = m.column(c).norm();
        m.column_mut(c).unscale_mut(nrm);
    }
    m
}

/// Hilbert-Schmidt random density matrix: `Q^dag Q` with `Q` a complex
/// Gaussian matrix normalized to unit Frobenius norm.
pub fn hs_observable<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DMatrix<C64> {
    let mut q = DMatrix::from_fn(dim, dim, |_, _| gaussian(rng));
    let nrm = q.norm();
    q.unscale_mut(nrm);
    q.adjoint() * q
}

/// Target-site reduced state as a quadratic function of the 2x2 kick `V` at
/// the source: `rho(V)[b][b'] = sum_ij c_i conj(c_j) G_ij[b][b']`, `c = vec(V)`.
struct KickResponse {
    gram: [[Mat2; 4]; 4],
}

impl KickResponse {
    fn new(state: &StateVector, h: &Hamiltonian, source: usize, target: usize, tau: f64) -> Result<Self> {
        let n = state.n_qubits();
        // g_{s s'} = U (|s><s'|_source (x) 1) |psi>
        let mut g: Vec<Vec<C64>> = Vec::with_capacity(4);
        for s in 0..2 {
            for sp in 0..2 {
                let row = project_site(state.amplitudes(), n, source, sp);
                g.push(evolve_vec(&embed_site(&row, n, source, s), h, tau, DEFAULT_TOL)?.0);
            }
        }
        let zero = C64::new(0.0, 0.0);
        let mut gram = [[[[zero; 2]; 2]; 4]; 4];
        let low = n - 1 - target;
        for i in 0..4 {
            for j in i..4 {
                let mut m = [[zero; 2]; 2];
                for (idx, gi) in g[i].iter().enumerate() {
                    let b = (idx >> low) & 1;
                    let partner = idx & !(1 << low);
                    for bp in 0..2 {
                        let jdx = partner | (bp << low);
                        m[b][bp] += gi * g[j][jdx].conj();
                    }
                }
                gram[i][j] = m;
                gram[j][i] = [[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]];
            }
        }
        Ok(KickResponse { gram })
    }

    fn reduced(&self, v: &Mat2) -> Mat2 {
        let c = [v[0][0], v[0][1], v[1][0], v[1][1]];
        let mut out = [[C64::new(0.0, 0.0); 2]; 2];
        for i in 0..4 {
            for j in 0..4 {
                let w = c[i] * c[j].conj();
                for b in 0..2 {
                    for bp in 0..2 {
                        out[b][bp] += w * self.gram[i][j][b][bp];
                    }
                }
            }
        }
        out
    }
}

fn to_mat2(m: &DMatrix<C64>) -> Mat2 {
    [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]
}

fn expect(o: &Mat2, rho: &Mat2) -> f64 {
    (o[0][0] * rho[0][0] + o[0][1] * rho[1][0] + o[1][0] * rho[0][1] + o[1][1] * rho[1][1]).re
}

fn estimate(
    resp: &KickResponse,
    n_samples: usize,
    seed: u64,
    fixed_observable: Option<Mat2>,
) -> (f64, f64) {
    let per = n_samples / BATCHES;
    let extra = n_samples % BATCHES;
    let means: Vec<(f64, usize)> = (0..BATCHES)
        .into_par_iter()
        .map(|batch| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(batch as u64);
            let count = per + usize::from(batch < extra);
            let mut acc = 0.0;
            for _ in 0..count {
                let o = fixed_observable.unwrap_or_else(|| to_mat2(&hs_observable(2, &mut rng)));
                let v1 = to_mat2(&haar_unitary(2, &mut rng));
                let v2 = to_mat2(&haar_unitary(2, &mut rng));
                let d = expect(&o, &resp.reduced(&v1)) - expect(&o, &resp.reduced(&v2));
                acc += 0.5 * d * d;
            }
            (acc, count)
        })
        .collect();
    let mean = means.iter().map(|m| m.0).sum::<f64>() / n_samples as f64;
    let bm: Vec<f64> = means.iter().map(|&(s, c)| s / c as f64).collect();
    let var = bm.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (BATCHES as f64 - 1.0);
    (mean, (var / BATCHES as f64).sqrt())
}

/// Sampled influence: Haar kicks at the source, Hilbert-Schmidt random
/// observables at the target. Deterministic for a fixed seed.
pub fn ci_monte_carlo(
    state: &StateVector,
    h: &Hamiltonian,
    source: usize,
    target: usize,
    tau: f64,
    n_samples: usize,
    seed: u64,
) -> Result<CiValue> {
    if n_samples < MIN_SAMPLES {
        return Err(Error::InvalidArgument(format!("need at least {MIN_SAMPLES} samples, got {n_samples}")));
    }
    check_state(state, h, &[source, target])?;
    let resp = KickResponse::new(state, h, source, target, tau)?;
    let (value, stderr) = estimate(&resp, n_samples, seed, None);
    Ok(CiValue { value, method: CiMethod::MonteCarlo, stderr: Some(stderr) })
}

/// Exact influence by averaging over the single-qubit Clifford group instead
/// of the Haar measure. Independent of the Schmidt-sector route.
pub fn ci_design_average(
    state: &StateVector,
    h: &Hamiltonian,
    source: usize,
    target: usize,
    tau: f64,
) -> Result<CiValue> {
    check_state(state, h, &[source, target])?;
    let resp = KickResponse::new(state, h, source, target, tau)?;
    let group = single_qubit_cliffords();
    let mut mean = [[C64::new(0.0, 0.0); 2]; 2];
    let mut purity = 0.0;
    for c in &group {
        let r = resp.reduced(c);
        purity += expect(&r, &r);
        for b in 0..2 {
            for bp in 0..2 {
                mean[b][bp] += r[b][bp];
            }
        }
    }
    let k = group.len() as f64;
    for row in &mut mean {
        for z in row {
            *z /= k;
        }
    }
    Ok(CiValue::exact((purity / k - expect(&mean, &mean)) / 10.0))
}

/// Exact value and a Monte Carlo estimate, failing if they disagree by more
/// than five standard errors.
pub fn ci_cross_check(
    state: &StateVector,
    h: &Hamiltonian,
    source: usize,
    target: usize,
    tau: f64,
    n_samples: usize,
    seed: u64,
) -> Result<(CiValue, CiValue)> {
    let exact = ci_exact(state, h, source, target, tau)?;
    let mc = ci_monte_carlo(state, h, source, target, tau, n_samples, seed)?;
    let sigma = mc.stderr.unwrap_or(0.0);
    if (exact.value - mc.value).abs() > 5.0 * sigma + 1e-12 {
        return Err(Error::Consistency(format!(
            "Monte Carlo {:e} +- {:e} vs exact {:e}",
            mc.value, sigma, exact.value
        )));
    }
    Ok((exact, mc))
}
