//! Leading small-interval behaviour of the influence.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::kernel::{check_state, four_trace_variance, Mat4};
use super::{CiMethod, CiValue, QUBIT_PAULI_WEIGHT};
use crate::hamlib::{Hamiltonian, DENSE_EVOLUTION_LIMIT};
use crate::qcore::dense::{pad_identity, partial_trace, partial_trace_operator};
use crate::qcore::schmidt::schmidt_split;
use crate::qcore::state::{embed_site, inner, norm};
use crate::qcore::{DenseOperator, Pauli, PauliString, StateVector};
use crate::{Error, Result, C64};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Which end of the interval the supplied state belongs to.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SameSiteConvention {
    /// State at the readout time; the kick happened `dt` earlier.
    #[default]
    StateAtTarget,
    /// State at the kick time; readout `dt` later.
    StateAtSource,
}

fn short(value: f64) -> CiValue {
    CiValue { value, method: CiMethod::ShortTime, stderr: None }
}

/// Reduced state of one site.
fn site_rho(state: &StateVector, site: usize) -> Result<[[C64; 2]; 2]> {
    let r = partial_trace(state, &[site])?;
    let m = r.matrix();
    Ok([[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]])
}

fn tr_prod(a: &[[C64; 2]; 2], b: &[[C64; 2]; 2]) -> C64 {
    a[0][0] * b[0][0] + a[0][1] * b[1][0] + a[1][0] * b[0][1] + a[1][1] * b[1][1]
}

/// Time derivative of the site purity under `h`.
pub fn purity_rate(state: &StateVector, h: &Hamiltonian, site: usize) -> Result<f64> {
    check_state(state, h, &[site])?;
    let n = state.n_qubits();
    let psi = state.amplitudes();
    let hpsi = h.apply(psi);
    let low = n - 1 - site;
    // M[s][s'] = sum_rest (H psi)[s, rest] conj(psi[s', rest])
    let mut m = [[ZERO; 2]; 2];
    for (i, hv) in hpsi.iter().enumerate() {
        let s = (i >> low) & 1;
        let base = i & !(1 << low);
        for sp in 0..2 {
            m[s][sp] += hv * psi[base | (sp << low)].conj();
        }
    }
    let i = C64::new(0.0, 1.0);
    let mut dot = [[ZERO; 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            dot[r][c] = -i * (m[r][c] - m[c][r].conj());
        }
    }
    Ok(2.0 * tr_prod(&site_rho(state, site)?, &dot).re)
}

/// Operator on the complement of `site` obtained by tracing `h` over the site.
fn traced_over_site(h: &Hamiltonian, site: usize) -> Vec<(f64, PauliString)> {
    let n = h.n_qubits();
    let rest: Vec<usize> = (0..n).filter(|&s| s != site).collect();
    h.terms()
        .iter()
        .filter(|(_, p)| p.letter(site) == Pauli::I)
        .map(|(c, p)| (2.0 * c, p.restrict(&rest)))
        .collect()
}

fn apply_terms(terms: &[(f64, PauliString)], v: &[C64]) -> Vec<C64> {
    let mut out = vec![ZERO; v.len()];
    for (c, p) in terms {
        p.apply_add(C64::new(*c, 0.0), v, &mut out);
    }
    out
}

/// Same-site influence for a short interval `dt`.
pub fn ci_short_time_same(
    state: &StateVector,
    h: &Hamiltonian,
    site: usize,
    dt: f64,
    convention: SameSiteConvention,
) -> Result<CiValue> {
    check_state(state, h, &[site])?;
    let rho = site_rho(state, site)?;
    let purity = tr_prod(&rho, &rho).re;
    let value = match convention {
        SameSiteConvention::StateAtTarget => {
            (purity - 0.5 - dt * purity_rate(state, h, site)?) / 10.0
        }
        SameSiteConvention::StateAtSource => {
            (purity - 0.5 - 2.0 * dt * dt / 3.0 * same_site_bracket(state, h, site)?) / 10.0
        }
    };
    Ok(short(value))
}

/// Second-order coefficient for the state-at-source convention, evaluated in
/// the Schmidt sector of `site`.
fn same_site_bracket(state: &StateVector, h: &Hamiltonian, site: usize) -> Result<f64> {
    let n = state.n_qubits();
    let pair = schmidt_split(state, site)?;
    let p = pair.weights;
    let g = traced_over_site(h, site);
    let phi = &pair.complement;
    let gphi: Vec<Vec<C64>> = phi.iter().map(|v| apply_terms(&g, v)).collect();

    // dyads w_{s a} and their images, index 2s + a
    let w: Vec<Vec<C64>> = (0..4).map(|i| embed_site(&phi[i & 1], n, site, i >> 1)).collect();
    let hw: Vec<Vec<C64>> = w.iter().map(|v| h.apply(v)).collect();
    let pw = |i: usize| p[i & 1];
    let mut hmat = [[ZERO; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            hmat[i][j] = inner(&w[i], &hw[j]);
        }
    }

    let mut m1 = [[ZERO; 2]; 2];
    for s in 0..2 {
        for sp in 0..2 {
            for a in 0..2 {
                m1[s][sp] += p[a] * hmat[2 * s + a][2 * sp + a];
            }
        }
    }
    let a_term = tr_prod(&m1, &m1).re;

    let gnorm: Vec<f64> = gphi.iter().map(|v| norm(v).powi(2)).collect();
    let mut b_term = 2.0 * (p[0] * p[0] * gnorm[0] + p[1] * p[1] * gnorm[1]);
    for a in 0..2 {
        for b in 0..2 {
            b_term -= 2.0 * p[a] * p[b] * inner(&phi[a], &gphi[b]).norm_sqr();
        }
    }

    let hnorm: Vec<f64> = hw.iter().map(|v| norm(v).powi(2)).collect();
    let c_term: f64 = (0..4).map(|i| pw(i) * hnorm[i]).sum();
    let mut d_term: f64 = (0..4).map(|i| 2.0 * pw(i) * pw(i) * hnorm[i]).sum();
    for i in 0..4 {
        for j in 0..4 {
            d_term -= 2.0 * pw(i) * pw(j) * hmat[i][j].norm_sqr();
        }
    }
    let e_term = p[0] * gnorm[0] + p[1] * gnorm[1];
    let f_term = (0..4).map(|i| pw(i) * hmat[i][i].re).sum::<f64>().powi(2);

    Ok(a_term - 0.5 * b_term - c_term + d_term + 0.5 * e_term - 0.5 * f_term)
}

/// Whether any term of `h` touches both sites and something else.
pub fn has_three_body_coupling(h: &Hamiltonian, a: usize, b: usize) -> bool {
    h.terms().iter().any(|(_, p)| {
        p.letter(a) != Pauli::I && p.letter(b) != Pauli::I && p.weight() > 2
    })
}

/// Exact coefficient of `dt^2` in the influence of `source` on a different
/// `target`, state at the kick: the Haar variance of `<V^dag i[H, sigma] V>`.
pub fn diff_site_commutator_coefficient(
    state: &StateVector,
    h: &Hamiltonian,
    source: usize,
    target: usize,
) -> Result<f64> {
    check_state(state, h, &[source, target])?;
    let n = state.n_qubits();
    let pair = schmidt_split(state, source)?;
    let w: Vec<Vec<C64>> = (0..4).map(|i| pair.dyad_vector(i >> 1, i & 1)).collect();
    let hw: Vec<Vec<C64>> = w.iter().map(|v| h.apply(v)).collect();
    let i_unit = C64::new(0.0, 1.0);
    let mut total = 0.0;
    for alpha in Pauli::XYZ {
        let sigma = PauliString::single(n, target, alpha);
        let mut k: Mat4 = [[ZERO; 4]; 4];
        for j in 0..4 {
            let hs = h.apply(&sigma.apply(&w[j]));
            let sh = sigma.apply(&hw[j]);
            let y: Vec<C64> = hs.iter().zip(&sh).map(|(x, z)| i_unit * (x - z)).collect();
            for (r, wr) in w.iter().enumerate() {
                k[r][j] = inner(wr, &y);
            }
        }
        total += four_trace_variance(&k, pair.weights);
    }
    Ok(QUBIT_PAULI_WEIGHT * total)
}

fn full_operator(m: DMatrix<C64>, support: Vec<usize>, n: usize) -> Result<DMatrix<C64>> {
    pad_identity(&DenseOperator::new(support, m)?, n)
}

fn traced(m: &DMatrix<C64>, n: usize, keep: &[usize]) -> Result<DMatrix<C64>> {
    let op = DenseOperator::new((0..n).collect(), m.clone())?;
    Ok(partial_trace_operator(&op, keep)?.matrix().clone())
}

/// Second-order influence between different sites built from dense reduced
/// operators; valid for any interaction range. Chains up to ten sites.
pub fn diff_site_general_form(
    state: &StateVector,
    h: &Hamiltonian,
    source: usize,
    target: usize,
    dt: f64,
) -> Result<f64> {
    check_state(state, h, &[source, target])?;
    let n = state.n_qubits();
    if n > DENSE_EVOLUTION_LIMIT {
        return Err(Error::SupportOverflow(n));
    }
    if source == target {
        return Err(Error::InvalidArgument("sites must differ".into()));
    }
    let d = (1usize << n) as f64;
    let not_source: Vec<usize> = (0..n).filter(|&s| s != source).collect();
    let not_target: Vec<usize> = (0..n).filter(|&s| s != target).collect();
    let env: Vec<usize> = (0..n).filter(|&s| s != source && s != target).collect();

    let hd = h.to_dense();
    let rho_rest = full_operator(partial_trace(state, &not_source)?.matrix().clone(), not_source.clone(), n)?;
    let h_source = full_operator(traced(&hd, n, &[source])?, vec![source], n)?;
    let h_rest = full_operator(traced(&hd, n, &not_source)?, not_source.clone(), n)?;
    let connected = &hd - h_source * C64::new(2.0 / d, 0.0) - h_rest * C64::new(0.5, 0.0)
        + DMatrix::<C64>::identity(1 << n, 1 << n) * (hd.trace() / d);
    let rho_env = if env.is_empty() {
        DMatrix::<C64>::identity(1 << n, 1 << n)
    } else {
        full_operator(partial_trace(state, &env)?.matrix().clone(), env, n)?
    };

    let rv = &rho_rest * &connected;
    let t1 = (&rv * &rho_env * &connected).trace();
    let m2 = traced(&rv, n, &not_target)?;
    let t2 = (&m2 * &m2).trace();
    let comm = &connected * &rho_rest - &rv;
    let m3 = traced(&comm, n, &[source, target])?;
    let t3 = (&m3 * &m3).trace() * 0.25;
    Ok(dt * dt / 15.0 * (t1 - t2 + t3).re)
}

/// Same quantity when no term couples both sites to a third one: only the
/// two-site coupling block and the two-site reduced state enter.
pub fn diff_site_nearest_neighbor_form(
    state: &StateVector,
    h: &Hamiltonian,
    source: usize,
    target: usize,
    dt: f64,
) -> Result<f64> {
    check_state(state, h, &[source, target])?;
    if source == target {
        return Err(Error::InvalidArgument("sites must differ".into()));
    }
    if has_three_body_coupling(h, source, target) {
        return Err(Error::InvalidArgument("three-site coupling present".into()));
    }
    let pair_sites = [source, target];
    let mut coupling = DMatrix::<C64>::zeros(4, 4);
    for (c, p) in h.terms() {
        if p.letter(source) != Pauli::I && p.letter(target) != Pauli::I {
            coupling += p.restrict(&pair_sites).to_dense() * C64::new(*c, 0.0);
        }
    }
    let rho = partial_trace(state, &pair_sites)?.matrix().clone();
    let rho_target = partial_trace(state, &[target])?.matrix().clone();
    // [source, target] tensors with index order (a, b, a', b')
    let el = |m: &DMatrix<C64>, a: usize, b: usize, ap: usize, bp: usize| m[(2 * a + b, 2 * ap + bp)];
    let trace_source = |m: &DMatrix<C64>| {
        DMatrix::from_fn(2, 2, |b, bp| el(m, 0, b, 0, bp) + el(m, 1, b, 1, bp))
    };
    let t1 = (trace_source(&(&rho * &rho)) * trace_source(&(&coupling * &coupling))).trace();
    // V on (A1, B) and rho on (A2, B) multiplied around the shared site
    let mut t2 = ZERO;
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    for b in 0..2 {
                        for c in 0..2 {
                            for dd in 0..2 {
                                for e in 0..2 {
                                    t2 += el(&coupling, i, b, j, c)
                                        * el(&rho, k, c, l, dd)
                                        * el(&coupling, j, dd, i, e)
                                        * el(&rho, l, e, k, b);
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    let lifted = DMatrix::<C64>::identity(2, 2).kronecker(&rho_target);
    let comm = &coupling * &lifted - &lifted * &coupling;
    let t3 = comm.iter().map(|z| z.norm_sqr()).sum::<f64>();
    Ok(dt * dt / 15.0 * ((t1 - t2).re - 0.25 * t3))
}

/// Leading-order influence of `source` on a different `target` after `dt`,
/// state at the kick.
pub fn ci_short_time_diff(
    state: &StateVector,
    h: &Hamiltonian,
    source: usize,
    target: usize,
    dt: f64,
) -> Result<CiValue> {
    if source == target {
        return Err(Error::InvalidArgument("sites must differ".into()));
    }
    let value = if !has_three_body_coupling(h, source, target) {
        diff_site_nearest_neighbor_form(state, h, source, target, dt)?
    } else if state.n_qubits() <= DENSE_EVOLUTION_LIMIT {
        diff_site_general_form(state, h, source, target, dt)?
    } else {
        dt * dt * diff_site_commutator_coefficient(state, h, source, target)?
    };
    Ok(short(value))
}
