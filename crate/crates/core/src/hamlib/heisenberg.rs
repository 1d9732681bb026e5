use nalgebra::DMatrix;

use super::{evolve_vec, expm_dense, Hamiltonian};
use crate::qcore::pauli::{Pauli, PauliString};
use crate::qcore::state::{embed_site, inner};
use crate::{Error, Result, C64};

/// Largest chain for which the dense decomposition is attempted.
pub const DENSE_EVOLUTION_LIMIT: usize = 10;

/// `O(tau) = 1_q (x) nu[0] + sum_b sigma^b_q (x) nu[b]`, each `nu` a dense
/// operator on the other sites (in their natural order).
#[derive(Clone, Debug)]
pub struct SiteDecomposition {
    pub q: usize,
    pub n: usize,
    /// index 0 is the identity part, then X, Y, Z
    pub nu: [DMatrix<C64>; 4],
}

impl SiteDecomposition {
    pub fn reconstruct(&self) -> DMatrix<C64> {
        let dim = 1usize << self.n;
        let mut out = DMatrix::zeros(dim, dim);
        for (k, p) in Pauli::ALL.iter().enumerate() {
            let m = p.matrix();
            for r in 0..dim {
                for c in 0..dim {
                    let (sr, rr) = split_index(r, self.n, self.q);
                    let (sc, rc) = split_index(c, self.n, self.q);
                    out[(r, c)] += m[sr][sc] * self.nu[k][(rr, rc)];
                }
            }
        }
        out
    }
}

/// Split a full index into (bit at q, index over the remaining sites).
fn split_index(j: usize, n: usize, q: usize) -> (usize, usize) {
    let low_bits = n - 1 - q;
    let s = (j >> low_bits) & 1;
    let low = j & ((1usize << low_bits) - 1);
    let high = j >> (low_bits + 1);
    (s, (high << low_bits) | low)
}

/// Dense split of `sigma^alpha_x(tau) = U^dag sigma U`, `U = exp(-i H tau)`,
/// around site `q`: `nu^b = tr_q(sigma^b_q O) / 2`.
pub fn heisenberg_site_decomposition(
    h: &Hamiltonian,
    alpha: Pauli,
    x: usize,
    q: usize,
    tau: f64,
) -> Result<SiteDecomposition> {
    let n = h.n_qubits();
    for s in [x, q] {
        if s >= n {
            return Err(Error::SiteOutOfRange { site: s, n });
        }
    }
    if n > DENSE_EVOLUTION_LIMIT {
        return Err(Error::SupportOverflow(n));
    }
    let u = expm_dense(h, tau)?;
    let sigma = PauliString::single(n, x, alpha).to_dense();
    let o = u.adjoint() * sigma * u;
    let half = 1usize << (n - 1);
    let nu = Pauli::ALL.map(|p| {
        let m = p.matrix();
        let mut out = DMatrix::zeros(half, half);
        for r in 0..half {
            for c in 0..half {
                let mut acc = C64::new(0.0, 0.0);
                for s in 0..2 {
                    for sp in 0..2 {
                        if m[s][sp] == C64::new(0.0, 0.0) {
                            continue;
                        }
                        let fr = crate::qcore::state::insert_bit(r, n, q, sp);
                        let fc = crate::qcore::state::insert_bit(c, n, q, s);
                        acc += m[s][sp] * o[(fr, fc)];
                    }
                }
                out[(r, c)] = acc * 0.5;
            }
        }
        out
    });
    Ok(SiteDecomposition { q, n, nu })
}

/// `U(tau) |s>_q |phi_b>` for (s, b) in row-major order 00, 01, 10, 11.
pub fn evolved_dyads(
    h: &Hamiltonian,
    complement: &[Vec<C64>; 2],
    q: usize,
    tau: f64,
    tol: f64,
) -> Result<[Vec<C64>; 4]> {
    let n = h.n_qubits();
    if q >= n {
        return Err(Error::SiteOutOfRange { site: q, n });
    }
    let mut out: [Vec<C64>; 4] = Default::default();
    for s in 0..2 {
        for b in 0..2 {
            let w = embed_site(&complement[b], n, q, s);
            out[2 * s + b] = evolve_vec(&w, h, tau, tol)?.0;
        }
    }
    Ok(out)
}

/// Matrix elements `<phi_a| nu^b |phi_b'>` of the split of `sigma^alpha_x(tau)`
/// around `q`, without forming any operator.
#[derive(Clone, Debug, PartialEq)]
pub struct NuElements {
    /// `[b][a][a']`, b = 0 (identity part), X, Y, Z
    pub elements: [[[C64; 2]; 2]; 4],
}

impl NuElements {
    pub fn get(&self, beta: Pauli, a: usize, b: usize) -> C64 {
        self.elements[beta as usize][a][b]
    }
}

/// Kernel `K[(s a), (s' b)] = <e_{s a}| sigma^alpha_x |e_{s' b}>` over evolved dyads.
pub fn dyad_kernel(evolved: &[Vec<C64>; 4], n: usize, x: usize, alpha: Pauli) -> [[C64; 4]; 4] {
    let p = PauliString::single(n, x, alpha);
    let mut k = [[C64::new(0.0, 0.0); 4]; 4];
    let images: Vec<Vec<C64>> = evolved.iter().map(|e| p.apply(e)).collect();
    for r in 0..4 {
        for c in r..4 {
            let v = inner(&evolved[r], &images[c]);
            k[r][c] = v;
            k[c][r] = v.conj();
        }
    }
    k
}

pub fn nu_from_kernel(k: &[[C64; 4]; 4]) -> NuElements {
    let mut elements = [[[C64::new(0.0, 0.0); 2]; 2]; 4];
    for (bi, p) in Pauli::ALL.iter().enumerate() {
        let m = p.matrix();
        for a in 0..2 {
            for b in 0..2 {
                let mut acc = C64::new(0.0, 0.0);
                for s in 0..2 {
                    for sp in 0..2 {
                        acc += m[s][sp] * k[2 * sp + a][2 * s + b];
                    }
                }
                elements[bi][a][b] = acc * 0.5;
            }
        }
    }
    NuElements { elements }
}

/// Matrix-free split of `sigma^alpha_x(tau)` around `q` against the supplied
/// complement vectors.
pub fn nu_elements(
    h: &Hamiltonian,
    alpha: Pauli,
    x: usize,
    q: usize,
    tau: f64,
    complement: &[Vec<C64>; 2],
    tol: f64,
) -> Result<NuElements> {
    let n = h.n_qubits();
    if x >= n {
        return Err(Error::SiteOutOfRange { site: x, n });
    }
    let ev = evolved_dyads(h, complement, q, tau, tol)?;
    Ok(nu_from_kernel(&dyad_kernel(&ev, n, x, alpha)))
}
