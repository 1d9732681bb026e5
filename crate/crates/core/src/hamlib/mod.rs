//! Spin-chain Hamiltonians, Krylov time evolution and the Heisenberg-picture
//! split of a single-site Pauli around another site.

mod heisenberg;
mod krylov;

pub use heisenberg::{
    dyad_kernel, evolved_dyads, heisenberg_site_decomposition, nu_elements, nu_from_kernel, NuElements, SiteDecomposition, DENSE_EVOLUTION_LIMIT,
};
pub use krylov::{evolve, evolve_vec, expm_dense, EvolutionResult, DEFAULT_TOL};

use nalgebra::DMatrix;

use crate::qcore::pauli::{i_pow, Pauli, PauliString, PauliSum};
use crate::qcore::state::StateVector;
use crate::{Error, Result, C64};

/// Real-weighted sum of Pauli strings. Strings carry phase +1, so the
/// operator is Hermitian by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct Hamiltonian {
    n: usize,
    terms: Vec<(f64, PauliString)>,
    // (coefficient including i^#Y, x mask, z mask) for the matvec
    packed: Vec<(C64, usize, usize)>,
}

impl Hamiltonian {
    pub fn new(n: usize, terms: Vec<(f64, PauliString)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("Hamiltonian needs at least one site".into()));
        }
        for (c, p) in &terms {
            if p.n_sites() != n {
                return Err(Error::DimensionMismatch(p.n_sites(), n));
            }
            if p.phase() != 0 {
                return Err(Error::InvalidArgument(format!("term {p} must have phase +1")));
            }
            if !c.is_finite() {
                return Err(Error::InvalidArgument("non-finite coefficient".into()));
            }
        }
        let terms: Vec<_> = terms.into_iter().filter(|(c, _)| *c != 0.0).collect();
        let packed = terms
            .iter()
            .map(|(c, p)| {
                let (xm, zm, ny) = p.masks();
                (i_pow(ny % 4) * *c, xm, zm)
            })
            .collect();
        Ok(Hamiltonian { n, terms, packed })
    }

    pub fn zero(n: usize) -> Self {
        Hamiltonian { n, terms: Vec::new(), packed: Vec::new() }
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Sum of |coefficients|, an upper bound on the operator norm.
    pub fn norm_bound(&self) -> f64 {
        self.terms.iter().map(|(c, _)| c.abs()).sum()
    }

    pub fn apply_add(&self, v: &[C64], out: &mut [C64]) {
        for &(c, xm, zm) in &self.packed {
            for (j, &a) in v.iter().enumerate() {
                let s = if (j & zm).count_ones() & 1 == 1 { -c } else { c };
                out[j ^ xm] += s * a;
            }
        }
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); v.len()];
        self.apply_add(v, &mut out);
        out
    }

    pub fn energy(&self, state: &StateVector) -> f64 {
        let hv = self.apply(state.amplitudes());
        crate::qcore::state::inner(state.amplitudes(), &hv).re
    }

    pub fn to_pauli_sum(&self) -> PauliSum {
        let terms = self.terms.iter().map(|(c, p)| (C64::new(*c, 0.0), p.clone())).collect();
        PauliSum::from_terms(self.n, terms).expect("site counts checked at construction")
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        self.to_pauli_sum().to_dense()
    }

    /// Keep only the terms supported inside `sites`.
    pub fn restricted(&self, sites: &[usize]) -> Hamiltonian {
        let terms = self
            .terms
            .iter()
            .filter(|(_, p)| p.support().iter().all(|s| sites.contains(s)))
            .cloned()
            .collect();
        Hamiltonian::new(self.n, terms).expect("subset of valid terms")
    }

    pub fn scaled(&self, k: f64) -> Hamiltonian {
        let terms = self.terms.iter().map(|(c, p)| (c * k, p.clone())).collect();
        Hamiltonian::new(self.n, terms).expect("scaling keeps terms valid")
    }

    pub fn plus(&self, other: &Hamiltonian) -> Result<Hamiltonian> {
        if other.n != self.n {
            return Err(Error::DimensionMismatch(other.n, self.n));
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Hamiltonian::new(self.n, terms)
    }
}

/// `j sum X_k X_{k+1} + hx sum X_k + hz sum Z_k`, open chain.
pub fn build_ising(n: usize, j: f64, hx: f64, hz: f64) -> Result<Hamiltonian> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("Ising chain needs n >= 2, got {n}")));
    }
    let mut terms = Vec::new();
    for k in 0..n - 1 {
        terms.push((j, PauliString::from_sites(n, &[(k, Pauli::X), (k + 1, Pauli::X)])));
    }
    for k in 0..n {
        terms.push((hx, PauliString::single(n, k, Pauli::X)));
    }
    for k in 0..n {
        terms.push((hz, PauliString::single(n, k, Pauli::Z)));
    }
    Hamiltonian::new(n, terms)
}

/// `sum_i P_{i-1} X_i P_{i+1}` with `P = (1 + Z)/2`; the end sites only carry
/// the projector of their one neighbour.
pub fn build_pxp(n: usize) -> Result<Hamiltonian> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("PXP chain needs n >= 3, got {n}")));
    }
    let mut terms = Vec::new();
    for i in 0..n {
        let nbrs: Vec<usize> = [i.checked_sub(1), Some(i + 1).filter(|&k| k < n)].into_iter().flatten().collect();
        let w = 0.5f64.powi(nbrs.len() as i32);
        // expand the product of (1 + Z_k) over neighbours
        for mask in 0..(1usize << nbrs.len()) {
            let mut sites = vec![(i, Pauli::X)];
            for (b, &k) in nbrs.iter().enumerate() {
                if mask >> b & 1 == 1 {
                    sites.push((k, Pauli::Z));
                }
            }
            terms.push((w, PauliString::from_sites(n, &sites)));
        }
    }
    Hamiltonian::new(n, terms)
}

/// `0101...` with site 0 unexcited.
pub fn neel_state(n: usize) -> StateVector {
    let label: String = (0..n).map(|k| if k % 2 == 0 { '0' } else { '1' }).collect();
    StateVector::from_label(&label).expect("valid label")
}
