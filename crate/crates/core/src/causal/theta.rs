//! The two factors of the exact influence in the dyad basis
//! `{|phi_r><phi_c|}` of the complement's Schmidt vectors (index `2r + c`).

use nalgebra::{DMatrix, DVector};

use super::kernel::{gamma_vectors_from, theta_unscaled, Mat4};
use crate::hamlib::{dyad_kernel, evolved_dyads, nu_from_kernel, Hamiltonian};
use crate::qcore::dense::hermitian_eigen;
use crate::qcore::schmidt::{schmidt_split, SchmidtPair};
use crate::qcore::{DenseOperator, Pauli, StateVector};
use crate::{Error, Result, C64};

fn to_dmatrix(m: &Mat4) -> DMatrix<C64> {
    DMatrix::from_fn(4, 4, |r, c| m[r][c])
}

/// State factor restricted to the dyads of the complement's Schmidt vectors.
#[derive(Clone, Debug)]
pub struct ThetaOperator {
    pub pair: SchmidtPair,
    /// Full Hilbert space dimension.
    pub dim: usize,
    pub matrix: DMatrix<C64>,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<DVector<C64>>,
}

pub fn theta(state: &StateVector, site: usize) -> Result<ThetaOperator> {
    let pair = schmidt_split(state, site)?;
    Ok(ThetaOperator::from_pair(pair))
}

impl ThetaOperator {
    pub fn from_pair(pair: SchmidtPair) -> Self {
        let dim = 1usize << pair.n_qubits();
        let matrix = to_dmatrix(&theta_unscaled(&pair)) * C64::new(dim as f64 / 2.0, 0.0);
        let (eigenvalues, eigenvectors) = hermitian_eigen(&matrix);
        ThetaOperator { pair, dim, matrix, eigenvalues, eigenvectors }
    }

    pub fn complement(&self) -> &[Vec<C64>; 2] {
        &self.pair.complement
    }

    fn complement_dim(&self) -> f64 {
        self.dim as f64 / 2.0
    }

    /// `d p1 p2 / 3` (twice), `d (p1^2 + p2^2) / 6`, and 0, ascending.
    pub fn table_eigenvalues(&self) -> [f64; 4] {
        let [p1, p2] = self.pair.weights;
        let d = self.dim as f64;
        let mut v = [d * p1 * p2 / 3.0, d * p1 * p2 / 3.0, d * (p1 * p1 + p2 * p2) / 6.0, 0.0];
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    /// Dyad coordinates of `p2 |phi_1><phi_1| + p1 |phi_2><phi_2|`.
    pub fn null_vector(&self) -> [C64; 4] {
        let [p1, p2] = self.pair.weights;
        [C64::new(p2, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(p1, 0.0)]
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// `(xi|Theta|xi)` for an operator on the complement given by its dyad
    /// coordinates `<phi_r|xi|phi_c>`.
    pub fn quadratic_form(&self, xi: &[C64; 4]) -> f64 {
        let v = DVector::from_column_slice(xi);
        v.dotc(&(&self.matrix * &v)).re / self.complement_dim()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }
}

/// Dynamics factor for one observable, with eigen-weights `mu_l` and unit
/// eigenvectors `u_l` in the same dyad basis.
#[derive(Clone, Debug)]
pub struct GammaOperator {
    pub matrix: DMatrix<C64>,
    pub weights: Vec<f64>,
    pub vectors: Vec<DVector<C64>>,
    /// Unnormalized dyad coordinates of the operators on the complement paired
    /// with sigma^X, sigma^Y, sigma^Z on the perturbed site.
    pub components: [[C64; 4]; 3],
}

impl GammaOperator {
    fn from_components(components: [[C64; 4]; 3], complement_dim: f64) -> Self {
        let mut matrix = DMatrix::<C64>::zeros(4, 4);
        for x in &components {
            let v = DVector::from_column_slice(x);
            matrix += &v * v.adjoint();
        }
        matrix /= C64::new(complement_dim, 0.0);
        let (weights, vectors) = hermitian_eigen(&matrix);
        GammaOperator { matrix, weights, vectors, components }
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.weights.iter().all(|w| w.abs() <= tol)
    }
}

/// Split of `observable(tau)` around `source`, seen through the supplied
/// complement vectors. `observable` must act on one site; its identity part
/// drops out.
pub fn gamma(
    h: &Hamiltonian,
    observable: &DenseOperator,
    source: usize,
    tau: f64,
    complement: &[Vec<C64>; 2],
    tol: f64,
) -> Result<GammaOperator> {
    let n = h.n_qubits();
    let [target] = observable.support() else {
        return Err(Error::InvalidArgument("observable must act on a single site".into()));
    };
    let target = *target;
    if target >= n || source >= n {
        return Err(Error::SiteOutOfRange { site: target.max(source), n });
    }
    if complement.iter().any(|c| c.len() != 1usize << (n - 1)) {
        return Err(Error::DimensionMismatch(complement[0].len(), 1usize << (n - 1)));
    }
    let m = observable.matrix();
    let ev = evolved_dyads(h, complement, source, tau, tol)?;
    let mut k = [[C64::new(0.0, 0.0); 4]; 4];
    for alpha in Pauli::XYZ {
        let s = alpha.matrix();
        // coefficient tr(sigma O) / 2
        let c = (s[0][0] * m[(0, 0)] + s[0][1] * m[(1, 0)] + s[1][0] * m[(0, 1)] + s[1][1] * m[(1, 1)]) * 0.5;
        if c.norm() == 0.0 {
            continue;
        }
        let ka = dyad_kernel(&ev, n, target, alpha);
        for r in 0..4 {
            for col in 0..4 {
                k[r][col] += c * ka[r][col];
            }
        }
    }
    let comps = gamma_vectors_from(&nu_from_kernel(&k));
    Ok(GammaOperator::from_components(comps, (1usize << (n - 1)) as f64))
}

/// `sum_{k,l} lambda_k mu_l |<v_k|u_l>|^2`, i.e. `tr(Theta gamma)`.
pub fn spectral_overlap(theta: &ThetaOperator, gamma: &GammaOperator) -> f64 {
    let mut acc = 0.0;
    for (lk, vk) in theta.eigenvalues.iter().zip(&theta.eigenvectors) {
        for (ml, ul) in gamma.weights.iter().zip(&gamma.vectors) {
            acc += lk * ml * vk.dotc(ul).norm_sqr();
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::causal::{ci_exact, QUBIT_PAULI_WEIGHT};
    use crate::hamlib::{build_ising, DEFAULT_TOL};
    use crate::qcore::{partial_trace, PauliString};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pauli_op(site: usize, p: Pauli) -> DenseOperator {
        let m = p.matrix();
        DenseOperator::new(vec![site], DMatrix::from_fn(2, 2, |r, c| m[r][c])).unwrap()
    }

    #[test]
    fn bell_state_spectrum() {
        let s = StateVector::new(2, vec![C64::new(0.5f64.sqrt(), 0.0), 0.0.into(), 0.0.into(), C64::new(0.5f64.sqrt(), 0.0)]).unwrap();
        let th = theta(&s, 0).unwrap();
        let want = [0.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0];
        for (a, b) in th.eigenvalues.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn table_rows_on_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [2usize, 4, 6] {
            for q in 0..n {
                let s = StateVector::random(n, &mut rng);
                let th = theta(&s, q).unwrap();
                assert!(th.min_eigenvalue() > -1e-12);
                for (a, b) in th.eigenvalues.iter().zip(th.table_eigenvalues()) {
                    assert!((a - b).abs() < 1e-10, "{a} {b}");
                }
                let rho = partial_trace(&s, &[q]).unwrap();
                let pur = rho.purity().unwrap();
                // Frobenius norm taken relative to the site dimension
                let want = th.dim as f64 * (1.0 - pur / 2.0) / 3.0;
                assert!((th.trace() - want).abs() < 1e-10);
                let nv = DVector::from_column_slice(&th.null_vector());
                assert!((&th.matrix * nv).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn product_state_quadratic_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let s = StateVector::from_label("+01").unwrap();
        let th = theta(&s, 1).unwrap();
        for _ in 0..10 {
            let xi: [C64; 4] = std::array::from_fn(|_| C64::new(rand::Rng::gen::<f64>(&mut rng) - 0.5, rand::Rng::gen::<f64>(&mut rng) - 0.5));
            // rho_{A^c} = |phi_0><phi_0| so tr(rho xi) = xi_00
            assert!((th.quadratic_form(&xi) - xi[0].norm_sqr() / 3.0).abs() < 1e-13);
        }
    }

    #[test]
    fn two_qubit_rank_one_gamma() {
        let j = 0.45;
        let h = Hamiltonian::new(2, vec![(j, PauliString::parse("XZ").unwrap())]).unwrap();
        let s = StateVector::from_label("0r").unwrap();
        let th = theta(&s, 0).unwrap();
        let comp = th.complement();
        let y = Pauli::Y.matrix();
        let ycoords: [C64; 4] = std::array::from_fn(|i| {
            let (r, c) = (i / 2, i % 2);
            let yc = [y[0][0] * comp[c][0] + y[0][1] * comp[c][1], y[1][0] * comp[c][0] + y[1][1] * comp[c][1]];
            comp[r][0].conj() * yc[0] + comp[r][1].conj() * yc[1]
        });
        let yv = DVector::from_column_slice(&ycoords);
        let mut worst: f64 = 0.0;
        for k in 0..=100 {
            let t = std::f64::consts::PI * k as f64 / 100.0;
            let g = gamma(&h, &pauli_op(1, Pauli::X), 0, t, comp, DEFAULT_TOL).unwrap();
            // |Y)(Y| with the operator normalized on the complement
            let want = &yv * yv.adjoint() * C64::new((2.0 * j * t).sin().powi(2) / 2.0, 0.0);
            worst = worst.max((&g.matrix - want).norm());
            let gz = gamma(&h, &pauli_op(1, Pauli::Z), 0, t, comp, DEFAULT_TOL).unwrap();
            assert!(gz.is_zero(1e-14));
        }
        assert!(worst <= 1e-12, "{worst}");
    }

    #[test]
    fn spectral_overlap_reproduces_ci() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let h = build_ising(4, 1.0, 0.5, -0.2).unwrap();
        let s = StateVector::random(4, &mut rng);
        for (a, b, t) in [(0, 1, 0.3), (2, 2, -0.7), (3, 0, 1.1)] {
            let th = theta(&s, a).unwrap();
            let total: f64 = Pauli::XYZ
                .iter()
                .map(|&p| spectral_overlap(&th, &gamma(&h, &pauli_op(b, p), a, t, th.complement(), DEFAULT_TOL).unwrap()))
                .sum();
            let want = ci_exact(&s, &h, a, b, t).unwrap().value;
            assert!((QUBIT_PAULI_WEIGHT * total - want).abs() < 1e-10);
        }
    }

    #[test]
    fn equal_time_gamma_vanishes() {
        let h = build_ising(3, 1.0, 0.2, 0.1).unwrap();
        let s = StateVector::from_label("0+1").unwrap();
        let th = theta(&s, 0).unwrap();
        let g = gamma(&h, &pauli_op(2, Pauli::X), 0, 0.0, th.complement(), DEFAULT_TOL).unwrap();
        assert!(g.is_zero(1e-15));
        assert!(spectral_overlap(&th, &g).abs() < 1e-15);
    }
}
