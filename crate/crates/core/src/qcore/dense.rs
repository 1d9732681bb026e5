//! Dense operators on a handful of explicit sites.

use nalgebra::{DMatrix, DVector};

use super::state::StateVector;
use crate::{Error, Result, C64};

/// Largest support kept as an explicit matrix.
pub const DENSE_SITE_LIMIT: usize = 12;

#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    support: Vec<usize>,
    matrix: DMatrix<C64>,
}

impl DenseOperator {
    pub fn new(support: Vec<usize>, matrix: DMatrix<C64>) -> Result<Self> {
        if support.len() > DENSE_SITE_LIMIT {
            return Err(Error::SupportOverflow(support.len()));
        }
        let d = 1usize << support.len();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch(matrix.nrows(), d));
        }
        let mut seen = support.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != support.len() {
            return Err(Error::InvalidArgument("duplicate site in support".into()));
        }
        Ok(DenseOperator { support, matrix })
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).norm()
    }

    pub fn unitarity_defect(&self) -> f64 {
        let d = self.dim();
        (self.matrix.adjoint() * &self.matrix - DMatrix::<C64>::identity(d, d)).norm()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_defect() <= 1e-12
    }

    pub fn is_unitary(&self) -> bool {
        self.unitarity_defect() <= 1e-12
    }

    /// tr(rho^2); errors when the trace is off by more than 1e-8.
    pub fn purity(&self) -> Result<f64> {
        let tr = self.trace();
        if (tr.re - 1.0).abs() > 1e-8 || tr.im.abs() > 1e-8 {
            return Err(Error::NotNormalized(tr.re));
        }
        Ok(self.matrix.iter().map(|z| z.norm_sqr()).sum::<f64>())
    }

    /// Real eigenvalues of a Hermitian matrix, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }
}

pub fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    // each eigenvalue shows up twice in the real embedding
    let (ev, _) = embedded_eigen(m);
    let mut ev: Vec<f64> = ev.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev.into_iter().step_by(2).collect()
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix.
pub fn hermitian_eigen(m: &DMatrix<C64>) -> (Vec<f64>, Vec<DVector<C64>>) {
    let d = m.nrows();
    let (ev, vecs) = embedded_eigen(m);
    let mut order: Vec<usize> = (0..2 * d).collect();
    order.sort_by(|&a, &b| ev[a].partial_cmp(&ev[b]).unwrap());
    let mut values = Vec::with_capacity(d);
    let mut vectors: Vec<DVector<C64>> = Vec::with_capacity(d);
    // a real-embedding eigenvector (x, y) gives x + iy; the partner (-y, x) is
    // the same complex ray, so keep only what is new after projection
    for k in order {
        if vectors.len() == d {
            break;
        }
        let mut z = DVector::from_fn(d, |r, _| C64::new(vecs[(r, k)], vecs[(r + d, k)]));
        for _ in 0..2 {
            for q in &vectors {
                let c = q.dotc(&z);
                z -= q * c;
            }
        }
        let nz = z.norm();
        if nz > 0.5 {
            z /= C64::new(nz, 0.0);
            values.push(z.dotc(&(m * &z)).re);
            vectors.push(z);
        }
    }
    (values, vectors)
}

/// Eigen-decomposition of the real symmetric matrix `[[A, -B], [B, A]]` for
/// `m = A + iB` (Hermitian part only).
fn embedded_eigen(m: &DMatrix<C64>) -> (DVector<f64>, DMatrix<f64>) {
    let d = m.nrows();
    let real = DMatrix::from_fn(2 * d, 2 * d, |r, c| {
        let z = (m[(r % d, c % d)] + m[(c % d, r % d)].conj()) * 0.5;
        match (r < d, c < d) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    jacobi_eigen(real)
}

/// Cyclic Jacobi for a real symmetric matrix. Slow but accurate; the QR-based
/// solver in nalgebra occasionally stalls on structured spin-chain matrices.
pub fn jacobi_eigen(mut a: DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let d = a.nrows();
    let mut v = DMatrix::<f64>::identity(d, d);
    let scale = a.norm().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..d {
            for q in p + 1..d {
                off += a[(p, q)] * a[(p, q)];
            }
        }
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..d {
            for q in p + 1..d {
                let apq = a[(p, q)];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..d {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..d {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..d {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    (a.diagonal(), v)
}

/// `f(m)` for Hermitian `m` and a real function `f`, via the real embedding.
pub fn hermitian_function(m: &DMatrix<C64>, f: impl Fn(f64) -> f64) -> DMatrix<C64> {
    let d = m.nrows();
    let (ev, vecs) = embedded_eigen(m);
    let fv = ev.map(&f);
    // first block column of V f(L) V^T holds [Re f(m); Im f(m)]
    let scaled = DMatrix::from_fn(2 * d, 2 * d, |r, c| vecs[(r, c)] * fv[c]);
    let top = vecs.rows(0, d).transpose();
    let full = scaled * top;
    DMatrix::from_fn(d, d, |r, c| C64::new(full[(r, c)], full[(r + d, c)]))
}

/// `exp(-i m t)` by scaling and squaring of the Taylor series.
pub fn expm_i(m: &DMatrix<C64>, t: f64) -> DMatrix<C64> {
    let d = m.nrows();
    let a = m * C64::new(0.0, -t);
    let nrm = a.row_iter().map(|r| r.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max);
    let mut squarings = 0;
    let mut scale = 1.0;
    while nrm * scale > 0.25 {
        scale *= 0.5;
        squarings += 1;
    }
    let a = a * C64::new(scale, 0.0);
    let mut term = DMatrix::<C64>::identity(d, d);
    let mut out = term.clone();
    for k in 1..=18 {
        term = &term * &a * C64::new(1.0 / k as f64, 0.0);
        out += &term;
    }
    for _ in 0..squarings {
        out = &out * &out;
    }
    out
}

fn check_sites(n: usize, sites: &[usize]) -> Result<()> {
    if sites.is_empty() {
        return Err(Error::InvalidArgument("empty site list".into()));
    }
    for (k, &s) in sites.iter().enumerate() {
        if s >= n {
            return Err(Error::SiteOutOfRange { site: s, n });
        }
        if sites[..k].contains(&s) {
            return Err(Error::InvalidArgument(format!("duplicate site {s}")));
        }
    }
    Ok(())
}

/// Split a full index into (kept index in `keep` order, rest index in ascending site order).
fn split_index(i: usize, n: usize, keep: &[usize], rest: &[usize]) -> (usize, usize) {
    let bit = |s: usize| (i >> (n - 1 - s)) & 1;
    let k = keep.iter().fold(0, |acc, &s| (acc << 1) | bit(s));
    let r = rest.iter().fold(0, |acc, &s| (acc << 1) | bit(s));
    (k, r)
}

/// Reduced density matrix on `keep`; matrix ordering follows `keep` (first entry most significant).
pub fn partial_trace(state: &StateVector, keep: &[usize]) -> Result<DenseOperator> {
    let n = state.n_qubits();
    check_sites(n, keep)?;
    if keep.len() > DENSE_SITE_LIMIT {
        return Err(Error::SupportOverflow(keep.len()));
    }
    let rest: Vec<usize> = (0..n).filter(|s| !keep.contains(s)).collect();
    let dk = 1usize << keep.len();
    let dr = 1usize << rest.len();
    let mut m = DMatrix::<C64>::zeros(dk, dr);
    for (i, &a) in state.amplitudes().iter().enumerate() {
        let (k, r) = split_index(i, n, keep, &rest);
        m[(k, r)] = a;
    }
    DenseOperator::new(keep.to_vec(), &m * m.adjoint())
}

/// Partial trace of a dense operator down to `keep`, a subset of its support.
pub fn partial_trace_operator(op: &DenseOperator, keep: &[usize]) -> Result<DenseOperator> {
    let sup = op.support();
    let m = sup.len();
    let mut pos = Vec::with_capacity(keep.len());
    for &s in keep {
        match sup.iter().position(|&t| t == s) {
            Some(p) if !pos.contains(&p) => pos.push(p),
            _ => return Err(Error::InvalidArgument(format!("site {s} not in operator support"))),
        }
    }
    let rest: Vec<usize> = (0..m).filter(|p| !pos.contains(p)).collect();
    let dk = 1usize << pos.len();
    let mut out = DMatrix::<C64>::zeros(dk, dk);
    let d = op.dim();
    for i in 0..d {
        let (ki, ri) = split_index(i, m, &pos, &rest);
        for j in 0..d {
            let (kj, rj) = split_index(j, m, &pos, &rest);
            if ri == rj {
                out[(ki, kj)] += op.matrix()[(i, j)];
            }
        }
    }
    DenseOperator::new(keep.to_vec(), out)
}

/// tr(rho^2)
pub fn purity(rho: &DenseOperator) -> Result<f64> {
    rho.purity()
}

/// -log tr(rho^2), natural log.
pub fn renyi2_entropy(rho: &DenseOperator) -> Result<f64> {
    Ok(-rho.purity()?.ln())
}

/// -tr(rho log rho), natural log.
pub fn von_neumann_entropy(rho: &DenseOperator) -> Result<f64> {
    rho.purity()?;
    Ok(rho
        .hermitian_eigenvalues()
        .into_iter()
        .filter(|&p| p > 1e-15)
        .map(|p| -p * p.ln())
        .sum())
}

/// (A|B) = tr(A^dag B) / d
pub fn hs_inner(a: &DenseOperator, b: &DenseOperator) -> Result<C64> {
    hs_inner_matrix(a.matrix(), b.matrix())
}

pub fn hs_inner_matrix(a: &DMatrix<C64>, b: &DMatrix<C64>) -> Result<C64> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch(a.nrows(), b.nrows()));
    }
    let d = a.nrows() as f64;
    Ok(a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum::<C64>() / d)
}

/// Kronecker product, left factor most significant.
pub fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}

/// 1_{others} (x) op, expanded to the full register of `n` sites.
pub fn pad_identity(op: &DenseOperator, n: usize) -> Result<DMatrix<C64>> {
    if n > DENSE_SITE_LIMIT {
        return Err(Error::SupportOverflow(n));
    }
    let sup = op.support();
    if let Some(&s) = sup.iter().find(|&&s| s >= n) {
        return Err(Error::SiteOutOfRange { site: s, n });
    }
    let rest: Vec<usize> = (0..n).filter(|s| !sup.contains(s)).collect();
    let d = 1usize << n;
    let mut out = DMatrix::<C64>::zeros(d, d);
    for i in 0..d {
        let (ki, ri) = split_index(i, n, sup, &rest);
        for j in 0..d {
            let (kj, rj) = split_index(j, n, sup, &rest);
            if ri == rj {
                out[(i, j)] = op.matrix()[(ki, kj)];
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::pauli::{Pauli, PauliString};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn product_and_bell_reductions() {
        let s = StateVector::from_label("00").unwrap();
        let r = partial_trace(&s, &[0]).unwrap();
        assert!((r.matrix()[(0, 0)] - c(1.0)).norm() < 1e-15);
        assert!(r.matrix()[(1, 1)].norm() < 1e-15);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bell = StateVector::new(2, vec![c(h), c(0.0), c(0.0), c(h)]).unwrap();
        let r = partial_trace(&bell, &[0]).unwrap();
        assert!((r.matrix() - DMatrix::<C64>::identity(2, 2) * c(0.5)).norm() < 1e-15);
    }

    #[test]
    fn partial_trace_matches_index_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let s = StateVector::random(4, &mut rng);
        let r = partial_trace(&s, &[1, 3]).unwrap();
        // brute force: rho[(a1 a3),(b1 b3)] = sum_{t0,t2} psi(t0 a1 t2 a3) psi*(t0 b1 t2 b3)
        let amp = |b0: usize, b1: usize, b2: usize, b3: usize| s.amplitudes()[(b0 << 3) | (b1 << 2) | (b2 << 1) | b3];
        for a1 in 0..2 {
            for a3 in 0..2 {
                for b1 in 0..2 {
                    for b3 in 0..2 {
                        let mut acc = c(0.0);
                        for t0 in 0..2 {
                            for t2 in 0..2 {
                                acc += amp(t0, a1, t2, a3) * amp(t0, b1, t2, b3).conj();
                            }
                        }
                        assert!((r.matrix()[(a1 * 2 + a3, b1 * 2 + b3)] - acc).norm() < 1e-14);
                    }
                }
            }
        }
    }

    #[test]
    fn entropy_examples() {
        let pure = partial_trace(&StateVector::from_label("0+").unwrap(), &[1]).unwrap();
        assert!(renyi2_entropy(&pure).unwrap().abs() < 1e-14);
        let mixed = DenseOperator::new(vec![0], DMatrix::identity(2, 2) * c(0.5)).unwrap();
        assert!((renyi2_entropy(&mixed).unwrap() - 2f64.ln()).abs() < 1e-14);
        assert!((von_neumann_entropy(&mixed).unwrap() - 2f64.ln()).abs() < 1e-14);
        let diag = DenseOperator::new(vec![0], DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(0.75), c(0.25)]))).unwrap();
        assert!((renyi2_entropy(&diag).unwrap() + (10.0f64 / 16.0).ln()).abs() < 1e-14);
        let bad = DenseOperator::new(vec![0], DMatrix::identity(2, 2)).unwrap();
        assert!(matches!(renyi2_entropy(&bad), Err(Error::NotNormalized(_))));
    }

    #[test]
    fn hs_inner_examples() {
        let x = PauliString::single(1, 0, Pauli::X).to_dense();
        let y = PauliString::single(1, 0, Pauli::Y).to_dense();
        assert!((hs_inner_matrix(&x, &x).unwrap() - c(1.0)).norm() < 1e-15);
        assert!(hs_inner_matrix(&x, &y).unwrap().norm() < 1e-15);
        let xz = PauliString::parse("XZ").unwrap().to_dense();
        assert!((hs_inner_matrix(&xz, &xz).unwrap() - c(1.0)).norm() < 1e-15);
        assert!(hs_inner_matrix(&x, &xz).is_err());
    }

    #[test]
    fn padding_round_trip() {
        let z = DenseOperator::new(vec![2], PauliString::single(1, 0, Pauli::Z).to_dense()).unwrap();
        let full = pad_identity(&z, 3).unwrap();
        assert!((full - PauliString::single(3, 2, Pauli::Z).to_dense()).norm() < 1e-15);
    }

    #[test]
    fn errors_on_bad_sites() {
        let s = StateVector::from_label("00").unwrap();
        assert!(matches!(partial_trace(&s, &[2]), Err(Error::SiteOutOfRange { .. })));
        assert!(partial_trace(&s, &[0, 0]).is_err());
        assert!(partial_trace(&s, &[]).is_err());
    }
}
