use rand::Rng;
use rand_distr::StandardNormal;

use super::pauli::PauliString;
use crate::{Error, Result, C64};

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Pure state of `n` qubits. Site 0 is the most significant bit of the index.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<C64>,
}

impl StateVector {
    pub fn new(n: usize, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != 1usize << n {
            return Err(Error::DimensionMismatch(amps.len(), 1usize << n));
        }
        Ok(StateVector { n, amps })
    }

    pub fn basis(n: usize, index: usize) -> Self {
        let mut amps = vec![ZERO; 1 << n];
        amps[index] = ONE;
        StateVector { n, amps }
    }

    /// Product state from single-qubit amplitude pairs, site 0 first.
    pub fn product(qubits: &[[C64; 2]]) -> Self {
        let mut amps = vec![ONE];
        for q in qubits {
            let mut next = Vec::with_capacity(amps.len() * 2);
            for a in &amps {
                next.push(a * q[0]);
                next.push(a * q[1]);
            }
            amps = next;
        }
        let mut s = StateVector { n: qubits.len(), amps };
        s.normalize();
        s
    }

    /// Product state from a label such as `"01+-rl"` (r, l are the Y eigenstates).
    pub fn from_label(label: &str) -> Result<Self> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let qs = label
            .chars()
            .map(|c| match c {
                '0' => Ok([ONE, ZERO]),
                '1' => Ok([ZERO, ONE]),
                '+' => Ok([C64::new(h, 0.0), C64::new(h, 0.0)]),
                '-' => Ok([C64::new(h, 0.0), C64::new(-h, 0.0)]),
                'r' => Ok([C64::new(h, 0.0), C64::new(0.0, h)]),
                'l' => Ok([C64::new(h, 0.0), C64::new(0.0, -h)]),
                _ => Err(Error::InvalidArgument(format!("bad state label character {c:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        if qs.is_empty() {
            return Err(Error::InvalidArgument("empty state label".into()));
        }
        Ok(Self::product(&qs))
    }

    /// Haar-random pure state (normalized complex Gaussian vector).
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let amps = (0..1usize << n)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let mut s = StateVector { n, amps };
        s.normalize();
        s
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amps)
    }

    pub fn normalize(&mut self) {
        let nrm = self.norm();
        if nrm > 0.0 {
            for a in &mut self.amps {
                *a /= nrm;
            }
        }
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm() - 1.0).abs() <= tol
    }

    /// <self|other>
    pub fn inner(&self, other: &StateVector) -> C64 {
        inner(&self.amps, &other.amps)
    }

    pub fn expectation(&self, p: &PauliString) -> C64 {
        inner(&self.amps, &p.apply(&self.amps))
    }

    pub fn apply_pauli(&self, p: &PauliString) -> StateVector {
        StateVector { n: self.n, amps: p.apply(&self.amps) }
    }

    /// Apply a 2x2 matrix on one site.
    pub fn apply_single(&self, site: usize, u: &[[C64; 2]; 2]) -> StateVector {
        let mut out = self.clone();
        apply_single_in_place(&mut out.amps, self.n, site, u);
        out
    }

    pub fn check_site(&self, site: usize) -> Result<()> {
        if site >= self.n {
            Err(Error::SiteOutOfRange { site, n: self.n })
        } else {
            Ok(())
        }
    }
}

pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// In-place action of a single-site 2x2 matrix.
pub fn apply_single_in_place(v: &mut [C64], n: usize, site: usize, u: &[[C64; 2]; 2]) {
    let bit = 1usize << (n - 1 - site);
    for j in 0..v.len() {
        if j & bit == 0 {
            let a0 = v[j];
            let a1 = v[j | bit];
            v[j] = u[0][0] * a0 + u[0][1] * a1;
            v[j | bit] = u[1][0] * a0 + u[1][1] * a1;
        }
    }
}

/// Insert a site with value `s` at position `site` into an index over the other n-1 sites.
#[inline]
pub fn insert_bit(rest: usize, n: usize, site: usize, s: usize) -> usize {
    let low_bits = n - 1 - site;
    let low = rest & ((1usize << low_bits) - 1);
    let high = rest >> low_bits;
    (high << (low_bits + 1)) | (s << low_bits) | low
}

/// |s>_site (x) |rest>, with `rest` a vector on the other n-1 sites in order.
pub fn embed_site(rest: &[C64], n: usize, site: usize, s: usize) -> Vec<C64> {
    let mut out = vec![ZERO; 1 << n];
    for (r, &a) in rest.iter().enumerate() {
        out[insert_bit(r, n, site, s)] = a;
    }
    out
}

/// (<s|_site (x) 1) v
pub fn project_site(v: &[C64], n: usize, site: usize, s: usize) -> Vec<C64> {
    (0..1usize << (n - 1)).map(|r| v[insert_bit(r, n, site, s)]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn labels_and_norms() {
        let s = StateVector::from_label("0+1").unwrap();
        assert_eq!(s.dim(), 8);
        assert!(s.is_normalized(1e-14));
        assert!((s.amplitudes()[0b001].re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!(StateVector::from_label("0a").is_err());
        assert!(StateVector::new(2, vec![ONE; 3]).is_err());
    }

    #[test]
    fn embed_project_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let v = StateVector::random(4, &mut rng);
        for site in 0..4 {
            let p0 = project_site(v.amplitudes(), 4, site, 0);
            let p1 = project_site(v.amplitudes(), 4, site, 1);
            let back: Vec<C64> = embed_site(&p0, 4, site, 0)
                .iter()
                .zip(embed_site(&p1, 4, site, 1))
                .map(|(a, b)| a + b)
                .collect();
            assert!(back.iter().zip(v.amplitudes()).all(|(a, b)| (a - b).norm() < 1e-15));
        }
    }
}
