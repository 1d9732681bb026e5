//! Pauli strings with exact phases, and weighted sums of them.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;

use crate::{Error, Result, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const XYZ: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    /// (x, z) symplectic bits, with Y = i X Z.
    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    /// Product a*b as (power of i, letter).
    pub fn mul(self, other: Pauli) -> (u8, Pauli) {
        use Pauli::*;
        match (self, other) {
            (I, p) | (p, I) => (0, p),
            (X, X) | (Y, Y) | (Z, Z) => (0, I),
            (X, Y) => (1, Z),
            (Y, X) => (3, Z),
            (Y, Z) => (1, X),
            (Z, Y) => (3, X),
            (Z, X) => (1, Y),
            (X, Z) => (3, Y),
        }
    }

    pub fn matrix(self) -> [[C64; 2]; 2] {
        let o = C64::new(0.0, 0.0);
        let l = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        match self {
            Pauli::I => [[l, o], [o, l]],
            Pauli::X => [[o, l], [l, o]],
            Pauli::Y => [[o, -i], [i, o]],
            Pauli::Z => [[l, o], [o, -l]],
        }
    }

    pub fn from_char(c: char) -> Option<Pauli> {
        match c {
            'I' | 'i' | '1' | '_' => Some(Pauli::I),
            'X' | 'x' => Some(Pauli::X),
            'Y' | 'y' => Some(Pauli::Y),
            'Z' | 'z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// i^k for k mod 4.
pub fn i_pow(k: u8) -> C64 {
    match k % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

/// `i^phase` times a tensor product of letters; letter k acts on site k.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    phase: u8,
    letters: Vec<Pauli>,
}

impl PauliString {
    pub fn new(phase: u8, letters: Vec<Pauli>) -> Self {
        PauliString { phase: phase % 4, letters }
    }

    pub fn identity(n: usize) -> Self {
        Self::new(0, vec![Pauli::I; n])
    }

    pub fn single(n: usize, site: usize, p: Pauli) -> Self {
        let mut letters = vec![Pauli::I; n];
        letters[site] = p;
        Self::new(0, letters)
    }

    /// Letters placed on the given sites, identity elsewhere.
    pub fn from_sites(n: usize, sites: &[(usize, Pauli)]) -> Self {
        let mut letters = vec![Pauli::I; n];
        for &(s, p) in sites {
            letters[s] = p;
        }
        Self::new(0, letters)
    }

    pub fn parse(s: &str) -> Result<Self> {
        let (phase, body) = if let Some(r) = s.strip_prefix("-i") {
            (3, r)
        } else if let Some(r) = s.strip_prefix("+i").or_else(|| s.strip_prefix('i')) {
            (1, r)
        } else if let Some(r) = s.strip_prefix('-') {
            (2, r)
        } else {
            (0, s.strip_prefix('+').unwrap_or(s))
        };
        let letters = body
            .chars()
            .map(|c| Pauli::from_char(c).ok_or_else(|| Error::InvalidArgument(format!("bad Pauli letter {c:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(phase, letters))
    }

    pub fn n_sites(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn letter(&self, site: usize) -> Pauli {
        self.letters[site]
    }

    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn phase_value(&self) -> C64 {
        i_pow(self.phase)
    }

    pub fn with_phase(mut self, phase: u8) -> Self {
        self.phase = phase % 4;
        self
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.letters.len()).filter(|&k| self.letters[k] != Pauli::I).collect()
    }

    pub fn weight(&self) -> usize {
        self.letters.iter().filter(|&&p| p != Pauli::I).count()
    }

    pub fn is_identity(&self) -> bool {
        self.weight() == 0
    }

    pub fn mul(&self, other: &PauliString) -> PauliString {
        assert_eq!(self.n_sites(), other.n_sites(), "Pauli strings of different length");
        let mut phase = self.phase + other.phase;
        let letters = self
            .letters
            .iter()
            .zip(&other.letters)
            .map(|(&a, &b)| {
                let (k, p) = a.mul(b);
                phase += k;
                p
            })
            .collect();
        PauliString::new(phase % 4, letters)
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let anti = self
            .letters
            .iter()
            .zip(&other.letters)
            .filter(|(&a, &b)| a != Pauli::I && b != Pauli::I && a != b)
            .count();
        anti % 2 == 0
    }

    /// Adjoint: letters are Hermitian, so only the phase conjugates.
    pub fn adjoint(&self) -> PauliString {
        PauliString::new((4 - self.phase) % 4, self.letters.clone())
    }

    /// Bit masks for the statevector convention (site 0 is the most significant bit)
    /// and the number of Y letters.
    pub fn masks(&self) -> (usize, usize, u8) {
        let n = self.letters.len();
        let mut xm = 0usize;
        let mut zm = 0usize;
        let mut ny = 0u8;
        for (k, &p) in self.letters.iter().enumerate() {
            let bit = 1usize << (n - 1 - k);
            let (x, z) = p.bits();
            if x {
                xm |= bit;
            }
            if z {
                zm |= bit;
            }
            if p == Pauli::Y {
                ny += 1;
            }
        }
        (xm, zm, ny)
    }

    /// out += coeff * P v
    pub fn apply_add(&self, coeff: C64, v: &[C64], out: &mut [C64]) {
        let (xm, zm, ny) = self.masks();
        let c = coeff * i_pow(self.phase + ny % 4);
        for (j, &a) in v.iter().enumerate() {
            if a == C64::new(0.0, 0.0) {
                continue;
            }
            let sign = if (j & zm).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            out[j ^ xm] += c * sign * a;
        }
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); v.len()];
        self.apply_add(C64::new(1.0, 0.0), v, &mut out);
        out
    }

    /// Dense matrix (site 0 most significant). Intended for few sites.
    pub fn to_dense(&self) -> DMatrix<C64> {
        let n = self.letters.len();
        let d = 1usize << n;
        let (xm, zm, ny) = self.masks();
        let c = i_pow(self.phase + ny % 4);
        let mut m = DMatrix::zeros(d, d);
        for j in 0..d {
            let sign = if (j & zm).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            m[(j ^ xm, j)] = c * sign;
        }
        m
    }

    /// Restriction to a subset of sites (phase kept).
    pub fn restrict(&self, sites: &[usize]) -> PauliString {
        PauliString::new(self.phase, sites.iter().map(|&s| self.letters[s]).collect())
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = ["+", "+i", "-", "-i"][self.phase as usize];
        write!(f, "{p}")?;
        for l in &self.letters {
            write!(f, "{}", l.as_char())?;
        }
        Ok(())
    }
}

/// Weighted sum of Pauli strings on a fixed number of sites.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSum {
    n: usize,
    terms: Vec<(C64, PauliString)>,
}

impl PauliSum {
    pub fn new(n: usize) -> Self {
        PauliSum { n, terms: Vec::new() }
    }

    pub fn from_terms(n: usize, terms: Vec<(C64, PauliString)>) -> Result<Self> {
        for (_, p) in &terms {
            if p.n_sites() != n {
                return Err(Error::DimensionMismatch(p.n_sites(), n));
            }
        }
        Ok(PauliSum { n, terms })
    }

    pub fn n_sites(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[(C64, PauliString)] {
        &self.terms
    }

    pub fn push(&mut self, c: C64, p: PauliString) {
        assert_eq!(p.n_sites(), self.n);
        self.terms.push((c, p));
    }

    /// Merge equal strings (phases folded into coefficients) and drop zeros.
    pub fn simplified(&self, tol: f64) -> PauliSum {
        let mut acc: BTreeMap<Vec<Pauli>, C64> = BTreeMap::new();
        for (c, p) in &self.terms {
            *acc.entry(p.letters().to_vec()).or_insert(C64::new(0.0, 0.0)) += c * p.phase_value();
        }
        let terms = acc
            .into_iter()
            .filter(|(_, c)| c.norm() > tol)
            .map(|(l, c)| (c, PauliString::new(0, l)))
            .collect();
        PauliSum { n: self.n, terms }
    }

    pub fn mul(&self, other: &PauliSum) -> PauliSum {
        let mut out = PauliSum::new(self.n);
        for (a, p) in &self.terms {
            for (b, q) in &other.terms {
                out.terms.push((a * b, p.mul(q)));
            }
        }
        out.simplified(0.0)
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); v.len()];
        for (c, p) in &self.terms {
            p.apply_add(*c, v, &mut out);
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let d = 1usize << self.n;
        let mut m = DMatrix::zeros(d, d);
        for (c, p) in &self.terms {
            m += p.to_dense() * *c;
        }
        m
    }
}

/// Drop every string that acts as the identity on all of `sites`.
pub fn project_nontrivial(op: &PauliSum, sites: &[usize]) -> PauliSum {
    let terms = op
        .terms
        .iter()
        .filter(|(_, p)| sites.iter().any(|&s| p.letter(s) != Pauli::I))
        .cloned()
        .collect();
    PauliSum { n: op.n, terms }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &DMatrix<C64>, b: &DMatrix<C64>) -> bool {
        (a - b).iter().all(|z| z.norm() < 1e-14)
    }

    #[test]
    fn group_law_two_sites_exhaustive() {
        for phase_a in 0..4u8 {
            for a0 in Pauli::ALL {
                for a1 in Pauli::ALL {
                    for b0 in Pauli::ALL {
                        for b1 in Pauli::ALL {
                            let a = PauliString::new(phase_a, vec![a0, a1]);
                            let b = PauliString::new(1, vec![b0, b1]);
                            let prod = a.mul(&b);
                            assert!(close(&prod.to_dense(), &(a.to_dense() * b.to_dense())));
                            let comm = a.to_dense() * b.to_dense() - b.to_dense() * a.to_dense();
                            assert_eq!(a.commutes_with(&b), comm.iter().all(|z| z.norm() < 1e-14));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn apply_matches_dense() {
        let p = PauliString::parse("-iXYZI").unwrap();
        let v: Vec<C64> = (0..16).map(|k| C64::new(k as f64, 0.5 * k as f64 - 1.0)).collect();
        let dense = p.to_dense() * nalgebra::DVector::from_vec(v.clone());
        let fast = p.apply(&v);
        for k in 0..16 {
            assert!((dense[k] - fast[k]).norm() < 1e-12);
        }
    }

    #[test]
    fn parse_and_display_round_trip() {
        for s in ["+XIZ", "-iYY", "+iZ", "-XX"] {
            assert_eq!(PauliString::parse(s).unwrap().to_string(), s);
        }
        assert!(PauliString::parse("XQ").is_err());
    }

    #[test]
    fn projection_examples() {
        let one = C64::new(1.0, 0.0);
        let op = PauliSum::from_terms(
            2,
            vec![(one, PauliString::parse("XI").unwrap()), (one, PauliString::parse("IZ").unwrap())],
        )
        .unwrap();
        let p = project_nontrivial(&op, &[0]);
        assert_eq!(p.terms().len(), 1);
        assert_eq!(p.terms()[0].1, PauliString::parse("XI").unwrap());
        let only = PauliSum::from_terms(2, vec![(one, PauliString::parse("IX").unwrap())]).unwrap();
        assert!(project_nontrivial(&only, &[0]).terms().is_empty());
    }
}
