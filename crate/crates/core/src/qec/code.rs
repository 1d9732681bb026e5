use serde::{Deserialize, Serialize};

use crate::hamlib::Hamiltonian;
use crate::qcore::state::{inner, norm, ZERO};
use crate::qcore::{Pauli, PauliString, StateVector};
use crate::{Error, Result, C64};

/// Amplitude-space limit for building logical basis states.
pub const CODE_QUBIT_LIMIT: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "family", content = "size", deny_unknown_fields)]
pub enum CodeName {
    RepetitionX(usize),
    FiveQubitBlocks(usize),
    Iceberg(usize),
}

impl std::fmt::Display for CodeName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CodeName::RepetitionX(n) => write!(f, "repetition-x({n})"),
            CodeName::FiveQubitBlocks(k) => write!(f, "five-qubit-blocks({k})"),
            CodeName::Iceberg(k) => write!(f, "iceberg({k})"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct StabilizerCode {
    pub name: CodeName,
    pub n: usize,
    pub k: usize,
    pub generators: Vec<PauliString>,
    pub logical_x: Vec<PauliString>,
    pub logical_z: Vec<PauliString>,
}

impl StabilizerCode {
    pub fn new(
        name: CodeName,
        n: usize,
        generators: Vec<PauliString>,
        logical_x: Vec<PauliString>,
        logical_z: Vec<PauliString>,
    ) -> Result<Self> {
        let k = logical_x.len();
        if n == 0 || n > CODE_QUBIT_LIMIT {
            return Err(Error::InvalidArgument(format!("code size {n} outside 1..={CODE_QUBIT_LIMIT}")));
        }
        if logical_z.len() != k || generators.len() + k != n {
            return Err(Error::InvalidArgument(format!(
                "{} generators and {k} logical pairs do not fit {n} qubits",
                generators.len()
            )));
        }
        let all = generators.iter().chain(&logical_x).chain(&logical_z);
        if all.clone().any(|p| p.n_sites() != n) {
            return Err(Error::InvalidArgument("operator length differs from code size".into()));
        }
        for (i, g) in generators.iter().enumerate() {
            if generators[..i].iter().any(|h| !g.commutes_with(h)) {
                return Err(Error::InvalidArgument(format!("generator {g} does not commute with the others")));
            }
        }
        for l in logical_x.iter().chain(&logical_z) {
            if generators.iter().any(|g| !g.commutes_with(l)) {
                return Err(Error::InvalidArgument(format!("logical {l} anticommutes with a generator")));
            }
        }
        for i in 0..k {
            for j in 0..k {
                let anti = !logical_x[i].commutes_with(&logical_z[j]);
                let xx = logical_x[i].commutes_with(&logical_x[j]);
                let zz = logical_z[i].commutes_with(&logical_z[j]);
                if anti != (i == j) || !xx || !zz {
                    return Err(Error::InvalidArgument(format!("logical pair {i},{j} has the wrong algebra")));
                }
            }
        }
        Ok(StabilizerCode { name, n, k, generators, logical_x, logical_z })
    }

    /// X-basis repetition code: `|0> = |+...+>`, `|1> = |-...->`, checks
    /// `X_i X_{i+1}`, so it corrects a single Z error and is blind to X.
    pub fn repetition_x(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument("repetition code needs at least 2 qubits".into()));
        }
        let gens = (0..n - 1).map(|i| PauliString::from_sites(n, &[(i, Pauli::X), (i + 1, Pauli::X)])).collect();
        let lx = PauliString::new(0, vec![Pauli::Z; n]);
        let lz = PauliString::single(n, 0, Pauli::X);
        Self::new(CodeName::RepetitionX(n), n, gens, vec![lx], vec![lz])
    }

    /// `k` independent copies of the perfect five-qubit code, block `j`
    /// on sites `5j..5j+5`.
    pub fn five_qubit_blocks(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("need at least one block".into()));
        }
        let n = 5 * k;
        let rows = ["XZZXI", "IXZZX", "XIXZZ", "ZXIXZ"];
        let place = |off: usize, pattern: &str| {
            let sites: Vec<_> =
                pattern.chars().enumerate().map(|(i, c)| (off + i, Pauli::from_char(c).unwrap())).collect();
            PauliString::from_sites(n, &sites)
        };
        let mut gens = Vec::with_capacity(4 * k);
        let mut lx = Vec::with_capacity(k);
        let mut lz = Vec::with_capacity(k);
        for j in 0..k {
            let off = 5 * j;
            gens.extend(rows.iter().map(|r| place(off, r)));
            lx.push(place(off, "XIYYI"));
            lz.push(place(off, "ZYIIY"));
        }
        Self::new(CodeName::FiveQubitBlocks(k), n, gens, lx, lz)
    }

    /// Iceberg code on `k + 2` qubits: logical sites `0..k`, then `h`, then `v`.
    pub fn iceberg(k: usize) -> Result<Self> {
        if k == 0 || k % 2 == 1 {
            return Err(Error::InvalidArgument(format!("iceberg code needs a positive even k, got {k}")));
        }
        let n = k + 2;
        let (h, v) = (k, k + 1);
        let gens = vec![PauliString::new(0, vec![Pauli::X; n]), PauliString::new(0, vec![Pauli::Z; n])];
        let lx = (0..k).map(|j| PauliString::from_sites(n, &[(j, Pauli::X), (h, Pauli::X)])).collect();
        let lz = (0..k).map(|j| PauliString::from_sites(n, &[(j, Pauli::Z), (v, Pauli::Z)])).collect();
        Self::new(CodeName::Iceberg(k), n, gens, lx, lz)
    }

    pub fn code_dim(&self) -> usize {
        1 << self.k
    }

    /// Number of syndrome outcomes, `2^(n-k)`.
    pub fn ancilla_dim(&self) -> usize {
        1 << self.generators.len()
    }

    /// Bit `i` is set when `p` anticommutes with generator `i`.
    pub fn syndrome(&self, p: &PauliString) -> usize {
        self.generators.iter().enumerate().filter(|(_, g)| !g.commutes_with(p)).fold(0, |s, (i, _)| s | (1 << i))
    }

    /// Logical Pauli `letter` on logical qubit `j` as a physical string.
    pub fn logical_pauli(&self, j: usize, letter: Pauli) -> Result<PauliString> {
        if j >= self.k {
            return Err(Error::SiteOutOfRange { site: j, n: self.k });
        }
        Ok(match letter {
            Pauli::I => PauliString::identity(self.n),
            Pauli::X => self.logical_x[j].clone(),
            Pauli::Z => self.logical_z[j].clone(),
            // Y = i X Z
            Pauli::Y => {
                let p = self.logical_x[j].mul(&self.logical_z[j]);
                let ph = p.phase() + 1;
                p.with_phase(ph)
            }
        })
    }

    /// Product of logical letters, one per listed logical qubit.
    pub fn logical_string(&self, letters: &[(usize, Pauli)]) -> Result<PauliString> {
        letters.iter().try_fold(PauliString::identity(self.n), |acc, &(j, p)| Ok(acc.mul(&self.logical_pauli(j, p)?)))
    }

    /// Whether `p` is a logical operator: it commutes with every generator.
    pub fn is_logical(&self, p: &PauliString) -> bool {
        p.n_sites() == self.n && self.generators.iter().all(|g| g.commutes_with(p))
    }

    /// Hamiltonian from logical terms. Each term must be Hermitian once
    /// lifted; a lifted sign is folded into the coefficient.
    pub fn logical_hamiltonian(&self, terms: &[(f64, Vec<(usize, Pauli)>)]) -> Result<Hamiltonian> {
        let mut lifted = Vec::with_capacity(terms.len());
        for (c, letters) in terms {
            let p = self.logical_string(letters)?;
            let sign = match p.phase() {
                0 => 1.0,
                2 => -1.0,
                _ => return Err(Error::InvalidArgument(format!("lifted term {p} is not Hermitian"))),
            };
            lifted.push((c * sign, p.with_phase(0)));
        }
        Hamiltonian::new(self.n, lifted)
    }

    /// `sum_j Xbar_j Xbar_{j+1} + h_z sum_j Zbar_j`.
    pub fn logical_xx_chain(&self, h_z: f64) -> Result<Hamiltonian> {
        let mut terms: Vec<(f64, Vec<(usize, Pauli)>)> =
            (0..self.k.saturating_sub(1)).map(|j| (1.0, vec![(j, Pauli::X), (j + 1, Pauli::X)])).collect();
        if h_z != 0.0 {
            terms.extend((0..self.k).map(|j| (h_z, vec![(j, Pauli::Z)])));
        }
        self.logical_hamiltonian(&terms)
    }

    /// Project onto the common eigenspace with the given generator signs
    /// (`syndrome` bit set means eigenvalue -1).
    pub fn project(&self, v: &[C64], syndrome: usize) -> Vec<C64> {
        let mut out = v.to_vec();
        for (i, g) in self.generators.iter().enumerate() {
            let sign = if syndrome >> i & 1 == 1 { -0.5 } else { 0.5 };
            let gv = g.apply(&out);
            for (o, x) in out.iter_mut().zip(gv) {
                *o = *o * 0.5 + x * sign;
            }
        }
        out
    }

    /// `|| v - Pi_0 v ||`
    pub fn leakage(&self, v: &[C64]) -> f64 {
        let p = self.project(v, 0);
        v.iter().zip(&p).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn check_codespace(&self, state: &StateVector, tol: f64) -> Result<()> {
        if state.n_qubits() != self.n {
            return Err(Error::DimensionMismatch(state.n_qubits(), self.n));
        }
        let leak = self.leakage(state.amplitudes());
        if leak > tol {
            return Err(Error::OutsideCodespace(leak));
        }
        Ok(())
    }

    /// Encoded basis `|b>` for `b` in `0..2^k`, logical qubit 0 the most
    /// significant bit, with `|b> = prod_j Xbar_j^{b_j} |0...0>`.
    pub fn logical_basis(&self) -> Result<Vec<Vec<C64>>> {
        let dim = 1usize << self.n;
        let zero = (0..dim)
            .find_map(|j| {
                let mut v = vec![ZERO; dim];
                v[j] = C64::new(1.0, 0.0);
                let mut p = self.project(&v, 0);
                for z in &self.logical_z {
                    let zp = z.apply(&p);
                    p.iter_mut().zip(zp).for_each(|(a, b)| *a = (*a + b) * 0.5);
                }
                let nn = norm(&p);
                (nn > 1e-6).then(|| p.into_iter().map(|a| a / nn).collect::<Vec<_>>())
            })
            .ok_or_else(|| Error::Consistency("code space is empty".into()))?;
        Ok((0..self.code_dim())
            .map(|b| {
                (0..self.k).filter(|j| b >> (self.k - 1 - j) & 1 == 1).fold(zero.clone(), |v, j| self.logical_x[j].apply(&v))
            })
            .collect())
    }

    /// `sum_b c_b |b>` for logical amplitudes `c`.
    pub fn encode(&self, logical: &[C64]) -> Result<StateVector> {
        if logical.len() != self.code_dim() {
            return Err(Error::DimensionMismatch(logical.len(), self.code_dim()));
        }
        let basis = self.logical_basis()?;
        let mut out = vec![ZERO; 1 << self.n];
        for (c, v) in logical.iter().zip(&basis) {
            if *c != ZERO {
                out.iter_mut().zip(v).for_each(|(o, x)| *o += c * x);
            }
        }
        StateVector::new(self.n, out)
    }

    /// Logical amplitudes `<b|v>`.
    pub fn decode_amplitudes(&self, v: &[C64], basis: &[Vec<C64>]) -> Vec<C64> {
        basis.iter().map(|b| inner(b, v)).collect()
    }

    /// True when every single-site Pauli has its own nonzero syndrome.
    pub fn corrects_single_qubit_errors(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        for site in 0..self.n {
            for p in Pauli::XYZ {
                let s = self.syndrome(&PauliString::single(self.n, site, p));
                if s == 0 || !seen.insert(s) {
                    return false;
                }
            }
        }
        true
    }
}
