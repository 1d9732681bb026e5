use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::code::StabilizerCode;
use crate::qcore::state::ZERO;
use crate::qcore::{Pauli, PauliString, PauliSum};
use crate::{Error, Result, C64};

/// Largest code handled by the dense-matrix helpers.
pub const DENSE_CHANNEL_LIMIT: usize = 10;

/// Branches with squared norm below this fraction of the input are dropped.
const BRANCH_PRUNE: f64 = 1e-28;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelVariant {
    /// `R[rho] = sum_s C_s Pi_s rho Pi_s C_s^dag`
    Bare,
    /// ancilla register kept coherent: `sum_{s,t} C_s Pi_s rho Pi_t C_t^dag (x) |s><t|`
    Dilated,
    /// ancilla register measured in the syndrome basis
    Measured,
}

/// Syndrome projection followed by a tabulated correction.
#[derive(Clone, Debug)]
pub struct RecoveryChannel {
    pub code: StabilizerCode,
    /// syndrome -> correction `C_s`; syndromes absent from the table get the identity
    pub syndrome_table: BTreeMap<usize, PauliString>,
    pub variant: ChannelVariant,
}

impl RecoveryChannel {
    /// Table by brute force over single-site Paulis, site by site in the
    /// order Z, X, Y; the first Pauli to produce a syndrome owns it.
    pub fn new(code: StabilizerCode, variant: ChannelVariant) -> Self {
        let mut table = BTreeMap::new();
        table.insert(0, PauliString::identity(code.n));
        for site in 0..code.n {
            for p in [Pauli::Z, Pauli::X, Pauli::Y] {
                let e = PauliString::single(code.n, site, p);
                table.entry(code.syndrome(&e)).or_insert(e);
            }
        }
        RecoveryChannel { code, syndrome_table: table, variant }
    }

    pub fn with_variant(&self, variant: ChannelVariant) -> Self {
        RecoveryChannel { variant, ..self.clone() }
    }

    pub fn correction(&self, s: usize) -> PauliString {
        self.syndrome_table.get(&s).cloned().unwrap_or_else(|| PauliString::identity(self.code.n))
    }

    /// Nonzero components `Pi_s v`, found by splitting on one generator at a time.
    pub fn syndrome_components(&self, v: &[C64]) -> Vec<(usize, Vec<C64>)> {
        let floor = BRANCH_PRUNE * v.iter().map(|a| a.norm_sqr()).sum::<f64>();
        let mut parts = vec![(0usize, v.to_vec())];
        for (i, g) in self.code.generators.iter().enumerate() {
            let mut next = Vec::with_capacity(2 * parts.len());
            for (s, w) in parts {
                let gw = g.apply(&w);
                let plus: Vec<C64> = w.iter().zip(&gw).map(|(a, b)| (a + b) * 0.5).collect();
                let minus: Vec<C64> = w.iter().zip(&gw).map(|(a, b)| (a - b) * 0.5).collect();
                for (bit, part) in [(0, plus), (1, minus)] {
                    if part.iter().map(|a| a.norm_sqr()).sum::<f64>() > floor {
                        next.push((s | bit << i, part));
                    }
                }
            }
            parts = next;
        }
        parts
    }

    /// `C_s Pi_s v` for every syndrome with a nonzero component.
    pub fn branches(&self, v: &[C64]) -> Vec<(usize, Vec<C64>)> {
        self.syndrome_components(v).into_iter().map(|(s, w)| (s, self.correction(s).apply(&w))).collect()
    }

    fn check_dense(&self) -> Result<()> {
        if self.code.n > DENSE_CHANNEL_LIMIT {
            return Err(Error::SupportOverflow(self.code.n));
        }
        Ok(())
    }

    pub fn projector_dense(&self, s: usize) -> Result<DMatrix<C64>> {
        self.check_dense()?;
        let d = 1usize << self.code.n;
        let mut out = DMatrix::identity(d, d);
        for (i, g) in self.code.generators.iter().enumerate() {
            let sign = if s >> i & 1 == 1 { -1.0 } else { 1.0 };
            let f = (DMatrix::identity(d, d) + g.to_dense() * C64::new(sign, 0.0)) * C64::new(0.5, 0.0);
            out = out * f;
        }
        Ok(out)
    }

    /// Kraus operators `C_s Pi_s` over every syndrome.
    pub fn kraus_dense(&self) -> Result<Vec<DMatrix<C64>>> {
        (0..self.code.ancilla_dim()).map(|s| Ok(self.correction(s).to_dense() * self.projector_dense(s)?)).collect()
    }

    /// Bare recovery of a dense physical operator.
    pub fn apply_dense(&self, rho: &DMatrix<C64>) -> Result<DMatrix<C64>> {
        let d = 1usize << self.code.n;
        if rho.nrows() != d || rho.ncols() != d {
            return Err(Error::DimensionMismatch(rho.nrows(), d));
        }
        let mut out = DMatrix::zeros(d, d);
        for k in self.kraus_dense()? {
            out += &k * rho * k.adjoint();
        }
        Ok(out)
    }

    /// Ancilla block `<s| R'[|a><b|] |t>` restricted to `syndromes`, from
    /// branch lists of `a` and `b`. The measured variant keeps the diagonal.
    pub fn ancilla_block(
        &self,
        a: &[(usize, Vec<C64>)],
        b: &[(usize, Vec<C64>)],
        syndromes: &[usize],
    ) -> DMatrix<C64> {
        let m = syndromes.len();
        let index = |s: usize| syndromes.iter().position(|&x| x == s);
        let mut out = DMatrix::zeros(m, m);
        for (s, ws) in a {
            for (t, wt) in b {
                if self.variant == ChannelVariant::Measured && s != t {
                    continue;
                }
                if let (Some(i), Some(j)) = (index(*s), index(*t)) {
                    out[(i, j)] = crate::qcore::state::inner(wt, ws);
                }
            }
        }
        out
    }

    /// The dilated channel as a dense map onto physical (x) ancilla, ancilla
    /// qubits after the physical ones. Tiny codes only.
    pub fn dilated_dense(&self, rho: &DMatrix<C64>) -> Result<DMatrix<C64>> {
        if self.code.n + self.code.generators.len() > DENSE_CHANNEL_LIMIT {
            return Err(Error::AncillaBudget(self.code.generators.len()));
        }
        let d = 1usize << self.code.n;
        let da = self.code.ancilla_dim();
        let kraus = self.kraus_dense()?;
        let mut out = DMatrix::zeros(d * da, d * da);
        for s in 0..da {
            for t in 0..da {
                if self.variant == ChannelVariant::Measured && s != t {
                    continue;
                }
                let blk = &kraus[s] * rho * kraus[t].adjoint();
                for r in 0..d {
                    for c in 0..d {
                        out[(r * da + s, c * da + t)] = blk[(r, c)];
                    }
                }
            }
        }
        Ok(out)
    }
}

/// `R^dag[O]` for a logical Pauli `O`, kept in the reflected form
/// `O (1 - 2 sum_{s : {C_s, O} = 0} Pi_s)`.
#[derive(Clone, Debug)]
pub struct RecoveryAdjoint {
    pub operator: PauliString,
    /// syndromes whose correction anticommutes with the operator
    pub reflected: Vec<usize>,
    code: StabilizerCode,
}

pub fn recovery_adjoint(channel: &RecoveryChannel, o: &PauliString) -> Result<RecoveryAdjoint> {
    if !channel.code.is_logical(o) {
        return Err(Error::NotLogical);
    }
    let reflected =
        channel.syndrome_table.iter().filter(|(_, c)| !c.commutes_with(o)).map(|(&s, _)| s).collect();
    Ok(RecoveryAdjoint { operator: o.clone(), reflected, code: channel.code.clone() })
}

impl RecoveryAdjoint {
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let mut w = v.to_vec();
        for &s in &self.reflected {
            let p = self.code.project(v, s);
            w.iter_mut().zip(p).for_each(|(a, b)| *a -= b * 2.0);
        }
        self.operator.apply(&w)
    }

    pub fn to_dense(&self) -> Result<DMatrix<C64>> {
        let n = self.operator.n_sites();
        if n > DENSE_CHANNEL_LIMIT {
            return Err(Error::SupportOverflow(n));
        }
        let d = 1usize << n;
        let mut out = DMatrix::zeros(d, d);
        let mut e = vec![ZERO; d];
        for j in 0..d {
            e[j] = C64::new(1.0, 0.0);
            out.set_column(j, &nalgebra::DVector::from_vec(self.apply(&e)));
            e[j] = ZERO;
        }
        Ok(out)
    }

    /// Pauli expansion; each projector contributes `2^(n-k)` strings.
    pub fn to_pauli_sum(&self) -> Result<PauliSum> {
        let n = self.operator.n_sites();
        let m = self.code.generators.len();
        if m > 8 {
            return Err(Error::SupportOverflow(m));
        }
        // 1 - 2 sum_s Pi_s, with Pi_s = 2^-m sum_{T} prod_{i in T} (+-g_i)
        let mut coeffs: BTreeMap<PauliString, C64> = BTreeMap::new();
        *coeffs.entry(PauliString::identity(n)).or_default() += C64::new(1.0, 0.0);
        let scale = -2.0 / (1usize << m) as f64;
        for &s in &self.reflected {
            for subset in 0usize..1 << m {
                let mut p = PauliString::identity(n);
                let mut sign = 1.0;
                for (i, g) in self.code.generators.iter().enumerate() {
                    if subset >> i & 1 == 1 {
                        p = p.mul(g);
                        if s >> i & 1 == 1 {
                            sign = -sign;
                        }
                    }
                }
                let ph = p.phase_value();
                *coeffs.entry(p.with_phase(0)).or_default() += ph * sign * scale;
            }
        }
        let mut out = PauliSum::new(n);
        for (p, c) in coeffs {
            let prod = self.operator.mul(&p);
            let ph = prod.phase_value();
            out.push(c * ph, prod.with_phase(0));
        }
        Ok(out.simplified(1e-14))
    }
}

/// `sum_s Pi_s C_s^dag O C_s Pi_s` over every syndrome, densely.
pub fn recovery_adjoint_dense(channel: &RecoveryChannel, o: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let d = 1usize << channel.code.n;
    if o.nrows() != d || o.ncols() != d {
        return Err(Error::DimensionMismatch(o.nrows(), d));
    }
    let mut out = DMatrix::zeros(d, d);
    for k in channel.kraus_dense()? {
        out += k.adjoint() * o * &k;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::dense::hermitian_eigenvalues;
    use crate::qcore::StateVector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn max_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn channels() -> Vec<RecoveryChannel> {
        [
            StabilizerCode::repetition_x(3).unwrap(),
            StabilizerCode::five_qubit_blocks(1).unwrap(),
            StabilizerCode::iceberg(2).unwrap(),
        ]
        .into_iter()
        .map(|c| RecoveryChannel::new(c, ChannelVariant::Bare))
        .collect()
    }

    fn random_density(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<C64> {
        let mut rho = DMatrix::zeros(1 << n, 1 << n);
        for w in [0.5, 0.3, 0.2] {
            let v = nalgebra::DVector::from_vec(StateVector::random(n, rng).into_amplitudes());
            rho += &v * v.adjoint() * C64::new(w, 0.0);
        }
        rho
    }

    #[test]
    fn tables() {
        let ch = &channels();
        // repetition: identity plus one Z per site; X is invisible
        assert_eq!(ch[0].syndrome_table.len(), 4);
        assert!(ch[0].syndrome_table.values().all(|p| p.letters().iter().all(|&l| l != Pauli::X && l != Pauli::Y)));
        assert_eq!(ch[1].syndrome_table.len(), 16);
        assert_eq!(ch[2].syndrome_table.len(), 4);
    }

    #[test]
    fn projectors_partition_identity() {
        for ch in channels() {
            let d = 1usize << ch.code.n;
            let mut sum = DMatrix::zeros(d, d);
            let p0 = ch.projector_dense(0).unwrap();
            for s in 0..ch.code.ancilla_dim() {
                let p = ch.projector_dense(s).unwrap();
                sum += &p;
                if let Some(e) = ch.syndrome_table.get(&s) {
                    let e = e.to_dense();
                    assert!(max_diff(&(&e * &p0 * e.adjoint()), &p) < 1e-12);
                }
            }
            assert!(max_diff(&sum, &DMatrix::identity(d, d)) < 1e-12);
        }
    }

    #[test]
    fn trace_preserving_and_choi_positive() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for ch in channels() {
            let rho = random_density(ch.code.n, &mut rng);
            let out = ch.apply_dense(&rho).unwrap();
            assert!((out.trace() - C64::new(1.0, 0.0)).norm() < 1e-12);
            let d = 1usize << ch.code.n;
            let mut kk = DMatrix::zeros(d, d);
            for k in ch.kraus_dense().unwrap() {
                kk += k.adjoint() * &k;
            }
            assert!(max_diff(&kk, &DMatrix::identity(d, d)) < 1e-12);
        }
        // Choi matrix of the repetition recovery
        let ch = &channels()[0];
        let d = 8;
        let mut choi = DMatrix::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                let mut e = DMatrix::zeros(d, d);
                e[(i, j)] = C64::new(1.0, 0.0);
                let blk = ch.apply_dense(&e).unwrap();
                for r in 0..d {
                    for c in 0..d {
                        choi[(i * d + r, j * d + c)] = blk[(r, c)];
                    }
                }
            }
        }
        assert!(hermitian_eigenvalues(&choi).iter().all(|&l| l > -1e-12));
    }

    #[test]
    fn single_site_errors_are_undone() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let ch = &channels()[1];
        let basis = ch.code.logical_basis().unwrap();
        let c = [C64::new(0.6, 0.1), C64::new(-0.2, 0.4)];
        let mut v: Vec<C64> = basis[0].iter().zip(&basis[1]).map(|(a, b)| c[0] * a + c[1] * b).collect();
        let nn = crate::qcore::state::norm(&v);
        v.iter_mut().for_each(|a| *a /= nn);
        let vv = nalgebra::DVector::from_vec(v.clone());
        let rho = &vv * vv.adjoint();
        for site in 0..5 {
            for p in Pauli::XYZ {
                let e = PauliString::single(5, site, p).to_dense();
                let out = ch.apply_dense(&(&e * &rho * e.adjoint())).unwrap();
                assert!(max_diff(&out, &rho) < 1e-12);
            }
        }
        // a kick by a random unitary on one site is also undone
        let u = crate::causal::haar_unitary(2, &mut rng);
        let kicked = StateVector::new(5, v).unwrap().apply_single(3, &[[u[(0, 0)], u[(0, 1)]], [u[(1, 0)], u[(1, 1)]]]);
        let mut out = DMatrix::zeros(32, 32);
        for (_, w) in ch.branches(kicked.amplitudes()) {
            let w = nalgebra::DVector::from_vec(w);
            out += &w * w.adjoint();
        }
        assert!(max_diff(&out, &rho) < 1e-12);
    }

    #[test]
    fn branches_match_dense_projectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for ch in channels() {
            let v = StateVector::random(ch.code.n, &mut rng);
            let br = ch.branches(v.amplitudes());
            assert_eq!(br.len(), ch.code.ancilla_dim());
            for (s, w) in br {
                let k = ch.correction(s).to_dense() * ch.projector_dense(s).unwrap();
                let want = &k * nalgebra::DVector::from_vec(v.amplitudes().to_vec());
                assert!(want.iter().zip(&w).all(|(a, b)| (a - b).norm() < 1e-12));
            }
        }
    }

    #[test]
    fn dilated_traces_back_to_bare() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let ch = channels()[0].with_variant(ChannelVariant::Dilated);
        let rho = random_density(3, &mut rng);
        let big = ch.dilated_dense(&rho).unwrap();
        let bare = ch.apply_dense(&rho).unwrap();
        let da = 4;
        let mut traced = DMatrix::zeros(8, 8);
        for r in 0..8 {
            for c in 0..8 {
                traced[(r, c)] = (0..da).map(|s| big[(r * da + s, c * da + s)]).sum();
            }
        }
        assert!(max_diff(&traced, &bare) < 1e-12);
        let measured = ch.with_variant(ChannelVariant::Measured).dilated_dense(&rho).unwrap();
        assert!(hermitian_eigenvalues(&measured).iter().all(|&l| l > -1e-12));
        assert!((measured.trace() - C64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn adjoint_forms_agree() {
        for ch in channels() {
            for j in 0..ch.code.k {
                for letter in Pauli::ALL {
                    let o = ch.code.logical_pauli(j, letter).unwrap();
                    let adj = recovery_adjoint(&ch, &o).unwrap();
                    let defn = recovery_adjoint_dense(&ch, &o.to_dense()).unwrap();
                    assert!(max_diff(&adj.to_dense().unwrap(), &defn) < 1e-12, "{} {o}", ch.code.name);
                    assert!(max_diff(&adj.to_pauli_sum().unwrap().to_dense(), &defn) < 1e-12);
                    if letter == Pauli::I {
                        assert!(adj.reflected.is_empty());
                    }
                }
            }
        }
    }

    #[test]
    fn adjoint_on_codespace() {
        let ch = &channels()[1];
        let x = ch.code.logical_pauli(0, Pauli::X).unwrap();
        let adj = recovery_adjoint(ch, &x).unwrap().to_dense().unwrap();
        let p0 = ch.projector_dense(0).unwrap();
        assert!(max_diff(&(&adj * &p0), &(x.to_dense() * &p0)) < 1e-12);
        assert!(matches!(recovery_adjoint(ch, &PauliString::single(5, 0, Pauli::X)), Err(Error::NotLogical)));
    }

    #[test]
    fn repetition_z_adjoint_reflects_on_detected_sites() {
        let ch = &channels()[0];
        let z = ch.code.logical_pauli(0, Pauli::Z).unwrap();
        let adj = recovery_adjoint(ch, &z).unwrap();
        // Zbar = X_0 anticommutes only with the Z_0 correction
        assert_eq!(adj.reflected, vec![ch.code.syndrome(&PauliString::single(3, 0, Pauli::Z))]);
    }
}
