//! Two-time correlators through an ancilla register.
//!
//! Every ancilla starts in `|+>`. At `t_A` each site of region A is hit by a
//! controlled X and a controlled Z from its own pair of ancillas, the system
//! evolves to `t_B`, and region B gets the same treatment. Tracing out the
//! system leaves the ancillas holding every correlator
//! `<O_B(t_B) O_A(t_A)>` with `O_A`, `O_B` Pauli strings on the regions.
//!
//! Ancilla qubit order is `[A x-bits, A z-bits, B x-bits, B z-bits]`,
//! ancilla 0 most significant.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::hamlib::{evolve_vec, expm_dense, Hamiltonian};
use crate::qcore::dense::hermitian_eigenvalues;
use crate::qcore::state::{inner, ZERO};
use crate::qcore::{Pauli, PauliString, StateVector};
use crate::{Error, Result, C64};

/// Largest `|A| + |B|` for the dense ancilla register.
pub const SDO_REGION_LIMIT: usize = 4;

const EVOLVE_TOL: f64 = 1e-13;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CouplingOrder {
    /// All controlled-X gates of a region, then all controlled-Z gates.
    #[default]
    Rounds,
    /// Controlled X then controlled Z, one site at a time.
    Interleaved,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Region {
    pub sites: Vec<usize>,
    pub time: f64,
}

#[derive(Clone, Debug)]
pub struct SuperdensityOperator {
    pub a: Region,
    pub b: Region,
    pub n_system: usize,
    pub order: CouplingOrder,
    /// Reduced state of the ancilla register.
    pub matrix: DMatrix<C64>,
}

impl SuperdensityOperator {
    pub fn ancilla_count(&self) -> usize {
        2 * (self.a.sites.len() + self.b.sites.len())
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).norm()
    }

    /// Positive semidefinite up to `tol`: `rho + tol 1` admits a Cholesky
    /// factor. Done on the real embedding `[[A, -B], [B, A]]`, since the
    /// complex factorization takes square roots of negative pivots.
    pub fn is_psd(&self, tol: f64) -> bool {
        let d = self.matrix.nrows();
        let real = DMatrix::from_fn(2 * d, 2 * d, |r, c| {
            let z = (self.matrix[(r % d, c % d)] + self.matrix[(c % d, r % d)].conj()) * 0.5;
            let v = match (r < d, c < d) {
                (true, true) | (false, false) => z.re,
                (true, false) => -z.im,
                (false, true) => z.im,
            };
            if r == c {
                v + tol
            } else {
                v
            }
        });
        nalgebra::Cholesky::new(real).is_some()
    }

    /// Smallest eigenvalue, by the dense Hermitian solver. Slow above 64x64.
    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.matrix).into_iter().fold(f64::INFINITY, f64::min)
    }

    /// Ancilla basis index holding `(o_a, o_b)` and the phase that turns
    /// `Z^z X^x` into the requested strings.
    fn index_of(&self, o_a: &PauliString, o_b: &PauliString) -> Result<(usize, C64)> {
        let (n, m) = (self.a.sites.len(), self.b.sites.len());
        if o_a.n_sites() != n {
            return Err(Error::DimensionMismatch(o_a.n_sites(), n));
        }
        if o_b.n_sites() != m {
            return Err(Error::DimensionMismatch(o_b.n_sites(), m));
        }
        let mut ys = 0u8;
        let (ax, az) = split_bits(o_a, &mut ys);
        let (bx, bz) = split_bits(o_b, &mut ys);
        let idx = [ax, az, bx, bz].concat().into_iter().fold(0usize, |acc, b| (acc << 1) | b as usize);
        // Z X = i Y on every site carrying a Y
        let phase = o_a.phase_value() * o_b.phase_value() * crate::qcore::pauli::i_pow((4 - ys % 4) % 4);
        Ok((idx, phase))
    }
}

fn split_bits(o: &PauliString, ys: &mut u8) -> (Vec<bool>, Vec<bool>) {
    let mut xs = Vec::with_capacity(o.n_sites());
    let mut zs = Vec::with_capacity(o.n_sites());
    for p in o.letters() {
        let (x, z) = p.bits();
        if x && z {
            *ys += 1;
        }
        xs.push(x);
        zs.push(z);
    }
    (xs, zs)
}

fn check_region(sites: &[usize], n: usize, name: &str) -> Result<()> {
    if sites.is_empty() {
        return Err(Error::InvalidArgument(format!("region {name} is empty")));
    }
    for (i, &s) in sites.iter().enumerate() {
        if s >= n {
            return Err(Error::SiteOutOfRange { site: s, n });
        }
        if sites[..i].contains(&s) {
            return Err(Error::InvalidArgument(format!("site {s} listed twice in region {name}")));
        }
    }
    Ok(())
}

/// One coupling stage on every ancilla branch. `x_base` and `z_base` are the
/// register positions of the stage's first x- and z-ancilla.
fn couple(rows: &mut [Vec<C64>], n_anc: usize, n_sys: usize, sites: &[usize], x_base: usize, z_base: usize, order: CouplingOrder) {
    let mut gates: Vec<(usize, PauliString)> = Vec::with_capacity(2 * sites.len());
    let gate = |anc: usize, site: usize, p: Pauli| (anc, PauliString::single(n_sys, site, p));
    match order {
        CouplingOrder::Rounds => {
            gates.extend(sites.iter().enumerate().map(|(i, &s)| gate(x_base + i, s, Pauli::X)));
            gates.extend(sites.iter().enumerate().map(|(i, &s)| gate(z_base + i, s, Pauli::Z)));
        }
        CouplingOrder::Interleaved => {
            for (i, &s) in sites.iter().enumerate() {
                gates.push(gate(x_base + i, s, Pauli::X));
                gates.push(gate(z_base + i, s, Pauli::Z));
            }
        }
    }
    rows.par_iter_mut().enumerate().for_each(|(a, row)| {
        for (anc, p) in &gates {
            if (a >> (n_anc - 1 - anc)) & 1 == 1 {
                *row = p.apply(row);
            }
        }
    });
}

/// Largest system evolved through a dense propagator.
const DENSE_PROPAGATOR_LIMIT: usize = 10;

fn evolve_rows(rows: &mut [Vec<C64>], h: &Hamiltonian, t: f64) -> Result<()> {
    if t == 0.0 || h.is_zero() {
        return Ok(());
    }
    if h.n_qubits() <= DENSE_PROPAGATOR_LIMIT {
        let u = expm_dense(h, t)?;
        rows.par_iter_mut().for_each(|row| {
            let v = &u * nalgebra::DVector::from_column_slice(row);
            row.copy_from_slice(v.as_slice());
        });
        return Ok(());
    }
    rows.par_iter_mut().try_for_each(|row| {
        *row = evolve_vec(row, h, t, EVOLVE_TOL)?.0;
        Ok(())
    })
}

/// Runs the coupling protocol and returns the ancilla state.
pub fn sdo_build(state: &StateVector, h: &Hamiltonian, a: &Region, b: &Region) -> Result<SuperdensityOperator> {
    sdo_build_with(state, h, a, b, CouplingOrder::Rounds)
}

pub fn sdo_build_with(
    state: &StateVector,
    h: &Hamiltonian,
    a: &Region,
    b: &Region,
    order: CouplingOrder,
) -> Result<SuperdensityOperator> {
    let n = state.n_qubits();
    if h.n_qubits() != n {
        return Err(Error::DimensionMismatch(h.n_qubits(), n));
    }
    check_region(&a.sites, n, "A")?;
    check_region(&b.sites, n, "B")?;
    if a.time == b.time && a.sites.iter().any(|s| b.sites.contains(s)) {
        return Err(Error::InvalidArgument("regions overlap at equal times".into()));
    }
    let (na, nb) = (a.sites.len(), b.sites.len());
    if na + nb > SDO_REGION_LIMIT {
        return Err(Error::AncillaBudget(2 * (na + nb)));
    }
    let n_anc = 2 * (na + nb);
    let rows_count = 1usize << n_anc;
    // |+>^{n_anc} on the ancillas, amplitude folded in at the end
    let mut start = vec![state.amplitudes().to_vec()];
    evolve_rows(&mut start, h, a.time)?;
    let mut rows = vec![start.pop().unwrap_or_default(); rows_count];
    couple(&mut rows, n_anc, n, &a.sites, 0, na, order);
    // negative when B precedes A: backward evolution
    evolve_rows(&mut rows, h, b.time - a.time)?;
    couple(&mut rows, n_anc, n, &b.sites, 2 * na, 2 * na + nb, order);

    let scale = 1.0 / rows_count as f64;
    let mut matrix = DMatrix::from_element(rows_count, rows_count, ZERO);
    let upper: Vec<(usize, usize, C64)> = (0..rows_count)
        .into_par_iter()
        .flat_map_iter(|r| {
            let rows = &rows;
            (r..rows_count).map(move |c| (r, c, inner(&rows[c], &rows[r]) * scale))
        })
        .collect();
    for (r, c, v) in upper {
        matrix[(r, c)] = v;
        matrix[(c, r)] = v.conj();
    }
    Ok(SuperdensityOperator { a: a.clone(), b: b.clone(), n_system: n, order, matrix })
}

/// `<O_B(t_B) O_A(t_A)>` read off the ancilla state by exact inversion.
/// `o_a` and `o_b` act on the region sites, in region order.
pub fn sdo_correlator(sdo: &SuperdensityOperator, o_a: &PauliString, o_b: &PauliString) -> Result<C64> {
    let (idx, phase) = sdo.index_of(o_a, o_b)?;
    Ok(sdo.matrix[(idx, 0)] * sdo.matrix.nrows() as f64 * phase)
}

#[derive(Clone, Debug, Serialize)]
pub struct CorrelatorEntry {
    pub a: String,
    pub b: String,
    pub re: f64,
    pub im: f64,
}

fn pauli_strings(len: usize) -> Vec<PauliString> {
    (0..1usize << (2 * len))
        .map(|code| {
            let letters = (0..len).map(|i| Pauli::ALL[(code >> (2 * (len - 1 - i))) & 3]).collect();
            PauliString::new(0, letters)
        })
        .collect()
}

fn label(p: &PauliString) -> String {
    p.letters().iter().map(|l| l.as_char()).collect()
}

/// Every Pauli pair on the two regions.
pub fn correlator_table(sdo: &SuperdensityOperator) -> Result<Vec<CorrelatorEntry>> {
    let mut out = Vec::new();
    for o_a in pauli_strings(sdo.a.sites.len()) {
        for o_b in pauli_strings(sdo.b.sites.len()) {
            let v = sdo_correlator(sdo, &o_a, &o_b)?;
            out.push(CorrelatorEntry { a: label(&o_a), b: label(&o_b), re: v.re, im: v.im });
        }
    }
    Ok(out)
}

/// Lifts a region operator to the full system.
pub fn embed(o: &PauliString, sites: &[usize], n: usize) -> Result<PauliString> {
    if o.n_sites() != sites.len() {
        return Err(Error::DimensionMismatch(o.n_sites(), sites.len()));
    }
    let pairs: Vec<(usize, Pauli)> = sites.iter().copied().zip(o.letters().iter().copied()).collect();
    Ok(PauliString::from_sites(n, &pairs).with_phase(o.phase()))
}

/// `<Psi| U(t_B)^dag O_B U(t_B) U(t_A)^dag O_A U(t_A) |Psi>` by direct evolution.
pub fn direct_two_time_correlator(
    state: &StateVector,
    h: &Hamiltonian,
    o_a: &PauliString,
    t_a: f64,
    o_b: &PauliString,
    t_b: f64,
) -> Result<C64> {
    let n = state.n_qubits();
    for d in [h.n_qubits(), o_a.n_sites(), o_b.n_sites()] {
        if d != n {
            return Err(Error::DimensionMismatch(d, n));
        }
    }
    let at_a = evolve_vec(state.amplitudes(), h, t_a, EVOLVE_TOL)?.0;
    let kicked = evolve_vec(&o_a.apply(&at_a), h, t_b - t_a, EVOLVE_TOL)?.0;
    let bra = evolve_vec(state.amplitudes(), h, t_b, EVOLVE_TOL)?.0;
    Ok(inner(&bra, &o_b.apply(&kicked)))
}

/// [`direct_two_time_correlator`] over every Pauli pair on the two regions,
/// in [`correlator_table`] order.
pub fn direct_correlator_table(state: &StateVector, h: &Hamiltonian, a: &Region, b: &Region) -> Result<Vec<CorrelatorEntry>> {
    let n = state.n_qubits();
    if h.n_qubits() != n {
        return Err(Error::DimensionMismatch(h.n_qubits(), n));
    }
    check_region(&a.sites, n, "A")?;
    check_region(&b.sites, n, "B")?;
    let at_a = evolve_vec(state.amplitudes(), h, a.time, EVOLVE_TOL)?.0;
    let bra = evolve_vec(state.amplitudes(), h, b.time, EVOLVE_TOL)?.0;
    let ops_b = pauli_strings(b.sites.len());
    let rows: Vec<Vec<CorrelatorEntry>> = pauli_strings(a.sites.len())
        .into_par_iter()
        .map(|o_a| {
            let full_a = embed(&o_a, &a.sites, n)?;
            let kicked = evolve_vec(&full_a.apply(&at_a), h, b.time - a.time, EVOLVE_TOL)?.0;
            ops_b
                .iter()
                .map(|o_b| {
                    let v = inner(&bra, &embed(o_b, &b.sites, n)?.apply(&kicked));
                    Ok(CorrelatorEntry { a: label(&o_a), b: label(o_b), re: v.re, im: v.im })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().flatten().collect())
}
