//! Spacetime lattices over a stored trajectory and the influence-weighted
//! displacement field on them.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::causal::InfluenceKernel;
use crate::hamlib::{evolve, evolved_dyads, Hamiltonian, DEFAULT_TOL};
use crate::qcore::dense::{partial_trace, von_neumann_entropy};
use crate::qcore::schmidt::schmidt_split;
use crate::qcore::StateVector;
use crate::{Error, Result};

/// A chain evolved in equal steps; slice `k` is the state at time `k * dt`.
#[derive(Clone, Debug)]
pub struct SpacetimeLattice {
    pub dx: f64,
    pub dt: f64,
    h: Hamiltonian,
    trajectory: Vec<StateVector>,
    tol: f64,
}

impl SpacetimeLattice {
    pub fn new(initial: StateVector, h: Hamiltonian, dt: f64, n_steps: usize) -> Result<Self> {
        Self::with_tolerance(initial, h, dt, n_steps, DEFAULT_TOL)
    }

    pub fn with_tolerance(initial: StateVector, h: Hamiltonian, dt: f64, n_steps: usize, tol: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("time step must be positive, got {dt}")));
        }
        if initial.n_qubits() != h.n_qubits() {
            return Err(Error::DimensionMismatch(initial.n_qubits(), h.n_qubits()));
        }
        let mut trajectory = Vec::with_capacity(n_steps + 1);
        trajectory.push(initial);
        for k in 0..n_steps {
            let next = evolve(&trajectory[k], &h, dt, tol)?.state;
            trajectory.push(next);
        }
        Ok(SpacetimeLattice { dx: 1.0, dt, h, trajectory, tol })
    }

    pub fn with_spacing(mut self, dx: f64) -> Self {
        self.dx = dx;
        self
    }

    pub fn n_sites(&self) -> usize {
        self.h.n_qubits()
    }

    pub fn n_steps(&self) -> usize {
        self.trajectory.len() - 1
    }

    pub fn hamiltonian(&self) -> &Hamiltonian {
        &self.h
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    pub fn slice(&self, k: usize) -> &StateVector {
        &self.trajectory[k]
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    fn check(&self, t: usize, x: usize) -> Result<()> {
        if t > self.n_steps() {
            return Err(Error::InvalidArgument(format!("time index {t} beyond {} steps", self.n_steps())));
        }
        if x >= self.n_sites() {
            return Err(Error::SiteOutOfRange { site: x, n: self.n_sites() });
        }
        Ok(())
    }
}

/// Neighbours of `(t, x)` on the box around it, going round from the past
/// left corner; the 4th and 8th (when present) are the equal-time ones.
pub fn neighborhood(lattice: &SpacetimeLattice, t: usize, x: usize) -> Result<Vec<(usize, usize)>> {
    lattice.check(t, x)?;
    let offsets: [(i64, i64); 8] = [(-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1)];
    let (t, x) = (t as i64, x as i64);
    Ok(offsets
        .iter()
        .map(|(dt, dx)| (t + dt, x + dx))
        .filter(|&(tq, xq)| tq >= 0 && tq <= lattice.n_steps() as i64 && xq >= 0 && xq < lattice.n_sites() as i64)
        .map(|(tq, xq)| (tq as usize, xq as usize))
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Contribution {
    pub t_index: usize,
    pub x_index: usize,
    pub ci: f64,
    /// Centre minus neighbour, in (time, length) units.
    pub displacement: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AotVector {
    pub t_index: usize,
    pub x_index: usize,
    pub v_t: f64,
    pub v_x: f64,
    pub contributions: Vec<Contribution>,
}

impl AotVector {
    fn from_contributions(t_index: usize, x_index: usize, contributions: Vec<Contribution>) -> Self {
        let (v_t, v_x) = sum_contributions(&contributions);
        AotVector { t_index, x_index, v_t, v_x, contributions }
    }

    /// Temporal component divided by the step, comparable to [`aot_leading`].
    pub fn temporal_per_step(&self, dt: f64) -> f64 {
        self.v_t / dt
    }
}

pub fn sum_contributions(contributions: &[Contribution]) -> (f64, f64) {
    let mut v = [0.0, 0.0];
    for c in contributions {
        v[0] += c.ci * c.displacement[0];
        v[1] += c.ci * c.displacement[1];
    }
    (v[0], v[1])
}

fn neighbor_ci(lattice: &SpacetimeLattice, t: usize, x: usize, tq: usize, xq: usize) -> Result<f64> {
    if tq == t {
        return Ok(0.0);
    }
    // the neighbour's slice holds the state at the kick
    let tau = if tq < t { lattice.dt } else { -lattice.dt };
    let k = InfluenceKernel::new(lattice.slice(tq), &lattice.h, xq, x, tau, lattice.tol)?;
    k.ci()
}

fn contribution(lattice: &SpacetimeLattice, t: usize, x: usize, tq: usize, xq: usize, ci: f64) -> Contribution {
    Contribution {
        t_index: tq,
        x_index: xq,
        ci,
        displacement: [(t as f64 - tq as f64) * lattice.dt, (x as f64 - xq as f64) * lattice.dx],
    }
}

pub fn aot_vector(lattice: &SpacetimeLattice, t: usize, x: usize) -> Result<AotVector> {
    let contributions = neighborhood(lattice, t, x)?
        .into_iter()
        .map(|(tq, xq)| Ok(contribution(lattice, t, x, tq, xq, neighbor_ci(lattice, t, x, tq, xq)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(AotVector::from_contributions(t, x, contributions))
}

/// Single-site entropies per `(t, x)`, natural log.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntropyMap {
    pub von_neumann: Vec<Vec<f64>>,
    pub renyi2: Vec<Vec<f64>>,
}

pub fn entropy_map(lattice: &SpacetimeLattice) -> Result<EntropyMap> {
    let rows: Vec<(Vec<f64>, Vec<f64>)> = (0..=lattice.n_steps())
        .into_par_iter()
        .map(|k| {
            let mut vn = Vec::with_capacity(lattice.n_sites());
            let mut r2 = Vec::with_capacity(lattice.n_sites());
            for x in 0..lattice.n_sites() {
                let rho = partial_trace(lattice.slice(k), &[x])?;
                vn.push(von_neumann_entropy(&rho)?.clamp(0.0, std::f64::consts::LN_2));
                r2.push((-rho.purity()?.ln()).clamp(0.0, std::f64::consts::LN_2));
            }
            Ok((vn, r2))
        })
        .collect::<Result<_>>()?;
    let (von_neumann, renyi2) = rows.into_iter().unzip();
    Ok(EntropyMap { von_neumann, renyi2 })
}

#[derive(Clone, Debug, Serialize)]
pub struct AotField {
    /// `[t][x]`
    pub vectors: Vec<Vec<AotVector>>,
    pub entropy: EntropyMap,
}

impl AotField {
    pub fn get(&self, t: usize, x: usize) -> &AotVector {
        &self.vectors[t][x]
    }
}

/// Field on every lattice point. Each (slice, site) kick is evolved once and
/// read out on all neighbouring targets.
pub fn aot_field(lattice: &SpacetimeLattice) -> Result<AotField> {
    let n = lattice.n_sites();
    let steps = lattice.n_steps();
    let jobs: Vec<(usize, usize, bool)> = (0..=steps)
        .flat_map(|k| (0..n).flat_map(move |q| [(k, q, true), (k, q, false)]))
        .filter(|&(k, _, fwd)| if fwd { k < steps } else { k > 0 })
        .collect();
    let entries: Vec<Vec<((usize, usize, usize, usize), f64)>> = jobs
        .par_iter()
        .map(|&(k, q, fwd)| {
            let tau = if fwd { lattice.dt } else { -lattice.dt };
            let target_slice = if fwd { k + 1 } else { k - 1 };
            let pair = schmidt_split(lattice.slice(k), q)?;
            let ev = evolved_dyads(&lattice.h, &pair.complement, q, tau, lattice.tol)?;
            let lo = q.saturating_sub(1);
            let hi = (q + 1).min(n - 1);
            (lo..=hi)
                .map(|x| {
                    let ci = InfluenceKernel::from_evolved(pair.clone(), &ev, q, x, tau).ci()?;
                    Ok(((k, q, target_slice, x), ci))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let cache: HashMap<_, _> = entries.into_iter().flatten().collect();
    let vectors = (0..=steps)
        .map(|t| {
            (0..n)
                .map(|x| {
                    let contributions = neighborhood(lattice, t, x)?
                        .into_iter()
                        .map(|(tq, xq)| {
                            let ci = if tq == t { 0.0 } else { cache[&(tq, xq, t, x)] };
                            contribution(lattice, t, x, tq, xq, ci)
                        })
                        .collect();
                    Ok(AotVector::from_contributions(t, x, contributions))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AotField { vectors, entropy: entropy_map(lattice)? })
}

/// Purely temporal estimate from the purity drop at `x` over the next step,
/// `2 (P(t) - P(t + dt)) / 10`.
pub fn aot_leading(state: &StateVector, h: &Hamiltonian, x: usize, dt: f64) -> Result<AotVector> {
    state.check_site(x)?;
    let later = evolve(state, h, dt, DEFAULT_TOL)?.state;
    let now = partial_trace(state, &[x])?.purity()?;
    let next = partial_trace(&later, &[x])?.purity()?;
    Ok(AotVector { t_index: 0, x_index: x, v_t: 2.0 * (now - next) / 10.0, v_x: 0.0, contributions: Vec::new() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::causal::ci_exact;
    use crate::hamlib::build_ising;

    fn fig_hamiltonian(n: usize) -> Hamiltonian {
        build_ising(n, 1.0, 0.01, -0.21).unwrap()
    }

    #[test]
    fn neighborhood_sizes() {
        let s = StateVector::from_label("0000").unwrap();
        let lat = SpacetimeLattice::new(s, fig_hamiltonian(4), 0.1, 3).unwrap();
        assert_eq!(neighborhood(&lat, 1, 1).unwrap().len(), 8);
        assert_eq!(neighborhood(&lat, 0, 0).unwrap().len(), 3);
        assert_eq!(neighborhood(&lat, 3, 3).unwrap().len(), 3);
        assert_eq!(neighborhood(&lat, 2, 0).unwrap().len(), 5);
        assert!(neighborhood(&lat, 4, 0).is_err());
        assert!(neighborhood(&lat, 0, 4).is_err());
        let nb = neighborhood(&lat, 1, 1).unwrap();
        assert_eq!(nb[3], (1, 2));
        assert_eq!(nb[7], (1, 0));
    }

    #[test]
    fn trajectory_slices_chain() {
        let s = StateVector::from_label("0+10").unwrap();
        let h = fig_hamiltonian(4);
        let lat = SpacetimeLattice::new(s, h.clone(), 0.05, 4).unwrap();
        for k in 1..=4 {
            let next = evolve(lat.slice(k - 1), &h, 0.05, DEFAULT_TOL).unwrap().state;
            let d: f64 = next.amplitudes().iter().zip(lat.slice(k).amplitudes()).map(|(a, b)| (a - b).norm_sqr()).sum();
            assert!(d.sqrt() < 1e-12);
        }
    }

    #[test]
    fn zero_hamiltonian_gives_zero_field() {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(1);
        let s = StateVector::random(4, &mut rng);
        let lat = SpacetimeLattice::new(s, Hamiltonian::zero(4), 0.1, 3).unwrap();
        let f = aot_field(&lat).unwrap();
        for (t, row) in f.vectors.iter().enumerate() {
            for v in row {
                assert!(v.v_x.abs() < 1e-15);
                // the first and last slices see only one side in time
                if t > 0 && t < 3 {
                    assert!(v.v_t.abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn field_matches_pointwise_vectors() {
        let s = evolve(&StateVector::from_label("00000").unwrap(), &fig_hamiltonian(5), -0.3, DEFAULT_TOL).unwrap().state;
        let lat = SpacetimeLattice::new(s, fig_hamiltonian(5), 0.05, 3).unwrap();
        let f = aot_field(&lat).unwrap();
        for t in 0..=3 {
            for x in 0..5 {
                let v = aot_vector(&lat, t, x).unwrap();
                let w = f.get(t, x);
                assert!((v.v_t - w.v_t).abs() < 1e-14 && (v.v_x - w.v_x).abs() < 1e-14);
                let (vt, vx) = sum_contributions(&w.contributions);
                assert_eq!((vt, vx), (w.v_t, w.v_x));
                for c in &w.contributions {
                    if c.t_index == t {
                        assert_eq!(c.ci, 0.0);
                        let direct = ci_exact(lat.slice(t), lat.hamiltonian(), c.x_index, x, 0.0).unwrap().value;
                        assert!(direct.abs() < 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn mirror_symmetry_flips_spatial_component() {
        let n = 6;
        let h = fig_hamiltonian(n);
        let s = evolve(&StateVector::from_label("000000").unwrap(), &h, -0.2, DEFAULT_TOL).unwrap().state;
        let lat = SpacetimeLattice::new(s, h, 0.05, 2).unwrap();
        let f = aot_field(&lat).unwrap();
        for t in 0..=2 {
            for x in 0..n {
                let (a, b) = (f.get(t, x), f.get(t, n - 1 - x));
                assert!((a.v_x + b.v_x).abs() < 1e-12);
                assert!((a.v_t - b.v_t).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn translation_invariant_bulk() {
        // periodic-looking bulk: far from the edges the early-time field is x-independent
        let n = 10;
        let h = fig_hamiltonian(n);
        let lat = SpacetimeLattice::new(StateVector::from_label("0000000000").unwrap(), h, 0.05, 2).unwrap();
        let f = aot_field(&lat).unwrap();
        let bulk: Vec<f64> = (4..6).map(|x| f.get(1, x).v_t).collect();
        assert!((bulk[0] - bulk[1]).abs() < 1e-12);
        assert!(f.get(1, 4).v_x.abs() < 1e-12);
    }

    #[test]
    fn leading_form_sign_and_stationarity() {
        let h = fig_hamiltonian(4);
        let v = aot_leading(&StateVector::from_label("0000").unwrap(), &h, 1, 0.01).unwrap();
        // product state: entropy grows
        assert!(v.v_t > 0.0 && v.v_x == 0.0);
        let z = Hamiltonian::new(
            4,
            vec![
                (1.0, crate::qcore::PauliString::parse("ZIII").unwrap()),
                (0.3, crate::qcore::PauliString::parse("IIXI").unwrap()),
            ],
        )
        .unwrap();
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(2);
        let s = StateVector::random(4, &mut rng);
        assert!(aot_leading(&s, &z, 0, 0.1).unwrap().v_t.abs() < 1e-13);
    }

    #[test]
    fn entropy_in_range() {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(3);
        let lat = SpacetimeLattice::new(StateVector::random(5, &mut rng), fig_hamiltonian(5), 0.1, 2).unwrap();
        let m = entropy_map(&lat).unwrap();
        for (a, b) in m.von_neumann.iter().flatten().zip(m.renyi2.iter().flatten()) {
            assert!((0.0..=std::f64::consts::LN_2).contains(a));
            assert!(*b <= *a + 1e-12);
        }
    }
}
