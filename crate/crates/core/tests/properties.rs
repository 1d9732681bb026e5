//! Invariants over randomly generated instances.

use chronoscope::aot::{aot_field, SpacetimeLattice};
use chronoscope::causal::{ci_exact, theta, InfluenceKernel};
use chronoscope::cli::{Experiment, ExperimentConfig};
use chronoscope::hamlib::{build_ising, evolve, Hamiltonian, DEFAULT_TOL};
use chronoscope::qcore::dense::partial_trace;
use chronoscope::qcore::{schmidt_split, Pauli, PauliString, StateVector};
use chronoscope::sdo::{correlator_table, direct_correlator_table, sdo_build, Region};
use chronoscope::C64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn state(n: usize, seed: u64) -> StateVector {
    StateVector::random(n, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn chain(n: usize, c: [f64; 4]) -> Hamiltonian {
    let extra = (0..n - 1).map(|x| (c[3], PauliString::from_sites(n, &[(x, Pauli::Y), (x + 1, Pauli::Z)]))).collect();
    build_ising(n, c[0], c[1], c[2]).unwrap().plus(&Hamiltonian::new(n, extra).unwrap()).unwrap()
}

fn pauli() -> impl Strategy<Value = Pauli> {
    prop::sample::select(Pauli::ALL.to_vec())
}

fn coeffs() -> impl Strategy<Value = [f64; 4]> {
    prop::array::uniform4(-1.0..1.0f64)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn pauli_product_matches_action(a in prop::collection::vec(pauli(), 3), b in prop::collection::vec(pauli(), 3), seed in any::<u64>()) {
        let (p, q) = (PauliString::new(0, a), PauliString::new(0, b));
        let v = state(3, seed);
        let lhs = p.mul(&q).apply(v.amplitudes());
        let rhs = p.apply(&q.apply(v.amplitudes()));
        for (x, y) in lhs.iter().zip(&rhs) {
            prop_assert!((x - y).norm() < 1e-14);
        }
        prop_assert_eq!(p.commutes_with(&q), p.mul(&q) == q.mul(&p));
    }

    #[test]
    fn evolution_is_unitary_and_reversible(n in 2usize..6, c in coeffs(), t in -2.0..2.0f64, seed in any::<u64>()) {
        let h = chain(n, c);
        let s = state(n, seed);
        let fwd = evolve(&s, &h, t, DEFAULT_TOL).unwrap().state;
        prop_assert!((fwd.norm() - 1.0).abs() < 1e-12);
        prop_assert!((h.energy(&fwd) - h.energy(&s)).abs() < 1e-10);
        let back = evolve(&fwd, &h, -t, DEFAULT_TOL).unwrap().state;
        prop_assert!((back.inner(&s).norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn influence_is_bounded_and_routes_agree(n in 2usize..5, c in coeffs(), tau in -1.5..1.5f64, seed in any::<u64>(), a in 0usize..4, b in 0usize..4) {
        let (a, b) = (a % n, b % n);
        let h = chain(n, c);
        let s = state(n, seed);
        let k = InfluenceKernel::new(&s, &h, a, b, tau, DEFAULT_TOL).unwrap();
        let v = k.ci_spectral();
        prop_assert!(v >= -1e-15);
        // a single-qubit readout cannot vary by more than the product-state value
        prop_assert!(v <= 0.05 + 1e-12);
        prop_assert!((v - k.ci_four_trace()).abs() < 1e-10);
    }

    #[test]
    fn spacelike_influence_vanishes(n in 2usize..6, c in coeffs(), seed in any::<u64>(), a in 0usize..5, d in 1usize..5) {
        let a = a % n;
        let b = (a + d) % n;
        prop_assume!(a != b);
        let v = ci_exact(&state(n, seed), &chain(n, c), a, b, 0.0).unwrap().value;
        prop_assert!(v.abs() <= 1e-15);
    }

    #[test]
    fn theta_is_psd_with_fixed_trace(n in 2usize..6, q in 0usize..5, seed in any::<u64>()) {
        let q = q % n;
        let s = state(n, seed);
        let th = theta(&s, q).unwrap();
        prop_assert!(th.min_eigenvalue() > -1e-12);
        let pur = partial_trace(&s, &[q]).unwrap().purity().unwrap();
        prop_assert!((th.trace() - th.dim as f64 * (1.0 - pur / 2.0) / 3.0).abs() < 1e-10);
        let w = schmidt_split(&s, q).unwrap().weights;
        prop_assert!((w[0] + w[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn config_round_trips(exp in prop::sample::select(Experiment::ALL.to_vec()), n in 3usize..9, dt in 0.001..0.1f64, steps in 1usize..50) {
        let mut cfg = ExperimentConfig::new(exp);
        if exp != Experiment::Qec {
            cfg.n_qubits = Some(n);
        }
        cfg.dt = Some(dt);
        cfg.n_steps = Some(steps);
        let text = serde_json::to_string(&cfg).unwrap();
        prop_assert_eq!(ExperimentConfig::from_json(&text).unwrap(), cfg);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    /// Conjugating the last slice and replaying reverses the temporal
    /// component slice by slice and leaves the spatial one alone.
    #[test]
    fn field_reverses_under_time_reversal(c in prop::array::uniform3(-1.0..1.0f64), seed in any::<u64>()) {
        let (n, steps, dt) = (4, 4, 0.05);
        let h = build_ising(n, c[0], c[1], c[2]).unwrap();
        let lat = SpacetimeLattice::new(state(n, seed), h.clone(), dt, steps).unwrap();
        let f = aot_field(&lat).unwrap();
        let last = lat.slice(steps);
        let conj = StateVector::new(n, last.amplitudes().iter().map(C64::conj).collect()).unwrap();
        let rev = aot_field(&SpacetimeLattice::new(conj, h, dt, steps).unwrap()).unwrap();
        for k in 0..=steps {
            for x in 0..n {
                let (o, r) = (f.get(steps - k, x), rev.get(k, x));
                prop_assert!((r.v_t + o.v_t).abs() < 1e-12);
                prop_assert!((r.v_x - o.v_x).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sdo_reproduces_direct_correlators(n in 2usize..5, c in coeffs(), seed in any::<u64>(), ta in -1.0..1.0f64, tb in -1.0..1.0f64, a in 0usize..4, b in 0usize..4) {
        let (a, b) = (a % n, b % n);
        prop_assume!(a != b || (ta - tb).abs() > 1e-6);
        let h = chain(n, c);
        let s = state(n, seed);
        let (ra, rb) = (Region { sites: vec![a], time: ta }, Region { sites: vec![b], time: tb });
        let sdo = sdo_build(&s, &h, &ra, &rb).unwrap();
        prop_assert!((sdo.trace() - C64::new(1.0, 0.0)).norm() < 1e-12);
        prop_assert!(sdo.is_psd(1e-10));
        for (x, y) in correlator_table(&sdo).unwrap().iter().zip(&direct_correlator_table(&s, &h, &ra, &rb).unwrap()) {
            prop_assert!((x.re - y.re).abs() < 1e-10 && (x.im - y.im).abs() < 1e-10);
        }
    }
}
