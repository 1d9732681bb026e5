//! Causal influence between single sites: exact values through the Schmidt
//! sector of the perturbed site, the state/dynamics factorization, Monte Carlo
//! over Haar kicks and Hilbert-Schmidt observables, and short-time forms.

pub mod design;
mod kernel;
mod montecarlo;
mod short_time;
mod theta;

pub use kernel::{ci_exact, ci_exact_with_tol, InfluenceKernel};
pub use montecarlo::{ci_cross_check, ci_design_average, ci_monte_carlo, haar_unitary, hs_observable};
pub use short_time::{
    ci_short_time_diff, ci_short_time_same, diff_site_commutator_coefficient, diff_site_general_form,
    diff_site_nearest_neighbor_form, has_three_body_coupling, purity_rate, SameSiteConvention,
};
pub use theta::{gamma, spectral_overlap, theta, GammaOperator, ThetaOperator};

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CiMethod {
    ExactClosedForm,
    MonteCarlo,
    ShortTime,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CiValue {
    pub value: f64,
    pub method: CiMethod,
    /// Monte Carlo only.
    pub stderr: Option<f64>,
}

impl CiValue {
    pub fn exact(value: f64) -> Self {
        CiValue { value, method: CiMethod::ExactClosedForm, stderr: None }
    }
}

/// Second moments of the Hilbert-Schmidt ensemble of positive unit-trace
/// operators in dimension `dim`: `E[O (x) O] = a 1 + b F`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentCoefficients {
    pub dim: usize,
    pub a: f64,
    pub b: f64,
}

impl MomentCoefficients {
    pub fn new(dim: usize) -> Self {
        let d = dim as f64;
        let a = 1.0 / (d * d + 1.0);
        MomentCoefficients { dim, a, b: a / d }
    }

    /// `E[tr(O)^2] = a D^2 + b D`, which must be 1.
    pub fn trace_moment(&self) -> f64 {
        let d = self.dim as f64;
        self.a * d * d + self.b * d
    }

    /// `E[tr(O^2)] = a D + b D^2`.
    pub fn purity_moment(&self) -> f64 {
        let d = self.dim as f64;
        self.a * d + self.b * d * d
    }
}

/// Weight of the per-Pauli variances in the averaged influence on one qubit:
/// `b(2) / 2`, i.e. `1 / (d_B^2 (d_B^2 + 1))` with `d_B = 2`.
pub const QUBIT_PAULI_WEIGHT: f64 = 1.0 / 20.0;
