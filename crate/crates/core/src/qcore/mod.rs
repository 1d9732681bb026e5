//! Statevectors, Pauli strings, dense few-site operators, partial traces,
//! Schmidt splits and entropies.

pub mod dense;
pub mod pauli;
pub mod schmidt;
pub mod state;

pub use dense::{
    hs_inner, pad_identity, partial_trace, partial_trace_operator, purity, renyi2_entropy, von_neumann_entropy,
    DenseOperator, DENSE_SITE_LIMIT,
};
pub use pauli::{project_nontrivial, Pauli, PauliString, PauliSum};
pub use schmidt::{schmidt_split, SchmidtPair, SCHMIDT_TOL};
pub use state::StateVector;
