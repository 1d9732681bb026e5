//! Exact causal-influence toolkit for small qubit chains.
//!
//! Layers, bottom up: [`qcore`] (states, Pauli strings, partial traces),
//! [`hamlib`] (models and Krylov evolution), [`causal`] (influence values),
//! [`aot`] (spacetime fields), [`acausal`], [`qec`], [`sdo`], and the
//! [`cli`] runner behind the `chronoscope` binary.

pub mod acausal;
pub mod aot;
pub mod causal;
pub mod cli;
pub mod error;
pub mod hamlib;
pub mod qcore;
pub mod qec;
pub mod sdo;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
