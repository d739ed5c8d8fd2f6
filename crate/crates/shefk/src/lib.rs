//! Numerics for the 1-D stochastic heat equation driven by space-only white
//! noise: truncated Feynman-Kac Monte Carlo, Wiener chaos expansion, and a
//! deterministic reduced-PDE cross-check, with the identities tying the three
//! routes together exposed as testable operations.

pub mod cli;
pub mod error;
pub mod hermite;
pub mod kernels;
mod par;
pub mod paths;
pub mod pde;
pub mod rng;
pub mod solver;
pub mod validate;
pub mod wick;

pub use error::{Error, Result};
pub use kernels::InitialCondition;
pub use solver::{FieldEstimate, SolverConfig};
