//! Monotonicity-constrained nonnegative matrix factorization.
//!
//! Factorizes a data matrix `Z ≈ W·H` where every row of the source matrix
//! `H` is nonnegative and monotone (nondecreasing or nonincreasing along its
//! samples, per a caller-supplied [`MonotonicityPattern`]). Two variants are
//! provided:
//!
//! * [`fit_monotonous_nmf`]: `W ≥ 0`, alternating NNLS for `W` and a
//!   monotone-cone constrained least-squares solve for `H`.
//! * [`fit_monotonous_semi_nmf`]: `W` unconstrained in sign, updated in
//!   closed form by least squares; suitable for mixed-sign data.
//!
//! The [`baselines`] module holds unconstrained comparison methods and
//! [`experiments`] generates synthetic scenarios and evaluation reports.

pub mod baselines;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod io;
pub mod linalg;
pub mod monmf;
pub mod qp;
pub mod semi;

pub use error::{Error, Result};
pub use linalg::DenseMatrix;
pub use monmf::{
    fit_monotonous_nmf, FactorResult, FitOptions, HBackend, MonotonicityPattern, Termination,
};
pub use qp::Direction;
pub use semi::fit_monotonous_semi_nmf;
