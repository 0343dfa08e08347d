//! Complete asymptotic expansions of Laplace-type integrals
//! `∫ e^{-k f} g d^dξ` and the unitarity densities of reduction maps for
//! Hamiltonian group actions.
//!
//! The crate is organized bottom-up:
//!
//! * [`bell`]: exact combinatorics (Bell polynomials, power-series powers).
//! * [`jets`]: truncated power series, expression trees and Taylor jets of flows.
//! * [`engine`]: the generic expansion machine plus its quadrature oracle.
//! * [`models`]: Hamiltonian models, radial profiles and the densities built on them.

pub mod bell;
pub mod engine;
pub mod error;
pub mod jets;
pub mod models;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{ExactRational, Ring, Scalar};
