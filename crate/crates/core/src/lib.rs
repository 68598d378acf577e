//! Kustaanheimo–Stiefel lifts of polynomial data and of Schrödinger-type
//! equations from ℝ³ to ℝ⁴.
//!
//! The crate is organised bottom-up:
//!
//! * [`poly`]: exact multivariate polynomials over ℚ.
//! * [`geometry`]: the KS map, double polar coordinates, fibers.
//! * [`harmonic`]: harmonic decompositions and descent through `K`.
//! * [`series`], [`split`]: truncated power series and the splitting of
//!   even `K`-invariant series into `φ₁ + |x| φ₂`.
//! * [`field`], [`quadrature`], [`verify`]: numerical checks of the lifted
//!   equations and of the pullback isometry.
//! * [`cli`]: the JSON command-line front end used by the `ks` binary.

pub mod cli;
pub mod error;
pub mod field;
pub mod geometry;
pub mod harmonic;
pub mod poly;
pub mod quadrature;
pub mod rational;
pub mod series;
pub mod split;
pub mod verify;

pub use error::{Error, Result};
pub use poly::{HomogeneousPolynomial, MultiIndex, Polynomial};
pub use rational::Rational;
