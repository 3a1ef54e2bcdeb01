//! Numerical toolkit for complex stochastic optimal control.
//!
//! Particles move in complexified Minkowski space, `z = x + i y`, driven by two
//! perfectly (anti-)correlated real Wiener processes. This crate provides:
//!
//! - [`spacetime`]: metric conventions and complex four-vector algebra,
//! - [`wiener`]: signed shared increments and the complex diffusion coefficient,
//! - [`sde`]: Euler–Maruyama ensembles, action and Bellman estimators,
//! - [`ccalc`]: stencil-based complex calculus and Cauchy–Riemann checks,
//! - [`lagrangian`]: the analytically continued electromagnetic Lagrangian,
//! - [`control`]: stationarity solves in complex and real-pair form,
//! - [`hjb`]: residuals of the complex and real-pair HJB equations,
//! - [`dirac`]: gamma matrices, the Hopf–Cole identity and the linearized equation.
//!
//! The crate is `no_std` and only needs `alloc`. IO, configuration and
//! parallel drivers live in the `csoc-runner` crate.

#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;

pub mod ccalc;
pub mod control;
pub mod dirac;
pub mod error;
pub mod hjb;
pub mod lagrangian;
pub mod probes;
pub mod sde;
pub mod spacetime;
pub mod stats;
pub mod wiener;

pub use error::{Error, Result};
pub use spacetime::{ComplexFourVector, IndexPosition, Metric, Sign, Signature, C64};

/// Crate version, embedded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
