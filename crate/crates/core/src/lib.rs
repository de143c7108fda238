//! Homogeneous Young measures of piecewise functions on an interval.
//!
//! A measurable `u: Ω = (a, b) → K` induces the probability measure
//! `ν(A) = |u^{-1}(A)| / M` on `K`, `M = b - a`, characterized by
//! `∫_K β dν = (1/M) ∫_Ω β(u(x)) dx` for continuous `β`. This crate builds
//! `ν` for functions given piece by piece as expression strings:
//!
//! * [`exprfn`] parses, differentiates, validates and inverts the pieces;
//! * [`measures`] holds the three presentations of `ν` (atoms, density,
//!   distribution function) and answers integral, set and CDF queries;
//! * [`construct`] builds each presentation and cross-checks them;
//! * [`oracle`] provides quadrature, seeded Monte Carlo and KS distances;
//! * [`convergence`] probes sequences of measures and densities for weak
//!   convergence on families of test sets.

pub mod construct;
pub mod convergence;
pub mod document;
pub mod exprfn;
pub mod fixtures;
pub mod interval;
pub mod measures;
pub mod oracle;

pub use interval::{IntervalError, SupportInterval};
pub use measures::{HomogeneousYoungMeasure, TestFunction};
