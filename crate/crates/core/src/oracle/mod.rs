//! Independent numerical ground truth: adaptive quadrature, seeded Monte
//! Carlo sampling of the pushforward, and Kolmogorov–Smirnov distances.

mod ks;
mod montecarlo;
mod quadrature;

pub use ks::{ks_distance, KsError, KS_THRESHOLD};
pub use montecarlo::{
    monte_carlo_pushforward, monte_carlo_pushforward_sharded, EmpiricalSample, SampleError, DEFAULT_SAMPLES,
    DEFAULT_SEED,
};
pub use quadrature::{adaptive_quadrature, QuadError, Quadrature, QuadratureResult, DEFAULT_MAX_NODES};
