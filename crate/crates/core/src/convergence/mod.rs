//! Weak-convergence probes over finite families of test sets.
//!
//! Every verdict is evidence on a finite family of sets, never a proof:
//! a sequence is *consistent with convergence* when each set value has
//! settled within the tolerance over the last few indices.

mod oscillate;
mod probe;
mod scenario;
mod testsets;

pub use oscillate::{oscillating_sequence, OscillateError};
pub use probe::{
    equivalence_check, weak_l1_probe, weak_measure_probe, ConvergenceReport, EquivalenceOutcome, EquivalenceReport,
    MeasureSequence, ProbeError, ProbeKind, SetRow, UniformIntegrability, Verdict, DEFAULT_TOL, DEFAULT_WINDOW,
    MASS_TOL, UI_SCALES, UI_THRESHOLD,
};
pub use scenario::{monotone_density_scenario, MonotonicityViolation, ScenarioError, ScenarioReport};
pub use testsets::{generate_test_sets, BorelTestSet, TestSetError, TestSetFamily};
