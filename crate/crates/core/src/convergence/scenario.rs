use serde::Serialize;
use thiserror::Error;

use super::probe::{weak_l1_probe, ConvergenceReport, MeasureSequence, ProbeError};
use super::testsets::TestSetFamily;
use crate::construct::{density_young_measure, stieltjes_from_monotone, ConstructError};
use crate::exprfn::PartitionedFunction;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("member {index}: {source}")]
    Construct { index: usize, source: ConstructError },
    #[error(transparent)]
    Probe(#[from] ProbeError),
}

/// A consecutive pair whose set values decrease.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotonicityViolation {
    pub set: String,
    pub from: usize,
    pub to: usize,
    pub before: f64,
    pub after: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioReport {
    pub tol: f64,
    pub window: usize,
    /// First violation in family order, then index order.
    pub witness: Option<MonotonicityViolation>,
    pub violations: usize,
    pub monotone: bool,
    pub bounded: bool,
    pub max_value: f64,
    /// Every set's last `window` values agree within `tol`.
    pub converged: bool,
    pub probe: ConvergenceReport,
    pub pass: bool,
}

/// For single increasing pieces `u_1, ..., u_L`: checks that every
/// `ν_n(A) = (1/M) ∫_A (u_n^{-1})'` is nondecreasing in `n` and bounded by
/// 1, that each settles within `tol`, and runs the weak L1 probe on the
/// densities.
pub fn monotone_density_scenario(
    us: &[PartitionedFunction],
    family: &TestSetFamily,
    tol: f64,
    window: usize,
) -> Result<ScenarioReport, ScenarioError> {
    let densities = us
        .iter()
        .enumerate()
        .map(|(index, u)| {
            let nu = stieltjes_from_monotone(u).map_err(|source| ScenarioError::Construct { index, source })?;
            density_young_measure(u, &nu.support()).map_err(|source| ScenarioError::Construct { index, source })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let seq = MeasureSequence::numbered(densities)?;
    let probe = weak_l1_probe(&seq, family, tol, window)?;

    let mut witness = None;
    let mut violations = 0;
    let mut max_value = f64::NEG_INFINITY;
    for row in &probe.sets {
        let values: Vec<f64> = row.values.iter().map(|v| v.unwrap_or(f64::NAN)).collect();
        max_value = values.iter().copied().fold(max_value, f64::max);
        for n in 1..values.len() {
            if !(values[n] >= values[n - 1] - tol) {
                violations += 1;
                witness.get_or_insert_with(|| MonotonicityViolation {
                    set: row.label.clone(),
                    from: n,
                    to: n + 1,
                    before: values[n - 1],
                    after: values[n],
                });
            }
        }
    }
    let bounded = max_value <= 1.0 + tol;
    let converged = probe.sets.iter().all(|s| s.residual.is_some_and(|r| r <= tol));
    let monotone = witness.is_none();
    Ok(ScenarioReport {
        tol,
        window,
        witness,
        violations,
        monotone,
        bounded,
        max_value,
        converged,
        pass: monotone && bounded && converged,
        probe,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convergence::generate_test_sets;
    use crate::fixtures;
    use crate::interval::SupportInterval;

    #[test]
    fn equal_densities_pass() {
        let fam = generate_test_sets(&SupportInterval::unit(), 3);
        let r = monotone_density_scenario(&fixtures::square_spellings(), &fam, 1e-6, 3).unwrap();
        assert!(r.pass, "{:?}", r.witness);
        assert!(r.violations == 0 && r.bounded && r.converged);
    }

    #[test]
    fn crossing_pair_names_witness() {
        let fam = generate_test_sets(&SupportInterval::unit(), 3);
        let r = monotone_density_scenario(&fixtures::crossing_pair(), &fam, 1e-6, 2).unwrap();
        assert!(!r.pass && !r.monotone);
        let w = r.witness.unwrap();
        assert_eq!(w.set, "[0, 0.5]");
        assert!((w.before - 0.75).abs() < 1e-9 && (w.after - 0.25).abs() < 1e-9);
    }

    #[test]
    fn rejects_multi_piece_members() {
        let fam = generate_test_sets(&SupportInterval::unit(), 1);
        let err = monotone_density_scenario(&[fixtures::square(), fixtures::sawtooth()], &fam, 1e-6, 2).unwrap_err();
        assert!(matches!(err, ScenarioError::Construct { index: 1, .. }));
    }
}
