use serde::Serialize;
use thiserror::Error;

use super::testsets::{BorelTestSet, TestSetFamily};
use crate::interval::SupportInterval;
use crate::measures::{HomogeneousYoungMeasure, MeasureError};

pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_WINDOW: usize = 3;
/// Allowed deviation of each member's total mass from 1.
pub const MASS_TOL: f64 = 1e-9;
/// Scales `δ = 2^-4 .. 2^-10` (as fractions of `|K|`) of the
/// uniform-integrability diagnostic.
pub const UI_SCALES: [i32; 7] = [4, 5, 6, 7, 8, 9, 10];
/// The diagnostic fires when some member puts more than this much mass on
/// a window of length `2^-10 |K|`.
pub const UI_THRESHOLD: f64 = 0.25;
/// The distribution function behind the diagnostic is sampled with step
/// `2^-UI_RESOLUTION |K|`.
const UI_RESOLUTION: i32 = 11;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProbeError {
    #[error("a sequence needs at least two members, got {0}")]
    TooShort(usize),
    #[error("member {index} has total mass {mass}, expected 1 ± {MASS_TOL}")]
    NotNormalized { index: usize, mass: f64 },
    #[error("member {index}: {source}")]
    Measure { index: usize, source: MeasureError },
    #[error("window must satisfy 2 <= window <= {len}, got {window}")]
    BadWindow { window: usize, len: usize },
    #[error("member {0} is not given by a density")]
    NotADensity(usize),
    #[error("the two reports use different test-set families or sequence lengths")]
    MismatchedReports,
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error("{0} labels for {1} members")]
    LabelCount(usize, usize),
}

/// `ν^1, ..., ν^L`, each a probability measure.
#[derive(Debug, Clone)]
pub struct MeasureSequence {
    members: Vec<HomogeneousYoungMeasure>,
    labels: Vec<String>,
}

impl MeasureSequence {
    /// Checks `L >= 2` and that every member has mass `1 ± 1e-9`.
    pub fn new(members: Vec<HomogeneousYoungMeasure>, labels: Vec<String>) -> Result<Self, ProbeError> {
        if members.len() < 2 {
            return Err(ProbeError::TooShort(members.len()));
        }
        if labels.len() != members.len() {
            return Err(ProbeError::LabelCount(labels.len(), members.len()));
        }
        for (index, nu) in members.iter().enumerate() {
            let check = nu
                .check_probability(MASS_TOL)
                .map_err(|source| ProbeError::Measure { index, source })?;
            if !check.normalized {
                return Err(ProbeError::NotNormalized {
                    index,
                    mass: check.mass,
                });
            }
        }
        Ok(MeasureSequence { members, labels })
    }

    /// Members labelled `1..=L`.
    pub fn numbered(members: Vec<HomogeneousYoungMeasure>) -> Result<Self, ProbeError> {
        let labels = (1..=members.len()).map(|i| i.to_string()).collect();
        MeasureSequence::new(members, labels)
    }

    pub fn members(&self) -> &[HomogeneousYoungMeasure] {
        &self.members
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Smallest interval containing every member's support.
    pub fn support_hull(&self) -> SupportInterval {
        self.members
            .iter()
            .skip(1)
            .fold(self.members[0].support(), |k, nu| k.hull(&nu.support()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    ConsistentWithConvergence,
    Inconsistent,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProbeKind {
    Density,
    Measure,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SetRow {
    pub label: String,
    pub intervals: Vec<(f64, f64)>,
    /// `ν^l(A)` per index; `None` where the value could not be computed.
    pub values: Vec<Option<f64>>,
    /// `max - min` over the last `window` values.
    pub residual: Option<f64>,
    /// The final value.
    pub limit: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<String>,
}

/// Largest mass any member puts on a window of length `δ |K|`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniformIntegrability {
    pub deltas: Vec<f64>,
    /// `[member][scale]`.
    pub window_mass: Vec<Vec<f64>>,
    /// Maximum over members, per scale.
    pub max_window_mass: Vec<f64>,
    pub threshold: f64,
    pub fired: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub probe: ProbeKind,
    pub support: SupportInterval,
    pub depth: u32,
    pub tol: f64,
    pub window: usize,
    pub members: Vec<String>,
    pub sets: Vec<SetRow>,
    pub max_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub uniform_integrability: Option<UniformIntegrability>,
    pub verdict: Verdict,
}

impl ConvergenceReport {
    /// Value matrix as CSV text: one row per set, one column per member.
    pub fn values_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["set".to_string()];
        header.extend(self.members.iter().cloned());
        w.write_record(&header).expect("in-memory write");
        for row in &self.sets {
            let mut rec = vec![row.label.clone()];
            rec.extend(row.values.iter().map(|v| v.map_or(String::new(), |v| v.to_string())));
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
    }

    pub fn limits(&self) -> Vec<Option<f64>> {
        self.sets.iter().map(|s| s.limit).collect()
    }
}

fn quad_tol(tol: f64) -> f64 {
    (tol * 1e-3).clamp(1e-13, 1e-10)
}

fn set_value(nu: &HomogeneousYoungMeasure, set: &BorelTestSet, tol: f64) -> Result<f64, MeasureError> {
    nu.measure_of_set(&set.clip(&nu.support()), tol)
}

fn probe(
    kind: ProbeKind,
    seq: &MeasureSequence,
    family: &TestSetFamily,
    tol: f64,
    window: usize,
) -> Result<ConvergenceReport, ProbeError> {
    if !(tol > 0.0) {
        return Err(ProbeError::BadTolerance(tol));
    }
    if window < 2 || window > seq.len() {
        return Err(ProbeError::BadWindow { window, len: seq.len() });
    }
    let qtol = quad_tol(tol);
    let sets: Vec<SetRow> = family
        .sets
        .iter()
        .map(|set| {
            let mut errors = Vec::new();
            let values: Vec<Option<f64>> = seq
                .members()
                .iter()
                .enumerate()
                .map(|(i, nu)| match set_value(nu, set, qtol) {
                    Ok(v) => Some(v),
                    Err(e) => {
                        errors.push(format!("member {}: {e}", seq.labels()[i]));
                        None
                    }
                })
                .collect();
            let tail = &values[values.len() - window..];
            let residual = tail.iter().copied().collect::<Option<Vec<f64>>>().map(|t| {
                let max = t.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let min = t.iter().copied().fold(f64::INFINITY, f64::min);
                max - min
            });
            SetRow {
                label: set.label().to_string(),
                intervals: set.intervals().to_vec(),
                limit: *values.last().expect("L >= 2"),
                values,
                residual,
                errors,
            }
        })
        .collect();

    let uniform_integrability = match kind {
        ProbeKind::Density => Some(uniform_integrability(seq)?),
        ProbeKind::Measure => None,
    };
    let max_residual = sets
        .iter()
        .map(|s| s.residual)
        .try_fold(0.0, |m: f64, r| r.map(|r| m.max(r)));
    let verdict = if sets.iter().any(|s| s.residual.is_some_and(|r| r > tol)) {
        Verdict::Inconsistent
    } else if sets.iter().any(|s| s.residual.is_none()) || uniform_integrability.as_ref().is_some_and(|u| u.fired) {
        Verdict::Inconclusive
    } else {
        Verdict::ConsistentWithConvergence
    };
    Ok(ConvergenceReport {
        probe: kind,
        support: family.support,
        depth: family.depth,
        tol,
        window,
        members: seq.labels().to_vec(),
        sets,
        max_residual,
        uniform_integrability,
        verdict,
    })
}

/// `sup` over windows `[t, t + δ|K|]` of `ν(window)`, read off the
/// distribution function on a grid of step `2^-11 |K|`.
fn uniform_integrability(seq: &MeasureSequence) -> Result<UniformIntegrability, ProbeError> {
    let cells = 1usize << UI_RESOLUTION;
    let mut window_mass = Vec::with_capacity(seq.len());
    for (index, nu) in seq.members().iter().enumerate() {
        if nu.as_density().is_none() {
            return Err(ProbeError::NotADensity(index));
        }
        let grid = nu.support().grid(cells + 1);
        let cdf = nu
            .cdf_sorted(&grid, 1e-6)
            .map_err(|source| ProbeError::Measure { index, source })?;
        let per_scale = UI_SCALES
            .iter()
            .map(|&j| {
                let w = cells >> j;
                cdf.windows(w + 1).map(|c| c[w] - c[0]).fold(0.0, f64::max)
            })
            .collect();
        window_mass.push(per_scale);
    }
    let max_window_mass: Vec<f64> = (0..UI_SCALES.len())
        .map(|s| window_mass.iter().map(|m: &Vec<f64>| m[s]).fold(0.0, f64::max))
        .collect();
    let fired = *max_window_mass.last().expect("scales are nonempty") > UI_THRESHOLD;
    Ok(UniformIntegrability {
        deltas: UI_SCALES.iter().map(|&j| 0.5f64.powi(j)).collect(),
        window_mass,
        max_window_mass,
        threshold: UI_THRESHOLD,
        fired,
    })
}

/// Set integrals `∫_A g^l` of a density sequence, with the
/// uniform-integrability diagnostic.
pub fn weak_l1_probe(
    densities: &MeasureSequence,
    family: &TestSetFamily,
    tol: f64,
    window: usize,
) -> Result<ConvergenceReport, ProbeError> {
    if let Some(i) = densities.members().iter().position(|nu| nu.as_density().is_none()) {
        return Err(ProbeError::NotADensity(i));
    }
    probe(ProbeKind::Density, densities, family, tol, window)
}

/// Set evaluations `ν^l(A)` of a measure sequence.
pub fn weak_measure_probe(
    measures: &MeasureSequence,
    family: &TestSetFamily,
    tol: f64,
    window: usize,
) -> Result<ConvergenceReport, ProbeError> {
    probe(ProbeKind::Measure, measures, family, tol, window)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EquivalenceOutcome {
    /// Verdicts agree and, where both converge, so do the limits.
    Equivalent,
    /// The density side failed the uniform-integrability diagnostic, so the
    /// density verdict is not evidence either way.
    AnnotatedInconclusive,
    /// A quadrature failure left one side undecided.
    Inconclusive,
    Contradiction,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub outcome: EquivalenceOutcome,
    pub density_verdict: Verdict,
    pub measure_verdict: Verdict,
    pub verdicts_agree: bool,
    pub tol: f64,
    pub max_limit_difference: Option<f64>,
    /// Sets whose limits differ by more than `tol`.
    pub mismatched_sets: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub annotation: Option<String>,
}

impl EquivalenceReport {
    /// Success in the command-line sense: equivalent without divergence, or
    /// annotated.
    pub fn passed(&self) -> bool {
        match self.outcome {
            EquivalenceOutcome::Equivalent => self.density_verdict == Verdict::ConsistentWithConvergence,
            EquivalenceOutcome::AnnotatedInconclusive => true,
            _ => false,
        }
    }
}

/// Compares a density report with a measure report over the same family.
pub fn equivalence_check(
    density: &ConvergenceReport,
    measure: &ConvergenceReport,
    tol: f64,
) -> Result<EquivalenceReport, ProbeError> {
    let same_sets = density.sets.len() == measure.sets.len()
        && density.sets.iter().zip(&measure.sets).all(|(a, b)| a.label == b.label);
    if !same_sets || density.members.len() != measure.members.len() {
        return Err(ProbeError::MismatchedReports);
    }
    let mut mismatched_sets = Vec::new();
    let mut max_diff: Option<f64> = Some(0.0);
    for (a, b) in density.sets.iter().zip(&measure.sets) {
        match (a.limit, b.limit) {
            (Some(x), Some(y)) => {
                let d = (x - y).abs();
                max_diff = max_diff.map(|m| m.max(d));
                if d > tol {
                    mismatched_sets.push(a.label.clone());
                }
            }
            _ => max_diff = None,
        }
    }
    let verdicts_agree = density.verdict == measure.verdict;
    let ui_fired = density.uniform_integrability.as_ref().is_some_and(|u| u.fired);
    let both_converge = density.verdict == Verdict::ConsistentWithConvergence && verdicts_agree;
    let (outcome, annotation) = if ui_fired {
        (
            EquivalenceOutcome::AnnotatedInconclusive,
            Some(format!(
                "density sequence fails the uniform-integrability diagnostic (window mass above {UI_THRESHOLD} at δ = 2^-10); \
                 interval convergence does not imply weak L1 convergence here, so no equivalence verdict is drawn"
            )),
        )
    } else if density.verdict == Verdict::Inconclusive || measure.verdict == Verdict::Inconclusive {
        (EquivalenceOutcome::Inconclusive, None)
    } else if !verdicts_agree || (both_converge && !mismatched_sets.is_empty()) {
        (EquivalenceOutcome::Contradiction, None)
    } else {
        (EquivalenceOutcome::Equivalent, None)
    };
    Ok(EquivalenceReport {
        outcome,
        density_verdict: density.verdict,
        measure_verdict: measure.verdict,
        verdicts_agree,
        tol,
        max_limit_difference: max_diff,
        mismatched_sets,
        annotation,
    })
}
