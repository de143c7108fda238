//! Builds the homogeneous Young measure of a partitioned function in each of
//! its presentations and checks them against each other and against the
//! defining identity `∫_K β dν = (1/M) ∫_Ω β(u(x)) dx`.

use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::exprfn::{FunctionKind, InvertError, PartitionedFunction, Piece, ValidationReport};
use crate::interval::SupportInterval;
use crate::measures::{
    AtomicMeasure, DensityMeasure, HomogeneousYoungMeasure, MeasureError, StieltjesMeasure, TestFunction,
};
use crate::oracle::Quadrature;

/// Points in the grid used by [`cross_validate`].
pub const CROSS_GRID: usize = 1025;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConstructError {
    #[error("function failed validation: {}", .0.failures().join("; "))]
    Validation(Box<ValidationReport>),
    #[error("density construction needs every piece onto K: {}", .0.failures().join("; "))]
    NotOnto(Box<ValidationReport>),
    #[error("expected a {expected:?} function")]
    WrongKind { expected: FunctionKind },
    #[error("expected exactly one piece, found {0}")]
    NotSinglePiece(usize),
    #[error("the piece is decreasing; reflect it first")]
    Decreasing,
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

fn require(u: &PartitionedFunction, k: &SupportInterval, onto: bool) -> Result<(), ConstructError> {
    let report = u.validate(k);
    if !report.structure_ok() {
        return Err(ConstructError::Validation(Box::new(report)));
    }
    if onto && !report.onto_ok() {
        return Err(ConstructError::NotOnto(Box::new(report)));
    }
    Ok(())
}

/// Constant values with weights `|Ω_i| / M`, equal values (to `1e-12`
/// relative) merged and sorted.
fn merged_levels(u: &PartitionedFunction) -> Vec<(f64, f64)> {
    let m = u.measure();
    let mut levels: Vec<(f64, f64)> = u
        .pieces()
        .iter()
        .filter_map(|p| p.constant_value().map(|c| (c, p.length() / m)))
        .collect();
    levels.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(levels.len());
    for (c, w) in levels {
        match out.last_mut() {
            Some(last) if (c - last.0).abs() <= 1e-12 * last.0.abs().max(1.0) => last.1 += w,
            _ => out.push((c, w)),
        }
    }
    out
}

/// `Σ |Ω_i| / M · δ_{c_i}` for a piecewise-constant `u`.
pub fn atomic_young_measure(
    u: &PartitionedFunction,
    k: &SupportInterval,
) -> Result<HomogeneousYoungMeasure, ConstructError> {
    if u.kind() != FunctionKind::Constant {
        return Err(ConstructError::WrongKind {
            expected: FunctionKind::Constant,
        });
    }
    require(u, k, false)?;
    let atoms = merged_levels(u)
        .into_iter()
        .map(|(c, w)| (c.clamp(k.lo(), k.hi()), w))
        .collect();
    Ok(HomogeneousYoungMeasure::Atomic(AtomicMeasure::new(atoms, *k)?))
}

/// Density `g(y) = (1/M) Σ_i |(u_i^{-1})'(y)|` of a piecewise-invertible `u`
/// whose pieces all map onto `K`.
pub fn density_young_measure(
    u: &PartitionedFunction,
    k: &SupportInterval,
) -> Result<HomogeneousYoungMeasure, ConstructError> {
    if u.kind() != FunctionKind::Invertible {
        return Err(ConstructError::WrongKind {
            expected: FunctionKind::Invertible,
        });
    }
    require(u, k, true)?;
    let pieces: Arc<[Piece]> = u.pieces().into();
    let singular = pieces.iter().flat_map(Piece::singular_image_points).collect();
    let scale = 1.0 / u.measure();
    let density = move |y: f64| {
        scale
            * pieces
                .iter()
                .map(|p| {
                    let (lo, hi) = p.image();
                    match p.inverse_derivative(y.clamp(lo, hi)) {
                        Ok(v) => v,
                        Err(InvertError::Singular { .. }) => f64::INFINITY,
                        Err(_) => f64::NAN,
                    }
                })
                .sum::<f64>()
    };
    Ok(HomogeneousYoungMeasure::AbsCont(DensityMeasure::new(
        Arc::new(density),
        singular,
        *k,
    )))
}

/// `λ({x ∈ Ω_i : u_i(x) <= y})` for a strictly monotone piece.
fn sublevel_length(p: &Piece, y: f64) -> f64 {
    let (lo, hi) = p.image();
    let increasing = p.direction() == Some(1.0);
    if y < lo {
        return 0.0;
    }
    if y >= hi {
        return p.length();
    }
    match p.invert_precise(y) {
        Ok(x) if increasing => x - p.lo(),
        Ok(x) => p.hi() - x,
        Err(_) => f64::NAN,
    }
}

/// Distribution function `F(y) = μ({u <= y})` of the image measure, from
/// per-piece preimages.
pub fn pushforward_young_measure(
    u: &PartitionedFunction,
    k: &SupportInterval,
) -> Result<HomogeneousYoungMeasure, ConstructError> {
    require(u, k, false)?;
    let jumps = merged_levels(u);
    let monotone: Arc<[Piece]> = u.pieces().iter().filter(|p| p.direction().is_some()).cloned().collect();
    let scale = 1.0 / u.measure();
    let steps = jumps.clone();
    let cdf = move |y: f64| {
        let from_steps: f64 = steps.iter().take_while(|j| j.0 <= y).map(|j| j.1).sum();
        let from_pieces: f64 = monotone.iter().map(|p| sublevel_length(p, y)).sum();
        (from_steps + scale * from_pieces).clamp(0.0, 1.0)
    };
    Ok(HomogeneousYoungMeasure::Stieltjes(StieltjesMeasure::new(
        Arc::new(cdf),
        jumps,
        *k,
    )))
}

/// `F(y) = (u^{-1}(y) - a) / M` for a single strictly increasing piece, with
/// `K` the closure of its image.
pub fn stieltjes_from_monotone(u: &PartitionedFunction) -> Result<HomogeneousYoungMeasure, ConstructError> {
    let [piece] = u.pieces() else {
        return Err(ConstructError::NotSinglePiece(u.pieces().len()));
    };
    let (lo, hi) = piece.image();
    let k = SupportInterval::new(lo, hi)
        .map_err(|_| ConstructError::Validation(Box::new(u.validate(&SupportInterval::unit()))))?;
    require(u, &k, false)?;
    if piece.direction() != Some(1.0) {
        return Err(ConstructError::Decreasing);
    }
    let piece = piece.clone();
    let scale = 1.0 / u.measure();
    let cdf = move |y: f64| {
        if y >= hi {
            return 1.0;
        }
        match piece.invert_precise(y.max(lo)) {
            Ok(x) => ((x - piece.lo()) * scale).clamp(0.0, 1.0),
            Err(_) => f64::NAN,
        }
    };
    Ok(HomogeneousYoungMeasure::Stieltjes(StieltjesMeasure::new(
        Arc::new(cdf),
        Vec::new(),
        k,
    )))
}

/// Every presentation that applies to `u`, labelled.
pub fn all_representations(
    u: &PartitionedFunction,
    k: &SupportInterval,
) -> Result<Vec<(&'static str, HomogeneousYoungMeasure)>, ConstructError> {
    let mut out = Vec::new();
    match u.kind() {
        FunctionKind::Constant => out.push(("atomic", atomic_young_measure(u, k)?)),
        FunctionKind::Invertible => match density_young_measure(u, k) {
            Ok(nu) => out.push(("density", nu)),
            Err(ConstructError::NotOnto(_)) => {}
            Err(e) => return Err(e),
        },
    }
    out.push(("pushforward", pushforward_young_measure(u, k)?));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityEntry {
    pub beta: String,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    pub difference: Option<f64>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub tol: f64,
    pub entries: Vec<IdentityEntry>,
    pub pass: bool,
}

/// `(1/M) ∫_Ω β(u(x)) dx`, integrated piece by piece.
fn composed_average(u: &PartitionedFunction, beta: &TestFunction, tol: f64) -> Result<f64, MeasureError> {
    let m = u.measure();
    let per_piece = tol * m / u.pieces().len() as f64;
    u.pieces().iter().try_fold(0.0, |acc, p| {
        let f = |x: f64| match p.value(x) {
            Ok(y) => beta.expr().eval(y).unwrap_or(f64::NAN),
            Err(_) => f64::NAN,
        };
        let r = Quadrature::new(per_piece).integrate(f, p.lo(), p.hi());
        match r {
            Ok(r) => Ok(acc + r.value / m),
            Err(e) => {
                // name the offending value of β when that is the cause
                if let crate::oracle::QuadError::NotFinite { at, .. } = e {
                    if let Ok(y) = p.value(at) {
                        beta.eval(y)?;
                    }
                }
                Err(e.into())
            }
        }
    })
}

/// Checks `|∫ β dν - (1/M) ∫ β∘u dx| <= tol` for every `β`; a failing `β`
/// is recorded and the rest still run.
pub fn verify_fundamental_identity(
    u: &PartitionedFunction,
    nu: &HomogeneousYoungMeasure,
    betas: &[TestFunction],
    tol: f64,
) -> IdentityReport {
    let inner = tol * 1e-2;
    let entries: Vec<IdentityEntry> = betas
        .iter()
        .map(|beta| {
            let lhs = nu.integrate(beta, inner);
            let rhs = composed_average(u, beta, inner);
            match (lhs, rhs) {
                (Ok(l), Ok(r)) => {
                    let d = (l - r).abs();
                    IdentityEntry {
                        beta: beta.label().to_string(),
                        lhs: Some(l),
                        rhs: Some(r),
                        difference: Some(d),
                        pass: d <= tol,
                        error: None,
                    }
                }
                (l, r) => IdentityEntry {
                    beta: beta.label().to_string(),
                    error: l.as_ref().err().or(r.as_ref().err()).map(ToString::to_string),
                    lhs: l.ok(),
                    rhs: r.ok(),
                    difference: None,
                    pass: false,
                },
            }
        })
        .collect();
    let pass = entries.iter().all(|e| e.pass);
    IdentityReport { tol, entries, pass }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub first: &'static str,
    pub second: &'static str,
    pub max_cdf_difference: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossReport {
    pub grid_points: usize,
    pub tol: f64,
    pub representations: Vec<&'static str>,
    pub comparisons: Vec<Comparison>,
    pub pass: bool,
}

/// Builds every applicable presentation and compares their distribution
/// functions pairwise on a uniform grid of `K`.
pub fn cross_validate(u: &PartitionedFunction, k: &SupportInterval, tol: f64) -> Result<CrossReport, ConstructError> {
    let reps = all_representations(u, k)?;
    let grid = k.grid(CROSS_GRID);
    let cdfs = reps
        .iter()
        .map(|(_, nu)| nu.cdf_sorted(&grid, 1e-12))
        .collect::<Result<Vec<_>, _>>()?;
    let mut comparisons = Vec::new();
    for i in 0..reps.len() {
        for j in i + 1..reps.len() {
            let max = cdfs[i]
                .iter()
                .zip(&cdfs[j])
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            comparisons.push(Comparison {
                first: reps[i].0,
                second: reps[j].0,
                max_cdf_difference: max,
                pass: max <= tol,
            });
        }
    }
    Ok(CrossReport {
        grid_points: CROSS_GRID,
        tol,
        representations: reps.iter().map(|r| r.0).collect(),
        pass: comparisons.iter().all(|c| c.pass),
        comparisons,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn unit() -> SupportInterval {
        SupportInterval::unit()
    }

    #[test]
    fn two_step_atoms() {
        let u = fixtures::two_step(0.2, 0.9);
        let HomogeneousYoungMeasure::Atomic(m) = atomic_young_measure(&u, &unit()).unwrap() else {
            panic!()
        };
        assert_eq!(m.atoms().len(), 2);
        assert!((m.atoms()[0].1 - 0.3).abs() < 1e-15 && (m.atoms()[1].1 - 0.7).abs() < 1e-15);
        let HomogeneousYoungMeasure::Atomic(m) = atomic_young_measure(&fixtures::two_step(0.5, 0.5), &unit()).unwrap()
        else {
            panic!()
        };
        assert_eq!(m.atoms(), &[(0.5, 1.0)]);
    }

    #[test]
    fn density_examples() {
        let nu = density_young_measure(&fixtures::sawtooth(), &unit()).unwrap();
        let d = nu.as_density().unwrap();
        for y in [0.01, 0.3, 0.5, 0.99] {
            assert!((d.density(y) - 1.0).abs() < 1e-12);
        }
        let nu = density_young_measure(&fixtures::square(), &unit()).unwrap();
        let d = nu.as_density().unwrap();
        assert_eq!(d.singular_points(), &[0.0]);
        assert!((d.density(0.25) - 1.0).abs() < 1e-12);
        assert!(d.density(0.0).is_infinite());
    }

    #[test]
    fn density_refuses_non_onto() {
        let u = fixtures::from_pieces(
            (0.0, 1.0),
            FunctionKind::Invertible,
            &[(0.0, 0.5, "x"), (0.5, 1.0, "x")],
        );
        assert!(matches!(
            density_young_measure(&u, &unit()),
            Err(ConstructError::NotOnto(_))
        ));
        // still fine as an image measure
        let nu = pushforward_young_measure(&u, &unit()).unwrap();
        assert!((nu.cdf(0.3).unwrap() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn pushforward_examples() {
        let nu = pushforward_young_measure(&fixtures::square(), &unit()).unwrap();
        assert!((nu.cdf(0.36).unwrap() - 0.6).abs() < 1e-15);
        let nu = pushforward_young_measure(&fixtures::sawtooth(), &unit()).unwrap();
        assert!((nu.cdf(0.3).unwrap() - 0.3).abs() < 1e-15);
        let nu = pushforward_young_measure(&fixtures::two_step(0.2, 0.9), &unit()).unwrap();
        assert!((nu.cdf(0.5).unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(nu.cdf(1.0).unwrap(), 1.0);
    }

    #[test]
    fn stieltjes_examples() {
        let u = fixtures::from_pieces((0.0, 1.0), FunctionKind::Invertible, &[(0.0, 1.0, "2*x")]);
        let nu = stieltjes_from_monotone(&u).unwrap();
        assert_eq!(nu.support(), SupportInterval::new(0.0, 2.0).unwrap());
        assert!((nu.cdf(0.5).unwrap() - 0.25).abs() < 1e-15);
        let nu = stieltjes_from_monotone(&fixtures::square()).unwrap();
        assert!((nu.cdf(0.25).unwrap() - 0.5).abs() < 1e-15);
        assert!(matches!(
            stieltjes_from_monotone(&fixtures::sawtooth()),
            Err(ConstructError::NotSinglePiece(2))
        ));
        let down = fixtures::from_pieces((0.0, 1.0), FunctionKind::Invertible, &[(0.0, 1.0, "1 - x")]);
        assert_eq!(stieltjes_from_monotone(&down).unwrap_err(), ConstructError::Decreasing);
    }

    #[test]
    fn identity_examples() {
        let u = fixtures::square();
        let nu = density_young_measure(&u, &unit()).unwrap();
        let r = verify_fundamental_identity(&u, &nu, &[TestFunction::parse("y").unwrap()], 1e-7);
        assert!(r.pass, "{r:?}");
        assert!((r.entries[0].lhs.unwrap() - 1.0 / 3.0).abs() < 1e-9);

        let u = fixtures::sawtooth();
        let nu = density_young_measure(&u, &unit()).unwrap();
        let r = verify_fundamental_identity(&u, &nu, &[TestFunction::parse("sin(y)").unwrap()], 1e-7);
        assert!((r.entries[0].lhs.unwrap() - (1.0 - 1f64.cos())).abs() < 1e-9);
        assert!(r.pass);

        let u = fixtures::two_step(0.4, 0.4);
        let nu = atomic_young_measure(&u, &unit()).unwrap();
        let r = verify_fundamental_identity(&u, &nu, &[TestFunction::parse("exp(y)").unwrap()], 1e-12);
        assert!(r.entries[0].difference.unwrap() < 1e-14);
    }

    #[test]
    fn identity_failure_does_not_abort() {
        let u = fixtures::identity();
        let nu = density_young_measure(&u, &unit()).unwrap();
        let betas = [
            TestFunction::parse("log(y - 2)").unwrap(),
            TestFunction::parse("y").unwrap(),
        ];
        let r = verify_fundamental_identity(&u, &nu, &betas, 1e-7);
        assert!(!r.entries[0].pass && r.entries[0].error.is_some());
        assert!(r.entries[1].pass);
        assert!(!r.pass);
    }

    #[test]
    fn cross_validation() {
        for u in [
            fixtures::square(),
            fixtures::sawtooth(),
            fixtures::identity(),
            fixtures::oscillation3(),
        ] {
            let r = cross_validate(&u, &unit(), 1e-9).unwrap();
            assert!(r.pass, "{r:?}");
            assert_eq!(r.representations, ["density", "pushforward"]);
        }
        let r = cross_validate(&fixtures::two_step(0.2, 0.9), &unit(), 0.0).unwrap();
        assert_eq!(r.comparisons[0].max_cdf_difference, 0.0);
    }

    #[test]
    fn validation_failure_is_reported() {
        let u = fixtures::from_pieces(
            (0.0, 1.0),
            FunctionKind::Invertible,
            &[(0.0, 0.5, "2*x"), (0.4, 1.0, "2 - 2*x")],
        );
        assert!(matches!(
            pushforward_young_measure(&u, &unit()),
            Err(ConstructError::Validation(_))
        ));
    }
}
