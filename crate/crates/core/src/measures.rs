//! Homogeneous Young measures on a compact interval `K`.
//!
//! A homogeneous Young measure is a single probability measure on `K`: the
//! types here carry no dependence on a point of the underlying domain, so
//! one value answers every query. Three concrete presentations are used:
//!
//! * [`AtomicMeasure`]: finitely many weighted atoms (piecewise-constant `u`);
//! * [`DensityMeasure`]: a density with respect to Lebesgue measure on `K`,
//!   possibly unbounded at finitely many declared points;
//! * [`StieltjesMeasure`]: a nondecreasing distribution function `F` with
//!   `ν([c, y]) = F(y)`, plus the list of its jumps.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::convergence::BorelTestSet;
use crate::exprfn::{parse_in, EvalError, Expr, ParseError};
use crate::interval::SupportInterval;
use crate::oracle::{QuadError, Quadrature};

/// Quadrature tolerance for queries that take no explicit tolerance.
pub const DEFAULT_QUERY_TOL: f64 = 1e-12;
/// Number of samples in serialized grids.
pub const DEFAULT_GRID: usize = 1025;

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeasureError {
    #[error("test function undefined at y = {y}: {source}")]
    TestFunction { y: f64, source: EvalError },
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error("y = {y} lies outside the support [{lo}, {hi}]")]
    OutsideSupport { y: f64, lo: f64, hi: f64 },
    #[error("test set {label} is not contained in the support [{lo}, {hi}]")]
    SetOutsideSupport { label: String, lo: f64, hi: f64 },
    #[error("invalid atom ({at}, {weight}): atoms must lie in K with positive weight")]
    InvalidAtom { at: f64, weight: f64 },
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
}

/// A test function `β` on `K`, written in the variable `y`.
#[derive(Debug, Clone)]
pub struct TestFunction {
    label: String,
    expr: Expr,
    derivative: Expr,
}

impl TestFunction {
    pub fn parse(source: &str) -> Result<Self, ParseError> {
        let expr = parse_in(source, "y")?;
        Ok(TestFunction::from_expr(source.trim(), expr))
    }

    pub fn from_expr(label: &str, expr: Expr) -> Self {
        let derivative = expr.derivative();
        TestFunction {
            label: label.to_string(),
            expr,
            derivative,
        }
    }

    /// `β ≡ 1`.
    pub fn one() -> Self {
        TestFunction::from_expr("1", Expr::Const(1.0))
    }

    /// `{1, y, y^2, sin(y), exp(y)}`.
    pub fn default_suite() -> Vec<TestFunction> {
        ["1", "y", "y^2", "sin(y)", "exp(y)"]
            .into_iter()
            .map(|s| TestFunction::parse(s).expect("built-in test function parses"))
            .collect()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn eval(&self, y: f64) -> Result<f64, MeasureError> {
        self.expr
            .eval(y)
            .map_err(|source| MeasureError::TestFunction { y, source })
    }

    /// `β'(y)`, falling back to a central difference where the symbolic
    /// derivative is undefined (e.g. `abs` at its kink).
    fn slope(&self, y: f64) -> f64 {
        match self.derivative.eval(y) {
            Ok(d) => d,
            Err(_) => {
                // power-of-two step so that y ± h is exact
                let h = (y.abs().max(1.0).log2().floor() - 23.0).exp2();
                match (self.expr.eval(y + h), self.expr.eval(y - h)) {
                    (Ok(a), Ok(b)) => (a - b) / (2.0 * h),
                    _ => f64::NAN,
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AtomicMeasure {
    /// `(location, weight)` sorted by location, locations distinct.
    atoms: Vec<(f64, f64)>,
    support: SupportInterval,
}

impl AtomicMeasure {
    /// Builds the measure, merging atoms at equal locations.
    pub fn new(atoms: Vec<(f64, f64)>, support: SupportInterval) -> Result<Self, MeasureError> {
        let mut atoms = atoms;
        for &(at, weight) in &atoms {
            if !(weight > 0.0 && weight.is_finite() && support.contains(at)) {
                return Err(MeasureError::InvalidAtom { at, weight });
            }
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        for (at, w) in atoms {
            match merged.last_mut() {
                Some(last) if last.0 == at => last.1 += w,
                _ => merged.push((at, w)),
            }
        }
        Ok(AtomicMeasure { atoms: merged, support })
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }
}

#[derive(Clone)]
pub struct DensityMeasure {
    density: RealFn,
    singular: Vec<f64>,
    support: SupportInterval,
}

impl DensityMeasure {
    pub fn new(density: RealFn, singular: Vec<f64>, support: SupportInterval) -> Self {
        let mut singular = singular;
        singular.retain(|s| support.contains(*s));
        singular.sort_by(f64::total_cmp);
        singular.dedup();
        DensityMeasure {
            density,
            singular,
            support,
        }
    }

    /// Density given as an expression in `y`; points where it cannot be
    /// evaluated read as NaN.
    pub fn from_expr(expr: Expr, singular: Vec<f64>, support: SupportInterval) -> Self {
        let f = move |y: f64| expr.eval(y).unwrap_or(f64::NAN);
        DensityMeasure::new(Arc::new(f), singular, support)
    }

    pub fn density(&self, y: f64) -> f64 {
        (self.density)(y)
    }

    pub fn singular_points(&self) -> &[f64] {
        &self.singular
    }

    fn integral(&self, lo: f64, hi: f64, tol: f64) -> Result<f64, QuadError> {
        let q = Quadrature::new(tol).singular(&self.singular);
        Ok(q.integrate(|y| (self.density)(y), lo, hi)?.value)
    }
}

impl fmt::Debug for DensityMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DensityMeasure")
            .field("singular", &self.singular)
            .field("support", &self.support)
            .finish_non_exhaustive()
    }
}

#[derive(Clone)]
pub struct StieltjesMeasure {
    cdf: RealFn,
    /// `(location, mass)` of the jumps of `F`, sorted.
    jumps: Vec<(f64, f64)>,
    support: SupportInterval,
}

impl StieltjesMeasure {
    pub fn new(cdf: RealFn, jumps: Vec<(f64, f64)>, support: SupportInterval) -> Self {
        let mut jumps = jumps;
        jumps.sort_by(|a, b| a.0.total_cmp(&b.0));
        StieltjesMeasure { cdf, jumps, support }
    }

    pub fn distribution(&self, y: f64) -> f64 {
        (self.cdf)(y)
    }

    pub fn jumps(&self) -> &[(f64, f64)] {
        &self.jumps
    }

    /// `F(d) = 1`, `F(c-) = 0` and monotonicity on an `n`-point grid.
    pub fn check_distribution(&self, n: usize, tol: f64) -> bool {
        let k = self.support;
        let lo_mass = self.jump_at(k.lo());
        let grid = k.grid(n);
        let values: Vec<f64> = grid.iter().map(|&y| (self.cdf)(y)).collect();
        (values[0] - lo_mass).abs() <= tol
            && (values[n - 1] - 1.0).abs() <= tol
            && values.windows(2).all(|w| w[0] <= w[1] + tol)
    }

    fn jump_at(&self, y: f64) -> f64 {
        self.jumps.iter().filter(|j| j.0 == y).map(|j| j.1).sum()
    }
}

impl fmt::Debug for StieltjesMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StieltjesMeasure")
            .field("jumps", &self.jumps)
            .field("support", &self.support)
            .finish_non_exhaustive()
    }
}

/// A probability measure on `K`, the value of a homogeneous Young measure.
#[derive(Debug, Clone)]
pub enum HomogeneousYoungMeasure {
    Atomic(AtomicMeasure),
    AbsCont(DensityMeasure),
    Stieltjes(StieltjesMeasure),
}

impl HomogeneousYoungMeasure {
    pub fn support(&self) -> SupportInterval {
        match self {
            HomogeneousYoungMeasure::Atomic(m) => m.support,
            HomogeneousYoungMeasure::AbsCont(m) => m.support,
            HomogeneousYoungMeasure::Stieltjes(m) => m.support,
        }
    }

    pub fn variant(&self) -> &'static str {
        match self {
            HomogeneousYoungMeasure::Atomic(_) => "atomic",
            HomogeneousYoungMeasure::AbsCont(_) => "abs-cont",
            HomogeneousYoungMeasure::Stieltjes(_) => "stieltjes",
        }
    }

    pub fn as_density(&self) -> Option<&DensityMeasure> {
        match self {
            HomogeneousYoungMeasure::AbsCont(d) => Some(d),
            _ => None,
        }
    }

    /// `∫_K β dν`.
    ///
    /// Atoms are summed exactly; densities go through adaptive quadrature; a
    /// distribution function is integrated by parts,
    /// `∫ β dF = β(d) F(d) - ∫_c^d F(y) β'(y) dy`, which holds for continuous
    /// `β` and any right-continuous `F` with `F(c-) = 0`.
    pub fn integrate(&self, beta: &TestFunction, tol: f64) -> Result<f64, MeasureError> {
        check_tol(tol)?;
        let k = self.support();
        match self {
            HomogeneousYoungMeasure::Atomic(m) => {
                m.atoms.iter().try_fold(0.0, |acc, &(y, w)| Ok(acc + w * beta.eval(y)?))
            }
            HomogeneousYoungMeasure::AbsCont(m) => {
                let q = Quadrature::new(tol).singular(&m.singular);
                let r = q.integrate(
                    |y| beta.expr.eval(y).unwrap_or(f64::NAN) * (m.density)(y),
                    k.lo(),
                    k.hi(),
                );
                match r {
                    Ok(r) => Ok(r.value),
                    Err(QuadError::NotFinite { at, .. }) => {
                        beta.eval(at)?;
                        Err(QuadError::NotFinite { at, value: f64::NAN }.into())
                    }
                    Err(e) => Err(e.into()),
                }
            }
            HomogeneousYoungMeasure::Stieltjes(m) => {
                let jumps: Vec<f64> = m.jumps.iter().map(|j| j.0).collect();
                let q = Quadrature::new(tol).breakpoints(&jumps);
                let r = q.integrate(|y| (m.cdf)(y) * beta.slope(y), k.lo(), k.hi())?;
                Ok(beta.eval(k.hi())? * (m.cdf)(k.hi()) - r.value)
            }
        }
    }

    /// `ν(A)` for a finite union of closed intervals `A ⊆ K`.
    pub fn measure_of_set(&self, set: &BorelTestSet, tol: f64) -> Result<f64, MeasureError> {
        check_tol(tol)?;
        let k = self.support();
        let slack = 1e-12 * k.length();
        if !set
            .intervals()
            .iter()
            .all(|&(l, r)| k.contains_approx(l, slack) && k.contains_approx(r, slack))
        {
            return Err(MeasureError::SetOutsideSupport {
                label: set.label().to_string(),
                lo: k.lo(),
                hi: k.hi(),
            });
        }
        let clamp = |y: f64| y.clamp(k.lo(), k.hi());
        let parts = set.intervals().len().max(1) as f64;
        set.intervals().iter().try_fold(0.0, |acc, &(l, r)| {
            let (l, r) = (clamp(l), clamp(r));
            let part = match self {
                HomogeneousYoungMeasure::Atomic(m) => {
                    m.atoms.iter().filter(|a| l <= a.0 && a.0 <= r).map(|a| a.1).sum()
                }
                HomogeneousYoungMeasure::AbsCont(m) => m.integral(l, r, tol / parts)?,
                HomogeneousYoungMeasure::Stieltjes(m) => (m.cdf)(r) - (m.cdf)(l) + m.jump_at(l),
            };
            Ok(acc + part)
        })
    }

    /// `F(y) = ν([c, y])`.
    pub fn cdf(&self, y: f64) -> Result<f64, MeasureError> {
        let k = self.support();
        if !k.contains_approx(y, 1e-12 * k.length()) {
            return Err(MeasureError::OutsideSupport {
                y,
                lo: k.lo(),
                hi: k.hi(),
            });
        }
        let y = y.clamp(k.lo(), k.hi());
        Ok(match self {
            HomogeneousYoungMeasure::Atomic(m) => m.atoms.iter().filter(|a| a.0 <= y).map(|a| a.1).sum(),
            HomogeneousYoungMeasure::AbsCont(m) => m.integral(k.lo(), y, DEFAULT_QUERY_TOL)?,
            HomogeneousYoungMeasure::Stieltjes(m) => (m.cdf)(y),
        })
    }

    /// `F` at every point of an ascending slice. Densities are integrated
    /// cell by cell, each cell to `tol / ys.len()`.
    pub fn cdf_sorted(&self, ys: &[f64], tol: f64) -> Result<Vec<f64>, MeasureError> {
        check_tol(tol)?;
        let HomogeneousYoungMeasure::AbsCont(m) = self else {
            return ys.iter().map(|&y| self.cdf(y)).collect();
        };
        let k = self.support();
        let cell_tol = tol / ys.len().max(1) as f64;
        let mut out = Vec::with_capacity(ys.len());
        let mut prev = k.lo();
        let mut acc = 0.0;
        for &y in ys {
            if !k.contains_approx(y, 1e-12 * k.length()) {
                return Err(MeasureError::OutsideSupport {
                    y,
                    lo: k.lo(),
                    hi: k.hi(),
                });
            }
            let y = y.clamp(k.lo(), k.hi());
            if y > prev {
                acc += m.integral(prev, y, cell_tol)?;
                prev = y;
            }
            out.push(acc);
        }
        Ok(out)
    }

    /// Mass carried by the single point `y` (the jump of `F` at `y`).
    pub fn point_mass(&self, y: f64) -> f64 {
        match self {
            HomogeneousYoungMeasure::Atomic(m) => m.atoms.iter().filter(|a| a.0 == y).map(|a| a.1).sum(),
            HomogeneousYoungMeasure::AbsCont(_) => 0.0,
            HomogeneousYoungMeasure::Stieltjes(m) => m.jump_at(y),
        }
    }

    /// `∫_K 1 dν`.
    pub fn total_mass(&self, tol: f64) -> Result<f64, MeasureError> {
        self.integrate(&TestFunction::one(), tol)
    }

    /// Total mass together with a verdict against `1 ± tol`.
    pub fn check_probability(&self, tol: f64) -> Result<MassCheck, MeasureError> {
        let mass = self.total_mass(tol * 1e-2)?;
        Ok(MassCheck {
            mass,
            tol,
            normalized: (mass - 1.0).abs() <= tol,
        })
    }

    /// Serializable snapshot on an `n`-point uniform grid of `K`.
    pub fn summarize(&self, n: usize, tol: f64) -> Result<MeasureSummary, MeasureError> {
        let k = self.support();
        let grid = k.grid(n);
        let cdf = self.cdf_sorted(&grid, tol)?;
        let (atoms, density, singular, jumps) = match self {
            HomogeneousYoungMeasure::Atomic(m) => (Some(pairs(&m.atoms)), None, Vec::new(), None),
            HomogeneousYoungMeasure::AbsCont(m) => {
                let samples = grid.iter().map(|&y| [y, (m.density)(y)]).collect();
                (None, Some(samples), m.singular.clone(), None)
            }
            HomogeneousYoungMeasure::Stieltjes(m) => (None, None, Vec::new(), Some(pairs(&m.jumps))),
        };
        Ok(MeasureSummary {
            variant: self.variant(),
            support: k.into(),
            total_mass: self.total_mass(tol)?,
            atoms,
            jumps,
            density,
            singular_endpoints: singular,
            cdf: grid.iter().zip(cdf).map(|(&y, f)| [y, f]).collect(),
        })
    }
}

fn pairs(v: &[(f64, f64)]) -> Vec<[f64; 2]> {
    v.iter().map(|&(a, b)| [a, b]).collect()
}

fn check_tol(tol: f64) -> Result<(), MeasureError> {
    if tol > 0.0 {
        Ok(())
    } else {
        Err(MeasureError::InvalidTolerance(tol))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MassCheck {
    pub mass: f64,
    pub tol: f64,
    pub normalized: bool,
}

/// Serialized form of a measure; non-finite density samples become `null`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureSummary {
    pub variant: &'static str,
    pub support: [f64; 2],
    pub total_mass: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub atoms: Option<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jumps: Option<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub density: Option<Vec<[f64; 2]>>,
    pub singular_endpoints: Vec<f64>,
    pub cdf: Vec<[f64; 2]>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> SupportInterval {
        SupportInterval::unit()
    }

    fn uniform() -> HomogeneousYoungMeasure {
        HomogeneousYoungMeasure::AbsCont(DensityMeasure::new(Arc::new(|_| 1.0), vec![], unit()))
    }

    fn inv_sqrt() -> HomogeneousYoungMeasure {
        HomogeneousYoungMeasure::AbsCont(DensityMeasure::new(
            Arc::new(|y: f64| 0.5 / y.sqrt()),
            vec![0.0],
            unit(),
        ))
    }

    fn two_atoms(a: f64, b: f64) -> HomogeneousYoungMeasure {
        HomogeneousYoungMeasure::Atomic(AtomicMeasure::new(vec![(a, 0.3), (b, 0.7)], unit()).unwrap())
    }

    fn beta(s: &str) -> TestFunction {
        TestFunction::parse(s).unwrap()
    }

    #[test]
    fn integrate_examples() {
        let delta = HomogeneousYoungMeasure::Atomic(AtomicMeasure::new(vec![(0.5, 1.0)], unit()).unwrap());
        assert_eq!(delta.integrate(&beta("y^2"), 1e-12).unwrap(), 0.25);
        assert!((uniform().integrate(&beta("y"), 1e-12).unwrap() - 0.5).abs() <= 1e-12);
        assert!((inv_sqrt().integrate(&beta("y"), 1e-12).unwrap() - 1.0 / 3.0).abs() <= 1e-10);
    }

    #[test]
    fn set_measures() {
        let set = |l: f64, r: f64| BorelTestSet::new("A", vec![(l, r)], &unit()).unwrap();
        assert!((two_atoms(0.2, 0.8).measure_of_set(&set(0.0, 0.5), 1e-12).unwrap() - 0.3).abs() < 1e-15);
        assert!((uniform().measure_of_set(&set(0.0, 0.5), 1e-12).unwrap() - 0.5).abs() < 1e-12);
        for nu in [uniform(), inv_sqrt(), two_atoms(0.0, 1.0)] {
            assert!((nu.measure_of_set(&set(0.0, 1.0), 1e-12).unwrap() - 1.0).abs() < 1e-10);
        }
        // closed-set convention: an atom on the boundary counts
        assert_eq!(two_atoms(0.2, 0.8).measure_of_set(&set(0.8, 1.0), 1e-12).unwrap(), 0.7);
        let outside = BorelTestSet::new_unchecked("B", vec![(0.5, 1.5)]);
        assert!(matches!(
            uniform().measure_of_set(&outside, 1e-9),
            Err(MeasureError::SetOutsideSupport { .. })
        ));
    }

    #[test]
    fn cdf_examples() {
        assert!((uniform().cdf(0.25).unwrap() - 0.25).abs() < 1e-13);
        assert!((inv_sqrt().cdf(0.25).unwrap() - 0.5).abs() < 1e-11);
        assert!((two_atoms(0.2, 0.8).cdf(0.5).unwrap() - 0.3).abs() < 1e-15);
        assert!(matches!(uniform().cdf(1.5), Err(MeasureError::OutsideSupport { .. })));
    }

    #[test]
    fn total_mass_examples() {
        assert_eq!(two_atoms(0.2, 0.8).total_mass(1e-12).unwrap(), 1.0);
        assert!((inv_sqrt().total_mass(1e-11).unwrap() - 1.0).abs() <= 1e-9);
        let doubled = HomogeneousYoungMeasure::AbsCont(DensityMeasure::new(Arc::new(|_| 2.0), vec![], unit()));
        let check = doubled.check_probability(1e-9).unwrap();
        assert!((check.mass - 2.0).abs() < 1e-12);
        assert!(!check.normalized);
    }

    #[test]
    fn stieltjes_by_parts_matches_atoms() {
        // F for 0.3 δ_0.2 + 0.7 δ_0.8 written as a distribution function
        let f = |y: f64| {
            if y >= 0.8 {
                1.0
            } else if y >= 0.2 {
                0.3
            } else {
                0.0
            }
        };
        let nu = HomogeneousYoungMeasure::Stieltjes(StieltjesMeasure::new(
            Arc::new(f),
            vec![(0.2, 0.3), (0.8, 0.7)],
            unit(),
        ));
        let atoms = two_atoms(0.2, 0.8);
        for b in ["1", "y", "exp(y)", "abs(y - 0.5)"] {
            let lhs = nu.integrate(&beta(b), 1e-13).unwrap();
            let rhs = atoms.integrate(&beta(b), 1e-13).unwrap();
            assert!((lhs - rhs).abs() < 1e-12, "{b}: {lhs} vs {rhs}");
        }
        let set = BorelTestSet::new("A", vec![(0.2, 0.5)], &unit()).unwrap();
        assert!((nu.measure_of_set(&set, 1e-12).unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(nu.point_mass(0.8), 0.7);
    }

    #[test]
    fn atoms_merge_and_validate() {
        let m = AtomicMeasure::new(vec![(0.5, 0.5), (0.5, 0.5)], unit()).unwrap();
        assert_eq!(m.atoms(), &[(0.5, 1.0)]);
        assert!(AtomicMeasure::new(vec![(1.5, 1.0)], unit()).is_err());
        assert!(AtomicMeasure::new(vec![(0.5, 0.0)], unit()).is_err());
    }

    #[test]
    fn undefined_test_function_is_reported() {
        let k = SupportInterval::new(-1.0, 1.0).unwrap();
        let nu = HomogeneousYoungMeasure::AbsCont(DensityMeasure::new(Arc::new(|_| 0.5), vec![], k));
        assert!(matches!(
            nu.integrate(&beta("log(y)"), 1e-9),
            Err(MeasureError::TestFunction { .. })
        ));
    }

    #[test]
    fn cdf_sorted_agrees_with_pointwise() {
        let nu = inv_sqrt();
        let ys: Vec<f64> = (0..=64).map(|i| i as f64 / 64.0).collect();
        let batch = nu.cdf_sorted(&ys, 1e-11).unwrap();
        for (y, f) in ys.iter().zip(batch) {
            assert!((f - y.sqrt()).abs() < 1e-10, "{y}");
        }
    }
}
