use thiserror::Error;

use super::montecarlo::EmpiricalSample;
use crate::measures::{HomogeneousYoungMeasure, MeasureError};

/// Acceptance bound for `ks_distance` at the default sample size.
pub const KS_THRESHOLD: f64 = 0.005;

/// Accuracy requested from quadrature-backed distribution functions.
const CDF_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KsError {
    #[error("empty sample")]
    EmptySample,
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

/// Two-sided Kolmogorov–Smirnov statistic `sup |F_n - F|`.
///
/// Both functions are compared at every distinct sample value `v` and at its
/// left limit, so ties and atoms of `ν` are handled exactly: `F_n(v-)` is the
/// fraction strictly below `v` and `F(v-) = F(v) - ν({v})`. Sample points a
/// hair outside `K` are clamped onto it.
pub fn ks_distance(sample: &EmpiricalSample, nu: &HomogeneousYoungMeasure) -> Result<f64, KsError> {
    if sample.is_empty() {
        return Err(KsError::EmptySample);
    }
    let k = nu.support();
    let values = sample.values();
    let n = values.len() as f64;

    let mut distinct: Vec<(f64, usize, usize)> = Vec::new();
    let mut start = 0;
    while start < values.len() {
        let v = values[start];
        let mut end = start + 1;
        while end < values.len() && values[end] == v {
            end += 1;
        }
        distinct.push((v.clamp(k.lo(), k.hi()), start, end));
        start = end;
    }
    let points: Vec<f64> = distinct.iter().map(|d| d.0).collect();
    let cdf = nu.cdf_sorted(&points, CDF_TOL)?;

    let mut d: f64 = 0.0;
    for (&(v, below, upto), f) in distinct.iter().zip(cdf) {
        let f_left = f - nu.point_mass(v);
        d = d
            .max((upto as f64 / n - f).abs())
            .max((below as f64 / n - f_left).abs());
    }
    Ok(d.min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::SupportInterval;
    use crate::measures::{AtomicMeasure, DensityMeasure};
    use std::sync::Arc;

    fn delta(c: f64) -> HomogeneousYoungMeasure {
        HomogeneousYoungMeasure::Atomic(AtomicMeasure::new(vec![(c, 1.0)], SupportInterval::unit()).unwrap())
    }

    fn uniform() -> HomogeneousYoungMeasure {
        HomogeneousYoungMeasure::AbsCont(DensityMeasure::new(Arc::new(|_| 1.0), vec![], SupportInterval::unit()))
    }

    #[test]
    fn matching_atom_has_zero_distance() {
        let s = EmpiricalSample::from_values(vec![0.4; 100], 0);
        assert_eq!(ks_distance(&s, &delta(0.4)).unwrap(), 0.0);
    }

    #[test]
    fn spread_sample_against_atom() {
        let s = EmpiricalSample::from_values((0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect(), 0);
        let d = ks_distance(&s, &delta(0.5)).unwrap();
        assert!((d - 0.5).abs() < 2e-3, "{d}");
        let s = EmpiricalSample::from_values((0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect(), 0);
        assert!(ks_distance(&s, &delta(0.0)).unwrap() > 0.99);
    }

    #[test]
    fn stratified_uniform_sample() {
        let n = 1000;
        let s = EmpiricalSample::from_values((0..n).map(|i| (i as f64 + 0.5) / n as f64).collect(), 0);
        let d = ks_distance(&s, &uniform()).unwrap();
        assert!((d - 0.5 / n as f64).abs() < 1e-9, "{d}");
    }

    #[test]
    fn empty_sample_is_an_error() {
        let s = EmpiricalSample::from_values(vec![], 0);
        assert_eq!(ks_distance(&s, &uniform()), Err(KsError::EmptySample));
    }
}
