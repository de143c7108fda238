use std::fmt::Write;

use serde::Serialize;
use thiserror::Error;

use crate::interval::SupportInterval;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TestSetError {
    #[error("interval [{0}, {1}] is empty or not finite")]
    BadInterval(f64, f64),
    #[error("components must be sorted and pairwise disjoint")]
    NotDisjoint,
    #[error("interval [{l}, {r}] leaves K = [{lo}, {hi}]")]
    OutsideSupport { l: f64, r: f64, lo: f64, hi: f64 },
    #[error("a test set needs at least one component")]
    NoComponents,
}

/// A finite union of disjoint closed intervals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BorelTestSet {
    label: String,
    intervals: Vec<(f64, f64)>,
}

impl BorelTestSet {
    pub fn new(label: &str, intervals: Vec<(f64, f64)>, k: &SupportInterval) -> Result<Self, TestSetError> {
        if intervals.is_empty() {
            return Err(TestSetError::NoComponents);
        }
        for &(l, r) in &intervals {
            if !(l.is_finite() && r.is_finite() && l <= r) {
                return Err(TestSetError::BadInterval(l, r));
            }
            if l < k.lo() || r > k.hi() {
                return Err(TestSetError::OutsideSupport {
                    l,
                    r,
                    lo: k.lo(),
                    hi: k.hi(),
                });
            }
        }
        if intervals.windows(2).any(|w| w[0].1 >= w[1].0) {
            return Err(TestSetError::NotDisjoint);
        }
        Ok(BorelTestSet {
            label: label.to_string(),
            intervals,
        })
    }

    /// Skips every check; for sets that are meant to be invalid.
    pub fn new_unchecked(label: &str, intervals: Vec<(f64, f64)>) -> Self {
        BorelTestSet {
            label: label.to_string(),
            intervals,
        }
    }

    /// Builds a set labelled by its components, e.g. `[0, 0.5] ∪ [0.75, 1]`.
    pub fn labelled(intervals: Vec<(f64, f64)>, k: &SupportInterval) -> Result<Self, TestSetError> {
        let mut label = String::new();
        for (i, (l, r)) in intervals.iter().enumerate() {
            if i > 0 {
                label.push_str(" ∪ ");
            }
            let _ = write!(label, "[{l}, {r}]");
        }
        BorelTestSet::new(&label, intervals, k)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    /// Lebesgue measure of the set.
    pub fn length(&self) -> f64 {
        self.intervals.iter().map(|(l, r)| r - l).sum()
    }

    /// `A ∩ K`, keeping the label; components missing `K` are dropped.
    pub fn clip(&self, k: &SupportInterval) -> BorelTestSet {
        let intervals = self
            .intervals
            .iter()
            .filter(|(l, r)| *r >= k.lo() && *l <= k.hi())
            .map(|&(l, r)| (l.max(k.lo()), r.min(k.hi())))
            .collect();
        BorelTestSet {
            label: self.label.clone(),
            intervals,
        }
    }
}

/// Unions laid out as fractions of `K`.
const UNIONS: [[(f64, f64); 2]; 8] = [
    [(0.0, 0.125), (0.5, 0.625)],
    [(0.0, 0.25), (0.75, 1.0)],
    [(0.125, 0.25), (0.375, 0.5)],
    [(0.0, 0.0625), (0.9375, 1.0)],
    [(0.25, 0.375), (0.625, 0.75)],
    [(0.0, 1.0 / 3.0), (2.0 / 3.0, 1.0)],
    [(0.0625, 0.125), (0.875, 0.9375)],
    [(1.0 / 3.0, 0.5), (5.0 / 6.0, 1.0)],
];

/// Probe sets: every dyadic subinterval of `K` down to a given depth, then
/// eight fixed two-component unions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestSetFamily {
    pub support: SupportInterval,
    pub depth: u32,
    pub sets: Vec<BorelTestSet>,
}

impl TestSetFamily {
    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.sets.iter().map(BorelTestSet::label).collect()
    }
}

/// `2^(depth+1) - 1` dyadic intervals (depth 0 is `K` itself) followed by
/// the eight unions.
pub fn generate_test_sets(k: &SupportInterval, depth: u32) -> TestSetFamily {
    let (c, w) = (k.lo(), k.length());
    let at = |t: f64| if t == 1.0 { k.hi() } else { c + w * t };
    let mut sets = Vec::new();
    for level in 0..=depth {
        let n = 1u64 << level;
        for j in 0..n {
            let (l, r) = (at(j as f64 / n as f64), at((j + 1) as f64 / n as f64));
            sets.push(BorelTestSet::labelled(vec![(l, r)], k).expect("dyadic interval lies in K"));
        }
    }
    for union in UNIONS {
        let parts = union.iter().map(|&(l, r)| (at(l), at(r))).collect();
        sets.push(BorelTestSet::labelled(parts, k).expect("fixed union lies in K"));
    }
    TestSetFamily {
        support: *k,
        depth,
        sets,
    }
}
