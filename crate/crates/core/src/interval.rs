use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("invalid interval [{lo}, {hi}]: endpoints must be finite with lo < hi")]
pub struct IntervalError {
    pub lo: f64,
    pub hi: f64,
}

/// A compact interval `[lo, hi]` with `lo < hi`.
///
/// Used both for the target set `K` of a measure and for the closure of a
/// partition cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct SupportInterval {
    lo: f64,
    hi: f64,
}

impl SupportInterval {
    pub fn new(lo: f64, hi: f64) -> Result<Self, IntervalError> {
        if lo.is_finite() && hi.is_finite() && lo < hi {
            Ok(SupportInterval { lo, hi })
        } else {
            Err(IntervalError { lo, hi })
        }
    }

    pub fn unit() -> Self {
        SupportInterval { lo: 0.0, hi: 1.0 }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, y: f64) -> bool {
        self.lo <= y && y <= self.hi
    }

    /// Membership with a slack of `tol` on either side.
    pub fn contains_approx(&self, y: f64, tol: f64) -> bool {
        self.lo - tol <= y && y <= self.hi + tol
    }

    /// `n` equally spaced points from `lo` to `hi` inclusive (`n >= 2`).
    pub fn grid(&self, n: usize) -> Vec<f64> {
        assert!(n >= 2, "grid needs at least two points");
        let h = self.length() / (n - 1) as f64;
        (0..n)
            .map(|i| if i == n - 1 { self.hi } else { self.lo + h * i as f64 })
            .collect()
    }

    pub fn hull(&self, other: &SupportInterval) -> SupportInterval {
        SupportInterval {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }
}

impl TryFrom<[f64; 2]> for SupportInterval {
    type Error = IntervalError;

    fn try_from(v: [f64; 2]) -> Result<Self, Self::Error> {
        SupportInterval::new(v[0], v[1])
    }
}

impl From<SupportInterval> for [f64; 2] {
    fn from(k: SupportInterval) -> Self {
        [k.lo, k.hi]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degenerate() {
        assert!(SupportInterval::new(1.0, 1.0).is_err());
        assert!(SupportInterval::new(2.0, 1.0).is_err());
        assert!(SupportInterval::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn grid_hits_both_ends() {
        let k = SupportInterval::new(-1.0, 0.3).unwrap();
        let g = k.grid(1025);
        assert_eq!(g.len(), 1025);
        assert_eq!(g[0], -1.0);
        assert_eq!(g[1024], 0.3);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn serde_as_pair() {
        let k: SupportInterval = serde_json::from_str("[0, 2]").unwrap();
        assert_eq!(k.length(), 2.0);
        assert!(serde_json::from_str::<SupportInterval>("[2, 0]").is_err());
        assert_eq!(serde_json::to_string(&k).unwrap(), "[0.0,2.0]");
    }
}
