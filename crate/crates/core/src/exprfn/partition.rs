use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::expr::EvalError;
use super::piece::{Monotonicity, Piece};
use crate::interval::SupportInterval;

/// Slack used when comparing knots and image endpoints.
pub const VALIDATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FunctionKind {
    Constant,
    Invertible,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PartitionError {
    #[error("domain ({0}, {1}) must be finite with a < b")]
    InvalidDomain(f64, f64),
    #[error("a partitioned function needs at least one piece")]
    NoPieces,
    #[error("piece {index} of a piecewise-constant function is not a constant expression")]
    NonConstantPiece { index: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvaluateError {
    #[error("x = {0} lies outside the domain")]
    OutsideDomain(f64),
    #[error("x = {0} is a partition knot")]
    OnKnot(f64),
    #[error("x = {0} is not covered by any piece")]
    Uncovered(f64),
    #[error("evaluation failed at x = {x}: {source}")]
    Eval { x: f64, source: EvalError },
}

/// `u = Σ u_i χ_{Ω_i}` on a bounded interval `Ω = (a, b)`.
#[derive(Debug, Clone)]
pub struct PartitionedFunction {
    domain: (f64, f64),
    kind: FunctionKind,
    pieces: Vec<Piece>,
    /// Piece indices ordered by left endpoint.
    order: Vec<usize>,
}

impl PartitionedFunction {
    pub fn new(domain: (f64, f64), kind: FunctionKind, pieces: Vec<Piece>) -> Result<Self, PartitionError> {
        let (a, b) = domain;
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(PartitionError::InvalidDomain(a, b));
        }
        if pieces.is_empty() {
            return Err(PartitionError::NoPieces);
        }
        if kind == FunctionKind::Constant {
            if let Some(index) = pieces.iter().position(|p| !p.expr().is_constant()) {
                return Err(PartitionError::NonConstantPiece { index });
            }
        }
        let mut order: Vec<usize> = (0..pieces.len()).collect();
        order.sort_by(|&i, &j| pieces[i].lo().total_cmp(&pieces[j].lo()));
        Ok(PartitionedFunction {
            domain,
            kind,
            pieces,
            order,
        })
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    /// Lebesgue measure `M` of the domain.
    pub fn measure(&self) -> f64 {
        self.domain.1 - self.domain.0
    }

    pub fn kind(&self) -> FunctionKind {
        self.kind
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// Interior partition knots in increasing order.
    pub fn knots(&self) -> Vec<f64> {
        let (a, b) = self.domain;
        let mut k: Vec<f64> = self
            .pieces
            .iter()
            .flat_map(|p| [p.lo(), p.hi()])
            .filter(|&x| x > a && x < b)
            .collect();
        k.sort_by(f64::total_cmp);
        k.dedup();
        k
    }

    /// Index of the piece whose open cell contains `x`.
    pub fn locate(&self, x: f64) -> Result<usize, EvaluateError> {
        let (a, b) = self.domain;
        if !(x > a && x < b) {
            return Err(EvaluateError::OutsideDomain(x));
        }
        let k = self.order.partition_point(|&i| self.pieces[i].lo() < x);
        if k == 0 {
            return Err(if self.pieces[self.order[0]].lo() == x {
                EvaluateError::OnKnot(x)
            } else {
                EvaluateError::Uncovered(x)
            });
        }
        let cand = self.order[k - 1];
        let p = &self.pieces[cand];
        let next_starts_here = k < self.order.len() && self.pieces[self.order[k]].lo() == x;
        if x < p.hi() && !next_starts_here {
            Ok(cand)
        } else if x == p.hi() || next_starts_here {
            Err(EvaluateError::OnKnot(x))
        } else {
            Err(EvaluateError::Uncovered(x))
        }
    }

    /// `u(x)` for `x` interior to some piece.
    pub fn evaluate(&self, x: f64) -> Result<f64, EvaluateError> {
        let i = self.locate(x)?;
        self.pieces[i]
            .value(x)
            .map_err(|source| EvaluateError::Eval { x, source })
    }

    /// Closed hull of all piece images.
    pub fn image_hull(&self) -> (f64, f64) {
        self.pieces
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                let (l, h) = p.image();
                (lo.min(l), hi.max(h))
            })
    }

    /// Checks the partition, per-piece monotonicity and the onto condition
    /// against `onto`.
    ///
    /// Never fails: every violated condition becomes an entry in the report.
    pub fn validate(&self, onto: &SupportInterval) -> ValidationReport {
        let (a, b) = self.domain;
        let tol = VALIDATION_TOL * self.measure().max(1.0);
        let mut partition = Vec::new();
        for (i, p) in self.pieces.iter().enumerate() {
            if p.lo() < a - tol || p.hi() > b + tol {
                partition.push(PartitionIssue::OutsideDomain {
                    piece: i,
                    interval: [p.lo(), p.hi()],
                });
            }
        }
        let first = &self.pieces[self.order[0]];
        if first.lo() > a + tol {
            partition.push(PartitionIssue::Gap {
                from: a,
                to: first.lo(),
            });
        }
        let mut reach = (first.hi(), self.order[0]);
        for &j in &self.order[1..] {
            let p = &self.pieces[j];
            if p.lo() < reach.0 - tol {
                partition.push(PartitionIssue::Overlap {
                    first: reach.1,
                    second: j,
                    from: p.lo(),
                    to: reach.0.min(p.hi()),
                });
            } else if p.lo() > reach.0 + tol {
                partition.push(PartitionIssue::Gap {
                    from: reach.0,
                    to: p.lo(),
                });
            }
            if p.hi() > reach.0 {
                reach = (p.hi(), j);
            }
        }
        if reach.0 < b - tol {
            partition.push(PartitionIssue::Gap { from: reach.0, to: b });
        }

        let ktol = VALIDATION_TOL * onto.length().max(1.0);
        let pieces = self
            .pieces
            .iter()
            .enumerate()
            .map(|(index, p)| {
                let (lo, hi) = p.image();
                let monotone = match self.kind {
                    FunctionKind::Constant => *p.monotonicity() == Monotonicity::Constant,
                    FunctionKind::Invertible => p.monotonicity().is_strict(),
                };
                let within = lo.is_finite()
                    && hi.is_finite()
                    && onto.contains_approx(lo, ktol)
                    && onto.contains_approx(hi, ktol);
                let onto_ok = match self.kind {
                    FunctionKind::Constant => None,
                    FunctionKind::Invertible => Some((lo - onto.lo()).abs() <= ktol && (hi - onto.hi()).abs() <= ktol),
                };
                PieceCheck {
                    index,
                    interval: [p.lo(), p.hi()],
                    expr: p.expr().to_string(),
                    monotonicity: p.monotonicity().clone(),
                    monotone,
                    image: [lo, hi],
                    within_support: within,
                    onto: onto_ok,
                }
            })
            .collect();
        ValidationReport {
            kind: self.kind,
            support: (*onto).into(),
            partition,
            pieces,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "issue", rename_all = "kebab-case")]
pub enum PartitionIssue {
    Overlap {
        first: usize,
        second: usize,
        from: f64,
        to: f64,
    },
    Gap {
        from: f64,
        to: f64,
    },
    OutsideDomain {
        piece: usize,
        interval: [f64; 2],
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PieceCheck {
    pub index: usize,
    pub interval: [f64; 2],
    pub expr: String,
    pub monotonicity: Monotonicity,
    /// Strictly monotone for invertible kinds, constant for constant kinds.
    pub monotone: bool,
    pub image: [f64; 2],
    pub within_support: bool,
    /// `closure(u_i(Ω_i)) = K`; only asserted for invertible kinds.
    pub onto: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub kind: FunctionKind,
    pub support: [f64; 2],
    pub partition: Vec<PartitionIssue>,
    pub pieces: Vec<PieceCheck>,
}

impl ValidationReport {
    pub fn partition_ok(&self) -> bool {
        self.partition.is_empty()
    }

    /// Partition and monotonicity conditions, plus every image inside `K`.
    pub fn structure_ok(&self) -> bool {
        self.partition_ok() && self.pieces.iter().all(|p| p.monotone && p.within_support)
    }

    pub fn onto_ok(&self) -> bool {
        self.pieces.iter().all(|p| p.onto != Some(false))
    }

    pub fn is_valid(&self) -> bool {
        self.structure_ok() && self.onto_ok()
    }

    /// Human-readable list of failed conditions.
    pub fn failures(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .partition
            .iter()
            .map(|issue| match issue {
                PartitionIssue::Overlap {
                    first,
                    second,
                    from,
                    to,
                } => {
                    format!("pieces {first} and {second} overlap on ({from}, {to})")
                }
                PartitionIssue::Gap { from, to } => format!("domain not covered on ({from}, {to})"),
                PartitionIssue::OutsideDomain { piece, interval } => {
                    format!("piece {piece} cell {interval:?} leaves the domain")
                }
            })
            .collect();
        for p in &self.pieces {
            if !p.monotone {
                out.push(format!(
                    "piece {} `{}`: monotonicity check failed ({:?})",
                    p.index, p.expr, p.monotonicity
                ));
            }
            if !p.within_support {
                out.push(format!(
                    "piece {} image {:?} is not inside K = {:?}",
                    p.index, p.image, self.support
                ));
            }
            if p.onto == Some(false) {
                out.push(format!(
                    "piece {} image {:?} is not onto K = {:?}",
                    p.index, p.image, self.support
                ));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprfn::parse::parse_expression;

    fn pf(domain: (f64, f64), kind: FunctionKind, pieces: &[(f64, f64, &str)]) -> PartitionedFunction {
        let pieces = pieces
            .iter()
            .map(|&(a, b, s)| Piece::new(a, b, parse_expression(s).unwrap()).unwrap())
            .collect();
        PartitionedFunction::new(domain, kind, pieces).unwrap()
    }

    fn sawtooth() -> PartitionedFunction {
        pf(
            (0.0, 1.0),
            FunctionKind::Invertible,
            &[(0.0, 0.5, "2*x"), (0.5, 1.0, "2 - 2*x")],
        )
    }

    #[test]
    fn evaluates_inside_pieces() {
        let u = sawtooth();
        assert_eq!(u.evaluate(0.25).unwrap(), 0.5);
        assert_eq!(u.evaluate(0.75).unwrap(), 0.5);
        assert_eq!(u.evaluate(1.5), Err(EvaluateError::OutsideDomain(1.5)));
        assert_eq!(u.evaluate(0.5), Err(EvaluateError::OnKnot(0.5)));
        assert_eq!(u.evaluate(0.0), Err(EvaluateError::OutsideDomain(0.0)));
    }

    #[test]
    fn sawtooth_validates() {
        let r = sawtooth().validate(&SupportInterval::unit());
        assert!(r.is_valid(), "{:?}", r.failures());
    }

    #[test]
    fn non_monotone_square_fails() {
        let u = pf((-1.0, 1.0), FunctionKind::Invertible, &[(-1.0, 1.0, "x^2")]);
        let r = u.validate(&SupportInterval::unit());
        assert!(r.partition_ok());
        assert!(!r.pieces[0].monotone);
        assert!(!r.is_valid());
    }

    #[test]
    fn overlap_is_reported() {
        let u = pf(
            (0.0, 1.0),
            FunctionKind::Invertible,
            &[(0.0, 0.5, "2*x"), (0.4, 1.0, "2 - 2*x")],
        );
        let r = u.validate(&SupportInterval::unit());
        assert!(matches!(
            r.partition[0],
            PartitionIssue::Overlap {
                first: 0,
                second: 1,
                ..
            }
        ));
        assert!(!r.is_valid());
        // the second piece maps onto [0, 1.2], not K
        assert_eq!(r.pieces[1].onto, Some(false));
    }

    #[test]
    fn gaps_are_reported() {
        let u = pf(
            (0.0, 1.0),
            FunctionKind::Invertible,
            &[(0.1, 0.5, "x"), (0.6, 1.0, "x")],
        );
        let r = u.validate(&SupportInterval::unit());
        assert_eq!(r.partition.len(), 2);
        assert!(r.partition.iter().all(|i| matches!(i, PartitionIssue::Gap { .. })));
        assert_eq!(u.evaluate(0.55), Err(EvaluateError::Uncovered(0.55)));
    }

    #[test]
    fn constant_kind_requires_constant_pieces() {
        let pieces = vec![Piece::new(0.0, 1.0, parse_expression("x").unwrap()).unwrap()];
        assert_eq!(
            PartitionedFunction::new((0.0, 1.0), FunctionKind::Constant, pieces).unwrap_err(),
            PartitionError::NonConstantPiece { index: 0 }
        );
        let step = pf(
            (0.0, 1.0),
            FunctionKind::Constant,
            &[(0.0, 0.3, "0.2"), (0.3, 1.0, "0.8")],
        );
        let r = step.validate(&SupportInterval::unit());
        assert!(r.is_valid());
        assert!(r.pieces.iter().all(|p| p.onto.is_none()));
    }

    #[test]
    fn unordered_pieces_are_located() {
        let u = pf(
            (0.0, 1.0),
            FunctionKind::Invertible,
            &[(0.5, 1.0, "2 - 2*x"), (0.0, 0.5, "2*x")],
        );
        assert!(u.validate(&SupportInterval::unit()).is_valid());
        assert_eq!(u.locate(0.1).unwrap(), 1);
        assert_eq!(u.knots(), vec![0.5]);
    }
}
