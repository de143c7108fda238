use serde::Serialize;
use thiserror::Error;

use super::expr::{EvalError, Expr};

/// Interior points used to certify monotonicity of a piece.
pub const VALIDATION_GRID: usize = 257;
/// Default residual tolerance for [`Piece::invert`].
pub const DEFAULT_INVERT_TOL: f64 = 1e-12;
const MAX_INVERT_ITERATIONS: usize = 200;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PieceError {
    #[error("piece interval ({0}, {1}) must be finite with a < b")]
    InvalidInterval(f64, f64),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InvertError {
    #[error("piece is not strictly monotone and has no inverse")]
    NotInvertible,
    #[error("value {y} lies outside the piece image [{lo}, {hi}]")]
    OutsideImage { y: f64, lo: f64, hi: f64 },
    #[error("evaluation failed at x = {x}: {source}")]
    Eval { x: f64, source: EvalError },
    #[error("inversion of {y} did not converge in {MAX_INVERT_ITERATIONS} iterations (best x = {best})")]
    NoConvergence { y: f64, best: f64 },
    #[error("derivative vanishes at the preimage x = {x} of y = {y}")]
    Singular { y: f64, x: f64 },
}

/// Outcome of the grid monotonicity certificate.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Monotonicity {
    Increasing,
    Decreasing,
    Constant,
    /// The derivative is zero or changes sign at `at`.
    NotStrict {
        at: f64,
    },
    /// The expression or its derivative cannot be evaluated at `at`.
    Undefined {
        at: f64,
        error: String,
    },
}

impl Monotonicity {
    pub fn is_strict(&self) -> bool {
        matches!(self, Monotonicity::Increasing | Monotonicity::Decreasing)
    }
}

/// One cell `(a, b)` of the partition together with the branch `u_i` on it.
#[derive(Debug, Clone)]
pub struct Piece {
    lo: f64,
    hi: f64,
    expr: Expr,
    derivative: Expr,
    monotonicity: Monotonicity,
    /// One-sided values of the branch at `lo` and `hi`.
    end_values: (f64, f64),
    image: (f64, f64),
}

impl Piece {
    pub fn new(lo: f64, hi: f64, expr: Expr) -> Result<Piece, PieceError> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(PieceError::InvalidInterval(lo, hi));
        }
        let derivative = expr.derivative();
        let end_values = (boundary_value(&expr, lo, hi), boundary_value(&expr, hi, lo));
        let mut piece = Piece {
            lo,
            hi,
            expr,
            derivative,
            monotonicity: Monotonicity::Constant,
            end_values,
            image: (f64::NAN, f64::NAN),
        };
        piece.monotonicity = piece.certify_monotonicity();
        piece.image = piece.compute_image();
        Ok(piece)
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

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn derivative(&self) -> &Expr {
        &self.derivative
    }

    pub fn monotonicity(&self) -> &Monotonicity {
        &self.monotonicity
    }

    /// `+1` for increasing pieces, `-1` for decreasing ones.
    pub fn direction(&self) -> Option<f64> {
        match self.monotonicity {
            Monotonicity::Increasing => Some(1.0),
            Monotonicity::Decreasing => Some(-1.0),
            _ => None,
        }
    }

    /// Closure of `u_i((a, b))` as `(min, max)`.
    pub fn image(&self) -> (f64, f64) {
        self.image
    }

    pub fn end_values(&self) -> (f64, f64) {
        self.end_values
    }

    /// The constant value of a constant piece.
    pub fn constant_value(&self) -> Option<f64> {
        match self.monotonicity {
            Monotonicity::Constant => Some(self.end_values.0),
            _ => None,
        }
    }

    pub fn value(&self, x: f64) -> Result<f64, EvalError> {
        self.expr.eval(x)
    }

    fn grid(&self) -> impl Iterator<Item = f64> + '_ {
        let h = (self.hi - self.lo) / (VALIDATION_GRID + 1) as f64;
        (1..=VALIDATION_GRID).map(move |k| self.lo + h * k as f64)
    }

    fn certify_monotonicity(&self) -> Monotonicity {
        if self.expr.is_constant() {
            return Monotonicity::Constant;
        }
        let mut sign = 0.0f64;
        let mut prev = self.end_values.0;
        for x in self.grid() {
            let d = match self.derivative.eval(x) {
                Ok(d) => d,
                Err(e) => {
                    return Monotonicity::Undefined {
                        at: x,
                        error: e.to_string(),
                    }
                }
            };
            let v = match self.expr.eval(x) {
                Ok(v) => v,
                Err(e) => {
                    return Monotonicity::Undefined {
                        at: x,
                        error: e.to_string(),
                    }
                }
            };
            if d == 0.0 || (sign != 0.0 && d.signum() != sign) {
                return Monotonicity::NotStrict { at: x };
            }
            sign = d.signum();
            // values may tie in floating point for very flat branches, never reverse
            if prev.is_finite() && (v - prev) * sign < 0.0 {
                return Monotonicity::NotStrict { at: x };
            }
            prev = v;
        }
        let last = self.end_values.1;
        if last.is_finite() && (last - prev) * sign < 0.0 {
            return Monotonicity::NotStrict { at: self.hi };
        }
        if sign > 0.0 {
            Monotonicity::Increasing
        } else {
            Monotonicity::Decreasing
        }
    }

    fn compute_image(&self) -> (f64, f64) {
        let (l, r) = self.end_values;
        match self.monotonicity {
            Monotonicity::Increasing => (l, r),
            Monotonicity::Decreasing => (r, l),
            Monotonicity::Constant => (l, l),
            _ => {
                let vals = self
                    .grid()
                    .filter_map(|x| self.expr.eval(x).ok())
                    .chain([l, r])
                    .filter(|v| v.is_finite());
                vals.fold((f64::NAN, f64::NAN), |(lo, hi), v| (lo.min(v), hi.max(v)))
            }
        }
    }

    /// Solves `u_i(x) = y` on the closed cell by Newton's method safeguarded
    /// with bisection.
    ///
    /// The returned `x` satisfies `|u_i(x) - y| <= tol * max(1, |y|)` unless
    /// the root is already isolated between two adjacent floats, in which
    /// case the better of the two is returned.
    pub fn invert(&self, y: f64, tol: f64) -> Result<f64, InvertError> {
        self.solve(y, tol, false)
    }

    /// Like [`Piece::invert`] with the default tolerance, but keeps iterating
    /// until the preimage itself is resolved to a few ulps.
    ///
    /// The residual test alone is too weak next to a flat endpoint: for
    /// `x^2` and `y = 1e-20` every `x` below `1e-6` passes it.
    pub fn invert_precise(&self, y: f64) -> Result<f64, InvertError> {
        self.solve(y, DEFAULT_INVERT_TOL, true)
    }

    fn solve(&self, y: f64, tol: f64, precise: bool) -> Result<f64, InvertError> {
        let s = self.direction().ok_or(InvertError::NotInvertible)?;
        let (img_lo, img_hi) = self.image;
        let scale = tol * y.abs().max(1.0);
        if !(img_lo - scale <= y && y <= img_hi + scale) {
            return Err(InvertError::OutsideImage {
                y,
                lo: img_lo,
                hi: img_hi,
            });
        }
        let f_lo = self.end_values.0 - y;
        let f_hi = self.end_values.1 - y;
        let at_end = |f: f64| if precise { f == 0.0 } else { f.abs() <= scale };
        if at_end(f_lo) || (precise && s * f_lo > 0.0) {
            return Ok(self.lo);
        }
        if at_end(f_hi) || (precise && s * f_hi < 0.0) {
            return Ok(self.hi);
        }

        let (mut lo, mut hi) = (self.lo, self.hi);
        let mid = lo + 0.5 * (hi - lo);
        let secant = self.lo + (self.hi - self.lo) * (f_lo / (f_lo - f_hi));
        let mut x = if secant > lo && secant < hi { secant } else { mid };
        let mut best = (x, f64::INFINITY);
        let mut last_step = hi - lo;

        for _ in 0..MAX_INVERT_ITERATIONS {
            let fx = self.expr.eval(x).map_err(|source| InvertError::Eval { x, source })? - y;
            if fx.abs() < best.1 {
                best = (x, fx.abs());
            }
            let slope = self.derivative.eval(x).ok().filter(|d| *d != 0.0);
            let converged = if precise {
                fx.abs() <= 4.0 * f64::EPSILON * y.abs()
                    || (fx.abs() <= scale && slope.is_some_and(|d| (fx / d).abs() <= 4.0 * f64::EPSILON * x.abs()))
            } else {
                fx.abs() <= scale
            };
            if converged {
                return Ok(x);
            }
            if s * fx < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let mid = lo + 0.5 * (hi - lo);
            let next = match slope.map(|d| x - fx / d) {
                Some(n) if n > lo && n < hi && 2.0 * (n - x).abs() <= last_step.abs() => n,
                _ => mid,
            };
            if next <= lo || next >= hi || hi - lo <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
                return Ok(if precise { x } else { best.0 });
            }
            last_step = next - x;
            x = next;
        }
        Err(InvertError::NoConvergence { y, best: best.0 })
    }

    /// `|(u_i^{-1})'(y)| = 1 / |u_i'(u_i^{-1}(y))|`.
    pub fn inverse_derivative(&self, y: f64) -> Result<f64, InvertError> {
        let x = self.invert_precise(y)?;
        let d = self
            .derivative
            .eval(x)
            .map_err(|source| InvertError::Eval { x, source })?;
        if d == 0.0 {
            return Err(InvertError::Singular { y, x });
        }
        Ok(1.0 / d.abs())
    }

    /// Image endpoints where `u_i'` vanishes at the matching cell endpoint, so
    /// the inverse derivative blows up there.
    pub fn singular_image_points(&self) -> Vec<f64> {
        if !self.monotonicity.is_strict() {
            return Vec::new();
        }
        let width = self.hi - self.lo;
        let slope = {
            let s = (self.image.1 - self.image.0).abs() / width;
            if s > 0.0 && s.is_finite() {
                s
            } else {
                1.0
            }
        };
        let mut out = Vec::new();
        for (end, inward, value) in [(self.lo, 1.0, self.end_values.0), (self.hi, -1.0, self.end_values.1)] {
            let vanishes = match self.derivative.eval(end) {
                Ok(d) => d.abs() <= 1e-12 * slope,
                Err(_) => match self.derivative.eval(end + inward * 1e-9 * width) {
                    Ok(d) => d.abs() <= 1e-6 * slope,
                    Err(_) => false,
                },
            };
            if vanishes && value.is_finite() {
                out.push(value);
            }
        }
        out
    }
}

/// Value at a cell endpoint, falling back to a point just inside the cell
/// when the expression is undefined at the endpoint itself.
fn boundary_value(expr: &Expr, end: f64, other: f64) -> f64 {
    match expr.eval(end) {
        Ok(v) => v,
        Err(_) => expr.eval(end + (other - end) * 1e-12).unwrap_or(f64::NAN),
    }
}
