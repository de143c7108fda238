//! Globally adaptive Gauss–Kronrod (7, 15) quadrature.
//!
//! The rule never evaluates the integrand at a segment endpoint, so it is an
//! open rule and can be applied up to an integrable singularity. Segments
//! touching a declared singular point are additionally pre-split on a
//! geometric grid that shrinks toward the singularity before the usual
//! largest-error-first bisection starts.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::Serialize;
use thiserror::Error;

/// Evaluation budget shared by all segments of one integral.
pub const DEFAULT_MAX_NODES: usize = 1_000_000;
/// Number of geometric cells laid toward each singular endpoint.
const GRADING_LEVELS: i32 = 48;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub error: f64,
    pub subdivisions: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadError {
    #[error("invalid integration interval [{0}, {1}]")]
    InvalidInterval(f64, f64),
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("integrand is not finite at {at} (value {value})")]
    NotFinite { at: f64, value: f64 },
    #[error(
        "no convergence within the node budget: value {value}, error estimate {error} after {subdivisions} segments"
    )]
    NoConvergence {
        value: f64,
        error: f64,
        subdivisions: usize,
    },
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error).then(other.lo.total_cmp(&self.lo))
    }
}

/// One 15-point Kronrod pass with the QUADPACK error heuristic.
///
/// Returns `(value, error, |f| integral)`.
fn gk15<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Result<(f64, f64, f64), QuadError> {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let eval = |x: f64| {
        let v = f(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(QuadError::NotFinite { at: x, value: v })
        }
    };
    let fc = eval(center)?;
    let mut res_g = fc * WG[3];
    let mut res_k = fc * WGK[7];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = eval(center - dx)?;
        let f2 = eval(center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = res_k * 0.5;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok((value, err, res_abs))
}

/// Configurable adaptive integrator.
#[derive(Debug, Clone)]
pub struct Quadrature {
    pub tol: f64,
    pub max_nodes: usize,
    /// Points where the integrand may blow up integrably.
    pub singular: Vec<f64>,
    /// Points where the integrand may jump or kink.
    pub breakpoints: Vec<f64>,
}

impl Quadrature {
    pub fn new(tol: f64) -> Self {
        Quadrature {
            tol,
            max_nodes: DEFAULT_MAX_NODES,
            singular: Vec::new(),
            breakpoints: Vec::new(),
        }
    }

    pub fn singular(mut self, points: &[f64]) -> Self {
        self.singular.extend_from_slice(points);
        self
    }

    pub fn breakpoints(mut self, points: &[f64]) -> Self {
        self.breakpoints.extend_from_slice(points);
        self
    }

    /// Initial cells: split at interior breakpoints and singular points, then
    /// grade every cell that touches a singular point.
    fn initial_cells(&self, lo: f64, hi: f64) -> Vec<(f64, f64)> {
        let mut cuts: Vec<f64> = self
            .singular
            .iter()
            .chain(&self.breakpoints)
            .copied()
            .filter(|&p| p > lo && p < hi)
            .collect();
        cuts.push(lo);
        cuts.push(hi);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let is_singular = |p: f64| self.singular.contains(&p);

        let mut cells = Vec::new();
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            match (is_singular(a), is_singular(b)) {
                (false, false) => cells.push((a, b)),
                (true, false) => grade(a, b, &mut cells),
                (false, true) => grade(b, a, &mut cells),
                (true, true) => {
                    let m = 0.5 * (a + b);
                    grade(a, m, &mut cells);
                    grade(b, m, &mut cells);
                }
            }
        }
        cells
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, lo: f64, hi: f64) -> Result<QuadratureResult, QuadError> {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(QuadError::InvalidInterval(lo, hi));
        }
        if !(self.tol > 0.0) {
            return Err(QuadError::InvalidTolerance(self.tol));
        }
        if lo == hi {
            return Ok(QuadratureResult {
                value: 0.0,
                error: 0.0,
                subdivisions: 0,
            });
        }

        let mut heap = BinaryHeap::new();
        let mut done: Vec<Segment> = Vec::new();
        let mut nodes = 0usize;
        let mut total_abs = 0.0;
        for (a, b) in self.initial_cells(lo, hi) {
            let (value, error, abs) = gk15(&f, a, b)?;
            nodes += 15;
            total_abs += abs;
            heap.push(Segment {
                lo: a,
                hi: b,
                value,
                error,
            });
        }

        let goal = |total_abs: f64| self.tol.max(100.0 * f64::EPSILON * total_abs);
        let mut error: f64 = heap.iter().map(|s| s.error).sum();
        let mut steps = 0usize;
        while error > goal(total_abs) {
            let Some(worst) = heap.pop() else {
                let value = done.iter().map(|s| s.value).sum();
                return Err(QuadError::NoConvergence {
                    value,
                    error,
                    subdivisions: done.len(),
                });
            };
            let mid = 0.5 * (worst.lo + worst.hi);
            if !resolvable(worst.lo, mid) || !resolvable(mid, worst.hi) {
                // halves would put nodes on their endpoints; its error stays in the total
                done.push(worst);
                continue;
            }
            if nodes + 30 > self.max_nodes {
                heap.push(worst);
                let value = heap.iter().chain(&done).map(|s| s.value).sum();
                let subdivisions = heap.len() + done.len();
                return Err(QuadError::NoConvergence {
                    value,
                    error,
                    subdivisions,
                });
            }
            let (v1, e1, _) = gk15(&f, worst.lo, mid)?;
            let (v2, e2, _) = gk15(&f, mid, worst.hi)?;
            nodes += 30;
            error += e1 + e2 - worst.error;
            heap.push(Segment {
                lo: worst.lo,
                hi: mid,
                value: v1,
                error: e1,
            });
            heap.push(Segment {
                lo: mid,
                hi: worst.hi,
                value: v2,
                error: e2,
            });
            steps += 1;
            if steps.is_multiple_of(256) {
                error = heap.iter().chain(&done).map(|s| s.error).sum();
            }
        }

        let mut segments: Vec<Segment> = heap.into_vec();
        segments.extend(done);
        segments.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        Ok(QuadratureResult {
            value: segments.iter().map(|s| s.value).sum(),
            error: segments.iter().map(|s| s.error).sum(),
            subdivisions: segments.len(),
        })
    }
}

/// Whether every Kronrod node of `[lo, hi]` is distinct from both endpoints.
fn resolvable(lo: f64, hi: f64) -> bool {
    hi - lo > 512.0 * f64::EPSILON * lo.abs().max(hi.abs())
}

/// Cells between `far` and the singular point `near`, shrinking by halves.
fn grade(near: f64, far: f64, cells: &mut Vec<(f64, f64)>) {
    let width = far - near;
    let mut outer = far;
    for k in 1..=GRADING_LEVELS {
        let inner = near + width * 0.5f64.powi(k);
        if !resolvable(near.min(inner), near.max(inner)) || !resolvable(inner.min(outer), inner.max(outer)) {
            break;
        }
        cells.push(if near < far { (inner, outer) } else { (outer, inner) });
        outer = inner;
    }
    cells.push(if near < far { (near, outer) } else { (outer, near) });
}

/// `∫_lo^hi f` to absolute tolerance `tol`, with integrable blow-ups allowed
/// at the listed points.
pub fn adaptive_quadrature<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    tol: f64,
    singular: &[f64],
) -> Result<QuadratureResult, QuadError> {
    Quadrature::new(tol).singular(singular).integrate(f, lo, hi)
}
