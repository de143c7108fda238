//! Reference functions and sequence families used by tests, examples and the
//! `generate` command.

use crate::exprfn::{parse_expression, FunctionKind, PartitionedFunction, Piece};
use crate::interval::SupportInterval;

/// Builds a function from `(lo, hi, expr)` triples, panicking on bad input.
pub fn from_pieces(domain: (f64, f64), kind: FunctionKind, pieces: &[(f64, f64, &str)]) -> PartitionedFunction {
    let pieces = pieces
        .iter()
        .map(|&(a, b, s)| Piece::new(a, b, parse_expression(s).expect("fixture expression")).expect("fixture cell"))
        .collect();
    PartitionedFunction::new(domain, kind, pieces).expect("fixture function")
}

/// `u(x) = x` on `(0, 1)`.
pub fn identity() -> PartitionedFunction {
    from_pieces((0.0, 1.0), FunctionKind::Invertible, &[(0.0, 1.0, "x")])
}

/// `u(x) = x^2` on `(0, 1)`; density `1 / (2 sqrt(y))`.
pub fn square() -> PartitionedFunction {
    from_pieces((0.0, 1.0), FunctionKind::Invertible, &[(0.0, 1.0, "x^2")])
}

/// `2x` then `2 - 2x`; uniform density on `[0, 1]`.
pub fn sawtooth() -> PartitionedFunction {
    from_pieces(
        (0.0, 1.0),
        FunctionKind::Invertible,
        &[(0.0, 0.5, "2*x"), (0.5, 1.0, "2 - 2*x")],
    )
}

/// Three branches onto `[0, 1]` with different shapes, so the density is
/// non-uniform with an integrable blow-up at 0:
/// `g(y) = 1/(6 sqrt(y)) + 1/3 + (e - 1) / (3 (1 + (e - 1) y))`.
pub fn oscillation3() -> PartitionedFunction {
    let (t1, t2) = (1.0 / 3.0, 2.0 / 3.0);
    from_pieces(
        (0.0, 1.0),
        FunctionKind::Invertible,
        &[
            (0.0, t1, "9*x^2"),
            (t1, t2, "2 - 3*x"),
            (t2, 1.0, "(exp(3*x - 2) - 1)/(e - 1)"),
        ],
    )
}

/// `a` on `(0, 0.3)` and `b` on `(0.3, 1)`.
pub fn two_step(a: f64, b: f64) -> PartitionedFunction {
    let (a, b) = (a.to_string(), b.to_string());
    from_pieces((0.0, 1.0), FunctionKind::Constant, &[(0.0, 0.3, &a), (0.3, 1.0, &b)])
}

/// The standard fixture set with its target interval.
pub fn standard() -> Vec<(&'static str, PartitionedFunction, SupportInterval)> {
    let k = SupportInterval::unit();
    vec![
        ("identity", identity(), k),
        ("square", square(), k),
        ("sawtooth", sawtooth(), k),
        ("oscillation3", oscillation3(), k),
        ("two-step", two_step(0.2, 0.9), k),
    ]
}

/// Sequence indices `ratio^k` for `k = 1..=len`.
pub fn geometric_indices(ratio: f64, len: usize) -> Vec<f64> {
    (1..=len as i32).map(|k| ratio.powi(k)).collect()
}

/// `u_l(x) = x + x^2 / l` on `(0, 1)` with `K_l = [0, 1 + 1/l]`.
pub fn poly_member(l: f64) -> (PartitionedFunction, SupportInterval) {
    let expr = format!("x + x^2/{l}");
    let u = from_pieces((0.0, 1.0), FunctionKind::Invertible, &[(0.0, 1.0, &expr)]);
    (u, SupportInterval::new(0.0, 1.0 + 1.0 / l).expect("non-degenerate"))
}

/// Density expression `l y^(l-1)` on `[0, 1]`, concentrating at `1`.
pub fn concentration_density(l: f64) -> String {
    format!("{l}*y^{}", l - 1.0)
}

/// Single increasing pieces whose inverse derivatives are `2 - 2y` and `2y`,
/// in that order.
pub fn crossing_pair() -> [PartitionedFunction; 2] {
    [
        from_pieces((0.0, 1.0), FunctionKind::Invertible, &[(0.0, 1.0, "1 - sqrt(1 - x)")]),
        from_pieces((0.0, 1.0), FunctionKind::Invertible, &[(0.0, 1.0, "sqrt(x)")]),
    ]
}

/// Four spellings of `x^2`: a sequence with pointwise equal densities.
pub fn square_spellings() -> Vec<PartitionedFunction> {
    ["x^2", "x*x", "sqrt(x^4)", "(2*x)^2/4"]
        .into_iter()
        .map(|s| from_pieces((0.0, 1.0), FunctionKind::Invertible, &[(0.0, 1.0, s)]))
        .collect()
}
