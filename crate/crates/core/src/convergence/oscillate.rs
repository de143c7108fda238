use crate::exprfn::{Expr, PartitionError, PartitionedFunction, Piece, PieceError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OscillateError {
    #[error("the number of blocks must be at least 1")]
    NoBlocks,
    #[error(transparent)]
    Piece(#[from] PieceError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
}

/// The `l`-fold periodic rescaling of `base`: `Ω = (a, b)` is cut into `l`
/// congruent blocks and a compressed copy of `base` is placed in each.
///
/// On block `k` with left end `B_k = a + k M / l` the pieces become
/// `u_i(l x + a - l B_k)`. Block boundaries and inner knots are computed the
/// same way on both sides, so adjacent cells share endpoints exactly.
pub fn oscillating_sequence(base: &PartitionedFunction, l: usize) -> Result<PartitionedFunction, OscillateError> {
    if l == 0 {
        return Err(OscillateError::NoBlocks);
    }
    if l == 1 {
        return Ok(base.clone());
    }
    let (a, b) = base.domain();
    let m = b - a;
    let lf = l as f64;
    let block = |k: usize| if k == l { b } else { a + m * k as f64 / lf };
    let mut pieces = Vec::with_capacity(l * base.pieces().len());
    for k in 0..l {
        let (start, end) = (block(k), block(k + 1));
        let place = |p: f64| {
            if p <= a {
                start
            } else if p >= b {
                end
            } else {
                start + (p - a) / lf
            }
        };
        let inner = Expr::add(
            Expr::mul(Expr::constant(lf), Expr::var()),
            Expr::constant(a - lf * start),
        );
        for p in base.pieces() {
            pieces.push(Piece::new(place(p.lo()), place(p.hi()), p.expr().substitute(&inner))?);
        }
    }
    Ok(PartitionedFunction::new(base.domain(), base.kind(), pieces)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::interval::SupportInterval;

    #[test]
    fn double_sawtooth() {
        let u = oscillating_sequence(&fixtures::sawtooth(), 2).unwrap();
        assert_eq!(u.pieces().len(), 4);
        assert!(u.validate(&SupportInterval::unit()).is_valid());
        for (x, y) in [(0.125, 0.5), (0.2, 0.8), (0.375, 0.5), (0.625, 0.5), (0.8, 0.8)] {
            assert!((u.evaluate(x).unwrap() - y).abs() < 1e-14, "{x}");
        }
    }

    #[test]
    fn fast_identity() {
        let u = oscillating_sequence(&fixtures::identity(), 3).unwrap();
        assert_eq!(u.pieces().len(), 3);
        let report = u.validate(&SupportInterval::unit());
        assert!(report.is_valid(), "{:?}", report.failures());
        assert!(report.pieces.iter().all(|p| p.onto == Some(true)));
        assert_eq!(u.pieces()[0].hi(), u.pieces()[1].lo());
    }

    #[test]
    fn one_block_is_the_base() {
        let base = fixtures::oscillation3();
        let u = oscillating_sequence(&base, 1).unwrap();
        assert_eq!(u.knots(), base.knots());
        assert_eq!(oscillating_sequence(&base, 0).unwrap_err(), OscillateError::NoBlocks);
    }

    #[test]
    fn shifted_domain() {
        let base = fixtures::from_pieces(
            (1.0, 3.0),
            crate::exprfn::FunctionKind::Invertible,
            &[(1.0, 3.0, "(x - 1)/2")],
        );
        let u = oscillating_sequence(&base, 4).unwrap();
        assert!(u.validate(&SupportInterval::unit()).is_valid());
        assert!((u.evaluate(1.25).unwrap() - 0.5).abs() < 1e-14);
        assert!((u.evaluate(2.75).unwrap() - 0.5).abs() < 1e-14);
    }
}
