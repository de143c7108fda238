//! Piecewise scalar functions given as expression strings over an interval
//! partition: parsing, symbolic differentiation, evaluation, validation and
//! inversion of monotone branches.

mod expr;
mod parse;
mod partition;
mod piece;

pub use expr::{EvalError, Expr, Func};
pub use parse::{parse_expression, parse_in, ParseError, ParseErrorKind};
pub use partition::{
    EvaluateError, FunctionKind, PartitionError, PartitionIssue, PartitionedFunction, PieceCheck, ValidationReport,
    VALIDATION_TOL,
};
pub use piece::{InvertError, Monotonicity, Piece, PieceError, DEFAULT_INVERT_TOL, VALIDATION_GRID};
