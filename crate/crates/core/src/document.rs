//! JSON input documents.
//!
//! A function document describes a partitioned function and its target
//! interval:
//!
//! ```json
//! { "domain": [0, 1], "kind": "invertible",
//!   "pieces": [ { "interval": [0, 0.5], "expr": "2*x" },
//!               { "interval": [0.5, 1], "expr": "2 - 2*x" } ],
//!   "K": [0, 1] }
//! ```
//!
//! It may also carry a claimed `density` (an expression in `y`, with
//! optional `singular` points) to be checked in place of the constructed
//! one. A density document has only `K`, `density` and `singular`, and
//! describes a measure directly.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exprfn::{
    parse_expression, parse_in, FunctionKind, ParseError, PartitionError, PartitionedFunction, Piece, PieceError,
};
use crate::interval::SupportInterval;
use crate::measures::{DensityMeasure, HomogeneousYoungMeasure};

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("document has neither `pieces` nor `density`")]
    UnknownShape,
    #[error("piece {index}: cannot parse `{source_text}`: {error}")]
    Expression {
        index: usize,
        source_text: String,
        error: ParseError,
    },
    #[error("cannot parse density `{source_text}`: {error}")]
    Density { source_text: String, error: ParseError },
    #[error("piece {index}: {error}")]
    Piece { index: usize, error: PieceError },
    #[error(transparent)]
    Partition(#[from] PartitionError),
}

impl DocumentError {
    /// Whether the document was readable but describes an invalid object.
    pub fn is_structural(&self) -> bool {
        matches!(self, DocumentError::Piece { .. } | DocumentError::Partition(_))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceDocument {
    pub interval: [f64; 2],
    pub expr: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionDocument {
    pub domain: [f64; 2],
    pub kind: FunctionKind,
    pub pieces: Vec<PieceDocument>,
    #[serde(rename = "K")]
    pub support: SupportInterval,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub singular: Vec<f64>,
}

impl FunctionDocument {
    pub fn build(&self) -> Result<PartitionedFunction, DocumentError> {
        let pieces = self
            .pieces
            .iter()
            .enumerate()
            .map(|(index, p)| {
                let expr = parse_expression(&p.expr).map_err(|error| DocumentError::Expression {
                    index,
                    source_text: p.expr.clone(),
                    error,
                })?;
                Piece::new(p.interval[0], p.interval[1], expr).map_err(|error| DocumentError::Piece { index, error })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PartitionedFunction::new(
            (self.domain[0], self.domain[1]),
            self.kind,
            pieces,
        )?)
    }

    /// Document for an existing function, pieces in domain order.
    pub fn from_function(u: &PartitionedFunction, support: SupportInterval) -> Self {
        let (a, b) = u.domain();
        let mut pieces: Vec<PieceDocument> = u
            .pieces()
            .iter()
            .map(|p| PieceDocument {
                interval: [p.lo(), p.hi()],
                expr: p.expr().to_string(),
            })
            .collect();
        pieces.sort_by(|p, q| p.interval[0].total_cmp(&q.interval[0]));
        FunctionDocument {
            domain: [a, b],
            kind: u.kind(),
            pieces,
            support,
            density: None,
            singular: Vec::new(),
        }
    }

    /// The claimed density, if the document carries one.
    pub fn claimed_density(&self) -> Result<Option<HomogeneousYoungMeasure>, DocumentError> {
        self.density
            .as_deref()
            .map(|d| density_measure(d, &self.singular, self.support))
            .transpose()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityDocument {
    #[serde(rename = "K")]
    pub support: SupportInterval,
    pub density: String,
    #[serde(default)]
    pub singular: Vec<f64>,
}

impl DensityDocument {
    pub fn build(&self) -> Result<HomogeneousYoungMeasure, DocumentError> {
        density_measure(&self.density, &self.singular, self.support)
    }
}

fn density_measure(
    source: &str,
    singular: &[f64],
    k: SupportInterval,
) -> Result<HomogeneousYoungMeasure, DocumentError> {
    let expr = parse_in(source, "y").map_err(|error| DocumentError::Density {
        source_text: source.to_string(),
        error,
    })?;
    Ok(HomogeneousYoungMeasure::AbsCont(DensityMeasure::from_expr(
        expr,
        singular.to_vec(),
        k,
    )))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Document {
    Function(FunctionDocument),
    Density(DensityDocument),
}

impl Document {
    pub fn from_json(text: &str) -> Result<Document, DocumentError> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        if value.get("pieces").is_some() {
            Ok(Document::Function(serde_json::from_value(value)?))
        } else if value.get("density").is_some() {
            Ok(Document::Density(serde_json::from_value(value)?))
        } else {
            Err(DocumentError::UnknownShape)
        }
    }

    pub fn support(&self) -> SupportInterval {
        match self {
            Document::Function(f) => f.support,
            Document::Density(d) => d.support,
        }
    }
}
