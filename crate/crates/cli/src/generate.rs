use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Serialize;
use ym_core::document::{DensityDocument, FunctionDocument, PieceDocument};
use ym_core::exprfn::{FunctionKind, PartitionedFunction};
use ym_core::fixtures;
use ym_core::SupportInterval;

use crate::failure::Failure;
use crate::io::write_atomic;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    /// `x + x^2/l` for `l = 16, 256, ...`.
    Poly,
    /// Densities `l y^(l-1)` for `l = 4, 16, ...`.
    Concentration,
    /// Increasing pieces with inverse derivatives `2 - 2y`, then `2y`.
    Crossing,
    /// Four spellings of `x^2`.
    Constant,
    /// Reference functions, plus a tampered and an invalid document.
    Fixtures,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    pub family: Family,
    /// Number of members for indexed families.
    #[arg(long, default_value_t = 8)]
    pub levels: usize,
    /// Output directory.
    #[arg(short, long)]
    pub out: PathBuf,
}

fn write_doc<T: Serialize>(dir: &Path, name: &str, doc: &T) -> Result<(), Failure> {
    let path = dir.join(name);
    let mut text = serde_json::to_string_pretty(doc).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    text.push('\n');
    write_atomic(&path, text.as_bytes())
}

fn numbered(i: usize) -> String {
    format!("{:02}.json", i + 1)
}

fn function_doc(u: &PartitionedFunction, k: SupportInterval) -> FunctionDocument {
    FunctionDocument::from_function(u, k)
}

pub fn run(args: &GenerateArgs) -> Result<(), Failure> {
    if args.levels < 2 || args.levels > 16 {
        return Err(Failure::Input("--levels must be between 2 and 16".into()));
    }
    let dir = &args.out;
    let unit = SupportInterval::unit();
    let mut count = 0;
    match args.family {
        Family::Poly => {
            for (i, l) in fixtures::geometric_indices(16.0, args.levels).into_iter().enumerate() {
                let (u, k) = fixtures::poly_member(l);
                write_doc(dir, &numbered(i), &function_doc(&u, k))?;
                count += 1;
            }
        }
        Family::Concentration => {
            for (i, l) in fixtures::geometric_indices(4.0, args.levels).into_iter().enumerate() {
                let doc = DensityDocument {
                    support: unit,
                    density: fixtures::concentration_density(l),
                    singular: vec![1.0],
                };
                write_doc(dir, &numbered(i), &doc)?;
                count += 1;
            }
        }
        Family::Crossing => {
            for (i, u) in fixtures::crossing_pair().iter().enumerate() {
                write_doc(dir, &numbered(i), &function_doc(u, unit))?;
                count += 1;
            }
        }
        Family::Constant => {
            for (i, u) in fixtures::square_spellings().iter().enumerate() {
                write_doc(dir, &numbered(i), &function_doc(u, unit))?;
                count += 1;
            }
        }
        Family::Fixtures => {
            for (name, u, k) in fixtures::standard() {
                write_doc(dir, &format!("{name}.json"), &function_doc(&u, k))?;
                count += 1;
            }
            let mut tampered = function_doc(&fixtures::square(), unit);
            tampered.density = Some("1/sqrt(y)".into());
            tampered.singular = vec![0.0];
            write_doc(dir, "tampered.json", &tampered)?;
            let overlap = FunctionDocument {
                domain: [0.0, 1.0],
                kind: FunctionKind::Invertible,
                pieces: vec![
                    PieceDocument {
                        interval: [0.0, 0.5],
                        expr: "2*x".into(),
                    },
                    PieceDocument {
                        interval: [0.4, 1.0],
                        expr: "2 - 2*x".into(),
                    },
                ],
                support: unit,
                density: None,
                singular: Vec::new(),
            };
            write_doc(dir, "overlap.json", &overlap)?;
            count += 2;
        }
    }
    println!("wrote {count} documents to {}", dir.display());
    Ok(())
}
