use std::fmt::Write;
use std::path::PathBuf;

use clap::Args;
use serde::Serialize;
use ym_core::construct::all_representations;
use ym_core::document::Document;
use ym_core::exprfn::ValidationReport;
use ym_core::measures::{HomogeneousYoungMeasure, MeasureSummary};
use ym_core::SupportInterval;

use crate::failure::Failure;
use crate::io::{file_label, read_document, write_atomic, write_report};

#[derive(Debug, Args)]
pub struct ComputeArgs {
    /// Function or density document (JSON).
    pub input: PathBuf,
    /// Number of grid points for density and CDF samples.
    #[arg(long, default_value_t = 1025)]
    pub grid: usize,
    /// Output directory.
    #[arg(short, long, default_value = "ym-out")]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct NamedSummary {
    name: &'static str,
    #[serde(flatten)]
    summary: MeasureSummary,
}

#[derive(Serialize)]
struct ComputeReport {
    command: &'static str,
    input: String,
    support: SupportInterval,
    grid: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    validation: Option<ValidationReport>,
    measures: Vec<NamedSummary>,
}

const CDF_TOL: f64 = 1e-10;

pub fn run(args: &ComputeArgs) -> Result<(), Failure> {
    if args.grid < 2 {
        return Err(Failure::Input("--grid must be at least 2".into()));
    }
    let doc = read_document(&args.input)?;
    let k = doc.support();
    let (validation, measures): (_, Vec<(&'static str, HomogeneousYoungMeasure)>) = match &doc {
        Document::Function(f) => {
            let u = f.build().map_err(|e| crate::io::document_failure(&args.input, e))?;
            let report = u.validate(&k);
            if !report.structure_ok() {
                return Err(Failure::Validation(report.failures().join("\n")));
            }
            let mut reps = all_representations(&u, &k).map_err(|e| Failure::Validation(e.to_string()))?;
            if let Some(claimed) = f
                .claimed_density()
                .map_err(|e| crate::io::document_failure(&args.input, e))?
            {
                reps.push(("claimed", claimed));
            }
            (Some(report), reps)
        }
        Document::Density(d) => {
            let nu = d.build().map_err(|e| crate::io::document_failure(&args.input, e))?;
            (None, vec![("density", nu)])
        }
    };

    let summaries = measures
        .iter()
        .map(|(name, nu)| {
            nu.summarize(args.grid, CDF_TOL)
                .map(|summary| NamedSummary { name, summary })
                .map_err(|e| Failure::Check(format!("{name}: {e}")))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let csv = grid_csv(&k, args.grid, &summaries);
    let report = ComputeReport {
        command: "compute",
        input: file_label(&args.input),
        support: k,
        grid: args.grid,
        validation,
        measures: summaries,
    };
    write_report(&args.out.join("measure_report.json"), &report)?;
    write_atomic(&args.out.join("grid.csv"), csv.as_bytes())?;
    for m in &report.measures {
        println!(
            "{}: {} measure, total mass {}",
            m.name, m.summary.variant, m.summary.total_mass
        );
    }
    Ok(())
}

fn grid_csv(k: &SupportInterval, n: usize, summaries: &[NamedSummary]) -> String {
    let mut out = String::from("y");
    for s in summaries {
        if s.summary.density.is_some() {
            let _ = write!(out, ",{}_density", s.name);
        }
        let _ = write!(out, ",{}_cdf", s.name);
    }
    out.push('\n');
    for (i, y) in k.grid(n).into_iter().enumerate() {
        let _ = write!(out, "{y}");
        for s in summaries {
            if let Some(d) = &s.summary.density {
                let v = d[i][1];
                if v.is_finite() {
                    let _ = write!(out, ",{v}");
                } else {
                    out.push(',');
                }
            }
            let _ = write!(out, ",{}", s.summary.cdf[i][1]);
        }
        out.push('\n');
    }
    out
}
