use std::path::{Path, PathBuf};

use clap::Args;
use serde::Serialize;
use ym_core::construct::{density_young_measure, pushforward_young_measure};
use ym_core::convergence::{
    equivalence_check, generate_test_sets, oscillating_sequence, weak_l1_probe, weak_measure_probe, ConvergenceReport,
    EquivalenceReport, MeasureSequence, DEFAULT_TOL, DEFAULT_WINDOW,
};
use ym_core::document::Document;
use ym_core::HomogeneousYoungMeasure;

use crate::failure::Failure;
use crate::io::{
    document_failure, file_label, numbered_documents, read_document, read_function, write_atomic, write_report,
};

#[derive(Debug, Args)]
pub struct ConvergeArgs {
    /// Directory of numbered function or density documents.
    #[arg(required_unless_present = "oscillate", conflicts_with = "oscillate")]
    pub dir: Option<PathBuf>,
    /// Build the sequence by l-fold rescaling of this function, l = 1, 2, 4, ...
    #[arg(long, value_name = "BASE")]
    pub oscillate: Option<PathBuf>,
    /// Number of rescaling levels.
    #[arg(long, default_value_t = 6)]
    pub levels: u32,
    /// Depth of the dyadic test-set family.
    #[arg(long, default_value_t = 4)]
    pub depth: u32,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    /// Number of trailing indices in the Cauchy residual.
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    pub window: usize,
    /// Output directory.
    #[arg(short, long, default_value = "ym-out")]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct Probe<'a> {
    command: &'static str,
    inputs: &'a [String],
    #[serde(flatten)]
    report: &'a ConvergenceReport,
}

#[derive(Serialize)]
struct Equivalence<'a> {
    command: &'static str,
    inputs: &'a [String],
    #[serde(flatten)]
    report: &'a EquivalenceReport,
}

struct Sequence {
    labels: Vec<String>,
    densities: Vec<HomogeneousYoungMeasure>,
    measures: Vec<HomogeneousYoungMeasure>,
}

fn from_directory(dir: &Path) -> Result<Sequence, Failure> {
    let mut seq = Sequence {
        labels: Vec::new(),
        densities: Vec::new(),
        measures: Vec::new(),
    };
    for path in numbered_documents(dir)? {
        match read_document(&path)? {
            Document::Function(doc) => {
                let u = doc.build().map_err(|e| document_failure(&path, e))?;
                let k = doc.support;
                let density = density_young_measure(&u, &k)
                    .map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?;
                let measure = pushforward_young_measure(&u, &k)
                    .map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?;
                seq.densities.push(density);
                seq.measures.push(measure);
            }
            Document::Density(doc) => {
                let nu = doc.build().map_err(|e| document_failure(&path, e))?;
                seq.densities.push(nu.clone());
                seq.measures.push(nu);
            }
        }
        seq.labels.push(file_label(&path));
    }
    Ok(seq)
}

fn from_oscillation(base: &Path, levels: u32) -> Result<Sequence, Failure> {
    if levels == 0 || levels > 20 {
        return Err(Failure::Input("--levels must be between 1 and 20".into()));
    }
    let (doc, u) = read_function(base)?;
    let k = doc.support;
    let mut seq = Sequence {
        labels: Vec::new(),
        densities: Vec::new(),
        measures: Vec::new(),
    };
    for level in 0..levels {
        let l = 1usize << level;
        let ul = oscillating_sequence(&u, l).map_err(|e| Failure::Validation(e.to_string()))?;
        let fail = |e: ym_core::construct::ConstructError| Failure::Validation(format!("l = {l}: {e}"));
        seq.densities.push(density_young_measure(&ul, &k).map_err(fail)?);
        seq.measures.push(pushforward_young_measure(&ul, &k).map_err(fail)?);
        seq.labels.push(format!("l={l}"));
    }
    Ok(seq)
}

pub fn run(args: &ConvergeArgs) -> Result<(), Failure> {
    if !(args.tol > 0.0) {
        return Err(Failure::Input("--tol must be positive".into()));
    }
    let seq = match (&args.dir, &args.oscillate) {
        (_, Some(base)) => from_oscillation(base, args.levels)?,
        (Some(dir), None) => from_directory(dir)?,
        (None, None) => return Err(Failure::Input("give a directory or --oscillate".into())),
    };
    let len = seq.labels.len();
    if len < 2 {
        return Err(Failure::Input(format!(
            "a sequence needs at least two members, found {len}"
        )));
    }
    let window = args.window.min(len);
    if window < 2 {
        return Err(Failure::Input("--window must be at least 2".into()));
    }
    let bad = |e: ym_core::convergence::ProbeError| Failure::Check(e.to_string());
    let densities = MeasureSequence::new(seq.densities, seq.labels.clone()).map_err(bad)?;
    let measures = MeasureSequence::new(seq.measures, seq.labels.clone()).map_err(bad)?;
    let family = generate_test_sets(&densities.support_hull().hull(&measures.support_hull()), args.depth);

    let density = weak_l1_probe(&densities, &family, args.tol, window).map_err(bad)?;
    let measure = weak_measure_probe(&measures, &family, args.tol, window).map_err(bad)?;
    let equivalence = equivalence_check(&density, &measure, args.tol).map_err(bad)?;

    let inputs = &seq.labels;
    write_report(
        &args.out.join("density_probe.json"),
        &Probe {
            command: "converge",
            inputs,
            report: &density,
        },
    )?;
    write_report(
        &args.out.join("measure_probe.json"),
        &Probe {
            command: "converge",
            inputs,
            report: &measure,
        },
    )?;
    write_report(
        &args.out.join("equivalence.json"),
        &Equivalence {
            command: "converge",
            inputs,
            report: &equivalence,
        },
    )?;
    write_atomic(&args.out.join("density_values.csv"), density.values_csv().as_bytes())?;
    write_atomic(&args.out.join("measure_values.csv"), measure.values_csv().as_bytes())?;

    println!(
        "density probe: {:?}, max residual {:?}",
        density.verdict, density.max_residual
    );
    println!(
        "measure probe: {:?}, max residual {:?}",
        measure.verdict, measure.max_residual
    );
    println!("equivalence: {:?}", equivalence.outcome);
    if let Some(note) = &equivalence.annotation {
        println!("note: {note}");
    }
    if equivalence.passed() {
        Ok(())
    } else {
        Err(Failure::Check(format!(
            "equivalence {:?} (density {:?}, measure {:?})",
            equivalence.outcome, equivalence.density_verdict, equivalence.measure_verdict
        )))
    }
}
