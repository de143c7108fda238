use std::path::PathBuf;

use clap::Args;
use serde::Serialize;
use ym_core::convergence::{
    generate_test_sets, monotone_density_scenario, ScenarioReport, DEFAULT_TOL, DEFAULT_WINDOW,
};
use ym_core::SupportInterval;

use crate::failure::Failure;
use crate::io::{file_label, numbered_documents, read_function, write_atomic, write_report};

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    /// Directory of numbered single-piece increasing function documents.
    pub dir: PathBuf,
    #[arg(long, default_value_t = 4)]
    pub depth: u32,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    pub window: usize,
    /// Output directory.
    #[arg(short, long, default_value = "ym-out")]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct Report<'a> {
    command: &'static str,
    inputs: Vec<String>,
    #[serde(flatten)]
    report: &'a ScenarioReport,
}

pub fn run(args: &ScenarioArgs) -> Result<(), Failure> {
    if !(args.tol > 0.0) {
        return Err(Failure::Input("--tol must be positive".into()));
    }
    let paths = numbered_documents(&args.dir)?;
    let mut us = Vec::new();
    let mut hull: Option<SupportInterval> = None;
    for path in &paths {
        let (_, u) = read_function(path)?;
        for p in u.pieces() {
            let (lo, hi) = p.image();
            if let Ok(k) = SupportInterval::new(lo, hi) {
                hull = Some(hull.map_or(k, |h| h.hull(&k)));
            }
        }
        us.push(u);
    }
    if us.len() < 2 {
        return Err(Failure::Input(format!(
            "the scenario needs at least two members, found {}",
            us.len()
        )));
    }
    let hull = hull.ok_or_else(|| Failure::Validation("no member has a non-degenerate image".into()))?;
    let family = generate_test_sets(&hull, args.depth);
    let window = args.window.min(us.len()).max(2);
    let report = monotone_density_scenario(&us, &family, args.tol, window).map_err(|e| match e {
        ym_core::convergence::ScenarioError::Construct { .. } => Failure::Validation(e.to_string()),
        e => Failure::Check(e.to_string()),
    })?;

    let inputs = paths.iter().map(|p| file_label(p)).collect();
    write_report(
        &args.out.join("scenario.json"),
        &Report {
            command: "scenario-monotone",
            inputs,
            report: &report,
        },
    )?;
    write_atomic(
        &args.out.join("scenario_values.csv"),
        report.probe.values_csv().as_bytes(),
    )?;

    println!(
        "monotone: {}, bounded: {} (max {}), converged: {}",
        report.monotone, report.bounded, report.max_value, report.converged
    );
    if report.pass {
        return Ok(());
    }
    let mut reasons = Vec::new();
    if let Some(w) = &report.witness {
        reasons.push(format!(
            "set values decrease on {} from member {} to {} ({} -> {})",
            w.set, w.from, w.to, w.before, w.after
        ));
    }
    if !report.bounded {
        reasons.push(format!("values exceed 1 (max {})", report.max_value));
    }
    if !report.converged {
        reasons.push("trailing values have not settled within the tolerance".into());
    }
    Err(Failure::Check(reasons.join("\n")))
}
