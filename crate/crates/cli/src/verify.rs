use std::path::PathBuf;

use clap::Args;
use serde::Serialize;
use ym_core::construct::{
    all_representations, cross_validate, verify_fundamental_identity, CrossReport, IdentityReport,
};
use ym_core::measures::MassCheck;
use ym_core::oracle::{ks_distance, monte_carlo_pushforward, DEFAULT_SAMPLES, DEFAULT_SEED, KS_THRESHOLD};
use ym_core::TestFunction;

use crate::failure::Failure;
use crate::io::{document_failure, file_label, read_function, write_report};

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Function document (JSON).
    pub input: PathBuf,
    /// Extra test function in the variable y; repeatable.
    #[arg(long = "beta", value_name = "EXPR")]
    pub betas: Vec<String>,
    /// Tolerance for the integral identity.
    #[arg(long, default_value_t = 1e-7)]
    pub tol: f64,
    /// Tolerance for agreement between presentations and for total mass.
    #[arg(long, default_value_t = 1e-9)]
    pub cross_tol: f64,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    pub samples: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Largest accepted Kolmogorov–Smirnov distance.
    #[arg(long, default_value_t = KS_THRESHOLD)]
    pub ks_threshold: f64,
    /// Output directory.
    #[arg(short, long, default_value = "ym-out")]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct MonteCarlo {
    samples: usize,
    seed: u64,
    generator: &'static str,
    ks_distance: f64,
    threshold: f64,
    pass: bool,
}

#[derive(Serialize)]
struct VerifyReport {
    command: &'static str,
    input: String,
    measure: &'static str,
    normalization: MassCheck,
    identity: IdentityReport,
    cross_validation: CrossReport,
    monte_carlo: MonteCarlo,
    failures: Vec<String>,
    pass: bool,
}

pub fn run(args: &VerifyArgs) -> Result<(), Failure> {
    if !(args.tol > 0.0 && args.cross_tol > 0.0) {
        return Err(Failure::Input("tolerances must be positive".into()));
    }
    let mut betas = TestFunction::default_suite();
    for b in &args.betas {
        betas.push(TestFunction::parse(b).map_err(|e| Failure::Input(format!("--beta `{b}`: {e}")))?);
    }
    let (doc, u) = read_function(&args.input)?;
    let k = doc.support;
    let report = u.validate(&k);
    if !report.structure_ok() {
        return Err(Failure::Validation(report.failures().join("\n")));
    }

    let claimed = doc.claimed_density().map_err(|e| document_failure(&args.input, e))?;
    let (name, nu) = match claimed {
        Some(nu) => ("claimed", nu),
        None => all_representations(&u, &k)
            .map_err(|e| Failure::Validation(e.to_string()))?
            .into_iter()
            .next()
            .expect("at least the pushforward"),
    };

    let normalization = nu
        .check_probability(args.cross_tol)
        .map_err(|e| Failure::Check(format!("normalization: {e}")))?;
    let identity = verify_fundamental_identity(&u, &nu, &betas, args.tol);
    let cross = cross_validate(&u, &k, args.cross_tol).map_err(|e| Failure::Check(format!("cross-validation: {e}")))?;
    let sample = monte_carlo_pushforward(&u, args.samples, args.seed).map_err(|e| match e {
        ym_core::oracle::SampleError::Evaluate(e) => Failure::Check(format!("sampling: {e}")),
        e => Failure::Input(e.to_string()),
    })?;
    let ks = ks_distance(&sample, &nu).map_err(|e| Failure::Check(format!("ks distance: {e}")))?;
    let monte_carlo = MonteCarlo {
        samples: args.samples,
        seed: args.seed,
        generator: "ChaCha8",
        ks_distance: ks,
        threshold: args.ks_threshold,
        pass: ks < args.ks_threshold,
    };

    let mut failures = Vec::new();
    if !normalization.normalized {
        failures.push(format!(
            "normalization: total mass {} is not 1 ± {}",
            normalization.mass, args.cross_tol
        ));
    }
    for e in identity.entries.iter().filter(|e| !e.pass) {
        match (&e.error, e.difference) {
            (Some(err), _) => failures.push(format!("identity for β = {}: {err}", e.beta)),
            (None, Some(d)) => failures.push(format!(
                "identity for β = {}: |lhs - rhs| = {d:e} > {}",
                e.beta, args.tol
            )),
            (None, None) => failures.push(format!("identity for β = {}", e.beta)),
        }
    }
    for c in cross.comparisons.iter().filter(|c| !c.pass) {
        failures.push(format!(
            "cross-validation {} vs {}: max CDF difference {:e}",
            c.first, c.second, c.max_cdf_difference
        ));
    }
    if !monte_carlo.pass {
        failures.push(format!("monte carlo: KS distance {ks} >= {}", args.ks_threshold));
    }

    let out = VerifyReport {
        command: "verify",
        input: file_label(&args.input),
        measure: name,
        normalization,
        identity,
        cross_validation: cross,
        monte_carlo,
        pass: failures.is_empty(),
        failures,
    };
    write_report(&args.out.join("verify_report.json"), &out)?;
    if out.pass {
        println!(
            "all checks passed ({} test functions, KS distance {:.6} over {} samples)",
            out.identity.entries.len(),
            ks,
            args.samples
        );
        Ok(())
    } else {
        Err(Failure::Check(out.failures.join("\n")))
    }
}
