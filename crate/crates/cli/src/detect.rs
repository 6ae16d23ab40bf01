//! `momdens detect` — run the hierarchy and report the verdict.

use crate::manifest::RunManifest;
use anyhow::{Context, Result};
use clap::Args;
use momdens_core::hierarchy::{
    interpret, run_detection, Conclusion, HierarchyConfig, LevelStatus,
};
use momdens_core::io;
use momdens_core::measures::box_lebesgue_moments;
use serde::Serialize;
use std::path::PathBuf;
use std::time::Instant;

#[derive(Args)]
pub struct DetectArgs {
    /// Semi-algebraic set description (JSON).
    #[arg(long)]
    set: PathBuf,
    /// Input moment sequence (JSON).
    #[arg(long)]
    moments: PathBuf,
    /// Deepest hierarchy level to evaluate.
    #[arg(long)]
    dmax: u32,
    /// PSD residual tolerance.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Infeasibility margin threshold.
    #[arg(long, default_value_t = 1e-6)]
    infeas_eps: f64,
    /// Bound on auxiliary completion moments; verdicts are scoped to it.
    #[arg(long, default_value_t = momdens_core::hierarchy::DEFAULT_COMPLETION_BOUND)]
    completion_bound: f64,
    /// Essential-sup bound: adds z_{0k} <= c constraints.
    #[arg(long)]
    linf_bound: Option<f64>,
    /// Evaluate all levels instead of stopping at the first infeasibility.
    #[arg(long)]
    run_all: bool,
    /// Where to write the JSON report.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Serialize)]
struct DetectOutput {
    manifest: RunManifest,
    report: io::ReportJson,
    interpretation: String,
}

pub fn run(args: DetectArgs) -> Result<u8> {
    let total = Instant::now();
    let mut manifest = RunManifest::new();

    let parse_started = Instant::now();
    let set_bytes =
        std::fs::read(&args.set).with_context(|| format!("reading {}", args.set.display()))?;
    manifest.record_input(&args.set, &set_bytes);
    let set_json: io::SetJson = serde_json::from_slice(&set_bytes).context("parsing set JSON")?;
    let set = io::set_from_json::<f64>(&set_json)?;

    let moment_bytes = std::fs::read(&args.moments)
        .with_context(|| format!("reading {}", args.moments.display()))?;
    manifest.record_input(&args.moments, &moment_bytes);
    let y_json: io::MomentVectorJson =
        serde_json::from_slice(&moment_bytes).context("parsing moment JSON")?;
    let y = io::moment_vector_from_json::<f64>(&y_json)?;
    manifest.timing("parse", parse_started.elapsed().as_secs_f64());

    let gamma_started = Instant::now();
    let gamma = box_lebesgue_moments(set.bounds(), 2 * args.dmax)?;
    manifest.timing("lebesgue_moments", gamma_started.elapsed().as_secs_f64());

    let mut config = HierarchyConfig::new(args.dmax);
    config.solver.feas_tol = args.tol;
    config.solver.infeas_threshold = args.infeas_eps;
    config.solver.variable_box = args.completion_bound;
    config.linf_bound = args.linf_bound;
    config.run_all = args.run_all;
    manifest.tolerance("feas_tol", args.tol);
    manifest.tolerance("infeas_threshold", args.infeas_eps);
    manifest.tolerance("completion_bound", args.completion_bound);

    let solve_started = Instant::now();
    let report = run_detection(&set, &gamma, &y, &config)?;
    manifest.timing("hierarchy", solve_started.elapsed().as_secs_f64());
    manifest.timing("total", total.elapsed().as_secs_f64());

    // per-level table on stdout
    println!("{:>3}  {:<13} {:>14} {:>12} {:>9}", "d", "status", "rho_d", "margin", "sec");
    for level in &report.levels {
        let (status, rho, margin) = match &level.status {
            LevelStatus::Feasible { rho, .. } => {
                ("feasible", format!("{rho:.6}"), format!("{:.3e}", level.margin.unwrap_or(f64::NAN)))
            }
            LevelStatus::Infeasible { margin } => {
                ("infeasible", "-".to_string(), format!("{margin:.3e}"))
            }
            LevelStatus::Indeterminate { .. } => {
                ("indeterminate", "-".to_string(), "-".to_string())
            }
        };
        println!(
            "{:>3}  {:<13} {:>14} {:>12} {:>9.2}",
            level.d, status, rho, margin, level.seconds
        );
    }
    let interpretation = interpret(&report);
    println!("{interpretation}");

    let exit = match report.conclusion {
        Conclusion::NoDensityFrom { .. } => crate::EXIT_DETECTED,
        Conclusion::ConsistentUpTo { .. } => crate::EXIT_OK,
        Conclusion::Inconclusive => crate::EXIT_INDETERMINATE,
    };

    let output = DetectOutput {
        manifest,
        report: io::report_to_json(&report),
        interpretation,
    };
    let text = serde_json::to_string_pretty(&output)?;
    std::fs::write(&args.out, text)
        .with_context(|| format!("writing {}", args.out.display()))?;
    println!("report: {} (manifest embedded)", args.out.display());
    Ok(exit)
}
