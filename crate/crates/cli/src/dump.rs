//! `momdens dump-problem` — emit one assembled level as conic exchange text
//! for cross-checking against external solvers.

use anyhow::{Context, Result};
use clap::Args;
use momdens_core::hierarchy::assemble_primal;
use momdens_core::io;
use momdens_core::measures::box_lebesgue_moments;
use std::path::PathBuf;

#[derive(Args)]
pub struct DumpArgs {
    #[arg(long)]
    set: PathBuf,
    #[arg(long)]
    moments: PathBuf,
    /// Level to assemble.
    #[arg(long)]
    d: u32,
    /// Essential-sup bound constraints to include.
    #[arg(long)]
    linf_bound: Option<f64>,
    /// Output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(args: DumpArgs) -> Result<u8> {
    let set_bytes =
        std::fs::read(&args.set).with_context(|| format!("reading {}", args.set.display()))?;
    let set_json: io::SetJson = serde_json::from_slice(&set_bytes)?;
    let set = io::set_from_json::<f64>(&set_json)?;
    let moment_bytes = std::fs::read(&args.moments)
        .with_context(|| format!("reading {}", args.moments.display()))?;
    let y_json: io::MomentVectorJson = serde_json::from_slice(&moment_bytes)?;
    let y = io::moment_vector_from_json::<f64>(&y_json)?;
    let gamma = box_lebesgue_moments(set.bounds(), 2 * args.d)?;

    let level = assemble_primal(&set, &gamma, &y, args.d, args.linf_bound)?;
    let text = level.primal.dump_conic();
    match &args.out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{text}"),
    }
    Ok(crate::EXIT_OK)
}
