//! `momdens hausdorff` — finite-difference baseline for univariate moments.

use crate::manifest::RunManifest;
use anyhow::{bail, Context, Result};
use clap::Args;
use momdens_core::hausdorff::{
    check_lp, check_lp_integer, check_markov, LpVerdict, MarkovVerdict,
};
use momdens_core::io;
use momdens_core::scalar::Scalar;
use momdens_core::BigRational;
use serde::Serialize;
use serde_json::json;
use std::path::PathBuf;
use std::time::Instant;

#[derive(Args)]
pub struct HausdorffArgs {
    /// Univariate moment sequence (JSON).
    #[arg(long)]
    moments: PathBuf,
    /// Density bound for the bounded-density conditions.
    #[arg(long)]
    c: f64,
    /// Also run the L_p condition at this exponent.
    #[arg(long)]
    p: Option<f64>,
    /// Deepest difference row to scan.
    #[arg(long, default_value_t = 50)]
    n_max: usize,
    /// Exact rational arithmetic (integer --p only). Required for sharp
    /// verdicts beyond row ~25: double precision loses the table to
    /// cancellation there (documented in the README).
    #[arg(long)]
    exact: bool,
    /// Where to write the JSON report.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct HausdorffOutput {
    manifest: RunManifest,
    markov: serde_json::Value,
    lp: Option<serde_json::Value>,
    passed: bool,
}

pub fn run(args: HausdorffArgs) -> Result<u8> {
    let total = Instant::now();
    let mut manifest = RunManifest::new();
    manifest.tolerance("c", args.c);
    manifest.tolerance("band", 1e-10);
    if let Some(p) = args.p {
        manifest.tolerance("p", p);
    }

    let bytes = std::fs::read(&args.moments)
        .with_context(|| format!("reading {}", args.moments.display()))?;
    manifest.record_input(&args.moments, &bytes);
    let json: io::MomentVectorJson = serde_json::from_slice(&bytes).context("parsing moments")?;
    if json.nvars != 1 {
        bail!("the finite-difference conditions are univariate; got {} variables", json.nvars);
    }
    if args.n_max > 25 && !args.exact {
        eprintln!(
            "warning: difference rows beyond ~25 are unreliable in double precision; \
             rerun with --exact for sharp verdicts"
        );
    }

    let (markov_json, lp_json, passed) = if args.exact {
        let y = io::moment_vector_from_json::<BigRational>(&json)?;
        let s: Vec<BigRational> = (0..=json.max_order)
            .map(|k| y.univariate(k).unwrap().clone())
            .collect();
        let c = BigRational::from_float(args.c).context("non-finite c")?;
        let markov = check_markov(&s, &c, args.n_max.min(json.max_order as usize))?;
        let lp = match args.p {
            Some(p) => {
                if p.fract() != 0.0 || p < 1.0 {
                    bail!("--exact supports integer --p >= 1 only (exact p-th powers)");
                }
                Some(lp_to_json_exact(check_lp_integer(
                    &s,
                    p as u32,
                    &c,
                    args.n_max.min(json.max_order as usize),
                )?))
            }
            None => None,
        };
        let passed = markov.passed() && lp.as_ref().is_none_or(|v| v["verdict"] == "pass");
        (markov_to_json_exact(markov), lp, passed)
    } else {
        let y = io::moment_vector_from_json::<f64>(&json)?;
        let s: Vec<f64> = (0..=json.max_order)
            .map(|k| *y.univariate(k).unwrap())
            .collect();
        let markov = check_markov(&s, &args.c, args.n_max.min(json.max_order as usize))?;
        let lp = match args.p {
            Some(p) => Some(lp_to_json_f64(check_lp(
                &s,
                p,
                &args.c,
                args.n_max.min(json.max_order as usize),
            )?)),
            None => None,
        };
        let passed = markov.passed() && lp.as_ref().is_none_or(|v| v["verdict"] == "pass");
        (markov_to_json_f64(markov), lp, passed)
    };

    manifest.timing("total", total.elapsed().as_secs_f64());
    println!(
        "bounded-density conditions (c = {}): {}",
        args.c,
        if markov_json["verdict"] == "pass" { "pass" } else { "FAIL" }
    );
    if let Some(lp) = &lp_json {
        println!(
            "L_p conditions (p = {}, c = {}): {}",
            args.p.unwrap(),
            args.c,
            if lp["verdict"] == "pass" { "pass" } else { "FAIL" }
        );
    }

    println!(
        "manifest: momdens {} | {}",
        manifest.version,
        manifest
            .inputs
            .iter()
            .map(|i| format!("{} sha256:{}", i.path, &i.sha256[..12]))
            .collect::<Vec<_>>()
            .join(", ")
    );
    let output = HausdorffOutput {
        manifest,
        markov: markov_json,
        lp: lp_json,
        passed,
    };
    if let Some(p) = &args.out {
        std::fs::write(p, serde_json::to_string_pretty(&output)?)
            .with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(if passed { crate::EXIT_OK } else { crate::EXIT_DETECTED })
}

fn markov_to_json_f64(v: MarkovVerdict<f64>) -> serde_json::Value {
    match v {
        MarkovVerdict::Pass => json!({"verdict": "pass"}),
        MarkovVerdict::Fail { n, j, value, bound } => json!({
            "verdict": "fail", "n": n, "j": j, "value": value, "bound": bound,
        }),
    }
}

fn markov_to_json_exact(v: MarkovVerdict<BigRational>) -> serde_json::Value {
    match v {
        MarkovVerdict::Pass => json!({"verdict": "pass"}),
        MarkovVerdict::Fail { n, j, value, bound } => json!({
            "verdict": "fail", "n": n, "j": j,
            "value": value.to_f64_approx(), "bound": bound.to_f64_approx(),
            "value_exact": format!("{value}"),
        }),
    }
}

fn lp_to_json_f64(v: LpVerdict<f64>) -> serde_json::Value {
    match v {
        LpVerdict::Pass { sup_mean } => json!({"verdict": "pass", "sup_mean": sup_mean}),
        LpVerdict::Fail { n, value } => json!({"verdict": "fail", "n": n, "value": value}),
        LpVerdict::NotPositive { n, j, value } => json!({
            "verdict": "not_a_positive_sequence", "n": n, "j": j, "value": value,
        }),
    }
}

fn lp_to_json_exact(v: LpVerdict<BigRational>) -> serde_json::Value {
    match v {
        LpVerdict::Pass { sup_mean } => json!({
            "verdict": "pass", "sup_mean_pth_power": sup_mean.to_f64_approx(),
        }),
        LpVerdict::Fail { n, value } => json!({
            "verdict": "fail", "n": n, "value_pth_power": value.to_f64_approx(),
        }),
        LpVerdict::NotPositive { n, j, value } => json!({
            "verdict": "not_a_positive_sequence", "n": n, "j": j,
            "value": value.to_f64_approx(),
        }),
    }
}
