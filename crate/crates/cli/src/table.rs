//! `momdens table` — sweep the atom grids and report, per (location,
//! moment-order) cell, the smallest atom weight at which the hierarchy
//! detects non-existence.

use anyhow::{bail, Context, Result};
use clap::Args;
use momdens_core::hierarchy::{run_detection, HierarchyConfig};
use momdens_core::measures::{box_lebesgue_moments, mixture_moments, Atom, MixtureScenario};
use momdens_core::polybasis::SemialgebraicSet;
use rayon::prelude::*;
use std::fmt::Write as _;
use std::path::PathBuf;

#[derive(Args)]
pub struct TableArgs {
    /// Which table: 1 = single atom, 2 = atom pair (s, s+0.1).
    #[arg(long)]
    which: u8,
    /// Deepest level; table columns cover moment orders up to 2*dmax.
    #[arg(long)]
    dmax: Option<u32>,
    /// Atom weights to scan, ascending.
    #[arg(long, value_delimiter = ',', default_values = [
        "0.1", "0.2", "0.3", "0.4", "0.5", "0.6", "0.7", "0.8", "0.9", "1.0",
    ])]
    weights: Vec<f64>,
    /// Restrict to these row locations (default: the full grid).
    #[arg(long, value_delimiter = ',')]
    rows: Option<Vec<f64>>,
    /// Bound on auxiliary completion moments.
    #[arg(long, default_value_t = momdens_core::hierarchy::DEFAULT_COMPLETION_BOUND)]
    completion_bound: f64,
    /// Markdown output path.
    #[arg(long)]
    out_md: Option<PathBuf>,
    /// CSV output path.
    #[arg(long)]
    out_csv: Option<PathBuf>,
}

struct Sweep {
    rows: Vec<f64>,
    row_label: &'static str,
    columns: Vec<u32>, // moment orders
    /// thresholds[row][col] = smallest detected weight
    thresholds: Vec<Vec<Option<f64>>>,
}

fn label(which: u8, s: f64) -> String {
    if which == 1 {
        format!("{s:.1}")
    } else {
        format!("({:.1},{:.1})", s, s + 0.1)
    }
}

pub fn run(args: TableArgs) -> Result<u8> {
    let (default_rows, default_dmax): (Vec<f64>, u32) = match args.which {
        1 => ((0..=10).map(|k| k as f64 / 10.0).collect(), 7),
        2 => ((1..=9).map(|k| k as f64 / 10.0).collect(), 6),
        other => bail!("--which must be 1 or 2, got {other}"),
    };
    let dmax = args.dmax.unwrap_or(default_dmax);
    let first_column_d = if args.which == 1 { 4 } else { 5 };
    if dmax < first_column_d {
        bail!("--dmax must be at least {first_column_d} for table {}", args.which);
    }
    let rows = args.rows.clone().unwrap_or(default_rows);
    let mut weights = args.weights.clone();
    weights.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let bounds = vec![(0.0, 1.0)];
    let set = SemialgebraicSet::interval(0.0, 1.0).unwrap();
    let gamma = box_lebesgue_moments(&bounds, 2 * dmax)?;

    // d*(row, weight): first level detecting infeasibility, run in parallel
    // over cells, assembled in deterministic grid order
    let cells: Vec<(usize, usize)> = (0..rows.len())
        .flat_map(|i| (0..weights.len()).map(move |j| (i, j)))
        .collect();
    let detections: Vec<((usize, usize), Option<u32>)> = cells
        .par_iter()
        .map(|&(i, j)| {
            let s = rows[i];
            let w = weights[j];
            let scenario = if args.which == 1 {
                MixtureScenario::single_atom(1.0 - w, vec![s])
            } else {
                MixtureScenario {
                    box_weight: 1.0 - w,
                    atoms: vec![
                        Atom { location: vec![s], weight: 0.5 },
                        Atom { location: vec![s + 0.1], weight: 0.5 },
                    ],
                }
            };
            let y = mixture_moments(&scenario, &bounds, 2 * dmax)
                .expect("grid scenario is valid");
            let mut config = HierarchyConfig::new(dmax);
            config.solver.variable_box = args.completion_bound;
            let report =
                run_detection(&set, &gamma, &y, &config).expect("moments cover the depth");
            ((i, j), report.first_infeasible_level())
        })
        .collect();
    let mut first_level = vec![vec![None; weights.len()]; rows.len()];
    for ((i, j), d) in detections {
        first_level[i][j] = d;
    }

    let columns: Vec<u32> = (first_column_d..=dmax).map(|d| 2 * d).collect();
    let mut thresholds = vec![vec![None; columns.len()]; rows.len()];
    for (i, row) in thresholds.iter_mut().enumerate() {
        for (ci, moments) in columns.iter().enumerate() {
            let d_cell = moments / 2;
            row[ci] = weights
                .iter()
                .zip(&first_level[i])
                .find(|(_, det)| matches!(det, Some(d) if *d <= d_cell))
                .map(|(w, _)| *w);
        }
    }

    let sweep = Sweep {
        rows,
        row_label: if args.which == 1 { "s" } else { "(s,s+0.1)" },
        columns,
        thresholds,
    };

    let md = render_markdown(args.which, &sweep);
    print!("{md}");
    if let Some(p) = &args.out_md {
        std::fs::write(p, &md).with_context(|| format!("writing {}", p.display()))?;
    }
    if let Some(p) = &args.out_csv {
        let csv = render_csv(args.which, &sweep);
        std::fs::write(p, csv).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(crate::EXIT_OK)
}

fn cell_text(v: Option<f64>) -> String {
    match v {
        Some(w) => format!("{w:.1}"),
        None => "-".to_string(),
    }
}

fn render_markdown(which: u8, sweep: &Sweep) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "Smallest atom weight detected, by moment order (completion-bounded hierarchy)."
    );
    let _ = write!(out, "| {} |", sweep.row_label);
    for m in &sweep.columns {
        let _ = write!(out, " {m} |");
    }
    let _ = writeln!(out);
    let _ = write!(out, "|---|");
    for _ in &sweep.columns {
        let _ = write!(out, "---|");
    }
    let _ = writeln!(out);
    for (i, s) in sweep.rows.iter().enumerate() {
        let _ = write!(out, "| {} |", label(which, *s));
        for cell in &sweep.thresholds[i] {
            let _ = write!(out, " {} |", cell_text(*cell));
        }
        let _ = writeln!(out);
    }
    out
}

fn render_csv(which: u8, sweep: &Sweep) -> String {
    let mut out = String::new();
    let _ = write!(out, "{}", sweep.row_label);
    for m in &sweep.columns {
        let _ = write!(out, ",{m}");
    }
    let _ = writeln!(out);
    for (i, s) in sweep.rows.iter().enumerate() {
        let _ = write!(out, "{}", label(which, *s));
        for cell in &sweep.thresholds[i] {
            let _ = write!(out, ",{}", cell_text(*cell));
        }
        let _ = writeln!(out);
    }
    out
}
