//! `momdens scenario` — emit the moment sequence of a reference scenario.

use anyhow::{bail, Context, Result};
use clap::{Args, Subcommand};
use momdens_core::io::{self, FromValueRepr};
use momdens_core::measures::{density_moments, mixture_moments, Atom, MixtureScenario};
use momdens_core::polybasis::Polynomial;
use momdens_core::BigRational;
use std::path::PathBuf;

#[derive(Args)]
pub struct ScenarioArgs {
    #[command(subcommand)]
    kind: ScenarioKind,
}

#[derive(Subcommand)]
enum ScenarioKind {
    /// Convex mixture of the box-uniform measure with point masses:
    /// a * Lebesgue + (1 - a) * sum of weighted atoms.
    DiracMix(DiracMixArgs),
    /// Moments of a univariate polynomial probability density.
    PolyDensity(PolyDensityArgs),
}

#[derive(Args)]
struct DiracMixArgs {
    /// Atom locations, comma separated (univariate).
    #[arg(long, value_delimiter = ',')]
    s: Vec<String>,
    /// Atom weights (default: equal); must sum to 1.
    #[arg(long, value_delimiter = ',')]
    weights: Option<Vec<String>>,
    /// Weight of the Lebesgue part.
    #[arg(long)]
    a: String,
    /// Highest moment order to emit.
    #[arg(long)]
    order: u32,
    /// Interval bounds lo,hi.
    #[arg(long, value_delimiter = ',', default_values = ["0", "1"])]
    r#box: Vec<String>,
    /// Emit exact rationals instead of doubles.
    #[arg(long)]
    exact: bool,
    /// Output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PolyDensityArgs {
    /// Density coefficients c0,c1,... for c0 + c1 x + ...; must integrate
    /// to 1 against the scaled Lebesgue measure.
    #[arg(long, value_delimiter = ',')]
    coeffs: Vec<String>,
    #[arg(long)]
    order: u32,
    #[arg(long, value_delimiter = ',', default_values = ["0", "1"])]
    r#box: Vec<String>,
    #[arg(long)]
    exact: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_scalar<T: FromValueRepr>(text: &str) -> Result<T> {
    let repr = io::ValueRepr::Text(text.to_string());
    T::from_repr(&repr).with_context(|| format!("cannot parse {text:?}"))
}

fn write_out(path: &Option<PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => println!("{text}"),
    }
    Ok(())
}

pub fn run(args: ScenarioArgs) -> Result<u8> {
    match args.kind {
        ScenarioKind::DiracMix(a) => {
            if a.exact {
                dirac_mix::<BigRational>(&a)
            } else {
                dirac_mix::<f64>(&a)
            }
        }
        ScenarioKind::PolyDensity(a) => {
            if a.exact {
                poly_density::<BigRational>(&a)
            } else {
                poly_density::<f64>(&a)
            }
        }
    }
}

fn parse_interval<T: FromValueRepr>(texts: &[String]) -> Result<Vec<(T, T)>> {
    if texts.len() != 2 {
        bail!("--box takes exactly lo,hi");
    }
    Ok(vec![(parse_scalar(&texts[0])?, parse_scalar(&texts[1])?)])
}

fn dirac_mix<T: FromValueRepr>(args: &DiracMixArgs) -> Result<u8> {
    let bounds = parse_interval::<T>(&args.r#box)?;
    let a: T = parse_scalar(&args.a)?;
    let locations: Vec<T> = args
        .s
        .iter()
        .map(|s| parse_scalar(s))
        .collect::<Result<_>>()?;
    let weights: Vec<T> = match &args.weights {
        Some(ws) => {
            if ws.len() != locations.len() {
                bail!(
                    "--weights has {} entries for {} atoms",
                    ws.len(),
                    locations.len()
                );
            }
            ws.iter().map(|w| parse_scalar(w)).collect::<Result<_>>()?
        }
        None => {
            if locations.is_empty() {
                vec![]
            } else {
                let equal = T::one() / T::from_int(locations.len() as i64);
                vec![equal; locations.len()]
            }
        }
    };
    let scenario = MixtureScenario {
        box_weight: a,
        atoms: locations
            .into_iter()
            .zip(weights)
            .map(|(location, weight)| Atom {
                location: vec![location],
                weight,
            })
            .collect(),
    };
    let y = mixture_moments(&scenario, &bounds, args.order)
        .context("invalid scenario for the box")?;
    let text = serde_json::to_string_pretty(&io::moment_vector_to_json(&y))?;
    write_out(&args.out, &text)?;
    Ok(crate::EXIT_OK)
}

fn poly_density<T: FromValueRepr>(args: &PolyDensityArgs) -> Result<u8> {
    let bounds = parse_interval::<T>(&args.r#box)?;
    let coeffs: Vec<T> = args
        .coeffs
        .iter()
        .map(|c| parse_scalar(c))
        .collect::<Result<_>>()?;
    let f = Polynomial::from_univariate_coeffs(&coeffs);
    let y = density_moments(&f, &bounds, args.order)?;
    if !y.is_probability() {
        let mass = y
            .univariate(0)
            .map(|v| format!("{}", v))
            .unwrap_or_default();
        bail!(
            "the density integrates to {mass}, not 1, against the scaled Lebesgue measure on \
             the box; rescale the coefficients"
        );
    }
    let text = serde_json::to_string_pretty(&io::moment_vector_to_json(&y))?;
    write_out(&args.out, &text)?;
    Ok(crate::EXIT_OK)
}
