//! JSON schemas for the file-facing types.
//!
//! Numeric values accept either a JSON number or a string: `"p/q"` for an
//! exact rational, or a decimal string parsed digit-exactly. Plain JSON
//! numbers go through `f64` (and convert to the exactly equal binary
//! rational in exact mode); write rational strings when quantities like
//! `1/3` must survive a round trip unrounded. The `f64` loaders accept both
//! forms and round rationals to the nearest double.

use crate::hierarchy::{Conclusion, DetectionReport, LevelStatus};
use crate::measures::{Atom, MixtureScenario, MomentVector};
use crate::polybasis::{MultiIndex, PolyError, Polynomial, SemialgebraicSet};
use crate::scalar::Scalar;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("cannot parse {text:?} as a number or rational")]
    BadNumber { text: String },
    #[error("non-finite numeric value")]
    NonFinite,
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Measure(#[from] crate::measures::MeasureError),
}

/// A value that is either a double or an exact string form.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum ValueRepr {
    Number(f64),
    Text(String),
}

impl ValueRepr {
    pub fn to_f64(&self) -> Result<f64, FormatError> {
        match self {
            ValueRepr::Number(v) => Ok(*v),
            ValueRepr::Text(_) => {
                let q = self.to_rational()?;
                q.to_f64().ok_or(FormatError::NonFinite)
            }
        }
    }

    pub fn to_rational(&self) -> Result<BigRational, FormatError> {
        match self {
            ValueRepr::Number(v) => {
                BigRational::from_float(*v).ok_or(FormatError::NonFinite)
            }
            ValueRepr::Text(text) => parse_rational_text(text),
        }
    }

    pub fn from_f64(v: f64) -> Self {
        ValueRepr::Number(v)
    }

    pub fn from_rational(q: &BigRational) -> Self {
        if q.is_integer() {
            ValueRepr::Text(q.numer().to_string())
        } else {
            ValueRepr::Text(format!("{}/{}", q.numer(), q.denom()))
        }
    }
}

/// Parses `"p/q"`, an integer string, or a decimal string, exactly.
fn parse_rational_text(text: &str) -> Result<BigRational, FormatError> {
    let bad = || FormatError::BadNumber {
        text: text.to_string(),
    };
    let t = text.trim();
    if let Some((num, den)) = t.split_once('/') {
        let n = BigInt::from_str(num.trim()).map_err(|_| bad())?;
        let d = BigInt::from_str(den.trim()).map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    // decimal form: sign, integer part, optional fraction
    let (sign, rest) = match t.strip_prefix('-') {
        Some(r) => (-BigInt::one(), r),
        None => (BigInt::one(), t),
    };
    let (int_part, frac_part) = match rest.split_once('.') {
        Some((i, f)) => (i, f),
        None => (rest, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    let digits_ok = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    if !(int_part.is_empty() || digits_ok(int_part))
        || !(frac_part.is_empty() || digits_ok(frac_part))
    {
        return Err(bad());
    }
    let mut numer = if int_part.is_empty() {
        BigInt::zero()
    } else {
        BigInt::from_str(int_part).map_err(|_| bad())?
    };
    let mut denom = BigInt::one();
    for ch in frac_part.bytes() {
        numer = numer * 10 + BigInt::from(ch - b'0');
        denom *= 10;
    }
    Ok(BigRational::new(sign * numer, denom))
}

/// Scalar types loadable from the JSON value representation.
pub trait FromValueRepr: Scalar {
    fn from_repr(repr: &ValueRepr) -> Result<Self, FormatError>;
    fn to_repr(&self) -> ValueRepr;
}

impl FromValueRepr for f64 {
    fn from_repr(repr: &ValueRepr) -> Result<Self, FormatError> {
        repr.to_f64()
    }
    fn to_repr(&self) -> ValueRepr {
        ValueRepr::Number(*self)
    }
}

impl FromValueRepr for BigRational {
    fn from_repr(repr: &ValueRepr) -> Result<Self, FormatError> {
        repr.to_rational()
    }
    fn to_repr(&self) -> ValueRepr {
        ValueRepr::from_rational(self)
    }
}

// ---------------------------------------------------------------------------
// polynomials and sets

#[derive(Serialize, Deserialize)]
pub struct TermJson {
    pub exp: Vec<u32>,
    pub coef: ValueRepr,
}

#[derive(Serialize, Deserialize)]
pub struct PolynomialJson {
    pub nvars: usize,
    pub terms: Vec<TermJson>,
}

#[derive(Serialize, Deserialize)]
pub struct SetJson {
    pub nvars: usize,
    pub inequalities: Vec<PolynomialJson>,
    #[serde(rename = "box")]
    pub bounds: Vec<[ValueRepr; 2]>,
}

pub fn polynomial_to_json<T: FromValueRepr>(p: &Polynomial<T>) -> PolynomialJson {
    PolynomialJson {
        nvars: p.nvars(),
        terms: p
            .terms()
            .map(|(idx, coef)| TermJson {
                exp: idx.exponents().to_vec(),
                coef: coef.to_repr(),
            })
            .collect(),
    }
}

pub fn polynomial_from_json<T: FromValueRepr>(
    json: &PolynomialJson,
) -> Result<Polynomial<T>, FormatError> {
    let mut terms = Vec::with_capacity(json.terms.len());
    for term in &json.terms {
        terms.push((MultiIndex::new(term.exp.clone()), T::from_repr(&term.coef)?));
    }
    Ok(Polynomial::from_terms(json.nvars, terms))
}

pub fn set_to_json<T: FromValueRepr>(set: &SemialgebraicSet<T>) -> SetJson {
    SetJson {
        nvars: set.nvars(),
        inequalities: set.inequalities().iter().map(polynomial_to_json).collect(),
        bounds: set
            .bounds()
            .iter()
            .map(|(lo, hi)| [lo.to_repr(), hi.to_repr()])
            .collect(),
    }
}

pub fn set_from_json<T: FromValueRepr>(
    json: &SetJson,
) -> Result<SemialgebraicSet<T>, FormatError> {
    let inequalities = json
        .inequalities
        .iter()
        .map(polynomial_from_json)
        .collect::<Result<Vec<_>, _>>()?;
    let bounds = json
        .bounds
        .iter()
        .map(|[lo, hi]| Ok((T::from_repr(lo)?, T::from_repr(hi)?)))
        .collect::<Result<Vec<_>, FormatError>>()?;
    Ok(SemialgebraicSet::new(json.nvars, inequalities, bounds)?)
}

// ---------------------------------------------------------------------------
// moment vectors and scenarios

#[derive(Serialize, Deserialize)]
pub struct MomentEntryJson {
    pub exp: Vec<u32>,
    pub value: ValueRepr,
}

#[derive(Serialize, Deserialize)]
pub struct MomentVectorJson {
    pub nvars: usize,
    pub max_order: u32,
    pub entries: Vec<MomentEntryJson>,
}

pub fn moment_vector_to_json<T: FromValueRepr>(v: &MomentVector<T>) -> MomentVectorJson {
    MomentVectorJson {
        nvars: v.nvars(),
        max_order: v.max_order(),
        entries: v
            .entries()
            .iter()
            .map(|(idx, value)| MomentEntryJson {
                exp: idx.exponents().to_vec(),
                value: value.to_repr(),
            })
            .collect(),
    }
}

pub fn moment_vector_from_json<T: FromValueRepr>(
    json: &MomentVectorJson,
) -> Result<MomentVector<T>, FormatError> {
    let mut entries = BTreeMap::new();
    for e in &json.entries {
        entries.insert(MultiIndex::new(e.exp.clone()), T::from_repr(&e.value)?);
    }
    let zero_entry_is_one = entries
        .get(&MultiIndex::zeros(json.nvars))
        .map(|v: &T| (v.clone() - T::one()).abs() <= T::from_ratio(1, 1_000_000_000))
        .unwrap_or(false);
    Ok(MomentVector::new(
        json.nvars,
        json.max_order,
        entries,
        zero_entry_is_one,
    )?)
}

#[derive(Serialize, Deserialize)]
pub struct AtomJson {
    pub s: Vec<ValueRepr>,
    pub w: ValueRepr,
}

#[derive(Serialize, Deserialize)]
pub struct ScenarioJson {
    pub a: ValueRepr,
    pub atoms: Vec<AtomJson>,
}

pub fn scenario_to_json<T: FromValueRepr>(sc: &MixtureScenario<T>) -> ScenarioJson {
    ScenarioJson {
        a: sc.box_weight.to_repr(),
        atoms: sc
            .atoms
            .iter()
            .map(|atom| AtomJson {
                s: atom.location.iter().map(FromValueRepr::to_repr).collect(),
                w: atom.weight.to_repr(),
            })
            .collect(),
    }
}

pub fn scenario_from_json<T: FromValueRepr>(
    json: &ScenarioJson,
) -> Result<MixtureScenario<T>, FormatError> {
    let atoms = json
        .atoms
        .iter()
        .map(|atom| {
            Ok(Atom {
                location: atom
                    .s
                    .iter()
                    .map(T::from_repr)
                    .collect::<Result<Vec<_>, _>>()?,
                weight: T::from_repr(&atom.w)?,
            })
        })
        .collect::<Result<Vec<_>, FormatError>>()?;
    Ok(MixtureScenario {
        box_weight: T::from_repr(&json.a)?,
        atoms,
    })
}

// ---------------------------------------------------------------------------
// detection reports

#[derive(Serialize, Deserialize)]
pub struct LevelJson {
    pub d: u32,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_eigenvalue: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub seconds: f64,
    /// `(selector bits, block order)` per included preordering product.
    pub blocks: Vec<(Vec<u8>, u32)>,
    pub skipped_terms: Vec<Vec<u8>>,
}

#[derive(Serialize, Deserialize)]
pub struct ReportJson {
    pub inputs: ReportInputsJson,
    pub dmax: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub linf_bound: Option<f64>,
    pub levels: Vec<LevelJson>,
    pub conclusion: ConclusionJson,
    pub indeterminate_levels: Vec<u32>,
    pub monotonicity_violation: bool,
    pub tolerances: TolerancesJson,
    pub localizing_order_convention: String,
}

#[derive(Serialize, Deserialize)]
pub struct ReportInputsJson {
    pub nvars: usize,
    pub num_inequalities: usize,
    #[serde(rename = "box")]
    pub bounds: Vec<[f64; 2]>,
    pub input_max_order: u32,
    pub lebesgue_max_order: u32,
}

#[derive(Serialize, Deserialize)]
pub struct TolerancesJson {
    pub feas_tol: f64,
    pub infeas_threshold: f64,
    pub completion_bound: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConclusionJson {
    NoDensityFrom { level: u32, moment_order: u32 },
    ConsistentUpTo { dmax: u32 },
    Inconclusive,
}

fn selector_bits(selector: &[bool]) -> Vec<u8> {
    selector.iter().map(|&b| u8::from(b)).collect()
}

pub fn report_to_json(report: &DetectionReport<f64>) -> ReportJson {
    ReportJson {
        inputs: ReportInputsJson {
            nvars: report.inputs.nvars,
            num_inequalities: report.inputs.num_inequalities,
            bounds: report.inputs.bounds.iter().map(|&(lo, hi)| [lo, hi]).collect(),
            input_max_order: report.inputs.input_max_order,
            lebesgue_max_order: report.inputs.lebesgue_max_order,
        },
        dmax: report.dmax,
        linf_bound: report.linf_bound,
        levels: report
            .levels
            .iter()
            .map(|l| {
                let (rho, min_eigenvalue, margin, reason) = match &l.status {
                    LevelStatus::Feasible {
                        rho,
                        min_eigenvalue,
                    } => (Some(*rho), Some(*min_eigenvalue), l.margin, None),
                    LevelStatus::Infeasible { margin } => {
                        (None, None, Some(*margin), None)
                    }
                    LevelStatus::Indeterminate { reason } => {
                        (None, None, l.margin, Some(reason.clone()))
                    }
                };
                LevelJson {
                    d: l.d,
                    status: l.status.name().to_string(),
                    rho,
                    min_eigenvalue,
                    margin,
                    reason,
                    seconds: l.seconds,
                    blocks: l
                        .block_inventory
                        .iter()
                        .map(|(sel, order)| (selector_bits(sel), *order))
                        .collect(),
                    skipped_terms: l.skipped_terms.iter().map(|s| selector_bits(s)).collect(),
                }
            })
            .collect(),
        conclusion: match report.conclusion {
            Conclusion::NoDensityFrom {
                level,
                moment_order,
            } => ConclusionJson::NoDensityFrom {
                level,
                moment_order,
            },
            Conclusion::ConsistentUpTo { dmax } => ConclusionJson::ConsistentUpTo { dmax },
            Conclusion::Inconclusive => ConclusionJson::Inconclusive,
        },
        indeterminate_levels: report.indeterminate_levels.clone(),
        monotonicity_violation: report.monotonicity_violation,
        tolerances: TolerancesJson {
            feas_tol: report.feas_tol,
            infeas_threshold: report.infeas_threshold,
            completion_bound: report.completion_bound,
        },
        localizing_order_convention: report.localizing_order_convention.to_string(),
    }
}
