//! Classical univariate baseline on `[0, 1]`: the finite-difference
//! conditions for bounded and `L_p` densities, an independent cross-check of
//! the semidefinite detector for one variable.
//!
//! From the raw moments `s_0, ..., s_n` the table holds
//! `s_{nj} = (-1)^{n-j} C(n, j) Δ^{n-j} s_j` — the mass the Bernstein basis
//! polynomial `C(n,j) x^j (1-x)^{n-j}` assigns to the underlying measure. A
//! bounded density forces `0 <= s_{nj} <= c/(n+1)`; an `L_p` density keeps
//! the discrete means `((1/(n+1)) Σ_j ((n+1) s_{nj})^p)^{1/p}` below its
//! norm.
//!
//! Iterated differencing amplifies input rounding by roughly the central
//! trinomial coefficient (`~ 3^n`): in double precision the table is
//! trustworthy only through `n` around 25-30, far short of where the
//! interesting checks live. The whole module is therefore generic over the
//! scalar: run it over exact rationals (`BigRational`) for anything deep,
//! and reserve `f64` for shallow scans of clearly separated cases.

use crate::scalar::{Real, Scalar};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum HausdorffError {
    #[error("moment sequence is empty")]
    Empty,
    #[error("zero-order moment is {got}, expected 1")]
    NotNormalized { got: String },
    #[error("n_max {requested} exceeds the provided sequence (length {len})")]
    NotEnoughMoments { requested: usize, len: usize },
}

/// Triangular table of the Bernstein-basis masses `s_{nj}`.
#[derive(Clone, Debug, PartialEq)]
pub struct DifferenceTable<T> {
    rows: Vec<Vec<T>>,
}

impl<T: Scalar> DifferenceTable<T> {
    pub fn n_max(&self) -> usize {
        self.rows.len() - 1
    }

    /// `s_{nj}` for `0 <= j <= n <= n_max`.
    pub fn get(&self, n: usize, j: usize) -> &T {
        &self.rows[n][j]
    }

    pub fn row(&self, n: usize) -> &[T] {
        &self.rows[n]
    }
}

/// Builds the table by iterated forward differences, row by row:
/// `D[r][j] = Δ^r s_j` accumulated from `D[r-1]`, then
/// `s_{nj} = (-1)^{n-j} C(n,j) D[n-j][j]`. Exact over rational scalars.
pub fn difference_table<T: Scalar>(s: &[T]) -> Result<DifferenceTable<T>, HausdorffError> {
    if s.is_empty() {
        return Err(HausdorffError::Empty);
    }
    let n_max = s.len() - 1;
    // diffs[r][j] = Δ^r s_j, built iteratively
    let mut diffs: Vec<Vec<T>> = Vec::with_capacity(n_max + 1);
    diffs.push(s.to_vec());
    for r in 1..=n_max {
        let prev = &diffs[r - 1];
        let row: Vec<T> = (0..prev.len() - 1)
            .map(|j| prev[j + 1].clone() - prev[j].clone())
            .collect();
        diffs.push(row);
    }
    let mut rows = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let mut row = Vec::with_capacity(n + 1);
        // C(n, j) built multiplicatively along the row
        let mut binom = T::one();
        for j in 0..=n {
            if j > 0 {
                binom = binom * T::from_int((n - j + 1) as i64) / T::from_int(j as i64);
            }
            let diff = diffs[n - j][j].clone();
            let signed = if (n - j) % 2 == 0 { diff } else { -diff };
            row.push(binom.clone() * signed);
        }
        rows.push(row);
    }
    Ok(DifferenceTable { rows })
}

/// Verdict of the bounded-density check.
#[derive(Clone, Debug, PartialEq)]
pub enum MarkovVerdict<T> {
    Pass,
    Fail {
        n: usize,
        j: usize,
        value: T,
        bound: T,
    },
}

impl<T> MarkovVerdict<T> {
    pub fn passed(&self) -> bool {
        matches!(self, MarkovVerdict::Pass)
    }
}

fn check_normalized<T: Scalar>(s: &[T]) -> Result<(), HausdorffError> {
    match s.first() {
        None => Err(HausdorffError::Empty),
        Some(v) if (v.clone() - T::one()).abs() > T::from_ratio(1, 1_000_000_000) => {
            Err(HausdorffError::NotNormalized {
                got: format!("{}", v),
            })
        }
        _ => Ok(()),
    }
}

/// Scans `0 <= s_{nj} <= c/(n+1)` in increasing `n` (then `j`), reporting
/// the first violation beyond the 1e-10 tolerance band.
pub fn check_markov<T: Scalar>(
    s: &[T],
    c: &T,
    n_max: usize,
) -> Result<MarkovVerdict<T>, HausdorffError> {
    check_normalized(s)?;
    if n_max + 1 > s.len() {
        return Err(HausdorffError::NotEnoughMoments {
            requested: n_max,
            len: s.len(),
        });
    }
    let table = difference_table(&s[..=n_max])?;
    let tol = T::from_ratio(1, 10_000_000_000);
    for n in 0..=n_max {
        let bound = c.clone() / T::from_int((n + 1) as i64);
        for (j, v) in table.row(n).iter().enumerate() {
            if *v < -tol.clone() || v.clone() - bound.clone() > tol {
                return Ok(MarkovVerdict::Fail {
                    n,
                    j,
                    value: v.clone(),
                    bound,
                });
            }
        }
    }
    Ok(MarkovVerdict::Pass)
}

/// Verdict of the `L_p` mean check.
#[derive(Clone, Debug, PartialEq)]
pub enum LpVerdict<T> {
    Pass {
        /// Largest discrete mean observed (its `p`-th power in the exact
        /// integer-`p` variant).
        sup_mean: T,
    },
    Fail {
        n: usize,
        value: T,
    },
    /// A negative table entry: the sequence is not a moment sequence of a
    /// nonnegative measure, reported distinctly from an `L_p` failure.
    NotPositive {
        n: usize,
        j: usize,
        value: T,
    },
}

impl<T> LpVerdict<T> {
    pub fn passed(&self) -> bool {
        matches!(self, LpVerdict::Pass { .. })
    }
}

/// Computes `r_n = ((1/(n+1)) Σ_j ((n+1) s_{nj})^p)^{1/p}` and fails at the
/// first `r_n >= c - 1e-10` (the strict-inequality condition at working
/// tolerance).
pub fn check_lp<T: Real>(
    s: &[T],
    p: T,
    c: &T,
    n_max: usize,
) -> Result<LpVerdict<T>, HausdorffError> {
    check_normalized(s)?;
    if n_max + 1 > s.len() {
        return Err(HausdorffError::NotEnoughMoments {
            requested: n_max,
            len: s.len(),
        });
    }
    let table = difference_table(&s[..=n_max])?;
    let tol = T::from_f64(1e-10).unwrap();
    let mut sup_mean = T::zero();
    for n in 0..=n_max {
        let scale = T::from_usize(n + 1).unwrap();
        let mut acc = T::zero();
        for (j, v) in table.row(n).iter().enumerate() {
            if *v < -tol {
                return Ok(LpVerdict::NotPositive { n, j, value: *v });
            }
            let clamped = if *v < T::zero() { T::zero() } else { *v };
            acc = acc + (scale * clamped).powf(p);
        }
        let mean = (acc / scale).powf(T::one() / p);
        if mean > sup_mean {
            sup_mean = mean;
        }
        if mean >= *c - tol {
            return Ok(LpVerdict::Fail { n, value: mean });
        }
    }
    Ok(LpVerdict::Pass { sup_mean })
}

/// Exact variant of [`check_lp`] for integer `p >= 1`: compares `p`-th
/// powers instead of taking roots, so no rounding enters anywhere.
pub fn check_lp_integer<T: Scalar>(
    s: &[T],
    p: u32,
    c: &T,
    n_max: usize,
) -> Result<LpVerdict<T>, HausdorffError> {
    check_normalized(s)?;
    if n_max + 1 > s.len() {
        return Err(HausdorffError::NotEnoughMoments {
            requested: n_max,
            len: s.len(),
        });
    }
    let table = difference_table(&s[..=n_max])?;
    let tol = T::from_ratio(1, 10_000_000_000);
    let mut sup_mean_pow = T::zero();
    for n in 0..=n_max {
        let scale = T::from_int((n + 1) as i64);
        let mut acc = T::zero();
        for (j, v) in table.row(n).iter().enumerate() {
            if v.clone() < -tol.clone() {
                return Ok(LpVerdict::NotPositive {
                    n,
                    j,
                    value: v.clone(),
                });
            }
            let clamped = if *v < T::zero() { T::zero() } else { v.clone() };
            acc = acc + (scale.clone() * clamped).powu(p);
        }
        let mean_pow = acc / scale;
        if mean_pow > sup_mean_pow {
            sup_mean_pow = mean_pow.clone();
        }
        // r_n >= c - tol  <=>  r_n^p >= (c - tol)^p for nonnegative sides
        let threshold = (c.clone() - tol.clone()).powu(p);
        if mean_pow >= threshold {
            return Ok(LpVerdict::Fail { n, value: mean_pow });
        }
    }
    Ok(LpVerdict::Pass {
        sup_mean: sup_mean_pow,
    })
}
