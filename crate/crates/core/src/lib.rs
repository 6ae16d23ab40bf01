//! Decide, from finitely many moments, whether a measure on a compact
//! semi-algebraic set can have a density with respect to Lebesgue measure.
//!
//! The pipeline: describe the set and its reference box ([`polybasis`]),
//! generate or load truncated moment sequences ([`measures`]), assemble the
//! level-`d` feasibility programs built from moment and localizing matrices
//! ([`momentmatrix`], [`hierarchy`]), and decide them with a dense
//! semidefinite solver ([`sdp`]). Infeasibility at level `d` certifies that
//! no representing measure with an `L_p` density exists for any `p >= 2d`.
//! The univariate finite-difference conditions ([`hausdorff`]) provide an
//! independent classical baseline on `[0, 1]`.
//!
//! Core arithmetic is generic over the scalar type: `f64` for production
//! solves, exact rationals (`num_rational::BigRational`) where tests and
//! certificates need arithmetic without rounding.

// index-based loops mirror the matrix formulas; `!(a < b)` deliberately
// rejects NaN alongside the ordered failure cases
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod hausdorff;
pub mod hierarchy;
pub mod io;
pub mod linalg;
pub mod measures;
pub mod momentmatrix;
pub mod polybasis;
pub mod scalar;
pub mod sdp;

pub use num_rational::BigRational;
pub use num_traits;

pub use polybasis::{MultiIndex, Polynomial, PreorderingTerm, SemialgebraicSet};
pub use scalar::{Real, Scalar};

/// Concrete aliases for the two scalar modes in common use.
pub type Poly64 = Polynomial<f64>;
pub type PolyExact = Polynomial<BigRational>;
pub type Set64 = SemialgebraicSet<f64>;
pub type SetExact = SemialgebraicSet<BigRational>;
pub type MomentVec64 = measures::MomentVector<f64>;
pub type MomentVecExact = measures::MomentVector<BigRational>;
pub type SdpProblem64 = sdp::SdpProblem<f64>;
pub type DetectionReport64 = hierarchy::DetectionReport<f64>;
