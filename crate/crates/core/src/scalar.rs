//! Scalar abstraction for the coefficient/moment arithmetic.
//!
//! Everything structural (multi-indices, polynomial arithmetic, moment
//! generation, matrix assembly, difference tables) is generic over [`Scalar`]
//! so it can run both in floating point and in exact rational arithmetic.
//! The numerical pieces that genuinely need square roots and transcendental
//! functions (the interior-point solver, eigenvalue routines, the L_p mean)
//! require the stronger [`Real`] bound, satisfied by `f32` and `f64`.

use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};
use std::fmt::{Debug, Display};

/// Field-like scalar: enough arithmetic for exact moment computations.
pub trait Scalar:
    Num + Signed + FromPrimitive + ToPrimitive + Clone + PartialOrd + Debug + Display + 'static
{
    fn from_int(v: i64) -> Self {
        Self::from_i64(v).expect("integer out of range for scalar type")
    }

    /// Exact ratio `n/d` where the scalar type permits it.
    fn from_ratio(n: i64, d: i64) -> Self {
        Self::from_int(n) / Self::from_int(d)
    }

    /// Lossy view for diagnostics and cross-mode comparisons.
    fn to_f64_approx(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Nonnegative integer power by repeated squaring.
    fn powu(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            e >>= 1;
            if e > 0 {
                base = base.clone() * base;
            }
        }
        acc
    }
}

/// Floating-point scalar usable by the solver and eigenvalue routines.
pub trait Real: Scalar + num_traits::Float {}

impl Scalar for f64 {
    fn to_f64_approx(&self) -> f64 {
        *self
    }
}
impl Scalar for f32 {
    fn to_f64_approx(&self) -> f64 {
        f64::from(*self)
    }
}
impl Real for f64 {}
impl Real for f32 {}

impl Scalar for num_rational::BigRational {}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    #[test]
    fn ratio_construction() {
        let x = <BigRational as Scalar>::from_ratio(1, 3);
        assert_eq!(x * BigRational::from_int(3), BigRational::one());
        let y = <f64 as Scalar>::from_ratio(1, 4);
        assert_eq!(y, 0.25);
    }

    #[test]
    fn integer_power() {
        assert_eq!(2.0f64.powu(10), 1024.0);
        let r = <BigRational as Scalar>::from_ratio(2, 3).powu(3);
        assert_eq!(r, <BigRational as Scalar>::from_ratio(8, 27));
        assert_eq!(0.0f64.powu(0), 1.0);
    }

    use num_traits::One;
}
