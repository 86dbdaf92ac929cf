//! Scalar abstraction shared by every numeric routine in the crate.
//!
//! Floating-point types carry a positive comparison tolerance; the exact
//! rational type compares with tolerance zero, so identities such as
//! `‖T(u₀)‖ = ‖T‖` are checked literally.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive, Zero};

/// Number type the lattice, operator and solver code is generic over.
pub trait Scalar:
    Clone
    + Debug
    + Display
    + PartialOrd
    + Num
    + Signed
    + FromPrimitive
    + ToPrimitive
    + Send
    + Sync
    + 'static
{
    /// `true` when arithmetic is exact (no rounding).
    const EXACT: bool;

    /// Short tag used in reports (`"f64"`, `"rational"`, ...).
    const NAME: &'static str;

    /// Converts a finite `f64`. Exact types represent the binary value exactly.
    ///
    /// Panics on NaN or infinity.
    fn lift(v: f64) -> Self;

    /// Nearest `f64`, for reporting and for routines that are inherently real-valued.
    fn approx(&self) -> f64;

    fn is_finite_value(&self) -> bool;

    /// Comparison slack used by assertions when no explicit tolerance is given.
    fn default_tol() -> Self;

    /// `|self|^p`. Only meaningful for inexact types; exact types use the f64 route.
    fn abs_powf(&self, p: f64) -> Self {
        Self::lift(self.approx().abs().powf(p))
    }

    /// `self^(1/p)` for `self ≥ 0`.
    fn root(&self, p: f64) -> Self {
        Self::lift(self.approx().powf(1.0 / p))
    }

    fn of_usize(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("usize is representable")
    }

    fn two() -> Self {
        Self::one() + Self::one()
    }

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }

    fn min_of(a: Self, b: Self) -> Self {
        if b < a {
            b
        } else {
            a
        }
    }
}

macro_rules! float_scalar {
    ($t:ty, $name:expr, $tol:expr) => {
        impl Scalar for $t {
            const EXACT: bool = false;
            const NAME: &'static str = $name;

            fn lift(v: f64) -> Self {
                assert!(v.is_finite(), "non-finite scalar {v}");
                v as $t
            }

            fn approx(&self) -> f64 {
                *self as f64
            }

            fn is_finite_value(&self) -> bool {
                self.is_finite()
            }

            fn default_tol() -> Self {
                $tol
            }

            fn abs_powf(&self, p: f64) -> Self {
                self.abs().powf(p as $t)
            }

            fn root(&self, p: f64) -> Self {
                self.powf(1.0 / p as $t)
            }
        }
    };
}

float_scalar!(f64, "f64", 1e-9);
float_scalar!(f32, "f32", 1e-4);

impl Scalar for BigRational {
    const EXACT: bool = true;
    const NAME: &'static str = "rational";

    fn lift(v: f64) -> Self {
        BigRational::from_float(v).unwrap_or_else(|| panic!("non-finite scalar {v}"))
    }

    fn approx(&self) -> f64 {
        self.to_f64().unwrap_or_else(|| {
            // Oversized numerator/denominator: fall back to a ratio of approximations.
            let n = self.numer().to_f64().unwrap_or(f64::NAN);
            let d = self.denom().to_f64().unwrap_or(f64::NAN);
            n / d
        })
    }

    fn is_finite_value(&self) -> bool {
        true
    }

    fn default_tol() -> Self {
        BigRational::zero()
    }
}

/// Builds an exact rational `numer / denom`.
pub fn ratio(numer: i64, denom: i64) -> BigRational {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Converts between scalar types through the exact value where possible.
///
/// f64 → rational is exact; rational → f64 rounds.
pub fn convert<A: Scalar, B: Scalar>(a: &A) -> B {
    B::lift(a.approx())
}
