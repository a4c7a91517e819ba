use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive, Zero};

/// Numeric type the simplex and branch-and-bound routines run on.
///
/// Implemented for `f32`, `f64` and exact `BigRational`. The solver only needs
/// field arithmetic, ordering, and a floor for branching.
pub trait Scalar:
    Clone + Debug + Display + PartialOrd + Num + Signed + FromPrimitive + ToPrimitive + Send + Sync
{
    /// Smallest tolerance that is meaningful for this type. Configured
    /// tolerances below it are raised to it.
    const TOLERANCE_FLOOR: f64;

    fn floor(&self) -> Self;

    fn ceil(&self) -> Self {
        let f = self.floor();
        if &f == self {
            f
        } else {
            f + Self::one()
        }
    }

    /// Converts a configured `f64` (tolerance, bound) into this type.
    fn from_config(value: f64) -> Self {
        Self::from_f64(value).expect("finite configuration value")
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }
}

impl Scalar for f64 {
    const TOLERANCE_FLOOR: f64 = 0.0;

    fn floor(&self) -> Self {
        f64::floor(*self)
    }

    fn ceil(&self) -> Self {
        f64::ceil(*self)
    }
}

impl Scalar for f32 {
    const TOLERANCE_FLOOR: f64 = 1e-4;

    fn floor(&self) -> Self {
        f32::floor(*self)
    }

    fn ceil(&self) -> Self {
        f32::ceil(*self)
    }
}

impl Scalar for BigRational {
    const TOLERANCE_FLOOR: f64 = 0.0;

    fn floor(&self) -> Self {
        BigRational::floor(self)
    }

    fn ceil(&self) -> Self {
        BigRational::ceil(self)
    }

    fn from_config(value: f64) -> Self {
        if value == 0.0 {
            return BigRational::zero();
        }
        BigRational::from_float(value).expect("finite configuration value")
    }
}

/// Exact rational from a numerator/denominator pair, handy for building
/// rational test instances.
pub fn ratio(numer: i64, denom: i64) -> BigRational {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floor_and_ceil_agree_across_types() {
        assert_eq!(Scalar::floor(&2.5f64), 2.0);
        assert_eq!(Scalar::ceil(&2.5f32), 3.0);
        assert_eq!(Scalar::floor(&ratio(-5, 2)), ratio(-3, 1));
        assert_eq!(Scalar::ceil(&ratio(5, 2)), ratio(3, 1));
        assert_eq!(Scalar::ceil(&ratio(4, 2)), ratio(2, 1));
    }

    #[test]
    fn rational_config_values_are_exact_binary_fractions() {
        assert_eq!(BigRational::from_config(0.5), ratio(1, 2));
        assert!(BigRational::from_config(1e-7) > BigRational::zero());
    }
}
