//! Small helpers around [`BigRational`].

use num_bigint::BigInt;
use num_rational::BigRational;

/// An integer-valued rational.
pub fn q(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// `num / den`, normalized. Panics if `den == 0`.
pub fn frac(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Renders `num/den`, always with a denominator.
pub fn display(v: &BigRational) -> String {
    format!("{}/{}", v.numer(), v.denom())
}
