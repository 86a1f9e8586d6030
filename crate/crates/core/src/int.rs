//! The exact integer type used for lattice coordinates and polynomial
//! coefficients.
//!
//! By default this is `i128` with checked arithmetic; every operation that
//! could wrap returns [`Error::Overflow`] instead. Enabling the `bigint`
//! feature swaps in `num_bigint::BigInt`, for which the checked operations
//! never fail.

use crate::error::{Error, Result};

#[cfg(not(feature = "bigint"))]
pub type Int = i128;

#[cfg(feature = "bigint")]
pub type Int = num_bigint::BigInt;

/// Checked arithmetic shared by both integer backends.
pub trait CheckedInt: Sized {
    fn c_add(&self, rhs: &Self) -> Result<Self>;
    fn c_sub(&self, rhs: &Self) -> Result<Self>;
    fn c_mul(&self, rhs: &Self) -> Result<Self>;
    fn c_neg(&self) -> Result<Self>;
    fn from_i64(v: i64) -> Self;
    fn to_i64(&self) -> Result<i64>;
    fn is_zero_int(&self) -> bool;
}

impl CheckedInt for i128 {
    fn c_add(&self, rhs: &Self) -> Result<Self> {
        self.checked_add(*rhs).ok_or(Error::Overflow("add"))
    }
    fn c_sub(&self, rhs: &Self) -> Result<Self> {
        self.checked_sub(*rhs).ok_or(Error::Overflow("sub"))
    }
    fn c_mul(&self, rhs: &Self) -> Result<Self> {
        self.checked_mul(*rhs).ok_or(Error::Overflow("mul"))
    }
    fn c_neg(&self) -> Result<Self> {
        self.checked_neg().ok_or(Error::Overflow("neg"))
    }
    fn from_i64(v: i64) -> Self {
        v as i128
    }
    fn to_i64(&self) -> Result<i64> {
        i64::try_from(*self).map_err(|_| Error::Overflow("conversion to i64"))
    }
    fn is_zero_int(&self) -> bool {
        *self == 0
    }
}

#[cfg(feature = "bigint")]
impl CheckedInt for num_bigint::BigInt {
    fn c_add(&self, rhs: &Self) -> Result<Self> {
        Ok(self + rhs)
    }
    fn c_sub(&self, rhs: &Self) -> Result<Self> {
        Ok(self - rhs)
    }
    fn c_mul(&self, rhs: &Self) -> Result<Self> {
        Ok(self * rhs)
    }
    fn c_neg(&self) -> Result<Self> {
        Ok(-self)
    }
    fn from_i64(v: i64) -> Self {
        Self::from(v)
    }
    fn to_i64(&self) -> Result<i64> {
        num_traits::ToPrimitive::to_i64(self).ok_or(Error::Overflow("conversion to i64"))
    }
    fn is_zero_int(&self) -> bool {
        num_traits::Zero::is_zero(self)
    }
}

/// Shorthand for `Int::from_i64`.
pub fn int(v: i64) -> Int {
    <Int as CheckedInt>::from_i64(v)
}

/// Exact `n!` as an [`Int`].
pub fn factorial(n: u32) -> Result<Int> {
    let mut acc = int(1);
    for k in 2..=n {
        acc = acc.c_mul(&int(k as i64))?;
    }
    Ok(acc)
}

/// Exact binomial coefficient `C(n, k)`.
pub fn binomial(n: u32, k: u32) -> Result<Int> {
    if k > n {
        return Ok(int(0));
    }
    let k = k.min(n - k);
    let mut acc = int(1);
    for i in 0..k {
        // acc * (n - i) is always divisible by (i + 1) here.
        acc = acc.c_mul(&int((n - i) as i64))?;
        acc = div_exact(&acc, &int((i + 1) as i64));
    }
    Ok(acc)
}

/// Integer power with overflow checking.
pub fn pow(base: &Int, exp: u32) -> Result<Int> {
    let mut acc = int(1);
    for _ in 0..exp {
        acc = acc.c_mul(base)?;
    }
    Ok(acc)
}

fn div_exact(a: &Int, b: &Int) -> Int {
    a / b
}

/// Rendering helper that works for both backends.
pub fn int_to_string(v: &Int) -> String {
    v.to_string()
}

/// Parses a decimal integer for either backend.
pub fn parse_int(s: &str) -> Result<Int> {
    s.parse::<Int>()
        .map_err(|_| Error::InvalidArgument(format!("not an integer: {s}")))
}

/// Converts an unsigned count into an [`Int`].
pub fn int_from_u128(v: u128) -> Result<Int> {
    #[cfg(not(feature = "bigint"))]
    {
        i128::try_from(v).map_err(|_| Error::Overflow("conversion from u128"))
    }
    #[cfg(feature = "bigint")]
    {
        Ok(num_bigint::BigInt::from(v))
    }
}
