//! Exact arbitrary-precision rational scalars.
//!
//! Every geometric predicate in this crate is evaluated over `Scalar`
//! (a reduced `BigRational` with positive denominator), so results are
//! bit-exact and independent of evaluation order.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Scalar = BigRational;

pub fn int(n: i64) -> Scalar {
    BigRational::from_integer(BigInt::from(n))
}

pub fn rat(num: i64, den: i64) -> Scalar {
    assert!(den != 0, "zero denominator");
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn big(n: BigInt) -> Scalar {
    BigRational::from_integer(n)
}

/// Sign of a scalar as -1 / 0 / +1.
pub fn sgn(x: &Scalar) -> i8 {
    if x.is_zero() {
        0
    } else if x.is_positive() {
        1
    } else {
        -1
    }
}

pub fn sgn_int(x: &BigInt) -> i8 {
    if x.is_zero() {
        0
    } else if x.is_positive() {
        1
    } else {
        -1
    }
}

/// Index of the most significant bit of a positive integer:
/// `msb(1) = 0`, `msb(2) = msb(3) = 1`, i.e. `2^msb(x) <= x < 2^(msb(x)+1)`.
pub fn msb(x: &BigInt) -> u64 {
    assert!(x.is_positive(), "msb of non-positive value");
    x.bits() - 1
}

/// Smallest integer `i` with `x <= y * 2^i`, for positive `x`, `y`.
/// This is `ceil(log2(x/y))` evaluated exactly.
pub fn ceil_log2_ratio(x: &BigInt, y: &BigInt) -> i64 {
    assert!(x.is_positive() && y.is_positive());
    // Start from the bit-length estimate and correct by at most one step
    // in each direction.
    let mut i = x.bits() as i64 - y.bits() as i64;
    while shifted_ge(y, i, x) && !shifted_ge(y, i - 1, x) {
        return i;
    }
    if shifted_ge(y, i, x) {
        while shifted_ge(y, i - 1, x) {
            i -= 1;
        }
    } else {
        while !shifted_ge(y, i, x) {
            i += 1;
        }
    }
    i
}

/// `y * 2^i >= x` with `i` possibly negative.
fn shifted_ge(y: &BigInt, i: i64, x: &BigInt) -> bool {
    if i >= 0 {
        (y << i as u64) >= *x
    } else {
        *y >= (x << (-i) as u64)
    }
}

/// `2^i` as a big integer for `i >= 0`.
pub fn pow2(i: u64) -> BigInt {
    BigInt::one() << i
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sign_helpers() {
        assert_eq!(sgn(&int(-7)), -1);
        assert_eq!(sgn(&int(0)), 0);
        assert_eq!(sgn(&rat(1, 9)), 1);
    }

    #[test]
    fn msb_small() {
        assert_eq!(msb(&BigInt::from(1)), 0);
        assert_eq!(msb(&BigInt::from(2)), 1);
        assert_eq!(msb(&BigInt::from(3)), 1);
        assert_eq!(msb(&BigInt::from(1024)), 10);
        assert_eq!(msb(&BigInt::from(1025)), 10);
    }

    #[test]
    fn ceil_log2_ratio_exact() {
        // ceil(log2(8/1)) = 3, ceil(log2(9/1)) = 4, ceil(log2(1/8)) = -3,
        // ceil(log2(3/2)) = 1, ceil(log2(1/1)) = 0.
        let b = |n: i64| BigInt::from(n);
        assert_eq!(ceil_log2_ratio(&b(8), &b(1)), 3);
        assert_eq!(ceil_log2_ratio(&b(9), &b(1)), 4);
        assert_eq!(ceil_log2_ratio(&b(1), &b(8)), -3);
        assert_eq!(ceil_log2_ratio(&b(3), &b(2)), 1);
        assert_eq!(ceil_log2_ratio(&b(1), &b(1)), 0);
        assert_eq!(ceil_log2_ratio(&b(5), &b(3)), 1);
    }
}
