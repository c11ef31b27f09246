//! Exact rational arithmetic helpers.
//!
//! All geometry and expectation code works over `Rat` (arbitrary-precision
//! rationals). Floating point only appears in reports and in the Lambert-W
//! tuning code, never in predicates.

use alloc::string::String;
use core::fmt::Write as _;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rat = num_rational::Ratio<BigInt>;

pub fn rat_i64(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// σ^e for non-negative integer exponents.
pub fn rat_pow(base: &Rat, exp: u32) -> Rat {
    let mut acc = Rat::one();
    for _ in 0..exp {
        acc *= base;
    }
    acc
}

pub fn big_pow(base: &BigInt, exp: u32) -> BigInt {
    let mut acc = BigInt::one();
    for _ in 0..exp {
        acc *= base;
    }
    acc
}

/// Smallest integer `t >= 0` with `2^t >= x`, by exact comparison.
/// Returns `None` for `x <= 0`.
pub fn ceil_log2(x: &Rat) -> Option<u32> {
    if x.is_zero() || x.is_negative() {
        return None;
    }
    let mut t = 0u32;
    let mut pow = Rat::one();
    let two = rat_i64(2);
    while pow < *x {
        pow *= &two;
        t += 1;
    }
    Some(t)
}

/// Smallest integer `c >= 1` with `c^k >= x` (exact); `x` must be >= 1.
pub fn ceil_kth_root(x: &Rat, k: u32) -> Option<BigInt> {
    if *x < Rat::one() || k == 0 {
        return None;
    }
    // x <= sigma values in practice are small; linear scan with doubling guard.
    let mut lo = BigInt::one();
    let mut hi = BigInt::from(2);
    while Rat::from_integer(big_pow(&hi, k)) < *x {
        lo = hi.clone();
        hi *= 2;
    }
    // binary search smallest c in (lo, hi] with c^k >= x
    while &lo + 1i32 < hi {
        let mid: BigInt = (&lo + &hi) / 2;
        if Rat::from_integer(big_pow(&mid, k)) >= *x {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    if Rat::from_integer(big_pow(&lo, k)) >= *x {
        Some(lo)
    } else {
        Some(hi)
    }
}

/// Parses a rational literal: `num/den`, an integer, or a decimal literal
/// (parsed exactly, e.g. `-1.25` -> -5/4).
pub fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((n, d)) = s.split_once('/') {
        let num: BigInt = n.trim().parse().ok()?;
        let den: BigInt = d.trim().parse().ok()?;
        if den.is_zero() {
            return None;
        }
        return Some(Rat::new(num, den));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        let neg = int_part.starts_with('-');
        let int_digits = int_part.strip_prefix(['-', '+']).unwrap_or(int_part);
        let int_val: BigInt = if int_digits.is_empty() {
            BigInt::zero()
        } else {
            int_digits.parse().ok()?
        };
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let frac_val: BigInt = frac_part.parse().ok()?;
        let scale = big_pow(&BigInt::from(10), frac_part.len() as u32);
        let mut v = Rat::new(int_val * &scale + frac_val, scale);
        if neg {
            v = -v;
        }
        return Some(v);
    }
    let num: BigInt = s.parse().ok()?;
    Some(Rat::from_integer(num))
}

/// Renders a rational in canonical `num/den` form (`num` alone for integers).
pub fn format_rat(x: &Rat) -> String {
    let mut s = String::new();
    if x.denom().is_one() {
        let _ = write!(s, "{}", x.numer());
    } else {
        let _ = write!(s, "{}/{}", x.numer(), x.denom());
    }
    s
}

/// Exact decimal rendering with `digits` digits after the point, rounded
/// half-away-from-zero. Deterministic across platforms (no float formatting).
pub fn rat_to_decimal(x: &Rat, digits: u32) -> String {
    let neg = x.is_negative();
    let abs = x.abs();
    let scale = big_pow(&BigInt::from(10), digits);
    // round(abs * 10^digits)
    let scaled = abs * Rat::from_integer(scale.clone());
    let (mut q, r) = scaled.numer().div_rem(scaled.denom());
    if &r * 2i32 >= *scaled.denom() {
        q += 1i32;
    }
    let (int_part, frac_part) = q.div_rem(&scale);
    let mut out = String::new();
    if neg && !(int_part.is_zero() && frac_part.is_zero()) {
        out.push('-');
    }
    let _ = write!(out, "{int_part}");
    if digits > 0 {
        let frac = frac_part.magnitude().to_str_radix(10);
        out.push('.');
        for _ in frac.len()..digits as usize {
            out.push('0');
        }
        out.push_str(&frac);
    }
    out
}

pub fn rat_to_f64(x: &Rat) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

pub fn rat_from_f64_approx(x: f64, den: u64) -> Rat {
    let num = libm::round(x * den as f64) as i64;
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// Least common multiple of the coordinate denominators, used to rescale an
/// instance onto integer coordinates for the fast policy-simulation path.
pub fn common_denominator<'a>(values: impl Iterator<Item = &'a Rat>) -> BigInt {
    let mut acc = BigInt::one();
    for v in values {
        acc = acc.lcm(v.denom());
    }
    acc
}

/// Scales `x` by `denom` (which must be a multiple of `x.denom()`) to an
/// integer, returning `None` if it does not fit in i128.
pub fn scale_to_i128(x: &Rat, denom: &BigInt) -> Option<i128> {
    let scaled = (denom / x.denom()) * x.numer();
    scaled.to_i128()
}

pub fn bigint_to_string(x: &BigInt) -> String {
    let mut s = String::new();
    let _ = write!(s, "{x}");
    s
}

pub fn biguint_to_string(x: &BigUint) -> String {
    let mut s = String::new();
    let _ = write!(s, "{x}");
    s
}

pub fn bigint_sign(x: &BigInt) -> i32 {
    match x.sign() {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    #[test]
    fn decimal_literals_parse_exactly() {
        assert_eq!(parse_rat("2.651").unwrap(), rat(2651, 1000));
        assert_eq!(parse_rat("-1.2").unwrap(), rat(-6, 5));
        assert_eq!(parse_rat("32/15").unwrap(), rat(32, 15));
        assert_eq!(parse_rat("7").unwrap(), rat_i64(7));
        assert_eq!(parse_rat("0.1").unwrap(), rat(1, 10));
        assert!(parse_rat("1.2.3").is_none());
        assert!(parse_rat("1/0").is_none());
    }

    #[test]
    fn decimal_rendering_rounds_exactly() {
        assert_eq!(rat_to_decimal(&rat(729, 275), 6), "2.650909");
        assert_eq!(rat_to_decimal(&rat(16, 5), 6), "3.200000");
        assert_eq!(rat_to_decimal(&rat(-1, 3), 3), "-0.333");
        assert_eq!(rat_to_decimal(&rat(1, 2), 0), "1");
    }

    #[test]
    fn ceil_helpers_are_exact() {
        assert_eq!(ceil_log2(&rat_i64(1)), Some(0));
        assert_eq!(ceil_log2(&rat_i64(2)), Some(1));
        assert_eq!(ceil_log2(&rat_i64(3)), Some(2));
        assert_eq!(ceil_log2(&rat_i64(1024)), Some(10));
        assert_eq!(ceil_log2(&rat(5, 2)), Some(2));
        assert_eq!(ceil_kth_root(&rat_i64(16), 4), Some(BigInt::from(2)));
        assert_eq!(ceil_kth_root(&rat_i64(17), 4), Some(BigInt::from(3)));
        assert_eq!(ceil_kth_root(&rat(5, 2), 1), Some(BigInt::from(3)));
    }

    #[test]
    fn pow_and_lcm() {
        assert_eq!(rat_pow(&rat(3, 2), 2), rat(9, 4));
        let xs = [rat(1, 10), rat(3, 4), rat_i64(2)];
        assert_eq!(common_denominator(xs.iter()).to_string(), "20");
        assert_eq!(scale_to_i128(&rat(3, 4), &BigInt::from(20)), Some(15));
    }
}
