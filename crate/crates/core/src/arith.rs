//! Exact-arithmetic helpers shared by the combinatorial modules.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub fn factorial(n: u64) -> BigUint {
    (2..=n).fold(BigUint::one(), |acc, k| acc * k)
}

/// `n (n-1) ... (n-k+1)`; one when `k = 0`.
pub fn falling_factorial(n: u64, k: u64) -> BigUint {
    assert!(k <= n, "falling factorial {n}_({k})");
    (n - k + 1..=n).fold(BigUint::one(), |acc, x| acc * x)
}

/// `(sum parts)! / prod (part!)`.
pub fn multinomial(parts: impl IntoIterator<Item = u64>) -> BigUint {
    let mut total = 0u64;
    let mut den = BigUint::one();
    for p in parts {
        total += p;
        den *= factorial(p);
    }
    factorial(total) / den
}

pub fn rational(num: impl Into<BigInt>, den: impl Into<BigInt>) -> BigRational {
    BigRational::new(num.into(), den.into())
}

pub fn from_uint(x: BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

pub fn to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    match r.to_f64() {
        Some(v) if v.is_finite() => v,
        _ => {
            // numerator and denominator too large for f64 individually
            let shift = r.numer().bits().max(r.denom().bits()).saturating_sub(1000);
            let n = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
            let d = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
            n / d
        }
    }
}

/// Formats as `a/b`, or `a` for integers.
pub fn format_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `a/b` or `a`; rejects zero denominators.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((a, b)) => {
            let num: BigInt = a.trim().parse().ok()?;
            let den: BigInt = b.trim().parse().ok()?;
            (!den.is_zero()).then(|| BigRational::new(num, den))
        }
        None => s.parse::<BigInt>().ok().map(BigRational::from_integer),
    }
}

pub fn abs_diff(a: &BigRational, b: &BigRational) -> BigRational {
    (a - b).abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_factorials() {
        assert_eq!(factorial(0), BigUint::one());
        assert_eq!(factorial(5), BigUint::from(120u32));
        assert_eq!(falling_factorial(7, 3), BigUint::from(210u32));
        assert_eq!(falling_factorial(4, 0), BigUint::one());
        assert_eq!(multinomial([1, 1, 0, 0]), BigUint::from(2u32));
    }

    #[test]
    fn rational_text_round_trip() {
        let r = rational(6, 4);
        assert_eq!(format_rational(&r), "3/2");
        assert_eq!(parse_rational("3/2"), Some(r));
        assert_eq!(parse_rational("7"), Some(rational(7, 1)));
        assert_eq!(parse_rational("1/0"), None);
    }

    #[test]
    fn huge_ratio_converts() {
        let big = from_uint(factorial(400));
        let r = &big / (&big * BigInt::from(4));
        assert!((to_f64(&r) - 0.25).abs() < 1e-15);
    }
}
