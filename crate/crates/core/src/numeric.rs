//! Exact rational arithmetic helpers.
//!
//! Verdicts in this crate never go through floating point: comparisons
//! against `r^d` cross-multiply in arbitrary-precision integers, and the
//! base-2 logarithm used by the threshold formulas is computed as a dyadic
//! rational upper bound. Floats appear only in display output and in
//! confidence intervals.

use num::{BigInt, BigRational, BigUint, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// z-value for two-sided 95% normal confidence intervals.
pub const Z95: f64 = 1.959963984540054;

/// Binomial coefficient as an exact big integer (any arguments).
pub fn binomial_big(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for i in 0..k {
        num *= BigUint::from(n - i);
        den *= BigUint::from(i + 1);
    }
    num / den
}

/// Binomial coefficient in a machine word; callers keep `n <= 64`, where
/// every value (and any sum of a size range) fits in a `u128`.
pub fn binomial_u128(n: u64, k: u64) -> u128 {
    debug_assert!(n <= 64);
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Parses "a/b", "a", or a decimal string like "2.5" into an exact
/// rational. Decimals become fractions over a power of ten; binary
/// floating point is never involved.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let s = text.trim();
    let bad = || Error::InvalidInput(format!("cannot parse rational from {s:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num.trim().parse().map_err(|_| bad())?;
        let d: BigInt = den.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::InvalidInput(format!("zero denominator in {s:?}")));
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = int.starts_with('-');
        let int_part: BigInt = if int.is_empty() || int == "-" || int == "+" {
            BigInt::zero()
        } else {
            int.parse().map_err(|_| bad())?
        };
        let frac_num: BigInt = frac.parse().map_err(|_| bad())?;
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let numer = int_part.abs() * &scale + frac_num;
        let mut value = BigRational::new(numer, scale);
        if negative {
            value = -value;
        }
        return Ok(value);
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(n))
}

/// "a/b" for proper fractions, plain "a" for integers.
pub fn format_ratio(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn ratio_from_u64(n: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn ratio_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// `r^e` for any integer exponent (`r != 0` when `e < 0`).
pub fn ratio_pow(r: &BigRational, e: i64) -> BigRational {
    if e == 0 {
        return BigRational::one();
    }
    let mag = e.unsigned_abs() as u32;
    let num = r.numer().pow(mag);
    let den = r.denom().pow(mag);
    if e > 0 {
        BigRational::new(num, den)
    } else {
        assert!(!r.is_zero(), "zero base with negative exponent");
        BigRational::new(den, num)
    }
}

/// Exact test `count <= r^d` for a positive rational `r`.
pub fn count_le_rpow(count: u64, r: &BigRational, d: u32) -> bool {
    assert!(r.is_positive(), "spread bound requires r > 0");
    let (num, den) = ratio_uint_parts(r);
    BigUint::from(count) * den.pow(d) <= num.pow(d)
}

/// Exact test `count > r^k` for a positive rational `r`.
pub fn count_gt_rpow(count: u64, r: &BigRational, k: u32) -> bool {
    !count_le_rpow(count, r, k)
}

fn ratio_uint_parts(r: &BigRational) -> (BigUint, BigUint) {
    let num = r.numer().magnitude().clone();
    let den = r.denom().magnitude().clone();
    (num, den)
}

/// Smallest multiple of `2^-bits` that is `>= x`.
pub fn ceil_to_dyadic(x: &BigRational, bits: u32) -> BigRational {
    let scale = BigInt::from(1u8) << bits;
    let scaled = x * BigRational::from_integer(scale.clone());
    BigRational::new(scaled.ceil().to_integer(), scale)
}

/// Upper bound on `log2(x)` for rational `x >= 1`, as a dyadic rational
/// with `frac_bits` fractional bits. The second component reports whether
/// the returned value is exactly `log2(x)` (true only when `x` is a power
/// of two). The error of an inexact bound is below `2^-frac_bits` plus a
/// negligible drift from the 96-bit working mantissa.
pub fn log2_upper(x: &BigRational, frac_bits: u32) -> Result<(BigRational, bool)> {
    if !x.is_positive() || x < &BigRational::one() {
        return Err(Error::InvalidInput(format!(
            "log2 bound requires x >= 1, got {}",
            format_ratio(x)
        )));
    }
    const F: u32 = 96; // working mantissa fraction bits
    let a = x.numer().magnitude().clone();
    let b = x.denom().magnitude().clone();

    // integer part: largest m with b * 2^m <= a
    let mut m0 = (a.bits() as i64 - b.bits() as i64).max(0) as u32;
    while (b.clone() << m0) > a {
        m0 -= 1;
    }

    // mantissa y = x / 2^m0 in [1, 2), rounded up to F fraction bits
    let num = a.clone() << F;
    let den = b << m0;
    let mut y = &num / &den;
    let mut exact = (&num % &den).is_zero();
    if !exact {
        y += 1u32;
    }

    let two = BigUint::one() << (2 * F + 1);
    let one_scaled = BigUint::one() << F;
    let mut frac: u64 = 0;
    for _ in 0..frac_bits {
        let sq = &y * &y; // scale 2F
        let bit = sq >= two;
        let shift = if bit { F + 1 } else { F };
        let mut next = sq.clone() >> shift;
        if (next.clone() << shift) != sq {
            exact = false;
            next += 1u32;
        }
        y = next;
        frac = (frac << 1) | bit as u64;
    }
    exact = exact && y == one_scaled;

    let mut scaled = BigInt::from(m0) * (BigInt::one() << frac_bits) + BigInt::from(frac);
    if !exact {
        scaled += 1; // safe ceiling for the truncated tail
    }
    Ok((
        BigRational::new(scaled, BigInt::one() << frac_bits),
        exact,
    ))
}

/// ln Gamma(x) for x > 0 (Lanczos, g = 7). Display-precision only; used
/// by the exact-binomial confidence interval.
fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    if x < 0.5 {
        // reflection
        return std::f64::consts::PI.ln()
            - (std::f64::consts::PI * x).sin().ln()
            - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    for (i, c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

fn ln_choose(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// P[X <= s] for X ~ Binomial(n, p).
fn binom_cdf(s: u64, n: u64, p: f64) -> f64 {
    if p <= 0.0 {
        return 1.0;
    }
    if p >= 1.0 {
        return if s >= n { 1.0 } else { 0.0 };
    }
    let mut acc = 0.0;
    for k in 0..=s.min(n) {
        let ln_term =
            ln_choose(n, k) + k as f64 * p.ln() + (n - k) as f64 * (1.0 - p).ln();
        acc += ln_term.exp();
    }
    acc.min(1.0)
}

/// Clopper-Pearson interval for `successes` out of `trials` at the given
/// two-sided confidence level.
pub fn clopper_pearson(successes: u64, trials: u64, confidence: f64) -> (f64, f64) {
    assert!(trials > 0);
    let alpha = 1.0 - confidence;
    let lo = if successes == 0 {
        0.0
    } else {
        // largest p with P[X >= s] <= alpha/2, via bisection on the CDF
        bisect(|p| 1.0 - binom_cdf(successes - 1, trials, p) - alpha / 2.0)
    };
    let hi = if successes == trials {
        1.0
    } else {
        bisect(|p| alpha / 2.0 - binom_cdf(successes, trials, p))
    };
    (lo, hi)
}

/// Root of a monotone increasing function on [0, 1].
fn bisect(f: impl Fn(f64) -> f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if f(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(s: &str) -> BigRational {
        parse_rational(s).unwrap()
    }

    #[test]
    fn parse_forms() {
        assert_eq!(rat("19/10"), BigRational::new(19.into(), 10.into()));
        assert_eq!(rat("2.5"), BigRational::new(5.into(), 2.into()));
        assert_eq!(rat("4"), BigRational::from_integer(4.into()));
        assert_eq!(rat("-0.25"), BigRational::new((-1).into(), 4.into()));
        assert!(parse_rational("a/b").is_err());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn format_reduces() {
        assert_eq!(format_ratio(&rat("6/4")), "3/2");
        assert_eq!(format_ratio(&rat("8/4")), "2");
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial_u128(4, 2), 6);
        assert_eq!(binomial_u128(8, 3), 56);
        assert_eq!(binomial_u128(64, 32), 1832624140942590534);
        assert_eq!(binomial_big(3, 5), BigUint::zero());
        assert_eq!(binomial_big(10, 5), BigUint::from(252u32));
    }

    #[test]
    fn exact_power_comparisons() {
        // 2 <= (19/10)^1 is false, 2 <= 2^1 is true
        assert!(!count_le_rpow(2, &rat("19/10"), 1));
        assert!(count_le_rpow(2, &rat("2"), 1));
        // r^0 = 1
        assert!(count_le_rpow(1, &rat("100"), 0));
        assert!(!count_le_rpow(2, &rat("100"), 0));
    }

    #[test]
    fn log2_exact_powers_of_two() {
        let (v, exact) = log2_upper(&rat("4"), 20).unwrap();
        assert!(exact);
        assert_eq!(v, rat("2"));
        let (v, exact) = log2_upper(&rat("16"), 20).unwrap();
        assert!(exact);
        assert_eq!(v, rat("4"));
        let (v, exact) = log2_upper(&rat("1"), 20).unwrap();
        assert!(exact);
        assert_eq!(v, rat("0"));
    }

    #[test]
    fn log2_upper_bounds_truth() {
        // log2(3): value must satisfy 3 <= 2^v and v - log2(3) <= 2^-20,
        // checked exactly via 3^2^20 against powers of two.
        let (v, exact) = log2_upper(&rat("3"), 20).unwrap();
        assert!(!exact);
        let denom_bits = 20;
        let scaled = (v * BigRational::from_integer(BigInt::one() << denom_bits))
            .to_integer()
            .to_biguint()
            .unwrap();
        let m: u64 = scaled.to_u64().unwrap();
        let pow3 = BigUint::from(3u8).pow(1u32 << denom_bits);
        // upper bound: 3^(2^20) < 2^m, tight: 3^(2^20) > 2^(m-1)
        assert_eq!(pow3.bits(), m, "bit length pins ceil(2^20 log2 3)");
    }

    #[test]
    fn clopper_pearson_sane() {
        let (lo, hi) = clopper_pearson(5, 10, 0.95);
        assert!(lo < 0.5 && 0.5 < hi);
        assert!((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi));
        let (lo, _) = clopper_pearson(0, 10, 0.95);
        assert_eq!(lo, 0.0);
        let (_, hi) = clopper_pearson(10, 10, 0.95);
        assert_eq!(hi, 1.0);
    }
}
