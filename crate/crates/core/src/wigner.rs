//! Wigner 6-j symbols by Racah's closed sum, evaluated in exact rational
//! arithmetic.
//!
//! Component intensities need {J F I; F' J' 1} for half-integer arguments.
//! The standard closed form is a short alternating sum of factorial ratios;
//! in floating point the cancellation already costs digits for moderate
//! arguments, so the sum and the four triangle coefficients are kept as
//! `BigRational` and only the final square root goes through `f64`. The
//! square of a 6-j symbol is exactly rational, which is what the intensity
//! sum rules rely on.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::halfint::HalfInt;

/// n! as a `BigInt`. Arguments here stay below ~100, so a plain product is
/// fine.
fn factorial(n: u64) -> BigInt {
    let mut acc = BigInt::one();
    for k in 2..=n {
        acc *= k;
    }
    acc
}

/// Halves a twice-valued sum, returning `None` when it is negative or odd
/// (odd means the triad does not close on the half-integer lattice).
fn half(twice: i64) -> Option<u64> {
    if twice < 0 || twice % 2 != 0 {
        None
    } else {
        Some((twice / 2) as u64)
    }
}

/// Triangle coefficient Delta(a,b,c) = (a+b-c)!(a-b+c)!(-a+b+c)!/(a+b+c+1)!
/// for twice-valued arguments, or `None` when (a,b,c) violate the triangle
/// or lattice conditions.
fn triangle_coefficient(ta: i64, tb: i64, tc: i64) -> Option<BigRational> {
    let p = half(ta + tb - tc)?;
    let q = half(ta - tb + tc)?;
    let r = half(-ta + tb + tc)?;
    let s = half(ta + tb + tc)? + 1;
    Some(BigRational::new(
        factorial(p) * factorial(q) * factorial(r),
        factorial(s),
    ))
}

/// The alternating Racah sum S for {a b c; d e f}; `None` when any quantity
/// that must be a non-negative integer is not. The 6-j symbol is
/// sqrt(Delta(abc) Delta(aef) Delta(dbf) Delta(dec)) * S.
fn racah_sum(ta: i64, tb: i64, tc: i64, td: i64, te: i64, tf: i64) -> Option<BigRational> {
    // Triad sums (lower bounds for t) and opposite-pair sums (upper bounds).
    let t1 = half(ta + tb + tc)?;
    let t2 = half(ta + te + tf)?;
    let t3 = half(td + tb + tf)?;
    let t4 = half(td + te + tc)?;
    let q1 = half(ta + tb + td + te)?;
    let q2 = half(ta + tc + td + tf)?;
    let q3 = half(tb + tc + te + tf)?;

    let lo = t1.max(t2).max(t3).max(t4);
    let hi = q1.min(q2).min(q3);

    let mut sum = BigRational::zero();
    for t in lo..=hi {
        let num = factorial(t + 1);
        let den = factorial(t - t1)
            * factorial(t - t2)
            * factorial(t - t3)
            * factorial(t - t4)
            * factorial(q1 - t)
            * factorial(q2 - t)
            * factorial(q3 - t);
        let term = BigRational::new(num, den);
        if t % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    Some(sum)
}

/// Exact decomposition of a 6-j symbol: the symbol equals
/// `sign * sqrt(square)` with `square` a non-negative rational.
///
/// Returns the pair `(square, sign)`; a symbol that vanishes by a triangle
/// violation (the conventional value zero) comes back as `(0, 0)`.
pub(crate) fn six_j_squared(
    a: HalfInt,
    b: HalfInt,
    c: HalfInt,
    d: HalfInt,
    e: HalfInt,
    f: HalfInt,
) -> (BigRational, i8) {
    let (ta, tb, tc) = (a.twice() as i64, b.twice() as i64, c.twice() as i64);
    let (td, te, tf) = (d.twice() as i64, e.twice() as i64, f.twice() as i64);

    let deltas = match (
        triangle_coefficient(ta, tb, tc),
        triangle_coefficient(ta, te, tf),
        triangle_coefficient(td, tb, tf),
        triangle_coefficient(td, te, tc),
    ) {
        (Some(d1), Some(d2), Some(d3), Some(d4)) => d1 * d2 * d3 * d4,
        _ => return (BigRational::zero(), 0),
    };

    let s = match racah_sum(ta, tb, tc, td, te, tf) {
        Some(s) => s,
        None => return (BigRational::zero(), 0),
    };
    if s.is_zero() {
        return (BigRational::zero(), 0);
    }
    let sign = if s.is_negative() { -1 } else { 1 };
    (deltas * (&s * &s), sign)
}

/// Wigner 6-j symbol {a b c; d e f}.
///
/// Triangle-violating argument sets return 0.0 (the standard convention).
/// Everything up to the final square root is exact, so the result is
/// correct to f64 rounding for any arguments this crate produces.
pub fn six_j(a: HalfInt, b: HalfInt, c: HalfInt, d: HalfInt, e: HalfInt, f: HalfInt) -> f64 {
    let (square, sign) = six_j_squared(a, b, c, d, e, f);
    if sign == 0 {
        return 0.0;
    }
    let magnitude = rational_to_f64(&square).sqrt();
    f64::from(sign) * magnitude
}

/// Converts a `BigRational` to `f64` through the integer parts, accurate to
/// a couple of ulps for the magnitudes that appear here.
pub(crate) fn rational_to_f64(r: &BigRational) -> f64 {
    // to_f64 on BigRational handles large numerators/denominators by
    // scaling; values here are far from overflow.
    r.to_f64().expect("rational representable as f64")
}
