//! Conversion of floating-point geometry to exact rationals.
//!
//! Every coordinate that feeds exact integration is replaced by the simplest
//! rational within a small tolerance of the float. Simplest means smallest
//! denominator, found through the continued-fraction expansion of the
//! interval endpoints, so that values like `0.5000000000000001` or
//! `6.1e-17` (from `cos(pi/2)`) become `1/2` and `0`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Default number of decimal digits used for rationalization.
pub const DEFAULT_PRECISION_DIGITS: u32 = 30;

/// Environment variable overriding [`DEFAULT_PRECISION_DIGITS`].
pub const PRECISION_ENV: &str = "PBOUNDS_PRECISION";

/// Decimal digits used for rationalization, honouring `PBOUNDS_PRECISION`.
pub fn precision_digits() -> u32 {
    std::env::var(PRECISION_ENV)
        .ok()
        .and_then(|s| s.trim().parse::<u32>().ok())
        .filter(|&d| (1..=300).contains(&d))
        .unwrap_or(DEFAULT_PRECISION_DIGITS)
}

/// Relative tolerance used when snapping a float to a rational.
///
/// Never below 8 ulp: trigonometric vertex formulas are only accurate to a
/// few ulp, and a tighter window would keep the rounding noise.
pub fn relative_tolerance(digits: u32) -> f64 {
    10f64.powi(-(digits as i32)).max(8.0 * f64::EPSILON)
}

/// Exact value of a finite float.
pub fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite float")
}

/// Simplest rational within `relative_tolerance(digits) * scale` of `x`.
pub fn rationalize_with(x: f64, scale: f64, digits: u32) -> BigRational {
    let tol = relative_tolerance(digits) * scale.abs().max(x.abs());
    if tol == 0.0 {
        return exact(x);
    }
    let center = exact(x);
    let t = exact(tol);
    simplest_between(&(&center - &t), &(&center + &t))
}

/// [`rationalize_with`] at the configured precision.
pub fn rationalize(x: f64, scale: f64) -> BigRational {
    rationalize_with(x, scale, precision_digits())
}

/// Simplest rational number in the closed interval `[lo, hi]`.
pub fn simplest_between(lo: &BigRational, hi: &BigRational) -> BigRational {
    debug_assert!(lo <= hi);
    if !lo.is_positive() && !hi.is_negative() {
        return BigRational::zero();
    }
    if hi.is_negative() {
        return -simplest_between(&-hi, &-lo);
    }
    // 0 < lo <= hi
    let fl = lo.floor();
    if &fl == lo {
        return fl;
    }
    if fl < hi.floor() {
        return fl + BigRational::one();
    }
    let inner = simplest_between(&(hi - &fl).recip(), &(lo - &fl).recip());
    fl + inner.recip()
}

/// Correctly rounded conversion to `f64` with a sane fallback for huge values.
pub fn to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        if q.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// `n!` as a big integer.
pub fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// Greatest common divisor of two big integers (never negative).
pub fn gcd(a: &BigInt, b: &BigInt) -> BigInt {
    a.gcd(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn snaps_trigonometric_noise() {
        assert_eq!(rationalize_with((std::f64::consts::FRAC_PI_2).cos(), 1.0, 30), q(0, 1));
        assert_eq!(rationalize_with((std::f64::consts::FRAC_PI_3).cos(), 1.0, 30), q(1, 2));
        assert_eq!(rationalize_with(0.1, 1.0, 30), q(1, 10));
        assert_eq!(rationalize_with(-2.75, 1.0, 30), q(-11, 4));
    }

    #[test]
    fn stays_within_tolerance() {
        for &x in &[3.0f64.sqrt() / 2.0, std::f64::consts::PI, 1e-3 * std::f64::consts::E] {
            let r = rationalize_with(x, 1.0, 30);
            assert!((to_f64(&r) - x).abs() <= 8.0 * f64::EPSILON * x.abs().max(1.0));
        }
    }

    #[test]
    fn coarse_precision_gives_small_denominators() {
        let r = rationalize_with(std::f64::consts::PI, 1.0, 3);
        assert_eq!(r, q(22, 7));
    }

    #[test]
    fn simplest_between_handles_signs_and_integers() {
        assert_eq!(simplest_between(&q(-1, 3), &q(1, 5)), q(0, 1));
        assert_eq!(simplest_between(&q(5, 3), &q(7, 3)), q(2, 1));
        assert_eq!(simplest_between(&q(-7, 3), &q(-5, 3)), q(-2, 1));
        assert_eq!(simplest_between(&q(3, 10), &q(4, 10)), q(1, 3));
    }
}
