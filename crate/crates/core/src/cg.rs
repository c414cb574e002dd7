//! Clebsch–Gordan coefficients ⟨j1 m1; j2 m2 | j m⟩ (Condon–Shortley phase).
//!
//! Racah's closed form, summed exactly in big rationals and square-rooted
//! once at the end, so there is no cancellation error at large j.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

fn factorial(n: i64) -> BigInt {
    (2..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

fn twice(x: f64, name: &'static str) -> Result<i64> {
    let t = 2.0 * x;
    if !x.is_finite() || (t - t.round()).abs() > 1e-9 {
        return Err(Error::InvalidParameter { name, reason: format!("{x} is not a multiple of 1/2") });
    }
    Ok(t.round() as i64)
}

/// ⟨j1 m1; j2 m2 | j m⟩ for half-integer arguments. Returns 0 when the
/// selection rules fail.
pub fn clebsch_gordan(j1: f64, m1: f64, j2: f64, m2: f64, j: f64, m: f64) -> Result<f64> {
    Ok(cg_twice(twice(j1, "j1")?, twice(m1, "m1")?, twice(j2, "j2")?, twice(m2, "m2")?, twice(j, "j")?, twice(m, "m")?))
}

/// Same as [`clebsch_gordan`] with every argument doubled.
pub fn cg_twice(tj1: i64, tm1: i64, tj2: i64, tm2: i64, tj: i64, tm: i64) -> f64 {
    if tj1 < 0 || tj2 < 0 || tj < 0 {
        return 0.0;
    }
    if tm1 + tm2 != tm || tm1.abs() > tj1 || tm2.abs() > tj2 || tm.abs() > tj {
        return 0.0;
    }
    if (tj1 + tm1) % 2 != 0 || (tj2 + tm2) % 2 != 0 || (tj + tm) % 2 != 0 {
        return 0.0;
    }
    if tj > tj1 + tj2 || tj < (tj1 - tj2).abs() || (tj1 + tj2 + tj) % 2 != 0 {
        return 0.0;
    }
    // all of these are integers once the parity checks pass
    let a = (tj1 + tj2 - tj) / 2;
    let b = (tj1 - tj2 + tj) / 2;
    let c = (-tj1 + tj2 + tj) / 2;
    let s = (tj1 + tj2 + tj) / 2 + 1;
    let j1p = (tj1 + tm1) / 2;
    let j1m = (tj1 - tm1) / 2;
    let j2p = (tj2 + tm2) / 2;
    let j2m = (tj2 - tm2) / 2;
    let jp = (tj + tm) / 2;
    let jm = (tj - tm) / 2;

    let prefactor = BigRational::new(
        BigInt::from(tj + 1)
            * factorial(a)
            * factorial(b)
            * factorial(c)
            * factorial(j1p)
            * factorial(j1m)
            * factorial(j2p)
            * factorial(j2m)
            * factorial(jp)
            * factorial(jm),
        factorial(s),
    );

    // k runs over values keeping every factorial argument non-negative
    let d1 = (tj - tj2 + tm1) / 2;
    let d2 = (tj - tj1 - tm2) / 2;
    let k_min = 0.max(-d1).max(-d2);
    let k_max = a.min(j1m).min(j2p);
    let mut sum = BigRational::zero();
    for k in k_min..=k_max {
        let denom = factorial(k)
            * factorial(a - k)
            * factorial(j1m - k)
            * factorial(j2p - k)
            * factorial(d1 + k)
            * factorial(d2 + k);
        let term = BigRational::new(BigInt::one(), denom);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    if sum.is_zero() {
        return 0.0;
    }
    let sign = if sum.is_negative() { -1.0 } else { 1.0 };
    let square = prefactor * &sum * &sum;
    sign * square.to_f64().unwrap_or(f64::NAN).sqrt()
}
