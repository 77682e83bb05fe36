//! Directed-rounding enclosures of real roots of rationals.
//!
//! Every irrational quantity leaves the exact world only through this module.
//! A root `x^(1/k)` is enclosed by two rationals with denominator `P` (the
//! [`Precision`]): the lower end is `floor(x^(1/k) * P) / P`, computed with
//! integer roots, and the upper end adds `1/P`. When `x` is a perfect `k`-th
//! power of a rational the root is returned exactly at both ends.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Roots;
use num_rational::BigRational;
use num_traits::{One, Pow};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Denominator used for root enclosures. Defaults to `10^12`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Precision(BigInt);

impl Precision {
    pub fn new(den: impl Into<BigInt>) -> Result<Self> {
        let den = den.into();
        if den < BigInt::one() {
            return Err(Error::invalid("precision denominator must be >= 1"));
        }
        Ok(Precision(den))
    }

    pub fn pow10(digits: u32) -> Self {
        Precision(Pow::pow(BigInt::from(10u32), digits))
    }

    pub fn denominator(&self) -> &BigInt {
        &self.0
    }

    /// The enclosure slack `1/P`.
    pub fn ulp(&self) -> Scalar {
        Scalar::from_rational(BigRational::new(BigInt::one(), self.0.clone()))
    }
}

impl Default for Precision {
    fn default() -> Self {
        Precision::pow10(12)
    }
}

/// A closed rational interval `[lo, hi]` known to contain a real number.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Enclosure {
    pub lo: Scalar,
    pub hi: Scalar,
}

impl Enclosure {
    pub fn exact(v: Scalar) -> Self {
        Enclosure { lo: v.clone(), hi: v }
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn width(&self) -> Scalar {
        &self.hi - &self.lo
    }
}

fn to_biguint(v: &BigInt) -> BigUint {
    v.to_biguint().expect("non-negative")
}

fn exact_int_root(v: &BigInt, k: u32) -> Option<BigInt> {
    let r = to_biguint(v).nth_root(k);
    if Pow::pow(&r, k) == to_biguint(v) {
        Some(BigInt::from_biguint(Sign::Plus, r))
    } else {
        None
    }
}

/// The exact `k`-th root of a non-negative rational, if it is rational.
pub fn exact_root(x: &Scalar, k: u32) -> Option<Scalar> {
    assert!(k >= 1, "root order must be positive");
    if x.is_negative() {
        return None;
    }
    if x.is_zero() {
        return Some(Scalar::zero());
    }
    let n = exact_int_root(x.numer(), k)?;
    let d = exact_int_root(x.denom(), k)?;
    Some(Scalar::from_rational(BigRational::new(n, d)))
}

/// Encloses `x^(1/k)` for rational `x >= 0`.
pub fn root(x: &Scalar, k: u32, prec: &Precision) -> Enclosure {
    assert!(!x.is_negative(), "root of a negative number");
    if let Some(r) = exact_root(x, k) {
        return Enclosure::exact(r);
    }
    let p = prec.denominator();
    // floor(x * P^k), then the integer root: floor(floor(y)^(1/k)) = floor(y^(1/k)).
    let scaled = (x.numer() * Pow::pow(p, k)) / x.denom();
    let r = to_biguint(&scaled).nth_root(k);
    let lo = Scalar::from_rational(BigRational::new(BigInt::from_biguint(Sign::Plus, r), p.clone()));
    let hi = &lo + prec.ulp();
    Enclosure { lo, hi }
}

pub fn sqrt(x: &Scalar, prec: &Precision) -> Enclosure {
    root(x, 2, prec)
}

/// Encloses `x^(p/q)` for rational `x > 0`, integer `p`, `q >= 1`.
///
/// Negative exponents are handled by inverting the enclosure of the positive
/// power, which keeps the direction of rounding.
pub fn pow_ratio(x: &Scalar, p: i64, q: u32, prec: &Precision) -> Result<Enclosure> {
    if !x.is_positive() {
        return Err(Error::invalid("pow_ratio needs a positive base"));
    }
    let base = x.powu(p.unsigned_abs());
    let e = root(&base, q, prec);
    if p >= 0 {
        return Ok(e);
    }
    if e.lo.is_zero() {
        return Err(Error::Precision(format!(
            "lower root enclosure of {base} is zero at the current precision"
        )));
    }
    Ok(Enclosure {
        lo: e.hi.recip(),
        hi: e.lo.recip(),
    })
}

/// Encloses `x^alpha` for rational `x > 0` and rational `alpha`.
pub fn pow_scalar(x: &Scalar, alpha: &Scalar, prec: &Precision) -> Result<Enclosure> {
    let p: i64 = alpha
        .numer()
        .try_into()
        .map_err(|_| Error::invalid("exponent numerator too large"))?;
    let q: u32 = alpha
        .denom()
        .try_into()
        .map_err(|_| Error::invalid("exponent denominator too large"))?;
    pow_ratio(x, p, q, prec)
}

/// Integer square root, rounded down.
pub fn isqrt(v: u64) -> u64 {
    v.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn perfect_powers_are_exact() {
        let p = Precision::default();
        assert_eq!(sqrt(&Scalar::ratio(4, 9), &p), Enclosure::exact(Scalar::ratio(2, 3)));
        assert_eq!(root(&Scalar::ratio(1, 6561), 4, &p).lo, Scalar::ratio(1, 9));
        assert!(sqrt(&Scalar::zero(), &p).is_exact());
    }

    #[test]
    fn sqrt_two_is_bracketed() {
        let p = Precision::pow10(6);
        let e = sqrt(&Scalar::int(2), &p);
        assert_eq!(e.lo, Scalar::ratio(1_414_213, 1_000_000));
        assert_eq!(e.hi, Scalar::ratio(1_414_214, 1_000_000));
    }

    #[test]
    fn negative_exponent_flips_direction() {
        let p = Precision::default();
        let e = pow_ratio(&Scalar::int(3), -1, 2, &p).unwrap();
        // 1/sqrt(3) = 0.57735...
        assert!(e.lo < e.hi);
        assert!(&e.lo * &e.lo * Scalar::int(3) < Scalar::one());
        assert!(&e.hi * &e.hi * Scalar::int(3) > Scalar::one());
    }

    proptest! {
        #[test]
        fn root_encloses(n in 1i64..1_000_000, d in 1i64..1_000_000, k in 1u32..6) {
            let x = Scalar::ratio(n, d);
            let e = root(&x, k, &Precision::pow10(9));
            prop_assert!(e.lo.powu(k as u64) <= x);
            prop_assert!(e.hi.powu(k as u64) >= x);
            prop_assert!(e.width() <= Precision::pow10(9).ulp());
        }
    }
}
