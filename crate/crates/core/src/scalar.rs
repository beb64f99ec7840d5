//! Exact Gaussian-rational scalars.
//!
//! Every finite quantity in this crate is a ratio of Gaussian integers,
//! stored as a pair of arbitrary-precision rationals. The field is closed
//! under `+`, `-`, `*`, `/` and conjugation, so all finite identities are
//! decidable by computation.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, re-exported under a short alias.
pub type Rat = BigRational;

/// Rational from an integer pair; panics on zero denominator.
pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// Exact integer power of a nonzero rational.
pub fn rat_pow(r: &Rat, e: i64) -> Rat {
    if e == 0 {
        return Rat::one();
    }
    let (base, mut n) = if e < 0 {
        assert!(!r.is_zero(), "zero base with negative exponent");
        (r.recip(), e.unsigned_abs())
    } else {
        (r.clone(), e as u64)
    };
    let mut acc = Rat::one();
    let mut sq = base;
    while n > 0 {
        if n & 1 == 1 {
            acc *= &sq;
        }
        n >>= 1;
        if n > 0 {
            sq = &sq * &sq;
        }
    }
    acc
}

/// Rational upper bound on sqrt(x) for x >= 0, tight to ~15 decimal digits.
pub fn sqrt_upper_bound(x: &Rat) -> Rat {
    assert!(!x.is_negative(), "sqrt of negative rational");
    if x.is_zero() {
        return Rat::zero();
    }
    // sqrt(p/r) = sqrt(p*r)/r; ceil the integer sqrt after scaling by 10^30.
    let scale = BigInt::from(10u32).pow(15);
    let y = x.numer() * x.denom() * &scale * &scale;
    let mut s = y.sqrt();
    if &s * &s < y {
        s += 1;
    }
    Rat::new(s, x.denom() * scale)
}

/// Format a rational canonically as `p/q` (denominator always printed).
pub fn rat_str(r: &Rat) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parse `p/q` or a bare integer `p` into a rational.
pub fn parse_rational(s: &str) -> Result<Rat> {
    let s = s.trim();
    let body = s.strip_prefix('+').unwrap_or(s);
    let (num, den) = match body.split_once('/') {
        Some((n, d)) => (n, d),
        None => (body, "1"),
    };
    let n: BigInt = num
        .parse()
        .map_err(|_| Error::Parse(format!("bad numerator in {s:?}")))?;
    let d: BigInt = den
        .parse()
        .map_err(|_| Error::Parse(format!("bad denominator in {s:?}")))?;
    if d.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {s:?}")));
    }
    Ok(Rat::new(n, d))
}

/// Parse a decimal string such as `0.25`, `1e-12` or `-3.5e4` into an exact rational.
pub fn parse_decimal(s: &str) -> Result<Rat> {
    let s = s.trim();
    let (mantissa, exp) = match s.split_once(['e', 'E']) {
        Some((m, e)) => {
            let e: i64 = e
                .parse()
                .map_err(|_| Error::Parse(format!("bad exponent in {s:?}")))?;
            (m, e)
        }
        None => (s, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    let digits = format!("{int_part}{frac_part}");
    let digits_body = digits
        .strip_prefix('+')
        .or_else(|| digits.strip_prefix('-'))
        .unwrap_or(&digits);
    if digits_body.is_empty() || !digits_body.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::Parse(format!("bad decimal {s:?}")));
    }
    let n: BigInt = digits
        .parse()
        .map_err(|_| Error::Parse(format!("bad decimal {s:?}")))?;
    let shift = exp - frac_part.len() as i64;
    let ten = BigInt::from(10u32);
    Ok(if shift >= 0 {
        Rat::from(n * ten.pow(shift as u32))
    } else {
        Rat::new(n, ten.pow((-shift) as u32))
    })
}

/// A Gaussian rational: `re + im*i` with exact rational parts.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ExactScalar {
    re: Rat,
    im: Rat,
}

impl ExactScalar {
    pub fn new(re: Rat, im: Rat) -> Self {
        Self { re, im }
    }

    pub fn from_rat(re: Rat) -> Self {
        Self {
            re,
            im: Rat::zero(),
        }
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rat(Rat::from(BigInt::from(n)))
    }

    /// `num/den` as a real scalar.
    pub fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_rat(rat(num, den))
    }

    pub fn zero() -> Self {
        Self::from_int(0)
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    /// The imaginary unit.
    pub fn i() -> Self {
        Self::new(Rat::zero(), Rat::one())
    }

    pub fn re(&self) -> &Rat {
        &self.re
    }

    pub fn im(&self) -> &Rat {
        &self.im
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -self.im.clone())
    }

    /// |z|^2 = re^2 + im^2, exact.
    pub fn norm_sqr(&self) -> Rat {
        &self.re * &self.re + &self.im * &self.im
    }

    /// Rational upper bound on the modulus: |re| + |im| >= |z|.
    pub fn abs_upper_bound(&self) -> Rat {
        self.re.abs() + self.im.abs()
    }

    pub fn inv(&self) -> Result<Self> {
        let n = self.norm_sqr();
        if n.is_zero() {
            return Err(Error::DivisionByZero("inverse of zero scalar".into()));
        }
        Ok(Self::new(&self.re / &n, -&self.im / &n))
    }

    pub fn div(&self, rhs: &Self) -> Result<Self> {
        Ok(self * &rhs.inv()?)
    }

    /// Exact integer power; negative exponents require a nonzero base.
    pub fn pow(&self, e: i64) -> Result<Self> {
        if e == 0 {
            return Ok(Self::one());
        }
        let (base, mut n) = if e < 0 {
            (self.inv()?, e.unsigned_abs())
        } else {
            (self.clone(), e as u64)
        };
        let mut acc = Self::one();
        let mut sq = base;
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &sq;
            }
            n >>= 1;
            if n > 0 {
                sq = &sq * &sq;
            }
        }
        Ok(acc)
    }

    pub fn scale(&self, r: &Rat) -> Self {
        Self::new(&self.re * r, &self.im * r)
    }

    /// Canonical string: `p/q` when real, `p/q+r/si` otherwise.
    pub fn to_display_string(&self) -> String {
        if self.is_real() {
            rat_str(&self.re)
        } else if self.im.is_negative() {
            format!("{}-{}i", rat_str(&self.re), rat_str(&self.im.abs()))
        } else {
            format!("{}+{}i", rat_str(&self.re), rat_str(&self.im))
        }
    }

    /// Parse `p/q`, `p/q+r/si` or `p/q-r/si` (also `r/si` for pure imaginary).
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(body) = s.strip_suffix('i') {
            // Find the sign separating the real and imaginary parts; skip
            // index 0 so a leading sign stays with the real part.
            let bytes = body.as_bytes();
            let split = (1..bytes.len())
                .rev()
                .find(|&i| bytes[i] == b'+' || bytes[i] == b'-');
            match split {
                Some(pos) => {
                    let re = parse_rational(&body[..pos])?;
                    let sign = if body.as_bytes()[pos] == b'-' { -1 } else { 1 };
                    let im = parse_rational(&body[pos + 1..])? * Rat::from(BigInt::from(sign));
                    Ok(Self::new(re, im))
                }
                None => Ok(Self::new(Rat::zero(), parse_rational(body)?)),
            }
        } else {
            Ok(Self::from_rat(parse_rational(s)?))
        }
    }
}

impl fmt::Display for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_display_string())
    }
}

impl fmt::Debug for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_display_string())
    }
}

impl From<Rat> for ExactScalar {
    fn from(r: Rat) -> Self {
        Self::from_rat(r)
    }
}

impl From<i64> for ExactScalar {
    fn from(n: i64) -> Self {
        Self::from_int(n)
    }
}

impl<'b> Add<&'b ExactScalar> for &ExactScalar {
    type Output = ExactScalar;
    fn add(self, rhs: &'b ExactScalar) -> ExactScalar {
        ExactScalar::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl<'b> Sub<&'b ExactScalar> for &ExactScalar {
    type Output = ExactScalar;
    fn sub(self, rhs: &'b ExactScalar) -> ExactScalar {
        ExactScalar::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl<'b> Mul<&'b ExactScalar> for &ExactScalar {
    type Output = ExactScalar;
    fn mul(self, rhs: &'b ExactScalar) -> ExactScalar {
        ExactScalar::new(
            &self.re * &rhs.re - &self.im * &rhs.im,
            &self.re * &rhs.im + &self.im * &rhs.re,
        )
    }
}

impl Neg for &ExactScalar {
    type Output = ExactScalar;
    fn neg(self) -> ExactScalar {
        ExactScalar::new(-self.re.clone(), -self.im.clone())
    }
}

macro_rules! forward_owned_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<ExactScalar> for ExactScalar {
            type Output = ExactScalar;
            fn $method(self, rhs: ExactScalar) -> ExactScalar {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&ExactScalar> for ExactScalar {
            type Output = ExactScalar;
            fn $method(self, rhs: &ExactScalar) -> ExactScalar {
                (&self).$method(rhs)
            }
        }
        impl $trait<ExactScalar> for &ExactScalar {
            type Output = ExactScalar;
            fn $method(self, rhs: ExactScalar) -> ExactScalar {
                self.$method(&rhs)
            }
        }
    };
}

forward_owned_binop!(Add, add);
forward_owned_binop!(Sub, sub);
forward_owned_binop!(Mul, mul);

impl Neg for ExactScalar {
    type Output = ExactScalar;
    fn neg(self) -> ExactScalar {
        -&self
    }
}

impl Div<&ExactScalar> for &ExactScalar {
    type Output = ExactScalar;
    fn div(self, rhs: &ExactScalar) -> ExactScalar {
        self.div(rhs).expect("division by zero scalar")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_operations() {
        let a = ExactScalar::new(rat(1, 2), rat(3, 4));
        let b = ExactScalar::new(rat(-2, 5), rat(1, 3));
        let prod = &a * &b;
        let back = prod.div(&b).unwrap();
        assert_eq!(back, a);
        assert_eq!(&a + &b, &b + &a);
        assert_eq!((&a - &b) + &b, a);
    }

    #[test]
    fn conjugation_and_norm() {
        let z = ExactScalar::new(rat(3, 5), rat(-4, 5));
        assert_eq!(z.norm_sqr(), rat(1, 1));
        assert_eq!((&z * &z.conj()).re(), &rat(1, 1));
        assert!((&z * &z.conj()).is_real());
    }

    #[test]
    fn parse_round_trip() {
        for s in ["3/8", "-3/31", "0/1+1/1i", "1/2-7/3i", "5"] {
            let z = ExactScalar::parse(s).unwrap();
            let z2 = ExactScalar::parse(&z.to_display_string()).unwrap();
            assert_eq!(z, z2);
        }
        assert_eq!(ExactScalar::parse("0/1+1/1i").unwrap(), ExactScalar::i());
    }

    #[test]
    fn decimal_parse() {
        assert_eq!(parse_decimal("0.25").unwrap(), rat(1, 4));
        assert_eq!(parse_decimal("1e-3").unwrap(), rat(1, 1000));
        assert_eq!(parse_decimal("-2.5e2").unwrap(), rat(-250, 1));
    }

    #[test]
    fn sqrt_bound_is_upper() {
        for (n, d) in [(2i64, 1i64), (1, 3), (7, 5), (123456, 7)] {
            let x = rat(n, d);
            let u = sqrt_upper_bound(&x);
            assert!(&u * &u >= x);
        }
    }
}
