//! Certified enclosures of real and complex numbers.
//!
//! A [`CertifiedReal`] is a midpoint/radius pair of exact rationals, so the
//! interval endpoints are exact and interval arithmetic needs no rounding at
//! all; radii only ever come from explicit truncation-tail bounds.

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::scalar::{ExactScalar, Rat};

/// Enclosure `[mid - rad, mid + rad]` of a real number.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertifiedReal {
    mid: Rat,
    rad: Rat,
}

impl CertifiedReal {
    pub fn new(mid: Rat, rad: Rat) -> Result<Self> {
        if rad.is_negative() {
            return Err(Error::DomainViolation("negative radius".into()));
        }
        Ok(Self { mid, rad })
    }

    pub fn from_exact(mid: Rat) -> Self {
        Self {
            mid,
            rad: Rat::zero(),
        }
    }

    pub fn zero() -> Self {
        Self::from_exact(Rat::zero())
    }

    pub fn mid(&self) -> &Rat {
        &self.mid
    }

    pub fn rad(&self) -> &Rat {
        &self.rad
    }

    pub fn lo(&self) -> Rat {
        &self.mid - &self.rad
    }

    pub fn hi(&self) -> Rat {
        &self.mid + &self.rad
    }

    pub fn from_endpoints(lo: Rat, hi: Rat) -> Result<Self> {
        if lo > hi {
            return Err(Error::DomainViolation("empty interval".into()));
        }
        let two = Rat::from_integer(2.into());
        Ok(Self {
            mid: (&lo + &hi) / &two,
            rad: (&hi - &lo) / &two,
        })
    }

    pub fn contains_rat(&self, x: &Rat) -> bool {
        self.lo() <= *x && *x <= self.hi()
    }

    /// `self` encloses every point of `other`.
    pub fn contains(&self, other: &Self) -> bool {
        self.lo() <= other.lo() && other.hi() <= self.hi()
    }

    pub fn intersects(&self, other: &Self) -> bool {
        self.lo() <= other.hi() && other.lo() <= self.hi()
    }

    pub fn add(&self, rhs: &Self) -> Self {
        Self {
            mid: &self.mid + &rhs.mid,
            rad: &self.rad + &rhs.rad,
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        Self {
            mid: &self.mid - &rhs.mid,
            rad: &self.rad + &rhs.rad,
        }
    }

    pub fn neg(&self) -> Self {
        Self {
            mid: -self.mid.clone(),
            rad: self.rad.clone(),
        }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let (a, b) = (self.lo(), self.hi());
        let (c, d) = (rhs.lo(), rhs.hi());
        let mut products = [&a * &c, &a * &d, &b * &c, &b * &d];
        products.sort();
        Self::from_endpoints(products[0].clone(), products[3].clone()).unwrap()
    }

    pub fn mul_rat(&self, r: &Rat) -> Self {
        Self {
            mid: &self.mid * r,
            rad: &self.rad * r.abs(),
        }
    }

    /// Interval division; fails when the divisor encloses zero.
    pub fn div(&self, rhs: &Self) -> Result<Self> {
        if rhs.contains_rat(&Rat::zero()) {
            return Err(Error::DivisionByZero("interval divisor contains 0".into()));
        }
        let (c, d) = (rhs.lo(), rhs.hi());
        let inv = Self::from_endpoints(d.recip(), c.recip())?;
        Ok(self.mul(&inv))
    }

    /// Grow the radius by `extra` (used to absorb truncation tails).
    pub fn widen(&self, extra: &Rat) -> Result<Self> {
        if extra.is_negative() {
            return Err(Error::DomainViolation("negative widening".into()));
        }
        Ok(Self {
            mid: self.mid.clone(),
            rad: &self.rad + extra,
        })
    }

    /// Round the endpoints outward onto the dyadic grid `2^-grid_bits`,
    /// trading at most `2^-grid_bits` of radius for small representations.
    /// The result always encloses `self`.
    pub fn outward_round(&self, grid_bits: u32) -> Self {
        use num_bigint::BigInt;
        use num_integer::Integer;
        let scale = BigInt::from(1u8) << grid_bits;
        let floor_div = |r: Rat| -> BigInt {
            let scaled = r * Rat::from_integer(scale.clone());
            scaled.numer().div_floor(scaled.denom())
        };
        let lo = Rat::new(floor_div(self.lo()), scale.clone());
        let hi_num = {
            let scaled = self.hi() * Rat::from_integer(scale.clone());
            let floor = scaled.numer().div_floor(scaled.denom());
            if Rat::new(floor.clone(), scale.clone()) == scaled {
                floor
            } else {
                floor + 1
            }
        };
        let hi = Rat::new(hi_num, scale);
        Self::from_endpoints(lo, hi).expect("outward rounding keeps lo <= hi")
    }
}

/// Rectangular enclosure of a complex number: independent real/imaginary boxes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertifiedScalar {
    pub re: CertifiedReal,
    pub im: CertifiedReal,
}

impl CertifiedScalar {
    pub fn from_exact(z: &ExactScalar) -> Self {
        Self {
            re: CertifiedReal::from_exact(z.re().clone()),
            im: CertifiedReal::from_exact(z.im().clone()),
        }
    }

    pub fn zero() -> Self {
        Self {
            re: CertifiedReal::zero(),
            im: CertifiedReal::zero(),
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        Self {
            re: self.re.add(&rhs.re),
            im: self.im.add(&rhs.im),
        }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        Self {
            re: self.re.mul(&rhs.re).sub(&self.im.mul(&rhs.im)),
            im: self.re.mul(&rhs.im).add(&self.im.mul(&rhs.re)),
        }
    }

    pub fn mul_real(&self, r: &CertifiedReal) -> Self {
        Self {
            re: self.re.mul(r),
            im: self.im.mul(r),
        }
    }

    pub fn widen(&self, extra: &Rat) -> Result<Self> {
        Ok(Self {
            re: self.re.widen(extra)?,
            im: self.im.widen(extra)?,
        })
    }

    pub fn contains_exact(&self, z: &ExactScalar) -> bool {
        self.re.contains_rat(z.re()) && self.im.contains_rat(z.im())
    }

    pub fn contains(&self, other: &Self) -> bool {
        self.re.contains(&other.re) && self.im.contains(&other.im)
    }

    pub fn max_rad(&self) -> Rat {
        self.re.rad().clone().max(self.im.rad().clone())
    }
}

/// Matrix of complex enclosures, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertifiedMat {
    rows: usize,
    cols: usize,
    data: Vec<CertifiedScalar>,
}

impl CertifiedMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![CertifiedScalar::zero(); rows * cols],
        }
    }

    pub fn from_exact(m: &Mat) -> Self {
        Self {
            rows: m.rows(),
            cols: m.cols(),
            data: m.entries().iter().map(CertifiedScalar::from_exact).collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entry(&self, i: usize, j: usize) -> &CertifiedScalar {
        &self.data[i * self.cols + j]
    }

    pub fn entry_mut(&mut self, i: usize, j: usize) -> &mut CertifiedScalar {
        &mut self.data[i * self.cols + j]
    }

    pub fn add_exact(&self, m: &Mat) -> Self {
        let mut out = self.clone();
        for (c, e) in out.data.iter_mut().zip(m.entries()) {
            *c = c.add(&CertifiedScalar::from_exact(e));
        }
        out
    }

    pub fn widen_all(&self, extra: &Rat) -> Result<Self> {
        let mut out = self.clone();
        for c in out.data.iter_mut() {
            *c = c.widen(extra)?;
        }
        Ok(out)
    }

    pub fn scale_real(&self, r: &CertifiedReal) -> Self {
        let mut out = self.clone();
        for c in out.data.iter_mut() {
            *c = c.mul_real(r);
        }
        out
    }

    pub fn contains_mat(&self, m: &Mat) -> bool {
        self.rows == m.rows()
            && self.cols == m.cols()
            && self
                .data
                .iter()
                .zip(m.entries())
                .all(|(c, e)| c.contains_exact(e))
    }

    pub fn contains(&self, other: &Self) -> bool {
        self.data
            .iter()
            .zip(other.data.iter())
            .all(|(a, b)| a.contains(b))
    }

    pub fn max_rad(&self) -> Rat {
        self.data
            .iter()
            .map(|c| c.max_rad())
            .max()
            .unwrap_or_else(Rat::zero)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn interval_mul_encloses() {
        let a = CertifiedReal::new(rat(1, 3), rat(1, 100)).unwrap();
        let b = CertifiedReal::new(rat(-2, 7), rat(1, 50)).unwrap();
        let p = a.mul(&b);
        // The product of the midpoints must lie inside.
        assert!(p.contains_rat(&(rat(1, 3) * rat(-2, 7))));
        // And so must every endpoint combination.
        assert!(p.contains_rat(&(a.lo() * b.hi())));
    }

    #[test]
    fn interval_div_round_trip() {
        let a = CertifiedReal::new(rat(5, 2), rat(1, 10)).unwrap();
        let b = CertifiedReal::new(rat(3, 4), rat(1, 100)).unwrap();
        let q = a.div(&b).unwrap();
        assert!(q.mul(&b).contains(&CertifiedReal::from_exact(rat(5, 2))));
        assert!(b
            .mul(&CertifiedReal::from_exact(rat(0, 1)))
            .contains_rat(&rat(0, 1)));
        assert!(a
            .div(&CertifiedReal::new(rat(0, 1), rat(1, 2)).unwrap())
            .is_err());
    }

    #[test]
    fn complex_mul_encloses() {
        let z = ExactScalar::new(rat(1, 2), rat(1, 3));
        let w = ExactScalar::new(rat(-2, 5), rat(4, 7));
        let cz = CertifiedScalar::from_exact(&z);
        let cw = CertifiedScalar::from_exact(&w);
        assert!(cz.mul(&cw).contains_exact(&(&z * &w)));
    }
}
