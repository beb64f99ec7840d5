//! The scalar little q-Jacobi family.
//!
//! Polynomials are produced with exact coefficients from the terminating
//! 2phi1 series with upper parameters `q^{-n}, abq^{n+1}` and lower
//! parameter `aq`, evaluated at argument `qz`. Norms and moments are exposed
//! only as ratios to `m_0(a, b)`, which keeps everything rational; the
//! absolute scale is available separately as a certified enclosure.

use num_traits::{One, Signed};

use crate::certified::CertifiedReal;
use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::polymat::{LaurentMatPoly, MatPoly};
use crate::qcalc::{binom2, qpoch_inf, qpoch_rat, QBase};
use crate::qdiffop::QDiffOp;
use crate::scalar::{ExactScalar, Rat};
use crate::weights::{MomentProvider, QWeight, WeightDecay};

/// Parameters `0 < a < q^{-1}`, `b < q^{-1}` for the scalar family.
#[derive(Clone, Debug)]
pub struct ScalarParams {
    base: QBase,
    a: Rat,
    b: Rat,
}

impl ScalarParams {
    pub fn new(base: QBase, a: Rat, b: Rat) -> Result<Self> {
        let q_inv = base.pow(-1);
        if !a.is_positive() || a >= q_inv {
            return Err(Error::DomainViolation(format!(
                "a must satisfy 0 < a < 1/q, got {}",
                crate::scalar::rat_str(&a)
            )));
        }
        if b >= q_inv {
            return Err(Error::DomainViolation(format!(
                "b must satisfy b < 1/q, got {}",
                crate::scalar::rat_str(&b)
            )));
        }
        Ok(Self { base, a, b })
    }

    pub fn base(&self) -> &QBase {
        &self.base
    }

    pub fn a(&self) -> &Rat {
        &self.a
    }

    pub fn b(&self) -> &Rat {
        &self.b
    }

    /// Same base and `b`, with `a` replaced by `a q^k`.
    pub fn shift_a(&self, k: i64) -> Result<Self> {
        Self::new(self.base.clone(), &self.a * self.base.pow(k), self.b.clone())
    }
}

/// `p_n(z; a, b; q)` as a 1x1 matrix polynomial with exact coefficients;
/// the coefficient of `z^k` is
/// `(q^{-n};q)_k (abq^{n+1};q)_k / ((q;q)_k (aq;q)_k) q^k`.
/// `n = -1` is accepted and returns the zero polynomial.
pub fn lqj_poly(n: i64, p: &ScalarParams) -> MatPoly {
    if n < 0 {
        return MatPoly::zero(1, 1);
    }
    let n = n as usize;
    let base = p.base();
    let q = base.q();
    let ab_qn1 = &p.a * &p.b * base.pow(n as i64 + 1);
    let aq = &p.a * q;
    let mut coeffs = Vec::with_capacity(n + 1);
    let mut c = Rat::one();
    coeffs.push(c.clone());
    for k in 0..n {
        // Multiply the k-th coefficient up to the (k+1)-th.
        let qk = base.pow(k as i64);
        let num = (Rat::one() - base.pow(-(n as i64)) * &qk) * (Rat::one() - &ab_qn1 * &qk);
        let den = (Rat::one() - q * &qk) * (Rat::one() - &aq * &qk);
        c = c * num / den * q;
        coeffs.push(c.clone());
    }
    MatPoly::scalar_from_rats(&coeffs)
}

/// Normalized moment `mu_n = m_n(a,b)/m_0(a,b) = (aq;q)_n / (abq^2;q)_n`.
pub fn lqj_moment_ratio(n: usize, p: &ScalarParams) -> Rat {
    let base = p.base();
    let aq = &p.a * base.q();
    let abq2 = &p.a * &p.b * base.pow(2);
    qpoch_rat(&aq, n as i64, base).unwrap() / qpoch_rat(&abq2, n as i64, base).unwrap()
}

/// Normalized squared norm
/// `h_n(a,b;q)/m_0 = (1-abq)(aq)^n (q,bq;q)_n / ((1-abq^{2n+1})(aq,abq;q)_n)`.
pub fn lqj_norm_ratio(n: usize, p: &ScalarParams) -> Rat {
    let base = p.base();
    let q = base.q();
    let ab = &p.a * &p.b;
    let num = (Rat::one() - &ab * q)
        * crate::scalar::rat_pow(&(&p.a * q), n as i64)
        * qpoch_rat(q, n as i64, base).unwrap()
        * qpoch_rat(&(&p.b * q), n as i64, base).unwrap();
    let den = (Rat::one() - &ab * base.pow(2 * n as i64 + 1))
        * qpoch_rat(&(&p.a * q), n as i64, base).unwrap()
        * qpoch_rat(&(&ab * q), n as i64, base).unwrap();
    num / den
}

/// Recurrence coefficients `(A_n, C_n)` of
/// `-z p_n = A_n p_{n+1} - (A_n + C_n) p_n + C_n p_{n-1}`.
pub fn lqj_recurrence(n: usize, p: &ScalarParams) -> (Rat, Rat) {
    let base = p.base();
    let n = n as i64;
    let ab = &p.a * &p.b;
    let a_n = base.pow(n) * (Rat::one() - &p.a * base.pow(n + 1))
        * (Rat::one() - &ab * base.pow(n + 1))
        / ((Rat::one() - &ab * base.pow(2 * n + 1)) * (Rat::one() - &ab * base.pow(2 * n + 2)));
    let c_n = &p.a * base.pow(n) * (Rat::one() - base.pow(n)) * (Rat::one() - &p.b * base.pow(n))
        / ((Rat::one() - &ab * base.pow(2 * n)) * (Rat::one() - &ab * base.pow(2 * n + 1)));
    (a_n, c_n)
}

/// Eigenvalue `lambda_n = q^{-n}(1 - q^n)(1 - abq^{n+1})` of the second
/// order q-difference operator.
pub fn lqj_eigenvalue(n: usize, p: &ScalarParams) -> Rat {
    let base = p.base();
    let n = n as i64;
    base.pow(-n) * (Rat::one() - base.pow(n)) * (Rat::one() - &p.a * &p.b * base.pow(n + 1))
}

/// Leading coefficient of `p_n`:
/// `(-1)^n q^{-binom(n,2)} (abq^{n+1};q)_n / (aq;q)_n`.
pub fn lqj_leading_coeff(n: usize, p: &ScalarParams) -> Rat {
    let base = p.base();
    let sign = if n % 2 == 0 { Rat::one() } else { -Rat::one() };
    sign * base.pow(-binom2(n as i64))
        * qpoch_rat(&(&p.a * &p.b * base.pow(n as i64 + 1)), n as i64, base).unwrap()
        / qpoch_rat(&(&p.a * base.q()), n as i64, base).unwrap()
}

/// Monic multiple of `p_n`.
pub fn lqj_monic(n: usize, p: &ScalarParams) -> MatPoly {
    lqj_poly(n as i64, p).scale(&ExactScalar::from_rat(lqj_leading_coeff(n, p).recip()))
}

/// The second order q-difference operator with `p_n` as eigenfunctions:
/// `F_1 = a(bq - z^{-1})`, `F_0 = -(abq+1) + (1+a) z^{-1}`,
/// `F_{-1} = 1 - z^{-1}`, acting as `sum_l p(q^l z) F_l(z)`.
pub fn lqj_operator(p: &ScalarParams) -> QDiffOp {
    let base = p.base();
    let sc = |r: Rat| Mat::scalar(1, &ExactScalar::from_rat(r));
    let f1 = LaurentMatPoly::from_coeffs(1, 1, vec![sc(&p.a * &p.b * base.q()), sc(-p.a.clone())]);
    let f0 = LaurentMatPoly::from_coeffs(
        1,
        1,
        vec![sc(-(&p.a * &p.b * base.q() + Rat::one())), sc(Rat::one() + &p.a)],
    );
    let fm1 = LaurentMatPoly::from_coeffs(1, 1, vec![sc(Rat::one()), sc(-Rat::one())]);
    QDiffOp::new(base.clone(), -1, vec![fm1, f0, f1]).expect("well-formed scalar operator")
}

/// Scalar weight profile `w(q^x) = a^x (bq;q)_x / (q;q)_x` as a q-weight,
/// with the decay certificate `|q^x w(q^x)| <= C (aq)^x`.
pub fn lqj_qweight(p: &ScalarParams) -> QWeight {
    let rule_params = p.clone();
    let decay = WeightDecay::new(
        pochhammer_ratio_upper_bound(&rule_params),
        &p.a * p.base().q(),
        0,
    );
    QWeight::new(
        1,
        move |x| {
            Mat::scalar(
                1,
                &ExactScalar::from_rat(scalar_weight_value(&rule_params, x)),
            )
        },
        Some(decay),
        None,
    )
}

/// `a^x (bq;q)_x/(q;q)_x`, exact.
pub fn scalar_weight_value(p: &ScalarParams, x: usize) -> Rat {
    let base = p.base();
    crate::scalar::rat_pow(&p.a, x as i64)
        * qpoch_rat(&(&p.b * base.q()), x as i64, base).unwrap()
        / qpoch_rat(base.q(), x as i64, base).unwrap()
}

/// Rational upper bound on `sup_x (bq;q)_x/(q;q)_x`:
/// the numerator is at most `prod (1 + |b| q^k)` and
/// `prod_{k>K}(1 + |b| q^k) <= e^t <= 1/(1-t)` with
/// `t = |b| q^{K+1}/(1-q) < 1`; the denominator is at least
/// `prod_{k<=K}(1-q^k) (1 - s)` with `s = q^{K+1}/(1-q) < 1`
/// (Weierstrass: `prod(1-x_k) >= 1 - sum x_k`).
pub fn pochhammer_ratio_upper_bound(p: &ScalarParams) -> Rat {
    let base = p.base();
    let abs_b = p.b.abs();
    let mut k = 0i64;
    loop {
        k += 1;
        let t = &abs_b * base.pow(k + 1) / base.one_minus_q();
        let s = base.pow(k + 1) / base.one_minus_q();
        if t < Rat::new(1.into(), 2.into()) && s < Rat::new(1.into(), 2.into()) {
            let mut num = Rat::one();
            let mut den = Rat::one();
            for j in 1..=k {
                num *= Rat::one() + &abs_b * base.pow(j);
                den *= Rat::one() - base.pow(j);
            }
            num /= Rat::one() - t;
            den *= Rat::one() - s;
            return num / den;
        }
        assert!(k < 10_000, "q too close to 1 for the bound to settle");
    }
}

/// Moment provider for the scalar family (1x1 normalized moments).
pub fn lqj_moment_provider(p: &ScalarParams) -> Result<MomentProvider> {
    let p = p.clone();
    MomentProvider::new(1, move |n| {
        Mat::scalar(1, &ExactScalar::from_rat(lqj_moment_ratio(n, &p)))
    })
}

/// Certified enclosure of the absolute scale
/// `m_0(a, b) = (abq^2;q)_inf / (aq;q)_inf`.
pub fn lqj_m0(p: &ScalarParams, tol: &Rat) -> Result<CertifiedReal> {
    m0_enclosure(p.base(), &p.a, &p.b, tol)
}

pub(crate) fn m0_enclosure(base: &QBase, a: &Rat, b: &Rat, tol: &Rat) -> Result<CertifiedReal> {
    if !tol.is_positive() {
        return Err(Error::InvalidTolerance);
    }
    // Divide enclosures at a tighter tolerance so the quotient meets `tol`.
    let inner = tol / Rat::from_integer(16.into());
    let num = qpoch_inf(&(a * b * base.pow(2)), base, &inner)?;
    let den = qpoch_inf(&(a * base.q()), base, &inner)?;
    let mut quotient = num.div(&den)?;
    let mut shrink = inner;
    while quotient.rad() > tol {
        shrink = &shrink / Rat::from_integer(16.into());
        let num = qpoch_inf(&(a * b * base.pow(2)), base, &shrink)?;
        let den = qpoch_inf(&(a * base.q()), base, &shrink)?;
        quotient = num.div(&den)?;
    }
    Ok(quotient)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use num_traits::Zero;
    use crate::scalar::rat;
    use crate::weights::inner_product_exact;

    pub(crate) fn params_p1() -> ScalarParams {
        ScalarParams::new(QBase::new(rat(1, 2)).unwrap(), rat(1, 4), rat(1, 2)).unwrap()
    }

    fn params_p2() -> ScalarParams {
        ScalarParams::new(QBase::new(rat(2, 3)).unwrap(), rat(1, 3), rat(-1, 1)).unwrap()
    }

    #[test]
    fn parameter_domain() {
        let base = QBase::new(rat(1, 2)).unwrap();
        assert!(ScalarParams::new(base.clone(), rat(3, 1), rat(1, 2)).is_err());
        assert!(ScalarParams::new(base.clone(), rat(0, 1), rat(1, 2)).is_err());
        assert!(ScalarParams::new(base.clone(), rat(1, 4), rat(2, 1)).is_err());
        // b may be negative or zero.
        assert!(ScalarParams::new(base.clone(), rat(1, 4), rat(0, 1)).is_ok());
        assert!(ScalarParams::new(base, rat(1, 4), rat(-5, 1)).is_ok());
    }

    #[test]
    fn poly_basics() {
        let p = params_p1();
        assert_eq!(lqj_poly(0, &p), MatPoly::identity(1));
        // Constant term is 1 for every n.
        for n in 0..7 {
            let poly = lqj_poly(n, &p);
            assert_eq!(poly.degree(), Some(n as usize));
            assert!(poly.eval(&ExactScalar::zero()).is_identity());
        }
        // Hand-expanded p_1 = 1 - (31/28) z at P1.
        let p1 = lqj_poly(1, &p);
        assert_eq!(p1.coeff(1).get(0, 0), &ExactScalar::from_ratio(-31, 28));
        // Agreement with the terminating 2phi1 oracle at sample points.
        let base = p.base();
        for n in 0..6i64 {
            for x in 0..4i64 {
                let z = ExactScalar::from_rat(base.pow(x));
                let series = crate::qcalc::phi21_terminating(
                    &base.pow_scalar(-n),
                    &ExactScalar::from_rat(p.a() * p.b() * base.pow(n + 1)),
                    &ExactScalar::from_rat(p.a() * base.q()),
                    &(&ExactScalar::from_rat(base.q().clone()) * &z),
                    base,
                )
                .unwrap();
                assert_eq!(lqj_poly(n, &p).eval(&z).get(0, 0), &series);
            }
        }
    }

    #[test]
    fn moment_ratio_values() {
        let p = params_p1();
        assert_eq!(lqj_moment_ratio(0, &p), rat(1, 1));
        // (1-aq)/(1-abq^2) = (7/8)/(31/32).
        assert_eq!(lqj_moment_ratio(1, &p), rat(28, 31));
        // b = 0 collapses the denominator products.
        let p0 = ScalarParams::new(p.base().clone(), rat(1, 4), rat(0, 1)).unwrap();
        for n in 0..6 {
            assert_eq!(
                lqj_moment_ratio(n, &p0),
                qpoch_rat(&(p0.a() * p0.base().q()), n as i64, p0.base()).unwrap()
            );
        }
    }

    #[test]
    fn norm_ratio_values_and_moment_oracle() {
        for p in [params_p1(), params_p2()] {
            assert_eq!(lqj_norm_ratio(0, &p), rat(1, 1));
            for n in 0..=10 {
                assert!(lqj_norm_ratio(n, &p).is_positive(), "n={n}");
            }
            // <p_n, p_n>/m_0 through the moment bilinear expansion.
            let moments = lqj_moment_provider(&p).unwrap();
            for n in 0..=8usize {
                let poly = lqj_poly(n as i64, &p);
                let g = inner_product_exact(&poly, &poly, &moments).unwrap();
                assert_eq!(
                    g.get(0, 0),
                    &ExactScalar::from_rat(lqj_norm_ratio(n, &p)),
                    "n={n}"
                );
            }
        }
        // Frozen value at P1, hand-checked two ways: h^_1 = 8/147.
        assert_eq!(lqj_norm_ratio(1, &params_p1()), rat(8, 147));
    }

    #[test]
    fn orthogonality_via_moments() {
        for p in [params_p1(), params_p2()] {
            let moments = lqj_moment_provider(&p).unwrap();
            for m in 0..=8usize {
                for n in 0..=8usize {
                    let g = inner_product_exact(
                        &lqj_poly(m as i64, &p),
                        &lqj_poly(n as i64, &p),
                        &moments,
                    )
                    .unwrap();
                    let expected = if m == n {
                        ExactScalar::from_rat(lqj_norm_ratio(n, &p))
                    } else {
                        ExactScalar::zero()
                    };
                    assert_eq!(g.get(0, 0), &expected, "m={m} n={n}");
                }
            }
        }
    }

    #[test]
    fn recurrence_identity() {
        // -z p_n = A_n p_{n+1} - (A_n + C_n) p_n + C_n p_{n-1}, exactly.
        for p in [params_p1(), params_p2()] {
            assert!(lqj_recurrence(0, &p).1.is_zero());
            for n in 0..=8usize {
                let (a_n, c_n) = lqj_recurrence(n, &p);
                let lhs = MatPoly::monomial(1, Mat::identity(1))
                    .mul(&lqj_poly(n as i64, &p))
                    .unwrap()
                    .neg();
                let mid = lqj_poly(n as i64, &p)
                    .scale(&ExactScalar::from_rat(-(&a_n + &c_n)));
                let rhs = lqj_poly(n as i64 + 1, &p)
                    .scale(&ExactScalar::from_rat(a_n))
                    .add(&mid)
                    .add(&lqj_poly(n as i64 - 1, &p).scale(&ExactScalar::from_rat(c_n)));
                assert_eq!(lhs, rhs, "n={n}");
            }
        }
        // A_0 = (1-aq)/(1-abq^2) = 28/31 at P1.
        assert_eq!(lqj_recurrence(0, &params_p1()).0, rat(28, 31));
    }

    #[test]
    fn eigenvalue_values_and_monotonicity() {
        let p = params_p1();
        assert!(lqj_eigenvalue(0, &p).is_zero());
        // q^{-1}(1-q)(1-abq^2) = 2 * (1/2) * (31/32).
        assert_eq!(lqj_eigenvalue(1, &p), rat(31, 32));
        for params in [params_p1(), params_p2()] {
            for n in 0..10 {
                assert!(lqj_eigenvalue(n, &params) < lqj_eigenvalue(n + 1, &params));
            }
        }
    }

    #[test]
    fn leading_coefficient_identity() {
        for p in [params_p1(), params_p2()] {
            for n in 0..=8usize {
                let poly = lqj_poly(n as i64, &p);
                let lead = poly.leading().unwrap().get(0, 0).clone();
                assert_eq!(lead, ExactScalar::from_rat(lqj_leading_coeff(n, &p)));
                assert!(lqj_monic(n, &p).is_monic());
            }
        }
    }

    #[test]
    fn moment_ratio_against_certified_scale() {
        // mu_n m_0 must land inside enclosure(m_n) for the first few n:
        // the infinite products cancel to the finite ratio (aq;q)_n/(abq^2;q)_n.
        let p = params_p1();
        let tol = rat(1, 1_000_000_000_000);
        let m0 = lqj_m0(&p, &tol).unwrap();
        let base = p.base();
        for n in 0..4i64 {
            let mn_num = qpoch_inf(&(p.a() * p.b() * base.pow(n + 2)), base, &tol).unwrap();
            let mn_den = qpoch_inf(&(p.a() * base.pow(n + 1)), base, &tol).unwrap();
            let mn = mn_num.div(&mn_den).unwrap();
            let predicted = m0.mul_rat(&lqj_moment_ratio(n as usize, &p));
            assert!(
                predicted.intersects(&mn),
                "moment cancellation failed at n={n}"
            );
        }
    }
}
