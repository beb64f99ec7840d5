//! Exact and certified q-calculus primitives.
//!
//! Finite objects (Pochhammer symbols, q-binomials, q-derivatives,
//! terminating 2phi1 sums) are exact Gaussian rationals. Infinite products
//! and sums return [`CertifiedReal`] / [`CertifiedScalar`] enclosures whose
//! radii come from explicit geometric tail bounds; the inequality used is
//! stated next to each bound.

use std::ops::Mul;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::certified::{CertifiedReal, CertifiedScalar};
use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::polymat::MatPoly;
use crate::scalar::{rat_pow, sqrt_upper_bound, ExactScalar, Rat};

/// Maximum exponent probed when detecting `q^{-n}` termination parameters.
pub const TERMINATION_SEARCH_BOUND: usize = 512;

/// The base of the q-lattice, constrained to `0 < q < 1`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct QBase {
    q: Rat,
}

impl QBase {
    pub fn new(q: Rat) -> Result<Self> {
        if !q.is_positive() || q >= Rat::one() {
            return Err(Error::DomainViolation(format!(
                "q must satisfy 0 < q < 1, got {}",
                crate::scalar::rat_str(&q)
            )));
        }
        Ok(Self { q })
    }

    pub fn q(&self) -> &Rat {
        &self.q
    }

    /// `q^e` for any integer `e`, exact.
    pub fn pow(&self, e: i64) -> Rat {
        rat_pow(&self.q, e)
    }

    pub fn pow_scalar(&self, e: i64) -> ExactScalar {
        ExactScalar::from_rat(self.pow(e))
    }

    pub fn one_minus_q(&self) -> Rat {
        Rat::one() - &self.q
    }
}

/// A function on the lattice `{q^x : x in N}`, backed by a closed-form rule
/// so any index is computable on demand; evaluation is pure.
#[derive(Clone)]
pub struct LatticeFunction {
    rows: usize,
    cols: usize,
    rule: Arc<dyn Fn(usize) -> Mat + Send + Sync>,
}

impl LatticeFunction {
    pub fn new(
        rows: usize,
        cols: usize,
        rule: impl Fn(usize) -> Mat + Send + Sync + 'static,
    ) -> Self {
        Self {
            rows,
            cols,
            rule: Arc::new(rule),
        }
    }

    pub fn scalar(rule: impl Fn(usize) -> ExactScalar + Send + Sync + 'static) -> Self {
        Self::new(1, 1, move |x| Mat::scalar(1, &rule(x)))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn eval(&self, x: usize) -> Mat {
        let m = (self.rule)(x);
        assert_eq!(
            (m.rows(), m.cols()),
            (self.rows, self.cols),
            "lattice rule changed shape"
        );
        m
    }

    pub fn eval_scalar(&self, x: usize) -> ExactScalar {
        assert_eq!((self.rows, self.cols), (1, 1));
        self.eval(x).get(0, 0).clone()
    }
}

/// q-Pochhammer symbol `(c; q)_n` for any integer `n`, with the
/// negative-index convention `(c;q)_{-n} = 1/(c q^{-n}; q)_n`.
pub fn qpoch(c: &ExactScalar, n: i64, base: &QBase) -> Result<ExactScalar> {
    if n >= 0 {
        let mut acc = ExactScalar::one();
        let mut qe = ExactScalar::one();
        let q = base.pow_scalar(1);
        for _ in 0..n {
            acc = &acc * &(&ExactScalar::one() - &(c * &qe));
            qe = &qe * &q;
        }
        Ok(acc)
    } else {
        let mut acc = ExactScalar::one();
        for k in 1..=(-n) {
            let factor = &ExactScalar::one() - &c.scale(&base.pow(-k));
            if factor.is_zero() {
                return Err(Error::DivisionByZero(format!(
                    "(c;q)_{n}: factor 1 - c*q^-{k} vanishes"
                )));
            }
            acc = &acc * &factor;
        }
        acc.inv()
    }
}

/// Convenience: `(c; q)_n` for a real rational argument.
pub fn qpoch_rat(c: &Rat, n: i64, base: &QBase) -> Result<Rat> {
    Ok(qpoch(&ExactScalar::from_rat(c.clone()), n, base)?.re().clone())
}

/// q-binomial coefficient; zero outside `0 <= k <= n`.
pub fn qbinom(n: usize, k: i64, base: &QBase) -> ExactScalar {
    if k < 0 || k as usize > n {
        return ExactScalar::zero();
    }
    let k = k as usize;
    let q = ExactScalar::from_rat(base.q().clone());
    let num = qpoch(&q, n as i64, base).expect("nonnegative order");
    let d1 = qpoch(&q, k as i64, base).expect("nonnegative order");
    let d2 = qpoch(&q, (n - k) as i64, base).expect("nonnegative order");
    num.div(&(&d1 * &d2)).expect("(q;q)_k never vanishes for 0<q<1")
}

/// Certified enclosure of the infinite product `(c; q)_inf`.
///
/// The partial product up to `K` is exact. For the tail we use, for every
/// k >= K with |c| q^K < 1:
///     |log(1 - c q^k)| <= |c| q^k / (1 - |c| q^k) <= |c| q^k / (1 - |c| q^K),
/// so the summed tail exponent is bounded by
///     L = |c| q^K / ((1 - q)(1 - |c| q^K)),
/// and once L < 1 the tail factor lies in [1 - L, 1/(1 - L)] because
/// e^{-L} >= 1 - L and e^{L} <= 1/(1 - L).
pub fn qpoch_inf(c: &Rat, base: &QBase, tol: &Rat) -> Result<CertifiedReal> {
    if !tol.is_positive() {
        return Err(Error::InvalidTolerance);
    }
    let q = base.q();
    let abs_c = c.abs();
    // Cheap uniform bound on every partial product:
    // |prod_{k<K}(1 - c q^k)| <= prod (1 + |c| q^k), and past K0 with
    // t = |c| q^{K0}/(1-q) <= 1/2 the remaining factors contribute at most
    // 1/(1 - t) <= 2.
    let mut partial_bound = Rat::one();
    let mut abs_cqk = abs_c.clone();
    let mut k0 = 0usize;
    let half = Rat::new(1.into(), 2.into());
    loop {
        if &abs_cqk / base.one_minus_q() <= half {
            partial_bound /= Rat::one() - &abs_cqk / base.one_minus_q();
            break;
        }
        partial_bound *= Rat::one() + &abs_cqk;
        abs_cqk *= q;
        k0 += 1;
        if k0 > 1_000_000 {
            return Err(Error::NonConvergent("qpoch_inf bound overflow".into()));
        }
    }
    // Pick the truncation K where the tail radius bound
    // partial_bound * l/(1 - l) with l = |c| q^K/((1-q)(1 - |c| q^K))
    // falls under the tolerance; l is cheap to update incrementally.
    let mut k = 0usize;
    let mut abs_cqk = abs_c.clone();
    loop {
        if abs_cqk < Rat::one() {
            let l = &abs_cqk / (base.one_minus_q() * (Rat::one() - &abs_cqk));
            if l < Rat::one() && &partial_bound * &l / (Rat::one() - &l) <= *tol {
                break;
            }
        }
        abs_cqk *= q;
        k += 1;
        if k > 1_000_000 {
            return Err(Error::NonConvergent("qpoch_inf truncation overflow".into()));
        }
    }
    // One exact pass over the K retained factors.
    let mut partial = Rat::one();
    let mut cqj = c.clone();
    for _ in 0..k {
        let factor = Rat::one() - &cqj;
        // A vanishing factor collapses the whole product to exactly 0.
        if factor.is_zero() {
            return Ok(CertifiedReal::from_exact(Rat::zero()));
        }
        partial *= factor;
        cqj *= q;
    }
    let l = {
        let a = abs_c * rat_pow(q, k as i64);
        &a / (base.one_minus_q() * (Rat::one() - &a))
    };
    // Tail factor lies in [1 - l, 1/(1 - l)] since e^{-l} >= 1 - l and
    // e^{l} <= 1/(1 - l) for l < 1.
    let lo = &partial * (Rat::one() - &l);
    let hi = &partial / (Rat::one() - &l);
    let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let enclosure = CertifiedReal::from_endpoints(lo, hi)?;
    debug_assert!(enclosure.rad() <= tol);
    Ok(enclosure)
}

/// Exact q-derivative of a matrix polynomial: `c_k z^k` maps to
/// `c_k (1-q^k)/(1-q) z^{k-1}`; at 0 this is the coefficient map, so no
/// lattice evaluation is involved.
pub fn qderiv_poly(f: &MatPoly, base: &QBase) -> MatPoly {
    let coeffs: Vec<Mat> = (1..f.coeffs().len())
        .map(|k| {
            let factor = (Rat::one() - base.pow(k as i64)) / base.one_minus_q();
            f.coeff(k).scale_rat(&factor)
        })
        .collect();
    MatPoly::from_coeffs(f.rows(), f.cols(), coeffs)
}

/// `n`-fold q-derivative of a lattice function at the point `q^x`, through
/// the explicit alternating-sum formula over `f(q^{x}), ..., f(q^{x+n})`:
/// `(D_q^n f)(q^x) = sum_j (-1)^j [n,j]_q q^{binom(n-j,2)} f(q^{j+x})
///                   / ((1-q)^n q^{binom(n,2)} q^{nx})`.
/// The sign is `(-1)^j`; iterating the two-point rule n times fixes it
/// (see the consistency test below).
pub fn qderiv_lattice_n(f: &LatticeFunction, n: usize, x: usize, base: &QBase) -> Mat {
    let mut sum = Mat::zeros(f.rows(), f.cols());
    for j in 0..=n {
        let sign = if j % 2 == 0 { 1 } else { -1 };
        let coeff = qbinom(n, j as i64, base)
            .scale(&base.pow(binom2((n - j) as i64)))
            .scale(&Rat::from_integer(sign.into()));
        sum = &sum + &f.eval(x + j).scale(&coeff);
    }
    let denom = rat_pow(&base.one_minus_q(), n as i64)
        * base.pow(binom2(n as i64))
        * base.pow((n * x) as i64);
    sum.scale_rat(&denom.recip())
}

/// `n(n-1)/2`.
pub fn binom2(n: i64) -> i64 {
    n * (n - 1) / 2
}

/// Exact q-integral of a matrix polynomial over `[0, 1]`:
/// `(1-q) sum_k q^k f(q^k) = (1-q) sum_j C_j / (1 - q^{j+1})`, summing the
/// geometric series of each monomial in closed form.
pub fn qintegral_poly(f: &MatPoly, base: &QBase) -> Mat {
    let mut acc = Mat::zeros(f.rows(), f.cols());
    for (j, c) in f.coeffs().iter().enumerate() {
        let denom = Rat::one() - base.pow(j as i64 + 1);
        acc = &acc + &c.scale_rat(&denom.recip());
    }
    acc.scale_rat(&base.one_minus_q())
}

/// Geometric decay certificate for a lattice-function series.
#[derive(Clone, Debug)]
pub enum DecayCertificate {
    /// Asserts `|t_{k+1}| <= ratio * |t_k|` for all `k >= onset`; each
    /// computed ratio is re-verified exactly and a violation is an error.
    Geometric { ratio: Rat, onset: usize },
    /// No certificate: successive term ratios are probed. The resulting
    /// enclosure is conditional on the observed decay continuing; the
    /// operation fails once `horizon` terms do not settle under the bound.
    Probe { horizon: usize },
}

/// Certified q-integral `(1-q) sum_k q^k f(q^k)` of a scalar-valued lattice
/// function. Tail bound past the exactly-summed prefix `0..=K`:
///     sum_{k>K} |t_k| <= |t_K| * r/(1-r)   whenever |t_{k+1}| <= r |t_k|.
pub fn qintegral(
    f: &LatticeFunction,
    cert: &DecayCertificate,
    tol: &Rat,
    base: &QBase,
) -> Result<CertifiedScalar> {
    if !tol.is_positive() {
        return Err(Error::InvalidTolerance);
    }
    if (f.rows(), f.cols()) != (1, 1) {
        return Err(Error::SizeMismatch("qintegral needs a scalar function".into()));
    }
    let one_minus_q = base.one_minus_q();
    let term = |k: usize| -> ExactScalar {
        f.eval_scalar(k).scale(&base.pow(k as i64))
    };

    let (ratio, onset, horizon) = match cert {
        DecayCertificate::Geometric { ratio, onset } => {
            if !ratio.is_positive() || *ratio >= Rat::one() {
                return Err(Error::DomainViolation("decay ratio must be in (0,1)".into()));
            }
            (Some(ratio.clone()), *onset, 1_000_000usize)
        }
        DecayCertificate::Probe { horizon } => (None, 0usize, *horizon),
    };

    let mut partial = ExactScalar::zero();
    let mut prev: Option<ExactScalar> = None;
    let mut probed_ratio_sq: Option<Rat> = None;
    let mut k = 0usize;
    loop {
        let t = term(k);
        // Exact ratio verification on |t|^2 (avoids irrational moduli).
        if k > onset {
            if let Some(p) = &prev {
                let lhs = t.norm_sqr();
                match &ratio {
                    Some(r) => {
                        if lhs > r * r * p.norm_sqr() {
                            return Err(Error::NonConvergent(format!(
                                "term ratio above certificate at k = {k}"
                            )));
                        }
                    }
                    None => {
                        if !p.norm_sqr().is_zero() {
                            let rsq = lhs / p.norm_sqr();
                            probed_ratio_sq = Some(match probed_ratio_sq.take() {
                                Some(m) => m.max(rsq),
                                None => rsq,
                            });
                        }
                    }
                }
            }
        }
        partial = &partial + &t;

        // Attempt to certify the tail at this truncation point.
        let r_opt = match &ratio {
            Some(r) => Some(r.clone()),
            None => probed_ratio_sq
                .as_ref()
                .map(sqrt_upper_bound)
                .filter(|r| *r < Rat::one()),
        };
        if k >= onset {
            if let Some(r) = r_opt {
                let t_abs = sqrt_upper_bound(&t.norm_sqr());
                let tail = &t_abs * &r / (Rat::one() - &r) * &one_minus_q;
                if tail <= *tol {
                    let scaled = partial.scale(&one_minus_q);
                    return CertifiedScalar::from_exact(&scaled).widen(&tail);
                }
            }
        }
        prev = Some(t);
        k += 1;
        if k > horizon {
            return Err(Error::NonConvergent(format!(
                "no certified tail within {horizon} terms"
            )));
        }
    }
}

/// Terminating scalar 2phi1 sum. The first upper parameter must be exactly
/// `q^{-n}` for some `n` within [`TERMINATION_SEARCH_BOUND`].
pub fn phi21_terminating(
    upper1: &ExactScalar,
    upper2: &ExactScalar,
    lower: &ExactScalar,
    z: &ExactScalar,
    base: &QBase,
) -> Result<ExactScalar> {
    let n = (0..=TERMINATION_SEARCH_BOUND)
        .find(|&m| *upper1 == base.pow_scalar(-(m as i64)))
        .ok_or(Error::TerminationNotDetected(TERMINATION_SEARCH_BOUND))?;

    let q = base.pow_scalar(1);
    let mut sum = ExactScalar::zero();
    let mut num = ExactScalar::one(); // (upper1;q)_k (upper2;q)_k
    let mut den = ExactScalar::one(); // (q;q)_k (lower;q)_k
    let mut zk = ExactScalar::one();
    let mut qk = ExactScalar::one(); // q^k
    for k in 0..=n {
        if k > 0 {
            let qk1 = &qk * &q.inv().expect("q nonzero"); // q^{k-1}
            num = &num * &(&ExactScalar::one() - &(upper1 * &qk1));
            num = &num * &(&ExactScalar::one() - &(upper2 * &qk1));
            let lower_factor = &ExactScalar::one() - &(lower * &qk1);
            if lower_factor.is_zero() {
                return Err(Error::SingularLowerParameter(k));
            }
            den = &den * &(&ExactScalar::one() - &qk);
            den = &den * &lower_factor;
            zk = &zk * z;
        }
        sum = &sum + &num.div(&den)?.mul(&zk);
        qk = &qk * &q;
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn base_half() -> QBase {
        QBase::new(rat(1, 2)).unwrap()
    }

    #[test]
    fn qbase_domain() {
        assert!(QBase::new(rat(1, 2)).is_ok());
        assert!(QBase::new(rat(0, 1)).is_err());
        assert!(QBase::new(rat(3, 2)).is_err());
        assert!(QBase::new(rat(1, 1)).is_err());
    }

    #[test]
    fn qpoch_basic_values() {
        let base = base_half();
        // Empty product.
        assert_eq!(
            qpoch(&ExactScalar::from_ratio(5, 7), 0, &base).unwrap(),
            ExactScalar::one()
        );
        // c = 0: all factors are 1.
        assert_eq!(
            qpoch(&ExactScalar::zero(), 7, &base).unwrap(),
            ExactScalar::one()
        );
        // Hand-expanded (1 - 1/2)(1 - 1/4) = 3/8.
        assert_eq!(
            qpoch(&ExactScalar::from_ratio(1, 2), 2, &base).unwrap(),
            ExactScalar::from_ratio(3, 8)
        );
    }

    #[test]
    fn qpoch_negative_index_and_addition_law() {
        let base = base_half();
        let c = ExactScalar::from_ratio(1, 3);
        // (c;q)_{-n} (c q^{-n}; q)_n = 1.
        for n in 1..4i64 {
            let neg = qpoch(&c, -n, &base).unwrap();
            let shifted = c.scale(&base.pow(-n));
            let pos = qpoch(&shifted, n, &base).unwrap();
            assert!((neg * pos).is_one());
        }
        // (c;q)_n (c q^n;q)_m = (c;q)_{n+m} over a grid including negatives.
        for n in -3..4i64 {
            for m in -3..4i64 {
                let lhs = qpoch(&c, n, &base)
                    .unwrap()
                    .mul(&qpoch(&c.scale(&base.pow(n)), m, &base).unwrap());
                let rhs = qpoch(&c, n + m, &base).unwrap();
                assert_eq!(lhs, rhs, "n={n} m={m}");
            }
        }
        // A vanishing negative-index factor is an error: c = q makes the
        // k = 1 factor 1 - c q^{-1} hit zero.
        let bad = ExactScalar::from_rat(base.pow(1));
        assert!(matches!(
            qpoch(&bad, -1, &base),
            Err(Error::DivisionByZero(_))
        ));
    }

    #[test]
    fn qbinom_values() {
        let base = base_half();
        assert!(qbinom(5, 0, &base).is_one());
        assert_eq!(qbinom(3, 1, &base), ExactScalar::from_ratio(7, 4));
        assert!(qbinom(3, 4, &base).is_zero());
        assert!(qbinom(3, -1, &base).is_zero());
    }

    #[test]
    fn qpoch_inf_enclosures() {
        let base = base_half();
        let tol = rat(1, 1_000_000_000_000);
        // c = 0: exact 1.
        let e = qpoch_inf(&rat(0, 1), &base, &tol).unwrap();
        assert_eq!(e, CertifiedReal::from_exact(rat(1, 1)));
        // c = 1: the first factor vanishes, result is exactly 0.
        let e = qpoch_inf(&rat(1, 1), &base, &tol).unwrap();
        assert_eq!(e, CertifiedReal::from_exact(rat(0, 1)));
        // c = q: oracle is the 60-term partial product bracketed by its own
        // tail bound; the enclosure must meet it and satisfy the radius.
        let e = qpoch_inf(&rat(1, 2), &base, &tol).unwrap();
        assert!(e.rad() <= &tol);
        let mut partial = rat(1, 1);
        for k in 0..60i64 {
            partial *= rat(1, 1) - rat(1, 2) * rat_pow(base.q(), k);
        }
        // True value lies in [partial*(1-L), partial] with L the tail bound.
        let l = rat_pow(base.q(), 60) / ((rat(1, 1) - rat(1, 2)) * (rat(1, 1) - rat_pow(base.q(), 60)));
        let oracle = CertifiedReal::from_endpoints(&partial * (rat(1, 1) - &l), partial).unwrap();
        assert!(e.intersects(&oracle));
        // Ten digits quoted by the independent computation.
        let approx = crate::scalar::parse_decimal("0.2887880951").unwrap();
        assert!((e.mid() - approx).abs() < rat(1, 1_000_000_000));
        // Bad tolerance.
        assert!(matches!(
            qpoch_inf(&rat(1, 2), &base, &rat(0, 1)),
            Err(Error::InvalidTolerance)
        ));
    }

    #[test]
    fn qderiv_poly_rules() {
        let base = base_half();
        // Constants die.
        let c = MatPoly::constant(Mat::identity(2));
        assert!(qderiv_poly(&c, &base).is_zero());
        // D_q z = 1.
        let z = MatPoly::monomial(1, Mat::identity(2));
        assert_eq!(qderiv_poly(&z, &base), MatPoly::identity(2));
        // D_q z^2 = (1+q) z = (3/2) z at q = 1/2.
        let z2 = MatPoly::monomial(2, Mat::identity(2));
        assert_eq!(
            qderiv_poly(&z2, &base),
            MatPoly::monomial(1, Mat::identity(2)).scale(&ExactScalar::from_ratio(3, 2))
        );
    }

    #[test]
    fn qderiv_lattice_matches_examples() {
        let base = base_half();
        // n = 0 is the identity.
        let f = LatticeFunction::scalar({
            let base = base_half();
            move |x| ExactScalar::from_rat(base.pow(2 * x as i64))
        });
        assert_eq!(
            qderiv_lattice_n(&f, 0, 3, &base),
            Mat::scalar(1, &ExactScalar::from_rat(base.pow(6)))
        );
        // D_q of z is 1 at every lattice point.
        let lin = LatticeFunction::new(2, 2, {
            let base = base_half();
            move |x| Mat::scalar(2, &ExactScalar::from_rat(base.pow(x as i64)))
        });
        for x in 0..4 {
            assert_eq!(qderiv_lattice_n(&lin, 1, x, &base), Mat::identity(2));
        }
        // n = 2 on q^{2x}: oracle is iterating the polynomial q-derivative.
        let sq = MatPoly::monomial(2, Mat::identity(1));
        let dd = qderiv_poly(&qderiv_poly(&sq, &base), &base);
        assert_eq!(
            qderiv_lattice_n(&f, 2, 0, &base),
            dd.eval(&ExactScalar::one())
        );
        assert_eq!(
            qderiv_lattice_n(&f, 2, 0, &base),
            Mat::scalar(1, &ExactScalar::from_ratio(3, 2))
        );
    }

    #[test]
    fn lattice_derivative_matches_two_point_iteration() {
        // Explicit formula vs n-fold two-point rule on lattice values of a
        // cubic with mixed coefficients.
        let base = base_half();
        let poly = MatPoly::scalar_from_rats(&[rat(2, 3), rat(-1, 2), rat(5, 7), rat(1, 4)]);
        let f = LatticeFunction::scalar({
            let base = base_half();
            let poly = poly.clone();
            move |x| {
                poly.eval(&ExactScalar::from_rat(base.pow(x as i64)))
                    .get(0, 0)
                    .clone()
            }
        });
        // two-point rule applied n times: values at x..x+n collapse stepwise.
        for n in 0..4usize {
            for x in 0..3usize {
                let mut vals: Vec<ExactScalar> =
                    (0..=n).map(|j| f.eval_scalar(x + j)).collect();
                let mut level = 0usize;
                while vals.len() > 1 {
                    let mut next = Vec::with_capacity(vals.len() - 1);
                    for j in 0..vals.len() - 1 {
                        let zj = ExactScalar::from_rat(base.pow((x + j) as i64));
                        let num = &vals[j] - &vals[j + 1];
                        let den = zj.scale(&base.one_minus_q());
                        next.push(num.div(&den).unwrap());
                    }
                    vals = next;
                    level += 1;
                }
                assert_eq!(level, n);
                assert_eq!(
                    qderiv_lattice_n(&f, n, x, &base),
                    Mat::scalar(1, &vals[0]),
                    "n={n} x={x}"
                );
            }
        }
    }

    #[test]
    fn qintegral_examples() {
        let base = base_half();
        let tol = rat(1, 1_000_000_000_000);
        // f = 0.
        let zero = LatticeFunction::scalar(|_| ExactScalar::zero());
        let e = qintegral(
            &zero,
            &DecayCertificate::Geometric {
                ratio: rat(1, 2),
                onset: 0,
            },
            &tol,
            &base,
        )
        .unwrap();
        assert!(e.contains_exact(&ExactScalar::zero()));
        assert!(e.max_rad() <= tol);
        // f = 1: telescoping geometric series sums to 1.
        let one = LatticeFunction::scalar(|_| ExactScalar::one());
        let e = qintegral(
            &one,
            &DecayCertificate::Geometric {
                ratio: rat(1, 2),
                onset: 0,
            },
            &tol,
            &base,
        )
        .unwrap();
        assert!(e.contains_exact(&ExactScalar::one()));
        // f(q^k) = q^k: closed form (1-q)/(1-q^2) = 2/3.
        let lin = LatticeFunction::scalar({
            let base = base_half();
            move |x| ExactScalar::from_rat(base.pow(x as i64))
        });
        let e = qintegral(
            &lin,
            &DecayCertificate::Probe { horizon: 10_000 },
            &tol,
            &base,
        )
        .unwrap();
        assert!(e.contains_exact(&ExactScalar::from_ratio(2, 3)));
        assert!(e.max_rad() <= tol);
    }

    #[test]
    fn qintegral_flags_non_decay() {
        let base = base_half();
        // f(q^k) = q^{-k} makes t_k = 1 for all k: no decay.
        let f = LatticeFunction::scalar({
            let base = base_half();
            move |x| ExactScalar::from_rat(base.pow(-(x as i64)))
        });
        assert!(matches!(
            qintegral(
                &f,
                &DecayCertificate::Probe { horizon: 50 },
                &rat(1, 1000),
                &base
            ),
            Err(Error::NonConvergent(_))
        ));
        assert!(matches!(
            qintegral(
                &f,
                &DecayCertificate::Geometric {
                    ratio: rat(3, 4),
                    onset: 0
                },
                &rat(1, 1000),
                &base
            ),
            Err(Error::NonConvergent(_))
        ));
    }

    #[test]
    fn q_fundamental_theorem_for_polynomials() {
        let base = base_half();
        let f = MatPoly::scalar_from_rats(&[rat(1, 3), rat(2, 1), rat(-5, 4), rat(7, 2)]);
        let df = qderiv_poly(&f, &base);
        let exact = qintegral_poly(&df, &base);
        let expected = &f.eval(&ExactScalar::one()) - &f.eval(&ExactScalar::zero());
        assert_eq!(exact, expected);
        // The certified route must enclose the same value.
        let g = LatticeFunction::scalar({
            let base = base_half();
            let df = df.clone();
            move |x| {
                df.eval(&ExactScalar::from_rat(base.pow(x as i64)))
                    .get(0, 0)
                    .clone()
            }
        });
        let e = qintegral(
            &g,
            &DecayCertificate::Probe { horizon: 10_000 },
            &rat(1, 1_000_000_000),
            &base,
        )
        .unwrap();
        assert!(e.contains_exact(expected.get(0, 0)));
    }

    #[test]
    fn phi21_terminating_values() {
        let base = base_half();
        // n = 0: single term.
        assert!(phi21_terminating(
            &ExactScalar::one(),
            &ExactScalar::from_ratio(9, 7),
            &ExactScalar::from_ratio(1, 5),
            &ExactScalar::from_ratio(1, 3),
            &base
        )
        .unwrap()
        .is_one());
        // z = 0.
        assert!(phi21_terminating(
            &ExactScalar::from_rat(base.pow(-3)),
            &ExactScalar::from_ratio(9, 7),
            &ExactScalar::from_ratio(1, 5),
            &ExactScalar::zero(),
            &base
        )
        .unwrap()
        .is_one());
        // Two-term sum expanded by hand for q=1/2, a=1/4, b=1/2 at z = q*1:
        // 1 + (1-q^-1)(1-abq^2)/((1-q)(1-aq)) * q = 1 - 31/28 = -3/28.
        let a = rat(1, 4);
        let b = rat(1, 2);
        let abq2 = &a * &b * base.pow(2);
        let got = phi21_terminating(
            &ExactScalar::from_rat(base.pow(-1)),
            &ExactScalar::from_rat(abq2),
            &ExactScalar::from_rat(&a * base.q()),
            &ExactScalar::from_rat(base.q().clone()),
            &base,
        )
        .unwrap();
        assert_eq!(got, ExactScalar::from_ratio(-3, 28));
        // Non-terminating upper parameter is rejected.
        assert!(matches!(
            phi21_terminating(
                &ExactScalar::from_ratio(3, 7),
                &ExactScalar::one(),
                &ExactScalar::from_ratio(1, 5),
                &ExactScalar::from_ratio(1, 3),
                &base
            ),
            Err(Error::TerminationNotDetected(_))
        ));
    }

    #[test]
    fn q_leibniz_rule() {
        // D_q^n(fg)(z) = sum_k [n,k]_q (D_q^{n-k} f)(q^k z) (D_q^k g)(z)
        // as an exact polynomial identity for scalar f, g.
        let base = base_half();
        let f = MatPoly::scalar_from_rats(&[rat(1, 2), rat(-2, 3), rat(3, 5), rat(1, 7), rat(2, 9), rat(-1, 4)]);
        let g = MatPoly::scalar_from_rats(&[rat(2, 7), rat(1, 3), rat(-4, 5), rat(5, 6), rat(-2, 11), rat(1, 8)]);
        for n in 0..=4usize {
            let mut lhs = f.mul(&g).unwrap();
            for _ in 0..n {
                lhs = qderiv_poly(&lhs, &base);
            }
            let mut rhs = MatPoly::zero(1, 1);
            for k in 0..=n {
                let mut df = f.clone();
                for _ in 0..(n - k) {
                    df = qderiv_poly(&df, &base);
                }
                let mut dg = g.clone();
                for _ in 0..k {
                    dg = qderiv_poly(&dg, &base);
                }
                let shifted = df.dilate(&base.pow_scalar(k as i64));
                let term = shifted.mul(&dg).unwrap().scale(&qbinom(n, k as i64, &base));
                rhs = rhs.add(&term);
            }
            assert_eq!(lhs, rhs, "Leibniz failed at n = {n}");
        }
    }
}
