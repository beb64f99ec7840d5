//! q-weight matrices on the lattice and the two inner-product routes.
//!
//! Exact inner products go through normalized moments and stay rational;
//! the series route sums `q^x P(q^x) W(q^x) Q(q^x)^*` with a certified
//! geometric tail and exists as an independent oracle for the exact route.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use num_traits::{One, Signed, Zero};

use crate::certified::{CertifiedMat, CertifiedReal};
use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::polymat::MatPoly;
use crate::qcalc::QBase;
use crate::scalar::{rat_pow, Rat};

/// Certificate `||q^x W(q^x)|| <= coeff * ratio^x` for all `x >= onset`,
/// with `ratio < 1`; powers the series tail bounds.
#[derive(Clone, Debug)]
pub struct WeightDecay {
    coeff: Rat,
    ratio: Rat,
    onset: usize,
}

impl WeightDecay {
    pub fn new(coeff: Rat, ratio: Rat, onset: usize) -> Self {
        assert!(ratio.is_positive() && ratio < Rat::one(), "ratio in (0,1)");
        assert!(coeff.is_positive());
        Self {
            coeff,
            ratio,
            onset,
        }
    }
}

/// A q-weight: a rule `x -> W(q^x)` (Hermitian positive definite on every
/// probed point), an optional decay certificate, and an optional certified
/// global scale (e.g. `m_0`) that the rule deliberately excludes.
#[derive(Clone)]
pub struct QWeight {
    size: usize,
    rule: Arc<dyn Fn(usize) -> Mat + Send + Sync>,
    decay: Option<WeightDecay>,
    scale: Option<CertifiedReal>,
}

impl QWeight {
    pub fn new(
        size: usize,
        rule: impl Fn(usize) -> Mat + Send + Sync + 'static,
        decay: Option<WeightDecay>,
        scale: Option<CertifiedReal>,
    ) -> Self {
        Self {
            size,
            rule: Arc::new(rule),
            decay,
            scale,
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn value(&self, x: usize) -> Mat {
        let w = (self.rule)(x);
        assert_eq!((w.rows(), w.cols()), (self.size, self.size));
        w
    }

    pub fn scale(&self) -> Option<&CertifiedReal> {
        self.scale.as_ref()
    }

    pub fn with_scale(mut self, scale: CertifiedReal) -> Self {
        self.scale = Some(scale);
        self
    }

    pub fn decay(&self) -> Option<&WeightDecay> {
        self.decay.as_ref()
    }

    /// Exact positive-definiteness probe over `0..=x_max`.
    pub fn check_positive_definite(&self, x_max: usize) -> Result<()> {
        for x in 0..=x_max {
            if !self.value(x).is_positive_definite() {
                return Err(Error::NotPositiveDefinite(x));
            }
        }
        Ok(())
    }
}

/// Normalized moment matrices `M^_n`, memoized behind a lock so concurrent
/// readers are safe.
pub struct MomentProvider {
    size: usize,
    rule: Arc<dyn Fn(usize) -> Mat + Send + Sync>,
    cache: Mutex<BTreeMap<usize, Mat>>,
}

impl MomentProvider {
    /// Validates that `M^_0` is Hermitian positive definite.
    pub fn new(size: usize, rule: impl Fn(usize) -> Mat + Send + Sync + 'static) -> Result<Self> {
        let provider = Self {
            size,
            rule: Arc::new(rule),
            cache: Mutex::new(BTreeMap::new()),
        };
        let m0 = provider.moment(0);
        if !m0.is_positive_definite() {
            return Err(Error::DomainViolation(
                "M^_0 is not Hermitian positive definite".into(),
            ));
        }
        Ok(provider)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn moment(&self, n: usize) -> Mat {
        let mut cache = self.cache.lock().expect("moment cache poisoned");
        cache
            .entry(n)
            .or_insert_with(|| {
                let m = (self.rule)(n);
                assert_eq!((m.rows(), m.cols()), (self.size, self.size));
                debug_assert!(m.is_hermitian(), "moment matrix not Hermitian at n={n}");
                m
            })
            .clone()
    }
}

/// Exact bilinear expansion `<P, Q> = sum_{j,k} P_j M^_{j+k} (Q_k)^*`
/// (weight sits between `P` and `Q^*`).
pub fn inner_product_exact(p: &MatPoly, q: &MatPoly, moments: &MomentProvider) -> Result<Mat> {
    if p.cols() != moments.size() || q.cols() != moments.size() {
        return Err(Error::SizeMismatch("inner product operands".into()));
    }
    let mut acc = Mat::zeros(p.rows(), q.rows());
    for (j, pj) in p.coeffs().iter().enumerate() {
        for (k, qk) in q.coeffs().iter().enumerate() {
            let term = pj.try_mul(&moments.moment(j + k))?.try_mul(&qk.adjoint())?;
            acc = acc.try_add(&term)?;
        }
    }
    Ok(acc)
}

/// Certified series `sum_x q^x P(q^x) W(q^x) Q(q^x)^*`, truncated once the
/// geometric tail drops under `tol`. With `||q^x W(q^x)|| <= C r^x` past the
/// onset and `||P(q^x)|| <= sum_j ||P_j||` on `0 < q^x <= 1`, the tail obeys
///     sum_{x>K} ||t_x|| <= P_ub * Q_ub * C * r^{K+1} / (1 - r).
pub fn inner_product_series(
    p: &MatPoly,
    q: &MatPoly,
    w: &QWeight,
    tol: &Rat,
    base: &QBase,
) -> Result<CertifiedMat> {
    if !tol.is_positive() {
        return Err(Error::InvalidTolerance);
    }
    if p.cols() != w.size() || q.cols() != w.size() {
        return Err(Error::SizeMismatch("inner product operands".into()));
    }
    let decay = w.decay().ok_or_else(|| {
        Error::NonConvergent("weight carries no decay certificate".into())
    })?;
    let p_ub: Rat = p
        .coeffs()
        .iter()
        .map(Mat::norm_upper_bound)
        .fold(Rat::zero(), |acc, x| acc + x);
    let q_ub: Rat = q
        .coeffs()
        .iter()
        .map(Mat::norm_upper_bound)
        .fold(Rat::zero(), |acc, x| acc + x);
    let front = &p_ub * &q_ub * &decay.coeff / (Rat::one() - &decay.ratio);

    let mut acc = Mat::zeros(p.rows(), q.rows());
    let mut x = 0usize;
    loop {
        let z = crate::scalar::ExactScalar::from_rat(base.pow(x as i64));
        let term = p
            .eval(&z)
            .try_mul(&w.value(x))?
            .try_mul(&q.eval(&z).adjoint())?
            .scale_rat(&base.pow(x as i64));
        acc = acc.try_add(&term)?;
        if x >= decay.onset {
            let tail = &front * rat_pow(&decay.ratio, x as i64 + 1);
            if tail <= *tol {
                return CertifiedMat::from_exact(&acc).widen_all(&tail);
            }
        }
        x += 1;
        if x > 1_000_000 {
            return Err(Error::NonConvergent("series truncation overflow".into()));
        }
    }
}

/// Monic orthogonal polynomials `P_0..P_{n_max}` from moments alone: for
/// each `n`, the coefficients solve the exact linear system forcing
/// `<P_n, z^k I> = 0` for `k < n`. Construction-independent of any closed
/// form, so it cross-validates the explicit families.
pub fn gram_schmidt_monic(n_max: usize, moments: &MomentProvider) -> Result<Vec<MatPoly>> {
    gram_schmidt_monic_inner(n_max, moments)
}

fn gram_schmidt_monic_inner(n_max: usize, moments: &MomentProvider) -> Result<Vec<MatPoly>> {
    let size = moments.size();
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(MatPoly::identity(size));
    for n in 1..=n_max {
        // Unknown row block U = [X_0 ... X_{n-1}] solving U H = R with
        // H the block Hankel (M^_{j+k})_{j,k<n} and R = -[M^_n .. M^_{2n-1}].
        let dim = n * size;
        let h = Mat::from_fn(dim, dim, |r, c| {
            let (j, jj) = (r / size, r % size);
            let (k, kk) = (c / size, c % size);
            moments.moment(j + k).get(jj, kk).clone()
        });
        let r = Mat::from_fn(size, dim, |i, c| {
            let (k, kk) = (c / size, c % size);
            (-moments.moment(n + k).get(i, kk)).clone()
        });
        // U H = R  <=>  H^T U^T = R^T.
        let ut = h
            .transpose()
            .solve(&r.transpose())
            .map_err(|_| Error::SingularMomentMatrix(n))?;
        let u = ut.transpose();
        let mut coeffs: Vec<Mat> = (0..n)
            .map(|k| Mat::from_fn(size, size, |i, j| u.get(i, k * size + j).clone()))
            .collect();
        coeffs.push(Mat::identity(size));
        out.push(MatPoly::from_coeffs(size, size, coeffs));
    }
    Ok(out)
}

/// Outcome of the commuting-values probe for reducibility.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Reducibility {
    /// All probed pairs commute; the weight may reduce to scalar weights.
    ReducibleCandidate,
    /// First lattice pair whose weight values do not commute.
    IrreducibleWitness { x: usize, y: usize },
}

/// Probe `W(q^x) W(q^y) = W(q^y) W(q^x)` for all pairs `x < y <= x_max`.
/// Requires the normalization `W(q^0) = I`.
pub fn reducibility_check(w: &QWeight, x_max: usize) -> Result<Reducibility> {
    if !w.value(0).is_identity() {
        return Err(Error::DomainViolation(
            "reducibility probe requires W(q^0) = I".into(),
        ));
    }
    for x in 1..=x_max {
        for y in (x + 1)..=x_max {
            if !w.value(x).commutator(&w.value(y))?.is_zero() {
                return Ok(Reducibility::IrreducibleWitness { x, y });
            }
        }
    }
    Ok(Reducibility::ReducibleCandidate)
}

/// Build a weight from symmetry data (first-order coefficients `F_1`,
/// `F_{-1}` and the scalar profile `s^2`): after checking the compatibility
/// product `F_1(q^{x-1}) F_{-1}(q^x) = q s^2(q^x) I` exactly, the weight is
/// tabulated by the forward recursion
///     `W(q^0) = I`,
///     `W(q^x) = q^{-1} F_1(q^{x-1}) W(q^{x-1}) (F_{-1}(q^x)^*)^{-1}`,
/// which is equivalent to `W = T T^*`. Every produced value is verified
/// Hermitian positive definite.
pub fn construct_weight_from_symmetry(
    f1: &crate::polymat::LaurentMatPoly,
    f_minus1: &crate::polymat::LaurentMatPoly,
    s_squared: impl Fn(usize) -> Rat,
    x_max: usize,
    base: &QBase,
) -> Result<Vec<Mat>> {
    let size = f1.rows();
    let point = |x: usize| crate::scalar::ExactScalar::from_rat(base.pow(x as i64));
    for x in 1..=x_max {
        let s2 = s_squared(x);
        if !s2.is_positive() {
            return Err(Error::DomainViolation(format!(
                "s^2(q^{x}) must be positive"
            )));
        }
        let lhs = f1.eval(&point(x - 1))?.try_mul(&f_minus1.eval(&point(x))?)?;
        let rhs = Mat::identity(size).scale_rat(&(base.q() * &s2));
        if lhs != rhs {
            return Err(Error::CompatibilityViolated(x));
        }
    }
    let mut table = Vec::with_capacity(x_max + 1);
    table.push(Mat::identity(size));
    for x in 1..=x_max {
        let prev: &Mat = &table[x - 1];
        let fm1_adj_inv = f_minus1
            .eval(&point(x))?
            .adjoint()
            .inverse()
            .map_err(|_| Error::NotPositiveDefinite(x))?;
        let w = f1
            .eval(&point(x - 1))?
            .try_mul(prev)?
            .try_mul(&fm1_adj_inv)?
            .scale_rat(&base.pow(-1));
        if !w.is_positive_definite() {
            return Err(Error::NotPositiveDefinite(x));
        }
        table.push(w);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polymat::LaurentMatPoly;
    use crate::scalar::{rat, ExactScalar};

    fn diag_weight() -> QWeight {
        QWeight::new(
            2,
            |x| {
                Mat::two_by_two(
                    ExactScalar::from_rat(rat_pow(&rat(1, 2), x as i64)),
                    ExactScalar::zero(),
                    ExactScalar::zero(),
                    ExactScalar::from_rat(rat_pow(&rat(1, 3), x as i64)),
                )
            },
            None,
            None,
        )
    }

    #[test]
    fn moment_provider_rejects_bad_m0() {
        // M^_0 not positive definite.
        let res = MomentProvider::new(1, |_| Mat::scalar(1, &ExactScalar::from_int(-1)));
        assert!(res.is_err());
    }

    #[test]
    fn exact_inner_product_is_sesquilinear() {
        let p = crate::lqjacobi::tests::params_p1();
        let moments = crate::lqjacobi::lqj_moment_provider(&p).unwrap();
        let f = crate::lqjacobi::lqj_poly(2, &p);
        let g = crate::lqjacobi::lqj_poly(3, &p);
        let m = Mat::scalar(1, &ExactScalar::from_ratio(-3, 7));
        let lhs = inner_product_exact(&f.left_mul(&m).unwrap(), &g, &moments).unwrap();
        let rhs = m
            .try_mul(&inner_product_exact(&f, &g, &moments).unwrap())
            .unwrap();
        assert_eq!(lhs, rhs);
        let lhs2 = inner_product_exact(&f, &g.left_mul(&m).unwrap(), &moments).unwrap();
        let rhs2 = inner_product_exact(&f, &g, &moments)
            .unwrap()
            .try_mul(&m.adjoint())
            .unwrap();
        assert_eq!(lhs2, rhs2);
    }

    #[test]
    fn trivial_moment_identities() {
        let p = crate::lqjacobi::tests::params_p1();
        let moments = crate::lqjacobi::lqj_moment_provider(&p).unwrap();
        let one = MatPoly::identity(1);
        let z = MatPoly::monomial(1, Mat::identity(1));
        assert_eq!(
            inner_product_exact(&one, &one, &moments).unwrap(),
            moments.moment(0)
        );
        assert_eq!(
            inner_product_exact(&z, &one, &moments).unwrap(),
            moments.moment(1)
        );
    }

    #[test]
    fn series_encloses_scalar_m0() {
        let p = crate::lqjacobi::tests::params_p1();
        let w = crate::lqjacobi::lqj_qweight(&p);
        let tol = rat(1, 1_000_000_000_000);
        let one = MatPoly::identity(1);
        let series = inner_product_series(&one, &one, &w, &tol, p.base()).unwrap();
        assert!(series.max_rad() <= tol);
        // Independent route: m_0 = (abq^2;q)_inf/(aq;q)_inf.
        let m0 = crate::lqjacobi::lqj_m0(&p, &tol).unwrap();
        assert!(series.entry(0, 0).re.intersects(&m0));
        assert!(series.entry(0, 0).im.contains_rat(&rat(0, 1)));
    }

    #[test]
    fn series_mode_encloses_exact_mode() {
        let p = crate::lqjacobi::tests::params_p1();
        let w = crate::lqjacobi::lqj_qweight(&p);
        let moments = crate::lqjacobi::lqj_moment_provider(&p).unwrap();
        let tol = rat(1, 1_000_000_000_000);
        let m0 = crate::lqjacobi::lqj_m0(&p, &tol).unwrap();
        for (f, g) in [
            (crate::lqjacobi::lqj_poly(1, &p), crate::lqjacobi::lqj_poly(1, &p)),
            (crate::lqjacobi::lqj_poly(2, &p), crate::lqjacobi::lqj_poly(0, &p)),
            (
                MatPoly::monomial(2, Mat::identity(1)),
                MatPoly::monomial(1, Mat::identity(1)),
            ),
        ] {
            let series = inner_product_series(&f, &g, &w, &tol, p.base()).unwrap();
            let exact = inner_product_exact(&f, &g, &moments).unwrap();
            let scaled = CertifiedMat::from_exact(&exact).scale_real(&m0);
            // Both enclose scale * exact value: boxes must intersect, and the
            // series box must contain the midpoint product box up to its rad.
            assert!(series.entry(0, 0).re.intersects(&scaled.entry(0, 0).re));
        }
    }

    #[test]
    fn gram_schmidt_matches_scalar_monic_family() {
        let p = crate::lqjacobi::tests::params_p1();
        let moments = crate::lqjacobi::lqj_moment_provider(&p).unwrap();
        let polys = gram_schmidt_monic(6, &moments).unwrap();
        assert_eq!(polys[0], MatPoly::identity(1));
        for n in 0..=6usize {
            assert_eq!(polys[n], crate::lqjacobi::lqj_monic(n, &p), "n={n}");
        }
        // Orthogonality and positive-definite Gamma_n.
        for m in 0..=6usize {
            for n in 0..=6usize {
                let g = inner_product_exact(&polys[m], &polys[n], &moments).unwrap();
                if m == n {
                    assert!(g.is_positive_definite());
                } else {
                    assert!(g.is_zero());
                }
            }
        }
    }

    #[test]
    fn reducibility_on_diagonal_weight() {
        let w = diag_weight();
        assert_eq!(
            reducibility_check(&w, 6).unwrap(),
            Reducibility::ReducibleCandidate
        );
    }

    #[test]
    fn weight_construction_detects_scaled_f1() {
        // Scalar case: F_1 = a(bq - z^{-1}), F_{-1} = 1 - z^{-1} satisfy the
        // compatibility product with s^2(q^x) = a q^{-2x}(1-q^x)(1-bq^x);
        // scaling F_1 by 2 must violate it.
        let p = crate::lqjacobi::tests::params_p1();
        let base = p.base().clone();
        let a = p.a().clone();
        let b = p.b().clone();
        let sc = |r: Rat| Mat::scalar(1, &ExactScalar::from_rat(r));
        let f1 = LaurentMatPoly::from_coeffs(1, 1, vec![sc(&a * &b * base.q()), sc(-a.clone())]);
        let fm1 = LaurentMatPoly::from_coeffs(1, 1, vec![sc(Rat::one()), sc(-Rat::one())]);
        let s2 = {
            let base = base.clone();
            let (a, b) = (a.clone(), b.clone());
            move |x: usize| {
                &a * base.pow(-2 * x as i64)
                    * (Rat::one() - base.pow(x as i64))
                    * (Rat::one() - &b * base.pow(x as i64))
            }
        };
        let table = construct_weight_from_symmetry(&f1, &fm1, &s2, 8, &base).unwrap();
        for (x, w) in table.iter().enumerate() {
            assert_eq!(
                w.get(0, 0),
                &ExactScalar::from_rat(crate::lqjacobi::scalar_weight_value(&p, x)),
                "x={x}"
            );
        }
        let f1_scaled = f1.scale(&ExactScalar::from_int(2));
        assert_eq!(
            construct_weight_from_symmetry(&f1_scaled, &fm1, &s2, 8, &base),
            Err(Error::CompatibilityViolated(1))
        );
    }
}
