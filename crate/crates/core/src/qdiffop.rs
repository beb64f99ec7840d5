//! q-difference operators `D = sum_l E_l F_l` with right-acting Laurent
//! coefficients: `(DP)(z) = sum_l P(q^l z) F_l(z)`.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::polymat::{LaurentMatPoly, MatPoly};
use crate::qcalc::QBase;
use crate::scalar::{rat_str, Rat};
use crate::weights::QWeight;

/// Finite sum of shift terms `(l, F_l)`; `shifts[i]` holds the coefficient
/// of the shift `shift_min + i`.
#[derive(Clone)]
pub struct QDiffOp {
    base: QBase,
    shift_min: i64,
    shifts: Vec<LaurentMatPoly>,
    size: usize,
}

impl QDiffOp {
    pub fn new(base: QBase, shift_min: i64, shifts: Vec<LaurentMatPoly>) -> Result<Self> {
        let size = shifts
            .first()
            .map(LaurentMatPoly::rows)
            .ok_or_else(|| Error::DomainViolation("operator needs at least one shift".into()))?;
        if shifts
            .iter()
            .any(|f| f.rows() != size || f.cols() != size)
        {
            return Err(Error::SizeMismatch("operator coefficients".into()));
        }
        Ok(Self {
            base,
            shift_min,
            shifts,
            size,
        })
    }

    pub fn base(&self) -> &QBase {
        &self.base
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn shift_range(&self) -> (i64, i64) {
        (self.shift_min, self.shift_min + self.shifts.len() as i64 - 1)
    }

    /// Coefficient of the shift `l` (zero when absent).
    pub fn coefficient(&self, l: i64) -> LaurentMatPoly {
        let idx = l - self.shift_min;
        if idx < 0 || idx as usize >= self.shifts.len() {
            LaurentMatPoly::zero(self.size, self.size)
        } else {
            self.shifts[idx as usize].clone()
        }
    }

    /// Apply `D` to a polynomial, expanding `sum_l P(q^l z) F_l(z)`
    /// symbolically. All negative powers of `z` must cancel; a surviving one
    /// means `D` does not preserve polynomials on this input.
    pub fn apply(&self, p: &MatPoly) -> Result<MatPoly> {
        if p.cols() != self.size {
            return Err(Error::SizeMismatch("operator applied to polynomial".into()));
        }
        let mut powers: BTreeMap<i64, Mat> = BTreeMap::new();
        for (i, f) in self.shifts.iter().enumerate() {
            let l = self.shift_min + i as i64;
            for (k, c) in p.coeffs().iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let shifted = c.scale_rat(&self.base.pow(l * k as i64));
                for (j, g) in f.coeffs().iter().enumerate() {
                    if g.is_zero() {
                        continue;
                    }
                    let target = k as i64 - j as i64;
                    let term = shifted.try_mul(g)?;
                    powers
                        .entry(target)
                        .and_modify(|m| *m = &*m + &term)
                        .or_insert(term);
                }
            }
        }
        for (pow, m) in powers.iter() {
            if *pow < 0 && !m.is_zero() {
                return Err(Error::NotPolynomial(*pow));
            }
        }
        let deg = powers
            .iter()
            .filter(|(_, m)| !m.is_zero())
            .map(|(p, _)| *p)
            .max()
            .unwrap_or(-1);
        let mut coeffs = vec![Mat::zeros(p.rows(), self.size); (deg + 1).max(0) as usize];
        for (pow, m) in powers {
            if pow >= 0 && !m.is_zero() {
                coeffs[pow as usize] = m;
            }
        }
        Ok(MatPoly::from_coeffs(p.rows(), self.size, coeffs))
    }

    /// Degree-preservation test: with shifts `s..=r` and `d = r - s`, every
    /// `F_l` must have `z^{-1}`-degree at most `d`, and for `k = 0..=d` the
    /// combination `sum_l q^{lk} F_l` must have `z^{-1}`-degree at most `k`.
    pub fn preserves_polynomials_check(&self) -> PreservationVerdict {
        let d = self.shifts.len() - 1;
        for (i, f) in self.shifts.iter().enumerate() {
            if f.neg_degree().unwrap_or(0) > d {
                return PreservationVerdict::CoefficientDegreeTooHigh {
                    shift: self.shift_min + i as i64,
                };
            }
        }
        for k in 0..=d {
            let mut sum = LaurentMatPoly::zero(self.size, self.size);
            for (i, f) in self.shifts.iter().enumerate() {
                let l = self.shift_min + i as i64;
                sum = sum.add(&f.scale(&crate::scalar::ExactScalar::from_rat(
                    self.base.pow(l * k as i64),
                )));
            }
            if sum.neg_degree().unwrap_or(0) > k {
                return PreservationVerdict::CombinationDegreeTooHigh { k };
            }
        }
        PreservationVerdict::Preserves
    }

    /// The unique `Lambda` with `D P = Lambda P`, solved from the leading
    /// coefficient and then verified against the full identity.
    pub fn extract_eigenvalue(&self, p: &MatPoly) -> Result<Mat> {
        let applied = self.apply(p)?;
        let Some(d) = p.degree() else {
            return Err(Error::NotAnEigenfunction);
        };
        if applied.degree().map_or(false, |ad| ad > d) {
            return Err(Error::NotAnEigenfunction);
        }
        let lead_inv = p
            .leading()
            .expect("nonzero polynomial")
            .inverse()
            .map_err(|_| Error::NotAnEigenfunction)?;
        let lambda = applied.coeff(d).try_mul(&lead_inv)?;
        if p.left_mul(&lambda)? != applied {
            return Err(Error::NotAnEigenfunction);
        }
        Ok(lambda)
    }

    /// Pointwise symmetry verification against a q-weight for operators with
    /// shifts in `{-1, 0, 1}`:
    ///   - `F_0(q^x) W(q^x) = W(q^x) F_0(q^x)^*` for `x = 0..=x_max`,
    ///   - `F_1(q^{x-1}) W(q^{x-1}) = q W(q^x) F_{-1}(q^x)^*` for `x >= 1`,
    ///   - boundary `W(1) F_{-1}(1)^* = 0`,
    ///   - certified decay of the two limit expressions, reported as the
    ///     exact norm-bound ratio of consecutive terms near `x_max`.
    pub fn symmetry_check(&self, w: &QWeight, x_max: usize) -> Result<SymmetryReport> {
        let (s, r) = self.shift_range();
        if s < -1 || r > 1 {
            return Err(Error::DomainViolation(
                "symmetry check covers shifts {-1, 0, 1} only".into(),
            ));
        }
        if w.size() != self.size {
            return Err(Error::SizeMismatch("operator vs weight".into()));
        }
        let f0 = self.coefficient(0);
        let f1 = self.coefficient(1);
        let fm1 = self.coefficient(-1);
        let point = |x: usize| crate::scalar::ExactScalar::from_rat(self.base.pow(x as i64));
        let mut entries = Vec::new();

        for x in 0..=x_max {
            let wx = w.value(x);
            let f0x = f0.eval(&point(x))?;
            let residual = &f0x.try_mul(&wx)? - &wx.try_mul(&f0x.adjoint())?;
            entries.push(SymmetryEntry::exact("F0 W = W F0*", x, &residual));
        }
        for x in 1..=x_max {
            let lhs = f1.eval(&point(x - 1))?.try_mul(&w.value(x - 1))?;
            let rhs = w
                .value(x)
                .try_mul(&fm1.eval(&point(x))?.adjoint())?
                .scale_rat(self.base.q());
            let residual = &lhs - &rhs;
            entries.push(SymmetryEntry::exact("F1 W = q W F-1*", x, &residual));
        }
        {
            let residual = w.value(0).try_mul(&fm1.eval(&point(0))?.adjoint())?;
            entries.push(SymmetryEntry::exact("W(1) F-1(1)* = 0", 0, &residual));
        }

        // Decay certificates: B1(x) = q^{2x} F1(q^x) W(q^x) and
        // B2(x) = q^x (F1 W - W F1*)(q^x) must tend to zero; we report the
        // exact norm-bound ratio of consecutive terms, which must be < 1.
        let b1 = |x: usize| -> Result<Mat> {
            Ok(f1
                .eval(&point(x))?
                .try_mul(&w.value(x))?
                .scale_rat(&self.base.pow(2 * x as i64)))
        };
        let b2 = |x: usize| -> Result<Mat> {
            let fx = f1.eval(&point(x))?;
            let wx = w.value(x);
            Ok((&fx.try_mul(&wx)? - &wx.try_mul(&fx.adjoint())?).scale_rat(&self.base.pow(x as i64)))
        };
        for (name, func) in [
            ("decay q^2x F1 W", &b1 as &dyn Fn(usize) -> Result<Mat>),
            ("decay q^x (F1 W - W F1*)", &b2),
        ] {
            for x in x_max.saturating_sub(3)..x_max {
                let cur = func(x)?.norm_upper_bound();
                let next = func(x + 1)?.norm_upper_bound();
                let (pass, ratio) = if cur.is_zero() {
                    (next.is_zero(), Rat::zero())
                } else {
                    let ratio = next / cur;
                    (ratio < Rat::one(), ratio)
                };
                entries.push(SymmetryEntry {
                    equation: name.to_string(),
                    x,
                    pass,
                    residual: rat_str(&ratio),
                });
            }
        }
        Ok(SymmetryReport { entries })
    }
}

/// Verdict of the degree-preservation test.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PreservationVerdict {
    Preserves,
    CoefficientDegreeTooHigh { shift: i64 },
    CombinationDegreeTooHigh { k: usize },
}

impl PreservationVerdict {
    pub fn passed(&self) -> bool {
        matches!(self, PreservationVerdict::Preserves)
    }
}

/// One verified equation instance of the symmetry report.
#[derive(Clone, Debug)]
pub struct SymmetryEntry {
    pub equation: String,
    pub x: usize,
    pub pass: bool,
    /// Exact `"0"` for vanishing residuals, otherwise a rational norm bound
    /// (or decay ratio) as `p/q`.
    pub residual: String,
}

impl SymmetryEntry {
    fn exact(equation: &str, x: usize, residual: &Mat) -> Self {
        let pass = residual.is_zero();
        Self {
            equation: equation.to_string(),
            x,
            pass,
            residual: if pass {
                "0".to_string()
            } else {
                rat_str(&residual.norm_upper_bound())
            },
        }
    }
}

/// Full pointwise symmetry report.
#[derive(Clone, Debug)]
pub struct SymmetryReport {
    pub entries: Vec<SymmetryEntry>,
}

impl SymmetryReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn first_failure(&self) -> Option<&SymmetryEntry> {
        self.entries.iter().find(|e| !e.pass)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.entries
                .iter()
                .map(|e| {
                    serde_json::json!({
                        "equation": e.equation,
                        "x": e.x,
                        "pass": e.pass,
                        "residual-norm": e.residual,
                    })
                })
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, ExactScalar};

    fn base_half() -> QBase {
        QBase::new(rat(1, 2)).unwrap()
    }

    #[test]
    fn identity_operator_is_identity() {
        let base = base_half();
        let d = QDiffOp::new(
            base,
            0,
            vec![LaurentMatPoly::constant(Mat::identity(2))],
        )
        .unwrap();
        let p = MatPoly::from_coeffs(
            2,
            2,
            vec![Mat::identity(2), Mat::scalar(2, &ExactScalar::from_ratio(1, 3))],
        );
        assert_eq!(d.apply(&p).unwrap(), p);
    }

    #[test]
    fn surviving_negative_power_is_flagged() {
        let base = base_half();
        // D = E_1 (z^{-1} I) applied to I leaves z^{-1}.
        let d = QDiffOp::new(
            base,
            1,
            vec![LaurentMatPoly::from_coeffs(
                2,
                2,
                vec![Mat::zeros(2, 2), Mat::identity(2)],
            )],
        )
        .unwrap();
        assert_eq!(
            d.apply(&MatPoly::identity(2)),
            Err(Error::NotPolynomial(-1))
        );
    }

    #[test]
    fn preservation_check_examples() {
        let base = base_half();
        // Single-term D = E_1 z^{-2} I with r = s = 1 needs degree <= 0.
        let d = QDiffOp::new(
            base.clone(),
            1,
            vec![LaurentMatPoly::from_coeffs(
                2,
                2,
                vec![Mat::zeros(2, 2), Mat::zeros(2, 2), Mat::identity(2)],
            )],
        )
        .unwrap();
        assert_eq!(
            d.preserves_polynomials_check(),
            PreservationVerdict::CoefficientDegreeTooHigh { shift: 1 }
        );
        // D = E_1 I + E_{-1} I - 2 E_0 I passes: the k = 0 combination
        // vanishes and the others are constants.
        let c = |m: Mat| LaurentMatPoly::constant(m);
        let d = QDiffOp::new(
            base,
            -1,
            vec![
                c(Mat::identity(2)),
                c(Mat::identity(2).scale(&ExactScalar::from_int(-2))),
                c(Mat::identity(2)),
            ],
        )
        .unwrap();
        assert!(d.preserves_polynomials_check().passed());
    }

    #[test]
    fn scalar_operator_has_lqj_eigenfunctions() {
        let p = crate::lqjacobi::tests::params_p1();
        let d = crate::lqjacobi::lqj_operator(&p);
        assert!(d.preserves_polynomials_check().passed());
        for n in 0..=8usize {
            let poly = crate::lqjacobi::lqj_poly(n as i64, &p);
            let lambda = d.extract_eigenvalue(&poly).unwrap();
            assert_eq!(
                lambda,
                Mat::scalar(1, &ExactScalar::from_rat(crate::lqjacobi::lqj_eigenvalue(n, &p)))
            );
            // Pointwise on the lattice as well (z^{-1} terms well defined).
            let applied = d.apply(&poly).unwrap();
            for x in 0..=(n + 3) {
                let z = ExactScalar::from_rat(p.base().pow(x as i64));
                assert_eq!(
                    applied.eval(&z),
                    poly.eval(&z)
                        .scale(&ExactScalar::from_rat(crate::lqjacobi::lqj_eigenvalue(n, &p)))
                );
            }
        }
        // A generic non-eigenvector is rejected.
        let not_eigen = MatPoly::from_coeffs(1, 1, vec![Mat::identity(1), Mat::identity(1)]);
        assert_eq!(
            d.extract_eigenvalue(&not_eigen),
            Err(Error::NotAnEigenfunction)
        );
    }

    #[test]
    fn scalar_operator_symmetry() {
        let p = crate::lqjacobi::tests::params_p1();
        let d = crate::lqjacobi::lqj_operator(&p);
        let w = crate::lqjacobi::lqj_qweight(&p);
        let report = d.symmetry_check(&w, 20).unwrap();
        assert!(report.passed(), "{:?}", report.first_failure());
    }
}
