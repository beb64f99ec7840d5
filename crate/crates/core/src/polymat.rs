//! Matrix-valued polynomials in `z` and in `z^{-1}`.
//!
//! Coefficients are stored ascending by power and the degree is recomputed
//! after every operation, so the stored degree is always the index of the
//! last nonzero coefficient.

use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::qcalc::QBase;
use crate::scalar::{ExactScalar, Rat};

/// Matrix-valued polynomial `sum_k C_k z^k`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MatPoly {
    rows: usize,
    cols: usize,
    coeffs: Vec<Mat>,
}

impl MatPoly {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            coeffs: Vec::new(),
        }
    }

    pub fn constant(c: Mat) -> Self {
        let mut p = Self {
            rows: c.rows(),
            cols: c.cols(),
            coeffs: vec![c],
        };
        p.normalize();
        p
    }

    /// The constant polynomial `I` of size `n`.
    pub fn identity(n: usize) -> Self {
        Self::constant(Mat::identity(n))
    }

    /// `C z^k`.
    pub fn monomial(k: usize, c: Mat) -> Self {
        let mut coeffs = vec![Mat::zeros(c.rows(), c.cols()); k];
        let (rows, cols) = (c.rows(), c.cols());
        coeffs.push(c);
        let mut p = Self { rows, cols, coeffs };
        p.normalize();
        p
    }

    pub fn from_coeffs(rows: usize, cols: usize, coeffs: Vec<Mat>) -> Self {
        assert!(coeffs.iter().all(|c| c.rows() == rows && c.cols() == cols));
        let mut p = Self { rows, cols, coeffs };
        p.normalize();
        p
    }

    /// Scalar (1x1) polynomial from rational coefficients.
    pub fn scalar_from_rats(coeffs: &[Rat]) -> Self {
        Self::from_coeffs(
            1,
            1,
            coeffs
                .iter()
                .map(|r| Mat::scalar(1, &ExactScalar::from_rat(r.clone())))
                .collect(),
        )
    }

    fn normalize(&mut self) {
        while self.coeffs.last().is_some_and(Mat::is_zero) {
            self.coeffs.pop();
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Square size; panics for non-square coefficient shapes.
    pub fn size(&self) -> usize {
        assert_eq!(self.rows, self.cols, "size() on non-square polynomial");
        self.rows
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[Mat] {
        &self.coeffs
    }

    /// Coefficient of `z^k` (zero matrix beyond the degree).
    pub fn coeff(&self, k: usize) -> Mat {
        self.coeffs
            .get(k)
            .cloned()
            .unwrap_or_else(|| Mat::zeros(self.rows, self.cols))
    }

    pub fn leading(&self) -> Option<&Mat> {
        self.coeffs.last()
    }

    pub fn is_monic(&self) -> bool {
        self.leading().is_some_and(Mat::is_identity)
    }

    /// Exact Horner evaluation.
    pub fn eval(&self, z: &ExactScalar) -> Mat {
        let mut acc = Mat::zeros(self.rows, self.cols);
        for c in self.coeffs.iter().rev() {
            acc = &acc.scale(z) + c;
        }
        acc
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        let mut coeffs = Vec::with_capacity(len);
        for k in 0..len {
            coeffs.push(&self.coeff(k) + &rhs.coeff(k));
        }
        Self::from_coeffs(self.rows, self.cols, coeffs)
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> Self {
        Self::from_coeffs(self.rows, self.cols, self.coeffs.iter().map(|c| -c).collect())
    }

    /// Product with matrix coefficients multiplied in order: `(PQ)_k = sum P_i Q_j`.
    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::SizeMismatch("polynomial product".into()));
        }
        if self.is_zero() || rhs.is_zero() {
            return Ok(Self::zero(self.rows, rhs.cols));
        }
        let mut coeffs =
            vec![Mat::zeros(self.rows, rhs.cols); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] = &coeffs[i + j] + &a.try_mul(b)?;
            }
        }
        Ok(Self::from_coeffs(self.rows, rhs.cols, coeffs))
    }

    /// Coefficientwise left multiplication `M * C_k`.
    pub fn left_mul(&self, m: &Mat) -> Result<Self> {
        if m.cols() != self.rows {
            return Err(Error::SizeMismatch("left multiplier".into()));
        }
        let coeffs: Result<Vec<Mat>> = self.coeffs.iter().map(|c| m.try_mul(c)).collect();
        Ok(Self::from_coeffs(m.rows(), self.cols, coeffs?))
    }

    /// Coefficientwise right multiplication `C_k * M`.
    pub fn right_mul(&self, m: &Mat) -> Result<Self> {
        if self.cols != m.rows() {
            return Err(Error::SizeMismatch("right multiplier".into()));
        }
        let coeffs: Result<Vec<Mat>> = self.coeffs.iter().map(|c| c.try_mul(m)).collect();
        Ok(Self::from_coeffs(self.rows, m.cols(), coeffs?))
    }

    pub fn scale(&self, s: &ExactScalar) -> Self {
        Self::from_coeffs(
            self.rows,
            self.cols,
            self.coeffs.iter().map(|c| c.scale(s)).collect(),
        )
    }

    /// Substitution `z -> c z` (coefficient `C_k` picks up `c^k`).
    pub fn dilate(&self, c: &ExactScalar) -> Self {
        let mut factor = ExactScalar::one();
        let coeffs = self
            .coeffs
            .iter()
            .map(|m| {
                let out = m.scale(&factor);
                factor = &factor * c;
                out
            })
            .collect();
        Self::from_coeffs(self.rows, self.cols, coeffs)
    }

    /// Row `i` as a 1xN matrix polynomial.
    pub fn row(&self, i: usize) -> Self {
        Self::from_coeffs(1, self.cols, self.coeffs.iter().map(|c| c.row(i)).collect())
    }

    /// Entry `(i, j)` as a scalar polynomial.
    pub fn entry(&self, i: usize, j: usize) -> Self {
        Self::from_coeffs(
            1,
            1,
            self.coeffs
                .iter()
                .map(|c| Mat::scalar(1, c.get(i, j)))
                .collect(),
        )
    }

    /// Assemble a square matrix polynomial from scalar entry polynomials.
    pub fn from_scalar_entries(entries: &[Vec<MatPoly>]) -> Self {
        let n = entries.len();
        assert!(entries.iter().all(|r| r.len() == n));
        let deg = entries
            .iter()
            .flatten()
            .filter_map(MatPoly::degree)
            .max()
            .unwrap_or(0);
        let coeffs = (0..=deg)
            .map(|k| {
                Mat::from_fn(n, n, |i, j| {
                    entries[i][j]
                        .coeffs
                        .get(k)
                        .map(|m| m.get(0, 0).clone())
                        .unwrap_or_else(ExactScalar::zero)
                })
            })
            .collect();
        Self::from_coeffs(n, n, coeffs)
    }

    /// JSON encoding: `{"n": size, "coeffs": [[entries row-major], ...]}` with
    /// entries as `p/q` strings, or `{"re","im"}` objects when complex.
    pub fn to_json(&self) -> serde_json::Value {
        assert_eq!(self.rows, self.cols, "JSON schema covers square polynomials");
        let coeffs: Vec<serde_json::Value> = self
            .coeffs
            .iter()
            .map(|c| {
                serde_json::Value::Array(c.entries().iter().map(scalar_to_json).collect())
            })
            .collect();
        serde_json::json!({ "n": self.rows, "coeffs": coeffs })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let n = v
            .get("n")
            .and_then(|x| x.as_u64())
            .ok_or_else(|| Error::Parse("missing \"n\"".into()))? as usize;
        let coeffs_v = v
            .get("coeffs")
            .and_then(|x| x.as_array())
            .ok_or_else(|| Error::Parse("missing \"coeffs\"".into()))?;
        let mut coeffs = Vec::with_capacity(coeffs_v.len());
        for cv in coeffs_v {
            let arr = cv
                .as_array()
                .ok_or_else(|| Error::Parse("coefficient is not an array".into()))?;
            if arr.len() != n * n {
                return Err(Error::Parse("coefficient entry count mismatch".into()));
            }
            let entries: Result<Vec<ExactScalar>> = arr.iter().map(scalar_from_json).collect();
            let entries = entries?;
            coeffs.push(Mat::from_fn(n, n, |i, j| entries[i * n + j].clone()));
        }
        Ok(Self::from_coeffs(n, n, coeffs))
    }
}

/// Entry encoding shared with the CLI: real scalars as `p/q`, complex ones
/// as `{"re": "p/q", "im": "p/q"}`.
pub fn scalar_to_json(z: &ExactScalar) -> serde_json::Value {
    if z.is_real() {
        serde_json::Value::String(crate::scalar::rat_str(z.re()))
    } else {
        serde_json::json!({
            "re": crate::scalar::rat_str(z.re()),
            "im": crate::scalar::rat_str(z.im()),
        })
    }
}

pub fn scalar_from_json(v: &serde_json::Value) -> Result<ExactScalar> {
    match v {
        serde_json::Value::String(s) => ExactScalar::parse(s),
        serde_json::Value::Object(map) => {
            let re = map
                .get("re")
                .and_then(|x| x.as_str())
                .ok_or_else(|| Error::Parse("missing re".into()))?;
            let im = map
                .get("im")
                .and_then(|x| x.as_str())
                .ok_or_else(|| Error::Parse("missing im".into()))?;
            Ok(ExactScalar::new(
                crate::scalar::parse_rational(re)?,
                crate::scalar::parse_rational(im)?,
            ))
        }
        _ => Err(Error::Parse("bad scalar encoding".into())),
    }
}

/// Matrix-valued polynomial in `z^{-1}`: `coeffs[j]` multiplies `z^{-j}`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LaurentMatPoly {
    rows: usize,
    cols: usize,
    coeffs: Vec<Mat>,
}

impl LaurentMatPoly {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            coeffs: Vec::new(),
        }
    }

    /// From coefficients of `z^0, z^{-1}, ..., z^{-d}`.
    pub fn from_coeffs(rows: usize, cols: usize, coeffs: Vec<Mat>) -> Self {
        assert!(coeffs.iter().all(|c| c.rows() == rows && c.cols() == cols));
        let mut p = Self { rows, cols, coeffs };
        while p.coeffs.last().is_some_and(Mat::is_zero) {
            p.coeffs.pop();
        }
        p
    }

    pub fn constant(c: Mat) -> Self {
        let (rows, cols) = (c.rows(), c.cols());
        Self::from_coeffs(rows, cols, vec![c])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree in `z^{-1}`; `None` for the zero polynomial.
    pub fn neg_degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[Mat] {
        &self.coeffs
    }

    pub fn coeff(&self, j: usize) -> Mat {
        self.coeffs
            .get(j)
            .cloned()
            .unwrap_or_else(|| Mat::zeros(self.rows, self.cols))
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..len).map(|j| &self.coeff(j) + &rhs.coeff(j)).collect();
        Self::from_coeffs(self.rows, self.cols, coeffs)
    }

    pub fn scale(&self, s: &ExactScalar) -> Self {
        Self::from_coeffs(
            self.rows,
            self.cols,
            self.coeffs.iter().map(|c| c.scale(s)).collect(),
        )
    }

    pub fn eval(&self, z: &ExactScalar) -> Result<Mat> {
        if z.is_zero() && self.neg_degree().unwrap_or(0) > 0 {
            return Err(Error::DivisionByZero(
                "Laurent polynomial evaluated at z = 0".into(),
            ));
        }
        let zinv = if self.coeffs.len() > 1 {
            z.inv()?
        } else {
            ExactScalar::zero()
        };
        let mut acc = Mat::zeros(self.rows, self.cols);
        for c in self.coeffs.iter().rev() {
            acc = &acc.scale(&zinv) + c;
        }
        Ok(acc)
    }
}

/// One interpolation sample: the lattice index `x` (the point is `q^x`)
/// and the matrix value there.
pub type LatticeSample = (usize, Mat);

/// Unique matrix polynomial of degree `<= degree_bound` through lattice
/// samples, solved entrywise through an exact Vandermonde system with full
/// pivoting. Extra samples beyond `degree_bound + 1` are used as a
/// consistency check.
pub fn interpolate_from_lattice(
    samples: &[LatticeSample],
    degree_bound: usize,
    base: &QBase,
) -> Result<MatPoly> {
    let need = degree_bound + 1;
    if samples.len() < need {
        return Err(Error::InsufficientSamples {
            need,
            got: samples.len(),
        });
    }
    let mut seen = std::collections::BTreeSet::new();
    for (x, _) in samples {
        if !seen.insert(*x) {
            return Err(Error::DomainViolation(format!(
                "duplicate lattice index {x}"
            )));
        }
    }
    let (rows, cols) = (samples[0].1.rows(), samples[0].1.cols());
    if samples.iter().any(|(_, m)| m.rows() != rows || m.cols() != cols) {
        return Err(Error::SizeMismatch("interpolation samples".into()));
    }

    // Vandermonde system for the first `need` nodes, all entries at once.
    let nodes: Vec<ExactScalar> = samples
        .iter()
        .map(|(x, _)| ExactScalar::from_rat(base.pow(*x as i64)))
        .collect();
    let vander = Mat::from_fn(need, need, |r, k| {
        nodes[r].pow(k as i64).expect("nonzero node")
    });
    let rhs = Mat::from_fn(need, rows * cols, |r, e| {
        samples[r].1.get(e / cols, e % cols).clone()
    });
    let sol = vander.solve(&rhs).map_err(|_| Error::InconsistentSamples)?;

    let coeffs: Vec<Mat> = (0..need)
        .map(|k| Mat::from_fn(rows, cols, |i, j| sol.get(k, i * cols + j).clone()))
        .collect();
    let poly = MatPoly::from_coeffs(rows, cols, coeffs);

    for ((_, value), node) in samples.iter().zip(nodes.iter()) {
        if &poly.eval(node) != value {
            return Err(Error::InconsistentSamples);
        }
    }
    Ok(poly)
}

/// Spec-facing alias: coefficientwise `M * P`.
pub fn left_multiply(m: &Mat, p: &MatPoly) -> Result<MatPoly> {
    p.left_mul(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn base_half() -> QBase {
        QBase::new(rat(1, 2)).unwrap()
    }

    #[test]
    fn degree_tracking() {
        let p = MatPoly::from_coeffs(
            2,
            2,
            vec![Mat::identity(2), Mat::identity(2), Mat::zeros(2, 2)],
        );
        assert_eq!(p.degree(), Some(1));
        let q = p.sub(&p);
        assert!(q.is_zero());
        assert_eq!(q.degree(), None);
    }

    #[test]
    fn eval_monomials() {
        let z = ExactScalar::from_ratio(1, 2);
        let p = MatPoly::monomial(1, Mat::identity(2));
        assert_eq!(p.eval(&z), Mat::scalar(2, &z));
        let zero = MatPoly::zero(2, 2);
        assert!(zero.eval(&z).is_zero());
    }

    #[test]
    fn interpolation_recovers_line_and_constant() {
        let base = base_half();
        // Constant samples with degree bound 1 collapse to degree 0.
        let m = Mat::two_by_two(
            ExactScalar::from_int(3),
            ExactScalar::from_int(1),
            ExactScalar::from_int(0),
            ExactScalar::from_int(2),
        );
        let p = interpolate_from_lattice(&[(0, m.clone()), (1, m.clone())], 1, &base).unwrap();
        assert_eq!(p.degree(), Some(0));
        assert_eq!(p.coeff(0), m);

        // Samples of z*I recover z*I exactly.
        let samples: Vec<LatticeSample> = (0..2)
            .map(|x| {
                let z = ExactScalar::from_rat(base.pow(x as i64));
                (x, Mat::scalar(2, &z))
            })
            .collect();
        let p = interpolate_from_lattice(&samples, 1, &base).unwrap();
        assert_eq!(p, MatPoly::monomial(1, Mat::identity(2)));
    }

    #[test]
    fn interpolation_consistency_check() {
        let base = base_half();
        // Quadratic data with degree bound 1 and three samples must fail.
        let samples: Vec<LatticeSample> = (0..3)
            .map(|x| {
                let z = ExactScalar::from_rat(base.pow(x as i64));
                (x, Mat::scalar(1, &(&z * &z)))
            })
            .collect();
        assert_eq!(
            interpolate_from_lattice(&samples, 1, &base),
            Err(Error::InconsistentSamples)
        );
    }

    #[test]
    fn laurent_eval_and_zero_rejection() {
        let f = LaurentMatPoly::from_coeffs(1, 1, vec![Mat::identity(1), Mat::identity(1)]);
        let z = ExactScalar::from_ratio(1, 4);
        let v = f.eval(&z).unwrap();
        assert_eq!(v.get(0, 0), &ExactScalar::from_int(5));
        assert!(f.eval(&ExactScalar::zero()).is_err());
    }

    #[test]
    fn json_round_trip() {
        let p = MatPoly::from_coeffs(
            2,
            2,
            vec![
                Mat::identity(2),
                Mat::two_by_two(
                    ExactScalar::new(rat(1, 2), rat(-3, 4)),
                    ExactScalar::zero(),
                    ExactScalar::from_ratio(7, 8),
                    ExactScalar::one(),
                ),
            ],
        );
        let v = p.to_json();
        let q = MatPoly::from_json(&v).unwrap();
        assert_eq!(p, q);
    }
}
