//! Dense matrices over the Gaussian rationals with exact linear algebra.
//!
//! Solving and inversion use Gaussian elimination with full pivoting (the
//! pivot maximising `|re| + |im|` among the remaining block), so every result
//! is exact; there is no conditioning concern, only pivot nonzeroness.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::scalar::{ExactScalar, Rat};

/// Row-major dense matrix of exact scalars.
#[derive(Clone, PartialEq, Eq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<ExactScalar>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ExactScalar::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, ExactScalar::one());
        }
        m
    }

    /// Scalar multiple of the identity.
    pub fn scalar(n: usize, s: &ExactScalar) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, s.clone());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> ExactScalar) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<ExactScalar>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    /// 2x2 helper used throughout the family construction.
    pub fn two_by_two(a: ExactScalar, b: ExactScalar, c: ExactScalar, d: ExactScalar) -> Self {
        Self {
            rows: 2,
            cols: 2,
            data: vec![a, b, c, d],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[ExactScalar] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> &ExactScalar {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: ExactScalar) {
        self.data[i * self.cols + j] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(ExactScalar::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        self.is_square() && *self == Self::identity(self.rows)
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn conj(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self.get(i, j).conj())
    }

    pub fn scale(&self, s: &ExactScalar) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self.get(i, j) * s)
    }

    pub fn scale_rat(&self, r: &Rat) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self.get(i, j).scale(r))
    }

    pub fn row(&self, i: usize) -> Self {
        Self::from_fn(1, self.cols, |_, j| self.get(i, j).clone())
    }

    pub fn col(&self, j: usize) -> Self {
        Self::from_fn(self.rows, 1, |i, _| self.get(i, j).clone())
    }

    pub fn is_hermitian(&self) -> bool {
        self.is_square() && *self == self.adjoint()
    }

    /// Max row sum of `|re| + |im|`: a rational upper bound on the
    /// operator infinity-norm of the matrix.
    pub fn norm_upper_bound(&self) -> Rat {
        (0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .map(|j| self.get(i, j).abs_upper_bound())
                    .fold(Rat::zero(), |acc, x| acc + x)
            })
            .max()
            .unwrap_or_else(Rat::zero)
    }

    fn check_same_shape(&self, rhs: &Self) -> Result<()> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::SizeMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, rhs: &Self) -> Result<Self> {
        self.check_same_shape(rhs)?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn try_sub(&self, rhs: &Self) -> Result<Self> {
        self.check_same_shape(rhs)?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn try_mul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::SizeMismatch(format!(
                "{}x{} * {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        Ok(Self::from_fn(self.rows, rhs.cols, |i, j| {
            let mut acc = ExactScalar::zero();
            for k in 0..self.cols {
                acc = &acc + &(self.get(i, k) * rhs.get(k, j));
            }
            acc
        }))
    }

    /// Solve `self * X = rhs` exactly by Gaussian elimination with full pivoting.
    pub fn solve(&self, rhs: &Self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::SizeMismatch("solve needs a square matrix".into()));
        }
        if self.rows != rhs.rows {
            return Err(Error::SizeMismatch("solve rhs row mismatch".into()));
        }
        let n = self.rows;
        let m = rhs.cols;
        let mut a = self.clone();
        let mut b = rhs.clone();
        // col_perm[k] = original column index placed at pivot position k.
        let mut col_perm: Vec<usize> = (0..n).collect();

        for k in 0..n {
            // Full pivot: largest |re|+|im| in the trailing block.
            let mut best: Option<(usize, usize, Rat)> = None;
            for i in k..n {
                for j in k..n {
                    let mag = a.get(i, j).abs_upper_bound();
                    if !mag.is_zero() && best.as_ref().is_none_or(|(_, _, m0)| mag > *m0) {
                        best = Some((i, j, mag));
                    }
                }
            }
            let Some((pi, pj, _)) = best else {
                return Err(Error::SingularMatrix);
            };
            if pi != k {
                for j in 0..n {
                    a.data.swap(pi * n + j, k * n + j);
                }
                for j in 0..m {
                    b.data.swap(pi * m + j, k * m + j);
                }
            }
            if pj != k {
                for i in 0..n {
                    a.data.swap(i * n + pj, i * n + k);
                }
                col_perm.swap(pj, k);
            }
            let pivot = a.get(k, k).clone();
            let pivot_inv = pivot.inv().map_err(|_| Error::SingularMatrix)?;
            for i in (k + 1)..n {
                if a.get(i, k).is_zero() {
                    continue;
                }
                let factor = a.get(i, k) * &pivot_inv;
                for j in k..n {
                    let v = a.get(i, j) - &(&factor * a.get(k, j));
                    a.set(i, j, v);
                }
                for j in 0..m {
                    let v = b.get(i, j) - &(&factor * b.get(k, j));
                    b.set(i, j, v);
                }
            }
        }

        // Back substitution into permuted-variable order.
        let mut y = Mat::zeros(n, m);
        for k in (0..n).rev() {
            for j in 0..m {
                let mut acc = b.get(k, j).clone();
                for l in (k + 1)..n {
                    acc = &acc - &(a.get(k, l) * y.get(l, j));
                }
                y.set(k, j, &acc * &a.get(k, k).inv().map_err(|_| Error::SingularMatrix)?);
            }
        }
        // Undo the column permutation.
        let mut x = Mat::zeros(n, m);
        for k in 0..n {
            for j in 0..m {
                x.set(col_perm[k], j, y.get(k, j).clone());
            }
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<Self> {
        self.solve(&Self::identity(self.rows))
    }

    pub fn det(&self) -> Result<ExactScalar> {
        if !self.is_square() {
            return Err(Error::SizeMismatch("determinant of non-square".into()));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut det = ExactScalar::one();
        for k in 0..n {
            // Partial (column) pivot is enough over an exact field.
            let Some(p) = (k..n).find(|&i| !a.get(i, k).is_zero()) else {
                return Ok(ExactScalar::zero());
            };
            if p != k {
                for j in 0..n {
                    a.data.swap(p * n + j, k * n + j);
                }
                det = -det;
            }
            let pivot = a.get(k, k).clone();
            det = &det * &pivot;
            let pivot_inv = pivot.inv().expect("nonzero pivot");
            for i in (k + 1)..n {
                if a.get(i, k).is_zero() {
                    continue;
                }
                let factor = a.get(i, k) * &pivot_inv;
                for j in k..n {
                    let v = a.get(i, j) - &(&factor * a.get(k, j));
                    a.set(i, j, v);
                }
            }
        }
        Ok(det)
    }

    /// Rank via row echelon reduction.
    pub fn rank(&self) -> usize {
        self.row_echelon().1.len()
    }

    /// Solve a possibly overdetermined but consistent system
    /// `self * x = rhs` (rhs one column); free variables are set to zero.
    pub fn solve_consistent(&self, rhs: &Self) -> Result<Self> {
        if rhs.cols != 1 || rhs.rows != self.rows {
            return Err(Error::SizeMismatch("solve_consistent rhs".into()));
        }
        let aug = Self::from_fn(self.rows, self.cols + 1, |i, j| {
            if j < self.cols {
                self.get(i, j).clone()
            } else {
                rhs.get(i, 0).clone()
            }
        });
        let (rref, pivots) = aug.row_echelon();
        if pivots.iter().any(|&(_, c)| c == self.cols) {
            return Err(Error::Inconsistency("inconsistent linear system".into()));
        }
        let mut x = Self::zeros(self.cols, 1);
        for &(r, c) in &pivots {
            x.set(c, 0, rref.get(r, self.cols).clone());
        }
        if &self.try_mul(&x)? != rhs {
            return Err(Error::Inconsistency("solution verification failed".into()));
        }
        Ok(x)
    }

    /// Basis of the right null space, as column vectors.
    pub fn null_space(&self) -> Vec<Mat> {
        let (rref, pivots) = self.row_echelon();
        let pivot_cols: Vec<usize> = pivots.iter().map(|&(_, c)| c).collect();
        let mut basis = Vec::new();
        for free in (0..self.cols).filter(|c| !pivot_cols.contains(c)) {
            let mut v = Mat::zeros(self.cols, 1);
            v.set(free, 0, ExactScalar::one());
            for &(r, c) in pivots.iter() {
                v.set(c, 0, -rref.get(r, free).clone());
            }
            basis.push(v);
        }
        basis
    }

    /// Reduced row echelon form plus the (row, col) pivot list.
    fn row_echelon(&self) -> (Mat, Vec<(usize, usize)>) {
        let mut a = self.clone();
        let (n, m) = (self.rows, self.cols);
        let mut pivots = Vec::new();
        let mut r = 0usize;
        for c in 0..m {
            let Some(p) = (r..n).find(|&i| !a.get(i, c).is_zero()) else {
                continue;
            };
            if p != r {
                for j in 0..m {
                    a.data.swap(p * m + j, r * m + j);
                }
            }
            let inv = a.get(r, c).inv().expect("nonzero pivot");
            for j in 0..m {
                let v = a.get(r, j) * &inv;
                a.set(r, j, v);
            }
            for i in 0..n {
                if i != r && !a.get(i, c).is_zero() {
                    let factor = a.get(i, c).clone();
                    for j in 0..m {
                        let v = a.get(i, j) - &(&factor * a.get(r, j));
                        a.set(i, j, v);
                    }
                }
            }
            pivots.push((r, c));
            r += 1;
            if r == n {
                break;
            }
        }
        (a, pivots)
    }

    /// Exact Hermitian positive-definiteness test: all leading principal
    /// minors are (real and) strictly positive.
    pub fn is_positive_definite(&self) -> bool {
        if !self.is_hermitian() {
            return false;
        }
        for k in 1..=self.rows {
            let minor = Self::from_fn(k, k, |i, j| self.get(i, j).clone());
            let d = minor.det().expect("square minor");
            if !d.is_real() || !d.re().is_positive() {
                return false;
            }
        }
        true
    }

    /// Commutator `self*rhs - rhs*self`.
    pub fn commutator(&self, rhs: &Self) -> Result<Self> {
        self.try_mul(rhs)?.try_sub(&rhs.try_mul(self)?)
    }
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|j| self.get(i, j).to_display_string())
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl Add<&Mat> for &Mat {
    type Output = Mat;
    fn add(self, rhs: &Mat) -> Mat {
        self.try_add(rhs).expect("shape mismatch in +")
    }
}

impl Sub<&Mat> for &Mat {
    type Output = Mat;
    fn sub(self, rhs: &Mat) -> Mat {
        self.try_sub(rhs).expect("shape mismatch in -")
    }
}

impl Mul<&Mat> for &Mat {
    type Output = Mat;
    fn mul(self, rhs: &Mat) -> Mat {
        self.try_mul(rhs).expect("shape mismatch in *")
    }
}

impl Neg for &Mat {
    type Output = Mat;
    fn neg(self) -> Mat {
        Mat::from_fn(self.rows, self.cols, |i, j| -self.get(i, j))
    }
}
