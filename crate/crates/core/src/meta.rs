//! Matrix-valued basic hypergeometric series `2eta1`, the matrix
//! q-difference equation it solves, indicial exponents at `z = 0`, and
//! termination analysis.

use std::sync::Mutex;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::certified::CertifiedMat;
use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::polymat::MatPoly;
use crate::qcalc::QBase;
use crate::scalar::{sqrt_upper_bound, ExactScalar, Rat};

/// Cached ordered products `(A, B; C; q)_k`:
/// `(A,B;C;q)_k = (A,B;C;q)_{k-1} (I - q^{k-1}A - q^{2k-2}B)(I - q^k C)^{-1}`.
/// The spectrum condition on `C` is enforced per step: a singular
/// `I - q^k C` raises [`Error::SingularFactor`] with the offending `k`.
pub struct MatrixQPochState {
    a: Mat,
    b: Mat,
    c: Mat,
    base: QBase,
    cache: Mutex<Vec<Mat>>,
}

impl MatrixQPochState {
    pub fn new(a: Mat, b: Mat, c: Mat, base: QBase) -> Result<Self> {
        let n = a.rows();
        for (m, name) in [(&a, "A"), (&b, "B"), (&c, "C")] {
            if m.rows() != n || m.cols() != n {
                return Err(Error::SizeMismatch(format!("parameter {name}")));
            }
        }
        Ok(Self {
            a,
            b,
            c,
            base,
            cache: Mutex::new(vec![Mat::identity(n)]),
        })
    }

    pub fn size(&self) -> usize {
        self.a.rows()
    }

    /// The ordered product `(A, B; C; q)_k`.
    pub fn prefix(&self, k: usize) -> Result<Mat> {
        let mut cache = self.cache.lock().expect("product cache poisoned");
        while cache.len() <= k {
            let i = cache.len(); // next step index
            let step = self.step_numerator(i)?.try_mul(&self.step_denominator_inv(i)?)?;
            let next = cache.last().expect("nonempty").try_mul(&step)?;
            cache.push(next);
        }
        Ok(cache[k].clone())
    }

    /// `I - q^{k-1} A - q^{2k-2} B` for step `k >= 1`.
    pub fn step_numerator(&self, k: usize) -> Result<Mat> {
        let n = self.size();
        let qk1 = self.base.pow(k as i64 - 1);
        let q2k2 = self.base.pow(2 * k as i64 - 2);
        Ok(&(&Mat::identity(n) - &self.a.scale_rat(&qk1)) - &self.b.scale_rat(&q2k2))
    }

    fn step_denominator_inv(&self, k: usize) -> Result<Mat> {
        let n = self.size();
        let factor = &Mat::identity(n) - &self.c.scale_rat(&self.base.pow(k as i64));
        factor.inverse().map_err(|_| Error::SingularFactor(k))
    }
}

/// `(A, B; C; q)_k`, exact.
pub fn matrix_qpoch(a: &Mat, b: &Mat, c: &Mat, k: usize, base: &QBase) -> Result<Mat> {
    MatrixQPochState::new(a.clone(), b.clone(), c.clone(), base.clone())?.prefix(k)
}

/// Exact partial sum `sum_{k<=k_max} (A,B;C;q)_k z^k/(q;q)_k` of the series.
pub fn eta21_partial(
    a: &Mat,
    b: &Mat,
    c: &Mat,
    z: &ExactScalar,
    k_max: usize,
    base: &QBase,
) -> Result<Mat> {
    let state = MatrixQPochState::new(a.clone(), b.clone(), c.clone(), base.clone())?;
    let n = state.size();
    let mut acc = Mat::zeros(n, n);
    let mut zk = ExactScalar::one();
    let mut qq = ExactScalar::one();
    for k in 0..=k_max {
        if k > 0 {
            zk = &zk * z;
            qq = &qq * &(&ExactScalar::one() - &base.pow_scalar(k as i64));
        }
        let term = state.prefix(k)?.scale(&zk.div(&qq)?);
        acc = &acc + &term;
    }
    Ok(acc)
}

/// Certified enclosure of the full series for `|z| < 1`.
///
/// Tail bound: for `k >= K`, with `s = ||A|| + ||B||` and `c = ||C||`,
///     `||fac_i|| <= (1 + q^{i-1} s)/(1 - q^i c) =: f_i` (decreasing in i),
/// so consecutive terms shrink by at least
///     `r_K = |z| f_{K+1} / (1 - q^{K+1})`,
/// and once `r_K < 1` the tail is at most `||term_K|| r_K/(1 - r_K)`.
pub fn eta21_enclosure(
    a: &Mat,
    b: &Mat,
    c: &Mat,
    z: &ExactScalar,
    tol: &Rat,
    base: &QBase,
) -> Result<CertifiedMat> {
    if !tol.is_positive() {
        return Err(Error::InvalidTolerance);
    }
    if z.norm_sqr() >= Rat::one() {
        return Err(Error::NonConvergent("|z| >= 1 in enclosure mode".into()));
    }
    let state = MatrixQPochState::new(a.clone(), b.clone(), c.clone(), base.clone())?;
    let n = state.size();
    let z_ub = sqrt_upper_bound(&z.norm_sqr());
    let s = a.norm_upper_bound() + b.norm_upper_bound();
    let c_ub = c.norm_upper_bound();

    let mut acc = Mat::zeros(n, n);
    let mut zk = ExactScalar::one();
    let mut qq = ExactScalar::one();
    let mut k = 0usize;
    loop {
        if k > 0 {
            zk = &zk * z;
            qq = &qq * &(&ExactScalar::one() - &base.pow_scalar(k as i64));
        }
        let term = state.prefix(k)?.scale(&zk.div(&qq)?);
        acc = &acc + &term;

        let denom_gap = Rat::one() - &base.pow(k as i64 + 1) * &c_ub;
        if denom_gap.is_positive() {
            let f_next = (Rat::one() + base.pow(k as i64) * &s) / denom_gap;
            let r = &z_ub * f_next / (Rat::one() - base.pow(k as i64 + 1));
            if r < Rat::one() {
                let tail = term.norm_upper_bound() * &r / (Rat::one() - &r);
                if tail <= *tol {
                    return CertifiedMat::from_exact(&acc).widen_all(&tail);
                }
            }
        }
        k += 1;
        if k > 1_000_000 {
            return Err(Error::NonConvergent("eta21 truncation overflow".into()));
        }
    }
}

/// Terminating row series `F(z) = F0 * 2eta1(A, B; C; q; qz)` as an exact
/// row polynomial: the coefficient of `z^k` is `F0 (A,B;C;q)_k q^k/(q;q)_k`.
/// Terminates at the first `k` with `F0 (A,B;C;q)_k = 0` (all later
/// coefficients vanish with it); fails if none occurs by `k_max`.
pub fn row_eta21_terminating(
    f0: &Mat,
    a: &Mat,
    b: &Mat,
    c: &Mat,
    base: &QBase,
    k_max: usize,
) -> Result<MatPoly> {
    if f0.rows() != 1 || f0.cols() != a.rows() {
        return Err(Error::SizeMismatch("row vector F0".into()));
    }
    let state = MatrixQPochState::new(a.clone(), b.clone(), c.clone(), base.clone())?;
    let mut coeffs: Vec<Mat> = Vec::new();
    let mut factor = ExactScalar::one(); // q^k/(q;q)_k
    for k in 0..=k_max {
        if k > 0 {
            factor = &factor
                * &base
                    .pow_scalar(1)
                    .div(&(&ExactScalar::one() - &base.pow_scalar(k as i64)))?;
        }
        let row = f0.try_mul(&state.prefix(k)?)?;
        if row.is_zero() {
            return Ok(MatPoly::from_coeffs(1, f0.cols(), coeffs));
        }
        coeffs.push(row.scale(&factor));
    }
    Err(Error::TerminationFailure(k_max))
}

/// Verdict of the pointwise q-difference equation check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolutionVerdict {
    Satisfied,
    /// First sample (as display string) where the equation fails.
    FailsAt(String),
}

/// Check that a given row polynomial satisfies
/// `F(q^{-1}z)(1-z) + F(z)(-I-C+zA) + F(qz)(C+zB) = 0` at each sample
/// point. Pairing a solution of one equation with the coefficients of
/// another (say, a perturbed `C`) is what makes this a real test: a series
/// built from the same `(A, B, C)` solves its own equation identically.
pub fn check_qdiff_equation(
    f: &MatPoly,
    a: &Mat,
    b: &Mat,
    c: &Mat,
    samples: &[ExactScalar],
    base: &QBase,
) -> Result<SolutionVerdict> {
    let n = a.rows();
    let identity = Mat::identity(n);
    for z in samples {
        let z_prev = z.div(&base.pow_scalar(1))?;
        let z_next = z * &base.pow_scalar(1);
        let coeff_prev = Mat::scalar(n, &(&ExactScalar::one() - z));
        let coeff_mid = &(&identity.scale(&-ExactScalar::one()) - c) + &a.scale(z);
        let coeff_next = c + &b.scale(z);
        let lhs = f
            .eval(&z_prev)
            .try_mul(&coeff_prev)?
            .try_add(&f.eval(z).try_mul(&coeff_mid)?)?
            .try_add(&f.eval(&z_next).try_mul(&coeff_next)?)?;
        if !lhs.is_zero() {
            return Ok(SolutionVerdict::FailsAt(format!("{z}")));
        }
    }
    Ok(SolutionVerdict::Satisfied)
}

/// Check that `F(z) = F0 * 2eta1(A,B;C;q;qz)` (terminating case, exact)
/// satisfies the matrix q-difference equation with the same coefficients at
/// each sample point.
pub fn verify_qdiff_solution(
    f0: &Mat,
    a: &Mat,
    b: &Mat,
    c: &Mat,
    samples: &[ExactScalar],
    base: &QBase,
    k_max: usize,
) -> Result<SolutionVerdict> {
    if f0.is_zero() {
        return Ok(SolutionVerdict::Satisfied);
    }
    let f = row_eta21_terminating(f0, a, b, c, base, k_max)?;
    check_qdiff_equation(&f, a, b, c, samples, base)
}

/// One rational indicial root `w = q^mu` with its multiplicities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndicialRoot {
    pub w: Rat,
    /// Multiplicity as a root of the cleared determinant polynomial.
    pub algebraic_multiplicity: usize,
    /// `dim ker` of the (transposed-conjugated) pencil at the root.
    pub kernel_dim: usize,
}

/// Report of the indicial analysis at `z = 0`.
#[derive(Clone, Debug)]
pub struct IndicialReport {
    pub roots: Vec<IndicialRoot>,
    /// Determinant polynomial left after dividing out the rational roots
    /// (ascending coefficients); degree 0 means all roots were rational.
    pub residual: Vec<ExactScalar>,
    /// False when the divisor enumeration hit `search_bound` before
    /// exhausting candidates, so rational roots may be missing.
    pub complete: bool,
}

/// Solve `det(w^{-1} R1 + S1 + w T1) = 0` as the polynomial equation
/// `det(R1 + w S1 + w^2 T1) = 0` in `w` (exact, over Gaussian rationals).
/// Returns every rational root found (with multiplicities) and the residual
/// polynomial carrying any remaining non-rational roots.
pub fn indicial_exponents(
    r1: &Mat,
    s1: &Mat,
    t1: &Mat,
    base: &QBase,
    search_bound: usize,
) -> Result<IndicialReport> {
    let n = r1.rows();
    if s1.rows() != n || t1.rows() != n || !r1.is_square() || !s1.is_square() || !t1.is_square() {
        return Err(Error::SizeMismatch("indicial pencil".into()));
    }
    // Pencil entries as scalar polynomials in w of degree <= 2.
    let entries: Vec<Vec<Vec<ExactScalar>>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    vec![
                        r1.get(i, j).clone(),
                        s1.get(i, j).clone(),
                        t1.get(i, j).clone(),
                    ]
                })
                .collect()
        })
        .collect();
    let mut det = poly_det(&entries);
    poly_trim(&mut det);
    if det.is_empty() {
        return Err(Error::Inconsistency(
            "determinant vanishes identically; every w is a root".into(),
        ));
    }
    // Roots at w = 0 are not exponent values (w = q^mu is never 0).
    while det.first().is_some_and(ExactScalar::is_zero) {
        det.remove(0);
    }

    let mut complete = true;
    let mut roots: Vec<IndicialRoot> = Vec::new();
    let mut work = det.clone();
    for w in rational_root_candidates(&work, search_bound, &mut complete) {
        let w_scalar = ExactScalar::from_rat(w.clone());
        let mut mult = 0usize;
        while poly_eval(&work, &w_scalar).is_zero() && work.len() > 1 {
            work = poly_deflate(&work, &w_scalar);
            mult += 1;
        }
        if mult > 0 {
            let pencil = &(r1 + &s1.scale_rat(&w)) + &t1.scale_rat(&(&w * &w));
            let kernel_dim = n - pencil.adjoint().rank();
            roots.push(IndicialRoot {
                w,
                algebraic_multiplicity: mult,
                kernel_dim,
            });
        }
    }
    roots.sort_by(|a, b| a.w.cmp(&b.w));
    let _ = base; // exponents are reported as w = q^mu values directly
    Ok(IndicialReport {
        roots,
        residual: work,
        complete,
    })
}

/// Exact null-space basis (column vectors) of the transposed step-(n+1)
/// factor `(I - q^n A - q^{2n} B)^t` of the coefficient recursion; a
/// nonzero kernel certifies that terminating solutions exist. The
/// denominator factor `I - q^{n+1} C` of the same step must be invertible.
pub fn termination_kernel(
    a: &Mat,
    b: &Mat,
    c: &Mat,
    n: usize,
    base: &QBase,
) -> Result<Vec<Mat>> {
    let size = a.rows();
    let denom = &Mat::identity(size) - &c.scale_rat(&base.pow(n as i64 + 1));
    denom
        .inverse()
        .map_err(|_| Error::SingularFactor(n + 1))?;
    let factor = &(&Mat::identity(size) - &a.scale_rat(&base.pow(n as i64)))
        - &b.scale_rat(&base.pow(2 * n as i64));
    Ok(factor.transpose().null_space())
}

// ---- scalar polynomial helpers (ascending coefficients) ----

fn poly_trim(p: &mut Vec<ExactScalar>) {
    while p.last().is_some_and(ExactScalar::is_zero) {
        p.pop();
    }
}

fn poly_mul(a: &[ExactScalar], b: &[ExactScalar]) -> Vec<ExactScalar> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![ExactScalar::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = &out[i + j] + &(x * y);
        }
    }
    out
}

fn poly_eval(p: &[ExactScalar], z: &ExactScalar) -> ExactScalar {
    let mut acc = ExactScalar::zero();
    for c in p.iter().rev() {
        acc = &(&acc * z) + c;
    }
    acc
}

/// Synthetic division by `(w - w0)`, assuming `w0` is a root.
fn poly_deflate(p: &[ExactScalar], w0: &ExactScalar) -> Vec<ExactScalar> {
    let mut out = vec![ExactScalar::zero(); p.len() - 1];
    let mut carry = ExactScalar::zero();
    for k in (0..p.len() - 1).rev() {
        carry = &p[k + 1] + &(&carry * w0);
        out[k] = carry.clone();
    }
    out
}

/// Determinant of a matrix of scalar polynomials by Laplace expansion
/// (sizes here are tiny).
fn poly_det(entries: &[Vec<Vec<ExactScalar>>]) -> Vec<ExactScalar> {
    let n = entries.len();
    if n == 1 {
        return entries[0][0].clone();
    }
    let mut acc: Vec<ExactScalar> = Vec::new();
    for j in 0..n {
        let minor: Vec<Vec<Vec<ExactScalar>>> = (1..n)
            .map(|i| {
                (0..n)
                    .filter(|&jj| jj != j)
                    .map(|jj| entries[i][jj].clone())
                    .collect()
            })
            .collect();
        let mut term = poly_mul(&entries[0][j], &poly_det(&minor));
        if j % 2 == 1 {
            term = term.iter().map(|c| -c).collect();
        }
        let len = acc.len().max(term.len());
        acc.resize(len, ExactScalar::zero());
        for (k, c) in term.iter().enumerate() {
            acc[k] = &acc[k] + c;
        }
    }
    acc
}

/// Candidate rational roots by the rational root theorem applied to the
/// gcd of the real and imaginary coefficient polynomials.
fn rational_root_candidates(
    p: &[ExactScalar],
    search_bound: usize,
    complete: &mut bool,
) -> Vec<Rat> {
    let re: Vec<Rat> = p.iter().map(|c| c.re().clone()).collect();
    let im: Vec<Rat> = p.iter().map(|c| c.im().clone()).collect();
    let g = if im.iter().all(Rat::is_zero) {
        re
    } else {
        rat_poly_gcd(&re, &im)
    };
    if g.len() <= 1 {
        return Vec::new();
    }
    // Clear denominators to primitive integer coefficients.
    let mut lcm = BigInt::one();
    for c in &g {
        lcm = lcm.lcm(c.denom());
    }
    let ints: Vec<BigInt> = g.iter().map(|c| (c * Rat::from(lcm.clone())).to_integer()).collect();
    let trailing = ints
        .iter()
        .find(|c| !c.is_zero())
        .expect("nonzero polynomial")
        .clone();
    let leading = ints.last().expect("nonzero polynomial").clone();
    let d_trail = bounded_divisors(&trailing.abs(), search_bound, complete);
    let d_lead = bounded_divisors(&leading.abs(), search_bound, complete);
    let mut out = Vec::new();
    for p0 in &d_trail {
        for q0 in &d_lead {
            let cand = Rat::new(p0.clone(), q0.clone());
            if !out.contains(&cand) {
                out.push(cand.clone());
            }
            let neg = -cand;
            if !out.contains(&neg) {
                out.push(neg);
            }
        }
    }
    out
}

/// Monic gcd of two rational-coefficient polynomials.
fn rat_poly_gcd(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    let mut a: Vec<Rat> = a.to_vec();
    let mut b: Vec<Rat> = b.to_vec();
    trim_rat(&mut a);
    trim_rat(&mut b);
    while !b.is_empty() {
        let r = rat_poly_rem(&a, &b);
        a = b;
        b = r;
    }
    if let Some(lead) = a.last().cloned() {
        for c in a.iter_mut() {
            *c = &*c / &lead;
        }
    }
    a
}

fn trim_rat(p: &mut Vec<Rat>) {
    while p.last().is_some_and(Rat::is_zero) {
        p.pop();
    }
}

fn rat_poly_rem(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    let mut r: Vec<Rat> = a.to_vec();
    let db = b.len() - 1;
    let lead = b.last().expect("nonzero divisor");
    while r.len() > db {
        let k = r.len() - 1;
        let factor = r[k].clone() / lead.clone();
        for j in 0..=db {
            let idx = k - db + j;
            r[idx] = &r[idx] - &(&factor * &b[j]);
        }
        trim_rat(&mut r);
        if r.is_empty() {
            break;
        }
        if r.len() - 1 < db {
            break;
        }
    }
    r
}

/// All positive divisors of `n`, enumerated from its prime factorization;
/// stops early (marking `complete = false`) past `bound` candidates.
fn bounded_divisors(n: &BigInt, bound: usize, complete: &mut bool) -> Vec<BigInt> {
    if n.is_zero() {
        return vec![BigInt::one()];
    }
    let factors = factorize(n.clone(), bound, complete);
    let mut divisors = vec![BigInt::one()];
    for (p, e) in factors {
        let mut next = Vec::new();
        for d in &divisors {
            let mut pk = BigInt::one();
            for _ in 0..=e {
                next.push(d * &pk);
                pk *= &p;
                if next.len() > bound {
                    *complete = false;
                    break;
                }
            }
        }
        divisors = next;
        if divisors.len() > bound {
            divisors.truncate(bound);
            *complete = false;
        }
    }
    divisors
}

/// Trial division then Pollard rho; gives up (marking incomplete) on
/// stubborn cofactors past the iteration budget.
fn factorize(mut n: BigInt, bound: usize, complete: &mut bool) -> Vec<(BigInt, u32)> {
    let mut out: Vec<(BigInt, u32)> = Vec::new();
    let push = |p: BigInt, out: &mut Vec<(BigInt, u32)>| {
        if let Some(last) = out.iter_mut().find(|(q, _)| *q == p) {
            last.1 += 1;
        } else {
            out.push((p, 1));
        }
    };
    for small in [2u32, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47] {
        let p = BigInt::from(small);
        while (&n % &p).is_zero() {
            n /= &p;
            push(p.clone(), &mut out);
        }
    }
    let mut d = BigInt::from(49u32);
    let limit = BigInt::from(100_000u32);
    while &d * &d <= n && d <= limit {
        if (&n % &d).is_zero() {
            n /= &d;
            push(d.clone(), &mut out);
        } else {
            d += 2;
        }
    }
    let mut stack = vec![n];
    let mut budget = bound.max(1_000);
    while let Some(m) = stack.pop() {
        if m.is_one() {
            continue;
        }
        if is_probable_prime(&m) {
            push(m, &mut out);
            continue;
        }
        match pollard_rho(&m, &mut budget) {
            Some(f) => {
                stack.push(&m / &f);
                stack.push(f);
            }
            None => {
                // Treat the stubborn cofactor as a unit; roots with this
                // factor in the numerator/denominator may be missed.
                *complete = false;
            }
        }
    }
    out.sort();
    out
}

fn is_probable_prime(n: &BigInt) -> bool {
    if *n < BigInt::from(2u32) {
        return false;
    }
    for p in [2u32, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let p = BigInt::from(p);
        if *n == p {
            return true;
        }
        if (n % &p).is_zero() {
            return false;
        }
    }
    // Miller-Rabin with fixed bases (deterministic far beyond desk scale).
    let one = BigInt::one();
    let n_minus_1 = n - &one;
    let mut d = n_minus_1.clone();
    let mut r = 0u32;
    while (&d % 2u32).is_zero() {
        d /= 2u32;
        r += 1;
    }
    'witness: for a in [2u32, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let a = BigInt::from(a);
        let mut x = a.modpow(&d, n);
        if x == one || x == n_minus_1 {
            continue;
        }
        for _ in 1..r {
            x = x.modpow(&BigInt::from(2u32), n);
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn pollard_rho(n: &BigInt, budget: &mut usize) -> Option<BigInt> {
    if (n % 2u32).is_zero() {
        return Some(BigInt::from(2u32));
    }
    let mut c = BigInt::one();
    loop {
        let mut x = BigInt::from(2u32);
        let mut y = BigInt::from(2u32);
        let mut d = BigInt::one();
        while d.is_one() {
            if *budget == 0 {
                return None;
            }
            *budget -= 1;
            x = (&x * &x + &c) % n;
            y = (&y * &y + &c) % n;
            y = (&y * &y + &c) % n;
            let diff = if x >= y { &x - &y } else { &y - &x };
            if diff.is_zero() {
                break;
            }
            d = diff.gcd(n);
        }
        if !d.is_one() && !d.is_zero() && d != *n {
            return Some(d);
        }
        c += 1;
        if c > BigInt::from(20u32) {
            return None;
        }
    }
}
