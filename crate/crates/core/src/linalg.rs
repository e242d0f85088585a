//! Dense and banded linear-algebra kernels used by the estimators.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Upper bound on the condition number of a Gram matrix `Y*Y` accepted by
/// [`least_squares`].
pub const GRAM_CONDITION_LIMIT: f64 = 1e12;

/// Ordinary least-squares solution obtained from a Householder QR factorization.
#[derive(Debug, Clone)]
pub struct LsSolution<T: Real> {
    pub coefficients: DVector<T>,
    /// Upper-triangular factor `R` with `Y = QR`; `Y*Y = R*R`.
    pub r: DMatrix<T>,
    /// Condition number of the Gram matrix `Y*Y`.
    pub gram_condition: f64,
    /// Diagonal of the hat matrix `Y (Y*Y)^{-1} Y*`, when requested.
    pub leverage: Option<Vec<T>>,
}

/// Solve `min ||y - Y beta||` through QR; never forms `(Y*Y)^{-1}`.
pub fn least_squares<T: Real>(
    design: &DMatrix<T>,
    y: &DVector<T>,
    want_leverage: bool,
) -> Result<LsSolution<T>> {
    let (rows, p) = design.shape();
    if y.len() != rows {
        return Err(Error::DimensionMismatch { expected: rows, got: y.len() });
    }
    if p == 0 || p >= rows {
        return Err(Error::Underdetermined { regressors: p, rows });
    }
    let qr = design.clone().qr();
    let r = qr.r();
    let sv = r.clone().svd(false, false).singular_values;
    let smax = sv.max().as_f64();
    let smin = sv.min().as_f64();
    let gram_condition = if smin > 0.0 && smax.is_finite() {
        (smax / smin).powi(2)
    } else {
        f64::INFINITY
    };
    if !(gram_condition <= GRAM_CONDITION_LIMIT) {
        return Err(Error::IllConditioned { condition: gram_condition });
    }
    let q = qr.q();
    let qty = q.tr_mul(y);
    let coefficients = r
        .solve_upper_triangular(&qty)
        .ok_or(Error::IllConditioned { condition: f64::INFINITY })?;
    let leverage = want_leverage.then(|| {
        (0..rows)
            .map(|i| q.row(i).iter().fold(T::zero(), |acc, &v| acc + v * v))
            .collect()
    });
    Ok(LsSolution { coefficients, r, gram_condition, leverage })
}

/// `(R*R)^{-1}` for an invertible upper-triangular `R`.
pub fn gram_inverse_from_r<T: Real>(r: &DMatrix<T>) -> Result<DMatrix<T>> {
    let p = r.nrows();
    let rinv = r
        .solve_upper_triangular(&DMatrix::identity(p, p))
        .ok_or(Error::IllConditioned { condition: f64::INFINITY })?;
    let mut out = &rinv * rinv.transpose();
    symmetrize(&mut out);
    Ok(out)
}

/// Overwrite `a` with `(a + a*) / 2`.
pub fn symmetrize<T: Real>(a: &mut DMatrix<T>) {
    let n = a.nrows();
    let half = T::lit(0.5);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = (a[(i, j)] + a[(j, i)]) * half;
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
}

/// Lower Cholesky factor of a symmetric positive-definite band matrix with
/// half-bandwidth `p`. Row `i` stores `L[i, i-p..=i]`.
#[derive(Debug, Clone)]
pub struct BandedCholesky<T: Real> {
    n: usize,
    p: usize,
    data: Vec<T>,
}

impl<T: Real> BandedCholesky<T> {
    /// Factor the band matrix described by `entry(i, j)` for `i - p <= j <= i`.
    pub fn factor(n: usize, p: usize, entry: impl Fn(usize, usize) -> T) -> Result<Self> {
        let w = p + 1;
        let mut data = vec![T::zero(); n * w];
        let tol = T::lit(100.0) * T::eps();
        for i in 0..n {
            let lo = i.saturating_sub(p);
            for j in lo..=i {
                let mut s = entry(i, j);
                let klo = lo.max(j.saturating_sub(p));
                for k in klo..j {
                    s -= data[i * w + (p + k - i)] * data[j * w + (p + k - j)];
                }
                if i == j {
                    let aii = entry(i, i);
                    if !(s > tol * aii.abs()) || !(s > T::zero()) {
                        return Err(Error::NotPositiveDefinite { pivot: i, value: s.as_f64() });
                    }
                    data[i * w + p] = s.sqrt();
                } else {
                    data[i * w + (p + j - i)] = s / data[j * w + p];
                }
            }
        }
        Ok(Self { n, p, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn half_bandwidth(&self) -> usize {
        self.p
    }

    /// `L[i, j]` (zero outside the band).
    pub fn get(&self, i: usize, j: usize) -> T {
        if j > i || i - j > self.p {
            T::zero()
        } else {
            self.data[i * (self.p + 1) + (self.p + j - i)]
        }
    }

    /// Column `j` of `L` as `(row, value)` pairs.
    pub fn column(&self, j: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let hi = (j + self.p).min(self.n - 1);
        (j..=hi).map(move |i| (i, self.get(i, j)))
    }

    pub fn to_dense(&self) -> DMatrix<T> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }
}

/// Largest absolute eigenvalue (spectral norm) of a symmetric matrix by power
/// iteration. Stops when the relative change of the estimate falls below `tol`.
pub fn spectral_norm_sym<T: Real>(a: &DMatrix<T>, tol: f64, max_iter: usize) -> Result<T> {
    let n = a.nrows();
    if n == 0 {
        return Ok(T::zero());
    }
    // Deterministic start with no special alignment to the coordinate axes.
    let mut v = DVector::from_fn(n, |i, _| T::lit(1.0 + 0.5 * ((i as f64) * 0.7548776662).sin()));
    let norm = v.norm();
    v /= norm;
    let mut est = 0.0f64;
    let mut w = DVector::zeros(n);
    for it in 0..max_iter {
        w.gemv(T::one(), a, &v, T::zero());
        let s = w.norm();
        let sf = s.as_f64();
        if sf == 0.0 {
            return Ok(T::zero());
        }
        if it > 0 && (sf - est).abs() <= tol * sf {
            return Ok(s);
        }
        est = sf;
        v.copy_from(&w);
        v /= s;
    }
    Err(Error::NoConvergence { iterations: max_iter, last: est })
}

/// Factor `F = V diag(sqrt(max(lambda, 0)))` with `F F* = A+`, the projection of
/// the symmetric matrix `A` onto the positive-semidefinite cone.
pub fn psd_sqrt_dense<T: Real>(a: &DMatrix<T>) -> Result<(DMatrix<T>, usize)> {
    let eig = SymmetricEigen::try_new(a.clone(), T::eps(), 0).ok_or(Error::Decomposition)?;
    let mut f = eig.eigenvectors;
    let mut clipped = 0;
    for (k, &lam) in eig.eigenvalues.iter().enumerate() {
        let s = if lam > T::zero() {
            lam.sqrt()
        } else {
            clipped += 1;
            T::zero()
        };
        f.column_mut(k).scale_mut(s);
    }
    Ok((f, clipped))
}

/// Symmetric band matrix (half-bandwidth `p`) held in `f64`, lower band row-wise.
#[derive(Debug, Clone)]
pub struct SymBand {
    n: usize,
    p: usize,
    data: Vec<f64>,
}

/// Negative eigenpairs of a symmetric band matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct NegativeEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

impl SymBand {
    pub fn new(n: usize, p: usize, entry: impl Fn(usize, usize) -> f64) -> Self {
        let w = p + 1;
        let mut data = vec![0.0; n * w];
        for i in 0..n {
            for j in i.saturating_sub(p)..=i {
                data[i * w + p + j - i] = entry(i, j);
            }
        }
        Self { n, p, data }
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        if i - j > self.p {
            0.0
        } else {
            self.data[i * (self.p + 1) + self.p + j - i]
        }
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for i in 0..self.n {
            let lo = i.saturating_sub(self.p);
            let hi = (i + self.p).min(self.n - 1);
            out[i] = (lo..=hi).map(|j| self.at(i, j) * v[j]).sum();
        }
        out
    }

    /// Largest absolute row sum, an upper bound on the spectral radius.
    pub fn row_sum_bound(&self) -> f64 {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.p);
                let hi = (i + self.p).min(self.n - 1);
                (lo..=hi).map(|j| self.at(i, j).abs()).sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// `LDL*` factorization of `A - σI` without pivoting; pivots smaller than
    /// `tiny` in magnitude are replaced by `-tiny`.
    fn ldl(&self, sigma: f64, tiny: f64) -> (Vec<f64>, Vec<f64>) {
        let (n, p) = (self.n, self.p);
        let w = p + 1;
        let mut l = vec![0.0; n * w];
        let mut d = vec![0.0; n];
        let mut t = vec![0.0; w];
        for i in 0..n {
            let lo = i.saturating_sub(p);
            let base_i = i * w + p - i;
            for j in lo..i {
                let base_j = j * w + p - j;
                let s: f64 = t[..j - lo].iter().zip(&l[base_j + lo..base_j + j]).map(|(x, y)| x * y).sum();
                let lij = (self.data[base_i + j] - s) / d[j];
                l[base_i + j] = lij;
                t[j - lo] = lij * d[j];
            }
            let s: f64 = t[..i - lo].iter().zip(&l[base_i + lo..base_i + i]).map(|(x, y)| x * y).sum();
            let di = self.data[base_i + i] - sigma - s;
            d[i] = if di.abs() < tiny { -tiny } else { di };
        }
        (l, d)
    }

    fn pivot_floor(&self) -> f64 {
        f64::EPSILON * self.row_sum_bound().max(f64::MIN_POSITIVE)
    }

    /// Number of eigenvalues below `sigma` (Sylvester inertia).
    pub fn count_below(&self, sigma: f64) -> usize {
        self.count_with(sigma, self.pivot_floor())
    }

    fn count_with(&self, sigma: f64, tiny: f64) -> usize {
        self.ldl(sigma, tiny).1.iter().filter(|&&v| v < 0.0).count()
    }

    fn ldl_solve(&self, l: &[f64], d: &[f64], v: &mut [f64]) {
        let (n, p) = (self.n, self.p);
        let w = p + 1;
        for i in 0..n {
            let lo = i.saturating_sub(p);
            let base = i * w + p - i;
            let s: f64 = l[base + lo..base + i].iter().zip(&v[lo..i]).map(|(x, y)| x * y).sum();
            v[i] -= s;
        }
        for i in 0..n {
            v[i] /= d[i];
        }
        for i in (0..n).rev() {
            let hi = (i + p).min(n - 1);
            let s: f64 = (i + 1..=hi).map(|k| l[k * w + p + i - k] * v[k]).sum();
            v[i] -= s;
        }
    }

    /// All eigenpairs with eigenvalue below `-cutoff·‖A‖`. Eigenvalues are
    /// bracketed by bisection on the inertia and eigenvectors follow by
    /// inverse iteration. `None` when there are more than `max_count` of them
    /// or an eigenpair fails its residual check.
    pub fn negative_eigenpairs(&self, cutoff: f64, max_count: usize) -> Option<NegativeEigen> {
        let scale = self.row_sum_bound();
        let mut values = Vec::new();
        let mut vectors: Vec<Vec<f64>> = Vec::new();
        if scale == 0.0 {
            return Some(NegativeEigen { values, vectors });
        }
        let tiny = f64::EPSILON * scale;
        let top = -cutoff * scale;
        let k = self.count_with(top, tiny);
        if k > max_count {
            return None;
        }
        let width = 1e-7 * scale;
        let mut clusters = Vec::new();
        let mut stack = vec![(-scale * (1.0 + 1e-9), top, 0, k)];
        while let Some((lo, hi, clo, chi)) = stack.pop() {
            if chi == clo {
                continue;
            }
            if hi - lo <= width {
                clusters.push((0.5 * (lo + hi), chi - clo));
                continue;
            }
            let mid = 0.5 * (lo + hi);
            let cm = self.count_with(mid, tiny);
            stack.push((mid, hi, cm, chi));
            stack.push((lo, mid, clo, cm));
        }
        let orthonormalize = |v: &mut Vec<f64>, basis: &[Vec<f64>]| -> bool {
            for u in basis {
                let dot: f64 = u.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(u).for_each(|(x, y)| *x -= dot * y);
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if !(norm > 0.0 && norm.is_finite()) {
                return false;
            }
            v.iter_mut().for_each(|x| *x /= norm);
            true
        };
        for (shift, mult) in clusters {
            let (l, d) = self.ldl(shift, tiny);
            for m in 0..mult {
                let idx = vectors.len();
                let mut v: Vec<f64> =
                    (0..self.n).map(|i| 1.0 + 0.5 * ((i + 7 * idx + 3 * m) as f64 * 0.618_033_988_75).sin()).collect();
                for _ in 0..5 {
                    if !orthonormalize(&mut v, &vectors) {
                        return None;
                    }
                    self.ldl_solve(&l, &d, &mut v);
                }
                if !orthonormalize(&mut v, &vectors) {
                    return None;
                }
                let av = self.matvec(&v);
                let rq: f64 = av.iter().zip(&v).map(|(a, b)| a * b).sum();
                let resid = av.iter().zip(&v).map(|(a, b)| (a - rq * b).powi(2)).sum::<f64>().sqrt();
                if resid > 1e-8 * scale || rq >= 0.0 {
                    return None;
                }
                values.push(rq);
                vectors.push(v);
            }
        }
        Some(NegativeEigen { values, vectors })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn least_squares_recovers_exact_line() {
        let x = DMatrix::from_fn(20, 2, |i, j| if j == 0 { 1.0 } else { i as f64 });
        let y = DVector::from_fn(20, |i, _| 3.0 - 0.5 * i as f64);
        let sol = least_squares(&x, &y, true).unwrap();
        assert_relative_eq!(sol.coefficients[0], 3.0, epsilon = 1e-12);
        assert_relative_eq!(sol.coefficients[1], -0.5, epsilon = 1e-12);
        let lev = sol.leverage.unwrap();
        assert_relative_eq!(lev.iter().sum::<f64>(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn least_squares_rejects_rank_deficient() {
        let x = DMatrix::from_fn(10, 2, |i, _| i as f64);
        let y = DVector::from_fn(10, |i, _| i as f64);
        assert!(matches!(least_squares(&x, &y, false), Err(Error::IllConditioned { .. })));
    }

    #[test]
    fn banded_cholesky_matches_dense() {
        let n = 12;
        let p = 2;
        let a = DMatrix::from_fn(n, n, |i, j| {
            let d = i.abs_diff(j);
            match d {
                0 => 4.0 + i as f64 * 0.1,
                1 => -1.0,
                2 => 0.3,
                _ => 0.0,
            }
        });
        let ch = BandedCholesky::factor(n, p, |i, j| a[(i, j)]).unwrap();
        let l = ch.to_dense();
        let rec = &l * l.transpose();
        assert!((rec - &a).amax() < 1e-12);
    }

    #[test]
    fn banded_cholesky_detects_indefinite() {
        let n = 4;
        let err = BandedCholesky::factor(n, 1, |i, j| if i == j { 1.0 } else { 2.0 }).unwrap_err();
        assert!(matches!(err, Error::NotPositiveDefinite { .. }));
    }

    #[test]
    fn spectral_norm_of_indefinite_diagonal() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -3.0, 2.0]));
        let s = spectral_norm_sym(&a, 1e-12, 10_000).unwrap();
        assert_relative_eq!(s, 3.0, epsilon = 1e-9);
    }

    #[test]
    fn psd_sqrt_clips_negative_part() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]); // eigenvalues 3, -1
        let (f, clipped) = psd_sqrt_dense(&a).unwrap();
        assert_eq!(clipped, 1);
        let rec = &f * f.transpose();
        let expected = DMatrix::from_row_slice(2, 2, &[1.5, 1.5, 1.5, 1.5]);
        assert!((rec - expected).amax() < 1e-12);
    }

    #[test]
    fn band_inertia_and_negative_pairs() {
        let n = 60;
        let a = DMatrix::from_fn(n, n, |i, j| {
            let d = i.abs_diff(j);
            match d {
                0 => 0.4 + 0.3 * ((i as f64) * 0.9).sin(),
                1 => 0.8,
                2 => -0.1,
                _ => 0.0,
            }
        });
        let band = SymBand::new(n, 2, |i, j| a[(i, j)]);
        let eig = SymmetricEigen::new(a.clone());
        let expected_neg: Vec<f64> = {
            let mut v: Vec<f64> = eig.eigenvalues.iter().cloned().filter(|&x| x < -1e-12 * 3.0).collect();
            v.sort_by(f64::total_cmp);
            v
        };
        assert_eq!(band.count_below(0.0), eig.eigenvalues.iter().filter(|&&x| x < 0.0).count());
        let neg = band.negative_eigenpairs(1e-12, 100).unwrap();
        assert_eq!(neg.values.len(), expected_neg.len());
        for (got, want) in neg.values.iter().zip(&expected_neg) {
            assert!((got - want).abs() < 1e-9);
        }
        let mut proj = a.clone();
        for (lam, v) in neg.values.iter().zip(&neg.vectors) {
            let v = DVector::from_column_slice(v);
            proj -= &v * v.transpose() * *lam;
        }
        let (f, _) = psd_sqrt_dense(&a).unwrap();
        assert!((proj - &f * f.transpose()).amax() < 1e-8);
        assert!(band.negative_eigenpairs(1e-12, 0).is_none() || expected_neg.is_empty());
    }
}
