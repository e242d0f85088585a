//! Sieve least-squares regressions for the Cholesky coefficients.
//!
//! Rows `i > b` share one regression of `x_i` on `α_k(i/n) x_{i-j}`
//! (`j = 1..=b`, `k = 1..=c`). Rows `i ≤ b` each get their own regression of
//! `x_k` on its `i-1` predecessors over `k = i..=n`, evaluated at `t = i/n`.
//!
//! Regressor layout: flat index `s = (j-1)·c + (k-1)`, i.e. `b` blocks of
//! length `c`, block `j` holding lag `j`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{gram_inverse_from_r, least_squares};
use crate::procsim::TimeSeriesSample;
use crate::scalar::Real;
use crate::sievebasis::BasisSet;

/// `(lag j, basis index k)`, both 1-based, of flat regressor `s` (0-based).
pub fn lag_and_index(s: usize, c: usize) -> (usize, usize) {
    (s / c + 1, s % c + 1)
}

/// Stack a `b × c` coefficient array into the flat regressor order.
pub fn flatten_coefficients<T: Real>(a: &DMatrix<T>) -> Vec<T> {
    let (b, c) = a.shape();
    (0..b * c)
        .map(|s| {
            let (j, k) = lag_and_index(s, c);
            a[(j - 1, k - 1)]
        })
        .collect()
}

/// Inverse of [`flatten_coefficients`].
pub fn unflatten_coefficients<T: Real>(beta: &[T], b: usize, c: usize) -> Result<DMatrix<T>> {
    if beta.len() != b * c {
        return Err(Error::DimensionMismatch { expected: b * c, got: beta.len() });
    }
    Ok(DMatrix::from_fn(b, c, |j, k| beta[j * c + k]))
}

fn check_shape(n: usize, b: usize, c: usize) -> Result<()> {
    if b == 0 || c == 0 {
        return Err(Error::InvalidArgument(format!("need b >= 1 and c >= 1, got b = {b}, c = {c}")));
    }
    if b >= n || b * c >= n - b {
        return Err(Error::Underdetermined { regressors: b * c, rows: n.saturating_sub(b) });
    }
    Ok(())
}

/// Design matrix for rows `first..=n` regressing on `lags` predecessors.
fn lagged_design<T: Real>(x: &[T], first: usize, lags: usize, basis: &BasisSet) -> DMatrix<T> {
    let n = x.len();
    let c = basis.c;
    let rows = n + 1 - first;
    let mut y = DMatrix::zeros(rows, lags * c);
    let mut bt = vec![T::zero(); c];
    for r in 0..rows {
        let i = first + r;
        basis.fill(i as f64 / n as f64, &mut bt);
        for j in 1..=lags {
            let xl = x[i - j - 1];
            for k in 0..c {
                y[(r, (j - 1) * c + k)] = bt[k] * xl;
            }
        }
    }
    y
}

/// Design `Y` of the interior regression, shape `(n-b) × bc`.
pub fn build_design<T: Real>(
    sample: &TimeSeriesSample<T>,
    b: usize,
    basis: &BasisSet,
) -> Result<DMatrix<T>> {
    check_shape(sample.n(), b, basis.c)?;
    Ok(lagged_design(&sample.values, b + 1, b, basis))
}

/// `Σ_k coef[j][k] α_k(t)` for every lag, given `α(t)` in `bt`.
fn coefficient_functions<T: Real>(coefs: &DMatrix<T>, bt: &[T], out: &mut [T]) {
    for (j, o) in out.iter_mut().enumerate() {
        let mut s = T::zero();
        for (k, &a) in bt.iter().enumerate() {
            s += coefs[(j, k)] * a;
        }
        *o = s;
    }
}

/// Residuals `x_i - Σ_j f_j(i/n) x_{i-j}` for `i = first..=n`.
fn plug_in_residuals<T: Real>(x: &[T], first: usize, coefs: &DMatrix<T>, basis: &BasisSet) -> Vec<T> {
    let n = x.len();
    let lags = coefs.nrows();
    let mut bt = vec![T::zero(); basis.c];
    let mut phi = vec![T::zero(); lags];
    (first..=n)
        .map(|i| {
            basis.fill(i as f64 / n as f64, &mut bt);
            coefficient_functions(coefs, &bt, &mut phi);
            let mut fitted = T::zero();
            for (j, &p) in phi.iter().enumerate() {
                fitted += p * x[i - j - 2];
            }
            x[i - 1] - fitted
        })
        .collect()
}

/// Result of the interior regression (`i > b`).
#[derive(Debug, Clone)]
pub struct SieveFit<T: Real> {
    pub n: usize,
    pub b: usize,
    pub basis: BasisSet,
    /// `a[j-1][k-1]`, the coefficient of `α_k(t) x_{i-j}`.
    pub coefficients: DMatrix<T>,
    /// `S = Y*Y / n`.
    pub gram: DMatrix<T>,
    /// `ε̂_{b+1}, …, ε̂_n`.
    pub residuals: Vec<T>,
    /// Condition number of `Y*Y`.
    pub gram_condition: f64,
    r: DMatrix<T>,
}

impl<T: Real> SieveFit<T> {
    pub fn c(&self) -> usize {
        self.basis.c
    }

    /// `φ̂_j(t)` for `1 ≤ j ≤ b`.
    pub fn phi(&self, j: usize, t: T) -> Result<T> {
        if j == 0 || j > self.b {
            return Err(Error::InvalidArgument(format!("lag {j} outside 1..={}", self.b)));
        }
        let bt = self.basis.evaluate(t)?;
        Ok(bt.iter().enumerate().fold(T::zero(), |s, (k, &a)| s + self.coefficients[(j - 1, k)] * a))
    }

    /// `(φ̂_1(t), …, φ̂_b(t))`.
    pub fn phis_at(&self, t: f64) -> Vec<T> {
        let mut bt = vec![T::zero(); self.basis.c];
        self.basis.fill(t, &mut bt);
        let mut out = vec![T::zero(); self.b];
        coefficient_functions(&self.coefficients, &bt, &mut out);
        out
    }

    /// `β̂` in flat regressor order.
    pub fn beta(&self) -> Vec<T> {
        flatten_coefficients(&self.coefficients)
    }

    /// `Ŝ⁻¹ = n (Y*Y)⁻¹`.
    pub fn gram_inverse(&self) -> Result<DMatrix<T>> {
        Ok(gram_inverse_from_r(&self.r)? * T::from_count(self.n))
    }
}

/// Interior sieve regression, solved by QR.
pub fn fit_interior<T: Real>(sample: &TimeSeriesSample<T>, b: usize, basis: &BasisSet) -> Result<SieveFit<T>> {
    let n = sample.n();
    let y = build_design(sample, b, basis)?;
    let target = DVector::from_column_slice(&sample.values[b..]);
    let sol = least_squares(&y, &target, false)?;
    let coefficients = unflatten_coefficients(sol.coefficients.as_slice(), b, basis.c)?;
    let residuals = plug_in_residuals(&sample.values, b + 1, &coefficients, basis);
    let mut gram = y.tr_mul(&y) / T::from_count(n);
    crate::linalg::symmetrize(&mut gram);
    Ok(SieveFit {
        n,
        b,
        basis: *basis,
        coefficients,
        gram,
        residuals,
        gram_condition: sol.gram_condition,
        r: sol.r,
    })
}

/// Plug-in residuals `ε̂_i`, `i = b+1..=n`, of a fit applied to `sample`.
pub fn residuals<T: Real>(fit: &SieveFit<T>, sample: &TimeSeriesSample<T>) -> Result<Vec<T>> {
    if sample.n() != fit.n {
        return Err(Error::DimensionMismatch { expected: fit.n, got: sample.n() });
    }
    Ok(plug_in_residuals(&sample.values, fit.b + 1, &fit.coefficients, &fit.basis))
}

/// Regression for one boundary row `i ≤ b`.
#[derive(Debug, Clone)]
pub struct BoundaryRow<T: Real> {
    pub i: usize,
    /// `d̂[j-1][k-1]` for `j < i`.
    pub coefficients: DMatrix<T>,
    /// `f̂_j^i(i/n)` for `j = 1..i`.
    pub at_row: Vec<T>,
    /// Prediction errors `x_k - Σ_j f̂_j^i(k/n) x_{k-j}` for `k = i..=n`.
    pub residuals: Vec<T>,
}

/// Boundary regressions for rows `2..=b` (empty when `b = 1`).
#[derive(Debug, Clone)]
pub struct BoundaryFit<T: Real> {
    pub n: usize,
    pub b: usize,
    pub basis: BasisSet,
    pub rows: Vec<BoundaryRow<T>>,
}

impl<T: Real> BoundaryFit<T> {
    /// Row `i` (2 ≤ i ≤ b).
    pub fn row(&self, i: usize) -> Option<&BoundaryRow<T>> {
        self.rows.iter().find(|r| r.i == i)
    }
}

pub fn fit_boundary<T: Real>(sample: &TimeSeriesSample<T>, b: usize, basis: &BasisSet) -> Result<BoundaryFit<T>> {
    let n = sample.n();
    check_shape(n, b, basis.c)?;
    let x = &sample.values;
    let mut rows = Vec::with_capacity(b.saturating_sub(1));
    for i in 2..=b {
        let lags = i - 1;
        let design = lagged_design(x, i, lags, basis);
        let target = DVector::from_column_slice(&x[i - 1..]);
        let sol = least_squares(&design, &target, false)?;
        let coefficients = unflatten_coefficients(sol.coefficients.as_slice(), lags, basis.c)?;
        let mut bt = vec![T::zero(); basis.c];
        basis.fill(i as f64 / n as f64, &mut bt);
        let mut at_row = vec![T::zero(); lags];
        coefficient_functions(&coefficients, &bt, &mut at_row);
        let residuals = plug_in_residuals(x, i, &coefficients, basis);
        rows.push(BoundaryRow { i, coefficients, at_row, residuals });
    }
    Ok(BoundaryFit { n, b, basis: *basis, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::procsim::{simulate, ModelKind, ModelSpec};
    use crate::sievebasis::BasisFamily;

    #[test]
    fn design_shapes_and_constant_series() {
        let s = TimeSeriesSample::from_values(vec![1.0f64; 50]);
        let y = build_design(&s, 1, &BasisSet::fourier(1)).unwrap();
        assert_eq!(y.shape(), (49, 1));
        assert!(y.iter().all(|&v| v == 1.0));
        let s = simulate::<f64>(&ModelSpec::new(ModelKind::WhiteNoise), 100, 3).unwrap();
        assert_eq!(build_design(&s, 2, &BasisSet::fourier(3)).unwrap().shape(), (98, 6));
    }

    #[test]
    fn design_entries_follow_block_layout() {
        let s = simulate::<f64>(&ModelSpec::new(ModelKind::TvAr1), 64, 5).unwrap();
        let basis = BasisSet::new(BasisFamily::LegendreShifted, 3).unwrap();
        let y = build_design(&s, 3, &basis).unwrap();
        for r in [0usize, 17, 60] {
            let i = r + 4;
            let bt: Vec<f64> = basis.evaluate(i as f64 / 64.0).unwrap();
            for s_idx in 0..9 {
                let (j, k) = lag_and_index(s_idx, 3);
                assert_eq!(y[(r, s_idx)], bt[k - 1] * s.values[i - j - 1]);
            }
        }
    }

    #[test]
    fn underdetermined_is_rejected() {
        let s = simulate::<f64>(&ModelSpec::new(ModelKind::WhiteNoise), 20, 3).unwrap();
        assert!(matches!(build_design(&s, 3, &BasisSet::fourier(6)), Err(Error::Underdetermined { .. })));
    }

    #[test]
    fn zero_series_is_degenerate() {
        let s = TimeSeriesSample::from_values(vec![0.0f64; 100]);
        assert!(matches!(fit_interior(&s, 2, &BasisSet::fourier(3)), Err(Error::IllConditioned { .. })));
    }

    #[test]
    fn exact_recursion_is_reproduced() {
        // x_i = 2cos(ω) x_{i-1} - x_{i-2} is a pure sinusoid with constant coefficients.
        let w = 0.3f64;
        let x: Vec<f64> = (0..300).map(|i| (w * i as f64).sin() + 0.5 * (w * i as f64).cos()).collect();
        let s = TimeSeriesSample::from_values(x);
        let fit = fit_interior(&s, 2, &BasisSet::fourier(3)).unwrap();
        assert!(fit.residuals.iter().all(|e| e.abs() < 1e-8));
        assert!((fit.phi(1, 0.4).unwrap() - 2.0 * w.cos()).abs() < 1e-8);
        assert!((fit.phi(2, 0.9).unwrap() + 1.0).abs() < 1e-8);
    }

    #[test]
    fn stored_residuals_match_recomputation_bitwise() {
        let s = simulate::<f64>(&ModelSpec::new(ModelKind::TvMa2), 400, 11).unwrap();
        let fit = fit_interior(&s, 3, &BasisSet::fourier(4)).unwrap();
        let again = residuals(&fit, &s).unwrap();
        assert_eq!(fit.residuals, again);
        for (r, i) in (fit.b + 1..=s.n()).enumerate().step_by(37) {
            let phis = fit.phis_at(i as f64 / s.n() as f64);
            let mut yhat = 0.0;
            for (j, p) in phis.iter().enumerate() {
                yhat += p * s.values[i - j - 2];
            }
            assert_eq!((s.values[i - 1] - yhat).to_bits(), fit.residuals[r].to_bits());
        }
        let short = TimeSeriesSample::from_values(s.values[..300].to_vec());
        assert!(residuals(&fit, &short).is_err());
    }

    #[test]
    fn normal_equations_hold() {
        let s = simulate::<f64>(&ModelSpec::new(ModelKind::TvAr2), 500, 2).unwrap();
        let basis = BasisSet::fourier(5);
        let fit = fit_interior(&s, 3, &basis).unwrap();
        let y = build_design(&s, 3, &basis).unwrap();
        let e = DVector::from_vec(fit.residuals.clone());
        let xnorm = s.values.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((y.tr_mul(&e)).amax() < 1e-8 * xnorm);
    }

    #[test]
    fn boundary_fit_shapes() {
        let s = simulate::<f64>(&ModelSpec::new(ModelKind::TvAr1), 300, 4).unwrap();
        assert!(fit_boundary(&s, 1, &BasisSet::fourier(3)).unwrap().rows.is_empty());
        let bf = fit_boundary(&s, 4, &BasisSet::fourier(3)).unwrap();
        assert_eq!(bf.rows.len(), 3);
        for row in &bf.rows {
            assert_eq!(row.at_row.len(), row.i - 1);
            assert_eq!(row.coefficients.shape(), (row.i - 1, 3));
            assert_eq!(row.residuals.len(), 300 - row.i + 1);
        }
    }

    #[test]
    fn flatten_round_trip_small() {
        let a = DMatrix::from_fn(3, 4, |j, k| (10 * j + k) as f64);
        let beta = flatten_coefficients(&a);
        assert_eq!(beta[5], a[(1, 1)]);
        assert_eq!(unflatten_coefficients(&beta, 3, 4).unwrap(), a);
        assert!(unflatten_coefficients(&beta, 2, 4).is_err());
    }

    #[test]
    fn f32_fit_runs() {
        let s = simulate::<f32>(&ModelSpec::new(ModelKind::TvAr1), 400, 8).unwrap();
        let fit = fit_interior(&s, 1, &BasisSet::fourier(3)).unwrap();
        let p = fit.phi(1, 0.0f32).unwrap();
        assert!((p - 0.6).abs() < 0.35);
    }
}
