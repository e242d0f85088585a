//! Sieve estimates of the innovation variance functions and the positivity clamp.

use nalgebra::{DMatrix, DVector};

use crate::cholfit::{BoundaryFit, SieveFit};
use crate::error::{Error, Result};
use crate::linalg::least_squares;
use crate::procsim::TimeSeriesSample;
use crate::scalar::Real;
use crate::sievebasis::BasisSet;

/// Regress `targets[r]` on `α(times[r])` and return the coefficients.
fn sieve_regression<T: Real>(targets: &[T], times: impl Iterator<Item = f64>, basis: &BasisSet) -> Result<Vec<T>> {
    let c = basis.c;
    if c >= targets.len() {
        return Err(Error::Underdetermined { regressors: c, rows: targets.len() });
    }
    let mut w = DMatrix::zeros(targets.len(), c);
    let mut bt = vec![T::zero(); c];
    for (r, t) in times.enumerate() {
        basis.fill(t, &mut bt);
        for k in 0..c {
            w[(r, k)] = bt[k];
        }
    }
    let sol = least_squares(&w, &DVector::from_column_slice(targets), false)?;
    Ok(sol.coefficients.as_slice().to_vec())
}

/// `Σ_k d_k α_k(t)`.
pub fn variance_function<T: Real>(coeffs: &[T], basis: &BasisSet, t: f64) -> T {
    let mut bt = vec![T::zero(); basis.c];
    basis.fill(t, &mut bt);
    bt.iter().zip(coeffs).fold(T::zero(), |s, (&a, &d)| s + a * d)
}

/// Coefficients of `ĝ` from the interior residuals `ε̂_{b+1..n}`.
pub fn fit_variance_interior<T: Real>(residuals: &[T], b: usize, basis: &BasisSet) -> Result<Vec<T>> {
    let n = residuals.len() + b;
    let sq: Vec<T> = residuals.iter().map(|&e| e * e).collect();
    sieve_regression(&sq, (b + 1..=n).map(|i| i as f64 / n as f64), basis)
}

/// Boundary variance fit for one row `i ≤ b`.
#[derive(Debug, Clone)]
pub struct BoundaryVariance<T: Real> {
    pub i: usize,
    pub coefficients: Vec<T>,
    /// `ĝⁱ(i/n)` before clamping.
    pub value: T,
}

/// `ĝⁱ(i/n)` for `i = 1..=b`. Row 1 regresses `x_k²` over every `k`.
pub fn fit_variance_boundary<T: Real>(
    sample: &TimeSeriesSample<T>,
    boundary: &BoundaryFit<T>,
    basis: &BasisSet,
) -> Result<Vec<BoundaryVariance<T>>> {
    let n = sample.n();
    if boundary.n != n {
        return Err(Error::DimensionMismatch { expected: boundary.n, got: n });
    }
    let mut out = Vec::with_capacity(boundary.b);
    let sq: Vec<T> = sample.values.iter().map(|&x| x * x).collect();
    let coefficients = sieve_regression(&sq, (1..=n).map(|k| k as f64 / n as f64), basis)?;
    let value = variance_function(&coefficients, basis, 1.0 / n as f64);
    out.push(BoundaryVariance { i: 1, coefficients, value });
    for row in &boundary.rows {
        let sq: Vec<T> = row.residuals.iter().map(|&e| e * e).collect();
        let coefficients = sieve_regression(&sq, (row.i..=n).map(|k| k as f64 / n as f64), basis)?;
        let value = variance_function(&coefficients, basis, row.i as f64 / n as f64);
        out.push(BoundaryVariance { i: row.i, coefficients, value });
    }
    Ok(out)
}

/// Replace every non-positive entry by `1/n`. Returns the clamped values and
/// how many entries were replaced.
pub fn clamp_positive<T: Real>(raw: &[T], n: usize) -> (Vec<T>, usize) {
    let floor = T::one() / T::from_count(n);
    let mut count = 0;
    let out = raw
        .iter()
        .map(|&v| {
            if v > T::zero() {
                v
            } else {
                count += 1;
                floor
            }
        })
        .collect();
    (out, count)
}

/// Variances `σ̂_i*²` for `i = 1..=n`.
#[derive(Debug, Clone)]
pub struct VarianceEstimate<T: Real> {
    pub sigma_star: Vec<T>,
    pub raw: Vec<T>,
    pub ghat_coeffs: Vec<T>,
    pub boundary: Vec<BoundaryVariance<T>>,
    pub clamped: usize,
}

/// Combine the interior and boundary fits into one clamped variance profile.
pub fn estimate_variances<T: Real>(
    sample: &TimeSeriesSample<T>,
    fit: &SieveFit<T>,
    boundary: &BoundaryFit<T>,
    basis: &BasisSet,
) -> Result<VarianceEstimate<T>> {
    let n = sample.n();
    if fit.n != n || fit.b != boundary.b {
        return Err(Error::DimensionMismatch { expected: fit.n, got: n });
    }
    let ghat_coeffs = fit_variance_interior(&fit.residuals, fit.b, basis)?;
    let boundary_fits = fit_variance_boundary(sample, boundary, basis)?;
    let mut raw: Vec<T> = boundary_fits.iter().map(|v| v.value).collect();
    raw.extend((fit.b + 1..=n).map(|i| variance_function(&ghat_coeffs, basis, i as f64 / n as f64)));
    let (sigma_star, clamped) = clamp_positive(&raw, n);
    Ok(VarianceEstimate { sigma_star, raw, ghat_coeffs, boundary: boundary_fits, clamped })
}
