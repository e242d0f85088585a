//! Banded factored precision estimate `Ω̂ = Φ̂* D̂ Φ̂`.

use std::io::Write;

use nalgebra::DMatrix;

use crate::cholfit::{fit_boundary, fit_interior, BoundaryFit, SieveFit};
use crate::error::{Error, Result};
use crate::linalg::spectral_norm_sym;
use crate::procsim::{TimeSeriesSample, DENSE_ORACLE_MAX};
use crate::scalar::Real;
use crate::sievebasis::BasisSet;
use crate::varfit::{estimate_variances, VarianceEstimate};

pub const POWER_TOLERANCE: f64 = 1e-6;
pub const POWER_MAX_ITER: usize = 10_000;

/// `Φ̂` is unit lower triangular with `Φ̂[i][i-j] = -phi(i, j)` for `1 ≤ j ≤ b`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecisionEstimate<T: Real> {
    pub n: usize,
    pub b: usize,
    /// Row-major `n × b`; entry `(i-1)·b + (j-1)` holds `phi(i, j)`, zero when `j ≥ i`.
    phi: Vec<T>,
    /// `1/σ̂_i*²`.
    pub dinv: Vec<T>,
    /// Number of variance entries that hit the floor.
    pub clamped: usize,
}

impl<T: Real> PrecisionEstimate<T> {
    pub fn identity(n: usize) -> Self {
        Self { n, b: 0, phi: Vec::new(), dinv: vec![T::one(); n], clamped: 0 }
    }

    /// Build from raw parts. `phi_rows[i-1]` lists `phi(i, 1..)` (at most `min(b, i-1)` values).
    pub fn from_parts(b: usize, phi_rows: &[Vec<T>], dinv: Vec<T>) -> Result<Self> {
        let n = dinv.len();
        if phi_rows.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: phi_rows.len() });
        }
        if let Some(&d) = dinv.iter().find(|&&d| !(d > T::zero())) {
            return Err(Error::InvalidArgument(format!("non-positive inverse variance {d}")));
        }
        let mut phi = vec![T::zero(); n * b];
        for (r, row) in phi_rows.iter().enumerate() {
            if row.len() > b.min(r) {
                return Err(Error::DimensionMismatch { expected: b.min(r), got: row.len() });
            }
            phi[r * b..r * b + row.len()].copy_from_slice(row);
        }
        Ok(Self { n, b, phi, dinv, clamped: 0 })
    }

    /// `phi(i, j) = -Φ̂[i][i-j]` (1-based `i`).
    pub fn phi(&self, i: usize, j: usize) -> T {
        if j == 0 || j > self.b || j >= i || i > self.n {
            T::zero()
        } else {
            self.phi[(i - 1) * self.b + j - 1]
        }
    }

    /// Dense `Φ̂` (0-based indices).
    pub fn cholesky_factor_dense(&self) -> DMatrix<T> {
        let mut m = DMatrix::identity(self.n, self.n);
        for i in 1..=self.n {
            for j in 1..=self.b.min(i - 1) {
                m[(i - 1, i - 1 - j)] = -self.phi(i, j);
            }
        }
        m
    }

    fn apply_phi(&self, v: &[T], out: &mut [T]) {
        for i in 1..=self.n {
            let mut s = v[i - 1];
            for j in 1..=self.b.min(i - 1) {
                s -= self.phi(i, j) * v[i - 1 - j];
            }
            out[i - 1] = s;
        }
    }

    fn apply_phi_transpose(&self, w: &[T], out: &mut [T]) {
        out.copy_from_slice(w);
        for i in 1..=self.n {
            for j in 1..=self.b.min(i - 1) {
                out[i - 1 - j] -= self.phi(i, j) * w[i - 1];
            }
        }
    }

    /// `Ω̂ v` in `O(nb)`.
    pub fn matvec(&self, v: &[T]) -> Result<Vec<T>> {
        if v.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: v.len() });
        }
        let mut w = vec![T::zero(); self.n];
        self.apply_phi(v, &mut w);
        for (x, &d) in w.iter_mut().zip(&self.dinv) {
            *x *= d;
        }
        let mut out = vec![T::zero(); self.n];
        self.apply_phi_transpose(&w, &mut out);
        Ok(out)
    }

    /// `v* Ω̂ v = Σ_i d_i (Φ̂v)_i²`.
    pub fn quadratic_form(&self, v: &[T]) -> Result<T> {
        if v.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: v.len() });
        }
        let mut w = vec![T::zero(); self.n];
        self.apply_phi(v, &mut w);
        Ok(w.iter().zip(&self.dinv).fold(T::zero(), |s, (&x, &d)| s + d * x * x))
    }

    /// Dense `Ω̂`, computed band by band.
    pub fn to_dense(&self) -> Result<DMatrix<T>> {
        if self.n > DENSE_ORACLE_MAX {
            return Err(Error::TooLarge { n: self.n, max: DENSE_ORACLE_MAX });
        }
        let n = self.n;
        let entry = |i: usize, k: usize| -> T {
            if i == k {
                T::one()
            } else if k < i && i - k <= self.b {
                -self.phi(i, i - k)
            } else {
                T::zero()
            }
        };
        let mut m = DMatrix::zeros(n, n);
        for k in 1..=n {
            for l in k..=(k + self.b).min(n) {
                let mut s = T::zero();
                for i in l..=(k + self.b).min(n) {
                    s += entry(i, k) * self.dinv[i - 1] * entry(i, l);
                }
                m[(k - 1, l - 1)] = s;
                m[(l - 1, k - 1)] = s;
            }
        }
        Ok(m)
    }

    /// Banded coordinate CSV of `Φ̂` (off-diagonal entries) and `D̂⁻¹`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "matrix,i,j,value")?;
        for i in 1..=self.n {
            for j in 1..=self.b.min(i - 1) {
                writeln!(w, "phi,{},{},{}", i, i - j, -self.phi(i, j))?;
            }
        }
        for (i, d) in self.dinv.iter().enumerate() {
            writeln!(w, "dinv,{},{},{}", i + 1, i + 1, d)?;
        }
        Ok(())
    }
}

/// Combine interior, boundary and variance fits into `Ω̂`.
pub fn assemble<T: Real>(
    fit: &SieveFit<T>,
    boundary: &BoundaryFit<T>,
    variances: &VarianceEstimate<T>,
) -> Result<PrecisionEstimate<T>> {
    let n = fit.n;
    let b = fit.b;
    if boundary.n != n || boundary.b != b {
        return Err(Error::DimensionMismatch { expected: b, got: boundary.b });
    }
    if variances.sigma_star.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: variances.sigma_star.len() });
    }
    let mut phi = vec![T::zero(); n * b];
    for row in &boundary.rows {
        let r = row.i - 1;
        phi[r * b..r * b + row.at_row.len()].copy_from_slice(&row.at_row);
    }
    for i in b + 1..=n {
        let vals = fit.phis_at(i as f64 / n as f64);
        phi[(i - 1) * b..i * b].copy_from_slice(&vals);
    }
    let dinv = variances.sigma_star.iter().map(|&s| T::one() / s).collect();
    Ok(PrecisionEstimate { n, b, phi, dinv, clamped: variances.clamped })
}

/// Intermediate fits and the final estimate for one sample.
#[derive(Debug, Clone)]
pub struct PrecisionFit<T: Real> {
    pub fit: SieveFit<T>,
    pub boundary: BoundaryFit<T>,
    pub variances: VarianceEstimate<T>,
    pub estimate: PrecisionEstimate<T>,
}

/// Run the full estimation pipeline for band `b`.
pub fn estimate_precision<T: Real>(sample: &TimeSeriesSample<T>, b: usize, basis: &BasisSet) -> Result<PrecisionFit<T>> {
    let fit = fit_interior(sample, b, basis)?;
    let boundary = fit_boundary(sample, b, basis)?;
    let variances = estimate_variances(sample, &fit, &boundary, basis)?;
    let estimate = assemble(&fit, &boundary, &variances)?;
    Ok(PrecisionFit { fit, boundary, variances, estimate })
}

/// `‖Ω̂ - Ω‖` (spectral norm).
pub fn operator_norm_error<T: Real>(est: &PrecisionEstimate<T>, truth: &DMatrix<T>) -> Result<T> {
    if truth.nrows() != est.n || truth.ncols() != est.n {
        return Err(Error::DimensionMismatch { expected: est.n, got: truth.nrows() });
    }
    let diff = est.to_dense()? - truth;
    spectral_norm_sym(&diff, POWER_TOLERANCE, POWER_MAX_ITER)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_estimate(n: usize, b: usize, seed: u64) -> PrecisionEstimate<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> = (0..n).map(|r| (0..b.min(r)).map(|_| rng.random_range(-0.5..0.5)).collect()).collect();
        let dinv = (0..n).map(|_| rng.random_range(0.2..3.0)).collect();
        PrecisionEstimate::from_parts(b, &rows, dinv).unwrap()
    }

    #[test]
    fn identity_behaviour() {
        let e = PrecisionEstimate::<f64>::identity(5);
        let v = vec![1.0, -2.0, 3.0, 0.5, 0.0];
        assert_eq!(e.matvec(&v).unwrap(), v);
        assert_eq!(e.to_dense().unwrap(), DMatrix::identity(5, 5));
        assert!(operator_norm_error(&e, &DMatrix::identity(5, 5)).unwrap().abs() < 1e-12);
        let two = DMatrix::identity(10, 10) * 2.0;
        let err: f64 = operator_norm_error(&PrecisionEstimate::identity(10), &two).unwrap();
        assert!((err - 1.0).abs() < 1e-6);
    }

    #[test]
    fn matvec_matches_dense() {
        let e = random_estimate(64, 3, 1);
        let dense = e.to_dense().unwrap();
        let v: Vec<f64> = (0..64).map(|i| ((i * 7) % 11) as f64 - 5.0).collect();
        let fast = e.matvec(&v).unwrap();
        let slow = &dense * nalgebra::DVector::from_vec(v.clone());
        let scale = slow.norm();
        for (a, b) in fast.iter().zip(slow.iter()) {
            assert!((a - b).abs() <= 1e-12 * scale);
        }
        assert!(e.matvec(&v[..10]).is_err());
    }

    #[test]
    fn dense_matches_factor_product() {
        let e = random_estimate(40, 4, 2);
        let phi = e.cholesky_factor_dense();
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(e.dinv.clone()));
        let prod = phi.transpose() * d * &phi;
        assert!((prod - e.to_dense().unwrap()).amax() < 1e-12);
        for i in 0..40usize {
            for k in 0..i.saturating_sub(4) {
                assert_eq!(phi[(i, k)], 0.0);
            }
        }
    }

    #[test]
    fn csv_lists_band_and_diagonal() {
        let e = random_estimate(6, 2, 3);
        let mut buf = Vec::new();
        e.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 9 + 6);
        assert!(text.starts_with("matrix,i,j,value\n"));
    }

    #[test]
    fn rejects_bad_parts() {
        assert!(PrecisionEstimate::from_parts(1, &[vec![], vec![0.1]], vec![1.0, 0.0]).is_err());
        assert!(PrecisionEstimate::from_parts(1, &[vec![0.3], vec![0.1]], vec![1.0, 1.0]).is_err());
    }
}
