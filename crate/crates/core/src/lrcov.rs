//! Kernel estimate of the block-banded covariance `Σ_L` of the score process
//! `ĥ_τ = ε̂_τ (x_{τ-1}, …, x_{τ-b})`, and factors `F` with `FF* = Σ̂_L⁺`.
//!
//! Scores are indexed by time `τ = b+1..=n`; block row `k` (0-based) is time
//! `τ = b+1+k`. Block `(τ, τ+j)` equals `Λ̃(τ/n, j)`.

use std::io::Write;

use nalgebra::{DMatrix, DVector};

use crate::cholfit::SieveFit;
use crate::error::{Error, Result};
use crate::linalg::{psd_sqrt_dense, BandedCholesky, NegativeEigen, SymBand};
use crate::procsim::TimeSeriesSample;
use crate::scalar::Real;

/// Largest `mb` for which a dense eigendecomposition is attempted.
pub const DENSE_FACTOR_MAX: usize = 8192;
/// Largest `mb` for which the dense CSV export is allowed.
pub const DENSE_EXPORT_MAX: usize = 512;

/// `0.75 (1 - u²)` on `[-1, 1]`, zero elsewhere.
pub fn epanechnikov<T: Real>(u: T) -> T {
    if u.abs() <= T::one() {
        T::lit(0.75) * (T::one() - u * u)
    } else {
        T::zero()
    }
}

/// Default bandwidth `n^{-1/5}` kept inside `[0.05, 0.4]`.
pub fn pilot_bandwidth(n: usize) -> f64 {
    (n as f64).powf(-0.2).clamp(0.05, 0.4)
}

/// Scores `ĥ_τ ∈ ℝ^b` for `τ = b+1..=n`.
#[derive(Debug, Clone)]
pub struct ScoreSeries<T: Real> {
    pub n: usize,
    pub b: usize,
    data: Vec<T>,
}

impl<T: Real> ScoreSeries<T> {
    /// Scores from raw rows; `rows[k]` belongs to time `b+1+k`.
    pub fn from_rows(n: usize, b: usize, rows: &[Vec<T>]) -> Result<Self> {
        if rows.len() + b != n {
            return Err(Error::DimensionMismatch { expected: n - b, got: rows.len() });
        }
        let mut data = Vec::with_capacity(rows.len() * b);
        for r in rows {
            if r.len() != b {
                return Err(Error::DimensionMismatch { expected: b, got: r.len() });
            }
            data.extend_from_slice(r);
        }
        Ok(Self { n, b, data })
    }

    /// `ĥ_τ = x_τ-lags · ε̂_τ` from a fitted sample.
    pub fn from_fit(sample: &TimeSeriesSample<T>, fit: &SieveFit<T>) -> Result<Self> {
        let n = sample.n();
        if fit.n != n {
            return Err(Error::DimensionMismatch { expected: fit.n, got: n });
        }
        Self::from_residuals(sample, fit.b, &fit.residuals)
    }

    /// `ĥ_τ = (x_{τ-1}, …, x_{τ-b}) e_τ` for arbitrary residuals `e_τ`, `τ = b+1..=n`.
    pub fn from_residuals(sample: &TimeSeriesSample<T>, b: usize, residuals: &[T]) -> Result<Self> {
        let n = sample.n();
        if b == 0 || b >= n || residuals.len() != n - b {
            return Err(Error::DimensionMismatch { expected: n.saturating_sub(b), got: residuals.len() });
        }
        let x = &sample.values;
        let mut data = Vec::with_capacity((n - b) * b);
        for (k, &e) in residuals.iter().enumerate() {
            let tau = b + 1 + k;
            data.extend((1..=b).map(|j| x[tau - j - 1] * e));
        }
        Ok(Self { n, b, data })
    }

    /// Number of score vectors, `m = n - b`.
    pub fn len(&self) -> usize {
        self.n - self.b
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `ĥ_τ` for `b+1 ≤ τ ≤ n`.
    pub fn at(&self, tau: usize) -> &[T] {
        let k = tau - self.b - 1;
        &self.data[k * self.b..(k + 1) * self.b]
    }

    fn scaled(&self, s: T) -> Self {
        Self { n: self.n, b: self.b, data: self.data.iter().map(|&v| v * s).collect() }
    }
}

fn check_bandwidth(h: f64) -> Result<()> {
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::InvalidArgument(format!("bandwidth must lie in (0, 1), got {h}")));
    }
    Ok(())
}

/// Add `w · u v*` to the row-major `b × b` accumulator.
#[inline]
fn add_outer<T: Real>(acc: &mut [T], w: T, u: &[T], v: &[T]) {
    let b = u.len();
    for (r, &ur) in u.iter().enumerate() {
        let wu = w * ur;
        for (s, &vs) in v.iter().enumerate() {
            acc[r * b + s] += wu * vs;
        }
    }
}

/// Row-major `Σ_τ K((τ/n - t)/h) ĥ_τ ĥ_{τ+j}*` and the kernel mass `Σ_τ K(·)`
/// over the available window, without validation.
fn kernel_sum<T: Real>(scores: &ScoreSeries<T>, t: f64, j: usize, h: f64) -> Option<(Vec<T>, f64)> {
    let (n, b) = (scores.n, scores.b);
    let nf = n as f64;
    let lo = ((nf * (t - h)).ceil().max((b + 1) as f64)) as usize;
    let hi_f = (nf * (t + h)).floor().min((n - j) as f64);
    if hi_f < lo as f64 {
        return None;
    }
    let hi = hi_f as usize;
    let mut acc = vec![T::zero(); b * b];
    let mut mass = 0.0;
    for tau in lo..=hi {
        let w = epanechnikov((tau as f64 / nf - t) / h);
        if w != 0.0 {
            mass += w;
            add_outer(&mut acc, T::lit(w), scores.at(tau), scores.at(tau + j));
        }
    }
    Some((acc, mass))
}

/// `Λ̃(t, j)` with the kernel sum divided by its own mass, so that windows
/// truncated by the ends of the sample keep unit total weight.
fn lambda_normalized<T: Real>(scores: &ScoreSeries<T>, t: f64, j: usize, h: f64) -> Option<Vec<T>> {
    let (mut acc, mass) = kernel_sum(scores, t, j, h)?;
    if mass <= 0.0 {
        return None;
    }
    let inv = T::lit(1.0 / mass);
    acc.iter_mut().for_each(|v| *v *= inv);
    Some(acc)
}

/// `Λ̃(t, j) = (nh)⁻¹ Σ_τ K((τ/n - t)/h) ĥ_τ ĥ_{τ+j}*`.
pub fn estimate_lambda<T: Real>(scores: &ScoreSeries<T>, t: f64, j: usize, h: f64) -> Result<DMatrix<T>> {
    check_bandwidth(h)?;
    if j > scores.b {
        return Err(Error::InvalidArgument(format!("lag {j} exceeds b = {}", scores.b)));
    }
    if scores.is_empty() || j >= scores.len() {
        return Err(Error::EmptyWindow { t, h });
    }
    let (acc, _) = kernel_sum(scores, t, j, h).ok_or(Error::EmptyWindow { t, h })?;
    let scale = T::lit(1.0 / (scores.n as f64 * h));
    Ok(DMatrix::from_row_slice(scores.b, scores.b, &acc) * scale)
}

/// Block-banded symmetric matrix of `m × m` blocks of size `b × b`, storing
/// the upper blocks `(k, k+j)` for `0 ≤ j ≤ b`.
#[derive(Debug, Clone)]
pub struct BlockBandedCov<T: Real> {
    pub m: usize,
    pub b: usize,
    pub h: f64,
    /// Row-major blocks, index `(k·(b+1) + j)·b² + r·b + s`.
    data: Vec<T>,
}

impl<T: Real> BlockBandedCov<T> {
    /// Block-diagonal matrix with every diagonal block equal to `block`.
    pub fn block_diagonal(m: usize, block: &DMatrix<T>) -> Self {
        let b = block.nrows();
        let mut data = vec![T::zero(); m * (b + 1) * b * b];
        for k in 0..m {
            let off = k * (b + 1) * b * b;
            for r in 0..b {
                for s in 0..b {
                    data[off + r * b + s] = block[(r, s)];
                }
            }
        }
        Self { m, b, h: 0.0, data }
    }

    /// Matrix whose upper block `(k, k+j)` has entries `f(k, j, r, s)`.
    pub fn from_fn(m: usize, b: usize, h: f64, f: impl Fn(usize, usize, usize, usize) -> T) -> Self {
        let mut data = vec![T::zero(); m * (b + 1) * b * b];
        for k in 0..m {
            for j in 0..=b.min(m - 1 - k) {
                for r in 0..b {
                    for s in 0..b {
                        let v = if j == 0 && r > s { f(k, 0, s, r) } else { f(k, j, r, s) };
                        data[(k * (b + 1) + j) * b * b + r * b + s] = v;
                    }
                }
            }
        }
        Self { m, b, h, data }
    }

    /// Scalar dimension `mb`.
    pub fn dim(&self) -> usize {
        self.m * self.b
    }

    /// Scalar half-bandwidth `b(b+1) - 1`.
    pub fn scalar_bandwidth(&self) -> usize {
        (self.b * (self.b + 1)).saturating_sub(1)
    }

    /// Upper block `(k, k+j)`, 0-based `k`.
    pub fn block(&self, k: usize, j: usize) -> DMatrix<T> {
        let b = self.b;
        if j > b || k + j >= self.m {
            return DMatrix::zeros(b, b);
        }
        let off = (k * (b + 1) + j) * b * b;
        DMatrix::from_row_slice(b, b, &self.data[off..off + b * b])
    }

    /// Scalar entry `(r, s)`, 0-based.
    pub fn entry(&self, r: usize, s: usize) -> T {
        let b = self.b;
        let (r, s) = if s / b >= r / b { (r, s) } else { (s, r) };
        let (k1, a1) = (r / b, r % b);
        let (k2, a2) = (s / b, s % b);
        let j = k2 - k1;
        if j > b || k2 >= self.m {
            return T::zero();
        }
        self.data[(k1 * (b + 1) + j) * b * b + a1 * b + a2]
    }

    pub fn to_dense(&self) -> DMatrix<T> {
        let d = self.dim();
        let p = self.scalar_bandwidth();
        let mut out = DMatrix::zeros(d, d);
        for r in 0..d {
            for s in r..(r + p + 1).min(d) {
                let v = self.entry(r, s);
                out[(r, s)] = v;
                out[(s, r)] = v;
            }
        }
        out
    }

    /// Dense CSV (one row of the matrix per line), allowed for `mb ≤ 512`.
    pub fn write_dense_csv<W: Write>(&self, mut w: W) -> Result<()> {
        if self.dim() > DENSE_EXPORT_MAX {
            return Err(Error::TooLarge { n: self.dim(), max: DENSE_EXPORT_MAX });
        }
        let d = self.to_dense();
        for r in 0..d.nrows() {
            let line: Vec<String> = d.row(r).iter().map(|v| v.to_string()).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }
}

fn assemble_from_scores<T: Real>(scores: &ScoreSeries<T>, h: f64) -> Result<BlockBandedCov<T>> {
    check_bandwidth(h)?;
    let (n, b, m) = (scores.n, scores.b, scores.len());
    let bb = b * b;
    let mut data = vec![T::zero(); m * (b + 1) * bb];
    for k in 0..m {
        let tau = b + 1 + k;
        let t = tau as f64 / n as f64;
        for j in 0..=b.min(m - 1 - k) {
            let blk = lambda_normalized(scores, t, j, h).ok_or(Error::EmptyWindow { t, h })?;
            let off = (k * (b + 1) + j) * bb;
            data[off..off + bb].copy_from_slice(&blk);
        }
    }
    Ok(BlockBandedCov { m, b, h, data })
}

/// `Σ̂_L` with bandwidth `h` from the residual scores of `fit`.
pub fn assemble_sigma_l<T: Real>(sample: &TimeSeriesSample<T>, fit: &SieveFit<T>, h: f64) -> Result<BlockBandedCov<T>> {
    assemble_from_scores(&ScoreSeries::from_fit(sample, fit)?, h)
}

/// `Σ̂_L` built directly from a score series.
pub fn assemble_sigma_l_from_scores<T: Real>(scores: &ScoreSeries<T>, h: f64) -> Result<BlockBandedCov<T>> {
    assemble_from_scores(scores, h)
}

/// Dense `F = V diag(√λ⁺)` with `FF* = Σ̂_L⁺`, plus the number of clipped eigenvalues.
pub fn psd_sqrt<T: Real>(cov: &BlockBandedCov<T>) -> Result<(DMatrix<T>, usize)> {
    if cov.dim() > DENSE_FACTOR_MAX {
        return Err(Error::TooLarge { n: cov.dim(), max: DENSE_FACTOR_MAX });
    }
    psd_sqrt_dense(&cov.to_dense())
}

/// Largest number of negative eigenpairs removed from a banded `Σ̂_L` before
/// falling back to a dense eigendecomposition.
pub const MAX_BANDED_NEGATIVES: usize = 256;

/// Relative size below which negative eigenvalues of `Σ̂_L` are left in place.
pub const NEGATIVE_CUTOFF: f64 = 1e-12;

/// `Σ̂_L⁺` in one of three forms: a banded Cholesky factor when `Σ̂_L` is
/// positive definite, the banded `Σ̂_L` with its negative eigenpairs when only
/// a few eigenvalues are negative, or a dense clipped factor. All three
/// describe the same `Σ̂_L⁺`.
#[derive(Debug, Clone)]
pub enum SigmaFactor<T: Real> {
    Banded(BandedCholesky<T>),
    Projected { cov: BlockBandedCov<T>, negatives: NegativeEigen },
    Dense { factor: DMatrix<T>, clipped: usize },
}

impl<T: Real> SigmaFactor<T> {
    pub fn dim(&self) -> usize {
        match self {
            SigmaFactor::Banded(l) => l.dim(),
            SigmaFactor::Projected { cov, .. } => cov.dim(),
            SigmaFactor::Dense { factor, .. } => factor.nrows(),
        }
    }

    pub fn is_banded(&self) -> bool {
        !matches!(self, SigmaFactor::Dense { .. })
    }

    /// Number of eigenvalues of `Σ̂_L` set to zero.
    pub fn clipped(&self) -> usize {
        match self {
            SigmaFactor::Banded(_) => 0,
            SigmaFactor::Projected { negatives, .. } => negatives.values.len(),
            SigmaFactor::Dense { clipped, .. } => *clipped,
        }
    }

    /// Dense `F` with `FF* = Σ̂_L⁺`.
    pub fn to_dense(&self) -> Result<DMatrix<T>> {
        match self {
            SigmaFactor::Banded(l) => Ok(l.to_dense()),
            SigmaFactor::Projected { cov, negatives } => {
                if cov.dim() > DENSE_FACTOR_MAX {
                    return Err(Error::TooLarge { n: cov.dim(), max: DENSE_FACTOR_MAX });
                }
                let mut d = cov.to_dense().map(|v| v.as_f64());
                for (lam, v) in negatives.values.iter().zip(&negatives.vectors) {
                    let v = DVector::from_column_slice(v);
                    d -= &v * v.transpose() * *lam;
                }
                Ok(psd_sqrt_dense(&d)?.0.map(T::lit))
            }
            SigmaFactor::Dense { factor, .. } => Ok(factor.clone()),
        }
    }

    /// Nonzero entries of column `c` of a triangular or dense factor; `None`
    /// for the projected form, which holds no factor.
    pub fn column_entries(&self, c: usize) -> Option<Vec<(usize, T)>> {
        match self {
            SigmaFactor::Banded(l) => Some(l.column(c).collect()),
            SigmaFactor::Projected { .. } => None,
            SigmaFactor::Dense { factor, .. } => Some(
                factor.column(c).iter().enumerate().filter(|(_, v)| **v != T::zero()).map(|(r, &v)| (r, v)).collect(),
            ),
        }
    }
}

/// Factor `Σ̂_L⁺`, preferring the banded Cholesky path, then the banded
/// projection, then the dense eigendecomposition.
pub fn sigma_factor<T: Real>(cov: &BlockBandedCov<T>) -> Result<SigmaFactor<T>> {
    match BandedCholesky::factor(cov.dim(), cov.scalar_bandwidth(), |r, s| cov.entry(r, s)) {
        Ok(l) => Ok(SigmaFactor::Banded(l)),
        Err(Error::NotPositiveDefinite { .. }) => {
            let band = SymBand::new(cov.dim(), cov.scalar_bandwidth(), |r, s| cov.entry(r, s).as_f64());
            if let Some(negatives) = band.negative_eigenpairs(NEGATIVE_CUTOFF, MAX_BANDED_NEGATIVES) {
                return Ok(SigmaFactor::Projected { cov: cov.clone(), negatives });
            }
            let (factor, clipped) = psd_sqrt(cov)?;
            Ok(SigmaFactor::Dense { factor, clipped })
        }
        Err(e) => Err(e),
    }
}

/// Cross-validation scores and the selected bandwidth.
#[derive(Debug, Clone)]
pub struct BandwidthChoice {
    pub h: f64,
    /// `(h, Ĵ(h))` for every grid point.
    pub scores: Vec<(f64, f64)>,
}

/// Leave-one-out prediction error `Ĵ(h) = max_j ‖n⁻¹ Σ_τ (Y_τ - Λ̃₋τ(τ/n, j))∘(Y_τ - Λ̃₋τ(τ/n, j))‖_F`
/// with `Y_τ = ĥ_τ ĥ_{τ+j}*` and `Λ̃₋τ` the mass-normalised kernel average
/// that leaves out `τ`.
pub fn cv_score<T: Real>(scores: &ScoreSeries<T>, h: f64) -> Result<f64> {
    check_bandwidth(h)?;
    let (n, b) = (scores.n, scores.b);
    let nf = n as f64;
    let mut worst = 0.0f64;
    for j in 0..=b.min(scores.len().saturating_sub(1)) {
        let mut acc = vec![0.0f64; b * b];
        for tau in b + 1..=n - j {
            let t = tau as f64 / nf;
            let (sum, mass) = kernel_sum(scores, t, j, h).ok_or(Error::EmptyWindow { t, h })?;
            let loo_mass = mass - epanechnikov(0.0f64);
            if loo_mass <= 0.0 {
                return Err(Error::EmptyWindow { t, h });
            }
            let (u, v) = (scores.at(tau), scores.at(tau + j));
            for r in 0..b {
                for s in 0..b {
                    let y = (u[r] * v[s]).as_f64();
                    let pred = (sum[r * b + s].as_f64() - 0.75 * y) / loo_mass;
                    let d = y - pred;
                    acc[r * b + s] += d * d;
                }
            }
        }
        let norm = acc.iter().map(|v| (v / nf) * (v / nf)).sum::<f64>().sqrt();
        worst = worst.max(norm);
    }
    Ok(worst)
}

/// Grid minimiser of [`cv_score`]; ties go to the smaller bandwidth.
pub fn bandwidth_cv<T: Real>(sample: &TimeSeriesSample<T>, fit: &SieveFit<T>, grid: &[f64]) -> Result<BandwidthChoice> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("bandwidth grid is empty".into()));
    }
    if let Some(&h) = grid.iter().find(|&&h| !(h > 0.0 && h <= 0.5)) {
        return Err(Error::InvalidArgument(format!("bandwidth {h} outside (0, 0.5]")));
    }
    let scores = ScoreSeries::from_fit(sample, fit)?;
    // Normalise so that the criterion is scale free in x.
    let mean_sq = scores.data.iter().map(|v| v.as_f64().powi(2)).sum::<f64>() / scores.data.len().max(1) as f64;
    let scores = if mean_sq > 0.0 { scores.scaled(T::lit(1.0 / mean_sq.sqrt())) } else { scores };
    let mut sorted = grid.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite bandwidths"));
    let mut out = Vec::with_capacity(sorted.len());
    let mut best = (f64::INFINITY, sorted[0]);
    for &h in &sorted {
        let j = cv_score(&scores, h)?;
        if j < best.0 {
            best = (j, h);
        }
        out.push((h, j));
    }
    Ok(BandwidthChoice { h: best.1, scores: out })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cholfit::fit_interior;
    use crate::procsim::{simulate, ModelKind, ModelSpec};
    use crate::sievebasis::BasisSet;

    #[test]
    fn kernel_values() {
        assert_eq!(epanechnikov(0.0f64), 0.75);
        assert_eq!(epanechnikov(1.0f64), 0.0);
        assert_eq!(epanechnikov(-1.0f64), 0.0);
        assert_eq!(epanechnikov(0.5f64), 0.5625);
        assert_eq!(epanechnikov(1.5f64), 0.0);
    }

    #[test]
    fn lambda_of_constant_unit_scores() {
        let (n, b) = (200, 2);
        let rows = vec![vec![1.0f64, 0.0]; n - b];
        let s = ScoreSeries::from_rows(n, b, &rows).unwrap();
        let lam = estimate_lambda(&s, 0.5, 0, 0.2).unwrap();
        let mass: f64 = (b + 1..=n).map(|k| epanechnikov((k as f64 / n as f64 - 0.5) / 0.2)).sum::<f64>() / (n as f64 * 0.2);
        assert!((lam[(0, 0)] - mass).abs() < 1e-14);
        assert_eq!(lam[(0, 1)], 0.0);
        assert_eq!(lam[(1, 1)], 0.0);
        assert!(estimate_lambda(&s, 0.5, 3, 0.2).is_err());
        let zero = ScoreSeries::from_rows(n, b, &vec![vec![0.0f64; 2]; n - b]).unwrap();
        assert_eq!(estimate_lambda(&zero, 0.3, 1, 0.1).unwrap(), DMatrix::zeros(2, 2));
    }

    #[test]
    fn kernel_mass_is_near_one_in_interior() {
        let n = 600;
        for h in [0.05, 0.1, 0.2] {
            let mut t = 2.0 * h;
            while t <= 1.0 - 2.0 * h {
                let mass: f64 = (1..=n).map(|k| epanechnikov((k as f64 / n as f64 - t) / h)).sum::<f64>() / (n as f64 * h);
                assert!((mass - 1.0).abs() < 0.05);
                t += 0.05;
            }
        }
    }

    #[test]
    fn dense_is_symmetric_and_banded() {
        let sample = simulate::<f64>(&ModelSpec::new(ModelKind::WhiteNoise), 120, 3).unwrap();
        let fit = fit_interior(&sample, 2, &BasisSet::fourier(3)).unwrap();
        let cov = assemble_sigma_l(&sample, &fit, 0.3).unwrap();
        let d = cov.to_dense();
        assert_eq!(d, d.transpose());
        for r in 0..d.nrows() {
            for s in 0..d.ncols() {
                if (r / 2).abs_diff(s / 2) > 2 {
                    assert_eq!(d[(r, s)], 0.0);
                }
            }
        }
    }

    #[test]
    fn smallest_shape_has_one_block() {
        let rows = vec![vec![2.0f64]];
        let s = ScoreSeries::from_rows(2, 1, &rows).unwrap();
        let cov = assemble_sigma_l_from_scores(&s, 0.9).unwrap();
        assert_eq!(cov.m, 1);
        assert_eq!(cov.dim(), 1);
        assert!(cov.to_dense()[(0, 0)] > 0.0);
    }

    #[test]
    fn factor_examples() {
        let id = BlockBandedCov::block_diagonal(3, &DMatrix::<f64>::identity(2, 2));
        let (f, clipped) = psd_sqrt(&id).unwrap();
        assert_eq!(clipped, 0);
        assert!((&f * f.transpose() - DMatrix::identity(6, 6)).amax() < 1e-12);
        let four = BlockBandedCov::block_diagonal(1, &DMatrix::from_element(1, 1, 4.0f64));
        let (f, _) = psd_sqrt(&four).unwrap();
        assert!((f[(0, 0)].abs() - 2.0).abs() < 1e-12);
        match sigma_factor(&four).unwrap() {
            SigmaFactor::Banded(l) => assert!((l.get(0, 0) - 2.0).abs() < 1e-15),
            _ => panic!("expected banded factor"),
        }
    }

    #[test]
    fn indefinite_input_is_projected() {
        let blk = DMatrix::from_row_slice(2, 2, &[1.0f64, 2.0, 2.0, 1.0]);
        let cov = BlockBandedCov::block_diagonal(2, &blk);
        let f = sigma_factor(&cov).unwrap();
        assert!(matches!(f, SigmaFactor::Projected { .. }));
        assert_eq!(f.clipped(), 2);
        assert!(f.column_entries(0).is_none());
        let factor = f.to_dense().unwrap();
        let rec = &factor * factor.transpose();
        let expect = DMatrix::from_row_slice(2, 2, &[1.5, 1.5, 1.5, 1.5]);
        assert!((rec.view((0, 0), (2, 2)) - &expect).amax() < 1e-12);
        let (dense, clipped) = psd_sqrt(&cov).unwrap();
        assert_eq!(clipped, 2);
        assert!((&dense * dense.transpose() - rec).amax() < 1e-12);
    }

    #[test]
    fn bandwidth_cv_basics() {
        let sample = simulate::<f64>(&ModelSpec::new(ModelKind::WhiteNoise), 300, 5).unwrap();
        let fit = fit_interior(&sample, 2, &BasisSet::fourier(3)).unwrap();
        assert_eq!(bandwidth_cv(&sample, &fit, &[0.2]).unwrap().h, 0.2);
        let ch = bandwidth_cv(&sample, &fit, &[0.4, 0.1, 0.2]).unwrap();
        assert!(ch.scores.iter().all(|(_, j)| j.is_finite() && *j >= 0.0));
        assert_eq!(ch.scores[0].0, 0.1);
        assert!(bandwidth_cv(&sample, &fit, &[]).is_err());
        assert!(bandwidth_cv(&sample, &fit, &[0.7]).is_err());
    }
}
