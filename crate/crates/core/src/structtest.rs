//! Structure tests for the Cholesky coefficients: non-stationary white noise
//! (every lag vanishes) and `k₀`-bandedness (lags beyond `k₀` vanish), with
//! null distributions simulated from the estimated score covariance.

use std::ops::RangeInclusive;

use nalgebra::{Cholesky, DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cholfit::{fit_interior, SieveFit};
use crate::error::{Error, Result};
use crate::linalg::{psd_sqrt_dense, symmetrize, NegativeEigen};
use crate::lrcov::{assemble_sigma_l_from_scores, sigma_factor, BlockBandedCov, ScoreSeries, SigmaFactor};
use crate::procsim::TimeSeriesSample;
use crate::rng::{fill_standard_normal, stream, substream_seed};
use crate::scalar::Real;
use crate::sievebasis::BasisSet;

/// Minimum number of simulated null draws accepted by [`run_test`].
pub const MIN_DRAWS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    WhiteNoise,
    Banded(usize),
}

impl TestKind {
    /// Lags whose coefficients vanish under the null.
    pub fn lags(self, b: usize) -> Result<RangeInclusive<usize>> {
        match self {
            TestKind::WhiteNoise if b >= 1 => Ok(1..=b),
            TestKind::Banded(k0) if k0 < b => Ok(k0 + 1..=b),
            _ => Err(Error::InvalidArgument(format!("{self:?} is not testable with b = {b}"))),
        }
    }

    pub fn label(self) -> String {
        match self {
            TestKind::WhiteNoise => "white_noise".into(),
            TestKind::Banded(k0) => format!("banded_{k0}"),
        }
    }
}

/// `Σ_{j∈lags} Σ_k â_jk²`.
pub fn lag_energy<T: Real>(fit: &SieveFit<T>, lags: RangeInclusive<usize>) -> T {
    let mut s = T::zero();
    for j in lags {
        for k in 0..fit.c() {
            let a = fit.coefficients[(j - 1, k)];
            s += a * a;
        }
    }
    s
}

/// `T₁* = Σ_j ∫φ̂_j² = Σ_j Σ_k â_jk²`.
pub fn statistic_t1<T: Real>(fit: &SieveFit<T>) -> T {
    lag_energy(fit, 1..=fit.b)
}

/// `T₂* = Σ_{j>k₀} ∫φ̂_j²`.
pub fn statistic_t2<T: Real>(fit: &SieveFit<T>, k0: usize) -> Result<T> {
    Ok(lag_energy(fit, TestKind::Banded(k0).lags(fit.b)?))
}

/// Riemann-sum Gram matrix `G = Σ_{i=b+1}^n b(i/n) b(i/n)*`.
fn riemann_gram<T: Real>(fit: &SieveFit<T>) -> DMatrix<T> {
    let c = fit.c();
    let mut g = DMatrix::zeros(c, c);
    let mut bt = vec![T::zero(); c];
    for i in fit.b + 1..=fit.n {
        fit.basis.fill(i as f64 / fit.n as f64, &mut bt);
        for r in 0..c {
            for s in 0..c {
                g[(r, s)] += bt[r] * bt[s];
            }
        }
    }
    g
}

/// Simulated null distribution of the lag-wise statistics.
///
/// Draw `k` uses `z ~ N(0, I_{mb})` from stream `substream_seed(seed, k)`, forms
/// `u = Ŝ⁻¹ M F z` (with `M v = Σ_τ v_τ ⊗ b(τ/n)`) and records, for each lag,
/// `u_j* G u_j / n³`. The observed counterpart is `β̂_j* G β̂_j / n`.
#[derive(Debug, Clone)]
pub struct NullSimulator {
    pub n: usize,
    pub b: usize,
    pub c: usize,
    /// Rows `(j-1)c..jc` hold `L_G* (Ŝ⁻¹ M F)_j`; shape `bc × mb`.
    a: DMatrix<f64>,
    /// `L_G* β̂_j` stacked.
    observed: Vec<f64>,
    pub banded_factor: bool,
    pub clipped: usize,
}

impl NullSimulator {
    pub fn new<T: Real>(fit: &SieveFit<T>, factor: &SigmaFactor<T>) -> Result<Self> {
        let (n, b, c) = (fit.n, fit.b, fit.c());
        let bc = b * c;
        let m = n - b;
        let mb = m * b;
        if factor.dim() != mb {
            return Err(Error::DimensionMismatch { expected: mb, got: factor.dim() });
        }
        let to64 = |x: &DMatrix<T>| x.map(|v| v.as_f64());
        let sinv = to64(&fit.gram_inverse()?);
        let g = to64(&riemann_gram(fit));
        let lg = Cholesky::new(g).ok_or(Error::NotPositiveDefinite { pivot: 0, value: 0.0 })?.l();
        let basis_table: Vec<f64> = fit.basis.table((b + 1..=n).map(|tau| tau as f64 / n as f64));
        let mf = match factor {
            SigmaFactor::Projected { cov, negatives } => reduced_factor(cov, negatives, &basis_table, c)?,
            _ => {
                let mut mf = DMatrix::<f64>::zeros(bc, mb);
                for col in 0..mb {
                    for (r, v) in factor.column_entries(col).unwrap_or_default() {
                        let (k, lag) = (r / b, r % b);
                        let v = v.as_f64();
                        let bt = &basis_table[k * c..(k + 1) * c];
                        for (q, &alpha) in bt.iter().enumerate() {
                            mf[(lag * c + q, col)] += v * alpha;
                        }
                    }
                }
                mf
            }
        };
        let p = sinv * mf;
        let mut a = DMatrix::<f64>::zeros(bc, p.ncols());
        let beta: Vec<f64> = fit.beta().iter().map(|v| v.as_f64()).collect();
        let mut observed = vec![0.0; bc];
        for j in 0..b {
            let rows = j * c..(j + 1) * c;
            let block = lg.tr_mul(&p.rows(rows.start, c).into_owned());
            a.rows_mut(rows.start, c).copy_from(&block);
            let bj = DVector::from_column_slice(&beta[rows.clone()]);
            observed[rows].copy_from_slice(lg.tr_mul(&bj).as_slice());
        }
        let (banded_factor, clipped) = (factor.is_banded(), factor.clipped());
        Ok(Self { n, b, c, a, observed, banded_factor, clipped })
    }

    /// Covariance of the simulated coefficient vector restricted to `lags`,
    /// on the scale of the statistic.
    pub fn null_covariance(&self, lags: RangeInclusive<usize>) -> DMatrix<f64> {
        let (lo, hi) = ((lags.start() - 1) * self.c, *lags.end() * self.c);
        let rows = self.a.rows(lo, hi - lo);
        rows * rows.transpose() / (self.n as f64).powi(3)
    }

    /// Observed lag-wise energies `β̂_j* G β̂_j / n`, `j = 1..=b`.
    pub fn observed_energies(&self) -> Vec<f64> {
        self.observed.chunks(self.c).map(|w| w.iter().map(|v| v * v).sum::<f64>() / self.n as f64).collect()
    }

    /// Observed statistic over `lags`.
    pub fn observed(&self, lags: RangeInclusive<usize>) -> f64 {
        let e = self.observed_energies();
        lags.map(|j| e[j - 1]).sum()
    }

    /// `draws × b` lag-wise energies of the simulated null.
    pub fn lag_energies(&self, draws: usize, seed: u64) -> Vec<Vec<f64>> {
        let dim = self.a.ncols();
        let n3 = (self.n as f64).powi(3);
        (0..draws)
            .into_par_iter()
            .map(|k| {
                let mut rng = stream(substream_seed(seed, k as u64));
                let mut z = vec![0.0; dim];
                fill_standard_normal(&mut rng, &mut z);
                let w = &self.a * DVector::from_vec(z);
                w.as_slice().chunks(self.c).map(|wj| wj.iter().map(|v| v * v).sum::<f64>() / n3).collect()
            })
            .collect()
    }

    /// Null draws of the statistic over `lags`.
    pub fn simulate(&self, lags: RangeInclusive<usize>, draws: usize, seed: u64) -> Vec<f64> {
        sum_lags(&self.lag_energies(draws, seed), lags)
    }
}

/// `F_M` with `F_M F_M* = M Σ̂_L⁺ M*`, where `Σ̂_L⁺ = Σ̂_L - Σ λ_i v_i v_i*`
/// over the negative eigenpairs.
fn reduced_factor<T: Real>(
    cov: &BlockBandedCov<T>,
    negatives: &NegativeEigen,
    basis_table: &[f64],
    c: usize,
) -> Result<DMatrix<f64>> {
    let (b, d, p) = (cov.b, cov.dim(), cov.scalar_bandwidth());
    let bc = b * c;
    let apply_m = |r: usize, v: f64, out: &mut [f64]| {
        let (k, lag) = (r / b, r % b);
        for (q, &alpha) in basis_table[k * c..(k + 1) * c].iter().enumerate() {
            out[lag * c + q] += v * alpha;
        }
    };
    let mut w = DMatrix::<f64>::zeros(bc, d);
    let mut col = vec![0.0; bc];
    for s in 0..d {
        col.iter_mut().for_each(|x| *x = 0.0);
        for r in s.saturating_sub(p)..(s + p + 1).min(d) {
            apply_m(r, cov.entry(r, s).as_f64(), &mut col);
        }
        w.column_mut(s).copy_from_slice(&col);
    }
    let mut cm = DMatrix::<f64>::zeros(bc, bc);
    for s in 0..d {
        let (k, lag) = (s / b, s % b);
        let ws = w.column(s).into_owned();
        for (q, &alpha) in basis_table[k * c..(k + 1) * c].iter().enumerate() {
            let mut dst = cm.column_mut(lag * c + q);
            dst.axpy(alpha, &ws, 1.0);
        }
    }
    for (lam, v) in negatives.values.iter().zip(&negatives.vectors) {
        col.iter_mut().for_each(|x| *x = 0.0);
        for (r, &x) in v.iter().enumerate() {
            apply_m(r, x, &mut col);
        }
        let mv = DVector::from_column_slice(&col);
        cm -= &mv * mv.transpose() * *lam;
    }
    symmetrize(&mut cm);
    Ok(psd_sqrt_dense(&cm)?.0)
}

/// Per-draw sums of lag energies over `lags`.
pub fn sum_lags(energies: &[Vec<f64>], lags: RangeInclusive<usize>) -> Vec<f64> {
    energies.iter().map(|e| lags.clone().map(|j| e[j - 1]).sum()).collect()
}

/// Null draws for `kind` from a fit and a factor of `Σ̂_L⁺`.
pub fn simulate_null<T: Real>(
    fit: &SieveFit<T>,
    factor: &SigmaFactor<T>,
    kind: TestKind,
    draws: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let lags = kind.lags(fit.b)?;
    Ok(NullSimulator::new(fit, factor)?.simulate(lags, draws, seed))
}

/// `1 - #{T_k ≤ T*}/B`.
pub fn p_value(statistic: f64, draws: &[f64]) -> f64 {
    if draws.is_empty() {
        return 1.0;
    }
    let below = draws.iter().filter(|&&t| t <= statistic).count();
    1.0 - below as f64 / draws.len() as f64
}

/// Reject when `T*` exceeds the `⌊B(1-α)⌋`-th order statistic (1-based).
pub fn rejects(statistic: f64, draws: &[f64], level: f64) -> bool {
    let mut sorted = draws.to_vec();
    sorted.sort_by(f64::total_cmp);
    let idx = ((sorted.len() as f64) * (1.0 - level)).floor() as usize;
    match idx.checked_sub(1).and_then(|i| sorted.get(i)) {
        Some(&q) => statistic > q,
        None => true,
    }
}

/// Moments of the simulated null.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NullDiagnostics {
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
}

pub fn null_diagnostics(draws: &[f64]) -> NullDiagnostics {
    let k = draws.len() as f64;
    let mean = draws.iter().sum::<f64>() / k;
    let m2 = draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / k;
    let m3 = draws.iter().map(|d| (d - mean).powi(3)).sum::<f64>() / k;
    let skewness = if m2 > 0.0 { m3 / m2.powf(1.5) } else { 0.0 };
    NullDiagnostics { mean, variance: m2, skewness }
}

/// Tuning parameters of one test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestSpec {
    pub kind: TestKind,
    pub level: f64,
    pub b: usize,
    pub basis: BasisSet,
    pub h: f64,
    pub draws: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub kind: TestKind,
    pub n: usize,
    pub b: usize,
    pub c: usize,
    pub basis: String,
    pub h: f64,
    /// Observed statistic on the scale of the null draws.
    pub statistic: f64,
    /// `Σ_{j∈lags} Σ_k â_jk²`.
    pub coefficient_energy: f64,
    pub p_value: f64,
    pub level: f64,
    pub reject: bool,
    pub diagnostics: NullDiagnostics,
    pub banded_factor: bool,
    #[serde(skip)]
    pub null_draws: Vec<f64>,
}

/// Residuals `τ = b+1..=n` of the model restricted to the first `k0` lags
/// (`x_τ` itself when `k0 = 0`).
pub fn restricted_residuals<T: Real>(sample: &TimeSeriesSample<T>, k0: usize, b: usize, basis: &BasisSet) -> Result<Vec<T>> {
    if k0 >= b {
        return Err(Error::InvalidArgument(format!("restricted order {k0} must be below b = {b}")));
    }
    if k0 == 0 {
        return Ok(sample.values[b..].to_vec());
    }
    let fit = fit_interior(sample, k0, basis)?;
    Ok(fit.residuals[b - k0..].to_vec())
}

/// Null simulator for the hypothesis that lags `k0+1..=b` vanish, with the
/// score covariance estimated from residuals of the restricted model.
pub fn null_simulator<T: Real>(
    sample: &TimeSeriesSample<T>,
    fit: &SieveFit<T>,
    k0: usize,
    h: f64,
) -> Result<NullSimulator> {
    let resid = restricted_residuals(sample, k0, fit.b, &fit.basis)?;
    let scores = ScoreSeries::from_residuals(sample, fit.b, &resid)?;
    let cov = assemble_sigma_l_from_scores(&scores, h)?;
    NullSimulator::new(fit, &sigma_factor(&cov)?)
}

/// Fit at order `b` and build the null simulator for `kind`.
pub fn prepare_null<T: Real>(
    sample: &TimeSeriesSample<T>,
    kind: TestKind,
    b: usize,
    basis: &BasisSet,
    h: f64,
) -> Result<(SieveFit<T>, NullSimulator)> {
    let k0 = *kind.lags(b)?.start() - 1;
    let fit = fit_interior(sample, b, basis)?;
    let sim = null_simulator(sample, &fit, k0, h)?;
    Ok((fit, sim))
}

pub fn run_test<T: Real>(sample: &TimeSeriesSample<T>, spec: &TestSpec) -> Result<TestResult> {
    if !(spec.level > 0.0 && spec.level < 1.0) {
        return Err(Error::InvalidArgument(format!("level {} outside (0, 1)", spec.level)));
    }
    if spec.draws < MIN_DRAWS {
        return Err(Error::InvalidArgument(format!("need at least {MIN_DRAWS} null draws, got {}", spec.draws)));
    }
    let lags = spec.kind.lags(spec.b)?;
    let (fit, sim) = prepare_null(sample, spec.kind, spec.b, &spec.basis, spec.h)?;
    let null_draws = sim.simulate(lags.clone(), spec.draws, spec.seed);
    let statistic = sim.observed(lags.clone());
    Ok(TestResult {
        kind: spec.kind,
        n: sample.n(),
        b: spec.b,
        c: spec.basis.c,
        basis: spec.basis.family.name().to_string(),
        h: spec.h,
        statistic,
        coefficient_energy: lag_energy(&fit, lags).as_f64(),
        p_value: p_value(statistic, &null_draws),
        level: spec.level,
        reject: rejects(statistic, &null_draws, spec.level),
        diagnostics: null_diagnostics(&null_draws),
        banded_factor: sim.banded_factor,
        null_draws,
    })
}
