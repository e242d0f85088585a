//! Data-driven choice of the sieve size `c`, the band `b` and the kernel bandwidth `h`.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::cholfit::{build_design, fit_interior};
use crate::error::{Error, Result};
use crate::linalg::least_squares;
use crate::lrcov::bandwidth_cv;
use crate::procsim::TimeSeriesSample;
use crate::rng::substream_seed;
use crate::scalar::Real;
use crate::sievebasis::BasisSet;
use crate::structtest::{null_simulator, p_value, rejects};

/// Leverage values this close to one count as a perfect fit.
const LEVERAGE_LIMIT: f64 = 1.0 - 1e-10;

/// `CV(c) = n⁻¹ Σ_i ε̂_i² / (1 - υ_i)²` with `υ_i` the hat-matrix diagonal.
/// Returns `None` when some leverage reaches one or the design is singular.
pub fn cv_score<T: Real>(sample: &TimeSeriesSample<T>, b: usize, basis: &BasisSet) -> Result<Option<f64>> {
    let y = build_design(sample, b, basis)?;
    let target = DVector::from_column_slice(&sample.values[b..]);
    let sol = match least_squares(&y, &target, true) {
        Ok(s) => s,
        Err(Error::IllConditioned { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    let fitted = &y * &sol.coefficients;
    let leverage = sol.leverage.expect("leverage requested");
    let mut total = 0.0;
    for ((obs, fit), lev) in target.iter().zip(fitted.iter()).zip(&leverage) {
        let lev = lev.as_f64();
        if lev >= LEVERAGE_LIMIT {
            return Ok(None);
        }
        let e = (*obs - *fit).as_f64();
        total += e * e / ((1.0 - lev) * (1.0 - lev));
    }
    Ok(Some(total / sample.n() as f64))
}

/// Grid minimiser of [`cv_score`] (ties toward smaller `c`) and the full curve.
pub fn cv_select_c<T: Real>(
    sample: &TimeSeriesSample<T>,
    b: usize,
    grid_c: &[usize],
    basis: &BasisSet,
) -> Result<(usize, Vec<(usize, f64)>)> {
    if grid_c.is_empty() {
        return Err(Error::InvalidArgument("sieve-size grid is empty".into()));
    }
    let mut grid = grid_c.to_vec();
    grid.sort_unstable();
    grid.dedup();
    let mut curve = Vec::with_capacity(grid.len());
    let mut best: Option<(f64, usize)> = None;
    for &c in &grid {
        let score = cv_score(sample, b, &basis.with_size(c))?.unwrap_or(f64::INFINITY);
        curve.push((c, score));
        if score.is_finite() && best.is_none_or(|(s, _)| score < s) {
            best = Some((score, c));
        }
    }
    let (_, c) = best.ok_or(Error::IllConditioned { condition: f64::INFINITY })?;
    Ok((c, curve))
}

/// Largest band order allowed for the significance scan, `⌈4 n^{1/4}⌉`.
pub fn band_cap(n: usize) -> usize {
    (4.0 * (n as f64).powf(0.25)).ceil() as usize
}

/// One step of the band scan: lags `b1..=b0` tested jointly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanStep {
    pub b1: usize,
    pub statistic: f64,
    pub p_value: f64,
    pub reject: bool,
}

/// Options of the band scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanSpec {
    pub b0: usize,
    pub level: f64,
    pub h: f64,
    pub draws: usize,
    pub seed: u64,
}

/// `b* = max{b₁ < b₀ : lags b₁..=b₀ are jointly significant}`, or 1.
pub fn select_b<T: Real>(sample: &TimeSeriesSample<T>, basis: &BasisSet, spec: &ScanSpec) -> Result<(usize, Vec<ScanStep>)> {
    let n = sample.n();
    if spec.b0 < 2 || spec.b0 > band_cap(n) {
        return Err(Error::InvalidArgument(format!("b0 = {} outside 2..={}", spec.b0, band_cap(n))));
    }
    let fit = fit_interior(sample, spec.b0, basis)?;
    let mut trace = Vec::new();
    for b1 in (1..spec.b0).rev() {
        let sim = null_simulator(sample, &fit, b1 - 1, spec.h)?;
        let lags = b1..=spec.b0;
        let draws = sim.simulate(lags.clone(), spec.draws, substream_seed(spec.seed, b1 as u64));
        let statistic = sim.observed(lags);
        let reject = rejects(statistic, &draws, spec.level);
        trace.push(ScanStep { b1, statistic, p_value: p_value(statistic, &draws), reject });
        if reject {
            return Ok((b1, trace));
        }
    }
    Ok((1, trace))
}

/// Search grids and test settings of the two-step procedure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningGrids {
    pub b0: usize,
    pub grid_c: Vec<usize>,
    pub grid_h: Vec<f64>,
    pub level: f64,
    pub draws: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningReport {
    pub chosen_b: usize,
    pub chosen_c: usize,
    pub chosen_h: f64,
    pub pilot_c: usize,
    pub pilot_h: f64,
    pub cv_curve: Vec<(usize, f64)>,
    pub bstar_trace: Vec<ScanStep>,
    pub h_curve: Vec<(f64, f64)>,
}

/// Median of the grid (lower median for even lengths).
pub fn pilot_c(grid_c: &[usize]) -> Result<usize> {
    let mut g = grid_c.to_vec();
    if g.is_empty() {
        return Err(Error::InvalidArgument("sieve-size grid is empty".into()));
    }
    g.sort_unstable();
    Ok(g[(g.len() - 1) / 2])
}

/// Band scan at the pilot `c`, then `c` by CV at the chosen band, then `h` by CV.
pub fn two_step<T: Real>(sample: &TimeSeriesSample<T>, grids: &TuningGrids, basis: &BasisSet) -> Result<TuningReport> {
    if grids.grid_h.is_empty() {
        return Err(Error::InvalidArgument("bandwidth grid is empty".into()));
    }
    let pilot_c = pilot_c(&grids.grid_c)?;
    let pilot_basis = basis.with_size(pilot_c);
    let pilot_h = {
        let fit = fit_interior(sample, grids.b0, &pilot_basis)?;
        bandwidth_cv(sample, &fit, &grids.grid_h)?.h
    };
    let scan = ScanSpec { b0: grids.b0, level: grids.level, h: pilot_h, draws: grids.draws, seed: grids.seed };
    let (chosen_b, bstar_trace) = select_b(sample, &pilot_basis, &scan)?;
    let (chosen_c, cv_curve) = cv_select_c(sample, chosen_b, &grids.grid_c, basis)?;
    let fit = fit_interior(sample, chosen_b, &basis.with_size(chosen_c))?;
    let choice = bandwidth_cv(sample, &fit, &grids.grid_h)?;
    Ok(TuningReport {
        chosen_b,
        chosen_c,
        chosen_h: choice.h,
        pilot_c,
        pilot_h,
        cv_curve,
        bstar_trace,
        h_curve: choice.scores,
    })
}
