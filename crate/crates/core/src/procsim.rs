//! Locally stationary test processes and their exact second-order oracles.
//!
//! Every model is driven by Gaussian innovations `e_i ~ N(0, sd^2)` and a set
//! of smooth coefficient functions of rescaled time `t = i/n`:
//!
//! | kind           | recursion                                                        |
//! |----------------|------------------------------------------------------------------|
//! | `WhiteNoise`   | `x_i = e_i`                                                      |
//! | `TvMa1`        | `x_i = e_i + 0.6 cos(2πt) e_{i-1}`                               |
//! | `TvMa2`        | `... + 0.3 sin(2πt) e_{i-2}`                                     |
//! | `TvMa3`        | `... + t e_{i-3}`                                                |
//! | `TvAr1`        | `x_i = 0.6 cos(2πt) x_{i-1} + e_i`                               |
//! | `TvAr2`        | `... + 0.3 sin(2πt) x_{i-2}`                                     |
//! | `TvAr3Delta`   | `... + δ sin(2πt) x_{i-3}`                                       |
//! | `StationaryAr1`| `x_i = 0.6 x_{i-1} + e_i`                                        |
//!
//! Autoregressions start from a zero state `⌈20 log n⌉` steps before `i = 1`;
//! during that burn-in the coefficient functions are frozen at `t = 1/n`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::spectral_norm_sym;
use crate::rng;
use crate::scalar::Real;

/// Smallest admissible series length.
pub const MIN_LENGTH: usize = 16;
/// Largest `n` for which dense oracles are built.
pub const DENSE_ORACLE_MAX: usize = 4096;
/// Condition-number ceiling for inverting an oracle covariance.
pub const ORACLE_CONDITION_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    WhiteNoise,
    TvMa1,
    TvMa2,
    TvMa3,
    TvAr1,
    TvAr2,
    TvAr3Delta,
    StationaryAr1,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::WhiteNoise => "white_noise",
            ModelKind::TvMa1 => "tv_ma1",
            ModelKind::TvMa2 => "tv_ma2",
            ModelKind::TvMa3 => "tv_ma3",
            ModelKind::TvAr1 => "tv_ar1",
            ModelKind::TvAr2 => "tv_ar2",
            ModelKind::TvAr3Delta => "tv_ar3_delta",
            ModelKind::StationaryAr1 => "stationary_ar1",
        }
    }

    fn is_autoregressive(self) -> bool {
        matches!(
            self,
            ModelKind::TvAr1 | ModelKind::TvAr2 | ModelKind::TvAr3Delta | ModelKind::StationaryAr1
        )
    }
}

fn default_sd() -> f64 {
    1.0
}

/// A member of the simulation family together with its innovation scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub kind: ModelKind,
    /// Lag-3 amplitude of `TvAr3Delta`; ignored by the other kinds.
    #[serde(default)]
    pub delta: f64,
    #[serde(default = "default_sd")]
    pub innovation_sd: f64,
}

impl ModelSpec {
    pub fn new(kind: ModelKind) -> Self {
        Self { kind, delta: 0.0, innovation_sd: 1.0 }
    }

    pub fn ar3_delta(delta: f64) -> Self {
        Self { kind: ModelKind::TvAr3Delta, delta, innovation_sd: 1.0 }
    }

    pub fn with_sd(mut self, sd: f64) -> Self {
        self.innovation_sd = sd;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.innovation_sd > 0.0 && self.innovation_sd.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "innovation_sd must be positive, got {}",
                self.innovation_sd
            )));
        }
        if self.kind == ModelKind::TvAr3Delta && !(0.0..0.3).contains(&self.delta) {
            return Err(Error::InvalidArgument(format!(
                "delta must lie in [0, 0.3), got {}",
                self.delta
            )));
        }
        Ok(())
    }

    /// Moving-average weights `θ_1(t), θ_2(t), ...` (empty for autoregressions).
    pub fn ma_coefficients(&self, t: f64) -> Vec<f64> {
        let c = (2.0 * PI * t).cos();
        let s = (2.0 * PI * t).sin();
        match self.kind {
            ModelKind::TvMa1 => vec![0.6 * c],
            ModelKind::TvMa2 => vec![0.6 * c, 0.3 * s],
            ModelKind::TvMa3 => vec![0.6 * c, 0.3 * s, t],
            _ => Vec::new(),
        }
    }

    /// Autoregressive weights `a_1(t), a_2(t), ...` (empty for moving averages).
    pub fn ar_coefficients(&self, t: f64) -> Vec<f64> {
        let c = (2.0 * PI * t).cos();
        let s = (2.0 * PI * t).sin();
        match self.kind {
            ModelKind::TvAr1 => vec![0.6 * c],
            ModelKind::TvAr2 => vec![0.6 * c, 0.3 * s],
            ModelKind::TvAr3Delta => vec![0.6 * c, 0.3 * s, self.delta * s],
            ModelKind::StationaryAr1 => vec![0.6],
            _ => Vec::new(),
        }
    }
}

/// Number of burn-in steps for the autoregressive recursions.
pub fn burn_in(n: usize) -> usize {
    (20.0 * (n as f64).ln()).ceil() as usize
}

/// MA truncation order of the autoregressive covariance oracle.
pub fn oracle_truncation(n: usize) -> usize {
    (40.0 * (n as f64).ln()).ceil() as usize
}

/// One realization of a model.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesSample<T: Real> {
    pub values: Vec<T>,
    pub model: Option<ModelSpec>,
    pub seed: u64,
}

impl<T: Real> TimeSeriesSample<T> {
    /// Wrap observed data with no generating model.
    pub fn from_values(values: Vec<T>) -> Self {
        Self { values, model: None, seed: 0 }
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// The same series multiplied by `s`.
    pub fn scaled(&self, s: T) -> Self {
        Self {
            values: self.values.iter().map(|&v| v * s).collect(),
            model: self.model,
            seed: self.seed,
        }
    }
}

/// Draw a realization of length `n`. Identical `(model, n, seed)` give
/// bit-identical output.
pub fn simulate<T: Real>(model: &ModelSpec, n: usize, seed: u64) -> Result<TimeSeriesSample<T>> {
    model.validate()?;
    if n < MIN_LENGTH {
        return Err(Error::TooShort { n, min: MIN_LENGTH });
    }
    let burn = burn_in(n);
    // Innovations for times 1-burn ..= n; index k holds time k + 1 - burn.
    let mut e = vec![0.0; n + burn];
    rng::fill_standard_normal(&mut rng::stream(seed), &mut e);
    for v in e.iter_mut() {
        *v *= model.innovation_sd;
    }
    let nf = n as f64;
    let mut out = Vec::with_capacity(n);
    if model.kind.is_autoregressive() {
        let mut x = vec![0.0; n + burn];
        let frozen = model.ar_coefficients(1.0 / nf);
        for k in 0..n + burn {
            let time = k as i64 + 1 - burn as i64;
            let coefs = if time >= 1 { model.ar_coefficients(time as f64 / nf) } else { frozen.clone() };
            let mut v = e[k];
            for (l, a) in coefs.iter().enumerate() {
                if k > l {
                    v += a * x[k - l - 1];
                }
            }
            x[k] = v;
        }
        out.extend(x[burn..].iter().map(|&v| T::lit(v)));
    } else {
        for i in 1..=n {
            let k = i + burn - 1;
            let mut v = e[k];
            for (l, th) in model.ma_coefficients(i as f64 / nf).iter().enumerate() {
                v += th * e[k - l - 1];
            }
            out.push(T::lit(v));
        }
    }
    Ok(TimeSeriesSample { values: out, model: Some(*model), seed })
}

/// Moving-average representation `x_i = Σ_k c[i][k] e_{i-k}`, `k = 0..=K`.
fn ma_representation(model: &ModelSpec, n: usize) -> Vec<Vec<f64>> {
    let nf = n as f64;
    if !model.kind.is_autoregressive() {
        return (1..=n)
            .map(|i| {
                let mut c = vec![1.0];
                c.extend(model.ma_coefficients(i as f64 / nf));
                c
            })
            .collect();
    }
    let kmax = oracle_truncation(n);
    // Weights of the frozen burn-in recursion, shared by every time <= 0.
    let frozen = model.ar_coefficients(1.0 / nf);
    let mut psi = vec![0.0; kmax + 1];
    psi[0] = 1.0;
    for k in 1..=kmax {
        psi[k] = frozen.iter().enumerate().filter(|(l, _)| *l < k).map(|(l, a)| a * psi[k - l - 1]).sum();
    }
    let mut c: Vec<Vec<f64>> = Vec::with_capacity(n);
    for i in 1..=n {
        let a = model.ar_coefficients(i as f64 / nf);
        let mut row = vec![0.0; kmax + 1];
        row[0] = 1.0;
        for k in 1..=kmax {
            let mut s = 0.0;
            for (l, al) in a.iter().enumerate() {
                let lag = l + 1;
                if lag > k {
                    break;
                }
                let prev = if i > lag { c[i - lag - 1][k - lag] } else { psi[k - lag] };
                s += al * prev;
            }
            row[k] = s;
        }
        c.push(row);
    }
    c
}

/// Exact covariance matrix of `(x_1, ..., x_n)` (truncated MA expansion for the
/// autoregressive kinds).
pub fn true_covariance<T: Real>(model: &ModelSpec, n: usize) -> Result<DMatrix<T>> {
    model.validate()?;
    if n > DENSE_ORACLE_MAX {
        return Err(Error::TooLarge { n, max: DENSE_ORACLE_MAX });
    }
    if n == 0 {
        return Err(Error::TooShort { n, min: 1 });
    }
    let c = ma_representation(model, n);
    let var = model.innovation_sd * model.innovation_sd;
    let mut g = DMatrix::<T>::zeros(n, n);
    for i in 0..n {
        for l in 0..=i {
            let d = i - l;
            let ci = &c[i];
            let cl = &c[l];
            if d >= ci.len() {
                continue;
            }
            let mut s = 0.0;
            for k in d..ci.len() {
                if k - d < cl.len() {
                    s += ci[k] * cl[k - d];
                }
            }
            let v = T::lit(s * var);
            g[(i, l)] = v;
            g[(l, i)] = v;
        }
    }
    Ok(g)
}

/// Inverse of [`true_covariance`], computed from its Cholesky factor.
pub fn true_precision<T: Real>(model: &ModelSpec, n: usize) -> Result<DMatrix<T>> {
    let gamma = true_covariance::<T>(model, n)?;
    invert_covariance(&gamma)
}

/// Invert a covariance oracle, refusing condition numbers above
/// [`ORACLE_CONDITION_LIMIT`].
pub fn invert_covariance<T: Real>(gamma: &DMatrix<T>) -> Result<DMatrix<T>> {
    let n = gamma.nrows();
    let chol = gamma
        .clone()
        .cholesky()
        .ok_or(Error::NotPositiveDefinite { pivot: 0, value: f64::NAN })?;
    let mut omega = chol.inverse();
    crate::linalg::symmetrize(&mut omega);
    let lmax = spectral_norm_sym(gamma, 1e-10, 100_000)?.as_f64();
    let lmax_inv = spectral_norm_sym(&omega, 1e-10, 100_000)?.as_f64();
    let cond = lmax * lmax_inv;
    if !(cond <= ORACLE_CONDITION_LIMIT) {
        return Err(Error::IllConditioned { condition: cond });
    }
    debug_assert_eq!(omega.nrows(), n);
    Ok(omega)
}

/// `max |Ω Γ - I|`, the entrywise residual of an inverse.
pub fn inverse_residual<T: Real>(omega: &DMatrix<T>, gamma: &DMatrix<T>) -> f64 {
    let n = omega.nrows();
    let prod = omega * gamma;
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((prod[(i, j)].as_f64() - target).abs());
        }
    }
    worst
}

/// Dependence/smoothness exponents of the asymptotic theory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssumptionParams {
    pub tau: f64,
    pub d: u32,
    pub alpha1: f64,
}

/// Constant of the rate constraint `C/τ + d·α₁ < 1`.
pub const RATE_CONSTANT: f64 = 4.0;

impl AssumptionParams {
    pub fn new(tau: f64, d: u32, alpha1: f64) -> Result<Self> {
        if !(tau > 10.0) {
            return Err(Error::InvalidArgument(format!("tau must exceed 10, got {tau}")));
        }
        if d == 0 {
            return Err(Error::InvalidArgument("smoothness order d must be positive".into()));
        }
        if !(alpha1 > 0.0 && alpha1 < 1.0) {
            return Err(Error::InvalidArgument(format!("alpha1 must lie in (0,1), got {alpha1}")));
        }
        Ok(Self { tau, d, alpha1 })
    }

    /// Value of `C/τ + d·α₁`.
    pub fn constraint_value(&self) -> f64 {
        RATE_CONSTANT / self.tau + self.d as f64 * self.alpha1
    }

    pub fn satisfies_constraint(&self) -> bool {
        self.constraint_value() < 1.0
    }

    /// Default band order `⌈n^{2/τ}⌉`.
    pub fn default_band(&self, n: usize) -> usize {
        ((n as f64).powf(2.0 / self.tau).ceil() as usize).max(1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn white_noise_moments() {
        let s = simulate::<f64>(&ModelSpec::new(ModelKind::WhiteNoise), 100, 1).unwrap();
        let n = s.n() as f64;
        let mean = s.values.iter().sum::<f64>() / n;
        let var = s.values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() < 0.5);
        assert!((0.6..=1.5).contains(&var), "variance {var}");
    }

    #[test]
    fn simulate_is_bit_identical() {
        for kind in [ModelKind::TvMa2, ModelKind::TvAr2] {
            let m = ModelSpec::new(kind);
            let a = simulate::<f64>(&m, 300, 99).unwrap();
            let b = simulate::<f64>(&m, 300, 99).unwrap();
            assert!(a.values.iter().zip(&b.values).all(|(x, y)| x.to_bits() == y.to_bits()));
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(
            simulate::<f64>(&ModelSpec::new(ModelKind::WhiteNoise), 8, 1),
            Err(Error::TooShort { .. })
        ));
        assert!(simulate::<f64>(&ModelSpec::ar3_delta(0.35), 100, 1).is_err());
        assert!(simulate::<f64>(&ModelSpec::ar3_delta(-0.1), 100, 1).is_err());
        assert!(true_covariance::<f64>(&ModelSpec::new(ModelKind::TvMa1), 5000).is_err());
    }

    #[test]
    fn white_noise_oracles() {
        let m = ModelSpec::new(ModelKind::WhiteNoise).with_sd(2.0);
        let g = true_covariance::<f64>(&m, 10).unwrap();
        assert_eq!(g, DMatrix::identity(10, 10) * 4.0);
        let o = true_precision::<f64>(&m, 10).unwrap();
        assert!((o - DMatrix::identity(10, 10) * 0.25).amax() < 1e-15);
    }

    #[test]
    fn tv_ma1_covariance_entries() {
        let n = 200;
        let g = true_covariance::<f64>(&ModelSpec::new(ModelKind::TvMa1), n).unwrap();
        for i in 2..=n {
            let a = 0.6 * (2.0 * PI * i as f64 / n as f64).cos();
            assert!((g[(i - 1, i - 1)] - (1.0 + a * a)).abs() < 1e-14);
            assert!((g[(i - 1, i - 2)] - a).abs() < 1e-14);
        }
        assert!((g[(n / 4 - 1, n / 4 - 1)] - 1.0).abs() < 1e-14);
        let o = true_precision::<f64>(&ModelSpec::new(ModelKind::TvMa1), n).unwrap();
        assert!(inverse_residual(&o, &g) < 1e-8);
    }

    #[test]
    fn stationary_ar1_precision_is_tridiagonal() {
        let n = 50;
        let o = true_precision::<f64>(&ModelSpec::new(ModelKind::StationaryAr1), n).unwrap();
        for i in 1..n - 1 {
            assert!((o[(i, i)] - 1.36).abs() < 1e-8, "diag {}", o[(i, i)]);
            assert!((o[(i, i + 1)] + 0.6).abs() < 1e-8);
            for j in (i + 2)..n {
                assert!(o[(i, j)].abs() < 1e-8);
            }
        }
    }

    #[test]
    fn assumption_constraint() {
        let p = AssumptionParams::new(20.0, 2, 0.3).unwrap();
        assert!((p.constraint_value() - 0.8).abs() < 1e-12);
        assert!(p.satisfies_constraint());
        let q = AssumptionParams::new(11.0, 3, 0.3).unwrap();
        assert!(!q.satisfies_constraint());
        assert!(AssumptionParams::new(9.0, 1, 0.1).is_err());
        assert_eq!(p.default_band(10_000), 3);
    }
}
