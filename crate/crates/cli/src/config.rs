//! Configuration of the single-series verbs.

use serde::{Deserialize, Serialize};

use lsprec::experiment::TuningSettings;
use lsprec::procsim::ModelSpec;
use lsprec::sievebasis::BasisFamily;

fn default_basis() -> BasisFamily {
    BasisFamily::Fourier
}

fn default_level() -> f64 {
    0.05
}

fn default_draws() -> usize {
    1000
}

/// Which hypothesis `test` checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestChoice {
    WhiteNoise,
    Banded,
}

/// A series (read from `input` or simulated from `model`) and the settings of
/// `estimate`, `test` and `tune`. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesConfig {
    #[serde(default)]
    pub input: Option<String>,
    #[serde(default)]
    pub model: Option<ModelSpec>,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_basis")]
    pub basis: BasisFamily,
    #[serde(default)]
    pub b: Option<usize>,
    #[serde(default)]
    pub c: Option<usize>,
    #[serde(default)]
    pub h: Option<f64>,
    #[serde(default)]
    pub test: Option<TestChoice>,
    #[serde(default)]
    pub k0: Option<usize>,
    #[serde(default = "default_level")]
    pub level: f64,
    #[serde(rename = "B", default = "default_draws")]
    pub draws: usize,
    #[serde(default)]
    pub tuning: Option<TuningSettings>,
}

impl SeriesConfig {
    pub fn from_toml(text: &str) -> Result<Self, String> {
        let cfg: Self = toml::from_str(text).map_err(|e| e.to_string())?;
        match (&cfg.input, &cfg.model, cfg.n) {
            (Some(_), None, None) | (None, Some(_), Some(_)) => Ok(cfg),
            (Some(_), _, _) => Err("input: give either input or model with n, not both".into()),
            _ => Err("input: give a data file, or model together with n".into()),
        }
    }

    /// `(b, c)` for verbs that need both.
    pub fn band_and_size(&self) -> Result<(usize, usize), String> {
        match (self.b, self.c) {
            (Some(b), Some(c)) => Ok((b, c)),
            _ => Err("b, c: both are required".into()),
        }
    }
}
