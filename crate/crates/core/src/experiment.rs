//! Configuration-driven Monte Carlo experiments with reproducible manifests.
//!
//! Replication `r` draws its sample from `substream_seed(derive_seed(seed, r), 0)`
//! and its null draws from `substream_seed(derive_seed(seed, r), 1)`. Seeds do not
//! depend on `n` or `δ`, so results across sample sizes are paired.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::cholfit::fit_interior;
use crate::lrcov::{bandwidth_cv, pilot_bandwidth};
use crate::precision::{estimate_precision, operator_norm_error};
use crate::procsim::{simulate, true_precision, ModelKind, ModelSpec, TimeSeriesSample, DENSE_ORACLE_MAX};
use crate::rng::{derive_seed, substream_seed};
use crate::sievebasis::{BasisFamily, BasisSet};
use crate::structtest::{rejects, run_test, TestKind, TestSpec, MIN_DRAWS};
use crate::tuning::{band_cap, two_step, TuningGrids};

/// Levels reported by size experiments.
pub const SIZE_LEVELS: [f64; 3] = [0.01, 0.05, 0.1];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Estimate,
    SizeH01,
    SizeH02,
    PowerCurve,
    Tuning,
}

/// Hypothesis tested by a power experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerTest {
    WhiteNoise,
    Banded,
}

/// Grids used when `(b, c, h)` are chosen per replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TuningSettings {
    #[serde(default)]
    pub b0: Option<usize>,
    #[serde(default = "default_grid_c")]
    pub grid_c: Vec<usize>,
    #[serde(default = "default_grid_h")]
    pub grid_h: Vec<f64>,
}

impl Default for TuningSettings {
    fn default() -> Self {
        Self { b0: None, grid_c: default_grid_c(), grid_h: default_grid_h() }
    }
}

fn default_grid_c() -> Vec<usize> {
    (2..=8).collect()
}

fn default_grid_h() -> Vec<f64> {
    (1..=8).map(|k| 0.05 * k as f64).collect()
}

fn default_draws() -> usize {
    1000
}

fn default_level() -> f64 {
    0.05
}

fn default_basis() -> BasisFamily {
    BasisFamily::Fourier
}

/// One experiment, read from TOML. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub model: ModelSpec,
    pub n_list: Vec<usize>,
    #[serde(default = "default_basis")]
    pub basis: BasisFamily,
    pub replications: usize,
    #[serde(rename = "B", default = "default_draws")]
    pub draws: usize,
    #[serde(default = "default_level")]
    pub level: f64,
    pub seed: u64,
    #[serde(default)]
    pub output_path: Option<String>,
    /// Fixed band order; chosen per replication when absent.
    #[serde(default)]
    pub b: Option<usize>,
    /// Fixed sieve size; chosen per replication when absent.
    #[serde(default)]
    pub c: Option<usize>,
    /// Fixed kernel bandwidth. When absent with fixed `(b, c)` it is chosen by
    /// bandwidth cross-validation over `tuning.grid_h` if `tuning` is given,
    /// and is the pilot `n^{-1/5}` otherwise.
    #[serde(default)]
    pub h: Option<f64>,
    #[serde(default)]
    pub k0: Option<usize>,
    #[serde(default)]
    pub test: Option<PowerTest>,
    #[serde(default)]
    pub delta_list: Option<Vec<f64>>,
    #[serde(default)]
    pub tuning: Option<TuningSettings>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        self.model.validate().map_err(|e| Error::Config(format!("model: {e}")))?;
        if self.n_list.is_empty() {
            return bad("n_list: must be non-empty".into());
        }
        if self.replications == 0 {
            return bad("replications: must be at least 1".into());
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return bad(format!("level: must lie in (0, 1), got {}", self.level));
        }
        if self.b.is_some() != self.c.is_some() {
            return bad("b, c: give both or neither".into());
        }
        if let Some(h) = self.h {
            if !(h > 0.0 && h <= 0.5) {
                return bad(format!("h: must lie in (0, 0.5], got {h}"));
            }
        }
        if let Some(t) = &self.tuning {
            if t.grid_c.is_empty() || t.grid_h.is_empty() {
                return bad("tuning: grids must be non-empty".into());
            }
        }
        if let Some(d) = &self.delta_list {
            if d.is_empty() {
                return bad("delta_list: must be non-empty".into());
            }
            if self.model.kind != ModelKind::TvAr3Delta {
                return bad("delta_list: only valid for model kind tv_ar3_delta".into());
            }
            for &delta in d {
                ModelSpec { delta, ..self.model }.validate().map_err(|e| Error::Config(format!("delta_list: {e}")))?;
            }
        }
        let tests = matches!(self.experiment, ExperimentKind::SizeH01 | ExperimentKind::SizeH02 | ExperimentKind::PowerCurve);
        if tests && self.draws < MIN_DRAWS {
            return bad(format!("B: must be at least {MIN_DRAWS}, got {}", self.draws));
        }
        match self.experiment {
            ExperimentKind::Estimate => {
                if let Some(&n) = self.n_list.iter().find(|&&n| n > DENSE_ORACLE_MAX) {
                    return bad(format!("n_list: {n} exceeds the dense oracle limit {DENSE_ORACLE_MAX}"));
                }
            }
            ExperimentKind::SizeH02 => {
                if self.k0.is_none() {
                    return bad("k0: required for size_h02".into());
                }
            }
            ExperimentKind::PowerCurve => match self.test {
                None => return bad("test: required for power_curve".into()),
                Some(PowerTest::Banded) if self.k0.is_none() => {
                    return bad("k0: required for a banded power curve".into())
                }
                _ => {}
            },
            ExperimentKind::Tuning | ExperimentKind::SizeH01 => {}
        }
        Ok(())
    }

    fn test_kind(&self) -> Option<TestKind> {
        match (self.experiment, self.test) {
            (ExperimentKind::SizeH01, _) | (ExperimentKind::PowerCurve, Some(PowerTest::WhiteNoise)) => {
                Some(TestKind::WhiteNoise)
            }
            (ExperimentKind::SizeH02, _) | (ExperimentKind::PowerCurve, Some(PowerTest::Banded)) => {
                self.k0.map(TestKind::Banded)
            }
            _ => None,
        }
    }

    fn deltas(&self) -> Vec<f64> {
        self.delta_list.clone().unwrap_or_else(|| vec![self.model.delta])
    }

    fn grids(&self, n: usize, seed: u64) -> TuningGrids {
        let t = self.tuning.clone().unwrap_or_default();
        TuningGrids {
            b0: t.b0.unwrap_or(8).min(band_cap(n)),
            grid_c: t.grid_c,
            grid_h: t.grid_h,
            level: self.level,
            draws: self.draws.max(MIN_DRAWS),
            seed,
        }
    }
}

/// Seed of the sample in replication `rep`.
pub fn sample_seed(seed: u64, rep: usize) -> u64 {
    substream_seed(derive_seed(seed, rep as u64), 0)
}

/// Seed of the null draws (or the band scan) in replication `rep`.
pub fn test_seed(seed: u64, rep: usize) -> u64 {
    substream_seed(derive_seed(seed, rep as u64), 1)
}

/// Tuning parameters used by one replication.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Chosen {
    pub b: usize,
    pub c: usize,
    pub h: f64,
}

/// Outcome of one replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Replicate {
    pub n: usize,
    pub delta: f64,
    pub rep: usize,
    pub seed: u64,
    pub chosen: Chosen,
    /// Operator-norm error (estimate) or p-value (size and power); zero for tuning.
    pub value: f64,
    /// Decision at each of [`SIZE_LEVELS`] followed by the configured level.
    pub rejects: Vec<bool>,
}

/// One output row. The column set is fixed per experiment kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "row", rename_all = "snake_case")]
pub enum Row {
    Estimate { model: String, basis: String, n: usize, replications: usize, mean_error: f64, sd_error: f64 },
    Size { model: String, basis: String, test: String, n: usize, replications: usize, level: f64, rate: f64 },
    Power { model: String, basis: String, test: String, n: usize, delta: f64, replications: usize, level: f64, power: f64 },
    Tuning { model: String, basis: String, n: usize, rep: usize, seed: u64, b: usize, c: usize, h: f64 },
}

impl Row {
    pub fn header(kind: ExperimentKind) -> &'static str {
        match kind {
            ExperimentKind::Estimate => "model,basis,n,replications,mean_error,sd_error",
            ExperimentKind::SizeH01 | ExperimentKind::SizeH02 => "model,basis,test,n,replications,level,rate",
            ExperimentKind::PowerCurve => "model,basis,test,n,delta,replications,level,power",
            ExperimentKind::Tuning => "model,basis,n,rep,seed,b,c,h",
        }
    }

    /// CSV record; floats use the shortest representation that round-trips.
    pub fn to_csv(&self) -> String {
        match self {
            Row::Estimate { model, basis, n, replications, mean_error, sd_error } => {
                format!("{model},{basis},{n},{replications},{mean_error:?},{sd_error:?}")
            }
            Row::Size { model, basis, test, n, replications, level, rate } => {
                format!("{model},{basis},{test},{n},{replications},{level:?},{rate:?}")
            }
            Row::Power { model, basis, test, n, delta, replications, level, power } => {
                format!("{model},{basis},{test},{n},{delta:?},{replications},{level:?},{power:?}")
            }
            Row::Tuning { model, basis, n, rep, seed, b, c, h } => format!("{model},{basis},{n},{rep},{seed},{b},{c},{h:?}"),
        }
    }
}

/// Rows of one experiment together with the replications behind them.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub rows: Vec<Row>,
    pub replicates: Vec<Replicate>,
}

impl ExperimentOutput {
    pub fn to_csv(&self, kind: ExperimentKind) -> String {
        let mut out = String::new();
        writeln!(out, "{}", Row::header(kind)).unwrap();
        for r in &self.rows {
            writeln!(out, "{}", r.to_csv()).unwrap();
        }
        out
    }
}

/// Git-style content hash: SHA-256 of `"blob <len>\0" + content`, hex encoded.
pub fn content_hash(content: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", content.len()).as_bytes());
    h.update(content);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Everything needed to regenerate any row of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub output_hash: String,
    pub seed: u64,
    pub replicate_seeds: Vec<u64>,
    pub rows: usize,
}

impl Manifest {
    pub fn new(cfg: &ExperimentConfig, output: &ExperimentOutput) -> Result<Self> {
        Ok(Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: cfg.clone(),
            config_hash: content_hash(cfg.to_toml()?.as_bytes()),
            output_hash: content_hash(output.to_csv(cfg.experiment).as_bytes()),
            seed: cfg.seed,
            replicate_seeds: (0..cfg.replications).map(|r| sample_seed(cfg.seed, r)).collect(),
            rows: output.rows.len(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("manifest serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = if v.len() > 1 { v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (mean, var.sqrt())
}

fn chosen_for(cfg: &ExperimentConfig, sample: &TimeSeriesSample<f64>, seed: u64) -> Result<Chosen> {
    let n = sample.n();
    let basis = BasisSet::new(cfg.basis, 1)?;
    match (cfg.b, cfg.c) {
        (Some(b), Some(c)) => {
            let h = match (cfg.h, &cfg.tuning) {
                (Some(h), _) => h,
                (None, Some(t)) => {
                    let fit = fit_interior(sample, b, &BasisSet::new(cfg.basis, c)?)?;
                    bandwidth_cv(sample, &fit, &t.grid_h)?.h
                }
                (None, None) => pilot_bandwidth(n),
            };
            Ok(Chosen { b, c, h })
        }
        _ => {
            let report = two_step(sample, &cfg.grids(n, seed), &basis)?;
            Ok(Chosen { b: report.chosen_b, c: report.chosen_c, h: cfg.h.unwrap_or(report.chosen_h) })
        }
    }
}

struct Cell<'a> {
    cfg: &'a ExperimentConfig,
    n: usize,
    delta: f64,
    truth: Option<DMatrix<f64>>,
}

impl Cell<'_> {
    fn model(&self) -> ModelSpec {
        ModelSpec { delta: self.delta, ..self.cfg.model }
    }

    fn replicate(&self, rep: usize) -> Result<Replicate> {
        let cfg = self.cfg;
        let seed = sample_seed(cfg.seed, rep);
        let tseed = test_seed(cfg.seed, rep);
        let sample = simulate::<f64>(&self.model(), self.n, seed)?;
        let mut out = Replicate { n: self.n, delta: self.delta, rep, seed, chosen: Chosen { b: 0, c: 0, h: 0.0 }, value: 0.0, rejects: Vec::new() };
        match cfg.experiment {
            ExperimentKind::Tuning => {
                let report = two_step(&sample, &cfg.grids(self.n, tseed), &BasisSet::new(cfg.basis, 1)?)?;
                out.chosen = Chosen { b: report.chosen_b, c: report.chosen_c, h: report.chosen_h };
            }
            ExperimentKind::Estimate => {
                out.chosen = chosen_for(cfg, &sample, tseed)?;
                let pf = estimate_precision(&sample, out.chosen.b, &BasisSet::new(cfg.basis, out.chosen.c)?)?;
                out.value = operator_norm_error(&pf.estimate, self.truth.as_ref().expect("oracle built"))?;
            }
            _ => {
                out.chosen = chosen_for(cfg, &sample, tseed)?;
                let kind = cfg.test_kind().expect("validated");
                let spec = TestSpec {
                    kind,
                    level: cfg.level,
                    b: out.chosen.b,
                    basis: BasisSet::new(cfg.basis, out.chosen.c)?,
                    h: out.chosen.h,
                    draws: cfg.draws,
                    seed: tseed,
                };
                let r = run_test(&sample, &spec)?;
                out.value = r.p_value;
                out.rejects = SIZE_LEVELS.iter().map(|&a| rejects(r.statistic, &r.null_draws, a)).collect();
                out.rejects.push(r.reject);
            }
        }
        Ok(out)
    }

    fn run(&self, reps: &[usize]) -> Result<Vec<Replicate>> {
        reps.par_iter().map(|&r| self.replicate(r)).collect()
    }

    fn rows(&self, reps: &[Replicate]) -> Vec<Row> {
        let cfg = self.cfg;
        let model = cfg.model.kind.name().to_string();
        let basis = cfg.basis.name().to_string();
        let count = reps.len();
        let rate = |i: usize| reps.iter().filter(|r| r.rejects[i]).count() as f64 / count as f64;
        let test = cfg.test_kind().map(|k| k.label()).unwrap_or_default();
        match cfg.experiment {
            ExperimentKind::Estimate => {
                let errors: Vec<f64> = reps.iter().map(|r| r.value).collect();
                let (mean_error, sd_error) = mean_sd(&errors);
                vec![Row::Estimate { model, basis, n: self.n, replications: count, mean_error, sd_error }]
            }
            ExperimentKind::SizeH01 | ExperimentKind::SizeH02 => SIZE_LEVELS
                .iter()
                .enumerate()
                .map(|(i, &level)| Row::Size {
                    model: model.clone(),
                    basis: basis.clone(),
                    test: test.clone(),
                    n: self.n,
                    replications: count,
                    level,
                    rate: rate(i),
                })
                .collect(),
            ExperimentKind::PowerCurve => vec![Row::Power {
                model,
                basis,
                test,
                n: self.n,
                delta: self.delta,
                replications: count,
                level: cfg.level,
                power: rate(SIZE_LEVELS.len()),
            }],
            ExperimentKind::Tuning => reps
                .iter()
                .map(|r| Row::Tuning {
                    model: model.clone(),
                    basis: basis.clone(),
                    n: self.n,
                    rep: r.rep,
                    seed: r.seed,
                    b: r.chosen.b,
                    c: r.chosen.c,
                    h: r.chosen.h,
                })
                .collect(),
        }
    }
}

fn cells(cfg: &ExperimentConfig) -> Result<Vec<Cell<'_>>> {
    let mut out = Vec::new();
    for &n in &cfg.n_list {
        for &delta in &cfg.deltas() {
            let truth = if cfg.experiment == ExperimentKind::Estimate {
                Some(true_precision::<f64>(&ModelSpec { delta, ..cfg.model }, n)?)
            } else {
                None
            };
            out.push(Cell { cfg, n, delta, truth });
        }
    }
    Ok(out)
}

/// Run every cell `(n, δ)` of the experiment; replications run in parallel and
/// are collected in replication order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let reps: Vec<usize> = (0..cfg.replications).collect();
    let mut out = ExperimentOutput { rows: Vec::new(), replicates: Vec::new() };
    for cell in cells(cfg)? {
        let r = cell.run(&reps)?;
        out.rows.extend(cell.rows(&r));
        out.replicates.extend(r);
    }
    Ok(out)
}

/// Regenerate row `index` of the experiment described by `manifest`.
pub fn rerun_row(manifest: &Manifest, index: usize) -> Result<Row> {
    let cfg = &manifest.config;
    cfg.validate()?;
    let reps: Vec<usize> = (0..cfg.replications).collect();
    let mut offset = 0;
    for cell in cells(cfg)? {
        let per_cell = match cfg.experiment {
            ExperimentKind::Estimate | ExperimentKind::PowerCurve => 1,
            ExperimentKind::SizeH01 | ExperimentKind::SizeH02 => SIZE_LEVELS.len(),
            ExperimentKind::Tuning => cfg.replications,
        };
        if index < offset + per_cell {
            let local = index - offset;
            return if cfg.experiment == ExperimentKind::Tuning {
                let r = cell.run(&[local])?;
                Ok(cell.rows(&r).remove(0))
            } else {
                Ok(cell.rows(&cell.run(&reps)?).remove(local))
            };
        }
        offset += per_cell;
    }
    Err(Error::InvalidArgument(format!("row {index} out of range ({offset} rows)")))
}

/// Per-replication values (errors or p-values) of a single cell.
pub fn replicate_values(cfg: &ExperimentConfig, n: usize) -> Result<Vec<f64>> {
    let one = ExperimentConfig { n_list: vec![n], delta_list: None, ..cfg.clone() };
    Ok(run_experiment(&one)?.replicates.into_iter().map(|r| r.value).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(text: &str) -> ExperimentConfig {
        ExperimentConfig::from_toml(text).unwrap()
    }

    const SIZE: &str = r#"
experiment = "size_h01"
n_list = [120]
replications = 4
B = 100
seed = 7
b = 2
c = 3
[model]
kind = "white_noise"
"#;

    #[test]
    fn unknown_keys_are_rejected() {
        let text = format!("{SIZE}\nreplicatons = 3\n");
        assert!(matches!(ExperimentConfig::from_toml(&text), Err(Error::Config(_))));
        let text = SIZE.replace("kind = \"white_noise\"", "kind = \"white_noise\"\nsd = 2.0");
        assert!(matches!(ExperimentConfig::from_toml(&text), Err(Error::Config(_))));
    }

    #[test]
    fn validation_names_the_field() {
        let err = ExperimentConfig::from_toml(&SIZE.replace("replications = 4", "replications = 0")).unwrap_err();
        assert!(err.to_string().contains("replications"));
        let err = ExperimentConfig::from_toml(&SIZE.replace("n_list = [120]", "n_list = []")).unwrap_err();
        assert!(err.to_string().contains("n_list"));
        let err = ExperimentConfig::from_toml(&SIZE.replace("size_h01", "size_h02")).unwrap_err();
        assert!(err.to_string().contains("k0"));
    }

    #[test]
    fn size_rows_have_fixed_columns() {
        let cfg = config(SIZE);
        let out = run_experiment(&cfg).unwrap();
        assert_eq!(out.rows.len(), 3);
        assert_eq!(out.replicates.len(), 4);
        let csv = out.to_csv(cfg.experiment);
        let cols = Row::header(cfg.experiment).split(',').count();
        assert!(csv.lines().all(|l| l.split(',').count() == cols));
    }

    #[test]
    fn rows_rerun_bit_identically() {
        let cfg = config(SIZE);
        let out = run_experiment(&cfg).unwrap();
        let m = Manifest::from_json(&Manifest::new(&cfg, &out).unwrap().to_json()).unwrap();
        for (i, row) in out.rows.iter().enumerate() {
            assert_eq!(rerun_row(&m, i).unwrap().to_csv(), row.to_csv());
        }
        assert!(rerun_row(&m, 3).is_err());
    }

    #[test]
    fn bandwidth_source_with_fixed_band() {
        let pilot = run_experiment(&config(SIZE)).unwrap();
        assert!(pilot.replicates.iter().all(|r| r.chosen.h == pilot_bandwidth(120)));
        let cv = run_experiment(&config(&format!("{SIZE}[tuning]\ngrid_h = [0.15, 0.35]\n"))).unwrap();
        assert!(cv.replicates.iter().all(|r| r.chosen.h == 0.15 || r.chosen.h == 0.35));
    }

    #[test]
    fn seeds_are_paired_across_n() {
        assert_eq!(sample_seed(5, 3), sample_seed(5, 3));
        assert_ne!(sample_seed(5, 3), test_seed(5, 3));
        assert_ne!(sample_seed(5, 3), sample_seed(5, 4));
    }

    #[test]
    fn content_hash_matches_git() {
        assert_eq!(content_hash(b""), "473a0f4c3be8a93681a267e3b1e9a7dcda1185436fe141f7749120a303721813");
    }

    #[test]
    fn estimate_rows() {
        let cfg = config(
            r#"
experiment = "estimate"
n_list = [100, 150]
replications = 3
seed = 1
b = 1
c = 3
[model]
kind = "tv_ar1"
"#,
        );
        let out = run_experiment(&cfg).unwrap();
        assert_eq!(out.rows.len(), 2);
        match &out.rows[0] {
            Row::Estimate { n, mean_error, sd_error, .. } => {
                assert_eq!(*n, 100);
                assert!(mean_error.is_finite() && *mean_error > 0.0 && *sd_error >= 0.0);
            }
            r => panic!("unexpected row {r:?}"),
        }
        assert_eq!(out.replicates[0].seed, out.replicates[3].seed);
    }

    #[test]
    fn power_curve_over_delta() {
        let cfg = config(
            r#"
experiment = "power_curve"
n_list = [150]
replications = 2
B = 100
seed = 3
b = 3
c = 2
h = 0.3
k0 = 2
test = "banded"
delta_list = [0.0, 0.2]
[model]
kind = "tv_ar3_delta"
"#,
        );
        let out = run_experiment(&cfg).unwrap();
        assert_eq!(out.rows.len(), 2);
        assert!(matches!(out.rows[1], Row::Power { delta, .. } if delta == 0.2));
    }
}
