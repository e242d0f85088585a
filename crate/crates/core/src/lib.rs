//! Estimation of large precision matrices of locally stationary time series
//! via sieve Cholesky regressions, with a bootstrap test for bandedness and
//! time-invariance of the Cholesky coefficients.

pub mod cholfit;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod lrcov;
pub mod precision;
pub mod procsim;
pub mod rng;
pub mod scalar;
pub mod sievebasis;
pub mod structtest;
pub mod tuning;
pub mod varfit;

pub use error::{Error, Result};
pub use scalar::Real;

/// Double-precision instantiations.
pub type Sample = procsim::TimeSeriesSample<f64>;
pub type Fit = cholfit::SieveFit<f64>;
pub type Precision = precision::PrecisionEstimate<f64>;
pub type SigmaL = lrcov::BlockBandedCov<f64>;

/// Single-precision instantiations.
pub type SampleF32 = procsim::TimeSeriesSample<f32>;
pub type FitF32 = cholfit::SieveFit<f32>;
pub type PrecisionF32 = precision::PrecisionEstimate<f32>;
pub type SigmaLF32 = lrcov::BlockBandedCov<f32>;
