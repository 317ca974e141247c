//! Time-series pipeline: ingestion, seasonal adjustment, spectral and
//! variogram estimates, the extended four-parameter family and its
//! profiled-likelihood fit.

pub mod extended;
pub mod fit;
pub mod likelihood;
pub mod optim;
pub mod seasonal;
pub mod spectral;
pub mod wind;

pub use extended::{correlation_table, correlation_table_with, extended_cov, ExtendedParams, ShapeParams};
pub use fit::{default_starts, fit, Family, FitConfig, FitResult};
pub use likelihood::{
    nll_at, profile, profile_s2, profile_s2_from, reduced_nll, reduced_nll_from, reduced_nll_value, toeplitz_stats, Profile,
    ToeplitzStats,
};
pub use optim::{nelder_mead, Minimum, NelderMeadConfig};
pub use seasonal::{deseasonalize, SeasonalModel, VelocitySeries};
pub use spectral::{empirical_variogram, model_psd, periodogram, welch_psd, Psd, WelchConfig, WelchPsd};
pub use wind::{parse_single_column, parse_wind, DailySeries, Station, WindQuery};
