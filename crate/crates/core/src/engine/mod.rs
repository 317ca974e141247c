//! Covariance engine for the generalized Whittle–Matérn field.

pub mod asymptotics;
pub mod params;
pub mod props;
pub mod representations;

pub use asymptotics::{
    appendix_constant_i, borderline_constant_a, cov_tail_asymptotic, cov_tail_leading, variogram_small_lag,
    SmallLagCase, TailSeries,
};
pub use params::ModelParams;
pub use props::{lass_amplitude, local_props, tangent_field_cov, LocalProps, Memory};
pub use representations::{
    cov_bochner, cov_closed_form_alpha1, cov_macdonald, covariance, covariance_with, spectral_density, variance,
    variogram, variogram_with, CovarianceTable,
};
