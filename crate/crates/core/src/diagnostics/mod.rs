//! Asymptotic and integral quantities of warped metrics along the flow.

mod decay;
mod integrals;
mod mass;
mod record;
mod residuals;
mod volume;

pub use decay::{decay_fit, decay_fit_window, DecayFit, MIN_FIT_SAMPLES, VALUE_FLOOR};
pub use integrals::{
    l1_scalar, l1_scalar_with, mtau_distance, mtau_norm, weighted_norm_of_difference, weighted_sobolev_norm, FitWindow,
    L1Scalar, MtauNorm, WeightedNorm, WeightedNormSpec, SCALAR_NOISE,
};
pub use mass::{
    adm_mass, adm_mass_flux, gauss_legendre, hawking_mass, hawking_profile, mass_ladder, mass_rate_flux,
    mass_rate_flux_of, richardson, sphere_flux_quadrature, MassEstimate, LADDER_BASE, LADDER_RUNGS,
};
pub use record::{
    DiagnosticsConfig, DiagnosticsRecord, DiagnosticsSeries, HeatConfig, HeatRecord, MassRateSample, Recorder,
    Residuals, WALL_NODES,
};
pub use residuals::{
    default_annulus, mass_density_decay, mass_density_profile, mass_density_residual, quadratic_derivative,
    rate_profile, total_scalar_rate_profile, total_scalar_rate_residual, total_scalar_sample, total_scalar_sample_on,
    TotalScalarSample, ANNULUS_INNER_NODE, ANNULUS_OUTER_FRACTION, MASS_DENSITY_REGIME,
};
pub use volume::{
    asymptotic_volume_ratio, volume_ball, volume_rate_profile, volume_rate_residual, volume_sample, VolumeRatio,
    VolumeSample,
};
