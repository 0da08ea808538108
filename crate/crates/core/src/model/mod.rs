//! Semiclassical model: parameters, mean-field steady states, linearized
//! fluctuations and the scattered-light spectrum.

mod curves;
mod fluctuation;
mod params;
mod spectrum;
mod steady;

pub use curves::{deviation_curve, spectrum_surface, DeviationRow, SpectrumSurface, SurfacePoint, SurfaceRowError};
pub use fluctuation::{drift_eigenvalues, fluctuation_coeffs, stationary_moments, xi, FluctuationCoeffs, FluctuationMoments};
pub use params::{derive_params, DerivedParams, ModelParams};
pub use spectrum::{spectrum_at, Spectrum, SpectrumTable, SpectrumVariant};
pub use steady::{
    deformed_residual, mean_field_relax, solve_deformed_steady_state, solve_deformed_steady_state_with,
    undeformed_steady_state, SolverOptions, SteadyState,
};
