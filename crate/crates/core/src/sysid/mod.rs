//! Identification of the radiation and wave-excitation models from
//! frequency-domain hydrodynamic data.

mod era;
mod impulse;
mod pem;
mod pipeline;
mod report;
mod ss;

pub use era::{fit_state_space_era, limit_radius, reflect_unstable, MAX_RADIUS};
pub use impulse::{
    causalize, impulse_response_from_frd, ogilvie_frf, scan_shift, ImpulseResponse, KernelTransform,
};
pub use pem::{fitting_error, pem_refine, FitData, PemOptions};
pub use pipeline::{
    differentiate, fit_radiation_model, fit_radiation_model_with, fit_wave_force_model,
    fit_wave_force_model_with, wave_kernel, RadiationFitOptions, WaveFitOptions,
    MAX_NONCAUSAL_RATIO, PLANAR_DOFS,
};
pub use report::{markov_error, FitReport, ERROR_BAND};
pub use ss::{model_frf, StateSpaceModel};
