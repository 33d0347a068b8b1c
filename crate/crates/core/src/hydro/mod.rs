//! Wave environment and hydrodynamic coefficient data.

mod frd;
mod spectrum;
pub mod truth;

pub use frd::{default_dataset, default_omega_grid, generate_synthetic_hydro_dataset, HydroFrd};
pub use spectrum::{
    jonswap_spectrum, linspace, realize_wave_elevation, Jonswap, WaveRealization, WaveSpec, GRAVITY,
};
