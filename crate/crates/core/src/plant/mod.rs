//! Nonlinear truth model of the floating turbine: rigid platform, rotor,
//! quasi-steady aerodynamics, truth hydrodynamic memory, catenary mooring
//! and the collective-pitch controller.

pub mod aero;
pub mod control;
pub mod equilibrium;
pub mod params;
pub mod sim;

pub use aero::{aero_loads, relative_wind, AeroLoads};
pub use control::{control_step, design_pitch_gains, generator_torque, ControllerState};
pub use equilibrium::{aero_platform_force, find_equilibrium, Equilibrium};
pub use params::{AeroSurface, ControllerParams, PlantParams, RotorParams};
pub use sim::{
    simulate_plant, simulate_plant_from, AppliedFault, PlantSimulator, PlantState, RunRecord,
    SimOptions, DEFAULT_NOISE, DT_INNER, DT_OUTPUT,
};
