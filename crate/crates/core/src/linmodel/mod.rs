//! Linear model of the floating turbine excited by waves: aerodynamic
//! sensitivities, block assembly and zero-order-hold discretization.

pub mod assemble;
pub mod gradients;
pub mod tracking;
pub mod zoh;

pub use assemble::{
    assemble_linear_model, mechanical_model, AssembledModel, BlockMap, INPUT_LABELS, N_MECH,
    OUTPUT_LABELS,
};
pub use gradients::{linearize_aero, AeroGradients, OperatingPoint, DEFAULT_REL_STEP};
pub use tracking::{nrmse, tracking_nrmse};
pub use zoh::discretize_zoh;
