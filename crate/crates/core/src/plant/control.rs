//! Variable-speed, collective-pitch control for above-rated operation.

use super::params::{ControllerParams, RotorParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerState {
    /// Integral term of the PI law [rad].
    pub integrator: f64,
    /// Last pitch command [rad].
    pub pitch_cmd: f64,
    /// Last generator torque command [N m, high-speed side].
    pub q_g: f64,
    /// Operating-point pitch the PI law acts around [rad].
    pub pitch_op: f64,
}

impl ControllerState {
    /// Controller sitting at the operating point with zero integral.
    pub fn at_operating_point(pitch_op: f64, q_g: f64) -> Self {
        Self {
            integrator: 0.0,
            pitch_cmd: pitch_op,
            q_g,
            pitch_op,
        }
    }
}

/// Constant-power generator torque, capped at the rated torque.
pub fn generator_torque(omega_rotor: f64, rotor: &RotorParams) -> f64 {
    let rated = rotor.rated_generator_torque();
    if omega_rotor <= 0.0 {
        return rated;
    }
    (rotor.rated_power / (rotor.tau * omega_rotor)).min(rated)
}

/// One controller sample of period `dt` from the measured rotor speed.
/// Returns the new pitch command, generator torque and controller state.
pub fn control_step(
    omega_rotor: f64,
    dt: f64,
    state: &ControllerState,
    gains: &ControllerParams,
    rotor: &RotorParams,
) -> (f64, f64, ControllerState) {
    let e = omega_rotor - rotor.rated_speed;
    let mut integrator = state.integrator + gains.ki * e * dt;
    let mut raw = state.pitch_op + gains.kp * e + integrator;
    // Conditional integration: stop winding further into a saturated limit.
    if (raw > gains.pitch_max && e > 0.0) || (raw < gains.pitch_min && e < 0.0) {
        integrator = state.integrator;
        raw = state.pitch_op + gains.kp * e + integrator;
    }
    let target = raw.clamp(gains.pitch_min, gains.pitch_max);
    let max_step = gains.pitch_rate * dt;
    let pitch = state.pitch_cmd + (target - state.pitch_cmd).clamp(-max_step, max_step);
    let q_g = generator_torque(omega_rotor, rotor);
    (
        pitch,
        q_g,
        ControllerState {
            integrator,
            pitch_cmd: pitch,
            q_g,
            pitch_op: state.pitch_op,
        },
    )
}

/// PI gains placing the linearized rotor-speed loop at natural frequency
/// `omega_n` and damping `zeta`, given the aerodynamic torque sensitivities
/// to rotor speed and pitch at the operating point.
pub fn design_pitch_gains(
    rotor: &RotorParams,
    dq_domega: f64,
    dq_dpitch: f64,
    omega_n: f64,
    zeta: f64,
) -> (f64, f64) {
    let j = rotor.drivetrain_inertia();
    // Constant-power torque adds P / Omega^2 of negative damping.
    let gen_slope = rotor.rated_power / rotor.rated_speed.powi(2);
    let kp = -(2.0 * zeta * omega_n * j + dq_domega + gen_slope) / dq_dpitch;
    let ki = -omega_n * omega_n * j / dq_dpitch;
    (kp, ki)
}
