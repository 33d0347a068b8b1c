//! Quasi-steady rotor aerodynamics from analytic coefficient surfaces.

use std::f64::consts::PI;

use super::params::{AeroSurface, PlantParams};

/// Below this relative wind speed the loads are evaluated at the clamp.
pub const MIN_RELATIVE_WIND: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AeroLoads {
    /// Aerodynamic torque on the low-speed shaft [N m].
    pub q_aero: f64,
    /// Rotor thrust along the wind [N].
    pub thrust: f64,
    /// Set when the relative wind had to be clamped.
    pub clamped: bool,
}

/// Power coefficient of the analytic surface; `pitch` in radians.
pub fn power_coefficient(lambda: f64, pitch: f64) -> f64 {
    let deg = pitch.to_degrees();
    let inv_li = 1.0 / (lambda + 0.08 * deg) - 0.035 / (deg.powi(3) + 1.0);
    let cp = 0.5176 * (116.0 * inv_li - 0.4 * deg - 5.0) * (-21.0 * inv_li).exp() + 0.0068 * lambda;
    cp * pitch.cos().powi(2)
}

/// Axial induction `a <= 1/3` solving `c_p = 4 a (1 - a)^2`.
fn induction(cp: f64) -> f64 {
    const CP_MAX: f64 = 16.0 / 27.0;
    if cp >= CP_MAX {
        return 1.0 / 3.0;
    }
    let mut a = cp / 4.0;
    for _ in 0..50 {
        let f = 4.0 * a * (1.0 - a).powi(2) - cp;
        let df = 4.0 * (1.0 - a) * (1.0 - 3.0 * a);
        let step = f / df;
        a = (a - step).min(1.0 / 3.0);
        if step.abs() < 1e-15 {
            break;
        }
    }
    a
}

/// Thrust coefficient consistent with the power coefficient by momentum theory.
pub fn thrust_coefficient(lambda: f64, pitch: f64) -> f64 {
    let a = induction(power_coefficient(lambda, pitch));
    4.0 * a * (1.0 - a)
}

/// `(c_q, c_t)` of `surface` at tip-speed ratio `lambda` and `pitch`.
pub fn coefficients(surface: &AeroSurface, lambda: f64, pitch: f64) -> (f64, f64) {
    match *surface {
        AeroSurface::Analytic => (
            power_coefficient(lambda, pitch) / lambda,
            thrust_coefficient(lambda, pitch),
        ),
        AeroSurface::Constant { c_q, c_t } => (c_q, c_t),
    }
}

/// Rotor torque and thrust for relative wind `v_rel` at the hub.
pub fn aero_loads(v_rel: f64, omega_rotor: f64, pitch: f64, params: &PlantParams) -> AeroLoads {
    let clamped = !(v_rel > MIN_RELATIVE_WIND);
    let v = if clamped { MIN_RELATIVE_WIND } else { v_rel };
    let r = params.rotor.radius;
    let lambda = omega_rotor * r / v;
    let (cq, ct) = coefficients(&params.aero, lambda, pitch);
    let dyn_area = 0.5 * params.rho_air * PI * r * r * v * v;
    AeroLoads {
        q_aero: dyn_area * r * cq,
        thrust: dyn_area * ct,
        clamped,
    }
}

/// Relative wind at the hub given platform surge and pitch rates.
pub fn relative_wind(v_wind: f64, surge_rate: f64, pitch_rate: f64, hub_height: f64) -> f64 {
    v_wind - surge_rate - hub_height * pitch_rate
}
