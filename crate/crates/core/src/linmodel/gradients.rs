//! Aerodynamic Taylor coefficients about an operating point.

use nalgebra::Vector6;

use crate::error::{Error, Result};
use crate::plant::{aero_loads, Equilibrium, PlantParams};

/// Default relative finite-difference step.
pub const DEFAULT_REL_STEP: f64 = 1e-4;

/// Partial derivatives of rotor torque and thrust.
#[derive(Debug, Clone, PartialEq)]
pub struct AeroGradients {
    pub dq_domega: f64,
    pub dq_dpitch: f64,
    pub dq_dv: f64,
    pub dt_domega: f64,
    pub dt_dpitch: f64,
    pub dt_dv: f64,
    pub flags: Vec<String>,
}

impl AeroGradients {
    pub fn zero() -> Self {
        Self {
            dq_domega: 0.0,
            dq_dpitch: 0.0,
            dq_dv: 0.0,
            dt_domega: 0.0,
            dt_dpitch: 0.0,
            dt_dv: 0.0,
            flags: Vec::new(),
        }
    }
}

/// Linearization point of the turbine.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatingPoint {
    pub v_wind: f64,
    pub xi_eq: Vector6<f64>,
    pub omega_eq: f64,
    pub pitch_eq: f64,
    pub q_g_eq: f64,
    pub grads: AeroGradients,
}

impl OperatingPoint {
    pub fn from_equilibrium(params: &PlantParams, eq: &Equilibrium, rel_step: f64) -> Result<Self> {
        Ok(Self {
            v_wind: eq.v_wind,
            xi_eq: eq.xi,
            omega_eq: eq.omega,
            pitch_eq: eq.pitch,
            q_g_eq: eq.q_g,
            grads: linearize_aero(params, eq.v_wind, eq.omega, eq.pitch, rel_step)?,
        })
    }

    /// Input vector `(pitch, wind, generator torque, elevation)` at the point.
    pub fn u_eq(&self) -> [f64; 4] {
        [self.pitch_eq, self.v_wind, self.q_g_eq, 0.0]
    }

    /// Output vector `(rotor speed, surge, pitch)` at the point.
    pub fn y_eq(&self) -> [f64; 3] {
        [self.omega_eq, self.xi_eq[0], self.xi_eq[4]]
    }
}

fn scale(x: f64) -> f64 {
    if x.abs() > 0.0 {
        x.abs()
    } else {
        1.0
    }
}

/// Central differences of the aerodynamic loads in rotor speed, pitch and
/// wind, each with step `rel_step` times the variable's magnitude.
pub fn linearize_aero(
    params: &PlantParams,
    v: f64,
    omega: f64,
    pitch: f64,
    rel_step: f64,
) -> Result<AeroGradients> {
    if !(rel_step > 0.0 && rel_step < 0.1) {
        return Err(Error::Config(format!(
            "relative step must be in (0, 0.1), got {rel_step}"
        )));
    }
    let load = |v: f64, o: f64, p: f64| {
        let l = aero_loads(v, o, p, params);
        (l.q_aero, l.thrust)
    };
    let diff = |f: &dyn Fn(f64) -> (f64, f64), x: f64| {
        let h = rel_step * scale(x);
        let (qp, tp) = f(x + h);
        let (qm, tm) = f(x - h);
        ((qp - qm) / (2.0 * h), (tp - tm) / (2.0 * h))
    };
    let (dq_domega, dt_domega) = diff(&|o| load(v, o, pitch), omega);
    let (dq_dpitch, dt_dpitch) = diff(&|p| load(v, omega, p), pitch);
    let (dq_dv, dt_dv) = diff(&|x| load(x, omega, pitch), v);
    let mut flags = Vec::new();
    if dq_dpitch >= 0.0 {
        flags.push("dq_dpitch_not_negative".to_string());
    }
    let g = AeroGradients {
        dq_domega,
        dq_dpitch,
        dq_dv,
        dt_domega,
        dt_dpitch,
        dt_dv,
        flags,
    };
    if [
        g.dq_domega,
        g.dq_dpitch,
        g.dq_dv,
        g.dt_domega,
        g.dt_dpitch,
        g.dt_dv,
    ]
    .iter()
    .any(|x| !x.is_finite())
    {
        return Err(Error::Numerical("non-finite aerodynamic gradient".into()));
    }
    Ok(g)
}
