//! Steady operating point for a constant wind speed in calm water.

use nalgebra::{Matrix6, Vector6};

use super::aero::aero_loads;
use super::params::PlantParams;
use crate::error::{Error, Result};
use crate::mooring::{evaluate_mooring, healthy_states, linearize_mooring_stiffness};

/// Upper end of the pitch search [rad].
const PITCH_SEARCH_MAX: f64 = 0.7;
const MAX_ITER: usize = 100;
/// Required relative force-balance residual.
pub const EQUILIBRIUM_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Equilibrium {
    pub v_wind: f64,
    pub xi: Vector6<f64>,
    pub omega: f64,
    pub pitch: f64,
    pub q_g: f64,
    pub thrust: f64,
    pub tensions: Vec<f64>,
    /// Relative force residual reached by the solve.
    pub residual: f64,
}

/// Aerodynamic generalized force on the platform: thrust at hub height.
pub fn aero_platform_force(thrust: f64, hub_height: f64) -> Vector6<f64> {
    Vector6::new(thrust, 0.0, 0.0, 0.0, hub_height * thrust, 0.0)
}

/// Collective pitch at which the rotor delivers rated torque at rated speed.
fn rated_pitch(v_wind: f64, params: &PlantParams) -> Result<f64> {
    let omega = params.rotor.rated_speed;
    let target = params.rotor.rated_power / omega;
    let g = |p: f64| aero_loads(v_wind, omega, p, params).q_aero - target;
    let (mut lo, mut hi) = (
        params.controller.pitch_min,
        PITCH_SEARCH_MAX.min(params.controller.pitch_max),
    );
    if g(lo) < 0.0 {
        return Err(Error::Domain(format!(
            "wind speed {v_wind} m/s is below rated: the rotor cannot reach rated torque"
        )));
    }
    if g(hi) > 0.0 {
        return Err(Error::Numerical(format!(
            "no rated pitch below {hi} rad at {v_wind} m/s"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Operating point at wind speed `v_wind` with calm water and healthy lines.
///
/// Zero wind gives a feathered, unloaded rotor held at rated speed by
/// convention. Otherwise the pitch is chosen so the rotor delivers rated
/// torque, and the platform pose balances thrust against hydrostatic and
/// mooring restoring.
pub fn find_equilibrium(v_wind: f64, params: &PlantParams) -> Result<Equilibrium> {
    if !(v_wind >= 0.0 && v_wind.is_finite()) {
        return Err(Error::Domain(format!(
            "wind speed must be finite and >= 0, got {v_wind}"
        )));
    }
    let omega = params.rotor.rated_speed;
    let (pitch, q_g, thrust) = if v_wind == 0.0 {
        (params.controller.pitch_max, 0.0, 0.0)
    } else {
        let pitch = rated_pitch(v_wind, params)?;
        let thrust = aero_loads(v_wind, omega, pitch, params).thrust;
        (pitch, params.rotor.rated_generator_torque(), thrust)
    };
    let f_aero = aero_platform_force(thrust, params.rotor.hub_height);
    let states = healthy_states(&params.lines);
    let scale = f_aero.norm().max(params.static_force.norm()).max(1.0);
    let residual = |xi: &Vector6<f64>| -> Result<(Vector6<f64>, Vec<f64>)> {
        let m = evaluate_mooring(xi, &params.lines, &states, None)?;
        Ok((
            -params.k_hydrostatic * xi + m.force + params.static_force + f_aero,
            m.tensions,
        ))
    };
    let mut xi = Vector6::zeros();
    let (mut r, mut tensions) = residual(&xi)?;
    let mut rel = r.norm() / scale;
    let mut iter = 0;
    while rel > 1e-12 && iter < MAX_ITER {
        let k_moor = linearize_mooring_stiffness(&params.lines, &states, &xi, 1e-4)?;
        let jac = params.k_hydrostatic + Matrix6::from_iterator(k_moor.iter().copied());
        let dx = jac.lu().solve(&r).ok_or_else(|| {
            Error::Numerical("singular restoring stiffness during equilibrium solve".into())
        })?;
        // Damped Newton: halve the step until the residual drops.
        let mut step = 1.0;
        loop {
            let trial = xi + dx * step;
            if let Ok((rt, tt)) = residual(&trial) {
                if rt.norm() < r.norm() || step < 1e-3 {
                    xi = trial;
                    r = rt;
                    tensions = tt;
                    break;
                }
            }
            step *= 0.5;
            if step < 1e-4 {
                return Err(Error::Numerical(format!(
                    "equilibrium line search failed at iteration {iter}, residual {rel:.3e}"
                )));
            }
        }
        let new_rel = r.norm() / scale;
        iter += 1;
        if new_rel >= rel && new_rel <= EQUILIBRIUM_TOL {
            rel = new_rel;
            break;
        }
        rel = new_rel;
    }
    if rel > EQUILIBRIUM_TOL {
        return Err(Error::Numerical(format!(
            "equilibrium did not converge in {MAX_ITER} iterations (relative residual {rel:.3e})"
        )));
    }
    Ok(Equilibrium {
        v_wind,
        xi,
        omega,
        pitch,
        q_g,
        thrust,
        tensions,
        residual: rel,
    })
}
