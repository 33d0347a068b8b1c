//! Platform, rotor and controller parameters for the reference 10 MW
//! three-column semi-submersible.

use nalgebra::{DMatrix, Matrix6, Vector6};

use crate::error::{Error, Result};
use crate::hydro::truth;
use crate::linalg;
use crate::mooring::{self, MooringLineParams, RHO_WATER};
use crate::sysid::StateSpaceModel;

pub const GRAVITY: f64 = 9.81;
pub const RHO_AIR: f64 = 1.225;

/// Displaced volume at the design draft [m^3].
pub const DISPLACEMENT: f64 = 29_497.7;
pub const DRAFT: f64 = 56.0;
pub const COLUMN_DIAMETER: f64 = 15.0;
/// Column axis distance from the tower center line [m].
pub const COLUMN_RADIUS: f64 = 26.0;
/// Assumed centre of gravity of the full system below SWL [m].
pub const CENTER_OF_GRAVITY_Z: f64 = -28.7;
/// Column drag coefficient and the velocity amplitude used to linearize it.
pub const COLUMN_DRAG_COEFF: f64 = 1.0;
pub const DRAG_REFERENCE_VELOCITY: f64 = 0.3;
/// Heave damping from the column bases [N s/m].
const HEAVE_DAMPING: f64 = 1.0e6;

#[derive(Debug, Clone, PartialEq)]
pub struct RotorParams {
    /// Rotor plus hub inertia [kg m^2].
    pub j_r: f64,
    /// Generator inertia on the high-speed shaft [kg m^2].
    pub j_g: f64,
    /// Gearbox ratio.
    pub tau: f64,
    pub radius: f64,
    pub hub_height: f64,
    pub rated_power: f64,
    /// Rated rotor speed [rad/s].
    pub rated_speed: f64,
}

impl RotorParams {
    /// Inertia seen by the low-speed shaft, `J_R + tau^2 J_G`.
    pub fn drivetrain_inertia(&self) -> f64 {
        self.j_r + self.tau * self.tau * self.j_g
    }

    /// Generator torque at rated power and rated speed [N m, high-speed side].
    pub fn rated_generator_torque(&self) -> f64 {
        self.rated_power / (self.tau * self.rated_speed)
    }
}

impl Default for RotorParams {
    fn default() -> Self {
        Self {
            j_r: 1.56e8,
            j_g: 1500.0,
            tau: 50.0,
            radius: 178.3 / 2.0,
            hub_height: 119.0,
            rated_power: 10.0e6,
            rated_speed: 9.6 * std::f64::consts::PI / 30.0,
        }
    }
}

/// Power and thrust coefficient surfaces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AeroSurface {
    /// Heier-type power coefficient with a `cos^2` feathering factor, torque
    /// coefficient `c_p / lambda` and thrust from actuator-disc momentum.
    Analytic,
    /// Coefficients independent of tip-speed ratio and pitch.
    Constant { c_q: f64, c_t: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControllerParams {
    /// Proportional gain [rad per rad/s].
    pub kp: f64,
    /// Integral gain [rad per rad].
    pub ki: f64,
    pub pitch_min: f64,
    pub pitch_max: f64,
    /// Pitch rate limit [rad/s].
    pub pitch_rate: f64,
    /// When false, pitch and generator torque are held at their initial values.
    pub enabled: bool,
}

impl Default for ControllerParams {
    fn default() -> Self {
        Self {
            kp: 0.6467,
            ki: 0.04214,
            pitch_min: 0.0,
            pitch_max: std::f64::consts::FRAC_PI_2,
            pitch_rate: 8f64.to_radians(),
            enabled: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PlantParams {
    /// Rigid-body inertia about the reference point at SWL.
    pub m_rb: Matrix6<f64>,
    pub k_hydrostatic: Matrix6<f64>,
    pub a_inf: Matrix6<f64>,
    /// Additional linear (viscous) damping.
    pub b_visc: Matrix6<f64>,
    /// Constant load balancing weight, buoyancy and the design mooring
    /// pretension, so the design pose is the calm-water equilibrium.
    pub static_force: Vector6<f64>,
    pub rotor: RotorParams,
    pub aero: AeroSurface,
    pub controller: ControllerParams,
    pub rho_air: f64,
    pub rho_water: f64,
    pub lines: Vec<MooringLineParams>,
    /// Truth radiation memory: platform velocity (6) to force (6), continuous.
    pub rad_truth: StateSpaceModel,
    /// Truth wave excitation: elevation to the 6 generalized forces, continuous.
    pub wave_truth: StateSpaceModel,
}

/// Waterplane second moment of the three columns about a horizontal axis.
fn waterplane_inertia() -> f64 {
    let r = COLUMN_DIAMETER / 2.0;
    let area = std::f64::consts::PI * r * r;
    let own = std::f64::consts::PI * r.powi(4) / 4.0;
    // Column axes at headings 180, 300, 60 deg: sum of squared lever arms.
    let lever2: f64 = (0..3)
        .map(|i| {
            let a = mooring::line_heading(i);
            (COLUMN_RADIUS * a.cos()).powi(2)
        })
        .sum();
    3.0 * own + area * lever2
}

/// Equivalent linear damping of quadratic drag on the three columns.
///
/// Per unit column length `0.5 rho C_d D (8 / 3 pi) U` for a harmonic
/// velocity of amplitude `U`; integrated over the draft for the horizontal
/// DOFs, with `z^2` for roll/pitch and the column lever arm for yaw.
fn linearized_column_drag() -> Matrix6<f64> {
    let c = 0.5 * RHO_WATER * COLUMN_DRAG_COEFF * COLUMN_DIAMETER * 8.0
        / (3.0 * std::f64::consts::PI)
        * DRAG_REFERENCE_VELOCITY;
    let lateral = 3.0 * c * DRAFT;
    let tilt = 3.0 * c * DRAFT.powi(3) / 3.0;
    let yaw = lateral * COLUMN_RADIUS * COLUMN_RADIUS;
    Matrix6::from_diagonal(&Vector6::new(
        lateral,
        lateral,
        HEAVE_DAMPING,
        tilt,
        tilt,
        yaw,
    ))
}

impl PlantParams {
    /// Reference platform with the reference mooring and the truth hydrodynamics.
    pub fn reference() -> Result<Self> {
        Self::with_lines(mooring::reference_lines(), RotorParams::default())
    }

    /// Reference hull with the given mooring lines and rotor. The platform
    /// mass is re-trimmed against the lines' vertical pretension.
    pub fn with_lines(lines: Vec<mooring::MooringLineParams>, rotor: RotorParams) -> Result<Self> {
        let f_moor =
            mooring::mooring_force(&Vector6::zeros(), &lines, &mooring::healthy_states(&lines))?;
        let buoyancy = RHO_WATER * GRAVITY * DISPLACEMENT;
        // Mass trimmed so buoyancy carries the weight plus the vertical pretension.
        let mass = (buoyancy + f_moor[2]) / GRAVITY;
        let zg = CENTER_OF_GRAVITY_Z;
        let (ixx, iyy, izz) = (4.7e10, 4.7e10, 2.0e10);
        let mut m_rb = Matrix6::zeros();
        for i in 0..3 {
            m_rb[(i, i)] = mass;
        }
        m_rb[(3, 3)] = ixx;
        m_rb[(4, 4)] = iyy;
        m_rb[(5, 5)] = izz;
        m_rb[(0, 4)] = mass * zg;
        m_rb[(4, 0)] = mass * zg;
        m_rb[(1, 3)] = -mass * zg;
        m_rb[(3, 1)] = -mass * zg;

        let r = COLUMN_DIAMETER / 2.0;
        let a_wp = 3.0 * std::f64::consts::PI * r * r;
        let z_b = -DRAFT / 2.0;
        let k_tilt =
            RHO_WATER * GRAVITY * (waterplane_inertia() + DISPLACEMENT * z_b) - mass * GRAVITY * zg;
        let mut k = Matrix6::zeros();
        k[(2, 2)] = RHO_WATER * GRAVITY * a_wp;
        k[(3, 3)] = k_tilt;
        k[(4, 4)] = k_tilt;

        let b_visc = linearized_column_drag();
        let a_inf = Matrix6::from_iterator(truth::default_a_inf().iter().copied());

        let params = Self {
            m_rb,
            k_hydrostatic: k,
            a_inf,
            b_visc,
            static_force: -f_moor,
            rotor,
            aero: AeroSurface::Analytic,
            controller: ControllerParams::default(),
            rho_air: RHO_AIR,
            rho_water: RHO_WATER,
            lines,
            rad_truth: truth::truth_radiation_model(),
            wave_truth: truth::truth_wave_model(),
        };
        params.validate()?;
        Ok(params)
    }

    /// Platform mass matrix including the infinite-frequency added mass.
    pub fn platform_mass(&self) -> Matrix6<f64> {
        self.m_rb + self.a_inf
    }

    /// Generalized 7x7 inertia: platform block and the drivetrain inertia.
    pub fn generalized_mass(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(7, 7);
        m.view_mut((0, 0), (6, 6)).copy_from(&self.platform_mass());
        m[(6, 6)] = self.rotor.drivetrain_inertia();
        m
    }

    pub fn validate(&self) -> Result<()> {
        let m = DMatrix::from_iterator(6, 6, self.m_rb.iter().copied());
        if linalg::relative_asymmetry(&m) > 1e-12 || m.clone().cholesky().is_none() {
            return Err(Error::Config(
                "rigid-body inertia must be symmetric positive definite".into(),
            ));
        }
        let k = DMatrix::from_iterator(6, 6, self.k_hydrostatic.iter().copied());
        if linalg::relative_asymmetry(&k) > 1e-12 {
            return Err(Error::Config(
                "hydrostatic stiffness must be symmetric".into(),
            ));
        }
        let sub = k.view((2, 2), (3, 3)).into_owned();
        if linalg::min_symmetric_eigenvalue(&sub) < 0.0 {
            return Err(Error::Config(
                "hydrostatic heave/roll/pitch block must be positive semidefinite".into(),
            ));
        }
        let r = &self.rotor;
        for (name, v) in [
            ("rotor inertia", r.j_r),
            ("gearbox ratio", r.tau),
            ("rotor radius", r.radius),
            ("rated power", r.rated_power),
            ("rated speed", r.rated_speed),
        ] {
            if !(v > 0.0) {
                return Err(Error::Config(format!("{name} must be > 0, got {v}")));
            }
        }
        if r.j_g < 0.0 {
            return Err(Error::Config("generator inertia must be >= 0".into()));
        }
        let c = &self.controller;
        if !(c.pitch_rate > 0.0 && c.pitch_min < c.pitch_max) {
            return Err(Error::Config("controller limits are inconsistent".into()));
        }
        if self.rad_truth.is_discrete() || self.wave_truth.is_discrete() {
            return Err(Error::Config(
                "truth hydrodynamic models must be continuous".into(),
            ));
        }
        if self.rad_truth.n_inputs() != 6 || self.rad_truth.n_outputs() != 6 {
            return Err(Error::Config(
                "truth radiation model must map 6 velocities to 6 forces".into(),
            ));
        }
        if self.wave_truth.n_inputs() != 1 || self.wave_truth.n_outputs() != 6 {
            return Err(Error::Config(
                "truth wave model must map elevation to 6 forces".into(),
            ));
        }
        for l in &self.lines {
            l.validate()?;
        }
        Ok(())
    }
}
