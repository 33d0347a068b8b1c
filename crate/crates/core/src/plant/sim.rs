//! Fixed-step nonlinear simulation of the floating turbine.

use std::io::Write;
use std::path::Path;

use nalgebra::{Matrix6, Vector6};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::aero::{aero_loads, relative_wind};
use super::control::{control_step, ControllerState};
use super::equilibrium::{aero_platform_force, Equilibrium};
use super::params::PlantParams;
use crate::error::{Error, Result};
use crate::hydro::WaveRealization;
use crate::io::sig;
use crate::mooring::{
    apply_mooring_fault_in_place, evaluate_mooring, healthy_states, FaultEvent, LineState,
};
use crate::sysid::StateSpaceModel;

/// Inner integration step [s].
pub const DT_INNER: f64 = 0.025;
/// Output and controller sample period [s].
pub const DT_OUTPUT: f64 = 0.1;
/// Default measurement-noise standard deviations: rotor speed (encoder,
/// 0.1% of rated), surge (RTK positioning), pitch (inclinometer, ~0.01 deg).
pub const DEFAULT_NOISE: [f64; 3] = [0.001, 0.01, 0.0002];

/// Dense continuous LTI block evaluated without allocation.
#[derive(Debug, Clone)]
struct Lti {
    n: usize,
    m: usize,
    p: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
    d: Vec<f64>,
}

impl Lti {
    fn new(s: &StateSpaceModel) -> Self {
        let rm = |m: &nalgebra::DMatrix<f64>| -> Vec<f64> {
            (0..m.nrows())
                .flat_map(|i| (0..m.ncols()).map(move |j| m[(i, j)]))
                .collect()
        };
        Self {
            n: s.order(),
            m: s.n_inputs(),
            p: s.n_outputs(),
            a: rm(&s.a),
            b: rm(&s.b),
            c: rm(&s.c),
            d: rm(&s.d),
        }
    }

    fn deriv(&self, x: &[f64], u: &[f64], dx: &mut [f64]) {
        for (i, dxi) in dx[..self.n].iter_mut().enumerate() {
            let ar = &self.a[i * self.n..(i + 1) * self.n];
            let br = &self.b[i * self.m..(i + 1) * self.m];
            *dxi = ar.iter().zip(x).map(|(a, x)| a * x).sum::<f64>()
                + br.iter().zip(u).map(|(b, u)| b * u).sum::<f64>();
        }
    }

    fn output(&self, x: &[f64], u: &[f64], y: &mut [f64]) {
        for (i, yi) in y[..self.p].iter_mut().enumerate() {
            let cr = &self.c[i * self.n..(i + 1) * self.n];
            let dr = &self.d[i * self.m..(i + 1) * self.m];
            *yi = cr.iter().zip(x).map(|(c, x)| c * x).sum::<f64>()
                + dr.iter().zip(u).map(|(d, u)| d * u).sum::<f64>();
        }
    }
}

/// Complete simulator state.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantState {
    pub xi: Vector6<f64>,
    pub xi_dot: Vector6<f64>,
    pub omega_rotor: f64,
    pub azimuth: f64,
    pub x_rad_truth: Vec<f64>,
    pub x_wave_truth: Vec<f64>,
    /// Applied blade pitch [rad]; follows the rate-limited command.
    pub pitch_actual: f64,
    pub ctrl: ControllerState,
    pub line_states: Vec<LineState>,
}

impl PlantState {
    /// State resting at `eq` with quiescent hydrodynamic memory.
    pub fn at_equilibrium(params: &PlantParams, eq: &Equilibrium) -> Self {
        Self {
            xi: eq.xi,
            xi_dot: Vector6::zeros(),
            omega_rotor: eq.omega,
            azimuth: 0.0,
            x_rad_truth: vec![0.0; params.rad_truth.order()],
            x_wave_truth: vec![0.0; params.wave_truth.order()],
            pitch_actual: eq.pitch,
            ctrl: ControllerState::at_operating_point(eq.pitch, eq.q_g),
            line_states: healthy_states(&params.lines),
        }
    }
}

/// A fault as it was applied during a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AppliedFault {
    pub event: FaultEvent,
    /// Sample time at which the fault took effect [s].
    pub applied_at: f64,
}

/// Sampled inputs, outputs and line tensions of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub dt_out: f64,
    pub t: Vec<f64>,
    /// Pitch [rad], wind [m/s], generator torque [N m], wave elevation [m].
    pub u: Vec<[f64; 4]>,
    /// Rotor speed [rad/s], surge [m], platform pitch [rad], with noise.
    pub y: Vec<[f64; 3]>,
    pub tensions: Vec<Vec<f64>>,
    /// Noise-free platform pose at each sample.
    pub xi: Vec<[f64; 6]>,
    pub fault_log: Vec<AppliedFault>,
    pub seed: u64,
}

impl RunRecord {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Earliest applied fault time, if any.
    pub fn fault_time(&self) -> Option<f64> {
        self.fault_log.iter().map(|f| f.applied_at).reduce(f64::min)
    }

    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        let n_lines = self.tensions.first().map_or(0, Vec::len);
        let mut header = String::from("t,theta,v,qg,eta,omega_rotor,surge,pitch_platform");
        for i in 0..n_lines {
            header.push_str(&format!(",T{}", i + 1));
        }
        writeln!(w, "{header}")?;
        for k in 0..self.len() {
            let mut row: Vec<String> = vec![sig(self.t[k], 9)];
            row.extend(self.u[k].iter().map(|v| sig(*v, 9)));
            row.extend(self.y[k].iter().map(|v| sig(*v, 9)));
            row.extend(self.tensions[k].iter().map(|v| sig(*v, 9)));
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_csv(&mut f)?;
        f.flush()?;
        Ok(())
    }
}

/// Run settings for [`simulate_plant`].
#[derive(Debug, Clone, PartialEq)]
pub struct SimOptions {
    pub v_wind: f64,
    pub duration: f64,
    pub dt_out: f64,
    pub dt_in: f64,
    pub faults: Vec<FaultEvent>,
    /// Output-noise standard deviation per measured channel.
    pub noise: [f64; 3],
    pub seed: u64,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            v_wind: 16.0,
            duration: 1600.0,
            dt_out: DT_OUTPUT,
            dt_in: DT_INNER,
            faults: Vec::new(),
            noise: DEFAULT_NOISE,
            seed: 7,
        }
    }
}

fn is_multiple(a: f64, b: f64) -> bool {
    let r = a / b;
    r >= 1.0 - 1e-9 && (r - r.round()).abs() < 1e-9
}

const N_MECH: usize = 14;

/// Stepping engine. Between samples the blade pitch, generator torque and
/// wind are held; the wave elevation is interpolated.
pub struct PlantSimulator<'a> {
    params: &'a PlantParams,
    wave: &'a WaveRealization,
    v_wind: f64,
    pub state: PlantState,
    pub t: f64,
    m_inv: Matrix6<f64>,
    rad: Lti,
    wave_sys: Lti,
    hints: Vec<Option<(f64, f64)>>,
    aero_clamped: bool,
    buf: Vec<f64>,
}

impl<'a> PlantSimulator<'a> {
    pub fn new(
        params: &'a PlantParams,
        wave: &'a WaveRealization,
        v_wind: f64,
        state: PlantState,
    ) -> Result<Self> {
        if state.line_states.len() != params.lines.len() {
            return Err(Error::Validation(
                "line states do not match the mooring layout".into(),
            ));
        }
        let m_inv = params
            .platform_mass()
            .try_inverse()
            .ok_or_else(|| Error::Config("platform mass matrix is singular".into()))?;
        let n = N_MECH + params.rad_truth.order() + params.wave_truth.order();
        Ok(Self {
            params,
            wave,
            v_wind,
            state,
            t: 0.0,
            m_inv,
            rad: Lti::new(&params.rad_truth),
            wave_sys: Lti::new(&params.wave_truth),
            hints: vec![None; params.lines.len()],
            aero_clamped: false,
            buf: vec![0.0; n],
        })
    }

    /// Whether the relative wind was clamped at any evaluation so far.
    pub fn aero_clamped(&self) -> bool {
        self.aero_clamped
    }

    fn pack(&self, out: &mut [f64]) {
        let s = &self.state;
        out[..6].copy_from_slice(s.xi.as_slice());
        out[6..12].copy_from_slice(s.xi_dot.as_slice());
        out[12] = s.omega_rotor;
        out[13] = s.azimuth;
        let nr = self.rad.n;
        out[N_MECH..N_MECH + nr].copy_from_slice(&s.x_rad_truth);
        out[N_MECH + nr..].copy_from_slice(&s.x_wave_truth);
    }

    fn unpack(&mut self, x: &[f64]) {
        let nr = self.rad.n;
        let s = &mut self.state;
        s.xi = Vector6::from_column_slice(&x[..6]);
        s.xi_dot = Vector6::from_column_slice(&x[6..12]);
        s.omega_rotor = x[12];
        s.azimuth = x[13];
        s.x_rad_truth.copy_from_slice(&x[N_MECH..N_MECH + nr]);
        s.x_wave_truth.copy_from_slice(&x[N_MECH + nr..]);
    }

    fn derivative(&mut self, t: f64, x: &[f64], dx: &mut [f64]) -> Result<()> {
        let p = self.params;
        let xi = Vector6::from_column_slice(&x[..6]);
        let xi_dot = Vector6::from_column_slice(&x[6..12]);
        let omega = x[12];
        let nr = self.rad.n;
        let eta = self.wave.at(t);

        let moor = evaluate_mooring(&xi, &p.lines, &self.state.line_states, Some(&self.hints))?;
        for (h, new) in self.hints.iter_mut().zip(&moor.hints) {
            if new.is_some() {
                *h = *new;
            }
        }
        let v_rel = relative_wind(self.v_wind, xi_dot[0], xi_dot[4], p.rotor.hub_height);
        let aero = aero_loads(v_rel, omega, self.state.pitch_actual, p);
        self.aero_clamped |= aero.clamped;

        let mut mu = [0.0; 6];
        self.rad
            .output(&x[N_MECH..N_MECH + nr], xi_dot.as_slice(), &mut mu);
        let mut fw = [0.0; 6];
        self.wave_sys.output(&x[N_MECH + nr..], &[eta], &mut fw);

        let force = -p.k_hydrostatic * xi - p.b_visc * xi_dot
            + p.static_force
            + moor.force
            + aero_platform_force(aero.thrust, p.rotor.hub_height)
            - Vector6::from_column_slice(&mu)
            + Vector6::from_column_slice(&fw);
        let acc = self.m_inv * force;

        dx[..6].copy_from_slice(xi_dot.as_slice());
        dx[6..12].copy_from_slice(acc.as_slice());
        dx[12] = (aero.q_aero - p.rotor.tau * self.state.ctrl.q_g) / p.rotor.drivetrain_inertia();
        dx[13] = omega;
        let (dr, dw) = dx[N_MECH..].split_at_mut(nr);
        self.rad
            .deriv(&x[N_MECH..N_MECH + nr], xi_dot.as_slice(), dr);
        self.wave_sys.deriv(&x[N_MECH + nr..], &[eta], dw);
        Ok(())
    }

    /// Advance by one classical fourth-order Runge-Kutta step of size `h`.
    pub fn rk4_step(&mut self, h: f64) -> Result<()> {
        let n = self.buf.len();
        let mut x0 = std::mem::take(&mut self.buf);
        self.pack(&mut x0);
        let (mut k1, mut k2, mut k3, mut k4) =
            (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        let mut tmp = vec![0.0; n];
        let t = self.t;
        self.derivative(t, &x0, &mut k1)?;
        for i in 0..n {
            tmp[i] = x0[i] + 0.5 * h * k1[i];
        }
        self.derivative(t + 0.5 * h, &tmp, &mut k2)?;
        for i in 0..n {
            tmp[i] = x0[i] + 0.5 * h * k2[i];
        }
        self.derivative(t + 0.5 * h, &tmp, &mut k3)?;
        for i in 0..n {
            tmp[i] = x0[i] + h * k3[i];
        }
        self.derivative(t + h, &tmp, &mut k4)?;
        for i in 0..n {
            tmp[i] = x0[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if tmp.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!(
                "non-finite plant state; last valid time {t:.3} s"
            )));
        }
        self.unpack(&tmp);
        self.buf = x0;
        self.t = t + h;
        Ok(())
    }

    /// Mooring tensions at the current pose.
    pub fn tensions(&mut self) -> Result<Vec<f64>> {
        let m = evaluate_mooring(
            &self.state.xi,
            &self.params.lines,
            &self.state.line_states,
            Some(&self.hints),
        )?;
        Ok(m.tensions)
    }

    /// Mechanical energy: kinetic, hydrostatic, static-load and rotor terms.
    /// Mooring potential is not included.
    pub fn mechanical_energy(&self) -> f64 {
        let p = self.params;
        let s = &self.state;
        let kin = 0.5 * s.xi_dot.dot(&(p.platform_mass() * s.xi_dot));
        let pot = 0.5 * s.xi.dot(&(p.k_hydrostatic * s.xi)) - p.static_force.dot(&s.xi);
        kin + pot + 0.5 * p.rotor.drivetrain_inertia() * s.omega_rotor.powi(2)
    }
}

/// Simulate from the operating point `eq` over `opts.duration`.
pub fn simulate_plant(
    params: &PlantParams,
    wave: &WaveRealization,
    eq: &Equilibrium,
    opts: &SimOptions,
) -> Result<RunRecord> {
    simulate_plant_from(params, wave, PlantState::at_equilibrium(params, eq), opts)
}

/// Simulate from an arbitrary initial state.
pub fn simulate_plant_from(
    params: &PlantParams,
    wave: &WaveRealization,
    init: PlantState,
    opts: &SimOptions,
) -> Result<RunRecord> {
    if !(opts.dt_out > 0.0 && opts.dt_in > 0.0 && opts.duration > 0.0) {
        return Err(Error::Config("duration and time steps must be > 0".into()));
    }
    if !is_multiple(opts.dt_out, opts.dt_in) {
        return Err(Error::Config(format!(
            "output step {} s is not a multiple of the inner step {} s",
            opts.dt_out, opts.dt_in
        )));
    }
    if !is_multiple(opts.dt_out, wave.dt) {
        return Err(Error::Config(format!(
            "output step {} s is not a multiple of the wave step {} s",
            opts.dt_out, wave.dt
        )));
    }
    if wave.duration() + 1e-9 < opts.duration {
        return Err(Error::Config(format!(
            "wave record covers {} s but the run needs {} s",
            wave.duration(),
            opts.duration
        )));
    }
    if opts.noise.iter().any(|s| !(*s >= 0.0)) {
        return Err(Error::Config(
            "noise standard deviations must be >= 0".into(),
        ));
    }
    for f in &opts.faults {
        f.validate(params.lines.len(), opts.duration)?;
    }
    let n_samples = (opts.duration / opts.dt_out + 1e-9).floor() as usize;
    let n_sub = (opts.dt_out / opts.dt_in).round() as usize;
    let h = opts.dt_out / n_sub as f64;

    let mut sim = PlantSimulator::new(params, wave, opts.v_wind, init)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut pending: Vec<FaultEvent> = opts.faults.clone();
    let mut rec = RunRecord {
        dt_out: opts.dt_out,
        t: Vec::with_capacity(n_samples),
        u: Vec::with_capacity(n_samples),
        y: Vec::with_capacity(n_samples),
        tensions: Vec::with_capacity(n_samples),
        xi: Vec::with_capacity(n_samples),
        fault_log: Vec::new(),
        seed: opts.seed,
    };
    for k in 0..n_samples {
        let t = k as f64 * opts.dt_out;
        sim.t = t;
        let mut i = 0;
        while i < pending.len() {
            if apply_mooring_fault_in_place(&mut sim.state.line_states, &pending[i], t + 1e-9)? {
                let event = pending.remove(i);
                rec.fault_log.push(AppliedFault {
                    event,
                    applied_at: t,
                });
            } else {
                i += 1;
            }
        }
        let s = &sim.state;
        let mut y = [s.omega_rotor, s.xi[0], s.xi[4]];
        for (yi, sd) in y.iter_mut().zip(opts.noise) {
            *yi += sd * normal.sample(&mut rng);
        }
        if params.controller.enabled {
            let (pitch, _, ctrl) = control_step(
                y[0],
                opts.dt_out,
                &s.ctrl,
                &params.controller,
                &params.rotor,
            );
            sim.state.ctrl = ctrl;
            sim.state.pitch_actual = pitch;
        }
        let tensions = sim.tensions()?;
        let s = &sim.state;
        rec.t.push(t);
        rec.u
            .push([s.pitch_actual, opts.v_wind, s.ctrl.q_g, wave.at(t)]);
        rec.y.push(y);
        rec.tensions.push(tensions);
        let mut pose = [0.0; 6];
        pose.copy_from_slice(s.xi.as_slice());
        rec.xi.push(pose);
        for _ in 0..n_sub {
            sim.rk4_step(h)?;
        }
    }
    Ok(rec)
}
