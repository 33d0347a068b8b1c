//! Assembly of the wave-excited linear model around an operating point.
//!
//! The mechanical part (rotor speed, platform velocities and poses) is built
//! in continuous time, discretized by zero-order hold, and then composed in
//! discrete time with the identified radiation and wave-force models:
//!
//! ```text
//! x_m+ = Ad x_m + Bu (theta, v, Q_G) + Bf f,   f = -S_r mu + S_w F_w
//! x_r+ = A_r x_r + B_r E_v x_m,                mu  = C_r x_r + D_r E_v x_m
//! x_w+ = A_w x_w + B_w eta,                    F_w = C_w x_w
//! ```

use std::io::Write;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, Matrix6};

use super::gradients::OperatingPoint;
use super::zoh::discretize_zoh;
use crate::error::{Error, Result};
use crate::hydro::truth::DOF_LABELS;
use crate::plant::PlantParams;
use crate::sysid::StateSpaceModel;

/// Mechanical states: rotor speed, 6 velocities, 6 poses.
pub const N_MECH: usize = 13;
pub const INPUT_LABELS: [&str; 4] = ["theta", "v", "qg", "eta"];
pub const OUTPUT_LABELS: [&str; 3] = ["omega_rotor", "surge", "pitch_platform"];

/// Named contiguous ranges of the state, input and output vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockMap {
    /// `(name, first index, length)`.
    pub states: Vec<(String, usize, usize)>,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
}

impl BlockMap {
    pub fn range(&self, name: &str) -> Option<std::ops::Range<usize>> {
        self.states
            .iter()
            .find(|(n, _, _)| n == name)
            .map(|&(_, s, l)| s..s + l)
    }

    pub fn write<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "kind,name,start,len")?;
        for (name, s, l) in &self.states {
            writeln!(w, "state,{name},{s},{l}")?;
        }
        for (i, name) in self.inputs.iter().enumerate() {
            writeln!(w, "input,{name},{i},1")?;
        }
        for (i, name) in self.outputs.iter().enumerate() {
            writeln!(w, "output,{name},{i},1")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct AssembledModel {
    /// Continuous mechanical part: inputs `(theta, v, qg, f_1..f_6)`.
    pub ct: StateSpaceModel,
    /// Full discrete model: inputs `(theta, v, qg, eta)`, measured outputs.
    pub dt_model: StateSpaceModel,
    /// Output selector (rotor speed, surge, pitch).
    pub c_out: DMatrix<f64>,
    pub blocks: BlockMap,
    pub op: OperatingPoint,
    pub flags: Vec<String>,
}

impl AssembledModel {
    /// Sidecar path for the block map next to a saved model.
    pub fn block_map_path(path: &Path) -> PathBuf {
        let mut s = path.as_os_str().to_owned();
        s.push(".blocks");
        PathBuf::from(s)
    }

    /// Save the discrete model in the exchange format plus the block map.
    pub fn save(&self, path: &Path) -> Result<()> {
        self.dt_model.save(path)?;
        let mut f = std::io::BufWriter::new(std::fs::File::create(Self::block_map_path(path))?);
        self.blocks.write(&mut f)?;
        f.flush()?;
        Ok(())
    }

    /// Open-loop prediction of the absolute outputs for recorded absolute
    /// inputs, starting from the operating point.
    pub fn predict(&self, u: &[[f64; 4]]) -> Vec<[f64; 3]> {
        let u_eq = self.op.u_eq();
        let y_eq = self.op.y_eq();
        let m = &self.dt_model;
        let mut x = nalgebra::DVector::zeros(m.order());
        let mut out = Vec::with_capacity(u.len());
        for uk in u {
            let du = nalgebra::DVector::from_fn(4, |i, _| uk[i] - u_eq[i]);
            let y = &m.c * &x;
            out.push([y[0] + y_eq[0], y[1] + y_eq[1], y[2] + y_eq[2]]);
            x = &m.a * &x + &m.b * du;
        }
        out
    }
}

/// DOF index encoded in a `{dof}_...` channel label.
fn dof_of(label: &str) -> Result<usize> {
    let head = label.split('_').next().unwrap_or("");
    DOF_LABELS
        .iter()
        .position(|d| *d == head)
        .ok_or_else(|| Error::Config(format!("cannot map channel `{label}` to a platform DOF")))
}

/// Continuous mechanical model: states `[Omega, xi_dot, xi]`, inputs
/// `(theta, v, qg, f_1..f_6)`, outputs rotor speed, surge, pitch.
pub fn mechanical_model(
    op: &OperatingPoint,
    k_total: &Matrix6<f64>,
    params: &PlantParams,
) -> Result<StateSpaceModel> {
    let g = &op.grads;
    let j = params.rotor.drivetrain_inertia();
    if !(j > 0.0) {
        return Err(Error::Config("drivetrain inertia must be > 0".into()));
    }
    let m_inv = params
        .platform_mass()
        .try_inverse()
        .ok_or_else(|| Error::Config("generalized mass matrix is singular".into()))?;
    let h = params.rotor.hub_height;
    let e_t = nalgebra::Vector6::new(1.0, 0.0, 0.0, 0.0, h, 0.0);
    let mut a = DMatrix::zeros(N_MECH, N_MECH);
    let mut b = DMatrix::zeros(N_MECH, 9);
    a[(0, 0)] = g.dq_domega / j;
    for k in 0..6 {
        a[(0, 1 + k)] = -g.dq_dv * e_t[k] / j;
    }
    b[(0, 0)] = g.dq_dpitch / j;
    b[(0, 1)] = g.dq_dv / j;
    b[(0, 2)] = -params.rotor.tau / j;

    let minv_et = m_inv * e_t;
    let damp = m_inv * (params.b_visc + e_t * e_t.transpose() * g.dt_dv);
    let stiff = m_inv * k_total;
    for r in 0..6 {
        a[(1 + r, 0)] = minv_et[r] * g.dt_domega;
        for c in 0..6 {
            a[(1 + r, 1 + c)] = -damp[(r, c)];
            a[(1 + r, 7 + c)] = -stiff[(r, c)];
            b[(1 + r, 3 + c)] = m_inv[(r, c)];
        }
        b[(1 + r, 0)] = minv_et[r] * g.dt_dpitch;
        b[(1 + r, 1)] = minv_et[r] * g.dt_dv;
        a[(7 + r, 1 + r)] = 1.0;
    }
    let c = output_selector(N_MECH);
    let mut labels: Vec<String> = INPUT_LABELS[..3].iter().map(|s| s.to_string()).collect();
    labels.extend(DOF_LABELS.iter().map(|d| format!("{d}_force")));
    let mut m = StateSpaceModel::new(a, b, c, DMatrix::zeros(3, 9), 0.0)?;
    m.input_labels = labels;
    m.output_labels = OUTPUT_LABELS.iter().map(|s| s.to_string()).collect();
    Ok(m)
}

fn output_selector(n: usize) -> DMatrix<f64> {
    let mut c = DMatrix::zeros(3, n);
    c[(0, 0)] = 1.0;
    c[(1, 7)] = 1.0;
    c[(2, 7 + 4)] = 1.0;
    c
}

/// Delay any direct feedthrough by one sample so the model is strictly proper.
fn strictly_proper(w: &StateSpaceModel) -> (StateSpaceModel, bool) {
    if w.d.iter().all(|&v| v == 0.0) {
        return (w.clone(), false);
    }
    let (n, m, p) = (w.order(), w.n_inputs(), w.n_outputs());
    let mut a = DMatrix::zeros(n + m, n + m);
    a.view_mut((0, 0), (n, n)).copy_from(&w.a);
    let mut b = DMatrix::zeros(n + m, m);
    b.view_mut((0, 0), (n, m)).copy_from(&w.b);
    b.view_mut((n, 0), (m, m)).fill_with_identity();
    let mut c = DMatrix::zeros(p, n + m);
    c.view_mut((0, 0), (p, n)).copy_from(&w.c);
    c.view_mut((0, n), (p, m)).copy_from(&w.d);
    let mut out =
        StateSpaceModel::new(a, b, c, DMatrix::zeros(p, m), w.dt).expect("consistent dimensions");
    out.input_labels = w.input_labels.clone();
    out.output_labels = w.output_labels.clone();
    (out, true)
}

/// Assemble the discrete linear model at step `dt`.
///
/// `k_moor` and `k_hydro` are the restoring stiffnesses at the operating
/// point. The radiation model maps velocities to memory forces, the wave
/// model maps elevation to excitation forces; both must be discrete at `dt`
/// with `{dof}_...` channel labels. Either may be omitted.
pub fn assemble_linear_model(
    op: &OperatingPoint,
    k_moor: &DMatrix<f64>,
    k_hydro: &Matrix6<f64>,
    rad_model: Option<&StateSpaceModel>,
    wave_model: Option<&StateSpaceModel>,
    params: &PlantParams,
    dt: f64,
) -> Result<AssembledModel> {
    if k_moor.shape() != (6, 6) {
        return Err(Error::Validation("mooring stiffness must be 6x6".into()));
    }
    let k_total = k_hydro + Matrix6::from_iterator(k_moor.iter().copied());
    let ct = mechanical_model(op, &k_total, params)?;
    let mech = discretize_zoh(&ct, dt)?;
    let mut flags = Vec::new();
    for (name, m) in [("radiation", rad_model), ("wave", wave_model)] {
        if let Some(m) = m {
            if (m.dt - dt).abs() > 1e-12 {
                return Err(Error::Config(format!(
                    "{name} model step {} s differs from {dt} s",
                    m.dt
                )));
            }
        }
    }
    let rad = rad_model
        .cloned()
        .unwrap_or_else(|| StateSpaceModel::zero(0, 0, dt));
    let (wave, lagged) = match wave_model {
        Some(w) => strictly_proper(w),
        None => (StateSpaceModel::zero(1, 0, dt), false),
    };
    if lagged {
        flags.push("wave_feedthrough_lagged".to_string());
    }
    if wave.n_inputs() != 1 {
        return Err(Error::Config(
            "wave model must have the elevation as its only input".into(),
        ));
    }
    let rad_in: Vec<usize> = rad
        .input_labels
        .iter()
        .map(|l| dof_of(l))
        .collect::<Result<_>>()?;
    let rad_out: Vec<usize> = rad
        .output_labels
        .iter()
        .map(|l| dof_of(l))
        .collect::<Result<_>>()?;
    let wave_out: Vec<usize> = wave
        .output_labels
        .iter()
        .map(|l| dof_of(l))
        .collect::<Result<_>>()?;

    // Selectors: velocities feeding the radiation model, force placements.
    let mut e_v = DMatrix::zeros(rad_in.len(), N_MECH);
    for (i, &d) in rad_in.iter().enumerate() {
        e_v[(i, 1 + d)] = 1.0;
    }
    let mut s_r = DMatrix::zeros(6, rad_out.len());
    for (i, &d) in rad_out.iter().enumerate() {
        s_r[(d, i)] = 1.0;
    }
    let mut s_w = DMatrix::zeros(6, wave_out.len());
    for (i, &d) in wave_out.iter().enumerate() {
        s_w[(d, i)] = 1.0;
    }

    let (nr, nw) = (rad.order(), wave.order());
    let n = N_MECH + nr + nw;
    let bu = mech.b.columns(0, 3).into_owned();
    let bf = mech.b.columns(3, 6).into_owned();
    let bf_r = &bf * &s_r;
    let mut a = DMatrix::zeros(n, n);
    a.view_mut((0, 0), (N_MECH, N_MECH))
        .copy_from(&(&mech.a - &bf_r * &rad.d * &e_v));
    if nr > 0 {
        a.view_mut((0, N_MECH), (N_MECH, nr))
            .copy_from(&(-&bf_r * &rad.c));
        a.view_mut((N_MECH, 0), (nr, N_MECH))
            .copy_from(&(&rad.b * &e_v));
        a.view_mut((N_MECH, N_MECH), (nr, nr)).copy_from(&rad.a);
    }
    if nw > 0 {
        a.view_mut((0, N_MECH + nr), (N_MECH, nw))
            .copy_from(&(&bf * &s_w * &wave.c));
        a.view_mut((N_MECH + nr, N_MECH + nr), (nw, nw))
            .copy_from(&wave.a);
    }
    let mut b = DMatrix::zeros(n, 4);
    b.view_mut((0, 0), (N_MECH, 3)).copy_from(&bu);
    if nw > 0 {
        b.view_mut((N_MECH + nr, 3), (nw, 1)).copy_from(&wave.b);
    }
    let c_out = output_selector(n);
    let mut dt_model = StateSpaceModel::new(a, b, c_out.clone(), DMatrix::zeros(3, 4), dt)?;
    dt_model.input_labels = INPUT_LABELS.iter().map(|s| s.to_string()).collect();
    dt_model.output_labels = OUTPUT_LABELS.iter().map(|s| s.to_string()).collect();
    if !dt_model.is_stable()? {
        flags.push("unstable".to_string());
    }
    let blocks = BlockMap {
        states: vec![
            ("rotor_speed".into(), 0, 1),
            ("xi_dot".into(), 1, 6),
            ("xi".into(), 7, 6),
            ("radiation".into(), N_MECH, nr),
            ("wave".into(), N_MECH + nr, nw),
        ],
        inputs: dt_model.input_labels.clone(),
        outputs: dt_model.output_labels.clone(),
    };
    Ok(AssembledModel {
        ct,
        dt_model,
        c_out,
        blocks,
        op: op.clone(),
        flags,
    })
}
