//! Quasi-static catenary mooring: per-line tension, the 6-DOF mooring load on
//! the platform, its linearized stiffness, and the two line fault types.

mod catenary;

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix3, Vector3, Vector6};

pub use catenary::{CatenarySolution, H_REL_TOL};

use crate::error::{Error, Result};

/// Reference water depth [m].
pub const WATER_DEPTH: f64 = 180.0;
pub const ANCHOR_RADIUS: f64 = 599.98;
pub const FAIRLEAD_RADIUS: f64 = 47.181;
/// Fairlead height above still water [m].
pub const FAIRLEAD_Z: f64 = 8.7;
pub const LINE_LENGTH: f64 = 707.0;
/// Chain mass per length in air [kg/m].
pub const LINE_MASS: f64 = 594.0;
/// Diameter of the equivalent cylinder that displaces the chain's water [m].
pub const LINE_EQUIV_DIAMETER: f64 = 0.18;
pub const LINE_EA: f64 = 2.55e9;
pub const RHO_WATER: f64 = 1025.0;
pub const GRAVITY: f64 = 9.81;

/// Submerged weight per length: chain mass minus displaced water, times g.
pub fn submerged_weight(mass_per_length: f64, equiv_diameter: f64) -> f64 {
    (mass_per_length - RHO_WATER * PI * (0.5 * equiv_diameter).powi(2)) * GRAVITY
}

#[derive(Debug, Clone, PartialEq)]
pub struct MooringLineParams {
    /// Anchor position in the earth frame [m] (z up, still water level at 0).
    pub anchor: Vector3<f64>,
    /// Fairlead position in the platform frame [m].
    pub fairlead_body: Vector3<f64>,
    pub length_unstretched: f64,
    /// Submerged weight per unit length [N/m].
    pub weight_submerged: f64,
    /// Axial stiffness [N].
    pub ea: f64,
    pub water_depth: f64,
}

impl MooringLineParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.weight_submerged > 0.0) || !(self.ea > 0.0) {
            return Err(Error::Validation("line weight and EA must be > 0".into()));
        }
        let chord = (self.fairlead_body - self.anchor).norm();
        if !(self.length_unstretched > chord) {
            return Err(Error::Validation(format!(
                "line length {} m does not exceed the anchor-fairlead distance {chord:.3} m",
                self.length_unstretched
            )));
        }
        Ok(())
    }

    fn with_length(&self, length: f64) -> catenary::Line {
        catenary::Line {
            length,
            w: self.weight_submerged,
            ea: self.ea,
        }
    }
}

/// Compass heading of line `i` (0-based): line 1 points upwind along -x and
/// the others follow at 120 degree spacing.
pub fn line_heading(i: usize) -> f64 {
    PI + i as f64 * 2.0 * PI / 3.0
}

/// Geometry and line properties of a symmetric three-line spread.
#[derive(Debug, Clone, PartialEq)]
pub struct MooringLayout {
    pub water_depth: f64,
    pub anchor_radius: f64,
    pub fairlead_radius: f64,
    pub fairlead_z: f64,
    pub line_length: f64,
    pub mass_per_length: f64,
    pub equiv_diameter: f64,
    pub ea: f64,
}

impl Default for MooringLayout {
    fn default() -> Self {
        Self {
            water_depth: WATER_DEPTH,
            anchor_radius: ANCHOR_RADIUS,
            fairlead_radius: FAIRLEAD_RADIUS,
            fairlead_z: FAIRLEAD_Z,
            line_length: LINE_LENGTH,
            mass_per_length: LINE_MASS,
            equiv_diameter: LINE_EQUIV_DIAMETER,
            ea: LINE_EA,
        }
    }
}

impl MooringLayout {
    pub fn lines(&self) -> Result<Vec<MooringLineParams>> {
        let w = submerged_weight(self.mass_per_length, self.equiv_diameter);
        let lines: Vec<MooringLineParams> = (0..3)
            .map(|i| {
                let (s, c) = line_heading(i).sin_cos();
                MooringLineParams {
                    anchor: Vector3::new(
                        self.anchor_radius * c,
                        self.anchor_radius * s,
                        -self.water_depth,
                    ),
                    fairlead_body: Vector3::new(
                        self.fairlead_radius * c,
                        self.fairlead_radius * s,
                        self.fairlead_z,
                    ),
                    length_unstretched: self.line_length,
                    weight_submerged: w,
                    ea: self.ea,
                    water_depth: self.water_depth,
                }
            })
            .collect();
        for (i, l) in lines.iter().enumerate() {
            l.validate()
                .map_err(|e| Error::Config(format!("mooring line {}: {e}", i + 1)))?;
        }
        Ok(lines)
    }
}

/// The three-line layout of the reference platform.
pub fn reference_lines() -> Vec<MooringLineParams> {
    MooringLayout::default()
        .lines()
        .expect("reference layout is valid")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineMode {
    Healthy,
    FairleadReleased,
    AnchorSlipped,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineState {
    pub mode: LineMode,
    pub effective_length: f64,
    pub last_tension_fairlead: f64,
}

impl LineState {
    pub fn healthy(line: &MooringLineParams) -> Self {
        Self {
            mode: LineMode::Healthy,
            effective_length: line.length_unstretched,
            last_tension_fairlead: 0.0,
        }
    }
}

pub fn healthy_states(lines: &[MooringLineParams]) -> Vec<LineState> {
    lines.iter().map(LineState::healthy).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaultKind {
    FairleadRelease,
    AnchorSlip,
}

impl std::str::FromStr for FaultKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fairlead" | "fairlead_release" | "release" => Ok(Self::FairleadRelease),
            "anchor" | "anchor_slip" | "slip" => Ok(Self::AnchorSlip),
            other => Err(Error::Config(format!("unknown fault kind `{other}`"))),
        }
    }
}

impl std::fmt::Display for FaultKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::FairleadRelease => "fairlead_release",
            Self::AnchorSlip => "anchor_slip",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaultEvent {
    pub kind: FaultKind,
    /// 1-based line number.
    pub line_index: usize,
    pub time: f64,
    /// Zero for a release; the new effective unstretched length [m] for a slip.
    pub theta_x: f64,
}

impl FaultEvent {
    pub fn validate(&self, n_lines: usize, duration: f64) -> Result<()> {
        if self.line_index < 1 || self.line_index > n_lines {
            return Err(Error::Config(format!(
                "fault line {} outside 1..={n_lines}",
                self.line_index
            )));
        }
        if !(self.time >= 0.0 && self.time.is_finite()) {
            return Err(Error::Config(format!(
                "fault time {} must be >= 0",
                self.time
            )));
        }
        if self.time > duration {
            return Err(Error::Config(format!(
                "fault time {} s is beyond the run duration {duration} s",
                self.time
            )));
        }
        if self.kind == FaultKind::AnchorSlip && !(self.theta_x > 0.0) {
            return Err(Error::Config(
                "anchor slip needs a positive effective length".into(),
            ));
        }
        Ok(())
    }
}

/// Apply `event` when `t_now` has reached its time. Re-applying is harmless.
pub fn apply_mooring_fault(
    states: &[LineState],
    event: &FaultEvent,
    t_now: f64,
) -> Result<Vec<LineState>> {
    let mut out = states.to_vec();
    apply_mooring_fault_in_place(&mut out, event, t_now)?;
    Ok(out)
}

/// In-place variant of [`apply_mooring_fault`]; returns whether the event fired.
pub fn apply_mooring_fault_in_place(
    states: &mut [LineState],
    event: &FaultEvent,
    t_now: f64,
) -> Result<bool> {
    if event.line_index < 1 || event.line_index > states.len() {
        return Err(Error::Config(format!(
            "fault line {} does not exist",
            event.line_index
        )));
    }
    if t_now < event.time {
        return Ok(false);
    }
    let s = &mut states[event.line_index - 1];
    match event.kind {
        FaultKind::FairleadRelease => s.mode = LineMode::FairleadReleased,
        FaultKind::AnchorSlip => {
            s.mode = LineMode::AnchorSlipped;
            s.effective_length = event.theta_x;
        }
    }
    Ok(true)
}

/// Rotation from platform to earth frame for roll, pitch, yaw (z-y-x order).
pub fn rotation(roll: f64, pitch: f64, yaw: f64) -> Matrix3<f64> {
    let (sr, cr) = roll.sin_cos();
    let (sp, cp) = pitch.sin_cos();
    let (sy, cy) = yaw.sin_cos();
    Matrix3::new(
        cy * cp,
        cy * sp * sr - sy * cr,
        cy * sp * cr + sy * sr,
        sy * cp,
        sy * sp * sr + cy * cr,
        sy * sp * cr - cy * sr,
        -sp,
        cp * sr,
        cp * cr,
    )
}

/// Earth-frame fairlead position for platform pose `xi`.
pub fn fairlead_position(xi: &Vector6<f64>, line: &MooringLineParams) -> Vector3<f64> {
    let r = rotation(xi[3], xi[4], xi[5]);
    Vector3::new(xi[0], xi[1], xi[2]) + r * line.fairlead_body
}

/// Catenary solution for `line` with its fairlead at `fairlead_earth`.
pub fn solve_catenary(
    line: &MooringLineParams,
    fairlead_earth: &Vector3<f64>,
) -> Result<CatenarySolution> {
    solve_catenary_hinted(line, line.length_unstretched, fairlead_earth, None)
}

fn solve_catenary_hinted(
    line: &MooringLineParams,
    length: f64,
    fairlead_earth: &Vector3<f64>,
    hint: Option<(f64, f64)>,
) -> Result<CatenarySolution> {
    let d = fairlead_earth - line.anchor;
    catenary::solve_spans(line.with_length(length), d.x.hypot(d.y), d.z, hint)
}

/// Mooring load and per-line detail at one pose.
#[derive(Debug, Clone, PartialEq)]
pub struct MooringEval {
    /// Force [N] and moment about the platform reference point [N m].
    pub force: Vector6<f64>,
    /// Fairlead tension magnitude per line; zero for released lines.
    pub tensions: Vec<f64>,
    /// `(H, V)` per line for warm-starting the next solve.
    pub hints: Vec<Option<(f64, f64)>>,
}

/// Evaluate all lines at pose `xi`, optionally warm-started from `hints`.
pub fn evaluate_mooring(
    xi: &Vector6<f64>,
    lines: &[MooringLineParams],
    states: &[LineState],
    hints: Option<&[Option<(f64, f64)>]>,
) -> Result<MooringEval> {
    if lines.len() != states.len() {
        return Err(Error::Validation(
            "mooring lines and states differ in count".into(),
        ));
    }
    let r = rotation(xi[3], xi[4], xi[5]);
    let origin = Vector3::new(xi[0], xi[1], xi[2]);
    let mut force = Vector6::zeros();
    let mut tensions = vec![0.0; lines.len()];
    let mut out_hints = vec![None; lines.len()];
    for (i, (line, st)) in lines.iter().zip(states).enumerate() {
        if st.mode == LineMode::FairleadReleased {
            continue;
        }
        let arm = r * line.fairlead_body;
        let fair = origin + arm;
        let hint = hints.and_then(|h| h.get(i).copied().flatten());
        let sol = solve_catenary_hinted(line, st.effective_length, &fair, hint)
            .map_err(|e| Error::Numerical(format!("mooring line {}: {e}", i + 1)))?;
        let d = line.anchor - fair;
        let horiz = d.x.hypot(d.y);
        let (ex, ey) = if horiz > 0.0 {
            (d.x / horiz, d.y / horiz)
        } else {
            (0.0, 0.0)
        };
        let f = Vector3::new(sol.h * ex, sol.h * ey, -sol.v);
        let m = arm.cross(&f);
        force += Vector6::new(f.x, f.y, f.z, m.x, m.y, m.z);
        tensions[i] = sol.tension;
        out_hints[i] = Some((sol.h, sol.v));
    }
    Ok(MooringEval {
        force,
        tensions,
        hints: out_hints,
    })
}

/// Total mooring force/moment on the platform at pose `xi`.
pub fn mooring_force(
    xi: &Vector6<f64>,
    lines: &[MooringLineParams],
    states: &[LineState],
) -> Result<Vector6<f64>> {
    Ok(evaluate_mooring(xi, lines, states, None)?.force)
}

/// Central-difference stiffness `K` with `F(xi_eq + d) ~ F(xi_eq) - K d`.
/// A failed solve retries once with half the perturbation.
pub fn linearize_mooring_stiffness(
    lines: &[MooringLineParams],
    states: &[LineState],
    xi_eq: &Vector6<f64>,
    delta: f64,
) -> Result<DMatrix<f64>> {
    if !(delta > 0.0) {
        return Err(Error::Config(format!(
            "stiffness perturbation must be > 0, got {delta}"
        )));
    }
    let column = |j: usize, d: f64| -> Result<Vector6<f64>> {
        let mut plus = *xi_eq;
        let mut minus = *xi_eq;
        plus[j] += d;
        minus[j] -= d;
        let fp = mooring_force(&plus, lines, states)?;
        let fm = mooring_force(&minus, lines, states)?;
        Ok(-(fp - fm) / (2.0 * d))
    };
    let mut k = DMatrix::zeros(6, 6);
    for j in 0..6 {
        let col = column(j, delta).or_else(|_| column(j, 0.5 * delta))?;
        k.set_column(j, &col);
    }
    Ok(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;

    #[test]
    fn submerged_weight_from_mass() {
        let w = submerged_weight(594.0, 0.18);
        assert!((w - 5571.3).abs() < 1.0, "{w}");
    }

    #[test]
    fn layout_is_valid_and_slack() {
        for l in reference_lines() {
            l.validate().unwrap();
        }
    }

    #[test]
    fn all_released_gives_exact_zero() {
        let lines = reference_lines();
        let states: Vec<LineState> = lines
            .iter()
            .map(|l| LineState {
                mode: LineMode::FairleadReleased,
                ..LineState::healthy(l)
            })
            .collect();
        let f = mooring_force(
            &Vector6::new(3.0, -1.0, 0.5, 0.01, 0.02, 0.0),
            &lines,
            &states,
        )
        .unwrap();
        assert!(f.iter().all(|v| v.to_bits() == 0));
        let k = linearize_mooring_stiffness(&lines, &states, &Vector6::zeros(), 0.01).unwrap();
        assert!(k.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn design_pose_horizontal_balance() {
        let lines = reference_lines();
        let states = healthy_states(&lines);
        let f = mooring_force(&Vector6::zeros(), &lines, &states).unwrap();
        let h = solve_catenary(&lines[0], &fairlead_position(&Vector6::zeros(), &lines[0]))
            .unwrap()
            .h;
        assert!(f[0].abs() < 1e-6 * h && f[1].abs() < 1e-6 * h, "{f}");
        assert!(f[2] < 0.0);
    }

    #[test]
    fn surge_offset_restores() {
        let lines = reference_lines();
        let states = healthy_states(&lines);
        let f = mooring_force(
            &Vector6::new(10.0, 0.0, 0.0, 0.0, 0.0, 0.0),
            &lines,
            &states,
        )
        .unwrap();
        assert!(f[0] < 0.0);
    }

    #[test]
    fn stiffness_is_restoring_and_nearly_symmetric() {
        let lines = reference_lines();
        let states = healthy_states(&lines);
        let k = linearize_mooring_stiffness(&lines, &states, &Vector6::zeros(), 1e-3).unwrap();
        assert!(k[(0, 0)] > 0.0);
        assert!(
            linalg::relative_asymmetry(&k) <= 0.05,
            "{}",
            linalg::relative_asymmetry(&k)
        );
    }

    #[test]
    fn stiffer_lines_stiffen_surge() {
        let lines = reference_lines();
        let states = healthy_states(&lines);
        let pose = Vector6::new(25.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        let k1 = linearize_mooring_stiffness(&lines, &states, &pose, 1e-3).unwrap();
        let stiff: Vec<MooringLineParams> = lines
            .iter()
            .map(|l| MooringLineParams {
                ea: 2.0 * l.ea,
                ..l.clone()
            })
            .collect();
        let k2 = linearize_mooring_stiffness(&stiff, &states, &pose, 1e-3).unwrap();
        assert!(k2[(0, 0)] > k1[(0, 0)]);
    }

    #[test]
    fn faults_fire_once_and_are_idempotent() {
        let lines = reference_lines();
        let states = healthy_states(&lines);
        let ev = FaultEvent {
            kind: FaultKind::FairleadRelease,
            line_index: 1,
            time: 1500.0,
            theta_x: 0.0,
        };
        assert_eq!(apply_mooring_fault(&states, &ev, 1499.9).unwrap(), states);
        let s1 = apply_mooring_fault(&states, &ev, 1500.0).unwrap();
        assert_eq!(s1[0].mode, LineMode::FairleadReleased);
        assert_eq!(apply_mooring_fault(&s1, &ev, 1600.0).unwrap(), s1);
        let slip = FaultEvent {
            kind: FaultKind::AnchorSlip,
            line_index: 1,
            time: 1500.0,
            theta_x: 150.0,
        };
        let s2 = apply_mooring_fault(&states, &slip, 1500.0).unwrap();
        assert_eq!(s2[0].mode, LineMode::AnchorSlipped);
        assert_eq!(s2[0].effective_length, 150.0);
    }

    #[test]
    fn rotation_is_orthonormal() {
        let r = rotation(0.1, -0.2, 0.3);
        assert!((r * r.transpose() - Matrix3::identity()).norm() < 1e-14);
        // Positive pitch moves a point above the origin downwind (+x).
        let p = rotation(0.0, 0.1, 0.0) * Vector3::new(0.0, 0.0, 1.0);
        assert!(p.x > 0.0);
    }
}
