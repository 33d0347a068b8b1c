//! INI run configuration. Every key is optional; omitted keys keep the
//! reference value. Unknown sections and keys are rejected so typos surface.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ini::Ini;

use crate::detect::{BASELINE_WINDOW, DEFAULT_ALPHA, DEFAULT_HOLD};
use crate::error::{Error, Result};
use crate::hydro::truth::DOF_LABELS;
use crate::hydro::WaveSpec;
use crate::mooring::{FaultEvent, FaultKind, MooringLayout, LINE_LENGTH};
use crate::plant::{ControllerParams, RotorParams, DEFAULT_NOISE, DT_INNER, DT_OUTPUT};
use crate::sysid::PLANAR_DOFS;

/// Where the hydrodynamic coefficients come from.
#[derive(Debug, Clone, PartialEq)]
pub enum HydroSource {
    /// The shipped synthetic dataset.
    Synthetic,
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimSettings {
    pub duration: f64,
    pub dt: f64,
    pub dt_inner: f64,
    pub noise: [f64; 3],
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentSettings {
    pub radiation_order: usize,
    pub wave_order: usize,
    pub t_d: f64,
    pub dofs: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectorSettings {
    pub alpha: f64,
    pub hold: usize,
    pub baseline: (f64, f64),
    pub calibration_seed: u64,
    pub tune_tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gates {
    pub enabled: bool,
    /// Largest accepted detection delay [s].
    pub max_delay: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub wind_speed: f64,
    pub wave: WaveSpec,
    pub sim: SimSettings,
    pub hydro: HydroSource,
    pub ident: IdentSettings,
    pub mooring: MooringLayout,
    pub rotor: RotorParams,
    pub controller: ControllerParams,
    pub detector: DetectorSettings,
    /// Faults of load cases 0..=4; case 0 is the healthy run.
    pub scenarios: [Vec<FaultEvent>; 5],
    pub gates: Gates,
    pub out_dir: PathBuf,
}

/// Fault time of the reference scenarios [s].
pub const FAULT_TIME: f64 = 1500.0;

/// Reference load cases. Slip lengths are the design length plus the tabulated
/// anchor drag distance.
pub fn reference_scenarios() -> [Vec<FaultEvent>; 5] {
    let ev = |kind, line_index, theta_x| {
        vec![FaultEvent {
            kind,
            line_index,
            time: FAULT_TIME,
            theta_x,
        }]
    };
    [
        Vec::new(),
        ev(FaultKind::FairleadRelease, 1, 0.0),
        ev(FaultKind::AnchorSlip, 1, LINE_LENGTH + 150.0),
        ev(FaultKind::FairleadRelease, 2, 0.0),
        ev(FaultKind::AnchorSlip, 2, LINE_LENGTH + 250.0),
    ]
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            wind_speed: 16.0,
            wave: WaveSpec::default(),
            sim: SimSettings {
                duration: 1600.0,
                dt: DT_OUTPUT,
                dt_inner: DT_INNER,
                noise: DEFAULT_NOISE,
                seed: 1,
            },
            hydro: HydroSource::Synthetic,
            ident: IdentSettings {
                radiation_order: 6,
                wave_order: 8,
                t_d: 4.0,
                dofs: PLANAR_DOFS.to_vec(),
            },
            mooring: MooringLayout::default(),
            rotor: RotorParams::default(),
            controller: ControllerParams::default(),
            detector: DetectorSettings {
                alpha: DEFAULT_ALPHA,
                hold: DEFAULT_HOLD,
                baseline: BASELINE_WINDOW,
                calibration_seed: 101,
                tune_tol: 0.2,
            },
            scenarios: reference_scenarios(),
            gates: Gates {
                enabled: true,
                max_delay: 30.0,
            },
            out_dir: PathBuf::from("out"),
        }
    }
}

fn parse<T: FromStr>(section: &str, key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("[{section}] {key}: cannot parse `{value}`")))
}

fn parse_list<T: FromStr>(section: &str, key: &str, value: &str) -> Result<Vec<T>> {
    value.split(',').map(|v| parse(section, key, v)).collect()
}

fn parse_bool(section: &str, key: &str, value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(Error::Config(format!(
            "[{section}] {key}: expected a boolean, got `{value}`"
        ))),
    }
}

/// `kind,line,time,theta_x`, or `none`.
pub fn parse_fault(value: &str) -> Result<Option<FaultEvent>> {
    let v = value.trim();
    if v.eq_ignore_ascii_case("none") || v.is_empty() {
        return Ok(None);
    }
    let parts: Vec<&str> = v.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        return Err(Error::Config(format!(
            "fault `{v}`: expected kind,line,time,theta_x"
        )));
    }
    let kind: FaultKind = parts[0].parse()?;
    let line_index = parse("scenarios", "line", parts[1])?;
    let time = parse("scenarios", "time", parts[2])?;
    let theta_x = parse("scenarios", "theta_x", parts[3])?;
    Ok(Some(FaultEvent {
        kind,
        line_index,
        time,
        theta_x,
    }))
}

fn dof_index(name: &str) -> Result<usize> {
    DOF_LABELS
        .iter()
        .position(|d| *d == name.trim())
        .ok_or_else(|| Error::Config(format!("unknown DOF `{}`", name.trim())))
}

fn check(ok: bool, what: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Config(what.to_string()))
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_ini_str(&text, base)
    }

    /// Parse INI text; relative file paths resolve against `base`.
    pub fn from_ini_str(text: &str, base: &Path) -> Result<Self> {
        let ini = Ini::load_from_str_noescape(text)
            .map_err(|e| Error::Config(format!("config syntax: {e}")))?;
        let mut cfg = Self::default();
        for (section, props) in ini.iter() {
            let Some(section) = section else {
                if props.iter().next().is_some() {
                    return Err(Error::Config(
                        "config keys must sit inside a [section]".into(),
                    ));
                }
                continue;
            };
            let mut seen: HashMap<&str, usize> = HashMap::new();
            for (key, value) in props.iter() {
                *seen.entry(key).or_default() += 1;
                if seen[key] > 1 {
                    return Err(Error::Config(format!("[{section}] {key} given twice")));
                }
                cfg.set(section, key, value, base)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, section: &str, key: &str, v: &str, base: &Path) -> Result<()> {
        let s = section;
        match (section, key) {
            ("environment", "wind_speed") => self.wind_speed = parse(s, key, v)?,
            ("waves", "hs") => self.wave.hs = parse(s, key, v)?,
            ("waves", "tp") => self.wave.tp = parse(s, key, v)?,
            ("waves", "gamma") => self.wave.gamma = parse(s, key, v)?,
            ("waves", "omega_min") => self.wave.omega_min = parse(s, key, v)?,
            ("waves", "omega_max") => self.wave.omega_max = parse(s, key, v)?,
            ("waves", "n_omega") => self.wave.n_omega = parse(s, key, v)?,
            ("simulation", "duration") => self.sim.duration = parse(s, key, v)?,
            ("simulation", "dt") => self.sim.dt = parse(s, key, v)?,
            ("simulation", "dt_inner") => self.sim.dt_inner = parse(s, key, v)?,
            ("simulation", "seed") => self.sim.seed = parse(s, key, v)?,
            ("simulation", "noise") => {
                let n: Vec<f64> = parse_list(s, key, v)?;
                check(
                    n.len() == 3,
                    "[simulation] noise needs rotor, surge and pitch values",
                )?;
                self.sim.noise = [n[0], n[1], n[2]];
            }
            ("hydro", "source") => {
                self.hydro = match v.trim() {
                    "synthetic" => HydroSource::Synthetic,
                    path => HydroSource::File(base.join(path)),
                }
            }
            ("identification", "radiation_order") => self.ident.radiation_order = parse(s, key, v)?,
            ("identification", "wave_order") => self.ident.wave_order = parse(s, key, v)?,
            ("identification", "t_d") => self.ident.t_d = parse(s, key, v)?,
            ("identification", "dofs") => {
                self.ident.dofs = v.split(',').map(dof_index).collect::<Result<_>>()?;
            }
            ("mooring", "water_depth") => self.mooring.water_depth = parse(s, key, v)?,
            ("mooring", "anchor_radius") => self.mooring.anchor_radius = parse(s, key, v)?,
            ("mooring", "fairlead_radius") => self.mooring.fairlead_radius = parse(s, key, v)?,
            ("mooring", "fairlead_z") => self.mooring.fairlead_z = parse(s, key, v)?,
            ("mooring", "line_length") => self.mooring.line_length = parse(s, key, v)?,
            ("mooring", "mass_per_length") => self.mooring.mass_per_length = parse(s, key, v)?,
            ("mooring", "equiv_diameter") => self.mooring.equiv_diameter = parse(s, key, v)?,
            ("mooring", "ea") => self.mooring.ea = parse(s, key, v)?,
            ("turbine", "rated_power") => self.rotor.rated_power = parse(s, key, v)?,
            ("turbine", "rated_rotor_speed_rpm") => {
                self.rotor.rated_speed = parse::<f64>(s, key, v)? * std::f64::consts::PI / 30.0
            }
            ("turbine", "rotor_diameter") => self.rotor.radius = parse::<f64>(s, key, v)? / 2.0,
            ("turbine", "hub_height") => self.rotor.hub_height = parse(s, key, v)?,
            ("turbine", "rotor_inertia") => self.rotor.j_r = parse(s, key, v)?,
            ("turbine", "generator_inertia") => self.rotor.j_g = parse(s, key, v)?,
            ("turbine", "gearbox_ratio") => self.rotor.tau = parse(s, key, v)?,
            ("controller", "kp") => self.controller.kp = parse(s, key, v)?,
            ("controller", "ki") => self.controller.ki = parse(s, key, v)?,
            ("controller", "pitch_rate_deg") => {
                self.controller.pitch_rate = parse::<f64>(s, key, v)?.to_radians()
            }
            ("detector", "alpha") => self.detector.alpha = parse(s, key, v)?,
            ("detector", "hold") => self.detector.hold = parse(s, key, v)?,
            ("detector", "baseline") => {
                let b: Vec<f64> = parse_list(s, key, v)?;
                check(b.len() == 2, "[detector] baseline needs start,end")?;
                self.detector.baseline = (b[0], b[1]);
            }
            ("detector", "calibration_seed") => self.detector.calibration_seed = parse(s, key, v)?,
            ("detector", "tune_tol") => self.detector.tune_tol = parse(s, key, v)?,
            ("scenarios", case) if case.starts_with("case") => {
                let n: usize = parse(s, key, &case[4..])?;
                check((1..=4).contains(&n), "[scenarios] defines case1 .. case4")?;
                self.scenarios[n] = parse_fault(v)?.into_iter().collect();
            }
            ("gates", "enabled") => self.gates.enabled = parse_bool(s, key, v)?,
            ("gates", "max_delay") => self.gates.max_delay = parse(s, key, v)?,
            ("output", "dir") => self.out_dir = base.join(v.trim()),
            _ => {
                return Err(Error::Config(format!(
                    "unknown config key [{section}] {key}"
                )))
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        check(
            self.wind_speed > 0.0 && self.wind_speed <= 40.0,
            "wind_speed must lie in (0, 40] m/s",
        )?;
        self.wave.validate()?;
        let sim = &self.sim;
        check(sim.dt > 0.0 && sim.dt <= 1.0, "dt must lie in (0, 1] s")?;
        check(
            sim.dt_inner > 0.0 && sim.dt_inner <= sim.dt && {
                let r = sim.dt / sim.dt_inner;
                (r - r.round()).abs() < 1e-9
            },
            "dt_inner must divide dt",
        )?;
        check(
            sim.duration > 0.0 && sim.duration.is_finite(),
            "duration must be > 0",
        )?;
        check(
            sim.noise.iter().all(|n| *n > 0.0 && n.is_finite()),
            "noise levels must be > 0",
        )?;
        let id = &self.ident;
        check(
            id.radiation_order >= 1 && id.wave_order >= 1,
            "identification orders must be >= 1",
        )?;
        check(id.t_d >= 0.0, "t_d must be >= 0")?;
        check(!id.dofs.is_empty(), "identification needs at least one DOF")?;
        for (name, v) in [
            ("water_depth", self.mooring.water_depth),
            ("anchor_radius", self.mooring.anchor_radius),
            ("line_length", self.mooring.line_length),
            ("mass_per_length", self.mooring.mass_per_length),
            ("ea", self.mooring.ea),
        ] {
            check(
                v > 0.0 && v.is_finite(),
                &format!("[mooring] {name} must be > 0"),
            )?;
        }
        let r = &self.rotor;
        for v in [
            r.rated_power,
            r.rated_speed,
            r.radius,
            r.hub_height,
            r.j_r,
            r.j_g,
            r.tau,
        ] {
            check(v > 0.0 && v.is_finite(), "[turbine] values must be > 0")?;
        }
        let d = &self.detector;
        check(d.alpha > 1.0, "alpha must exceed 1")?;
        check(d.hold >= 1, "hold must be >= 1")?;
        check(
            d.baseline.0 >= 0.0 && d.baseline.1 > d.baseline.0,
            "baseline must be start < end",
        )?;
        check(d.tune_tol > 0.0, "tune_tol must be > 0")?;
        for faults in &self.scenarios {
            for f in faults {
                f.validate(3, f64::INFINITY)?;
            }
        }
        check(self.gates.max_delay > 0.0, "max_delay must be > 0")?;
        Ok(())
    }
}
