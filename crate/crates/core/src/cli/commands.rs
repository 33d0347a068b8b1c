//! The command implementations. Each one is a short composition of library
//! calls; the binary only parses arguments and maps errors to exit codes.

use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::{HydroSource, RunConfig};
use crate::detect::{
    calibrate_detector, run_detection, CalibrationOptions, DetectionReport, DetectorModel,
};
use crate::error::{Error, Result};
use crate::hydro::{default_dataset, realize_wave_elevation, HydroFrd, WaveRealization, WaveSpec};
use crate::io::sig;
use crate::linmodel::{
    assemble_linear_model, tracking_nrmse, AssembledModel, OperatingPoint, DEFAULT_REL_STEP,
};
use crate::mooring::{healthy_states, linearize_mooring_stiffness, FaultEvent};
use crate::plant::{
    find_equilibrium, simulate_plant, Equilibrium, PlantParams, RunRecord, SimOptions,
};
use crate::sysid::{
    fit_radiation_model_with, fit_wave_force_model_with, FitReport, RadiationFitOptions,
    StateSpaceModel, WaveFitOptions,
};

pub const RADIATION_MODEL: &str = "radiation_model.csv";
pub const WAVE_MODEL: &str = "wave_model.csv";
pub const LINEAR_MODEL: &str = "linear_model.csv";
pub const CALIBRATION: &str = "calibration.csv";
pub const SUMMARY: &str = "summary.csv";

/// Perturbation for the mooring stiffness [m or rad].
const STIFFNESS_STEP: f64 = 1e-3;

/// Noise stream seed derived from a run seed, so wave phases and sensor
/// noise never share a stream.
pub fn noise_seed(seed: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(0x2545_F491)
}

fn create(path: &Path) -> Result<std::io::BufWriter<std::fs::File>> {
    Ok(std::io::BufWriter::new(std::fs::File::create(path)?))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| {
        Error::Config(format!(
            "cannot create output directory {}: {e}",
            dir.display()
        ))
    })
}

pub fn plant_params(cfg: &RunConfig) -> Result<PlantParams> {
    let mut p = PlantParams::with_lines(cfg.mooring.lines()?, cfg.rotor.clone())?;
    p.controller = cfg.controller.clone();
    Ok(p)
}

pub fn load_hydro(cfg: &RunConfig) -> Result<HydroFrd> {
    match &cfg.hydro {
        HydroSource::Synthetic => Ok(default_dataset()),
        HydroSource::File(path) if !path.exists() => Err(Error::Config(format!(
            "hydro dataset {} not found; set [hydro] source = synthetic or create it with frd-synth",
            path.display()
        ))),
        HydroSource::File(path) => HydroFrd::load(path),
    }
}

pub fn wave_for(cfg: &RunConfig, seed: u64) -> Result<WaveRealization> {
    let spec = WaveSpec {
        seed,
        ..cfg.wave.clone()
    };
    realize_wave_elevation(&spec, cfg.sim.dt, cfg.sim.duration)
}

/// One truth run from the operating point.
pub fn simulate_case(
    cfg: &RunConfig,
    params: &PlantParams,
    eq: &Equilibrium,
    faults: &[FaultEvent],
    seed: u64,
    noise: [f64; 3],
) -> Result<RunRecord> {
    let wave = wave_for(cfg, seed)?;
    let opts = SimOptions {
        v_wind: cfg.wind_speed,
        duration: cfg.sim.duration,
        dt_out: cfg.sim.dt,
        dt_in: cfg.sim.dt_inner,
        faults: faults.to_vec(),
        noise,
        seed: noise_seed(seed),
    };
    simulate_plant(params, &wave, eq, &opts)
}

/// Linearize at `eq` and assemble with the identified hydrodynamic models.
pub fn build_linear_model(
    cfg: &RunConfig,
    params: &PlantParams,
    eq: &Equilibrium,
    radiation: &StateSpaceModel,
    wave: &StateSpaceModel,
) -> Result<AssembledModel> {
    let op = OperatingPoint::from_equilibrium(params, eq, DEFAULT_REL_STEP)?;
    let k_moor = linearize_mooring_stiffness(
        &params.lines,
        &healthy_states(&params.lines),
        &eq.xi,
        STIFFNESS_STEP,
    )?;
    assemble_linear_model(
        &op,
        &k_moor,
        &params.k_hydrostatic,
        Some(radiation),
        Some(wave),
        params,
        cfg.sim.dt,
    )
}

#[derive(Debug, Clone)]
pub struct IdentifyOutcome {
    pub radiation: FitReport,
    pub wave: FitReport,
    pub model: AssembledModel,
    pub files: Vec<PathBuf>,
}

/// Fit the radiation and wave-force models, assemble the linear model and
/// write all three with a fit report.
pub fn cmd_identify(cfg: &RunConfig) -> Result<IdentifyOutcome> {
    let frd = load_hydro(cfg)?;
    let rad_opts = RadiationFitOptions {
        order: cfg.ident.radiation_order,
        dofs: cfg.ident.dofs.clone(),
        dt: cfg.sim.dt,
        ..RadiationFitOptions::default()
    };
    let (rad, rad_report) = fit_radiation_model_with(&frd, &rad_opts)
        .map_err(|e| stage_error("radiation identification", e))?;
    let wave_opts = WaveFitOptions {
        order: cfg.ident.wave_order,
        t_d: cfg.ident.t_d,
        dofs: cfg.ident.dofs.clone(),
        dt: cfg.sim.dt,
        ..WaveFitOptions::default()
    };
    let (wave, wave_report) = fit_wave_force_model_with(&frd, &wave_opts)
        .map_err(|e| stage_error("wave-force identification", e))?;
    let params = plant_params(cfg)?;
    let eq =
        find_equilibrium(cfg.wind_speed, &params).map_err(|e| stage_error("equilibrium", e))?;
    let model = build_linear_model(cfg, &params, &eq, &rad, &wave)
        .map_err(|e| stage_error("assembly", e))?;

    ensure_dir(&cfg.out_dir)?;
    let out = &cfg.out_dir;
    let paths = [
        out.join(RADIATION_MODEL),
        out.join(WAVE_MODEL),
        out.join(LINEAR_MODEL),
    ];
    rad.save(&paths[0])?;
    wave.save(&paths[1])?;
    model.save(&paths[2])?;
    let report_path = out.join("identify_report.txt");
    let mut f = create(&report_path)?;
    writeln!(f, "[radiation]")?;
    f.write_all(rad_report.to_key_value().as_bytes())?;
    writeln!(f, "[wave]")?;
    f.write_all(wave_report.to_key_value().as_bytes())?;
    writeln!(f, "[linear_model]")?;
    writeln!(f, "order={}", model.dt_model.order())?;
    writeln!(f, "flags={}", model.flags.join(";"))?;
    f.flush()?;
    let mut files = paths.to_vec();
    files.push(AssembledModel::block_map_path(&paths[2]));
    files.push(report_path);
    Ok(IdentifyOutcome {
        radiation: rad_report,
        wave: wave_report,
        model,
        files,
    })
}

fn stage_error(stage: &str, e: Error) -> Error {
    match e {
        Error::Config(m) => Error::Config(format!("{stage}: {m}")),
        Error::Validation(m) => Error::Validation(format!("{stage}: {m}")),
        Error::Domain(m) => Error::Domain(format!("{stage}: {m}")),
        Error::Numerical(m) => Error::Numerical(format!("{stage}: {m}")),
        Error::Parse(m) => Error::Parse(format!("{stage}: {m}")),
        Error::Io(e) => Error::Io(e),
    }
}

fn load_required<T>(path: &Path, step: &str, load: impl Fn(&Path) -> Result<T>) -> Result<T> {
    if !path.exists() {
        return Err(Error::Config(format!(
            "{} is missing; run `{step}` first",
            path.display()
        )));
    }
    load(path)
}

/// Rebuild the linear model from the identified models in the output
/// directory.
pub fn load_linear_model(cfg: &RunConfig) -> Result<(PlantParams, Equilibrium, AssembledModel)> {
    let rad = load_required(
        &cfg.out_dir.join(RADIATION_MODEL),
        "identify",
        StateSpaceModel::load,
    )?;
    let wave = load_required(
        &cfg.out_dir.join(WAVE_MODEL),
        "identify",
        StateSpaceModel::load,
    )?;
    let params = plant_params(cfg)?;
    let eq = find_equilibrium(cfg.wind_speed, &params)?;
    let model = build_linear_model(cfg, &params, &eq, &rad, &wave)?;
    Ok((params, eq, model))
}

#[derive(Debug, Clone)]
pub struct CalibrateOutcome {
    pub detector: DetectorModel,
    /// Noise-free tracking error of rotor speed, surge and pitch.
    pub tracking: [f64; 3],
    pub files: Vec<PathBuf>,
}

/// Healthy run at the calibration seed, observer tuning, baseline statistics
/// and threshold. Also writes the noise-free truth-vs-linear comparison.
pub fn cmd_calibrate(cfg: &RunConfig) -> Result<CalibrateOutcome> {
    let (params, eq, model) = load_linear_model(cfg)?;
    let seed = cfg.detector.calibration_seed;
    let healthy = simulate_case(cfg, &params, &eq, &[], seed, cfg.sim.noise)?;
    let opts = CalibrationOptions {
        alpha: cfg.detector.alpha,
        window: cfg.detector.baseline,
        noise: cfg.sim.noise,
        tune_tol: cfg.detector.tune_tol,
        ..CalibrationOptions::default()
    };
    let detector = calibrate_detector(&model, &healthy, &opts)?;

    let clean = simulate_case(cfg, &params, &eq, &[], seed, [0.0; 3])?;
    let predicted = model.predict(&clean.u);
    let tracking = tracking_nrmse(&clean, &predicted, cfg.detector.baseline);

    ensure_dir(&cfg.out_dir)?;
    let cal_path = cfg.out_dir.join(CALIBRATION);
    detector.save(&cal_path)?;
    let track_path = cfg.out_dir.join("tracking.csv");
    let mut f = create(&track_path)?;
    writeln!(
        f,
        "t,omega_truth,omega_linear,surge_truth,surge_linear,pitch_truth,pitch_linear"
    )?;
    for ((t, y), p) in clean.t.iter().zip(&clean.y).zip(&predicted) {
        writeln!(
            f,
            "{},{},{},{},{},{},{}",
            sig(*t, 9),
            sig(y[0], 9),
            sig(p[0], 9),
            sig(y[1], 9),
            sig(p[1], 9),
            sig(y[2], 9),
            sig(p[2], 9)
        )?;
    }
    f.flush()?;
    let report_path = cfg.out_dir.join("calibration_report.txt");
    let mut f = create(&report_path)?;
    writeln!(f, "calibration_seed={seed}")?;
    writeln!(f, "mean_d={}", detector.mean_d)?;
    writeln!(f, "std_d={}", detector.std_d)?;
    writeln!(f, "alpha={}", detector.alpha)?;
    writeln!(f, "threshold={}", detector.threshold)?;
    writeln!(f, "far_bound={}", 1.0 / (detector.alpha * detector.alpha))?;
    writeln!(
        f,
        "observer_radius={}",
        detector.observer.closed_loop_radius()?
    )?;
    writeln!(f, "tuning={}", detector.flags.join(";"))?;
    writeln!(f, "tracking_nrmse_omega={}", tracking[0])?;
    writeln!(f, "tracking_nrmse_surge={}", tracking[1])?;
    writeln!(f, "tracking_nrmse_pitch={}", tracking[2])?;
    f.flush()?;
    Ok(CalibrateOutcome {
        detector,
        tracking,
        files: vec![cal_path, track_path, report_path],
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioOutcome {
    pub case: usize,
    pub detected: bool,
    pub detection_delay: Option<f64>,
    pub far: f64,
    pub false_confirmed: usize,
    pub threshold: f64,
    pub alpha: f64,
    pub files: Vec<PathBuf>,
}

impl ScenarioOutcome {
    fn from_report(case: usize, r: &DetectionReport, files: Vec<PathBuf>) -> Self {
        Self {
            case,
            detected: r.detected(),
            detection_delay: r.detection_delay,
            far: r.far,
            false_confirmed: r.false_confirmed,
            threshold: r.threshold,
            alpha: r.alpha,
            files,
        }
    }

    pub fn summary_row(&self) -> String {
        let delay = self
            .detection_delay
            .map_or("none".to_string(), |d| format!("{d:.1}"));
        format!(
            "{},{},{},{:.6},{:.6},{}",
            self.case, self.detected, delay, self.far, self.threshold, self.alpha
        )
    }
}

pub const SUMMARY_HEADER: &str = "case,detected,delay_s,far,threshold,alpha";

pub fn load_detector(cfg: &RunConfig) -> Result<DetectorModel> {
    let det = load_required(
        &cfg.out_dir.join(CALIBRATION),
        "calibrate",
        DetectorModel::load,
    )?;
    if (det.observer.sys.dt - cfg.sim.dt).abs() > 1e-12 {
        return Err(Error::Config(format!(
            "calibration step {} s differs from configured dt {} s; recalibrate",
            det.observer.sys.dt, cfg.sim.dt
        )));
    }
    Ok(det)
}

fn check_case(case: usize) -> Result<()> {
    if case > 4 {
        return Err(Error::Config(format!(
            "load case {case} does not exist (0 = healthy, 1..4 = faults)"
        )));
    }
    Ok(())
}

/// Simulate one load case, run the detector and write the case files.
pub fn run_case(
    cfg: &RunConfig,
    det: &DetectorModel,
    params: &PlantParams,
    eq: &Equilibrium,
    case: usize,
) -> Result<ScenarioOutcome> {
    check_case(case)?;
    let faults = &cfg.scenarios[case];
    for f in faults {
        f.validate(params.lines.len(), cfg.sim.duration)?;
    }
    let run = simulate_case(cfg, params, eq, faults, cfg.sim.seed, cfg.sim.noise)?;
    let report = run_detection(det, &run, cfg.detector.hold)?;
    let out = &cfg.out_dir;
    let run_path = out.join(format!("case{case}_run.csv"));
    run.save(&run_path)?;
    let stem = format!("case{case}_detection");
    report.save(out, &stem)?;
    let files = vec![
        run_path,
        out.join(format!("{stem}.txt")),
        out.join(format!("{stem}.csv")),
    ];
    Ok(ScenarioOutcome::from_report(case, &report, files))
}

pub fn cmd_run(cfg: &RunConfig, case: usize) -> Result<ScenarioOutcome> {
    check_case(case)?;
    let det = load_detector(cfg)?;
    let params = plant_params(cfg)?;
    let eq = find_equilibrium(cfg.wind_speed, &params)?;
    ensure_dir(&cfg.out_dir)?;
    let outcome = run_case(cfg, &det, &params, &eq, case)?;
    let path = cfg.out_dir.join(format!("case{case}_summary.csv"));
    let mut f = create(&path)?;
    writeln!(f, "{SUMMARY_HEADER}")?;
    writeln!(f, "{}", outcome.summary_row())?;
    f.flush()?;
    Ok(outcome)
}

#[derive(Debug)]
pub struct BatchOutcome {
    pub results: Vec<(usize, Result<ScenarioOutcome>)>,
    pub gate_failures: Vec<String>,
    pub summary: PathBuf,
}

impl BatchOutcome {
    pub fn exit_code(&self) -> i32 {
        if let Some(e) = self.results.iter().find_map(|(_, r)| r.as_ref().err()) {
            return e.exit_code();
        }
        if self.gate_failures.is_empty() {
            0
        } else {
            4
        }
    }
}

/// Acceptance gates: runs without faults stay silent within the Chebyshev
/// bound; faulted runs are detected within `max_delay` without earlier
/// confirmed alarms.
pub fn gate_failures(cfg: &RunConfig, results: &[(usize, Result<ScenarioOutcome>)]) -> Vec<String> {
    let mut out = Vec::new();
    for (case, r) in results {
        let o = match r {
            Ok(o) => o,
            Err(e) => {
                out.push(format!("case {case}: {e}"));
                continue;
            }
        };
        if o.false_confirmed > 0 {
            out.push(format!(
                "case {case}: {} confirmed false alarm(s)",
                o.false_confirmed
            ));
        }
        if o.far > 1.0 / (o.alpha * o.alpha) {
            out.push(format!(
                "case {case}: false-alarm rate {:.4} above 1/alpha^2",
                o.far
            ));
        }
        if !cfg.scenarios[*case].is_empty() {
            match o.detection_delay {
                None => out.push(format!("case {case}: fault not detected")),
                Some(d) if d > cfg.gates.max_delay => out.push(format!(
                    "case {case}: delay {d:.1} s exceeds {} s",
                    cfg.gates.max_delay
                )),
                Some(_) => {}
            }
        }
    }
    out
}

/// Cases 0..=4 with a summary table. A failing case does not stop the batch.
pub fn cmd_batch(cfg: &RunConfig, parallel: bool) -> Result<BatchOutcome> {
    let det = load_detector(cfg)?;
    let params = plant_params(cfg)?;
    let eq = find_equilibrium(cfg.wind_speed, &params)?;
    ensure_dir(&cfg.out_dir)?;
    let one = |case: usize| (case, run_case(cfg, &det, &params, &eq, case));
    let results: Vec<(usize, Result<ScenarioOutcome>)> = if parallel {
        (0..5).into_par_iter().map(one).collect()
    } else {
        (0..5).map(one).collect()
    };
    let summary = cfg.out_dir.join(SUMMARY);
    let mut f = create(&summary)?;
    writeln!(f, "{SUMMARY_HEADER}")?;
    for (case, r) in &results {
        match r {
            Ok(o) => writeln!(f, "{}", o.summary_row())?,
            Err(_) => writeln!(f, "{case},error,none,nan,nan,nan")?,
        }
    }
    f.flush()?;
    let gate_failures = if cfg.gates.enabled {
        gate_failures(cfg, &results)
    } else {
        Vec::new()
    };
    Ok(BatchOutcome {
        results,
        gate_failures,
        summary,
    })
}

/// Write the wave elevation of the configured seed.
pub fn cmd_wave_export(cfg: &RunConfig) -> Result<PathBuf> {
    let wave = wave_for(cfg, cfg.sim.seed)?;
    ensure_dir(&cfg.out_dir)?;
    let path = cfg.out_dir.join("wave_elevation.csv");
    let mut f = create(&path)?;
    wave.write_csv(&mut f)?;
    f.flush()?;
    Ok(path)
}

/// Write the synthetic hydrodynamic dataset (and its `ainf.csv` sidecar).
pub fn cmd_frd_synth(cfg: &RunConfig) -> Result<PathBuf> {
    ensure_dir(&cfg.out_dir)?;
    let path = cfg.out_dir.join("hydro_frd.csv");
    default_dataset().save(&path)?;
    Ok(path)
}
