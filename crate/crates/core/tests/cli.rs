use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::OnceLock;

use clap::Parser;
use mooring_fd::cli::{
    cmd_batch, cmd_calibrate, cmd_frd_synth, cmd_identify, cmd_run, cmd_wave_export, execute,
    parse_fault, Cli, HydroSource, RunConfig, SUMMARY_HEADER,
};
use mooring_fd::detect::DetectorModel;
use mooring_fd::mooring::{FaultEvent, FaultKind};
use mooring_fd::Error;

const BIN: &str = env!("CARGO_BIN_EXE_mooring-fd");

fn default_ini() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../config/default.ini")
}

/// Identified and calibrated reference models, shared read-only.
fn models() -> &'static Path {
    static DIR: OnceLock<tempfile::TempDir> = OnceLock::new();
    DIR.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let cfg = RunConfig {
            out_dir: dir.path().to_path_buf(),
            ..RunConfig::default()
        };
        cmd_identify(&cfg).unwrap();
        cmd_calibrate(&cfg).unwrap();
        dir
    })
    .path()
}

/// Fresh output directory seeded with the shared models.
fn workdir() -> (tempfile::TempDir, RunConfig) {
    let dir = tempfile::tempdir().unwrap();
    for entry in std::fs::read_dir(models()).unwrap() {
        let path = entry.unwrap().path();
        std::fs::copy(&path, dir.path().join(path.file_name().unwrap())).unwrap();
    }
    let cfg = RunConfig {
        out_dir: dir.path().to_path_buf(),
        ..RunConfig::default()
    };
    (dir, cfg)
}

fn config_error(text: &str) -> String {
    match RunConfig::from_ini_str(text, Path::new(".")) {
        Err(Error::Config(msg)) => msg,
        other => panic!("expected a configuration error for {text:?}, got {other:?}"),
    }
}

#[test]
fn shipped_config_reproduces_the_defaults() {
    let mut cfg = RunConfig::load(&default_ini()).unwrap();
    assert!(cfg.out_dir.ends_with("../out"));
    cfg.out_dir = RunConfig::default().out_dir;
    assert_eq!(cfg, RunConfig::default());
    assert_eq!(
        RunConfig::from_ini_str("", Path::new(".")).unwrap(),
        RunConfig::default()
    );
}

#[test]
fn config_rejects_typos_and_out_of_range_values() {
    assert!(config_error("[simulation]\ndurration = 10").contains("durration"));
    assert!(config_error("[simulaton]\nduration = 10").contains("simulaton"));
    assert!(config_error("[simulation]\ndt = 0.1\ndt = 0.2").contains("twice"));
    assert!(config_error("[simulation]\ndt = 2").contains("dt"));
    assert!(config_error("[simulation]\ndt_inner = 0.03").contains("divide"));
    assert!(config_error("[simulation]\nnoise = 0.1, 0.1").contains("noise"));
    assert!(config_error("[detector]\nalpha = 1").contains("alpha"));
    assert!(config_error("[gates]\nenabled = maybe").contains("boolean"));
    assert!(config_error("[identification]\ndofs = surge, yaw_rate").contains("yaw_rate"));
    assert!(config_error("[scenarios]\ncase5 = fairlead, 1, 1500, 0").contains("case1"));
    assert!(config_error("[scenarios]\ncase1 = fairlead, 4, 1500, 0").contains("line"));
    assert!(config_error("duration = 5").contains("section"));
}

#[test]
fn fault_entries_parse() {
    assert_eq!(parse_fault("none").unwrap(), None);
    assert_eq!(
        parse_fault(" slip , 2, 1500, 957 ").unwrap(),
        Some(FaultEvent {
            kind: FaultKind::AnchorSlip,
            line_index: 2,
            time: 1500.0,
            theta_x: 957.0
        })
    );
    assert!(parse_fault("fairlead, 1, 1500").is_err());
    assert!(parse_fault("snap, 1, 1500, 0").is_err());
}

#[test]
fn relative_paths_resolve_against_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.ini");
    std::fs::write(
        &path,
        "[hydro]\nsource = data/frd.csv\n[output]\ndir = results\n",
    )
    .unwrap();
    let cfg = RunConfig::load(&path).unwrap();
    assert_eq!(
        cfg.hydro,
        HydroSource::File(dir.path().join("data/frd.csv"))
    );
    assert_eq!(cfg.out_dir, dir.path().join("results"));
}

#[test]
fn identify_writes_models_within_band_targets() {
    let dir = models();
    for name in [
        "radiation_model.csv",
        "wave_model.csv",
        "linear_model.csv",
        "linear_model.csv.blocks",
    ] {
        assert!(dir.join(name).is_file(), "{name}");
    }
    let report = std::fs::read_to_string(dir.join("identify_report.txt")).unwrap();
    assert!(report.contains("radiation"), "{report}");
    // Calibration reloads with a positive-definite covariance.
    let det = DetectorModel::load(&dir.join("calibration.csv")).unwrap();
    assert!(nalgebra::Cholesky::new(det.stats.sigma).is_some());
    assert!(det.threshold > det.mean_d);
}

#[test]
fn first_order_radiation_degrades_but_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig {
        out_dir: dir.path().to_path_buf(),
        ..RunConfig::default()
    };
    cfg.ident.radiation_order = 1;
    let low = cmd_identify(&cfg).unwrap();
    assert!(
        low.radiation.max_hinf() > 0.05,
        "{}",
        low.radiation.max_hinf()
    );
    assert!(low.model.dt_model.is_stable().unwrap());
}

#[test]
fn missing_hydro_dataset_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nowhere/frd.csv");
    let cfg = RunConfig {
        out_dir: dir.path().to_path_buf(),
        hydro: HydroSource::File(missing.clone()),
        ..RunConfig::default()
    };
    let err = cmd_identify(&cfg).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(
        err.to_string().contains(&missing.display().to_string()),
        "{err}"
    );
}

#[test]
fn synthesized_dataset_round_trips_through_identify() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig {
        out_dir: dir.path().to_path_buf(),
        ..RunConfig::default()
    };
    let path = cmd_frd_synth(&cfg).unwrap();
    let from_file = cmd_identify(&RunConfig {
        hydro: HydroSource::File(path),
        ..cfg.clone()
    })
    .unwrap();
    let built_in = cmd_identify(&cfg).unwrap();
    assert!((from_file.radiation.max_hinf() - built_in.radiation.max_hinf()).abs() <= 1e-9);
    assert!((from_file.wave.max_hinf() - built_in.wave.max_hinf()).abs() <= 1e-9);
}

#[test]
fn lower_alpha_gives_lower_threshold() {
    let (_dir, mut cfg) = workdir();
    cfg.detector.alpha = 2.0;
    let low = cmd_calibrate(&cfg).unwrap().detector;
    let high = DetectorModel::load(&models().join("calibration.csv")).unwrap();
    assert!(
        low.threshold < high.threshold,
        "{} vs {}",
        low.threshold,
        high.threshold
    );
    assert_eq!(low.mean_d, high.mean_d);
}

#[test]
fn short_runs_cannot_calibrate() {
    let (_dir, mut cfg) = workdir();
    cfg.sim.duration = 250.0;
    let err = cmd_calibrate(&cfg).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(err.to_string().contains("samples"), "{err}");
}

#[test]
fn healthy_case_is_clean_and_summarised() {
    let (dir, cfg) = workdir();
    let o = cmd_run(&cfg, 0).unwrap();
    assert!(!o.detected && o.detection_delay.is_none() && o.false_confirmed == 0);
    assert!(o.far <= 1.0 / 36.0);
    let summary = std::fs::read_to_string(dir.path().join("case0_summary.csv")).unwrap();
    let rows: Vec<&str> = summary.lines().collect();
    assert_eq!(rows, [SUMMARY_HEADER, o.summary_row().as_str()]);
    let fields: Vec<&str> = rows[1].split(',').collect();
    assert_eq!(fields.len(), 6);
    assert_eq!(&fields[..3], ["0", "false", "none"]);
    assert!(o.files.iter().all(|f| f.is_file()));
}

#[test]
fn null_slip_is_not_detected() {
    let (_dir, mut cfg) = workdir();
    cfg.scenarios[4] = vec![FaultEvent {
        kind: FaultKind::AnchorSlip,
        line_index: 2,
        time: 1500.0,
        theta_x: 707.0,
    }];
    let o = cmd_run(&cfg, 4).unwrap();
    assert!(!o.detected && o.detection_delay.is_none(), "{o:?}");
}

#[test]
fn unknown_case_and_missing_calibration_are_configuration_errors() {
    let (_dir, cfg) = workdir();
    assert_eq!(cmd_run(&cfg, 5).unwrap_err().exit_code(), 2);
    let empty = tempfile::tempdir().unwrap();
    let bare = RunConfig {
        out_dir: empty.path().to_path_buf(),
        ..RunConfig::default()
    };
    let err = cmd_run(&bare, 1).unwrap_err();
    assert!(err.to_string().contains("calibrate"), "{err}");
    assert!(cmd_batch(&bare, false).is_err());
}

fn files_of(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect();
    out.sort();
    out
}

#[test]
fn batch_is_deterministic_serial_or_parallel() {
    let (a, cfg_a) = workdir();
    let (b, cfg_b) = workdir();
    let serial = cmd_batch(&cfg_a, false).unwrap();
    let parallel = cmd_batch(&cfg_b, true).unwrap();
    assert_eq!(files_of(a.path()), files_of(b.path()));
    assert_eq!(serial.gate_failures, parallel.gate_failures);
    assert_eq!(serial.exit_code(), parallel.exit_code());

    let summary = std::fs::read_to_string(&serial.summary).unwrap();
    let rows: Vec<&str> = summary.lines().collect();
    assert_eq!(rows.len(), 6);
    assert_eq!(rows[0], SUMMARY_HEADER);
    for (case, row) in rows[1..].iter().enumerate() {
        assert!(row.starts_with(&format!("{case},")));
    }
    // Case 0 stays silent and the upwind-line faults are caught quickly.
    let outcome = |c: usize| serial.results[c].1.as_ref().unwrap();
    assert!(!outcome(0).detected);
    for c in 1..=3 {
        assert!(
            outcome(c).detection_delay.is_some_and(|d| d <= 30.0),
            "case {c}"
        );
    }
    assert_eq!(
        serial.exit_code(),
        if serial.gate_failures.is_empty() {
            0
        } else {
            4
        }
    );
}

#[test]
fn other_seed_gives_same_detections() {
    let (_a, cfg) = workdir();
    let (_b, mut other) = workdir();
    other.sim.seed = 7;
    let base = cmd_batch(&cfg, false).unwrap();
    let alt = cmd_batch(&other, false).unwrap();
    for ((case, r1), (_, r2)) in base.results.iter().zip(&alt.results) {
        let (o1, o2) = (r1.as_ref().unwrap(), r2.as_ref().unwrap());
        assert_eq!(o1.detected, o2.detected, "case {case}");
        if let (Some(d1), Some(d2)) = (o1.detection_delay, o2.detection_delay) {
            assert!((d2 - d1).abs() <= 0.5 * d1, "case {case}: {d1} vs {d2}");
        }
    }
}

#[test]
fn wave_export_follows_the_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig {
        out_dir: dir.path().to_path_buf(),
        ..RunConfig::default()
    };
    let a = std::fs::read(cmd_wave_export(&cfg).unwrap()).unwrap();
    let again = std::fs::read(cmd_wave_export(&cfg).unwrap()).unwrap();
    let mut other = cfg.clone();
    other.sim.seed = 2;
    let b = std::fs::read(cmd_wave_export(&other).unwrap()).unwrap();
    assert_eq!(a, again);
    assert_ne!(a, b);
}

#[test]
fn global_flags_override_the_config() {
    let cli = Cli::parse_from([
        "mooring-fd",
        "--config",
        default_ini().to_str().unwrap(),
        "--seed",
        "9",
        "--out",
        "x",
        "wave-export",
    ]);
    let cfg = cli.resolve_config().unwrap();
    assert_eq!(cfg.sim.seed, 9);
    assert_eq!(cfg.out_dir, PathBuf::from("x"));
    assert!(Cli::try_parse_from(["mooring-fd", "run"]).is_err());
}

#[test]
fn execute_reports_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let cli = Cli::parse_from(["mooring-fd", "--out", out, "frd-synth"]);
    assert_eq!(execute(&cli).unwrap(), 0);
    let cli = Cli::parse_from(["mooring-fd", "--out", out, "run", "--case", "1"]);
    assert_eq!(execute(&cli).unwrap_err().exit_code(), 2);
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let status = |args: &[&str]| Command::new(BIN).args(args).output().unwrap().status.code();
    assert_eq!(
        status(&["--out", dir.path().to_str().unwrap(), "wave-export"]),
        Some(0)
    );
    assert_eq!(
        status(&["--config", "/nonexistent/run.ini", "identify"]),
        Some(2)
    );
    let bad = dir.path().join("bad.ini");
    std::fs::write(&bad, "[simulation]\ndt = 5\n").unwrap();
    assert_eq!(
        status(&["--config", bad.to_str().unwrap(), "identify"]),
        Some(2)
    );
    assert_eq!(
        status(&["--out", dir.path().to_str().unwrap(), "batch"]),
        Some(2)
    );
    assert_eq!(status(&["bogus"]), Some(2));
}
