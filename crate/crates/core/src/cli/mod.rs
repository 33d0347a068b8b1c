//! Command-line front end: configuration, the identify / calibrate / run /
//! batch pipeline, and plot-ready CSV outputs.

pub mod commands;
pub mod config;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::{
    cmd_batch, cmd_calibrate, cmd_frd_synth, cmd_identify, cmd_run, cmd_wave_export, BatchOutcome,
    CalibrateOutcome, IdentifyOutcome, ScenarioOutcome, SUMMARY_HEADER,
};
pub use config::{parse_fault, HydroSource, RunConfig};

use crate::error::Result;

#[derive(Debug, Parser)]
#[command(
    name = "mooring-fd",
    version,
    about = "Mooring-line fault detection workbench"
)]
pub struct Cli {
    /// INI configuration file; reference values when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory (overrides [output] dir).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Run seed for wave phases and sensor noise (overrides [simulation] seed).
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Run batch scenarios on all cores.
    #[arg(long, global = true)]
    pub parallel: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit radiation and wave-force models and assemble the linear model.
    Identify,
    /// Tune the observer on a healthy run and compute the threshold.
    Calibrate,
    /// Simulate and screen one load case (0 = healthy, 1..4 = reference faults).
    Run {
        #[arg(long)]
        case: usize,
    },
    /// All load cases plus the summary table; exit 4 when a gate fails.
    Batch,
    /// Write the wave elevation for the run seed.
    WaveExport,
    /// Write the synthetic hydrodynamic dataset.
    FrdSynth,
}

impl Cli {
    pub fn resolve_config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(out) = &self.out {
            cfg.out_dir = out.clone();
        }
        if let Some(seed) = self.seed {
            cfg.sim.seed = seed;
        }
        Ok(cfg)
    }
}

fn pct(v: f64) -> String {
    format!("{:.2}%", 100.0 * v)
}

/// Run the parsed command and return the process exit code.
pub fn execute(cli: &Cli) -> Result<i32> {
    let cfg = cli.resolve_config()?;
    match &cli.command {
        Command::Identify => {
            let o = cmd_identify(&cfg)?;
            println!(
                "radiation order {}: band error {} (flags: {})",
                o.radiation.order,
                pct(o.radiation.max_hinf()),
                o.radiation.flags.join(", ")
            );
            println!(
                "wave order {} ({} states with the differencing): band error {} (flags: {})",
                cfg.ident.wave_order,
                o.wave.order,
                pct(o.wave.max_hinf()),
                o.wave.flags.join(", ")
            );
            println!("linear model: {} states", o.model.dt_model.order());
        }
        Command::Calibrate => {
            let o = cmd_calibrate(&cfg)?;
            let d = &o.detector;
            println!(
                "mean_d {:.4}  std_d {:.4}  alpha {}  threshold {:.4}",
                d.mean_d, d.std_d, d.alpha, d.threshold
            );
            println!(
                "tracking NRMSE: rotor {}  surge {}  pitch {}",
                pct(o.tracking[0]),
                pct(o.tracking[1]),
                pct(o.tracking[2])
            );
        }
        Command::Run { case } => {
            let o = cmd_run(&cfg, *case)?;
            println!("{SUMMARY_HEADER}\n{}", o.summary_row());
        }
        Command::Batch => {
            let o = cmd_batch(&cfg, cli.parallel)?;
            println!("{SUMMARY_HEADER}");
            for (case, r) in &o.results {
                match r {
                    Ok(s) => println!("{}", s.summary_row()),
                    Err(e) => println!("{case},error: {e}"),
                }
            }
            for g in &o.gate_failures {
                eprintln!("gate failed: {g}");
            }
            return Ok(o.exit_code());
        }
        Command::WaveExport => println!("{}", cmd_wave_export(&cfg)?.display()),
        Command::FrdSynth => println!("{}", cmd_frd_synth(&cfg)?.display()),
    }
    Ok(0)
}

/// Entry point for the binary.
pub fn main_entry() -> i32 {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
