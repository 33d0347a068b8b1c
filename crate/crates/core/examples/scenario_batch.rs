//! The full command pipeline on the reference configuration: identify,
//! calibrate and the five load cases, written to a scratch directory.
//!
//! Run with `cargo run --release --example scenario_batch`.

use mooring_fd::cli::{cmd_batch, cmd_calibrate, cmd_identify, RunConfig, SUMMARY_HEADER};

fn main() -> mooring_fd::Result<()> {
    let cfg = RunConfig {
        out_dir: std::env::temp_dir().join("mooring-fd-batch"),
        ..RunConfig::default()
    };
    cmd_identify(&cfg)?;
    let cal = cmd_calibrate(&cfg)?;
    println!("threshold {:.3}", cal.detector.threshold);

    let batch = cmd_batch(&cfg, true)?;
    println!("{SUMMARY_HEADER}");
    for (case, r) in &batch.results {
        match r {
            Ok(o) => println!("{}", o.summary_row()),
            Err(e) => println!("{case}: {e}"),
        }
    }
    for g in &batch.gate_failures {
        println!("gate: {g}");
    }
    println!(
        "files in {} (exit code {})",
        cfg.out_dir.display(),
        batch.exit_code()
    );
    Ok(())
}
