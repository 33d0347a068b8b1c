//! Identify the wave-excitation force model from the shipped dataset: scan the
//! causalizing shift, then fit with the default order and shift.
//!
//! Run with `cargo run --release --example wave_force_identification`.

use mooring_fd::hydro::default_dataset;
use mooring_fd::sysid::{fit_wave_force_model, scan_shift, wave_kernel, PLANAR_DOFS};

fn main() -> mooring_fd::Result<()> {
    let frd = default_dataset();
    let kernel = wave_kernel(&frd, &PLANAR_DOFS, 0.1, 80.0)?;
    let candidates: Vec<f64> = (1..=8).map(f64::from).collect();
    for (t_d, ratio) in scan_shift(&kernel, &candidates)? {
        println!(
            "t_d = {t_d:.0} s: non-causal peak ratio {:.2}%",
            100.0 * ratio
        );
    }
    for order in [4, 6, 8, 10] {
        let t0 = std::time::Instant::now();
        let (model, report) = fit_wave_force_model(&frd, order, 4.0)?;
        println!(
            "order {order} (state dimension {}): band error {:.3}%, {:.2} s",
            model.order(),
            100.0 * report.max_hinf(),
            t0.elapsed().as_secs_f64()
        );
    }
    let (_, report) = fit_wave_force_model(&frd, 8, 4.0)?;
    print!("{}", report.to_key_value());
    Ok(())
}
