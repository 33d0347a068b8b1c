//! Fit the radiation memory model of the surge, heave and pitch motions from
//! the shipped hydrodynamic dataset and compare model orders.
//!
//! Run with `cargo run --release --example radiation_identification`.

use mooring_fd::hydro::default_dataset;
use mooring_fd::sysid::{fit_radiation_model, PLANAR_DOFS};

fn main() -> mooring_fd::Result<()> {
    let frd = default_dataset();
    for order in [1, 2, 4, 6, 8] {
        let t0 = std::time::Instant::now();
        let (model, report) = fit_radiation_model(&frd, order, &PLANAR_DOFS)?;
        println!(
            "order {order}: band error {:.3}% (h2 {:.3}%), stable {}, spectral radius {:.4}, {:.2} s",
            100.0 * report.max_hinf(),
            100.0 * report.h2_band,
            report.stable,
            mooring_fd::linalg::spectral_radius(&model.a)?,
            t0.elapsed().as_secs_f64()
        );
    }
    let (_, report) = fit_radiation_model(&frd, 6, &PLANAR_DOFS)?;
    print!("{}", report.to_key_value());
    Ok(())
}
