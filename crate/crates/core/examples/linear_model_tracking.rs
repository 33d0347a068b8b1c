//! Identify the hydrodynamic models, linearize the turbine at 16 m/s and
//! drive the discrete linear model with the inputs of a noise-free truth run.
//!
//! Run with `cargo run --release --example linear_model_tracking`.

use mooring_fd::hydro::{default_dataset, realize_wave_elevation, WaveSpec};
use mooring_fd::linmodel::{
    assemble_linear_model, tracking_nrmse, OperatingPoint, DEFAULT_REL_STEP,
};
use mooring_fd::mooring::{healthy_states, linearize_mooring_stiffness};
use mooring_fd::plant::{find_equilibrium, simulate_plant, PlantParams, SimOptions};
use mooring_fd::sysid::{fit_radiation_model, fit_wave_force_model, PLANAR_DOFS};

fn main() -> mooring_fd::Result<()> {
    let frd = default_dataset();
    let (rad, _) = fit_radiation_model(&frd, 6, &PLANAR_DOFS)?;
    let (wave_model, _) = fit_wave_force_model(&frd, 8, 4.0)?;

    let params = PlantParams::reference()?;
    let eq = find_equilibrium(16.0, &params)?;
    let op = OperatingPoint::from_equilibrium(&params, &eq, DEFAULT_REL_STEP)?;
    let k_moor =
        linearize_mooring_stiffness(&params.lines, &healthy_states(&params.lines), &eq.xi, 1e-3)?;
    let model = assemble_linear_model(
        &op,
        &k_moor,
        &params.k_hydrostatic,
        Some(&rad),
        Some(&wave_model),
        &params,
        0.1,
    )?;
    println!("linear model: {} states", model.dt_model.order());
    for (name, start, len) in &model.blocks.states {
        println!("  {name:<12} states {start}..{}", start + len);
    }

    let wave = realize_wave_elevation(
        &WaveSpec {
            seed: 101,
            ..WaveSpec::default()
        },
        0.1,
        1600.0,
    )?;
    let opts = SimOptions {
        noise: [0.0; 3],
        ..SimOptions::default()
    };
    let run = simulate_plant(&params, &wave, &eq, &opts)?;
    let predicted = model.predict(&run.u);
    let e = tracking_nrmse(&run, &predicted, (200.0, 1400.0));
    println!(
        "NRMSE over 200-1400 s: rotor speed {:.1}%, surge {:.1}%, pitch {:.1}%",
        100.0 * e[0],
        100.0 * e[1],
        100.0 * e[2]
    );
    for k in (2000..14000).step_by(2000) {
        println!(
            "  t {:>6.1}: surge {:.3} / {:.3} m, pitch {:.5} / {:.5} rad",
            run.t[k], run.y[k][1], predicted[k][1], run.y[k][2], predicted[k][2]
        );
    }
    Ok(())
}
