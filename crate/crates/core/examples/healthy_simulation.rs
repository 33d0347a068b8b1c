//! Trim the reference turbine at 16 m/s and simulate 1600 s in irregular
//! waves; prints the operating point and a few output statistics.
//!
//! Run with `cargo run --release --example healthy_simulation`.

use mooring_fd::hydro::{realize_wave_elevation, WaveSpec};
use mooring_fd::plant::{find_equilibrium, simulate_plant, PlantParams, SimOptions};

fn stats(v: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = v.clone().count() as f64;
    let mean = v.clone().sum::<f64>() / n;
    let var = v.map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn main() -> mooring_fd::Result<()> {
    let params = PlantParams::reference()?;
    let eq = find_equilibrium(16.0, &params)?;
    println!(
        "equilibrium: surge {:.2} m, pitch {:.4} rad, blade pitch {:.2} deg, thrust {:.1} kN",
        eq.xi[0],
        eq.xi[4],
        eq.pitch.to_degrees(),
        eq.thrust / 1e3
    );
    for (i, t) in eq.tensions.iter().enumerate() {
        println!("  line {}: fairlead tension {:.0} kN", i + 1, t / 1e3);
    }

    let wave = realize_wave_elevation(&WaveSpec::default(), 0.1, 1600.0)?;
    let opts = SimOptions {
        v_wind: 16.0,
        duration: 1600.0,
        ..SimOptions::default()
    };
    let t0 = std::time::Instant::now();
    let run = simulate_plant(&params, &wave, &eq, &opts)?;
    println!(
        "simulated {} samples in {:.2} s",
        run.len(),
        t0.elapsed().as_secs_f64()
    );

    let names = ["rotor speed [rad/s]", "surge [m]", "pitch [rad]"];
    for (c, name) in names.iter().enumerate() {
        let (mean, std) = stats(run.y.iter().skip(2000).map(|y| y[c]));
        println!("  {name}: mean {mean:.4}, std {std:.4}");
    }
    Ok(())
}
