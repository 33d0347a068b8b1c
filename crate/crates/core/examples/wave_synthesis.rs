//! Draw an irregular sea from the JONSWAP spectrum and check that the sample
//! statistics recover the requested significant wave height.
//!
//! Run with `cargo run --release --example wave_synthesis`.

use mooring_fd::hydro::{jonswap_spectrum, realize_wave_elevation, Jonswap, WaveSpec};

fn main() -> mooring_fd::Result<()> {
    let spec = WaveSpec::default();
    let jonswap = Jonswap::new(&spec)?;
    println!(
        "Hs {} m, Tp {} s, gamma {}: peak {:.3} rad/s, grid variance {:.4} m^2 (Hs^2/16 = {:.4})",
        spec.hs,
        spec.tp,
        spec.gamma,
        spec.peak_frequency(),
        jonswap.grid_variance(),
        spec.hs * spec.hs / 16.0
    );
    for w in [0.4, spec.peak_frequency(), 1.2, 2.0] {
        println!("  S({w:.3}) = {:.4} m^2 s", jonswap_spectrum(&spec, w)?);
    }

    for seed in 1..=5 {
        let wave = realize_wave_elevation(
            &WaveSpec {
                seed,
                ..spec.clone()
            },
            0.1,
            3600.0,
        )?;
        let n = wave.eta.len() as f64;
        let mean = wave.eta.iter().sum::<f64>() / n;
        let var = wave.eta.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / n;
        let max = wave.eta.iter().cloned().fold(f64::MIN, f64::max);
        println!(
            "seed {seed}: 4 sigma = {:.3} m, crest max {max:.2} m",
            4.0 * var.sqrt()
        );
    }
    Ok(())
}
