//! Solve the reference three-line catenary mooring: design tensions, the
//! surge restoring curve, and the linearized stiffness at the design pose.
//!
//! Run with `cargo run --release --example catenary_mooring`.

use mooring_fd::mooring::{
    evaluate_mooring, fairlead_position, healthy_states, linearize_mooring_stiffness,
    solve_catenary, reference_lines,
};
use nalgebra::Vector6;

fn main() -> mooring_fd::Result<()> {
    let lines = reference_lines();
    let states = healthy_states(&lines);
    println!("submerged weight {:.1} N/m", lines[0].weight_submerged);
    for (i, line) in lines.iter().enumerate() {
        let s = solve_catenary(line, &fairlead_position(&Vector6::zeros(), line))?;
        println!(
            "line {}: H = {:.1} kN, V = {:.1} kN, T = {:.1} kN, on seabed {:.1} m",
            i + 1,
            s.h / 1e3,
            s.v / 1e3,
            s.tension / 1e3,
            s.seabed_length
        );
    }
    println!("surge offset [m] -> restoring force [kN], tensions [kN]");
    for surge in [-20.0, -10.0, 0.0, 10.0, 20.0, 30.0, 40.0] {
        let e = evaluate_mooring(
            &Vector6::new(surge, 0.0, 0.0, 0.0, 0.0, 0.0),
            &lines,
            &states,
            None,
        )?;
        let t: Vec<String> = e
            .tensions
            .iter()
            .map(|t| format!("{:.0}", t / 1e3))
            .collect();
        println!(
            "{surge:6.1} -> {:10.1}   [{}]",
            e.force[0] / 1e3,
            t.join(", ")
        );
    }
    let k = linearize_mooring_stiffness(&lines, &states, &Vector6::zeros(), 1e-3)?;
    println!("stiffness at the design pose:\n{k:.4e}");
    Ok(())
}
