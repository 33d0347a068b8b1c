//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use mooring_fd::mooring::{fairlead_position, MooringLineParams};
use nalgebra::{Vector3, Vector6};

/// End point of the line integrated along unstretched arc length from the
/// anchor, for horizontal tension `h` and fairlead vertical tension `v`.
/// The part with negative vertical tension rests on a frictionless seabed.
fn shoot(h: f64, v: f64, length: f64, w: f64, ea: f64, steps: usize) -> (f64, f64) {
    let v_anchor = v - w * length;
    let (mut s, mut x, mut z, mut tz) = (0.0, 0.0, 0.0, v_anchor);
    if v_anchor < 0.0 {
        let rest = -v_anchor / w;
        x = rest * (1.0 + h / ea);
        s = rest;
        tz = 0.0;
    }
    let ds = (length - s) / steps as f64;
    let rhs = |tz: f64| {
        let t = (h * h + tz * tz).sqrt();
        (h / t + h / ea, tz / t + tz / ea, w)
    };
    for _ in 0..steps {
        let k1 = rhs(tz);
        let k2 = rhs(tz + 0.5 * ds * k1.2);
        let k3 = rhs(tz + 0.5 * ds * k2.2);
        let k4 = rhs(tz + ds * k3.2);
        x += ds / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        z += ds / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        tz += ds / 6.0 * (k1.2 + 2.0 * k2.2 + 2.0 * k3.2 + k4.2);
    }
    (x, z)
}

/// Shooting-method solution `(H, V)` for spans `(x_span, z_span)`, by Newton
/// iteration with a finite-difference Jacobian from the starting guess.
pub fn shooting_solution(
    length: f64,
    w: f64,
    ea: f64,
    x_span: f64,
    z_span: f64,
    guess: (f64, f64),
) -> (f64, f64) {
    let steps = 4000;
    let (mut h, mut v) = guess;
    for _ in 0..100 {
        let (x, z) = shoot(h, v, length, w, ea, steps);
        let (rx, rz) = (x - x_span, z - z_span);
        if rx.abs() < 1e-10 * x_span && rz.abs() < 1e-10 * z_span {
            return (h, v);
        }
        let dh = 1e-6 * h;
        let dv = 1e-6 * v;
        let (xh, zh) = shoot(h + dh, v, length, w, ea, steps);
        let (xv, zv) = shoot(h, v + dv, length, w, ea, steps);
        let (a, b, c, d) = ((xh - x) / dh, (xv - x) / dv, (zh - z) / dh, (zv - z) / dv);
        let det = a * d - b * c;
        let mut step_h = (d * rx - b * rz) / det;
        let mut step_v = (a * rz - c * rx) / det;
        // Keep the iterate physical.
        while h - step_h <= 0.0 || v - step_v <= 0.0 {
            step_h *= 0.5;
            step_v *= 0.5;
        }
        h -= step_h;
        v -= step_v;
    }
    panic!("shooting oracle did not converge for spans ({x_span}, {z_span})");
}

/// Oracle fairlead tension of `line` at platform pose `xi`, started from `guess`.
pub fn shooting_tension(
    line: &MooringLineParams,
    xi: &Vector6<f64>,
    guess: (f64, f64),
) -> (f64, f64, f64) {
    let fair = fairlead_position(xi, line);
    let d: Vector3<f64> = fair - line.anchor;
    let (h, v) = shooting_solution(
        line.length_unstretched,
        line.weight_submerged,
        line.ea,
        d.x.hypot(d.y),
        d.z,
        guess,
    );
    (h, v, h.hypot(v))
}

/// Oracle mooring force from per-line shooting solutions.
pub fn shooting_force(
    lines: &[MooringLineParams],
    xi: &Vector6<f64>,
    guesses: &[(f64, f64)],
) -> Vector6<f64> {
    let r = mooring_fd::mooring::rotation(xi[3], xi[4], xi[5]);
    let mut f = Vector6::zeros();
    for (line, &g) in lines.iter().zip(guesses) {
        let (h, v, _) = shooting_tension(line, xi, g);
        let arm = r * line.fairlead_body;
        let fair = fairlead_position(xi, line);
        let d = line.anchor - fair;
        let horiz = d.x.hypot(d.y);
        let force = Vector3::new(h * d.x / horiz, h * d.y / horiz, -v);
        let m = arm.cross(&force);
        f += Vector6::new(force.x, force.y, force.z, m.x, m.y, m.z);
    }
    f
}
