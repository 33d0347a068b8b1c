//! Quasi-static elastic catenary with frictionless seabed contact.
//!
//! With horizontal tension `H`, fairlead vertical tension `V`, unstretched
//! length `L`, submerged weight `w` and axial stiffness `EA`, the spans from
//! anchor to fairlead are, while part of the line rests on the seabed
//! (`V < w L`):
//!
//! ```text
//! X = L - V/w + (H/w) asinh(V/H) + H L / EA
//! Z = (H/w) (sqrt(1 + (V/H)^2) - 1) + V^2 / (2 EA w)
//! ```
//!
//! and, when the whole line is lifted (`V_a = V - w L >= 0`):
//!
//! ```text
//! X = (H/w) (asinh(V/H) - asinh(V_a/H)) + H L / EA
//! Z = (H/w) (sqrt(1 + (V/H)^2) - sqrt(1 + (V_a/H)^2)) + (V L - w L^2 / 2) / EA
//! ```
//!
//! `Z(V)` is increasing for fixed `H`, so `V` is found by a safeguarded Newton
//! iteration; `X(H)` along that curve is increasing, so `H` is found by a
//! bracketed Brent (bisection/secant/inverse-quadratic) iteration.

use crate::error::{Error, Result};

/// Relative tolerance on the horizontal tension.
pub const H_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatenarySolution {
    /// Horizontal tension [N].
    pub h: f64,
    /// Vertical tension at the fairlead [N].
    pub v: f64,
    /// Fairlead tension magnitude [N].
    pub tension: f64,
    /// Unstretched length resting on the seabed [m].
    pub seabed_length: f64,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Line {
    pub length: f64,
    pub w: f64,
    pub ea: f64,
}

impl Line {
    fn z_of_v(&self, h: f64, v: f64) -> (f64, f64) {
        let (l, w, ea) = (self.length, self.w, self.ea);
        let x = v / h;
        let r = (1.0 + x * x).sqrt();
        if v < w * l {
            // sqrt(1 + x^2) - 1 without cancellation.
            let z = h / w * (x * x / (r + 1.0)) + v * v / (2.0 * ea * w);
            let dz = x / r / w + v / (ea * w);
            (z, dz)
        } else {
            let xa = (v - w * l) / h;
            let ra = (1.0 + xa * xa).sqrt();
            let z = h / w * (r - ra) + (v * l - 0.5 * w * l * l) / ea;
            let dz = (x / r - xa / ra) / w + l / ea;
            (z, dz)
        }
    }

    fn x_of(&self, h: f64, v: f64) -> f64 {
        let (l, w, ea) = (self.length, self.w, self.ea);
        if v < w * l {
            l - v / w + h / w * (v / h).asinh() + h * l / ea
        } else {
            h / w * ((v / h).asinh() - ((v - w * l) / h).asinh()) + h * l / ea
        }
    }

    /// Vertical fairlead tension that closes the vertical span `z` at `h > 0`.
    fn v_for(&self, h: f64, z: f64, hint: Option<f64>) -> Result<f64> {
        let mut lo = 0.0;
        let mut hi = hint
            .map(|v| 2.0 * v)
            .unwrap_or(0.0)
            .max(self.w * z)
            .max(f64::MIN_POSITIVE);
        let mut grow = 0;
        while self.z_of_v(h, hi).0 < z {
            lo = hi;
            hi *= 2.0;
            grow += 1;
            if grow > 200 {
                return Err(Error::Numerical(format!(
                    "vertical tension unbounded at H = {h}"
                )));
            }
        }
        let mut v = hint
            .filter(|&v| v > lo && v < hi)
            .unwrap_or(0.5 * (lo + hi));
        for _ in 0..200 {
            let (zv, dz) = self.z_of_v(h, v);
            let f = zv - z;
            if f > 0.0 {
                hi = v;
            } else {
                lo = v;
            }
            let mut next = v - f / dz;
            if !(next > lo && next < hi) || !next.is_finite() {
                next = 0.5 * (lo + hi);
            }
            if (next - v).abs() <= 1e-15 * v.abs() || hi - lo <= 1e-15 * hi {
                return Ok(next);
            }
            v = next;
        }
        Ok(v)
    }
}

/// Brent root finder on a bracket with `f(a)` and `f(b)` of opposite sign.
fn brent<F: FnMut(f64) -> Result<f64>>(
    mut f: F,
    mut a: f64,
    mut b: f64,
    mut fa: f64,
    mut fb: f64,
    rtol: f64,
) -> Result<f64> {
    if fa.abs() < fb.abs() {
        std::mem::swap(&mut a, &mut b);
        std::mem::swap(&mut fa, &mut fb);
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..300 {
        if fb == 0.0 {
            return Ok(b);
        }
        if (fb > 0.0) == (fc > 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * rtol * b.abs();
        let m = 0.5 * (c - b);
        if m.abs() <= tol {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b)?;
    }
    Err(Error::Numerical(
        "catenary root finder did not converge".into(),
    ))
}

/// Solve for the line tensions given the horizontal and vertical spans from
/// anchor to fairlead. `hint` is a previous `(H, V)` solution used to start
/// the iterations near the answer.
pub(crate) fn solve_spans(
    line: Line,
    x_span: f64,
    z_span: f64,
    hint: Option<(f64, f64)>,
) -> Result<CatenarySolution> {
    if !(line.w > 0.0 && line.ea > 0.0 && line.length > 0.0) {
        return Err(Error::Validation(
            "line weight, stiffness and length must be > 0".into(),
        ));
    }
    if !(z_span > 0.0) {
        return Err(Error::Numerical(format!(
            "fairlead is not above the seabed (vertical span {z_span:.6} m)"
        )));
    }
    if !(x_span >= 0.0 && x_span.is_finite()) {
        return Err(Error::Numerical(format!(
            "invalid horizontal span {x_span}"
        )));
    }
    let h_min = 1e-12 * line.w * line.length;
    let v_hint = hint.map(|h| h.1);
    let x_at = |h: f64, vh: Option<f64>| -> Result<(f64, f64)> {
        let v = line.v_for(h, z_span, vh)?;
        Ok((line.x_of(h, v), v))
    };
    let (x_low, _) = x_at(h_min, None)?;
    if x_span <= x_low {
        return Ok(slack_hanging(line, z_span));
    }
    let mut last_v = v_hint;
    let mut f = |h: f64| -> Result<f64> {
        let (x, v) = x_at(h, last_v)?;
        last_v = Some(v);
        Ok(x - x_span)
    };
    // Bracket the root, starting near the hint when there is one.
    let start = hint
        .map(|h| h.0)
        .filter(|&h| h > h_min)
        .unwrap_or(line.w * line.length);
    let f_start = f(start)?;
    let (mut lo, mut f_lo, mut hi, mut f_hi);
    if f_start > 0.0 {
        hi = start;
        f_hi = f_start;
        let mut step = 1e-3;
        loop {
            lo = (start * (1.0 - step)).max(h_min);
            f_lo = if lo == h_min { x_low - x_span } else { f(lo)? };
            if f_lo <= 0.0 {
                break;
            }
            hi = lo;
            f_hi = f_lo;
            step = (step * 4.0).min(1.0);
        }
    } else {
        lo = start;
        f_lo = f_start;
        // Tension beyond EA (strain above 100%) is outside the elastic model.
        let h_cap = line.ea;
        let mut step = 1e-3;
        loop {
            hi = (start * (1.0 + step)).min(h_cap);
            f_hi = f(hi)?;
            if f_hi >= 0.0 {
                break;
            }
            if hi >= h_cap {
                return Err(Error::Numerical(format!(
                    "no catenary solution: spans ({x_span:.3}, {z_span:.3}) m exceed the reach of \
                     a {:.3} m line (EA = {:.3e} N)",
                    line.length, line.ea
                )));
            }
            lo = hi;
            f_lo = f_hi;
            step *= 4.0;
        }
    }
    let h = if f_lo == 0.0 {
        lo
    } else if f_hi == 0.0 {
        hi
    } else {
        brent(&mut f, lo, hi, f_lo, f_hi, H_REL_TOL)?
    };
    let v = line.v_for(h, z_span, last_v)?;
    let seabed = if v < line.w * line.length {
        line.length - v / line.w
    } else {
        0.0
    };
    Ok(CatenarySolution {
        h,
        v,
        tension: h.hypot(v),
        seabed_length: seabed,
    })
}

/// Zero horizontal tension: the line hangs vertically and the rest lies slack.
fn slack_hanging(line: Line, z_span: f64) -> CatenarySolution {
    // Hanging length s stretches to z: s + w s^2 / (2 EA) = z.
    let s = 2.0 * z_span / (1.0 + (1.0 + 2.0 * line.w * z_span / line.ea).sqrt());
    if s <= line.length {
        let v = line.w * s;
        CatenarySolution {
            h: 0.0,
            v,
            tension: v,
            seabed_length: line.length - s,
        }
    } else {
        let l = line.length;
        let v = (z_span - l) * line.ea / l + 0.5 * line.w * l;
        CatenarySolution {
            h: 0.0,
            v,
            tension: v.abs(),
            seabed_length: 0.0,
        }
    }
}
