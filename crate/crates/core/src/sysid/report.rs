use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::Result;

use super::impulse::ImpulseResponse;
use super::ss::StateSpaceModel;

/// Frequency band where wave energy lives for the reference sea state [rad/s].
pub const ERROR_BAND: (f64, f64) = (0.3, 1.8);

/// Quality summary of an identified model.
#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub order: usize,
    pub channels: Vec<String>,
    /// Per output channel: band maximum of the row error norm over the band
    /// maximum of the reference row norm.
    pub hinf_band: Vec<f64>,
    /// Frobenius error energy over reference energy across the band, square-rooted.
    pub h2_band: f64,
    pub stable: bool,
    /// Relative residual on the fitting data.
    pub fit_error: f64,
    pub flags: Vec<String>,
}

impl FitReport {
    /// Compare `model` against reference FRF samples on `omega`, restricted to
    /// frequencies inside `band`.
    pub fn against_frf(
        model: &StateSpaceModel,
        omega: &[f64],
        reference: &[DMatrix<Complex64>],
        band: (f64, f64),
        fit_error: f64,
        flags: Vec<String>,
    ) -> Result<Self> {
        let p = model.n_outputs();
        let mut err_peak = vec![0.0f64; p];
        let mut ref_peak = vec![0.0f64; p];
        let (mut e2, mut r2) = (0.0, 0.0);
        for (&w, g_ref) in omega.iter().zip(reference) {
            if w < band.0 || w > band.1 {
                continue;
            }
            let g = model.frf_at(w)?;
            let diff = &g - g_ref;
            for i in 0..p {
                err_peak[i] = err_peak[i].max(diff.row(i).norm());
                ref_peak[i] = ref_peak[i].max(g_ref.row(i).norm());
            }
            e2 += diff.norm_squared();
            r2 += g_ref.norm_squared();
        }
        let ratio = |e: f64, r: f64| {
            if r > 0.0 {
                e / r
            } else if e > 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        };
        Ok(Self {
            order: model.order(),
            channels: model.output_labels.clone(),
            hinf_band: err_peak
                .iter()
                .zip(&ref_peak)
                .map(|(&e, &r)| ratio(e, r))
                .collect(),
            h2_band: ratio(e2.sqrt(), r2.sqrt()),
            stable: model.is_stable()?,
            fit_error,
            flags,
        })
    }

    /// Report for a fit to discrete Markov parameters: band errors against the
    /// data's own transform `sum_k h_k e^{-j w k dt}`.
    pub fn for_markov(
        model: &StateSpaceModel,
        h: &ImpulseResponse,
        flags: Vec<String>,
    ) -> Result<Self> {
        let data = h.causal_samples();
        let band = band_grid(h.dt);
        let reference: Vec<DMatrix<Complex64>> =
            band.iter().map(|&w| markov_frf(data, w, h.dt)).collect();
        Self::against_frf(
            model,
            &band,
            &reference,
            ERROR_BAND,
            markov_error(model, data),
            flags,
        )
    }

    pub fn max_hinf(&self) -> f64 {
        self.hinf_band.iter().copied().fold(0.0, f64::max)
    }

    /// Flat `key=value` text, one entry per line.
    pub fn to_key_value(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "order={}", self.order);
        let _ = writeln!(s, "stable={}", self.stable);
        for (c, e) in self.channels.iter().zip(&self.hinf_band) {
            let _ = writeln!(s, "hinf_band_{c}={e:.6e}");
        }
        let _ = writeln!(s, "hinf_band_max={:.6e}", self.max_hinf());
        let _ = writeln!(s, "h2_band={:.6e}", self.h2_band);
        let _ = writeln!(s, "fit_error={:.6e}", self.fit_error);
        let _ = writeln!(s, "flags={}", self.flags.join(";"));
        s
    }
}

fn band_grid(dt: f64) -> Vec<f64> {
    let top = ERROR_BAND.1.min(0.99 * std::f64::consts::PI / dt);
    crate::hydro::linspace(ERROR_BAND.0.min(top), top, 61)
}

fn markov_frf(y: &[DMatrix<f64>], w: f64, dt: f64) -> DMatrix<Complex64> {
    let (p, m) = y[0].shape();
    let mut g = DMatrix::<Complex64>::zeros(p, m);
    for (k, yk) in y.iter().enumerate() {
        let e = Complex64::from_polar(1.0, -w * dt * k as f64);
        g.zip_apply(yk, |acc, v| *acc += e * v);
    }
    g
}

/// `sqrt(sum ||Y_k - Y_model_k||^2 / sum ||Y_k||^2)` over the given samples.
pub fn markov_error(model: &StateSpaceModel, y: &[DMatrix<f64>]) -> f64 {
    let ym = model.markov_parameters(y.len());
    let num: f64 = y.iter().zip(&ym).map(|(a, b)| (a - b).norm_squared()).sum();
    let den: f64 = y.iter().map(|a| a.norm_squared()).sum();
    if den > 0.0 {
        (num / den).sqrt()
    } else if num > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}
