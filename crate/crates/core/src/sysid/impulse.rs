use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hydro::HydroFrd;

/// Samples of an impulse response on a uniform time grid.
///
/// Sample `i` sits at `t = (start + i) * dt`, so negative start indices hold
/// the non-causal part. Shifts are kept as whole sample counts, which makes a
/// shift followed by its inverse exact.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpulseResponse {
    pub dt: f64,
    pub start: i64,
    pub h: Vec<DMatrix<f64>>,
    /// Accumulated forward shift in samples.
    pub shift: i64,
}

impl ImpulseResponse {
    /// A causal response whose first sample is at `t = 0`.
    pub fn causal(dt: f64, h: Vec<DMatrix<f64>>) -> Result<Self> {
        let r = Self {
            dt,
            start: 0,
            h,
            shift: 0,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::Validation(format!(
                "impulse response step must be > 0, got {}",
                self.dt
            )));
        }
        if self.h.len() < 2 {
            return Err(Error::Validation(
                "impulse response needs at least two samples".into(),
            ));
        }
        let shape = self.h[0].shape();
        if self.h.iter().any(|m| m.shape() != shape) {
            return Err(Error::Validation(
                "impulse response samples differ in shape".into(),
            ));
        }
        if self.h.iter().any(|m| m.iter().any(|v| !v.is_finite())) {
            return Err(Error::Validation(
                "impulse response has non-finite samples".into(),
            ));
        }
        Ok(())
    }

    pub fn t_shift(&self) -> f64 {
        self.shift as f64 * self.dt
    }

    pub fn t_start(&self) -> f64 {
        self.start as f64 * self.dt
    }

    pub fn time(&self, i: usize) -> f64 {
        (self.start + i as i64) as f64 * self.dt
    }

    pub fn shape(&self) -> (usize, usize) {
        self.h[0].shape()
    }

    /// Largest absolute entry over all samples.
    pub fn peak(&self) -> f64 {
        self.h.iter().map(|m| m.amax()).fold(0.0, f64::max)
    }

    /// Largest absolute entry at `t < 0` relative to the overall peak.
    pub fn noncausal_ratio(&self) -> f64 {
        let peak = self.peak();
        if peak == 0.0 {
            return 0.0;
        }
        let pre = self
            .h
            .iter()
            .enumerate()
            .filter(|(i, _)| self.start + (*i as i64) < 0)
            .map(|(_, m)| m.amax())
            .fold(0.0, f64::max);
        pre / peak
    }

    /// Samples at `t >= 0`.
    pub fn causal_samples(&self) -> &[DMatrix<f64>] {
        let skip = (-self.start).max(0) as usize;
        &self.h[skip.min(self.h.len())..]
    }

    /// Shift by a whole number of samples (positive delays the response).
    pub fn shifted(&self, samples: i64) -> Self {
        Self {
            dt: self.dt,
            start: self.start + samples,
            h: self.h.clone(),
            shift: self.shift + samples,
        }
    }
}

/// Radiation FRF `K(w) = B(w) + j w (A(w) - A_inf)` at every grid point.
pub fn ogilvie_frf(frd: &HydroFrd) -> Result<Vec<DMatrix<Complex64>>> {
    frd.validate()?;
    Ok(frd
        .omega
        .iter()
        .enumerate()
        .map(|(i, &w)| {
            let da = &frd.a_omega[i] - &frd.a_inf;
            DMatrix::from_fn(6, 6, |r, c| {
                Complex64::new(frd.b_omega[i][(r, c)], w * da[(r, c)])
            })
        })
        .collect())
}

/// How an FRF is brought back to the time domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelTransform {
    /// `k(t) = (2/pi) int Re K(w) cos(w t) dw` on `t >= 0`: causal by construction.
    Cosine,
    /// `h(t) = (1/pi) int Re[X(w) e^{j w t}] dw` on `-T..T`: the inverse
    /// transform of the Hermitian extension of `X`.
    Hermitian,
}

/// Trapezoidal-quadrature inverse transform of FRF samples on a uniform grid.
///
/// `duration` is the time span `T`; the cosine kernel covers `[0, T]`, the
/// Hermitian kernel `[-T, T]`.
pub fn impulse_response_from_frd(
    omega: &[f64],
    k: &[DMatrix<Complex64>],
    dt: f64,
    duration: f64,
    transform: KernelTransform,
) -> Result<ImpulseResponse> {
    if omega.len() < 2 || omega.len() != k.len() {
        return Err(Error::Config(
            "FRF needs at least two samples, one per frequency".into(),
        ));
    }
    if !(dt > 0.0 && duration > dt) {
        return Err(Error::Config(format!(
            "bad kernel time grid dt = {dt}, duration = {duration}"
        )));
    }
    let n = omega.len();
    let dw = (omega[n - 1] - omega[0]) / (n - 1) as f64;
    if omega
        .windows(2)
        .any(|w| ((w[1] - w[0]) - dw).abs() > 1e-9 * dw.max(1.0))
    {
        return Err(Error::Config(
            "inverse transform needs a uniform frequency grid".into(),
        ));
    }
    if PI / dt < omega[n - 1] {
        return Err(Error::Config(format!(
            "dt = {dt} s puts Nyquist ({} rad/s) below the top grid frequency {}",
            PI / dt,
            omega[n - 1]
        )));
    }
    let weight = |i: usize| if i == 0 || i == n - 1 { 0.5 * dw } else { dw };
    let (rows, cols) = k[0].shape();
    let steps = (duration / dt).round() as i64;
    let (start, count) = match transform {
        KernelTransform::Cosine => (0, steps + 1),
        KernelTransform::Hermitian => (-steps, 2 * steps + 1),
    };
    let h = (0..count)
        .map(|s| {
            let t = (start + s) as f64 * dt;
            let mut m = DMatrix::zeros(rows, cols);
            for (i, (&w, ki)) in omega.iter().zip(k).enumerate() {
                let wt = weight(i);
                match transform {
                    KernelTransform::Cosine => {
                        let f = 2.0 / PI * wt * (w * t).cos();
                        m.zip_apply(ki, |acc, z| *acc += f * z.re);
                    }
                    KernelTransform::Hermitian => {
                        let e = Complex64::from_polar(wt / PI, w * t);
                        m.zip_apply(ki, |acc, z| *acc += (z * e).re);
                    }
                }
            }
            m
        })
        .collect();
    let r = ImpulseResponse {
        dt,
        start,
        h,
        shift: 0,
    };
    r.validate()?;
    Ok(r)
}

/// Shift the response forward by `t_d` seconds, `h'(t) = h(t - t_d)`.
pub fn causalize(h: &ImpulseResponse, t_d: f64) -> Result<ImpulseResponse> {
    let n = grid_steps(t_d, h.dt)?;
    Ok(h.shifted(n))
}

/// Non-causal peak ratio after each candidate shift.
pub fn scan_shift(h: &ImpulseResponse, candidates: &[f64]) -> Result<Vec<(f64, f64)>> {
    candidates
        .iter()
        .map(|&t| Ok((t, causalize(h, t)?.noncausal_ratio())))
        .collect()
}

pub(crate) fn grid_steps(t_d: f64, dt: f64) -> Result<i64> {
    if !(t_d >= 0.0) {
        return Err(Error::Config(format!("shift must be >= 0, got {t_d}")));
    }
    let n = (t_d / dt).round();
    if (n * dt - t_d).abs() > 1e-9 * t_d.max(1.0) {
        return Err(Error::Config(format!(
            "shift {t_d} s is not a multiple of the sample step {dt} s"
        )));
    }
    Ok(n as i64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hydro::{default_dataset, linspace};

    fn scalar_frf(v: &[Complex64]) -> Vec<DMatrix<Complex64>> {
        v.iter().map(|&z| DMatrix::from_element(1, 1, z)).collect()
    }

    #[test]
    fn ogilvie_constant_damping_is_real() {
        let mut frd = default_dataset();
        for i in 0..frd.len() {
            frd.b_omega[i] = DMatrix::from_diagonal_element(6, 6, 2.0);
            frd.a_omega[i] = frd.a_inf.clone();
        }
        for k in ogilvie_frf(&frd).unwrap() {
            assert!(k.iter().all(|z| z.im == 0.0));
            assert_eq!(k[(3, 3)].re, 2.0);
        }
    }

    #[test]
    fn ogilvie_inverse_frequency_mass_is_constant_imaginary() {
        let mut frd = default_dataset();
        let delta = 7.0e5;
        for i in 0..frd.len() {
            let w = frd.omega[i];
            frd.b_omega[i] = DMatrix::zeros(6, 6);
            frd.a_omega[i] = &frd.a_inf + DMatrix::from_diagonal_element(6, 6, delta / w);
        }
        for k in ogilvie_frf(&frd).unwrap() {
            assert!((k[(2, 2)].im - delta).abs() < 1e-9 * delta);
            assert_eq!(k[(2, 2)].re, 0.0);
        }
    }

    #[test]
    fn ogilvie_recovers_damping() {
        let frd = default_dataset();
        for (k, b) in ogilvie_frf(&frd).unwrap().iter().zip(&frd.b_omega) {
            assert_eq!(&k.map(|z| z.re), b);
        }
    }

    #[test]
    fn zero_frf_gives_zero_kernel() {
        let w = linspace(0.1, 2.0, 50);
        let k = scalar_frf(&vec![Complex64::new(0.0, 0.0); 50]);
        for t in [KernelTransform::Cosine, KernelTransform::Hermitian] {
            let h = impulse_response_from_frd(&w, &k, 0.1, 10.0, t).unwrap();
            assert_eq!(h.peak(), 0.0);
        }
    }

    #[test]
    fn constant_band_kernel_integral_matches_quadrature() {
        // Exact oracle: integral over [0, T] of (2/pi) sum w_i b0 cos(w_i t) dt
        // is (2/pi) b0 sum w_i sin(w_i T) / w_i.
        let w = linspace(0.05, 3.0, 200);
        let b0 = 4.0;
        let k = scalar_frf(&vec![Complex64::new(b0, 0.0); 200]);
        let dt = 0.01;
        let h = impulse_response_from_frd(&w, &k, dt, 20.0, KernelTransform::Cosine).unwrap();
        let vals: Vec<f64> = h.h.iter().map(|m| m[(0, 0)]).collect();
        let trap: f64 = vals.windows(2).map(|p| 0.5 * dt * (p[0] + p[1])).sum();
        let dw = w[1] - w[0];
        let exact: f64 = w
            .iter()
            .enumerate()
            .map(|(i, &wi)| {
                let wt = if i == 0 || i == 199 { 0.5 * dw } else { dw };
                2.0 / PI * b0 * wt * (wi * 20.0).sin() / wi
            })
            .sum();
        assert!((trap - exact).abs() < 1e-3 * b0, "{trap} vs {exact}");
        // Mass concentrates near t = 0.
        let peak_idx = vals
            .iter()
            .enumerate()
            .fold(
                (0, 0.0),
                |a, (i, v)| if v.abs() > a.1 { (i, v.abs()) } else { a },
            )
            .0;
        assert_eq!(peak_idx, 0);
    }

    #[test]
    fn nyquist_violation_is_config_error() {
        let w = linspace(0.1, 3.0, 20);
        let k = scalar_frf(&vec![Complex64::new(1.0, 0.0); 20]);
        let r = impulse_response_from_frd(&w, &k, 1.5, 30.0, KernelTransform::Cosine);
        assert!(matches!(r, Err(Error::Config(_))));
    }

    #[test]
    fn shift_then_unshift_is_exact() {
        let w = linspace(0.1, 3.0, 40);
        let k = scalar_frf(
            &w.iter()
                .map(|&x| Complex64::new(x.cos(), x.sin()))
                .collect::<Vec<_>>(),
        );
        let h = impulse_response_from_frd(&w, &k, 0.1, 10.0, KernelTransform::Hermitian).unwrap();
        assert_eq!(causalize(&h, 0.0).unwrap(), h);
        let s = causalize(&h, 3.0).unwrap();
        assert!((s.t_shift() - 3.0).abs() < 1e-12);
        assert_eq!(s.shifted(-30), h);
    }

    #[test]
    fn misaligned_shift_rejected() {
        let h = ImpulseResponse::causal(0.1, vec![DMatrix::zeros(1, 1); 4]).unwrap();
        assert!(matches!(causalize(&h, 0.25), Err(Error::Config(_))));
        assert!(matches!(causalize(&h, -0.1), Err(Error::Config(_))));
    }
}
