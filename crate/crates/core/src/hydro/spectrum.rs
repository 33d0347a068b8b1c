use std::f64::consts::PI;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const GRAVITY: f64 = 9.81;

/// Irregular sea state described by a JONSWAP spectrum on a uniform
/// angular-frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveSpec {
    /// Significant wave height [m]. Zero is accepted and means a calm sea.
    pub hs: f64,
    /// Peak period [s].
    pub tp: f64,
    /// Peak-enhancement factor [-].
    pub gamma: f64,
    pub omega_min: f64,
    pub omega_max: f64,
    pub n_omega: usize,
    pub seed: u64,
}

impl Default for WaveSpec {
    fn default() -> Self {
        Self {
            hs: 2.66,
            tp: 7.42,
            gamma: 3.3,
            omega_min: 0.05,
            omega_max: 3.0,
            n_omega: 200,
            seed: 1,
        }
    }
}

impl WaveSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.hs >= 0.0 && self.hs.is_finite()) {
            return Err(Error::Validation(format!(
                "hs must be >= 0, got {}",
                self.hs
            )));
        }
        if !(self.tp > 0.0) {
            return Err(Error::Validation(format!(
                "tp must be > 0, got {}",
                self.tp
            )));
        }
        if !(self.gamma >= 1.0) {
            return Err(Error::Validation(format!(
                "gamma must be >= 1, got {}",
                self.gamma
            )));
        }
        if !(self.omega_min > 0.0 && self.omega_min < self.omega_max) {
            return Err(Error::Validation(format!(
                "frequency grid needs 0 < omega_min < omega_max, got [{}, {}]",
                self.omega_min, self.omega_max
            )));
        }
        if self.n_omega < 2 {
            return Err(Error::Validation(
                "frequency grid needs at least two points".into(),
            ));
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        linspace(self.omega_min, self.omega_max, self.n_omega)
    }

    pub fn d_omega(&self) -> f64 {
        (self.omega_max - self.omega_min) / (self.n_omega - 1) as f64
    }

    pub fn peak_frequency(&self) -> f64 {
        2.0 * PI / self.tp
    }
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| lo + step * i as f64).collect()
}

/// JONSWAP spectrum with its energy scale fixed so that `4 sqrt(sum S dw)`
/// over the spec's grid equals `hs` exactly.
#[derive(Debug, Clone)]
pub struct Jonswap {
    spec: WaveSpec,
    alpha: f64,
}

impl Jonswap {
    pub fn new(spec: &WaveSpec) -> Result<Self> {
        spec.validate()?;
        let dw = spec.d_omega();
        let m0_unit: f64 = spec.grid().iter().map(|&w| shape(spec, w) * dw).sum();
        if !(m0_unit > 0.0) {
            return Err(Error::Config(
                "JONSWAP shape has no energy on the frequency grid".into(),
            ));
        }
        let alpha = (spec.hs / 4.0).powi(2) / m0_unit;
        Ok(Self {
            spec: spec.clone(),
            alpha,
        })
    }

    /// Spectral density [m^2 s / rad].
    pub fn density(&self, omega: f64) -> Result<f64> {
        if !(omega > 0.0) {
            return Err(Error::Domain(format!(
                "spectral frequency must be > 0, got {omega}"
            )));
        }
        Ok(self.alpha * shape(&self.spec, omega))
    }

    /// Zeroth moment on the grid, `sum S(w_i) dw`.
    pub fn grid_variance(&self) -> f64 {
        let dw = self.spec.d_omega();
        self.spec
            .grid()
            .iter()
            .map(|&w| self.alpha * shape(&self.spec, w) * dw)
            .sum()
    }
}

fn shape(spec: &WaveSpec, omega: f64) -> f64 {
    let wp = spec.peak_frequency();
    let sigma = if omega <= wp { 0.07 } else { 0.09 };
    let r = (-(omega - wp).powi(2) / (2.0 * sigma * sigma * wp * wp)).exp();
    GRAVITY * GRAVITY * omega.powi(-5) * (-1.25 * (wp / omega).powi(4)).exp() * spec.gamma.powf(r)
}

/// JONSWAP spectral density at `omega` for the given sea state.
pub fn jonswap_spectrum(spec: &WaveSpec, omega: f64) -> Result<f64> {
    Jonswap::new(spec)?.density(omega)
}

/// Sampled wave-elevation time series.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveRealization {
    pub dt: f64,
    pub eta: Vec<f64>,
    pub seed: u64,
}

impl WaveRealization {
    /// Elevation series of a calm sea.
    pub fn calm(dt: f64, n: usize) -> Self {
        Self {
            dt,
            eta: vec![0.0; n],
            seed: 0,
        }
    }

    pub fn duration(&self) -> f64 {
        (self.eta.len().saturating_sub(1)) as f64 * self.dt
    }

    /// Linear interpolation between samples; held constant past the ends.
    pub fn at(&self, t: f64) -> f64 {
        if self.eta.is_empty() {
            return 0.0;
        }
        let x = t / self.dt;
        if x <= 0.0 {
            return self.eta[0];
        }
        let i = x.floor() as usize;
        if i + 1 >= self.eta.len() {
            return *self.eta.last().unwrap();
        }
        let f = x - i as f64;
        self.eta[i] + f * (self.eta[i + 1] - self.eta[i])
    }

    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "t,eta")?;
        for (k, e) in self.eta.iter().enumerate() {
            writeln!(
                w,
                "{},{}",
                crate::io::sig(k as f64 * self.dt, 9),
                crate::io::sig(*e, 9)
            )?;
        }
        Ok(())
    }
}

/// Random-phase superposition of the discretized JONSWAP spectrum:
/// `eta(t) = sum_i sqrt(2 S(w_i) dw) cos(w_i t + phi_i)` with phases drawn
/// from a ChaCha8 stream seeded by `spec.seed`.
pub fn realize_wave_elevation(spec: &WaveSpec, dt: f64, duration: f64) -> Result<WaveRealization> {
    if !(dt > 0.0) {
        return Err(Error::Config(format!(
            "wave sample step must be > 0, got {dt}"
        )));
    }
    if !(duration >= 10.0 * spec.tp) {
        return Err(Error::Config(format!(
            "wave duration {duration} s is shorter than ten peak periods ({} s)",
            10.0 * spec.tp
        )));
    }
    let jonswap = Jonswap::new(spec)?;
    let dw = spec.d_omega();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let comps: Vec<(f64, f64, f64)> = spec
        .grid()
        .into_iter()
        .map(|w| {
            let amp = (2.0 * jonswap.density(w).expect("grid is positive") * dw).sqrt();
            let phase = rng.random::<f64>() * 2.0 * PI;
            (w, amp, phase)
        })
        .collect();
    let n = (duration / dt + 1e-9).floor() as usize + 1;
    let eta = (0..n)
        .map(|k| {
            let t = k as f64 * dt;
            comps.iter().map(|&(w, a, p)| a * (w * t + p).cos()).sum()
        })
        .collect();
    Ok(WaveRealization {
        dt,
        eta,
        seed: spec.seed,
    })
}
