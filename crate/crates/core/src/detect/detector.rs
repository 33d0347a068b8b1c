use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use super::dare::{solve_dare_gain, DareSolution};
use super::stats::{baseline_statistics, chebyshev_threshold, ResidualStats};
use crate::error::{Error, Result};
use crate::io::{write_section, LineReader};
use crate::linalg;
use crate::linmodel::AssembledModel;
use crate::plant::RunRecord;
use crate::sysid::StateSpaceModel;

pub const DEFAULT_ALPHA: f64 = 6.0;
pub const DEFAULT_HOLD: usize = 3;
/// Healthy span used for the baseline [s].
pub const BASELINE_WINDOW: (f64, f64) = (200.0, 1400.0);

/// One predictor step: `yhat = C x`, `z = y - yhat`, `x+ = A x + B u + L z`.
/// All quantities are deviations from the operating point.
pub fn observer_step(
    sys: &StateSpaceModel,
    l_gain: &DMatrix<f64>,
    x_hat: &DVector<f64>,
    u: &DVector<f64>,
    y: &DVector<f64>,
) -> (DVector<f64>, DVector<f64>, DVector<f64>) {
    let y_hat = &sys.c * x_hat;
    let z = y - &y_hat;
    let next = &sys.a * x_hat + &sys.b * u + l_gain * &z;
    (next, y_hat, z)
}

/// Steady-state Kalman predictor on the assembled discrete model, working on
/// absolute signals.
#[derive(Debug, Clone)]
pub struct KalmanObserver {
    pub sys: StateSpaceModel,
    pub l_gain: DMatrix<f64>,
    pub u_eq: DVector<f64>,
    pub y_eq: DVector<f64>,
}

impl KalmanObserver {
    pub fn closed_loop_radius(&self) -> Result<f64> {
        linalg::spectral_radius(&(&self.sys.a - &self.l_gain * &self.sys.c))
    }

    /// Residual series for recorded absolute inputs and outputs, starting
    /// from the operating point.
    pub fn residuals(&self, u: &[[f64; 4]], y: &[[f64; 3]]) -> Vec<Vector3<f64>> {
        let mut x = DVector::zeros(self.sys.order());
        let mut out = Vec::with_capacity(u.len());
        for (uk, yk) in u.iter().zip(y) {
            let du = DVector::from_fn(4, |i, _| uk[i] - self.u_eq[i]);
            let dy = DVector::from_fn(3, |i, _| yk[i] - self.y_eq[i]);
            let (next, _, z) = observer_step(&self.sys, &self.l_gain, &x, &du, &dy);
            out.push(Vector3::new(z[0], z[1], z[2]));
            x = next;
        }
        out
    }
}

/// Calibrated detector: observer, noise covariances, baseline statistics and
/// threshold.
#[derive(Debug, Clone)]
pub struct DetectorModel {
    pub observer: KalmanObserver,
    pub q_cov: DMatrix<f64>,
    pub r_cov: DMatrix<f64>,
    pub stats: ResidualStats,
    pub mean_d: f64,
    pub std_d: f64,
    pub alpha: f64,
    pub threshold: f64,
    /// Not persisted.
    pub flags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationOptions {
    pub alpha: f64,
    pub window: (f64, f64),
    /// Measurement-noise standard deviations; `R = diag(noise^2)`.
    pub noise: [f64; 3],
    /// Accepted relative mismatch of innovation variances.
    pub tune_tol: f64,
    pub max_tune_iter: usize,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_ALPHA,
            window: BASELINE_WINDOW,
            noise: crate::plant::DEFAULT_NOISE,
            tune_tol: 0.2,
            max_tune_iter: 60,
        }
    }
}

/// Sample indices of `run` inside `window`.
pub(crate) fn window_range(run: &RunRecord, window: (f64, f64)) -> std::ops::Range<usize> {
    let eps = 1e-9 * run.dt_out;
    let start = run
        .t
        .iter()
        .position(|&t| t >= window.0 - eps)
        .unwrap_or(run.len());
    let end = run
        .t
        .iter()
        .rposition(|&t| t <= window.1 + eps)
        .map_or(start, |i| i + 1);
    start..end.max(start)
}

fn channel_variance(z: &[Vector3<f64>]) -> Vector3<f64> {
    let n = z.len() as f64;
    let mean = z.iter().fold(Vector3::zeros(), |a, v| a + v) / n;
    z.iter().fold(Vector3::zeros(), |a, v| {
        a + (v - mean).component_mul(&(v - mean))
    }) / (n - 1.0)
}

fn mean(z: &[Vector3<f64>]) -> Vector3<f64> {
    z.iter().fold(Vector3::zeros(), |a, v| a + v) / z.len() as f64
}

/// Constant output offset that cancels the mean residual `z_mean`.
///
/// In waves the truth settles slightly away from the calm-water operating
/// point (mean drift). A constant output shift `delta` moves the stationary
/// residual by `-(I - C (I - A + L C)^-1 L) delta`, so the trim solves that
/// 3x3 system.
fn output_trim(obs: &KalmanObserver, z_mean: &Vector3<f64>) -> Result<DVector<f64>> {
    let sys = &obs.sys;
    let n = sys.order();
    let a_cl = &sys.a - &obs.l_gain * &sys.c;
    let gain = (DMatrix::identity(n, n) - a_cl)
        .lu()
        .solve(&obs.l_gain)
        .ok_or_else(|| Error::Numerical("observer closed loop has a unit DC gain".into()))?;
    let m = DMatrix::identity(3, 3) - &sys.c * gain;
    m.lu()
        .solve(&DVector::from_column_slice(z_mean.as_slice()))
        .ok_or_else(|| Error::Numerical("residual offset map is singular".into()))
}

/// States carrying the process noise: rotor speed, surge and pitch pose.
///
/// The healthy model error is a slow output drift, which a random walk on the
/// measured states absorbs. Noise on the velocities would also let the filter
/// explain a mooring force step away as disturbance.
fn noise_states(model: &AssembledModel) -> Result<[usize; 3]> {
    match (model.blocks.range("rotor_speed"), model.blocks.range("xi")) {
        (Some(r), Some(x)) => Ok([r.start, x.start, x.start + 4]),
        _ => Err(Error::Config(
            "block map lacks rotor_speed or xi states".into(),
        )),
    }
}

/// Tune a diagonal `Q` on the healthy run, then collect the baseline.
///
/// `Q` has one entry per measured channel, on the state that drives it. Each
/// entry is rescaled until the observed innovation variance over the window
/// matches `C P C^T + R` within `tune_tol`.
pub fn calibrate_detector(
    model: &AssembledModel,
    run: &RunRecord,
    opts: &CalibrationOptions,
) -> Result<DetectorModel> {
    let sys = model.dt_model.clone();
    if (run.dt_out - sys.dt).abs() > 1e-9 * sys.dt {
        return Err(Error::Config(format!(
            "run step {} s differs from model step {} s",
            run.dt_out, sys.dt
        )));
    }
    if opts.noise.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
        return Err(Error::Config(
            "detector calibration needs positive measurement-noise standard deviations".into(),
        ));
    }
    let range = window_range(run, opts.window);
    if range.len() < super::stats::MIN_BASELINE_SAMPLES {
        return Err(Error::Config(format!(
            "baseline window {:?} s holds {} samples; at least {} are needed (run longer)",
            opts.window,
            range.len(),
            super::stats::MIN_BASELINE_SAMPLES
        )));
    }
    let n = sys.order();
    let r_cov =
        DMatrix::from_diagonal(&DVector::from_iterator(3, opts.noise.iter().map(|s| s * s)));
    let idx = noise_states(model)?;
    let u_eq = DVector::from_vec(model.op.u_eq().to_vec());
    let y_eq = DVector::from_vec(model.op.y_eq().to_vec());

    let build = |q: &[f64; 3]| -> Result<(DMatrix<f64>, DareSolution)> {
        let mut q_cov = DMatrix::zeros(n, n);
        for (k, &i) in idx.iter().enumerate() {
            q_cov[(i, i)] = q[k];
        }
        let sol = solve_dare_gain(&sys.a, &sys.c, &q_cov, &r_cov)?;
        Ok((q_cov, sol))
    };
    let observe = |sol: &DareSolution| KalmanObserver {
        sys: sys.clone(),
        l_gain: sol.l.clone(),
        u_eq: u_eq.clone(),
        y_eq: y_eq.clone(),
    };

    let mut q = [r_cov[(0, 0)], r_cov[(1, 1)], r_cov[(2, 2)]];
    let mut flags = Vec::new();
    let mut best: Option<(f64, [f64; 3])> = None;
    for it in 0..=opts.max_tune_iter {
        let (_, sol) = build(&q)?;
        let z = observe(&sol).residuals(&run.u, &run.y);
        let observed = channel_variance(&z[range.clone()]);
        let s = sol.innovation_covariance(&sys.c, &r_cov);
        let ratio: Vec<f64> = (0..3).map(|i| observed[i] / s[(i, i)]).collect();
        let worst = ratio.iter().map(|r| (r - 1.0).abs()).fold(0.0, f64::max);
        if best.is_none_or(|(w, _)| worst < w) {
            best = Some((worst, q));
        }
        if worst <= opts.tune_tol {
            flags.push(format!("q_tuned:iterations={it}"));
            break;
        }
        if it == opts.max_tune_iter {
            flags.push(format!("q_tuning_incomplete:worst_mismatch={worst:.3}"));
            break;
        }
        for i in 0..3 {
            q[i] *= ratio[i].powf(1.5).clamp(1e-2, 1e2);
        }
    }
    let q = best.expect("at least one tuning pass").1;
    let (q_cov, sol) = build(&q)?;
    let mut observer = observe(&sol);
    if observer.closed_loop_radius()? >= 1.0 {
        return Err(Error::Numerical(
            "observer closed loop is not stable".into(),
        ));
    }
    let z = observer.residuals(&run.u, &run.y);
    let shift = output_trim(&observer, &mean(&z[range.clone()]))?;
    observer.y_eq += &shift;
    flags.push(format!(
        "output_trim={:.3e},{:.3e},{:.3e}",
        shift[0], shift[1], shift[2]
    ));
    let z = observer.residuals(&run.u, &run.y);
    let base = baseline_statistics(&z[range], 0)?;
    let (threshold, _) = chebyshev_threshold(base.mean_d, base.std_d, opts.alpha)?;
    Ok(DetectorModel {
        observer,
        q_cov,
        r_cov,
        stats: base.stats,
        mean_d: base.mean_d,
        std_d: base.std_d,
        alpha: opts.alpha,
        threshold,
        flags,
    })
}

impl DetectorModel {
    /// Same observer and baseline with a different multiplier.
    pub fn with_alpha(mut self, alpha: f64) -> Result<Self> {
        self.threshold = chebyshev_threshold(self.mean_d, self.std_d, alpha)?.0;
        self.alpha = alpha;
        Ok(self)
    }

    pub fn write<W: Write>(&self, w: &mut W) -> Result<()> {
        self.observer.sys.write_exchange(w)?;
        let scalar = |v: f64| DMatrix::from_element(1, 1, v);
        let z_bar = DMatrix::from_column_slice(3, 1, self.stats.z_bar.as_slice());
        let sigma = DMatrix::from_column_slice(3, 3, self.stats.sigma.as_slice());
        write_section(w, "l_gain", &self.observer.l_gain)?;
        write_section(w, "q_cov", &self.q_cov)?;
        write_section(w, "r_cov", &self.r_cov)?;
        write_section(
            w,
            "u_eq",
            &DMatrix::from_row_slice(1, 4, self.observer.u_eq.as_slice()),
        )?;
        write_section(
            w,
            "y_eq",
            &DMatrix::from_row_slice(1, 3, self.observer.y_eq.as_slice()),
        )?;
        write_section(w, "zbar", &z_bar)?;
        write_section(w, "sigma", &sigma)?;
        write_section(w, "mean_d", &scalar(self.mean_d))?;
        write_section(w, "std_d", &scalar(self.std_d))?;
        write_section(w, "alpha", &scalar(self.alpha))?;
        write_section(w, "threshold", &scalar(self.threshold))
    }

    pub fn read<R: BufRead>(r: &mut LineReader<R>) -> Result<Self> {
        let sys = StateSpaceModel::read_exchange(r)?;
        let mut sec: HashMap<String, DMatrix<f64>> = HashMap::new();
        while let Some((name, m)) = r.section()? {
            sec.insert(name, m);
        }
        let mut take = |name: &str, shape: (usize, usize)| -> Result<DMatrix<f64>> {
            let m = sec
                .remove(name)
                .ok_or_else(|| Error::Parse(format!("calibration file lacks section `{name}`")))?;
            if m.shape() != shape {
                return Err(Error::Parse(format!(
                    "section `{name}` is {:?}, expected {shape:?}",
                    m.shape()
                )));
            }
            Ok(m)
        };
        let n = sys.order();
        let l_gain = take("l_gain", (n, 3))?;
        let q_cov = take("q_cov", (n, n))?;
        let r_cov = take("r_cov", (3, 3))?;
        let u_eq = DVector::from_column_slice(take("u_eq", (1, 4))?.as_slice());
        let y_eq = DVector::from_column_slice(take("y_eq", (1, 3))?.as_slice());
        let z_bar = Vector3::from_column_slice(take("zbar", (3, 1))?.as_slice());
        let sigma = Matrix3::from_column_slice(take("sigma", (3, 3))?.as_slice());
        let mean_d = take("mean_d", (1, 1))?[(0, 0)];
        let std_d = take("std_d", (1, 1))?[(0, 0)];
        let alpha = take("alpha", (1, 1))?[(0, 0)];
        let threshold = take("threshold", (1, 1))?[(0, 0)];
        if sys.n_inputs() != 4 || sys.n_outputs() != 3 {
            return Err(Error::Validation(
                "detector model must have 4 inputs and 3 outputs".into(),
            ));
        }
        let expected = chebyshev_threshold(mean_d, std_d, alpha)?.0;
        if (expected - threshold).abs() > 1e-12 * expected.abs().max(1.0) {
            return Err(Error::Validation(format!(
                "threshold {threshold} does not equal mean_d + alpha std_d = {expected}"
            )));
        }
        Ok(Self {
            observer: KalmanObserver {
                sys,
                l_gain,
                u_eq,
                y_eq,
            },
            q_cov,
            r_cov,
            stats: ResidualStats::new(z_bar, sigma)?,
            mean_d,
            std_d,
            alpha,
            threshold,
            flags: Vec::new(),
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write(&mut f)?;
        f.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|e| {
            Error::Config(format!(
                "cannot open calibration file {}: {e}",
                path.display()
            ))
        })?;
        Self::read(&mut LineReader::new(std::io::BufReader::new(f)))
    }
}
