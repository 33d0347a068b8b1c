use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;

use super::impulse::ImpulseResponse;
use super::report::FitReport;
use super::ss::StateSpaceModel;

/// Data a model is refined against.
#[derive(Debug, Clone)]
pub enum FitData {
    /// Markov parameters (samples at `t >= 0`; sample 0 is the feedthrough).
    Impulse(ImpulseResponse),
    /// One experiment from zero initial state: `u` is `N x m`, `y` is `N x p`.
    InputOutput { u: DMatrix<f64>, y: DMatrix<f64> },
}

#[derive(Debug, Clone, Copy)]
pub struct PemOptions {
    pub max_iter: usize,
    /// Stop when an accepted step lowers the cost by less than this fraction.
    pub tol: f64,
}

impl Default for PemOptions {
    fn default() -> Self {
        Self {
            max_iter: 50,
            tol: 1e-9,
        }
    }
}

struct Experiments {
    runs: Vec<(DMatrix<f64>, DMatrix<f64>)>,
    weights: Vec<f64>,
    norm: f64,
}

impl Experiments {
    fn new(data: &FitData, m: usize, p: usize) -> Result<Self> {
        let runs = match data {
            FitData::Impulse(h) => {
                let y = h.causal_samples();
                if h.shape() != (p, m) {
                    return Err(Error::Validation(
                        "impulse data does not match model dimensions".into(),
                    ));
                }
                (0..m)
                    .map(|j| {
                        let mut u = DMatrix::zeros(y.len(), m);
                        u[(0, j)] = 1.0;
                        let yt = DMatrix::from_fn(y.len(), p, |k, i| y[k][(i, j)]);
                        (u, yt)
                    })
                    .collect::<Vec<_>>()
            }
            FitData::InputOutput { u, y } => {
                if u.ncols() != m || y.ncols() != p || u.nrows() != y.nrows() {
                    return Err(Error::Validation(
                        "input/output data does not match model dimensions".into(),
                    ));
                }
                vec![(u.clone(), y.clone())]
            }
        };
        let weights: Vec<f64> = (0..p)
            .map(|i| {
                let ss: f64 = runs.iter().map(|(_, y)| y.column(i).norm_squared()).sum();
                if ss > 0.0 {
                    1.0 / ss.sqrt()
                } else {
                    1.0
                }
            })
            .collect();
        let norm: f64 = runs
            .iter()
            .map(|(_, y)| {
                (0..p)
                    .map(|i| (weights[i] * y.column(i).norm()).powi(2))
                    .sum::<f64>()
            })
            .sum();
        Ok(Self {
            runs,
            weights,
            norm,
        })
    }

    fn residual_len(&self) -> usize {
        self.runs.iter().map(|(_, y)| y.len()).sum()
    }

    /// Weighted residual vector `W (y_model - y)`.
    fn residual(&self, model: &StateSpaceModel) -> DVector<f64> {
        let mut r = DVector::zeros(self.residual_len());
        let mut off = 0;
        for (u, y) in &self.runs {
            let ym = model.simulate(u);
            let p = y.ncols();
            for k in 0..y.nrows() {
                for i in 0..p {
                    r[off + k * p + i] = self.weights[i] * (ym[(k, i)] - y[(k, i)]);
                }
            }
            off += y.len();
        }
        r
    }

    fn cost(&self, model: &StateSpaceModel) -> f64 {
        let r = self.residual(model).norm_squared();
        if self.norm > 0.0 {
            r / self.norm
        } else {
            r
        }
    }

    /// Jacobian of the weighted residual with respect to `vec(A), vec(B), vec(C)`
    /// (row-major), by forward sensitivity recursions.
    fn jacobian(&self, model: &StateSpaceModel) -> DMatrix<f64> {
        let (n, m, p) = (model.order(), model.n_inputs(), model.n_outputs());
        let np = n * n + n * m + p * n;
        let mut jac = DMatrix::zeros(self.residual_len(), np);
        let mut off = 0;
        for (u, y) in &self.runs {
            let steps = y.nrows();
            // State trajectory x_k.
            let mut xs = DMatrix::zeros(steps, n);
            let mut x = DVector::zeros(n);
            for k in 0..steps {
                xs.row_mut(k).copy_from(&x.transpose());
                x = &model.a * &x + &model.b * u.row(k).transpose();
            }
            // A and B entries: dx_{k+1} = A dx_k + e_a s_k.
            for a in 0..n {
                for (col, src, b) in (0..n)
                    .map(|b| (a * n + b, 0usize, b))
                    .chain((0..m).map(|b| (n * n + a * m + b, 1usize, b)))
                {
                    let mut dx = DVector::<f64>::zeros(n);
                    for k in 0..steps {
                        let dy = &model.c * &dx;
                        for i in 0..p {
                            jac[(off + k * p + i, col)] = self.weights[i] * dy[i];
                        }
                        let s = if src == 0 { xs[(k, b)] } else { u[(k, b)] };
                        let mut next = &model.a * &dx;
                        next[a] += s;
                        dx = next;
                    }
                }
            }
            // C entries: dy_k = e_i x_k[b].
            for i in 0..p {
                for b in 0..n {
                    let col = n * n + n * m + i * n + b;
                    for k in 0..steps {
                        jac[(off + k * p + i, col)] = self.weights[i] * xs[(k, b)];
                    }
                }
            }
            off += y.len();
        }
        jac
    }
}

fn unpack(init: &StateSpaceModel, theta: &DVector<f64>) -> StateSpaceModel {
    let (n, m, p) = (init.order(), init.n_inputs(), init.n_outputs());
    let mut out = init.clone();
    out.a = DMatrix::from_row_slice(n, n, &theta.as_slice()[..n * n]);
    out.b = DMatrix::from_row_slice(n, m, &theta.as_slice()[n * n..n * n + n * m]);
    out.c = DMatrix::from_row_slice(p, n, &theta.as_slice()[n * n + n * m..]);
    out
}

fn pack(model: &StateSpaceModel) -> DVector<f64> {
    let mut v: Vec<f64> = model.a.transpose().iter().copied().collect();
    v.extend(model.b.transpose().iter());
    v.extend(model.c.transpose().iter());
    DVector::from_vec(v)
}

/// Normalized output-error fitting error `sqrt(sum |W r|^2 / sum |W y|^2)`,
/// with `W` weighting each output channel by the inverse of its data norm.
pub fn fitting_error(model: &StateSpaceModel, data: &FitData) -> Result<f64> {
    let ex = Experiments::new(data, model.n_inputs(), model.n_outputs())?;
    Ok(ex.cost(model).sqrt())
}

/// Prediction-error refinement of `(A, B, C)` by damped Gauss-Newton
/// (Levenberg-Marquardt). `D` is held fixed. A step is accepted only if it
/// lowers the cost and keeps the model stable, so the result is never worse
/// than `init`.
pub fn pem_refine(
    init: &StateSpaceModel,
    data: &FitData,
    opts: PemOptions,
) -> Result<(StateSpaceModel, FitReport)> {
    if !init.is_discrete() {
        return Err(Error::Validation(
            "prediction-error refinement needs a discrete model".into(),
        ));
    }
    if !init.is_stable()? {
        return Err(Error::Validation(
            "prediction-error refinement needs a stable initial model".into(),
        ));
    }
    let ex = Experiments::new(data, init.n_inputs(), init.n_outputs())?;
    let mut model = init.clone();
    let mut cost = ex.cost(&model);
    let mut flags = Vec::new();
    let mut converged = cost == 0.0 || init.order() == 0;
    let mut iterations = 0;
    let mut lambda = 1e-3;
    while !converged && iterations < opts.max_iter {
        iterations += 1;
        let r = ex.residual(&model);
        let jac = ex.jacobian(&model);
        let g = jac.transpose() * &r;
        let h = jac.transpose() * &jac;
        let theta = pack(&model);
        let diag_floor = h.diagonal().max() * 1e-12 + f64::MIN_POSITIVE;
        let mut accepted = None;
        for _ in 0..16 {
            let mut hl = h.clone();
            for i in 0..hl.nrows() {
                hl[(i, i)] += lambda * hl[(i, i)].max(diag_floor);
            }
            let step = match hl.cholesky() {
                Some(ch) => -ch.solve(&g),
                None => {
                    lambda *= 4.0;
                    continue;
                }
            };
            let cand = unpack(&model, &(&theta + step));
            let ok_stable = linalg::spectral_radius(&cand.a)
                .map(|r| r < 1.0)
                .unwrap_or(false);
            if ok_stable {
                let c = ex.cost(&cand);
                if c.is_finite() && c < cost {
                    accepted = Some((cand, c));
                    break;
                }
            }
            lambda *= 4.0;
        }
        match accepted {
            Some((cand, c)) => {
                let gain = (cost - c) / cost;
                model = cand;
                cost = c;
                lambda = (lambda / 3.0).max(1e-12);
                if gain < opts.tol || cost == 0.0 {
                    converged = true;
                }
            }
            None => converged = true,
        }
    }
    if !converged && opts.max_iter > 0 {
        flags.push("pem_max_iter_reached".to_string());
    }
    flags.push(format!("pem_iterations={iterations}"));
    let fit = cost.sqrt();
    let report = match data {
        FitData::Impulse(h) => {
            let mut rep = FitReport::for_markov(&model, h, flags)?;
            rep.fit_error = fit;
            rep
        }
        FitData::InputOutput { .. } => FitReport {
            order: model.order(),
            channels: model.output_labels.clone(),
            hinf_band: Vec::new(),
            h2_band: fit,
            stable: model.is_stable()?,
            fit_error: fit,
            flags,
        },
    };
    Ok((model, report))
}
