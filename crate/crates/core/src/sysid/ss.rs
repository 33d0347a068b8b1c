use std::io::{BufRead, Write};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::io::{write_rows, LineReader};
use crate::linalg;

/// Linear time-invariant model `x' = A x + B u`, `y = C x + D u`.
///
/// `dt == 0` marks a continuous-time model; otherwise the model is discrete
/// with sample step `dt` seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpaceModel {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub d: DMatrix<f64>,
    pub dt: f64,
    pub input_labels: Vec<String>,
    pub output_labels: Vec<String>,
}

impl StateSpaceModel {
    pub fn new(
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        c: DMatrix<f64>,
        d: DMatrix<f64>,
        dt: f64,
    ) -> Result<Self> {
        let n = a.nrows();
        let (m, p) = (d.ncols(), d.nrows());
        if a.ncols() != n || b.shape() != (n, m) || c.shape() != (p, n) {
            return Err(Error::Validation(format!(
                "inconsistent state-space dimensions: A {:?}, B {:?}, C {:?}, D {:?}",
                a.shape(),
                b.shape(),
                c.shape(),
                d.shape()
            )));
        }
        if !(dt >= 0.0 && dt.is_finite()) {
            return Err(Error::Validation(format!("invalid sample step {dt}")));
        }
        Ok(Self {
            a,
            b,
            c,
            d,
            dt,
            input_labels: (0..m).map(|i| format!("u{i}")).collect(),
            output_labels: (0..p).map(|i| format!("y{i}")).collect(),
        })
    }

    /// Model with no dynamics: `y = D u`.
    pub fn static_gain(d: DMatrix<f64>, dt: f64) -> Result<Self> {
        let (p, m) = d.shape();
        Self::new(
            DMatrix::zeros(0, 0),
            DMatrix::zeros(0, m),
            DMatrix::zeros(p, 0),
            d,
            dt,
        )
    }

    /// The zero model with `m` inputs and `p` outputs.
    pub fn zero(m: usize, p: usize, dt: f64) -> Self {
        Self::static_gain(DMatrix::zeros(p, m), dt).expect("zero model is consistent")
    }

    pub fn with_labels(mut self, inputs: &[&str], outputs: &[&str]) -> Self {
        assert_eq!(inputs.len(), self.n_inputs());
        assert_eq!(outputs.len(), self.n_outputs());
        self.input_labels = inputs.iter().map(|s| s.to_string()).collect();
        self.output_labels = outputs.iter().map(|s| s.to_string()).collect();
        self
    }

    pub fn order(&self) -> usize {
        self.a.nrows()
    }

    pub fn n_inputs(&self) -> usize {
        self.d.ncols()
    }

    pub fn n_outputs(&self) -> usize {
        self.d.nrows()
    }

    pub fn is_discrete(&self) -> bool {
        self.dt > 0.0
    }

    pub fn eigenvalues(&self) -> Result<Vec<Complex64>> {
        linalg::eigenvalues(&self.a)
    }

    /// Discrete: spectral radius below one. Continuous: every eigenvalue in the
    /// open left half plane. A static model is stable.
    pub fn is_stable(&self) -> Result<bool> {
        if self.order() == 0 {
            return Ok(true);
        }
        Ok(if self.is_discrete() {
            linalg::spectral_radius(&self.a)? < 1.0
        } else {
            linalg::max_real_eigenvalue(&self.a)? < 0.0
        })
    }

    /// One discrete step from state `x` with input `u`; returns `(x_next, y)`.
    pub fn step(&self, x: &DVector<f64>, u: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        let y = &self.c * x + &self.d * u;
        let xn = &self.a * x + &self.b * u;
        (xn, y)
    }

    /// Simulate a discrete model from zero state. `u` is `N x m`; returns `N x p`.
    pub fn simulate(&self, u: &DMatrix<f64>) -> DMatrix<f64> {
        let mut x = DVector::zeros(self.order());
        let mut y = DMatrix::zeros(u.nrows(), self.n_outputs());
        for k in 0..u.nrows() {
            let uk = u.row(k).transpose();
            let (xn, yk) = self.step(&x, &uk);
            y.row_mut(k).copy_from(&yk.transpose());
            x = xn;
        }
        y
    }

    /// First `len` Markov parameters `D, CB, CAB, ...` of a discrete model.
    pub fn markov_parameters(&self, len: usize) -> Vec<DMatrix<f64>> {
        let mut out = Vec::with_capacity(len);
        if len == 0 {
            return out;
        }
        out.push(self.d.clone());
        let mut ab = self.b.clone();
        for _ in 1..len {
            out.push(&self.c * &ab);
            ab = &self.a * ab;
        }
        out
    }

    /// Transfer matrix at angular frequency `omega`.
    pub fn frf_at(&self, omega: f64) -> Result<DMatrix<Complex64>> {
        let s = if self.is_discrete() {
            if omega.abs() * self.dt >= std::f64::consts::PI {
                return Err(Error::Domain(format!(
                    "omega = {omega} rad/s is at or beyond the Nyquist frequency for dt = {}",
                    self.dt
                )));
            }
            Complex64::from_polar(1.0, omega * self.dt)
        } else {
            Complex64::new(0.0, omega)
        };
        let n = self.order();
        let d = linalg::to_complex(&self.d);
        if n == 0 {
            return Ok(d);
        }
        let mut m = linalg::to_complex(&self.a).map(|v| -v);
        for i in 0..n {
            m[(i, i)] += s;
        }
        let x = linalg::complex_solve(m, &linalg::to_complex(&self.b))?;
        Ok(linalg::to_complex(&self.c) * x + d)
    }

    /// Write the model-exchange format: four `key,value` header lines
    /// (`n`, `m`, `p`, `dt`) followed by A, B, C and D row-major.
    pub fn write_exchange<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "n,{}", self.order())?;
        writeln!(w, "m,{}", self.n_inputs())?;
        writeln!(w, "p,{}", self.n_outputs())?;
        writeln!(w, "dt,{:e}", self.dt)?;
        write_rows(w, &self.a)?;
        write_rows(w, &self.b)?;
        write_rows(w, &self.c)?;
        write_rows(w, &self.d)
    }

    pub fn read_exchange<R: BufRead>(r: &mut LineReader<R>) -> Result<Self> {
        let n: usize = r.keyed("n")?;
        let m: usize = r.keyed("m")?;
        let p: usize = r.keyed("p")?;
        let dt: f64 = r.keyed("dt")?;
        let a = r.matrix(n, n)?;
        let b = r.matrix(n, m)?;
        let c = r.matrix(p, n)?;
        let d = r.matrix(p, m)?;
        Self::new(a, b, c, d, dt)
    }

    /// Sidecar holding the channel labels of a saved model.
    pub fn labels_path(path: &std::path::Path) -> std::path::PathBuf {
        let mut s = path.as_os_str().to_owned();
        s.push(".labels");
        s.into()
    }

    /// Save in the exchange format; labels go to the `.labels` sidecar.
    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_exchange(&mut f)?;
        f.flush()?;
        let mut f = std::io::BufWriter::new(std::fs::File::create(Self::labels_path(path))?);
        writeln!(f, "inputs,{}", self.input_labels.join(","))?;
        writeln!(f, "outputs,{}", self.output_labels.join(","))?;
        f.flush()?;
        Ok(())
    }

    /// Load a saved model; labels are restored when the sidecar exists.
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|e| {
            Error::Config(format!("cannot open model file {}: {e}", path.display()))
        })?;
        let mut m = Self::read_exchange(&mut LineReader::new(std::io::BufReader::new(f)))?;
        let labels = Self::labels_path(path);
        if labels.exists() {
            let text = std::fs::read_to_string(&labels)?;
            for line in text.lines() {
                let mut parts = line.split(',');
                let (key, names): (&str, Vec<String>) = (
                    parts.next().unwrap_or(""),
                    parts
                        .filter(|s| !s.is_empty())
                        .map(str::to_string)
                        .collect(),
                );
                let (target, expected) = match key {
                    "inputs" => (&mut m.input_labels, m.d.ncols()),
                    "outputs" => (&mut m.output_labels, m.d.nrows()),
                    _ => continue,
                };
                if names.len() != expected {
                    return Err(Error::Parse(format!(
                        "{}: {key} lists {} labels for {expected} channels",
                        labels.display(),
                        names.len()
                    )));
                }
                *target = names;
            }
        }
        Ok(m)
    }
}

/// Evaluate the transfer matrix of `m` on every grid frequency.
///
/// Discrete models are evaluated at `z = exp(j omega dt)`; frequencies at or
/// beyond Nyquist are a domain error.
pub fn model_frf(m: &StateSpaceModel, omega_grid: &[f64]) -> Result<Vec<DMatrix<Complex64>>> {
    omega_grid.iter().map(|&w| m.frf_at(w)).collect()
}
