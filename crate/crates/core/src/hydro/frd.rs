use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::io::{parse_row, write_rows, LineReader};
use crate::linalg;
use crate::sysid::StateSpaceModel;

use super::spectrum::linspace;
use super::truth::{default_a_inf, truth_radiation_model, truth_wave_model, TRUTH_WAVE_SHIFT};

/// Frequency-domain hydrodynamic coefficients of the platform.
#[derive(Debug, Clone, PartialEq)]
pub struct HydroFrd {
    pub omega: Vec<f64>,
    pub a_inf: DMatrix<f64>,
    pub a_omega: Vec<DMatrix<f64>>,
    pub b_omega: Vec<DMatrix<f64>>,
    /// Complex wave-force coefficients per unit elevation, one 6-vector per frequency.
    pub x_omega: Vec<DVector<Complex64>>,
}

impl HydroFrd {
    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.omega.len();
        if n < 2 {
            return Err(Error::Validation(
                "hydro dataset needs at least two frequencies".into(),
            ));
        }
        if self.a_omega.len() != n || self.b_omega.len() != n || self.x_omega.len() != n {
            return Err(Error::Validation(
                "hydro dataset arrays differ in length".into(),
            ));
        }
        if self.omega[0] <= 0.0 || self.omega.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Validation(
                "hydro frequencies must be positive and strictly increasing".into(),
            ));
        }
        if self.a_inf.shape() != (6, 6) || self.a_inf.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation(
                "a_inf must be a finite 6x6 matrix".into(),
            ));
        }
        if linalg::relative_asymmetry(&self.a_inf) > 1e-9 {
            return Err(Error::Validation("a_inf is not symmetric".into()));
        }
        for (i, w) in self.omega.iter().enumerate() {
            let (a, b, x) = (&self.a_omega[i], &self.b_omega[i], &self.x_omega[i]);
            if a.shape() != (6, 6) || b.shape() != (6, 6) || x.len() != 6 {
                return Err(Error::Validation(format!(
                    "bad coefficient shape at omega = {w}"
                )));
            }
            let finite = a.iter().chain(b.iter()).all(|v| v.is_finite())
                && x.iter().all(|z| z.re.is_finite() && z.im.is_finite());
            if !finite {
                return Err(Error::Validation(format!(
                    "non-finite coefficient at omega = {w}"
                )));
            }
            if linalg::relative_asymmetry(b) > 1e-9 {
                return Err(Error::Validation(format!(
                    "damping not symmetric at omega = {w}"
                )));
            }
            let scale = b.amax();
            if scale > 0.0 && linalg::min_symmetric_eigenvalue(b) < -1e-9 * scale {
                return Err(Error::Validation(format!(
                    "damping not positive semidefinite at omega = {w}"
                )));
            }
        }
        Ok(())
    }

    /// Uniform spacing of the grid, if it is uniform to a relative 1e-9.
    pub fn uniform_step(&self) -> Option<f64> {
        let n = self.omega.len();
        if n < 2 {
            return None;
        }
        let dw = (self.omega[n - 1] - self.omega[0]) / (n - 1) as f64;
        let ok = self
            .omega
            .windows(2)
            .all(|w| ((w[1] - w[0]) - dw).abs() <= 1e-9 * dw.max(1.0));
        ok.then_some(dw)
    }

    /// Path of the `ainf.csv` sidecar that accompanies `path`.
    pub fn sidecar_path(path: &Path) -> PathBuf {
        path.parent().unwrap_or(Path::new(".")).join("ainf.csv")
    }

    /// Write the coefficient table to `path` and `A_inf` to `ainf.csv` beside it.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(std::fs::File::create(path)?);
        self.write_table(&mut w)?;
        w.flush()?;
        let mut s = BufWriter::new(std::fs::File::create(Self::sidecar_path(path))?);
        write_rows(&mut s, &self.a_inf)?;
        s.flush()?;
        Ok(())
    }

    pub fn write_table<W: Write>(&self, w: &mut W) -> Result<()> {
        let mut header = vec!["omega".to_string()];
        for prefix in ["a", "b"] {
            for i in 0..6 {
                for j in 0..6 {
                    header.push(format!("{prefix}{i}{j}"));
                }
            }
        }
        header.extend((0..6).map(|i| format!("re_x{i}")));
        header.extend((0..6).map(|i| format!("im_x{i}")));
        writeln!(w, "{}", header.join(","))?;
        for k in 0..self.len() {
            let mut row = vec![self.omega[k]];
            row.extend(self.a_omega[k].transpose().iter());
            row.extend(self.b_omega[k].transpose().iter());
            row.extend(self.x_omega[k].iter().map(|z| z.re));
            row.extend(self.x_omega[k].iter().map(|z| z.im));
            let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let open = |p: &Path| {
            std::fs::File::open(p)
                .map(BufReader::new)
                .map_err(|e| Error::Config(format!("cannot open hydro data {}: {e}", p.display())))
        };
        let a_inf = LineReader::new(open(&Self::sidecar_path(path))?).matrix(6, 6)?;
        let mut omega = Vec::new();
        let mut a_omega = Vec::new();
        let mut b_omega = Vec::new();
        let mut x_omega = Vec::new();
        for (i, line) in open(path)?.lines().enumerate().skip(1) {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let v = parse_row(&line, i + 1)?;
            if v.len() != 85 {
                return Err(Error::Parse(format!(
                    "{} line {}: expected 85 columns, found {}",
                    path.display(),
                    i + 1,
                    v.len()
                )));
            }
            omega.push(v[0]);
            a_omega.push(DMatrix::from_row_slice(6, 6, &v[1..37]));
            b_omega.push(DMatrix::from_row_slice(6, 6, &v[37..73]));
            x_omega.push(DVector::from_fn(6, |j, _| {
                Complex64::new(v[73 + j], v[79 + j])
            }));
        }
        let frd = Self {
            omega,
            a_inf,
            a_omega,
            b_omega,
            x_omega,
        };
        frd.validate()?;
        Ok(frd)
    }
}

/// Default identification grid: 0.05 to 3.0 rad/s, 200 points.
pub fn default_omega_grid() -> Vec<f64> {
    linspace(0.05, 3.0, 200)
}

/// Evaluate the truth models on `omega_grid` and decompose the radiation FRF
/// into added mass and damping. The wave coefficients have the truth model's
/// built-in delay of [`TRUTH_WAVE_SHIFT`] seconds removed.
pub fn generate_synthetic_hydro_dataset(
    truth_rad: &StateSpaceModel,
    truth_wave: &StateSpaceModel,
    a_inf: &DMatrix<f64>,
    omega_grid: &[f64],
) -> Result<HydroFrd> {
    for (name, m) in [("radiation", truth_rad), ("wave-force", truth_wave)] {
        if m.is_discrete() {
            return Err(Error::Validation(format!(
                "truth {name} model must be continuous"
            )));
        }
        if !m.is_stable()? {
            return Err(Error::Validation(format!("truth {name} model is unstable")));
        }
    }
    if truth_rad.n_inputs() != 6 || truth_rad.n_outputs() != 6 {
        return Err(Error::Validation(
            "truth radiation model must be 6x6".into(),
        ));
    }
    if truth_wave.n_inputs() != 1 || truth_wave.n_outputs() != 6 {
        return Err(Error::Validation(
            "truth wave model must map 1 input to 6 outputs".into(),
        ));
    }
    let mut frd = HydroFrd {
        omega: omega_grid.to_vec(),
        a_inf: a_inf.clone(),
        a_omega: Vec::with_capacity(omega_grid.len()),
        b_omega: Vec::with_capacity(omega_grid.len()),
        x_omega: Vec::with_capacity(omega_grid.len()),
    };
    for &w in omega_grid {
        let k = truth_rad.frf_at(w)?;
        frd.b_omega.push(linalg::symmetrize(&k.map(|z| z.re)));
        frd.a_omega
            .push(a_inf + linalg::symmetrize(&k.map(|z| z.im / w)));
        let shift = Complex64::from_polar(1.0, w * TRUTH_WAVE_SHIFT);
        frd.x_omega
            .push(truth_wave.frf_at(w)?.column(0).map(|z| z * shift));
    }
    frd.validate()?;
    Ok(frd)
}

/// The shipped dataset: the truth models on the default grid.
pub fn default_dataset() -> HydroFrd {
    generate_synthetic_hydro_dataset(
        &truth_radiation_model(),
        &truth_wave_model(),
        &default_a_inf(),
        &default_omega_grid(),
    )
    .expect("shipped truth models are valid")
}
