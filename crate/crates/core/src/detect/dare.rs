use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg;

pub const DARE_TOL: f64 = 1e-12;
pub const DARE_MAX_ITER: usize = 100_000;

/// Steady-state solution of the filtering Riccati equation.
#[derive(Debug, Clone)]
pub struct DareSolution {
    /// Steady-state one-step prediction covariance.
    pub p: DMatrix<f64>,
    /// Predictor-form gain `L = A P C^T (C P C^T + R)^-1`.
    pub l: DMatrix<f64>,
    pub iterations: usize,
}

impl DareSolution {
    /// Innovation covariance `C P C^T + R`.
    pub fn innovation_covariance(&self, c: &DMatrix<f64>, r: &DMatrix<f64>) -> DMatrix<f64> {
        c * &self.p * c.transpose() + r
    }
}

fn riccati_gain(
    a: &DMatrix<f64>,
    c: &DMatrix<f64>,
    r: &DMatrix<f64>,
    p: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let s = c * p * c.transpose() + r;
    let chol = linalg::symmetrize(&s).cholesky().ok_or_else(|| {
        Error::Numerical("innovation covariance lost positive definiteness".into())
    })?;
    // L^T = S^-1 (C P A^T)
    let cpa = c * p * a.transpose();
    Ok(chol.solve(&cpa).transpose())
}

/// Iterate `P <- A P A^T - A P C^T (C P C^T + R)^-1 C P A^T + Q` from `P = Q`
/// until the relative Frobenius increment drops to [`DARE_TOL`].
pub fn solve_dare_gain(
    a: &DMatrix<f64>,
    c: &DMatrix<f64>,
    q: &DMatrix<f64>,
    r: &DMatrix<f64>,
) -> Result<DareSolution> {
    let n = a.nrows();
    let p_out = c.nrows();
    if a.ncols() != n || c.ncols() != n || q.shape() != (n, n) || r.shape() != (p_out, p_out) {
        return Err(Error::Validation(format!(
            "Riccati dimensions: A {:?}, C {:?}, Q {:?}, R {:?}",
            a.shape(),
            c.shape(),
            q.shape(),
            r.shape()
        )));
    }
    if linalg::symmetrize(r).cholesky().is_none() {
        return Err(Error::Validation(
            "measurement covariance R must be positive definite".into(),
        ));
    }
    let q_scale = q.amax();
    if n > 0 && linalg::min_symmetric_eigenvalue(q) < -1e-12 * q_scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Validation(
            "process covariance Q must be positive semidefinite".into(),
        ));
    }

    let mut p = linalg::symmetrize(q);
    let mut last_inc = f64::INFINITY;
    for it in 1..=DARE_MAX_ITER {
        let l = riccati_gain(a, c, r, &p)?;
        let cpa = c * &p * a.transpose();
        let next = linalg::symmetrize(&(a * &p * a.transpose() - &l * cpa + q));
        if !next.iter().all(|v| v.is_finite()) {
            return Err(Error::Numerical(format!(
                "Riccati iteration diverged at step {it}"
            )));
        }
        let scale = next.norm();
        if !scale.is_finite() {
            return Err(Error::Numerical(format!(
                "Riccati iteration diverged at step {it} (|P| overflowed; is (A, C) detectable?)"
            )));
        }
        if next.diagonal().iter().any(|&d| d < -1e-9 * scale) {
            return Err(Error::Numerical(format!(
                "Riccati iterate became indefinite at step {it} (|P| = {scale:.3e})"
            )));
        }
        let inc = if scale == 0.0 {
            0.0
        } else {
            (&next - &p).norm() / scale
        };
        p = next;
        last_inc = inc;
        if inc <= DARE_TOL {
            let l = riccati_gain(a, c, r, &p)?;
            return Ok(DareSolution {
                p,
                l,
                iterations: it,
            });
        }
    }
    Err(Error::Numerical(format!(
        "Riccati iteration did not converge in {DARE_MAX_ITER} steps (last relative increment {last_inc:.3e}, |P| = {:.3e})",
        p.norm()
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: f64) -> DMatrix<f64> {
        DMatrix::from_element(1, 1, v)
    }

    #[test]
    fn no_process_noise_gives_zero_gain() {
        let sol = solve_dare_gain(&s(0.5), &s(1.0), &s(0.0), &s(1.0)).unwrap();
        assert_eq!(sol.p[(0, 0)], 0.0);
        assert_eq!(sol.l[(0, 0)], 0.0);
    }

    #[test]
    fn random_walk_gives_golden_ratio() {
        let sol = solve_dare_gain(&s(1.0), &s(1.0), &s(1.0), &s(1.0)).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((sol.p[(0, 0)] - phi).abs() < 1e-9);
        assert!((sol.l[(0, 0)] - phi / (phi + 1.0)).abs() < 1e-9);
    }

    #[test]
    fn indefinite_r_rejected() {
        assert!(matches!(
            solve_dare_gain(&s(0.5), &s(1.0), &s(1.0), &s(-1.0)),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn undetectable_unstable_mode_fails() {
        // Unobserved growing state driven by noise.
        let a = DMatrix::from_row_slice(2, 2, &[1.2, 0.0, 0.0, 0.5]);
        let c = DMatrix::from_row_slice(1, 2, &[0.0, 1.0]);
        let q = DMatrix::identity(2, 2);
        let r = solve_dare_gain(&a, &c, &q, &s(1.0));
        assert!(matches!(r, Err(Error::Numerical(_))), "{r:?}");
    }
}
