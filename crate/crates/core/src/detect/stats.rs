use nalgebra::{Cholesky, Matrix3, Vector3, U3};

use crate::error::{Error, Result};

/// Minimum number of retained residual samples for a baseline.
pub const MIN_BASELINE_SAMPLES: usize = 1000;

/// Residual mean and covariance with the Cholesky factor cached for the
/// per-sample distance.
#[derive(Debug, Clone)]
pub struct ResidualStats {
    pub z_bar: Vector3<f64>,
    pub sigma: Matrix3<f64>,
    chol: Cholesky<f64, U3>,
}

impl ResidualStats {
    pub fn new(z_bar: Vector3<f64>, sigma: Matrix3<f64>) -> Result<Self> {
        let chol = Cholesky::new(sigma).ok_or_else(|| {
            Error::Numerical(
                "residual covariance is not positive definite; collect more healthy data or review the output channels"
                    .into(),
            )
        })?;
        Ok(Self { z_bar, sigma, chol })
    }

    /// Mahalanobis distance of `z` from the baseline mean.
    pub fn distance(&self, z: &Vector3<f64>) -> f64 {
        // |L^-1 (z - zbar)| with sigma = L L^T
        let w = self
            .chol
            .l_dirty()
            .solve_lower_triangular(&(z - self.z_bar))
            .expect("Cholesky factor has a positive diagonal");
        w.norm()
    }
}

/// Baseline statistics of a healthy residual series.
#[derive(Debug, Clone)]
pub struct Baseline {
    pub stats: ResidualStats,
    pub mean_d: f64,
    pub std_d: f64,
}

/// `d = sqrt((z - zbar)^T sigma^-1 (z - zbar))` via a triangular solve.
pub fn mahalanobis_distance(
    z: &Vector3<f64>,
    z_bar: &Vector3<f64>,
    sigma: &Matrix3<f64>,
) -> Result<f64> {
    Ok(ResidualStats::new(*z_bar, *sigma)?.distance(z))
}

/// Sample mean and covariance of `z[discard..]`, then the mean and standard
/// deviation of the distance series over the same samples.
pub fn baseline_statistics(z: &[Vector3<f64>], discard: usize) -> Result<Baseline> {
    let kept = z.get(discard..).unwrap_or(&[]);
    if kept.len() < MIN_BASELINE_SAMPLES {
        return Err(Error::Config(format!(
            "baseline needs at least {MIN_BASELINE_SAMPLES} residual samples, got {}",
            kept.len()
        )));
    }
    let n = kept.len() as f64;
    let z_bar = kept.iter().fold(Vector3::zeros(), |acc, v| acc + v) / n;
    let sigma = kept.iter().fold(Matrix3::zeros(), |acc, v| {
        acc + (v - z_bar) * (v - z_bar).transpose()
    }) / (n - 1.0);
    let stats = ResidualStats::new(z_bar, sigma)?;
    let d: Vec<f64> = kept.iter().map(|v| stats.distance(v)).collect();
    let mean_d = d.iter().sum::<f64>() / n;
    let std_d = (d.iter().map(|x| (x - mean_d).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    Ok(Baseline {
        stats,
        mean_d,
        std_d,
    })
}

/// Threshold `mean_d + alpha std_d` and the distribution-free exceedance
/// bound `1 / alpha^2`.
pub fn chebyshev_threshold(mean_d: f64, std_d: f64, alpha: f64) -> Result<(f64, f64)> {
    if !(std_d > 0.0 && std_d.is_finite()) {
        return Err(Error::Validation(format!(
            "distance spread must be positive, got {std_d}"
        )));
    }
    if !(alpha > 1.0 && alpha.is_finite()) {
        return Err(Error::Validation(format!(
            "alpha must exceed 1, got {alpha}"
        )));
    }
    Ok((mean_d + alpha * std_d, 1.0 / (alpha * alpha)))
}
