use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg;

use super::impulse::ImpulseResponse;
use super::report::FitReport;
use super::ss::StateSpaceModel;

/// Largest eigenvalue modulus allowed after reflecting unstable modes.
pub const MAX_RADIUS: f64 = 0.999;
const RANK_TOL: f64 = 1e-10;
const MAX_HANKEL_BLOCKS: usize = 150;

/// Eigensystem realization of a discrete impulse response.
///
/// The samples of `h` at `t >= 0` are read as Markov parameters: sample 0 is
/// the feedthrough `D`, sample `k >= 1` is `C A^(k-1) B`.
pub fn fit_state_space_era(
    h: &ImpulseResponse,
    order: usize,
) -> Result<(StateSpaceModel, FitReport)> {
    if order < 1 {
        return Err(Error::Config("model order must be at least 1".into()));
    }
    let y = h.causal_samples();
    let (p, m) = h.shape();
    let avail = y.len().saturating_sub(1);
    let rows = (avail / 2).min(MAX_HANKEL_BLOCKS);
    if rows < 2 * order || avail < 2 * rows {
        return Err(Error::Config(format!(
            "{} Markov parameters cannot fill a Hankel matrix with {} block rows for order {order}",
            y.len(),
            2 * order
        )));
    }
    let cols = rows.min(avail - rows);
    let mut flags = Vec::new();

    let hankel = |lag: usize| {
        let mut hm = DMatrix::zeros(rows * p, cols * m);
        for i in 0..rows {
            for j in 0..cols {
                hm.view_mut((i * p, j * m), (p, m))
                    .copy_from(&y[i + j + 1 + lag]);
            }
        }
        hm
    };
    let h0 = hankel(0);
    let h1 = hankel(1);
    let (u, sv, vt) = linalg::svd(&h0)?;
    let s_max = sv[0];
    let rank = sv
        .iter()
        .filter(|&&v| v > RANK_TOL * s_max && s_max > 0.0)
        .count();
    let n = order.min(rank);
    if n < order {
        flags.push(format!("order_reduced:{order}->{n}"));
    }
    let d = y[0].clone();
    if n == 0 {
        let model = StateSpaceModel::static_gain(d, h.dt)?;
        let report = FitReport::for_markov(&model, h, flags)?;
        return Ok((model, report));
    }
    let un = u.columns(0, n).into_owned();
    let vn = vt.rows(0, n).transpose();
    let sq: Vec<f64> = sv[..n].iter().map(|v| v.sqrt()).collect();
    let s_half = DMatrix::from_fn(n, n, |i, j| if i == j { sq[i] } else { 0.0 });
    let s_inv_half = DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 / sq[i] } else { 0.0 });
    let mut a = &s_inv_half * un.transpose() * &h1 * &vn * &s_inv_half;
    let b = (&s_half * vn.transpose()).columns(0, m).into_owned();
    let c = (&un * &s_half).rows(0, p).into_owned();

    let radius = linalg::spectral_radius(&a)?;
    if radius >= 1.0 {
        a = reflect_unstable(&a)?;
        flags.push(format!("unstable_modes_reflected:radius={radius:.6}"));
    }
    let model = StateSpaceModel::new(a, b, c, d, h.dt)?;
    let report = FitReport::for_markov(&model, h, flags)?;
    Ok((model, report))
}

/// Move eigenvalues on or outside the unit circle to their mirror image
/// `1 / conj(l)`, clamped to radius [`MAX_RADIUS`]; stable modes are kept.
pub fn reflect_unstable(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    remap_modes(a, |r| {
        if r >= 1.0 {
            Some((1.0 / r).min(MAX_RADIUS))
        } else {
            None
        }
    })
}

/// Like [`reflect_unstable`], but also pulls stable modes beyond
/// `max_radius` in to `max_radius` (same angle).
pub fn limit_radius(a: &DMatrix<f64>, max_radius: f64) -> Result<DMatrix<f64>> {
    remap_modes(a, |r| {
        if r >= 1.0 {
            Some((1.0 / r).min(max_radius))
        } else if r > max_radius {
            Some(max_radius)
        } else {
            None
        }
    })
}

/// Rebuild `a` from its eigen-decomposition with new radii where `f`
/// returns one. Leaves `a` untouched when no mode moves.
fn remap_modes(a: &DMatrix<f64>, f: impl Fn(f64) -> Option<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let eig = linalg::eigenvalues(a)?;
    let ac = linalg::to_complex(a);
    let mut v = DMatrix::<Complex64>::zeros(n, n);
    let mut lam = DMatrix::<Complex64>::zeros(n, n);
    let mut moved = false;
    for (k, &l) in eig.iter().enumerate() {
        let mut shifted = ac.clone();
        for i in 0..n {
            shifted[(i, i)] -= l;
        }
        let svd = shifted.svd(false, true);
        let vt = svd.v_t.unwrap();
        let (imin, _) =
            svd.singular_values
                .iter()
                .enumerate()
                .fold(
                    (0, f64::INFINITY),
                    |acc, (i, &s)| if s < acc.1 { (i, s) } else { acc },
                );
        v.set_column(k, &vt.row(imin).adjoint());
        lam[(k, k)] = match f(l.norm()) {
            Some(r) => {
                moved = true;
                Complex64::from_polar(r, l.arg())
            }
            None => l,
        };
    }
    if !moved {
        return Ok(a.clone());
    }
    let v_inv = v.clone().try_inverse().ok_or_else(|| {
        Error::Numerical("defective ERA state matrix; cannot reflect modes".into())
    })?;
    Ok((v * lam * v_inv).map(|z| z.re))
}
