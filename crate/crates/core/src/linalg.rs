//! Small dense linear-algebra helpers shared by the identification, model
//! assembly and detection code.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Eigenvalues of a square matrix via the real Schur form.
pub fn eigenvalues(a: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    if a.nrows() == 0 {
        return Ok(Vec::new());
    }
    let schur = Schur::try_new(a.clone(), 1e-14, 10_000)
        .ok_or_else(|| Error::Numerical("Schur decomposition did not converge".into()))?;
    Ok(schur.complex_eigenvalues().iter().copied().collect())
}

/// Largest eigenvalue modulus; zero for an empty matrix.
pub fn spectral_radius(a: &DMatrix<f64>) -> Result<f64> {
    Ok(eigenvalues(a)?.iter().map(|l| l.norm()).fold(0.0, f64::max))
}

/// Largest eigenvalue real part; `-inf` for an empty matrix.
pub fn max_real_eigenvalue(a: &DMatrix<f64>) -> Result<f64> {
    Ok(eigenvalues(a)?
        .iter()
        .map(|l| l.re)
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Relative asymmetry `||A - A^T||_F / ||A||_F` (zero for a zero matrix).
pub fn relative_asymmetry(a: &DMatrix<f64>) -> f64 {
    let norm = a.norm();
    if norm == 0.0 {
        return 0.0;
    }
    (a - a.transpose()).norm() / norm
}

/// Symmetric part `(A + A^T) / 2`.
pub fn symmetrize(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

/// Smallest eigenvalue of the symmetric part of `a`.
pub fn min_symmetric_eigenvalue(a: &DMatrix<f64>) -> f64 {
    if a.nrows() == 0 {
        return 0.0;
    }
    symmetrize(a)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Solve the complex linear system `m x = rhs`.
pub fn complex_solve(
    m: DMatrix<Complex64>,
    rhs: &DMatrix<Complex64>,
) -> Result<DMatrix<Complex64>> {
    m.lu()
        .solve(rhs)
        .ok_or_else(|| Error::Numerical("singular complex system".into()))
}

/// Promote a real matrix to complex.
pub fn to_complex(a: &DMatrix<f64>) -> DMatrix<Complex64> {
    a.map(|v| Complex64::new(v, 0.0))
}

/// Thin SVD `m = U diag(s) V^T` with singular values in descending order.
///
/// The decomposition is computed on the square triangular factor of a QR
/// (or LQ) reduction and its reconstruction is verified: nalgebra's
/// bidiagonal SVD can return inaccurate factors for some tall inputs, and
/// ERA relies on an exact decomposition.
pub fn svd(m: &DMatrix<f64>) -> Result<(DMatrix<f64>, Vec<f64>, DMatrix<f64>)> {
    if m.nrows() < m.ncols() {
        let (u, s, vt) = svd(&m.transpose())?;
        return Ok((vt.transpose(), s, u.transpose()));
    }
    let scale = m.norm();
    if scale == 0.0 || m.ncols() == 0 {
        let k = m.ncols();
        return Ok((
            DMatrix::identity(m.nrows(), k),
            vec![0.0; k],
            DMatrix::identity(k, k),
        ));
    }
    let qr = m.clone().qr();
    let (q, r) = (qr.q(), qr.r());
    let tol = 1e-12 * (m.nrows() + m.ncols()) as f64;
    let attempts = [r.clone(), r.transpose()];
    for (i, f) in attempts.iter().enumerate() {
        let d = f.clone().svd(true, true);
        let (Some(u), Some(vt)) = (d.u.clone(), d.v_t.clone()) else {
            continue;
        };
        let (u_r, v_r_t) = if i == 0 {
            (u, vt)
        } else {
            (vt.transpose(), u.transpose())
        };
        let mut idx: Vec<usize> = (0..d.singular_values.len()).collect();
        idx.sort_by(|&a, &b| d.singular_values[b].total_cmp(&d.singular_values[a]));
        let s: Vec<f64> = idx.iter().map(|&k| d.singular_values[k]).collect();
        let u_full = &q * DMatrix::from_fn(u_r.nrows(), idx.len(), |r, k| u_r[(r, idx[k])]);
        let vt_sorted = DMatrix::from_fn(idx.len(), v_r_t.ncols(), |k, c| v_r_t[(idx[k], c)]);
        let rec = &u_full
            * DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&s))
            * &vt_sorted;
        if (rec - m).norm() <= tol * scale {
            return Ok((u_full, s, vt_sorted));
        }
    }
    Err(Error::Numerical(
        "singular value decomposition failed to reach working accuracy".into(),
    ))
}

/// Build a block matrix from a row-major grid of blocks. Every block in a
/// grid row must share the row count and every block in a grid column the
/// column count.
pub fn block(rows: &[&[&DMatrix<f64>]]) -> DMatrix<f64> {
    let heights: Vec<usize> = rows.iter().map(|r| r[0].nrows()).collect();
    let widths: Vec<usize> = rows[0].iter().map(|b| b.ncols()).collect();
    let mut out = DMatrix::zeros(heights.iter().sum(), widths.iter().sum());
    let mut r0 = 0;
    for (i, row) in rows.iter().enumerate() {
        let mut c0 = 0;
        for (j, blk) in row.iter().enumerate() {
            debug_assert_eq!(blk.nrows(), heights[i]);
            debug_assert_eq!(blk.ncols(), widths[j]);
            out.view_mut((r0, c0), (heights[i], widths[j]))
                .copy_from(*blk);
            c0 += widths[j];
        }
        r0 += heights[i];
    }
    out
}
