//! The shipped "truth" hydrodynamics: high-order continuous-time models that
//! stand in for panel-code output. The synthetic coefficient dataset is the
//! frequency response of these models, and the plant simulator integrates
//! them directly, so identified low-order fits face genuine mismatch.

use nalgebra::DMatrix;

use crate::sysid::StateSpaceModel;

pub const DOF_LABELS: [&str; 6] = ["surge", "sway", "heave", "roll", "pitch", "yaw"];

/// Delay built into the shipped truth wave-force model [s]. The dataset stores
/// the physical coefficients, i.e. the truth FRF with this delay removed.
pub const TRUTH_WAVE_SHIFT: f64 = 4.0;

/// One radiation mode: `v v^T * 2 zeta w s / (s^2 + 2 zeta w s + w^2)`.
struct RadiationMode {
    omega: f64,
    zeta: f64,
    v: [f64; 6],
}

fn radiation_modes() -> Vec<RadiationMode> {
    let s1 = 2.0e5f64.sqrt();
    let s4 = 5.0e4f64.sqrt();
    let p4 = 5.0e8f64.sqrt();
    vec![
        // Surge with a counter-phase pitch component (pontoon-level pressure).
        RadiationMode {
            omega: 0.55,
            zeta: 0.45,
            v: [s1, 0.0, 0.0, 0.0, -15.0 * s1, 0.0],
        },
        RadiationMode {
            omega: 0.55,
            zeta: 0.45,
            v: [0.0, s1, 0.0, 15.0 * s1, 0.0, 0.0],
        },
        RadiationMode {
            omega: 0.70,
            zeta: 0.35,
            v: [0.0, 0.0, 1.5e6f64.sqrt(), 0.0, 0.0, 0.0],
        },
        RadiationMode {
            omega: 0.85,
            zeta: 0.30,
            v: [s4, 0.0, 0.0, 0.0, p4, 0.0],
        },
        RadiationMode {
            omega: 0.85,
            zeta: 0.30,
            v: [0.0, s4, 0.0, -p4, 0.0, 0.0],
        },
        RadiationMode {
            omega: 0.80,
            zeta: 0.30,
            v: [0.0, 0.0, 0.0, 0.0, 0.0, 3.0e8f64.sqrt()],
        },
    ]
}

/// Order-12 radiation memory model, input platform velocity (6), output the
/// memory force `mu` (6). Its FRF is `K(w) = B(w) + j w (A(w) - A_inf)` with
/// `B(w)` positive semidefinite at every frequency.
pub fn truth_radiation_model() -> StateSpaceModel {
    let modes = radiation_modes();
    let n = 2 * modes.len();
    let mut a = DMatrix::zeros(n, n);
    let mut b = DMatrix::zeros(n, 6);
    let mut c = DMatrix::zeros(6, n);
    for (i, m) in modes.iter().enumerate() {
        let (p, q) = (2 * i, 2 * i + 1);
        a[(p, q)] = 1.0;
        a[(q, p)] = -m.omega * m.omega;
        a[(q, q)] = -2.0 * m.zeta * m.omega;
        for j in 0..6 {
            b[(q, j)] = m.v[j];
            c[(j, q)] = 2.0 * m.zeta * m.omega * m.v[j];
        }
    }
    StateSpaceModel::new(a, b, c, DMatrix::zeros(6, 6), 0.0)
        .expect("radiation truth dimensions")
        .with_labels(&DOF_LABELS, &DOF_LABELS)
}

/// Order-16 wave-excitation model, input wave elevation at the platform [m],
/// output the 6 generalized wave forces. Head seas: sway, roll and yaw rows
/// are zero.
///
/// Eight states form a cascade of four resonant sections `N(s) = 2 a s / D(s)`,
/// `D(s) = s^2 + 2 a s + 1`, whose last stage supplies the dominant response.
/// The other eight are weak low-pass resonances fed by the first section, so
/// every path has zero DC gain and a kernel that starts smoothly at `t = 0`.
pub fn truth_wave_model() -> StateSpaceModel {
    const A_CORE: f64 = 0.5;
    const SECTIONS: usize = 4;
    // (omega, zeta, [surge, heave, pitch] gain)
    let aux: [(f64, f64, [f64; 3]); 4] = [
        (1.5, 0.2, [1.0e5, 0.0, 8.5e5]),
        (2.0, 0.2, [0.0, 4.3e4, 0.0]),
        (2.4, 0.15, [0.0, 0.0, 1.5e6]),
        (0.45, 0.3, [1.2e5, 3.7e4, 1.9e6]),
    ];
    let n = 2 * SECTIONS + 2 * aux.len();
    let mut a = DMatrix::zeros(n, n);
    let mut b = DMatrix::zeros(n, 1);
    let mut c = DMatrix::zeros(6, n);
    for s in 0..SECTIONS {
        let (p, q) = (2 * s, 2 * s + 1);
        a[(p, q)] = 1.0;
        a[(q, p)] = -1.0;
        a[(q, q)] = -2.0 * A_CORE;
        if s == 0 {
            b[(q, 0)] = 2.0 * A_CORE;
        } else {
            a[(q, q - 2)] = 2.0 * A_CORE;
        }
    }
    let (p_last, q_last) = (2 * SECTIONS - 2, 2 * SECTIONS - 1);
    // q_last = N(s)^4 eta; p_last = N(s)^4 / s eta.
    let rows = [(0usize, 1.0e7, 0.0), (2, 1.8e6, -2.4e6), (4, -1.4e8, 7.0e7)];
    for &(row, gq, gp) in &rows {
        c[(row, q_last)] = gq;
        c[(row, p_last)] = gp;
    }
    for (k, &(w, z, g)) in aux.iter().enumerate() {
        let (p, q) = (2 * SECTIONS + 2 * k, 2 * SECTIONS + 2 * k + 1);
        a[(p, q)] = 1.0;
        a[(q, p)] = -w * w;
        a[(q, q)] = -2.0 * z * w;
        a[(q, 1)] = w * w;
        for (j, &row) in [0usize, 2, 4].iter().enumerate() {
            c[(row, p)] = g[j];
        }
    }
    StateSpaceModel::new(a, b, c, DMatrix::zeros(6, 1), 0.0)
        .expect("wave truth dimensions")
        .with_labels(&["eta"], &DOF_LABELS)
}

/// Infinite-frequency added mass of the reference semisubmersible.
pub fn default_a_inf() -> DMatrix<f64> {
    let mut m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
        1.0e7, 1.0e7, 2.0e7, 1.2e10, 1.2e10, 6.0e9,
    ]));
    m[(0, 4)] = -1.5e8;
    m[(4, 0)] = -1.5e8;
    m[(1, 3)] = 1.5e8;
    m[(3, 1)] = 1.5e8;
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;

    #[test]
    fn truth_models_are_stable_and_sized() {
        let r = truth_radiation_model();
        let w = truth_wave_model();
        assert_eq!(r.order(), 12);
        assert_eq!(w.order(), 16);
        assert!(r.is_stable().unwrap());
        assert!(w.is_stable().unwrap());
    }

    #[test]
    fn radiation_damping_is_psd() {
        let r = truth_radiation_model();
        for k in 1..400 {
            let w = 0.01 * k as f64;
            let b = r.frf_at(w).unwrap().map(|z| z.re);
            assert!(linalg::relative_asymmetry(&b) < 1e-12);
            let scale = b.amax();
            assert!(linalg::min_symmetric_eigenvalue(&b) >= -1e-9 * scale);
        }
    }

    #[test]
    fn wave_response_vanishes_at_band_edges() {
        let w = truth_wave_model();
        let mag = |om: f64| w.frf_at(om).unwrap().map(|z| z.norm());
        let peak: Vec<f64> = (0..3)
            .map(|i| {
                (1..300)
                    .map(|k| mag(0.01 * k as f64)[([0, 2, 4][i], 0)])
                    .fold(0.0, f64::max)
            })
            .collect();
        let top = mag(3.0);
        for (i, &row) in [0usize, 2, 4].iter().enumerate() {
            assert!(top[(row, 0)] < 0.05 * peak[i], "row {row}");
        }
        assert!(mag(0.0).amax() < 1e-9);
    }

    #[test]
    fn added_mass_is_positive_definite() {
        let a = default_a_inf();
        assert!(linalg::min_symmetric_eigenvalue(&a) > 0.0);
    }
}
