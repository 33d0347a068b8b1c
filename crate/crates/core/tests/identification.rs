use mooring_fd::hydro::{default_dataset, HydroFrd};
use mooring_fd::sysid::{
    fit_radiation_model, fit_state_space_era, fit_wave_force_model, fit_wave_force_model_with,
    fitting_error, model_frf, pem_refine, FitData, ImpulseResponse, PemOptions, StateSpaceModel,
    WaveFitOptions, PLANAR_DOFS,
};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const DT: f64 = 0.1;

fn rotation_block(r: f64, theta: f64) -> DMatrix<f64> {
    let (s, c) = theta.sin_cos();
    DMatrix::from_row_slice(2, 2, &[r * c, -r * s, r * s, r * c])
}

/// Order-4 stable system: one complex pair and two real poles, hidden behind
/// a random similarity transform.
fn random_system(radius: f64, theta: f64, p1: f64, p2: f64, seed: u64) -> StateSpaceModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = DMatrix::zeros(4, 4);
    a.view_mut((0, 0), (2, 2))
        .copy_from(&rotation_block(radius, theta));
    a[(2, 2)] = p1;
    a[(3, 3)] = p2;
    let t = DMatrix::from_fn(
        4,
        4,
        |i, j| if i == j { 1.0 } else { 0.0 } + 0.3 * rng.random_range(-1.0..1.0),
    );
    let t_inv = t.clone().try_inverse().unwrap();
    let b = DMatrix::from_fn(4, 1, |_, _| {
        rng.random_range(0.5..1.5) * if rng.random_bool(0.5) { 1.0 } else { -1.0 }
    });
    let c = DMatrix::from_fn(2, 4, |_, _| {
        rng.random_range(0.5..1.5) * if rng.random_bool(0.5) { 1.0 } else { -1.0 }
    });
    StateSpaceModel::new(&t * a * &t_inv, &t * b, c * t_inv, DMatrix::zeros(2, 1), DT).unwrap()
}

fn relative_frf_error(fit: &StateSpaceModel, truth: &StateSpaceModel) -> f64 {
    let grid: Vec<f64> = (1..200)
        .map(|k| k as f64 * 0.99 * std::f64::consts::PI / DT / 200.0)
        .collect();
    let g_fit = model_frf(fit, &grid).unwrap();
    let g_true = model_frf(truth, &grid).unwrap();
    let peak = g_true.iter().map(|g| g.norm()).fold(0.0, f64::max);
    let err = g_fit
        .iter()
        .zip(&g_true)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    err / peak
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn era_recovers_exact_realization(
        radius in 0.5f64..0.95,
        theta in 0.2f64..2.5,
        p1 in -0.8f64..-0.1,
        p2 in 0.1f64..0.85,
        seed in 0u64..1000,
    ) {
        let truth = random_system(radius, theta, p1, p2, seed);
        let h = ImpulseResponse::causal(DT, truth.markov_parameters(300)).unwrap();
        let (fit, _) = fit_state_space_era(&h, 4).unwrap();
        prop_assert_eq!(fit.order(), 4);
        let e = relative_frf_error(&fit, &truth);
        prop_assert!(e <= 1e-6, "relative FRF error {e:e}, fit poles {:?}", fit.eigenvalues().unwrap());
    }
}

fn scalar_model(a: f64, b: f64, c: f64) -> StateSpaceModel {
    StateSpaceModel::new(
        DMatrix::from_element(1, 1, a),
        DMatrix::from_element(1, 1, b),
        DMatrix::from_element(1, 1, c),
        DMatrix::zeros(1, 1),
        DT,
    )
    .unwrap()
}

#[test]
fn pem_never_increases_fitting_error() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..100 {
        // Second-order data, first- or second-order starting models.
        let truth = random_system(
            rng.random_range(0.5..0.9),
            rng.random_range(0.3..2.0),
            -0.4,
            0.6,
            trial,
        );
        let h = ImpulseResponse::causal(DT, truth.markov_parameters(120)).unwrap();
        let data = FitData::Impulse(h.clone());
        let order = 1 + trial as usize % 3;
        let (init, _) = fit_state_space_era(&h, order).unwrap();
        let init = if trial % 2 == 0 {
            init
        } else {
            let mut m = init;
            m.a *= rng.random_range(0.8..0.98);
            m
        };
        let before = fitting_error(&init, &data).unwrap();
        let (refined, _) = pem_refine(
            &init,
            &data,
            PemOptions {
                max_iter: 15,
                tol: 1e-9,
            },
        )
        .unwrap();
        let after = fitting_error(&refined, &data).unwrap();
        assert!(after <= before, "trial {trial}: {after} > {before}");
        assert!(refined.is_stable().unwrap());
    }
}

#[test]
fn pem_scalar_fixed_point_in_io_form() {
    let truth = scalar_model(0.7, 1.0, 0.5);
    let u = DMatrix::from_fn(200, 1, |k, _| ((k * 7919) % 13) as f64 - 6.0);
    let y = truth.simulate(&u);
    let data = FitData::InputOutput { u, y };
    assert!(fitting_error(&truth, &data).unwrap() < 1e-12);
    let (m, _) = pem_refine(&scalar_model(0.6, 1.0, 0.5), &data, PemOptions::default()).unwrap();
    assert!((m.a[(0, 0)] - 0.7).abs() < 1e-6);
}

#[test]
fn radiation_error_shrinks_with_order() {
    let frd = default_dataset();
    let (_, low) = fit_radiation_model(&frd, 1, &PLANAR_DOFS).unwrap();
    let (m6, high) = fit_radiation_model(&frd, 6, &PLANAR_DOFS).unwrap();
    assert!(high.max_hinf() <= 0.05, "{}", high.max_hinf());
    assert!(low.max_hinf() > high.max_hinf());
    assert!(m6.is_stable().unwrap());
}

#[test]
fn default_wave_model_is_stable_and_within_band_target() {
    let (m, report) = fit_wave_force_model(&default_dataset(), 8, 4.0).unwrap();
    assert!(m.is_stable().unwrap());
    assert!(report.max_hinf() <= 0.08, "{}", report.max_hinf());
}

fn with_wave_coefficients(f: impl Fn(f64) -> Complex64) -> HydroFrd {
    let mut frd = default_dataset();
    frd.x_omega = frd
        .omega
        .iter()
        .map(|&w| DVector::from_fn(6, |_, _| f(w)))
        .collect();
    frd
}

#[test]
fn zero_wave_coefficients_give_zero_model() {
    let frd = with_wave_coefficients(|_| Complex64::new(0.0, 0.0));
    let (m, _) = fit_wave_force_model(&frd, 8, 4.0).unwrap();
    let h = m.markov_parameters(200);
    assert!(h.iter().all(|hk| hk.amax() == 0.0));
}

#[test]
fn pure_delay_shows_up_in_the_step_response() {
    // Unit gain delayed by 2 s with a smooth roll-off instead of a hard band
    // edge, whose ringing would leak past the shift. The grid carries no
    // energy near DC, so the step response sags afterwards; its steepest
    // rise marks the delay.
    let delay = 2.0;
    let t_d = 4.0;
    let frd =
        with_wave_coefficients(|w| Complex64::from_polar((-(w / 1.2).powi(2)).exp(), -w * delay));
    let opts = WaveFitOptions {
        order: 8,
        t_d,
        dofs: vec![0],
        ..WaveFitOptions::default()
    };
    let (m, _) = fit_wave_force_model_with(&frd, &opts).unwrap();
    let n = 400;
    let y = m.simulate(&DMatrix::from_element(n, 1, 1.0));
    let k_rise = (1..n)
        .max_by(|&a, &b| (y[(a, 0)] - y[(a - 1, 0)]).total_cmp(&(y[(b, 0)] - y[(b - 1, 0)])))
        .unwrap();
    let t_rise = k_rise as f64 * DT;
    assert!(
        (t_rise - (delay + t_d)).abs() <= 2.0 * DT + 1e-9,
        "steepest rise at {t_rise} s"
    );
}
