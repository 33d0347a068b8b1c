use mooring_fd::cli::commands::{build_linear_model, plant_params, simulate_case};
use mooring_fd::cli::RunConfig;
use mooring_fd::detect::{
    baseline_statistics, calibrate_detector, chebyshev_threshold, mahalanobis_distance,
    observer_step, run_detection, solve_dare_gain, CalibrationOptions, DetectorModel,
};
use mooring_fd::hydro::default_dataset;
use mooring_fd::linmodel::AssembledModel;
use mooring_fd::mooring::{FaultEvent, FaultKind};
use mooring_fd::plant::{find_equilibrium, Equilibrium, PlantParams, RunRecord};
use mooring_fd::sysid::{fit_radiation_model, fit_wave_force_model, PLANAR_DOFS};
use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::sync::OnceLock;

struct Fixture {
    cfg: RunConfig,
    params: PlantParams,
    eq: Equilibrium,
    model: AssembledModel,
    det: DetectorModel,
    healthy: RunRecord,
}

fn fixture() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let cfg = RunConfig::default();
        let frd = default_dataset();
        let (rad, _) = fit_radiation_model(&frd, 6, &PLANAR_DOFS).unwrap();
        let (wave, _) = fit_wave_force_model(&frd, 8, 4.0).unwrap();
        let params = plant_params(&cfg).unwrap();
        let eq = find_equilibrium(cfg.wind_speed, &params).unwrap();
        let model = build_linear_model(&cfg, &params, &eq, &rad, &wave).unwrap();
        let cal = simulate_case(&cfg, &params, &eq, &[], 101, cfg.sim.noise).unwrap();
        let opts = CalibrationOptions {
            noise: cfg.sim.noise,
            ..CalibrationOptions::default()
        };
        let det = calibrate_detector(&model, &cal, &opts).unwrap();
        let healthy = simulate_case(&cfg, &params, &eq, &[], 1, cfg.sim.noise).unwrap();
        Fixture {
            cfg,
            params,
            eq,
            model,
            det,
            healthy,
        }
    })
}

fn gaussian(n: usize, seed: u64, mix: &Matrix3<f64>) -> Vec<Vector3<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let e = Vector3::from_fn(|_, _| StandardNormal.sample(&mut rng));
            mix * e
        })
        .collect()
}

#[test]
fn observer_is_stable_on_the_assembled_model() {
    let f = fixture();
    let det = &f.det;
    assert!(det.observer.closed_loop_radius().unwrap() < 1.0);
    let sol = solve_dare_gain(
        &f.model.dt_model.a,
        &f.model.dt_model.c,
        &det.q_cov,
        &det.r_cov,
    )
    .unwrap();
    assert!((&sol.l - &det.observer.l_gain).amax() <= 1e-9 * det.observer.l_gain.amax());
    let chol = nalgebra::Cholesky::new(det.stats.sigma);
    assert!(chol.is_some());
}

#[test]
fn zero_gain_observer_is_a_plain_simulation() {
    let sys = &fixture().model.dt_model;
    let l = DMatrix::zeros(sys.order(), 3);
    let mut x_obs = DVector::zeros(sys.order());
    let mut x_sim = x_obs.clone();
    for k in 0..50 {
        let u = DVector::from_vec(vec![
            0.01 * (k as f64).sin(),
            0.1,
            0.0,
            0.5 * (0.3 * k as f64).cos(),
        ]);
        let y = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        let (next, y_hat, _) = observer_step(sys, &l, &x_obs, &u, &y);
        let (sim_next, sim_y) = sys.step(&x_sim, &u);
        assert_eq!(next, sim_next);
        assert_eq!(y_hat, sim_y);
        x_obs = next;
        x_sim = sim_next;
    }
}

#[test]
fn healthy_residuals_are_centred_and_bounded() {
    let f = fixture();
    let z = f.det.observer.residuals(&f.healthy.u, &f.healthy.y);
    let (k0, k1) = (2000, 14000);
    let w = &z[k0..=k1];
    let n = w.len() as f64;
    for c in 0..3 {
        let mean = w.iter().map(|v| v[c]).sum::<f64>() / n;
        let std = (w.iter().map(|v| (v[c] - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        assert!(
            mean.abs() <= 0.1 * std,
            "channel {c}: mean {mean:e}, std {std:e}"
        );
    }
    assert!(
        (1.0..=2.5).contains(&f.det.mean_d),
        "mean_d {}",
        f.det.mean_d
    );
    let r = run_detection(&f.det, &f.healthy, 3).unwrap();
    assert!(!r.detected() && r.false_confirmed == 0);
    assert!(r.far <= 1.0 / 36.0);
}

#[test]
fn faulted_run_matches_its_twin_before_the_fault() {
    let f = fixture();
    let fault = FaultEvent {
        kind: FaultKind::FairleadRelease,
        line_index: 1,
        time: 1500.0,
        theta_x: 0.0,
    };
    let run = simulate_case(&f.cfg, &f.params, &f.eq, &[fault], 1, f.cfg.sim.noise).unwrap();
    let a = run_detection(&f.det, &run, 3).unwrap();
    let b = run_detection(&f.det, &f.healthy, 3).unwrap();
    let k = 15000;
    assert_eq!(run.t[k], 1500.0);
    assert_eq!(a.d_series[..k], b.d_series[..k]);
    assert_eq!(a.confirmed[..k], b.confirmed[..k]);
    let delay = a.detection_delay.expect("line 1 release detected");
    assert!((0.0..=30.0).contains(&delay));
}

#[test]
fn fault_on_the_last_sample_cannot_be_confirmed() {
    let f = fixture();
    let t_last = f.healthy.t[f.healthy.len() - 1];
    let fault = FaultEvent {
        kind: FaultKind::FairleadRelease,
        line_index: 1,
        time: t_last,
        theta_x: 0.0,
    };
    let run = simulate_case(&f.cfg, &f.params, &f.eq, &[fault], 1, f.cfg.sim.noise).unwrap();
    let r = run_detection(&f.det, &run, 3).unwrap();
    assert_eq!(r.fault_time, Some(t_last));
    assert!(r.detection_delay.is_none() && !r.detected());
}

#[test]
fn calibration_round_trips_through_the_file() {
    let f = fixture();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("calibration.csv");
    f.det.save(&path).unwrap();
    let back = DetectorModel::load(&path).unwrap();
    let a = run_detection(&f.det, &f.healthy, 3).unwrap();
    let b = run_detection(&back, &f.healthy, 3).unwrap();
    assert_eq!(a.d_series, b.d_series);
    assert_eq!(back.threshold, f.det.threshold);
}

#[test]
fn squared_distance_averages_the_dimension() {
    let z = gaussian(100_000, 7, &Matrix3::identity());
    let base = baseline_statistics(&z, 0).unwrap();
    let mean_d2 = z
        .iter()
        .map(|v| base.stats.distance(v).powi(2))
        .sum::<f64>()
        / z.len() as f64;
    assert!((mean_d2 - 3.0).abs() <= 0.1, "mean d^2 = {mean_d2}");
}

#[test]
fn gaussian_exceedance_respects_the_chebyshev_bound() {
    let mix = Matrix3::new(1.0, 0.0, 0.0, 0.5, 2.0, 0.0, -0.3, 0.4, 0.7);
    let z = gaussian(100_000, 9, &mix);
    let base = baseline_statistics(&z, 0).unwrap();
    let (thr, bound) = chebyshev_threshold(base.mean_d, base.std_d, 6.0).unwrap();
    assert!((bound - 1.0 / 36.0).abs() < 1e-15);
    let fresh = gaussian(100_000, 10, &mix);
    let rate = fresh
        .iter()
        .filter(|v| base.stats.distance(v) > thr)
        .count() as f64
        / fresh.len() as f64;
    assert!(rate <= bound, "exceedance {rate}");
}

#[test]
fn distance_is_invariant_under_channel_rescaling() {
    let mix = Matrix3::new(1.0, 0.2, 0.0, 0.5, 2.0, 0.0, -0.3, 0.4, 0.7);
    let z = gaussian(5000, 3, &mix);
    let scale = Vector3::new(1e-3, 40.0, 0.7);
    let zs: Vec<Vector3<f64>> = z.iter().map(|v| v.component_mul(&scale)).collect();
    let a = baseline_statistics(&z, 0).unwrap();
    let b = baseline_statistics(&zs, 0).unwrap();
    for (u, v) in z.iter().zip(&zs).take(500) {
        let (da, db) = (a.stats.distance(u), b.stats.distance(v));
        assert!((da - db).abs() <= 1e-9 * da.max(1.0));
    }
    assert!((a.mean_d - b.mean_d).abs() <= 1e-9);
}

proptest! {
    #[test]
    fn distance_matches_explicit_inverse(
        l in prop::array::uniform6(-1.0f64..1.0),
        diag in prop::array::uniform3(0.2f64..3.0),
        z in prop::array::uniform3(-5.0f64..5.0),
        zb in prop::array::uniform3(-1.0f64..1.0),
    ) {
        let low = Matrix3::new(diag[0], 0.0, 0.0, l[0], diag[1], 0.0, l[1], l[2], diag[2]);
        let sigma = low * low.transpose() + Matrix3::identity() * 1e-3 * l[3].abs();
        let (z, zb) = (Vector3::from(z), Vector3::from(zb));
        let d = mahalanobis_distance(&z, &zb, &sigma).unwrap();
        let e = z - zb;
        let d2 = (e.transpose() * sigma.try_inverse().unwrap() * e)[(0, 0)];
        prop_assert!(d >= 0.0);
        prop_assert!((d * d - d2).abs() <= 1e-10 * d2.max(1.0), "{} vs {}", d * d, d2);
        prop_assert!(mahalanobis_distance(&zb, &zb, &sigma).unwrap().abs() <= 1e-12);
        let _ = (l[4], l[5]);
    }
}
