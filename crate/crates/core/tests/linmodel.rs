use mooring_fd::hydro::{default_dataset, WaveRealization};
use mooring_fd::linalg;
use mooring_fd::linmodel::{
    assemble_linear_model, discretize_zoh, linearize_aero, AeroGradients, AssembledModel,
    OperatingPoint, N_MECH,
};
use mooring_fd::mooring::{healthy_states, linearize_mooring_stiffness};
use mooring_fd::plant::{
    aero_loads, find_equilibrium, simulate_plant_from, AeroSurface, Equilibrium, PlantParams,
    PlantState, SimOptions,
};
use mooring_fd::sysid::{fit_radiation_model, fit_wave_force_model, StateSpaceModel, PLANAR_DOFS};
use nalgebra::{DMatrix, DVector, Matrix6};
use num_complex::Complex64;
use proptest::prelude::*;
use std::sync::OnceLock;

struct Fixture {
    params: PlantParams,
    eq: Equilibrium,
    model: AssembledModel,
}

fn fixture() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let params = PlantParams::reference().unwrap();
        let eq = find_equilibrium(16.0, &params).unwrap();
        let frd = default_dataset();
        let (rad, _) = fit_radiation_model(&frd, 6, &PLANAR_DOFS).unwrap();
        let (wave, _) = fit_wave_force_model(&frd, 8, 4.0).unwrap();
        let op = OperatingPoint::from_equilibrium(&params, &eq, 1e-4).unwrap();
        let km = linearize_mooring_stiffness(
            &params.lines,
            &healthy_states(&params.lines),
            &eq.xi,
            1e-3,
        )
        .unwrap();
        let model = assemble_linear_model(
            &op,
            &km,
            &params.k_hydrostatic,
            Some(&rad),
            Some(&wave),
            &params,
            0.1,
        )
        .unwrap();
        Fixture { params, eq, model }
    })
}

#[test]
fn constant_surfaces_give_homogeneous_gradients() {
    let mut p = PlantParams::reference().unwrap();
    p.aero = AeroSurface::Constant {
        c_q: 0.05,
        c_t: 0.6,
    };
    let (v, omega, pitch) = (16.0, 1.0, 0.2);
    let g = linearize_aero(&p, v, omega, pitch, 1e-4).unwrap();
    let l = aero_loads(v, omega, pitch, &p);
    assert!(g.dq_dpitch.abs() < 1e-6 * l.q_aero && g.dt_dpitch.abs() < 1e-6 * l.thrust);
    assert!((g.dq_dv - 2.0 * l.q_aero / v).abs() <= 1e-6 * g.dq_dv.abs());
    assert!((g.dt_dv - 2.0 * l.thrust / v).abs() <= 1e-6 * g.dt_dv.abs());
}

/// Slope at zero of the least-squares quadratic through `f(k h)`, `k = -5..=5`.
fn quadratic_slope(f: impl Fn(f64) -> f64, h: f64) -> f64 {
    let ks: Vec<f64> = (-5..=5).map(|k| k as f64 * h).collect();
    let a = DMatrix::from_fn(ks.len(), 3, |i, j| ks[i].powi(j as i32));
    let y = DVector::from_iterator(ks.len(), ks.iter().map(|&x| f(x)));
    let coef = (a.transpose() * &a)
        .lu()
        .solve(&(a.transpose() * y))
        .unwrap();
    coef[1]
}

#[test]
fn gradients_match_quadratic_fit_and_ignore_step_size() {
    let Fixture { params, eq, .. } = fixture();
    let g = linearize_aero(params, 16.0, eq.omega, eq.pitch, 1e-4).unwrap();
    let g2 = linearize_aero(params, 16.0, eq.omega, eq.pitch, 5e-5).unwrap();
    assert!(g.dq_dpitch < 0.0 && g.flags.is_empty());
    let q = |v: f64, o: f64, p: f64| aero_loads(v, o, p, params).q_aero;
    let t = |v: f64, o: f64, p: f64| aero_loads(v, o, p, params).thrust;
    let (v0, o0, p0) = (16.0, eq.omega, eq.pitch);
    let oracle = [
        (
            g.dq_domega,
            g2.dq_domega,
            quadratic_slope(|d| q(v0, o0 + d, p0), 1e-3 * o0),
        ),
        (
            g.dq_dpitch,
            g2.dq_dpitch,
            quadratic_slope(|d| q(v0, o0, p0 + d), 1e-3 * p0),
        ),
        (
            g.dq_dv,
            g2.dq_dv,
            quadratic_slope(|d| q(v0 + d, o0, p0), 1e-3 * v0),
        ),
        (
            g.dt_domega,
            g2.dt_domega,
            quadratic_slope(|d| t(v0, o0 + d, p0), 1e-3 * o0),
        ),
        (
            g.dt_dpitch,
            g2.dt_dpitch,
            quadratic_slope(|d| t(v0, o0, p0 + d), 1e-3 * p0),
        ),
        (
            g.dt_dv,
            g2.dt_dv,
            quadratic_slope(|d| t(v0 + d, o0, p0), 1e-3 * v0),
        ),
    ];
    for (i, (a, b, o)) in oracle.iter().enumerate() {
        assert!(
            (a - o).abs() <= 5e-3 * o.abs(),
            "gradient {i}: {a} vs oracle {o}"
        );
        assert!(
            (a - b).abs() <= 1e-3 * a.abs(),
            "gradient {i}: {a} vs half step {b}"
        );
    }
}

#[test]
fn degenerate_assembly_is_a_double_integrator() {
    let Fixture { params, eq, .. } = fixture();
    let mut p = params.clone();
    p.b_visc = Matrix6::zeros();
    let mut op = OperatingPoint::from_equilibrium(&p, eq, 1e-4).unwrap();
    op.grads = AeroGradients::zero();
    let m = assemble_linear_model(
        &op,
        &DMatrix::zeros(6, 6),
        &Matrix6::zeros(),
        None,
        None,
        &p,
        0.1,
    )
    .unwrap();
    let mut expected = DMatrix::zeros(N_MECH, N_MECH);
    for k in 0..6 {
        expected[(7 + k, 1 + k)] = 1.0;
    }
    assert_eq!(m.ct.a, expected);
    assert_eq!(m.dt_model.order(), N_MECH);
    // Discrete double integrator: xi_{k+1} = xi_k + dt * xi_dot_k.
    for k in 0..6 {
        assert!((m.dt_model.a[(7 + k, 1 + k)] - 0.1).abs() < 1e-12);
        assert_eq!(m.dt_model.a[(7 + k, 7 + k)], 1.0);
    }
}

#[test]
fn block_pattern_has_exact_zeros() {
    let m = &fixture().model;
    let ct = &m.ct.a;
    // Rotor speed does not see platform displacement; displacement rows are
    // the pure kinematic identity.
    for c in 7..13 {
        assert_eq!(ct[(0, c)], 0.0);
    }
    for r in 7..13 {
        for c in 0..N_MECH {
            assert_eq!(ct[(r, c)], if c == r - 6 { 1.0 } else { 0.0 });
        }
    }
    let a = &m.dt_model.a;
    let rad = m.blocks.states.iter().find(|b| b.0 == "radiation").unwrap();
    let wave = m.blocks.states.iter().find(|b| b.0 == "wave").unwrap();
    // Wave states evolve on their own; radiation states are driven by
    // velocities only.
    for r in wave.1..wave.1 + wave.2 {
        for c in 0..wave.1 {
            assert_eq!(a[(r, c)], 0.0, "wave row {r} col {c}");
        }
    }
    for r in rad.1..rad.1 + rad.2 {
        assert_eq!(a[(r, 0)], 0.0);
        for c in (7..13).chain(wave.1..wave.1 + wave.2) {
            assert_eq!(a[(r, c)], 0.0, "radiation row {r} col {c}");
        }
    }
    // Only the elevation drives the wave block; only actuators drive the rest.
    for r in 0..a.nrows() {
        let in_wave = (wave.1..wave.1 + wave.2).contains(&r);
        if in_wave {
            assert!((0..3).all(|c| m.dt_model.b[(r, c)] == 0.0));
        } else {
            assert_eq!(m.dt_model.b[(r, 3)], 0.0);
        }
    }
}

/// Period from the mean spacing of upward zero crossings.
fn crossing_period(x: &[f64], dt: f64) -> f64 {
    let ups: Vec<f64> = x
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0] < 0.0 && w[1] >= 0.0)
        .map(|(k, w)| (k as f64 + w[0] / (w[0] - w[1])) * dt)
        .collect();
    assert!(ups.len() >= 3, "too few crossings");
    (ups[ups.len() - 1] - ups[0]) / (ups.len() - 1) as f64
}

#[test]
fn surge_period_matches_truth_free_decay() {
    let Fixture { params, eq, model } = fixture();
    assert!(model.dt_model.is_stable().unwrap());
    let duration = 1500.0;
    let calm = WaveRealization::calm(0.1, 15001);
    let mut init = PlantState::at_equilibrium(params, eq);
    init.xi[0] += 3.0;
    let opts = SimOptions {
        duration,
        noise: [0.0; 3],
        ..SimOptions::default()
    };
    let rec = simulate_plant_from(params, &calm, init, &opts).unwrap();
    let truth: Vec<f64> = rec.xi.iter().map(|x| x[0] - eq.xi[0]).collect();

    let sys = &model.dt_model;
    let mut x = DVector::zeros(sys.order());
    x[7] = 3.0;
    let u = DVector::zeros(4);
    let mut lin = Vec::with_capacity(truth.len());
    for _ in 0..truth.len() {
        let (next, y) = sys.step(&x, &u);
        lin.push(y[1]);
        x = next;
    }
    let (t_truth, t_lin) = (crossing_period(&truth, 0.1), crossing_period(&lin, 0.1));
    assert!(
        (t_lin / t_truth - 1.0).abs() <= 0.2,
        "linear {t_lin} s vs truth {t_truth} s"
    );
}

fn random_matrix(seed: u64, n: usize) -> DMatrix<f64> {
    let mut s = seed
        .wrapping_mul(6364136223846793005)
        .wrapping_add(1442695040888963407);
    DMatrix::from_fn(n, n, |_, _| {
        s = s
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    })
}

#[test]
fn zoh_maps_eigenvalues_through_the_exponential() {
    let dt = 0.1;
    let modes = [
        (-0.3, 1.2),
        (-0.05, 0.4),
        (-1.0, 0.0),
        (-2.0, 0.0),
        (-0.5, 3.0),
    ];
    let mut diag = DMatrix::zeros(8, 8);
    let mut k = 0;
    let mut expected = Vec::new();
    for &(re, im) in &modes {
        if im == 0.0 {
            diag[(k, k)] = re;
            expected.push(Complex64::new(re, 0.0));
            k += 1;
        } else {
            diag[(k, k)] = re;
            diag[(k + 1, k + 1)] = re;
            diag[(k, k + 1)] = im;
            diag[(k + 1, k)] = -im;
            expected.push(Complex64::new(re, im));
            expected.push(Complex64::new(re, -im));
            k += 2;
        }
    }
    assert_eq!(k, 8);
    let t = DMatrix::identity(8, 8) + random_matrix(3, 8) * 0.3;
    let a = &t * diag * t.clone().try_inverse().unwrap();
    let ct = StateSpaceModel::new(
        a,
        DMatrix::zeros(8, 1),
        DMatrix::zeros(1, 8),
        DMatrix::zeros(1, 1),
        0.0,
    )
    .unwrap();
    let d = discretize_zoh(&ct, dt).unwrap();
    let got = linalg::eigenvalues(&d.a).unwrap();
    for l in expected {
        let z = (l * dt).exp();
        let best = got
            .iter()
            .map(|g| (g - z).norm())
            .fold(f64::INFINITY, f64::min);
        assert!(best <= 1e-9, "missing {z}: nearest at {best:e}");
    }
}

fn rk4_hold(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    x: &DVector<f64>,
    u: &DVector<f64>,
    dt: f64,
    n: usize,
) -> DVector<f64> {
    let h = dt / n as f64;
    let f = |x: &DVector<f64>| a * x + b * u;
    let mut x = x.clone();
    for _ in 0..n {
        let k1 = f(&x);
        let k2 = f(&(&x + &k1 * (0.5 * h)));
        let k3 = f(&(&x + &k2 * (0.5 * h)));
        let k4 = f(&(&x + &k3 * h));
        x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    }
    x
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn zoh_matches_held_input_integration(seed in 0u64..10_000, dt in 0.05f64..0.5) {
        let n = 4;
        let raw = random_matrix(seed, n);
        // Shift the spectrum into the left half plane.
        let shift = linalg::max_real_eigenvalue(&raw).unwrap() + 0.2;
        let a = raw - DMatrix::identity(n, n) * shift;
        let b = random_matrix(seed + 1, n).columns(0, 2).into_owned();
        let ct = StateSpaceModel::new(a.clone(), b.clone(), DMatrix::identity(n, n), DMatrix::zeros(n, 2), 0.0).unwrap();
        let d = discretize_zoh(&ct, dt).unwrap();
        let mut xd = DVector::from_element(n, 1.0);
        let mut xc = xd.clone();
        for k in 0..20 {
            let u = DVector::from_vec(vec![(k as f64 * 0.7).sin(), if k % 3 == 0 { 1.0 } else { -0.5 }]);
            xd = &d.a * &xd + &d.b * &u;
            xc = rk4_hold(&a, &b, &xc, &u, dt, 200);
            let scale = xc.norm().max(1e-3);
            prop_assert!((&xd - &xc).norm() <= 1e-8 * scale, "step {k}: {:e}", (&xd - &xc).norm() / scale);
        }
    }
}
