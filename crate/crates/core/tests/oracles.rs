//! Checks against oracles that share no code with the library: a Taylor
//! matrix exponential, direct matrix algebra, and closed-form solutions.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use romcert::certificate::{solve_feasibility, PD_MARGIN};
use romcert::control::{cosimulate, ZeroPolicy};
use romcert::data::{collect, identity_factor_check, DataSet, DerivativeMode, Excitation};
use romcert::geometry::AaBox;
use romcert::linalg;
use romcert::rom::{self, ThetaSelection};
use romcert::scenario::{DataConfig, ScenarioConfig};
use romcert::sf::{self, SfConstants};
use romcert::systems::{self, benchmark, benchmark_names, LtiPlant};

/// `exp(M)` by scaling and squaring a degree-24 Taylor series.
fn expm_taylor(m: &DMatrix<f64>) -> DMatrix<f64> {
    let norm = m.norm();
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let scaled = m / 2f64.powi(squarings);
    let n = m.nrows();
    let mut sum = DMatrix::identity(n, n);
    let mut term = DMatrix::identity(n, n);
    for k in 1..=24 {
        term = &term * &scaled / k as f64;
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// Exact response to a constant input `u`, from the augmented exponential.
fn exact_constant_input(plant: &LtiPlant, x0: &DVector<f64>, u: &DVector<f64>, t: f64) -> DVector<f64> {
    let n = plant.state_dim();
    let m = plant.input_dim();
    let mut aug = DMatrix::zeros(n + m, n + m);
    aug.view_mut((0, 0), (n, n)).copy_from(&(plant.a() * t));
    aug.view_mut((0, n), (n, m)).copy_from(&(plant.b() * t));
    let e = expm_taylor(&aug);
    e.view((0, 0), (n, n)) * x0 + e.view((0, n), (n, m)) * u
}

/// Data settings of the shipped scenario for a benchmark.
fn scenario_data(name: &str) -> DataConfig {
    let path = format!("{}/../../scenarios/{name}.toml", env!("CARGO_MANIFEST_DIR"));
    ScenarioConfig::load(Path::new(&path)).unwrap().data
}

fn collect_like_scenario(name: &str) -> (LtiPlant, DataSet) {
    let plant = benchmark(name).unwrap().plant;
    let d = scenario_data(name);
    let ex = Excitation {
        input_box: AaBox::symmetric(plant.input_dim(), d.input_bound),
        initial_box: AaBox::symmetric(plant.state_dim(), d.initial_bound),
        seed: d.seed,
    };
    let data = collect(&plant, None, &ex, d.tau, d.samples, DerivativeMode::Exact).unwrap();
    (plant, data)
}

fn excitation(plant: &LtiPlant, seed: u64) -> Excitation {
    Excitation::uniform(AaBox::symmetric(plant.input_dim(), 1.0), plant.state_dim(), seed)
}

#[test]
fn taylor_oracle_matches_scalar_exponential() {
    let m = DMatrix::from_row_slice(2, 2, &[-3.0, 0.0, 0.0, 1.5]);
    let e = expm_taylor(&m);
    assert!((e[(0, 0)] - (-3f64).exp()).abs() < 1e-14);
    assert!((e[(1, 1)] - 1.5f64.exp()).abs() < 1e-13);
    let rot = DMatrix::from_row_slice(2, 2, &[0.0, -2.0, 2.0, 0.0]);
    let r = expm_taylor(&rot);
    assert!((r[(0, 0)] - 2f64.cos()).abs() < 1e-13);
    assert!((r[(1, 0)] - 2f64.sin()).abs() < 1e-13);
}

#[test]
fn rk4_is_fourth_order_on_stable_benchmarks() {
    let mut tested = 0;
    for name in benchmark_names() {
        let plant = benchmark(name).unwrap().plant;
        if !linalg::is_hurwitz(plant.a()) {
            continue;
        }
        tested += 1;
        let n = plant.state_dim();
        let m = plant.input_dim();
        let x0 = DVector::from_fn(n, |i, _| 1.0 - 0.3 * i as f64);
        let u = DVector::from_fn(m, |j, _| 0.5 + 0.25 * j as f64);
        let radius = linalg::spectral_norm(plant.a());
        let tau = 0.2 / radius;
        let horizon = 200.0 * tau;
        let want = exact_constant_input(&plant, &x0, &u, horizon);
        let err = |tau: f64| {
            let steps = (horizon / tau).round() as usize;
            let traj = systems::simulate(&plant, &x0, |_| u.clone(), tau, steps).unwrap();
            (traj.final_state() - &want).amax()
        };
        let coarse = err(tau);
        let fine = err(tau / 2.0);
        assert!(coarse / fine >= 8.0, "{name}: error ratio {} (coarse {coarse:e}, fine {fine:e})", coarse / fine);
    }
    assert!(tested >= 1, "no stable benchmark to test");
}

#[test]
fn exact_mode_data_satisfies_the_plant_equations() {
    for name in benchmark_names() {
        let (plant, data) = collect_like_scenario(name);
        let scale = 1.0 + data.x1.amax();
        let excited = &data.x1 - (plant.a() * &data.x0 + plant.b() * &data.u0);
        let twin = &data.xbar1 - plant.a() * &data.xbar0;
        assert!(excited.amax() / scale < 1e-13, "{name}: X1 identity {}", excited.amax());
        assert!(twin.amax() / (1.0 + data.xbar1.amax()) < 1e-13, "{name}: X1bar identity {}", twin.amax());
        assert_eq!(data.x0.column(0), data.xbar0.column(0), "{name}: shared initial state");
    }
}

#[test]
fn collected_states_follow_the_exact_flow() {
    let plant = benchmark("spacecraft").unwrap().plant;
    // ‖A‖τ ≈ 0.1 keeps one RK4 step within about 1e-7 of the exact flow.
    let tau = 0.02;
    let data = collect(&plant, None, &excitation(&plant, 9), tau, 40, DerivativeMode::Exact).unwrap();
    for k in 0..data.samples() - 1 {
        let x = data.x0.column(k).into_owned();
        let u = data.u0.column(k).into_owned();
        let next = exact_constant_input(&plant, &x, &u, tau);
        let gap = (next - data.x0.column(k + 1)).amax();
        assert!(gap < 1e-6 * (1.0 + x.amax()), "sample {k}: {gap:e}");
    }
}

#[test]
fn pseudoinverse_and_stacked_rank_hold_for_every_benchmark() {
    for name in benchmark_names() {
        let (plant, data) = collect_like_scenario(name);
        let (n, m) = (plant.state_dim(), plant.input_dim());
        let qbar = linalg::pinv(&data.xbar0, linalg::RANK_TOL);
        let id = (&data.xbar0 * &qbar - DMatrix::<f64>::identity(n, n)).norm();
        assert!(id < 1e-10, "{name}: |X0bar*Qbar - I| = {id:e}");
        assert!(identity_factor_check(&data.xbar0, &qbar).unwrap().passed);
        let stacked = linalg::vstack(&[&data.u0, &data.x0]);
        let s = stacked.svd(false, false).singular_values;
        let top = s.max();
        let rank = s.iter().filter(|v| **v > 1e-8 * top).count();
        // Motor's published sample count T = 6 is below n + m = 7, so the
        // stacked rank caps at T there.
        assert_eq!(rank, (n + m).min(data.samples()), "{name}");
    }
}

#[test]
fn identity_check_on_hand_built_factors() {
    let mut x = DMatrix::zeros(3, 5);
    x.view_mut((0, 0), (3, 3)).fill_with_identity();
    let mut q = DMatrix::zeros(5, 3);
    q.view_mut((0, 0), (3, 3)).fill_with_identity();
    let ok = identity_factor_check(&x, &q).unwrap();
    assert!(ok.passed && ok.residual == 0.0);
    q[(1, 1)] += 1.0;
    let bad = identity_factor_check(&x, &q).unwrap();
    assert!(!bad.passed && bad.residual > 0.5);
}

#[test]
fn scalar_plant_closed_loop_is_a_plus_bf() {
    let plant = LtiPlant::from_rows(1, 1, &[-1.0], &[1.0]).unwrap();
    let data = collect(&plant, None, &excitation(&plant, 1), 0.1, 4, DerivativeMode::Exact).unwrap();
    let cert = solve_feasibility(&data, 1.0, PD_MARGIN).unwrap();
    let closed = (&data.x1 * &cert.q)[(0, 0)];
    assert!((closed - (-1.0 + cert.f[(0, 0)])).abs() < 1e-10);
    assert!(closed <= -0.5 + 1e-6);
}

#[test]
fn zero_input_cosimulation_tracks_the_exponential_of_the_joint_system() {
    let plant = systems::seeded_stable_plant(3, 5).unwrap();
    let bm_plant = LtiPlant::new(plant.a().clone(), DMatrix::from_row_slice(3, 1, &[1.0, 0.0, 0.5])).unwrap();
    let data = collect(&bm_plant, None, &excitation(&bm_plant, 2), 0.1, 8, DerivativeMode::Exact).unwrap();
    let cert = solve_feasibility(&data, 0.5, PD_MARGIN).unwrap().with_epsilon(0.25).unwrap();
    let rep = rom::build_data_representation(&data, &cert).unwrap();
    let a_hat = rom::choose_a_hat(1, 0.1).unwrap();
    let (theta, xi) = rom::solve_reduction_equation_with(&rep, &a_hat, 1, &ThetaSelection::MaxMinSingular).unwrap();
    let b_hat = rom::choose_b_hat(1, 1.0).unwrap();
    let psi = sf::compute_psi(&rep, &cert.p, &theta, &b_hat).unwrap();
    let rom = rom::Rom::new(a_hat, b_hat, theta, xi, psi).unwrap();
    let constants = SfConstants::new(&cert, 0.0).unwrap();

    let x_hat0 = DVector::from_element(1, 0.7);
    let x0 = &rom.theta * &x_hat0 + DVector::from_vec(vec![0.1, -0.2, 0.05]);
    let tau = 0.01;
    let rec = cosimulate(&bm_plant, &rom, &cert, &constants, &mut ZeroPolicy(1), &x0, &x_hat0, tau, 2.0).unwrap();

    let n = 3;
    let mut joint = DMatrix::zeros(n + 1, n + 1);
    joint.view_mut((0, 0), (n, n)).copy_from(&(bm_plant.a() + bm_plant.b() * &cert.f));
    joint
        .view_mut((0, n), (n, 1))
        .copy_from(&(bm_plant.b() * (&rom.xi - &cert.f * &rom.theta)));
    joint.view_mut((n, n), (1, 1)).copy_from(&rom.a_hat);
    let mut z0 = DVector::zeros(n + 1);
    z0.rows_mut(0, n).copy_from(&x0);
    z0.rows_mut(n, 1).copy_from(&x_hat0);
    for k in [0, 50, 200] {
        let z = expm_taylor(&(&joint * rec.times[k])) * &z0;
        let gx = (z.rows(0, n) - &rec.plant_states[k]).amax();
        let gr = (z[n] - rec.rom_states[k][0]).abs();
        assert!(gx < 1e-9 && gr < 1e-10, "step {k}: plant gap {gx:e}, ROM gap {gr:e}");
    }
}
