//! Published case-study numbers, recomputed from the printed matrices.
//!
//! The printed `P` matrices carry four decimals, so derived quantities are
//! compared with tolerances sized to that rounding.

use nalgebra::DMatrix;
use romcert::linalg;
use romcert::pipeline::list_benchmarks;
use romcert::rom::{reduction_residual, DataRepresentation};
use romcert::sf::{closeness_bound, compute_psi, compute_rho};
use romcert::systems::benchmark;

fn oracle_rep(name: &str) -> DataRepresentation {
    let plant = benchmark(name).unwrap().plant;
    DataRepresentation {
        a_data: plant.a().clone(),
        b_data: plant.b().clone(),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn round4(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}

#[test]
fn motor_and_spacecraft_closeness_numbers() {
    assert_eq!(round4(closeness_bound(0.0, 5.1859e-4, 2.0, 7.5529e-5, 10.0, 0.0)), 0.7282);
    assert_eq!(round4(closeness_bound(0.0, 9.0420e-9, 4.0, 2.1718e-9, 6.0, 0.0)), 0.3603);
}

#[test]
fn published_plant_entries() {
    let motor = benchmark("motor").unwrap().plant;
    assert_eq!((motor.state_dim(), motor.input_dim()), (5, 2));
    assert_eq!(motor.a()[(0, 0)], -18.925);
    let sc = benchmark("spacecraft").unwrap().plant;
    assert_eq!(sc.b().rows(2, 2).into_owned(), DMatrix::<f64>::identity(2, 2));
    assert_eq!(sc.b().rows(0, 2).amax(), 0.0);
    let glucose = benchmark("glucose").unwrap().plant;
    let mut e2 = DMatrix::zeros(7, 1);
    e2[(1, 0)] = 1.0;
    assert_eq!(glucose.b(), &e2);
}

#[test]
fn summary_table_rows() {
    assert_eq!(
        list_benchmarks(),
        vec![
            "motor, 5, 1, safety, 6",
            "spacecraft, 4, 2, reach-while-avoid, 10",
            "glucose, 7, 1, safety, 250",
            "cart, 6, 1, tracking, 7",
            "high25, 25, 2, reach-while-avoid, 48",
        ]
    );
}

#[test]
fn motor_constants_from_printed_matrices() {
    #[rustfmt::skip]
    let p = DMatrix::from_row_slice(5, 5, &[
        0.0099, -0.0092, 0.0036, 0.0019, -0.0054,
        -0.0092, 0.0110, -0.0067, -0.0020, 0.0046,
        0.0036, -0.0067, 0.0099, 0.0020, -0.0018,
        0.0019, -0.0020, 0.0020, 0.0023, -0.0018,
        -0.0054, 0.0046, -0.0018, -0.0018, 0.0058,
    ]);
    let theta = DMatrix::from_column_slice(5, 1, &[0.2490, 0.2490, 0.0804, -0.1039, 0.0255]);
    let b_hat = DMatrix::from_element(1, 1, 1.0);
    let rep = oracle_rep("motor");

    assert!(rel(linalg::lambda_min(&p), 5.1859e-4) < 0.02);
    let psi = compute_psi(&rep, &p, &theta, &b_hat).unwrap();
    assert!((psi[(0, 0)] - 0.0045).abs() < 1.5e-3, "{psi}");
    assert!((psi[(1, 0)] + 0.0037).abs() < 1.5e-3, "{psi}");
    let rho = compute_rho(&rep, &p, &theta, &b_hat, &psi, 1.0).unwrap();
    assert!(rel(rho, 7.5529e-5) < 0.1, "rho = {rho:e}");
}

#[test]
fn spacecraft_constants_from_printed_matrices() {
    #[rustfmt::skip]
    let p = DMatrix::from_row_slice(4, 4, &[
        0.4622, -0.0556, 0.0762, -0.0158,
        -0.0556, 0.4739, 0.0003, 0.0945,
        0.0762, 0.0003, 0.0228, -0.0017,
        -0.0158, 0.0945, -0.0017, 0.0296,
    ]) * 1e-6;
    let theta = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 0.0, 1.0, -1e-4, 0.0, 0.0, -1e-4]);
    let a_hat = DMatrix::identity(2, 2) * -1e-4;
    let b_hat = DMatrix::identity(2, 2) * 0.1;
    let xi = DMatrix::from_row_slice(2, 2, &[3.1619, -0.0017, 0.0017, 3.1619]);
    let rep = oracle_rep("spacecraft");

    assert!(reduction_residual(&rep, &a_hat, &theta, &xi) < 1e-5);
    assert!(rel(linalg::lambda_min(&p), 9.0420e-9) < 5e-3);
    let psi = compute_psi(&rep, &p, &theta, &b_hat).unwrap();
    let printed = DMatrix::from_row_slice(2, 2, &[0.3313, 0.0256, -0.0342, 0.3203]);
    assert!((&psi - &printed).amax() < 1e-3, "{psi}");
    let rho = compute_rho(&rep, &p, &theta, &b_hat, &psi, 1.0).unwrap();
    assert!(rel(rho, 2.1718e-9) < 0.01, "rho = {rho:e}");
}

#[test]
fn glucose_constants_from_printed_matrices() {
    #[rustfmt::skip]
    let p = DMatrix::from_row_slice(7, 7, &[
        0.0036, -0.0002, -0.0038, 0.0004, -0.0020, -0.0011, 0.0662,
        -0.0002, 0.0006, 0.0016, 0.0003, 0.0024, -0.0016, -0.0453,
        -0.0038, 0.0016, 0.0240, 0.0053, 0.0168, -0.0173, -0.5736,
        0.0004, 0.0003, 0.0053, 0.0031, 0.0031, -0.0051, -0.1336,
        -0.0020, 0.0024, 0.0168, 0.0031, 0.0201, -0.0153, -0.4722,
        -0.0011, -0.0016, -0.0173, -0.0051, -0.0153, 0.0189, 0.4709,
        0.0662, -0.0453, -0.5736, -0.1336, -0.4722, 0.4709, 14.6800,
    ]);
    let theta = DMatrix::from_column_slice(7, 1, &[0.1553, 0.1552, 0.1554, 0.0832, -0.1831, 0.1208, 0.0131]);
    let a_hat = DMatrix::from_element(1, 1, -0.001);
    let xi = DMatrix::from_element(1, 1, 0.3479);
    let rep = oracle_rep("glucose");

    assert!(reduction_residual(&rep, &a_hat, &theta, &xi) < 5e-3);
    // α ≈ 1.4e-4 sits at the rounding scale of P's entries.
    assert!(rel(linalg::lambda_min(&p), 1.4161e-4) < 0.15);
    let psi = compute_psi(&rep, &p, &theta, &DMatrix::from_element(1, 1, 1.0)).unwrap();
    assert!(rel(psi[(0, 0)], -1.5911) < 0.1, "{psi}");
    assert!((theta.sum() - 0.5).abs() < 0.05);
}

#[test]
fn cart_constants_from_printed_matrices() {
    #[rustfmt::skip]
    let p = DMatrix::from_row_slice(6, 6, &[
        7.2436, 3.6926, 3.2721, 2.9688, 2.3036, 1.9298,
        3.6926, 2.5014, 1.1149, 1.9590, 0.8084, 1.2664,
        3.2721, 1.1149, 2.6025, 0.9937, 1.7212, 0.6680,
        2.9688, 1.9590, 0.9937, 1.5670, 0.7002, 1.0204,
        2.3036, 0.8084, 1.7212, 0.7002, 1.4650, 0.4834,
        1.9298, 1.2664, 0.6680, 1.0204, 0.4834, 0.6772,
    ]);
    let theta = DMatrix::from_column_slice(6, 1, &[0.0501, -0.0001, 0.0, 0.0, 0.0, 0.0]);
    let a_hat = DMatrix::from_element(1, 1, -0.002);
    let xi = DMatrix::from_element(1, 1, 0.05);
    let rep = oracle_rep("cart");

    assert!(reduction_residual(&rep, &a_hat, &theta, &xi) < 1e-6);
    assert!((linalg::lambda_min(&p) - 0.0047).abs() < 1e-4);
    let psi = compute_psi(&rep, &p, &theta, &DMatrix::from_element(1, 1, 1.0)).unwrap();
    assert!((psi[(0, 0)] - 0.2409).abs() < 1e-3, "{psi}");
}
