//! The quadratic simulation function `V(x, x̂) = (x − Θx̂)ᵀP(x − Θx̂)`, its
//! constants, the closeness bound, and the autonomous verification mode.

use std::io::Write;

use nalgebra::{Complex, DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::certificate::{self, Certificate};
use crate::control::refine_input;
use crate::data::DataSet;
use crate::error::{Error, Result};
use crate::geometry::AaBox;
use crate::linalg;
use crate::rom::{DataRepresentation, Rom};
use crate::systems::LtiPlant;

/// Gram matrices with a larger condition number are treated as singular.
pub const GRAM_CONDITION_LIMIT: f64 = 1e12;
/// Relative slack for the sampled SF inequalities.
pub const SF_SLACK: f64 = 1e-9;
pub const AUTONOMOUS_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SfConstants {
    pub alpha: f64,
    pub kappa: f64,
    pub rho: f64,
    pub kappa_hat: f64,
    pub epsilon: f64,
}

impl SfConstants {
    pub fn new(cert: &Certificate, rho: f64) -> Result<Self> {
        if !(rho >= 0.0) {
            return Err(Error::InvalidArgument(format!("rho must be nonnegative, got {rho}")));
        }
        if !(cert.alpha > 0.0) || !(cert.kappa > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "alpha and kappa must be positive, got alpha = {}, kappa = {}",
                cert.alpha, cert.kappa
            )));
        }
        Ok(Self {
            alpha: cert.alpha,
            kappa: cert.kappa,
            rho,
            kappa_hat: cert.kappa_hat,
            epsilon: cert.epsilon,
        })
    }

    /// `ρ/(ακ)`, the gain from `‖û‖_∞` to the steady part of the bound.
    pub fn steady_gain(&self) -> f64 {
        self.rho / (self.alpha * self.kappa)
    }

    pub fn bound(&self, v0: f64, u_hat_sup: f64, t: f64) -> f64 {
        closeness_bound(v0, self.alpha, self.kappa, self.rho, u_hat_sup, t)
    }
}

fn check_vec(what: &str, v: &DVector<f64>, len: usize) -> Result<()> {
    if v.len() != len {
        return Err(Error::dim(what, len, v.len()));
    }
    Ok(())
}

pub fn evaluate_sf(x: &DVector<f64>, x_hat: &DVector<f64>, p: &DMatrix<f64>, theta: &DMatrix<f64>) -> Result<f64> {
    if !p.is_square() || p.nrows() != theta.nrows() {
        return Err(Error::dim(
            "P",
            format!("{0}x{0}", theta.nrows()),
            format!("{}x{}", p.nrows(), p.ncols()),
        ));
    }
    check_vec("x", x, theta.nrows())?;
    check_vec("x_hat", x_hat, theta.ncols())?;
    let e = x - theta * x_hat;
    Ok((e.transpose() * p * &e)[(0, 0)].max(0.0))
}

/// `Ψ = (BᵀPB)⁻¹BᵀPΘB̂`, the weighted least-squares minimiser of `‖√P(BΨ − ΘB̂)‖`.
pub fn compute_psi(
    rep: &DataRepresentation,
    p: &DMatrix<f64>,
    theta: &DMatrix<f64>,
    b_hat: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let b = &rep.b_data;
    if p.shape() != (b.nrows(), b.nrows()) || theta.nrows() != b.nrows() || theta.ncols() != b_hat.nrows() {
        return Err(Error::dim(
            "Ψ inputs",
            format!("P {0}x{0}, Θ {0}xn̂, B̂ n̂xm̂", b.nrows()),
            format!(
                "P {}x{}, Θ {}x{}, B̂ {}x{}",
                p.nrows(),
                p.ncols(),
                theta.nrows(),
                theta.ncols(),
                b_hat.nrows(),
                b_hat.ncols()
            ),
        ));
    }
    let gram = linalg::sym(&(b.transpose() * p * b));
    let sv = linalg::singular_values(&gram);
    let smin = sv.last().copied().unwrap_or(0.0);
    let condition = if smin > 0.0 { sv[0] / smin } else { f64::INFINITY };
    if !(condition < GRAM_CONDITION_LIMIT) {
        return Err(Error::SingularGram { condition });
    }
    let rhs = b.transpose() * p * theta * b_hat;
    gram.clone()
        .cholesky()
        .map(|c| c.solve(&rhs))
        .or_else(|| gram.try_inverse().map(|g| g * &rhs))
        .ok_or(Error::SingularGram { condition })
}

/// `(1/ε)‖√P(BΨ − ΘB̂)‖₂²`.
pub fn compute_rho(
    rep: &DataRepresentation,
    p: &DMatrix<f64>,
    theta: &DMatrix<f64>,
    b_hat: &DMatrix<f64>,
    psi: &DMatrix<f64>,
    epsilon: f64,
) -> Result<f64> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
    }
    let r = &rep.b_data * psi - theta * b_hat;
    let m = linalg::sym_sqrt(p) * r;
    Ok(linalg::spectral_norm(&m).powi(2) / epsilon)
}

/// `(1/α)·v0·e^{−κt} + (ρ/(ακ))·û_sup`.
pub fn closeness_bound(v0: f64, alpha: f64, kappa: f64, rho: f64, u_hat_sup: f64, t: f64) -> f64 {
    v0 * (-kappa * t).exp() / alpha + rho / (alpha * kappa) * u_hat_sup
}

/// Comparison-lemma form `√(v0·e^{−κt}/α) + √(ρ/(ακ))·û_sup`, which follows
/// directly from `α‖e‖² ≤ V` and `V̇ ≤ −κV + ρ‖û‖²`.
pub fn comparison_bound(v0: f64, alpha: f64, kappa: f64, rho: f64, u_hat_sup: f64, t: f64) -> f64 {
    (v0 * (-kappa * t).exp() / alpha).sqrt() + (rho / (alpha * kappa)).sqrt() * u_hat_sup
}

/// A bound curve over a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosenessBound {
    pub v0: f64,
    pub u_hat_sup: f64,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl ClosenessBound {
    pub fn new(constants: &SfConstants, v0: f64, u_hat_sup: f64, times: &[f64]) -> Self {
        let values = times.iter().map(|&t| constants.bound(v0, u_hat_sup, t)).collect();
        Self {
            v0,
            u_hat_sup,
            times: times.to_vec(),
            values,
        }
    }

    /// Value as `t → ∞`.
    pub fn limit(constants: &SfConstants, u_hat_sup: f64) -> f64 {
        constants.steady_gain() * u_hat_sup
    }

    /// CSV with columns `t,bound,empirical_error`.
    pub fn write_csv<W: Write>(&self, empirical: &[f64], out: W) -> Result<()> {
        if empirical.len() != self.times.len() {
            return Err(Error::dim("empirical error curve", self.times.len(), empirical.len()));
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "bound", "empirical_error"])?;
        for ((t, b), e) in self.times.iter().zip(&self.values).zip(empirical) {
            w.write_record([format!("{t:.17e}"), format!("{b:.17e}"), format!("{e:.17e}")])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Boxes the SF check samples `x`, `x̂` and `û` from.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingBoxes {
    pub state: AaBox,
    pub rom_state: AaBox,
    pub rom_input: AaBox,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub x: DVector<f64>,
    pub x_hat: DVector<f64>,
    pub u_hat: DVector<f64>,
    pub v: f64,
    pub lie: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SfReport {
    pub samples: usize,
    pub violations_lower: usize,
    pub violations_decay: usize,
    /// Largest normalised excess of `α‖x − Θx̂‖² − V`.
    pub max_violation_lower: f64,
    /// Largest normalised excess of `LV + κV − ρ‖û‖²`.
    pub max_violation_decay: f64,
    pub witness: Option<Witness>,
}

impl SfReport {
    pub fn passed(&self) -> bool {
        self.violations_lower == 0 && self.violations_decay == 0
    }
}

/// `LV = 2(x − Θx̂)ᵀP[(Ax + Bu) − Θ(Âx̂ + B̂û)]` with `u` from the interface map.
pub fn lie_derivative(
    plant: &LtiPlant,
    cert: &Certificate,
    rom: &Rom,
    x: &DVector<f64>,
    x_hat: &DVector<f64>,
    u_hat: &DVector<f64>,
) -> Result<f64> {
    let u = refine_input(x, x_hat, u_hat, rom, &cert.f)?;
    let e = x - &rom.theta * x_hat;
    let dx = plant.a() * x + plant.b() * u;
    let dxh = &rom.a_hat * x_hat + &rom.b_hat * u_hat;
    Ok(2.0 * (e.transpose() * &cert.p * (dx - &rom.theta * dxh))[(0, 0)])
}

/// Evaluate both SF inequalities on seeded random samples without failing.
pub fn sample_sf_conditions(
    plant: &LtiPlant,
    cert: &Certificate,
    rom: &Rom,
    constants: &SfConstants,
    boxes: &SamplingBoxes,
    sample_count: usize,
    seed: u64,
) -> Result<SfReport> {
    let n = plant.state_dim();
    if boxes.state.dim() != n || boxes.rom_state.dim() != rom.reduced_dim() || boxes.rom_input.dim() != rom.input_dim() {
        return Err(Error::dim(
            "sampling boxes",
            format!("{n}, {}, {}", rom.reduced_dim(), rom.input_dim()),
            format!("{}, {}, {}", boxes.state.dim(), boxes.rom_state.dim(), boxes.rom_input.dim()),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SfReport {
        samples: sample_count,
        violations_lower: 0,
        violations_decay: 0,
        max_violation_lower: f64::NEG_INFINITY,
        max_violation_decay: f64::NEG_INFINITY,
        witness: None,
    };
    for _ in 0..sample_count {
        let x = DVector::from_vec(boxes.state.sample(&mut rng));
        let x_hat = DVector::from_vec(boxes.rom_state.sample(&mut rng));
        let u_hat = DVector::from_vec(boxes.rom_input.sample(&mut rng));
        let v = evaluate_sf(&x, &x_hat, &cert.p, &rom.theta)?;
        let lie = lie_derivative(plant, cert, rom, &x, &x_hat, &u_hat)?;
        let e2 = (&x - &rom.theta * &x_hat).norm_squared();

        let lower = constants.alpha * e2 - v;
        let lower_scale = 1.0 + v;
        let supply = constants.rho * u_hat.norm_squared();
        let decay = lie + constants.kappa * v - supply;
        let decay_scale = 1.0 + lie.abs() + constants.kappa * v + supply;

        let lo_n = lower / lower_scale;
        let de_n = decay / decay_scale;
        report.max_violation_lower = report.max_violation_lower.max(lo_n);
        report.max_violation_decay = report.max_violation_decay.max(de_n);
        let bad_lo = lo_n > SF_SLACK;
        let bad_de = de_n > SF_SLACK;
        report.violations_lower += bad_lo as usize;
        report.violations_decay += bad_de as usize;
        if (bad_lo || bad_de) && report.witness.is_none() {
            report.witness = Some(Witness {
                x: x.clone(),
                x_hat: x_hat.clone(),
                u_hat: u_hat.clone(),
                v,
                lie,
            });
        }
    }
    Ok(report)
}

/// As [`sample_sf_conditions`], but any violation is an error carrying the witness.
pub fn check_sf_conditions(
    plant: &LtiPlant,
    cert: &Certificate,
    rom: &Rom,
    constants: &SfConstants,
    boxes: &SamplingBoxes,
    sample_count: usize,
    seed: u64,
) -> Result<SfReport> {
    let report = sample_sf_conditions(plant, cert, rom, constants, boxes, sample_count, seed)?;
    match &report.witness {
        None => Ok(report),
        Some(w) => Err(Error::SfInvalid(format!(
            "{} of {} samples violate the SF conditions (lower bound: {}, decay: {}); witness x = {:?}, x_hat = {:?}, u_hat = {:?}, V = {:.6e}, LV = {:.6e}",
            report.violations_lower.max(report.violations_decay),
            report.samples,
            report.violations_lower,
            report.violations_decay,
            w.x.as_slice(),
            w.x_hat.as_slice(),
            w.u_hat.as_slice(),
            w.v,
            w.lie
        ))),
    }
}

/// Output of the verification mode for input-free plants.
#[derive(Debug, Clone)]
pub struct Autonomous {
    pub theta: DMatrix<f64>,
    pub a_hat: DMatrix<f64>,
    pub cert: Certificate,
    pub a_data: DMatrix<f64>,
    pub residual: f64,
}

/// Real invariant subspaces of `a` of dimension 1 (real eigenvalue) or 2
/// (complex pair), slowest first.
fn real_invariant_blocks(a: &DMatrix<f64>) -> Vec<(f64, DMatrix<f64>)> {
    let n = a.nrows();
    let eig: Vec<Complex<f64>> = a.complex_eigenvalues().iter().copied().collect();
    let scale = linalg::spectral_norm(a).max(1.0);
    let mut used = vec![false; eig.len()];
    let mut blocks = Vec::new();
    let id = DMatrix::<f64>::identity(n, n);
    for i in 0..eig.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let l = eig[i];
        if l.im.abs() <= 1e-10 * scale {
            let m = a - &id * l.re;
            blocks.push((l.re, smallest_right_vectors(&m, 1)));
        } else {
            if let Some(j) = (0..eig.len()).find(|&j| !used[j] && (eig[j] - l.conj()).norm() <= 1e-8 * scale) {
                used[j] = true;
            }
            let m = a * a - a * (2.0 * l.re) + &id * l.norm_sqr();
            blocks.push((l.re, smallest_right_vectors(&m, 2)));
        }
    }
    blocks.sort_by(|x, y| y.0.total_cmp(&x.0));
    blocks
}

fn smallest_right_vectors(m: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    let n = m.ncols();
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("v_t");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    DMatrix::from_fn(n, k, |r, c| v_t[(order[c], r)])
}

/// Verification mode: certificate from the zero-input data only, `Θ`
/// spanning a real invariant subspace of `X̄₁Q̄`, `Â` its restriction.
pub fn verify_autonomous(data: &DataSet, kappa_hat: f64, epsilon: f64, n_hat: usize, pd_margin: f64) -> Result<Autonomous> {
    let n = data.state_dim();
    if n_hat == 0 || n_hat > n {
        return Err(Error::InvalidArgument(format!("need 1 <= n_hat <= n = {n}, got {n_hat}")));
    }
    let h = certificate::solve_h(&data.xbar0, &data.xbar1, kappa_hat, pd_margin)?;
    let barred = DataSet {
        u0: DMatrix::zeros(data.input_dim(), data.samples()),
        x0: data.xbar0.clone(),
        x1: data.xbar1.clone(),
        xbar0: data.xbar0.clone(),
        xbar1: data.xbar1.clone(),
        tau: data.tau,
        shared_initial_state: data.shared_initial_state.clone(),
    };
    let cert = Certificate::from_h(&barred, h, kappa_hat, epsilon)?;
    let a_data = &data.xbar1 * &cert.qbar;

    let mut chosen: Vec<DMatrix<f64>> = Vec::new();
    let mut dim = 0;
    for (_, basis) in real_invariant_blocks(&a_data) {
        if dim + basis.ncols() <= n_hat {
            dim += basis.ncols();
            chosen.push(basis);
        }
        if dim == n_hat {
            break;
        }
    }
    if dim != n_hat {
        return Err(Error::VerificationInfeasible(format!(
            "no real invariant subspace of dimension {n_hat} assembled from eigenvalue blocks"
        )));
    }
    let refs: Vec<&DMatrix<f64>> = chosen.iter().collect();
    let raw = linalg::hstack(&refs);
    let theta = raw.qr().q().columns(0, n_hat).into_owned();
    let gram = theta.transpose() * &theta;
    let a_hat = gram
        .try_inverse()
        .ok_or_else(|| Error::VerificationInfeasible("Θ lost rank during orthonormalisation".into()))?
        * theta.transpose()
        * &a_data
        * &theta;
    let residual = (&a_data * &theta - &theta * &a_hat).norm();
    if !(residual < AUTONOMOUS_TOL) {
        return Err(Error::VerificationInfeasible(format!(
            "invariance residual {residual:.3e} exceeds {AUTONOMOUS_TOL:.0e}"
        )));
    }
    Ok(Autonomous {
        theta,
        a_hat,
        cert,
        a_data,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sf_basic_values() {
        let p = DMatrix::<f64>::identity(2, 2);
        let theta = DMatrix::<f64>::zeros(2, 1);
        let x = DVector::from_vec(vec![3.0, 4.0]);
        let xh = DVector::from_vec(vec![1.0]);
        assert_eq!(evaluate_sf(&x, &xh, &p, &theta).unwrap(), 25.0);
        let theta = DMatrix::from_column_slice(2, 1, &[3.0, 4.0]);
        assert_eq!(evaluate_sf(&x, &xh, &p, &theta).unwrap(), 0.0);
        assert!(evaluate_sf(&x, &DVector::zeros(2), &p, &theta).is_err());
    }

    #[test]
    fn bound_instantiation() {
        assert!((closeness_bound(0.0, 5.1859e-4, 2.0, 7.5529e-5, 10.0, 3.0) - 0.7282).abs() < 5e-5);
        assert!((closeness_bound(0.0, 9.0420e-9, 4.0, 2.1718e-9, 6.0, 0.0) - 0.3603).abs() < 5e-5);
        assert!(closeness_bound(1.0, 0.5, 1.0, 0.0, 0.0, 50.0) < 1e-20);
        assert_eq!(comparison_bound(4.0, 1.0, 1.0, 0.0, 0.0, 0.0), 2.0);
    }

    #[test]
    fn psi_interpolates_square_b() {
        let rep = DataRepresentation {
            a_data: DMatrix::identity(2, 2) * -1.0,
            b_data: DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 0.0, 1.0]),
        };
        let theta = DMatrix::from_column_slice(2, 1, &[0.6, 0.8]);
        let b_hat = DMatrix::from_element(1, 1, 1.5);
        let p = DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]);
        let psi = compute_psi(&rep, &p, &theta, &b_hat).unwrap();
        assert!((&rep.b_data * &psi - &theta * &b_hat).norm() < 1e-12);
        assert!(compute_rho(&rep, &p, &theta, &b_hat, &psi, 1.0).unwrap() < 1e-24);
    }

    #[test]
    fn singular_gram_is_reported() {
        let rep = DataRepresentation {
            a_data: DMatrix::identity(2, 2) * -1.0,
            b_data: DMatrix::zeros(2, 1),
        };
        let err = compute_psi(&rep, &DMatrix::identity(2, 2), &DMatrix::zeros(2, 1), &DMatrix::identity(1, 1));
        assert!(matches!(err, Err(Error::SingularGram { .. })));
    }

    #[test]
    fn invariant_blocks() {
        let a = DMatrix::from_row_slice(3, 3, &[-1.0, 0.0, 0.0, 0.0, -3.0, 2.0, 0.0, -2.0, -3.0]);
        let blocks = real_invariant_blocks(&a);
        assert_eq!(blocks.len(), 2);
        assert_eq!(blocks[0].1.ncols(), 1);
        assert!((blocks[0].0 + 1.0).abs() < 1e-12);
        assert_eq!(blocks[1].1.ncols(), 2);
        let t = &blocks[1].1;
        let proj = t * t.transpose();
        assert!((&proj * &a * t - &a * t).norm() < 1e-10);
    }
}
