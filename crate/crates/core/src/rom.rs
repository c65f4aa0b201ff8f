//! Data-based plant representation, the reduction equation and the ROM.

use nalgebra::{DMatrix, DVector};

use crate::certificate::Certificate;
use crate::data::DataSet;
use crate::document::Document;
use crate::error::{Error, Result};
use crate::linalg;

pub const REDUCTION_TOL: f64 = 1e-7;
pub const RANGE_TOL: f64 = 1e-8;

/// `A ≈ X̄₁Q̄` and `B ≈ (X₁Q − X̄₁Q̄)(U₀Q)†`, both built from data only.
#[derive(Debug, Clone, PartialEq)]
pub struct DataRepresentation {
    pub a_data: DMatrix<f64>,
    pub b_data: DMatrix<f64>,
}

impl DataRepresentation {
    pub fn state_dim(&self) -> usize {
        self.a_data.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.b_data.ncols()
    }
}

pub fn build_data_representation(data: &DataSet, cert: &Certificate) -> Result<DataRepresentation> {
    let a_data = &data.xbar1 * &cert.qbar;
    let f = &data.u0 * &cert.q;
    let info = linalg::numeric_rank(&f, linalg::RANK_TOL);
    if info.rank < f.nrows() {
        return Err(Error::RankDeficient {
            what: "feedback gain F = U0*Q (B cannot be recovered)".into(),
            rank: info.rank,
            required: f.nrows(),
            tolerance: info.tolerance,
        });
    }
    let f_pinv = linalg::right_pseudoinverse(&f)?;
    let m = f.nrows();
    let ident = (&f * &f_pinv - DMatrix::<f64>::identity(m, m)).norm();
    if ident > 1e-9 {
        return Err(Error::RankDeficient {
            what: format!("feedback gain F = U0*Q (F F^+ deviates from I by {ident:.3e})"),
            rank: info.rank,
            required: m,
            tolerance: info.tolerance,
        });
    }
    let b_data = (&data.x1 * &cert.q - &a_data) * f_pinv;
    Ok(DataRepresentation { a_data, b_data })
}

/// `−decay · I`.
pub fn choose_a_hat(n_hat: usize, decay: f64) -> Result<DMatrix<f64>> {
    if n_hat == 0 || !(decay > 0.0) || !decay.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "need n_hat >= 1 and decay > 0, got n_hat = {n_hat}, decay = {decay}"
        )));
    }
    Ok(DMatrix::identity(n_hat, n_hat) * -decay)
}

/// `scale · I`, so the ROM is fully actuated.
pub fn choose_b_hat(n_hat: usize, scale: f64) -> Result<DMatrix<f64>> {
    if n_hat == 0 || !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "need n_hat >= 1 and scale > 0, got n_hat = {n_hat}, scale = {scale}"
        )));
    }
    Ok(DMatrix::identity(n_hat, n_hat) * scale)
}

/// How to pick `Θ` inside the solution space of the reduction equation.
#[derive(Debug, Clone, PartialEq)]
pub enum ThetaSelection {
    /// Maximise `σ_min(Θ)` over unit combinations of the null-space basis.
    MaxMinSingular,
    /// Least-squares fit of `S·Θ` to `target`, e.g. to align ROM states with
    /// specification coordinates.
    Aligned {
        output_map: DMatrix<f64>,
        target: DMatrix<f64>,
    },
}

/// `‖ĀΘ − ΘÂ + BΞ‖_F`.
pub fn reduction_residual(
    rep: &DataRepresentation,
    a_hat: &DMatrix<f64>,
    theta: &DMatrix<f64>,
    xi: &DMatrix<f64>,
) -> f64 {
    (&rep.a_data * theta - theta * a_hat + &rep.b_data * xi).norm()
}

/// Solution space of `ĀΘ − ΘÂ + BΞ = 0`: columns `[vec Θ; vec Ξ]`.
fn solution_space(rep: &DataRepresentation, a_hat: &DMatrix<f64>) -> DMatrix<f64> {
    let n = rep.state_dim();
    let nh = a_hat.nrows();
    let i_nh = DMatrix::<f64>::identity(nh, nh);
    let i_n = DMatrix::<f64>::identity(n, n);
    let left = linalg::kron(&i_nh, &rep.a_data) - linalg::kron(&a_hat.transpose(), &i_n);
    let right = linalg::kron(&i_nh, &rep.b_data);
    linalg::null_space(&linalg::hstack(&[&left, &right]), 1e-10)
}

fn sigma_min_with_vectors(m: &DMatrix<f64>) -> (f64, DVector<f64>, DVector<f64>) {
    let svd = m.clone().svd(true, true);
    let (k, s) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, s)| (k, *s))
        .expect("nonempty");
    let u = svd.u.expect("u").column(k).into_owned();
    let v = svd.v_t.expect("v_t").row(k).transpose();
    (s, u, v)
}

/// Solve the reduction equation for `(Θ, Ξ)` with unit-norm columns of `Θ`.
pub fn solve_reduction_equation(
    rep: &DataRepresentation,
    a_hat: &DMatrix<f64>,
    n_hat: usize,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    solve_reduction_equation_with(rep, a_hat, n_hat, &ThetaSelection::MaxMinSingular)
}

/// Like [`solve_reduction_equation`], but with a choice of solution. An
/// aligned `Θ` is the least-squares fit of `SΘ` to the target and is not
/// rescaled.
pub fn solve_reduction_equation_with(
    rep: &DataRepresentation,
    a_hat: &DMatrix<f64>,
    n_hat: usize,
    selection: &ThetaSelection,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let n = rep.state_dim();
    let m = rep.input_dim();
    if a_hat.shape() != (n_hat, n_hat) {
        return Err(Error::dim("A_hat", format!("{n_hat}x{n_hat}"), format!("{}x{}", a_hat.nrows(), a_hat.ncols())));
    }
    if n_hat == 0 || n_hat > n {
        return Err(Error::InvalidArgument(format!("need 1 <= n_hat <= n = {n}, got {n_hat}")));
    }
    if !linalg::is_hurwitz(a_hat) {
        return Err(Error::InvalidArgument("A_hat must be Hurwitz".into()));
    }
    let basis = solution_space(rep, a_hat);
    let d = basis.ncols();
    if d == 0 {
        return Err(Error::ReductionInfeasible("the reduction equation has only the trivial solution".into()));
    }
    let split = |c: &DVector<f64>| -> (DMatrix<f64>, DMatrix<f64>) {
        let z = &basis * c;
        let theta = linalg::unvec(&z.as_slice()[..n * n_hat], n, n_hat);
        let xi = linalg::unvec(&z.as_slice()[n * n_hat..], m, n_hat);
        (theta, xi)
    };
    let theta_k: Vec<DMatrix<f64>> = (0..d)
        .map(|k| {
            let mut e = DVector::zeros(d);
            e[k] = 1.0;
            split(&e).0
        })
        .collect();

    let c = match selection {
        ThetaSelection::MaxMinSingular => max_min_singular(&theta_k, d),
        ThetaSelection::Aligned { output_map, target } => {
            if output_map.ncols() != n || target.nrows() != output_map.nrows() || target.ncols() != n_hat {
                return Err(Error::dim(
                    "alignment target",
                    format!("S with {n} columns and target {}x{n_hat}", output_map.nrows()),
                    format!(
                        "S {}x{}, target {}x{}",
                        output_map.nrows(),
                        output_map.ncols(),
                        target.nrows(),
                        target.ncols()
                    ),
                ));
            }
            let rows = output_map.nrows() * n_hat;
            let mut design = DMatrix::zeros(rows, d);
            for (k, th) in theta_k.iter().enumerate() {
                design.set_column(k, &linalg::vec(&(output_map * th)));
            }
            let rhs = DMatrix::from_column_slice(rows, 1, linalg::vec(target).as_slice());
            let c = linalg::lstsq(&design, &rhs).column(0).into_owned();
            if !(c.norm() > 0.0) {
                return Err(Error::ReductionInfeasible("alignment target is orthogonal to every solution".into()));
            }
            c
        }
    };
    let (mut theta, mut xi) = split(&c);

    let rank = linalg::numeric_rank(&theta, 1e-8);
    if rank.rank < n_hat {
        return Err(Error::ReductionInfeasible(format!(
            "no full-column-rank Θ in the {d}-dimensional solution space (best rank {})",
            rank.rank
        )));
    }
    if matches!(selection, ThetaSelection::MaxMinSingular) {
        normalize_columns(&mut theta, &mut xi, a_hat);
    }
    let res = reduction_residual(rep, a_hat, &theta, &xi);
    let scale = 1.0 + linalg::spectral_norm(&rep.a_data) + linalg::spectral_norm(&rep.b_data) * xi.norm();
    if res > REDUCTION_TOL * scale.max(1.0) {
        return Err(Error::ReductionInfeasible(format!("reduction residual {res:.3e} too large")));
    }
    Ok((theta, xi))
}

fn max_min_singular(theta_k: &[DMatrix<f64>], d: usize) -> DVector<f64> {
    let combine = |c: &DVector<f64>| -> DMatrix<f64> {
        let mut t = theta_k[0].clone() * c[0];
        for k in 1..d {
            t += &theta_k[k] * c[k];
        }
        t
    };
    let mut starts: Vec<DVector<f64>> = (0..d)
        .map(|k| {
            let mut e = DVector::zeros(d);
            e[k] = 1.0;
            e
        })
        .collect();
    starts.push(DVector::from_element(d, 1.0 / (d as f64).sqrt()));
    starts.push(DVector::from_fn(d, |k, _| if k % 2 == 0 { 1.0 } else { -1.0 }).normalize());

    let mut best = starts[0].clone();
    let mut best_val = f64::NEG_INFINITY;
    for s in &starts {
        let v = sigma_min_with_vectors(&combine(s)).0;
        if v > best_val {
            best_val = v;
            best = s.clone();
        }
    }
    // Projected gradient ascent on the unit sphere.
    let mut step = 0.5;
    for _ in 0..500 {
        if step < 1e-12 {
            break;
        }
        let (val, u, v) = sigma_min_with_vectors(&combine(&best));
        let grad = DVector::from_fn(d, |k, _| (u.transpose() * &theta_k[k] * &v)[(0, 0)]);
        let radial = grad.dot(&best);
        let tangent = &grad - &best * radial;
        if tangent.norm() < 1e-14 {
            break;
        }
        let trial = (&best + tangent * step).normalize();
        let tv = sigma_min_with_vectors(&combine(&trial)).0;
        if tv > val {
            best = trial;
            step *= 1.5;
        } else {
            step *= 0.5;
        }
    }
    best
}

/// Unit columns when `Â` is diagonal (columns decouple); otherwise a common
/// scale. The largest entry of each unit column is made positive.
fn normalize_columns(theta: &mut DMatrix<f64>, xi: &mut DMatrix<f64>, a_hat: &DMatrix<f64>) {
    let nh = theta.ncols();
    let diagonal = (0..nh).all(|i| (0..nh).all(|j| i == j || a_hat[(i, j)] == 0.0));
    if diagonal {
        for j in 0..nh {
            let mut s = theta.column(j).norm();
            if theta[(theta.column(j).iamax(), j)] < 0.0 {
                s = -s;
            }
            theta.column_mut(j).scale_mut(1.0 / s);
            xi.column_mut(j).scale_mut(1.0 / s);
        }
    } else {
        let s = (0..nh).map(|j| theta.column(j).norm()).fold(0.0, f64::max);
        *theta /= s;
        *xi /= s;
    }
}

/// Whether every column of `ĀΘ` lies in the range of `[Θ | B]`.
pub fn check_range_condition(rep: &DataRepresentation, theta: &DMatrix<f64>) -> bool {
    range_residual(rep, theta) <= RANGE_TOL
}

/// Largest relative distance of a column of `ĀΘ` from `R([Θ | B])`.
pub fn range_residual(rep: &DataRepresentation, theta: &DMatrix<f64>) -> f64 {
    let at = &rep.a_data * theta;
    let m = linalg::hstack(&[theta, &rep.b_data]);
    let proj = &m * linalg::pinv(&m, 1e-10);
    let resid = &at - &proj * &at;
    (0..at.ncols())
        .map(|j| resid.column(j).norm() / at.column(j).norm().max(1.0))
        .fold(0.0, f64::max)
}

/// Reduced-order model `x̂' = Âx̂ + B̂û`, `ŷ = Θx̂`, with interface gains.
#[derive(Debug, Clone, PartialEq)]
pub struct Rom {
    pub a_hat: DMatrix<f64>,
    pub b_hat: DMatrix<f64>,
    pub theta: DMatrix<f64>,
    pub xi: DMatrix<f64>,
    pub psi: DMatrix<f64>,
}

impl Rom {
    pub fn new(
        a_hat: DMatrix<f64>,
        b_hat: DMatrix<f64>,
        theta: DMatrix<f64>,
        xi: DMatrix<f64>,
        psi: DMatrix<f64>,
    ) -> Result<Self> {
        let nh = a_hat.nrows();
        if !a_hat.is_square() || b_hat.nrows() != nh || theta.ncols() != nh || xi.ncols() != nh {
            return Err(Error::dim(
                "ROM",
                format!("A_hat {nh}x{nh}, B_hat {nh}xm̂, Θ nx{nh}, Ξ mx{nh}"),
                format!(
                    "A_hat {}x{}, B_hat {}x{}, Θ {}x{}, Ξ {}x{}",
                    a_hat.nrows(),
                    a_hat.ncols(),
                    b_hat.nrows(),
                    b_hat.ncols(),
                    theta.nrows(),
                    theta.ncols(),
                    xi.nrows(),
                    xi.ncols()
                ),
            ));
        }
        if psi.nrows() != xi.nrows() || psi.ncols() != b_hat.ncols() {
            return Err(Error::dim(
                "Ψ",
                format!("{}x{}", xi.nrows(), b_hat.ncols()),
                format!("{}x{}", psi.nrows(), psi.ncols()),
            ));
        }
        if !linalg::is_hurwitz(&a_hat) {
            return Err(Error::InvalidArgument("A_hat must be Hurwitz".into()));
        }
        if linalg::numeric_rank(&theta, 1e-8).rank < nh {
            return Err(Error::InvalidArgument("Θ must have full column rank".into()));
        }
        Ok(Self {
            a_hat,
            b_hat,
            theta,
            xi,
            psi,
        })
    }

    pub fn reduced_dim(&self) -> usize {
        self.a_hat.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.b_hat.ncols()
    }

    /// `Ĉ`, identical to `Θ`.
    pub fn c_hat(&self) -> &DMatrix<f64> {
        &self.theta
    }

    pub fn to_document(&self) -> Document {
        let mut d = Document::new("rom");
        d.set_scalar("n_hat", self.reduced_dim() as f64);
        d.set_matrix("a_hat", self.a_hat.clone());
        d.set_matrix("b_hat", self.b_hat.clone());
        d.set_matrix("c_hat", self.theta.clone());
        d.set_matrix("theta", self.theta.clone());
        d.set_matrix("xi", self.xi.clone());
        d.set_matrix("psi", self.psi.clone());
        d
    }

    /// Reads the document without re-validating, so that audits can inspect
    /// tampered or inconsistent artifacts.
    pub fn from_document(d: &Document) -> Result<Self> {
        if d.kind() != "rom" {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected a rom document, found `{}`", d.kind()),
            });
        }
        let theta = d.matrix("theta")?.clone();
        if d.matrix("c_hat")? != &theta {
            return Err(Error::Parse {
                line: 0,
                message: "rom document has c_hat different from theta".into(),
            });
        }
        Ok(Self {
            a_hat: d.matrix("a_hat")?.clone(),
            b_hat: d.matrix("b_hat")?.clone(),
            theta,
            xi: d.matrix("xi")?.clone(),
            psi: d.matrix("psi")?.clone(),
        })
    }
}
