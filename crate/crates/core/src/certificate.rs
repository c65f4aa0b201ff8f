//! The data-based Lyapunov certificate `(H, P, Q, F)`.
//!
//! Decision variable `H` (T×n) must satisfy
//!
//! ```text
//! X₀H = (X₀H)ᵀ ⪰ δI,   X₁H + HᵀX₁ᵀ + κ̂ X₀H ⪯ 0.
//! ```
//!
//! Writing `Y = X₀H` and splitting `H = X₀†Y + V S⁻¹ W` where `U S Vᵀ` is the
//! thin SVD of `X₁(I − X₀†X₀)`, the conditions become the LMI
//! `ÃY + YÃᵀ + ŨW + WᵀŨᵀ ⪯ 0` with `Ã = X₁X₀† + (κ̂/2)I`, which the barrier
//! solver handles. The split covers every admissible `H` up to components
//! invisible to both `X₀` and `X₁`.

use nalgebra::{DMatrix, DVector};

use crate::data::DataSet;
use crate::document::Document;
use crate::error::{Error, Result};
use crate::linalg;
use crate::sdp::{self, Block, Problem, Term};
use crate::systems::LtiPlant;

pub const PD_MARGIN: f64 = 1e-6;
pub const CHECK_TOL: f64 = 1e-7;
pub const CONDITION_WARNING: f64 = 1e12;
/// Eigenvalue floor of `X₀H` (relative to its ceiling of 1) when shaping ρ.
pub const SHAPING_CONDITION_CAP: f64 = 1e-3;
/// Bound on the free feedback directions, relative to `‖Ã‖₂`.
const W_BOUND: f64 = 100.0;
const DELTA_LADDER: [f64; 2] = [1e-2, 1e-4];

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub h: DMatrix<f64>,
    pub p: DMatrix<f64>,
    pub q: DMatrix<f64>,
    pub qbar: DMatrix<f64>,
    pub f: DMatrix<f64>,
    pub kappa_hat: f64,
    pub epsilon: f64,
    pub alpha: f64,
    pub kappa: f64,
    pub rho: Option<f64>,
    pub warnings: Vec<String>,
}

impl Certificate {
    /// Derive `P`, `Q`, `F`, `α` from a solved `H`.
    pub fn from_h(data: &DataSet, h: DMatrix<f64>, kappa_hat: f64, epsilon: f64) -> Result<Self> {
        check_epsilon(kappa_hat, epsilon)?;
        let n = data.state_dim();
        if h.shape() != (data.samples(), n) {
            return Err(Error::dim(
                "H",
                format!("{}x{n}", data.samples()),
                format!("{}x{}", h.nrows(), h.ncols()),
            ));
        }
        let mut warnings = Vec::new();
        let m = &data.x0 * &h;
        let asym = (&m - m.transpose()).norm();
        if asym > 1e-9 {
            warnings.push(format!("X0*H asymmetry {asym:.3e} exceeds 1e-9 before symmetrisation"));
        }
        let ms = linalg::sym(&m);
        let cond = linalg::spd_condition(&ms);
        if cond > CONDITION_WARNING {
            warnings.push(format!("X0*H is ill-conditioned (condition {cond:.3e})"));
        }
        let p = linalg::sym(
            &ms.clone()
                .try_inverse()
                .ok_or_else(|| Error::Infeasible { reason: "X0*H is singular".into() })?,
        );
        let q = &h * &p;
        let f = &data.u0 * &q;
        let qbar = linalg::right_pseudoinverse(&data.xbar0).map_err(|e| match e {
            Error::RankDeficient { rank, required, tolerance, .. } => Error::RankDeficient {
                what: "zero-input state matrix X0bar".into(),
                rank,
                required,
                tolerance,
            },
            other => other,
        })?;
        let alpha = linalg::lambda_min(&p);
        Ok(Self {
            h,
            p,
            q,
            qbar,
            f,
            kappa_hat,
            epsilon,
            alpha,
            kappa: kappa_hat - epsilon,
            rho: None,
            warnings,
        })
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        check_epsilon(self.kappa_hat, epsilon)?;
        self.epsilon = epsilon;
        self.kappa = self.kappa_hat - epsilon;
        Ok(self)
    }

    pub fn to_document(&self) -> Document {
        let mut d = Document::new("certificate");
        d.set_scalar("kappa_hat", self.kappa_hat);
        d.set_scalar("epsilon", self.epsilon);
        d.set_scalar("alpha", self.alpha);
        d.set_scalar("kappa", self.kappa);
        if let Some(r) = self.rho {
            d.set_scalar("rho", r);
        }
        d.set_scalar("warning_count", self.warnings.len() as f64);
        for (i, w) in self.warnings.iter().enumerate() {
            d.set_text(&format!("warning_{i}"), w);
        }
        d.set_matrix("h", self.h.clone());
        d.set_matrix("p", self.p.clone());
        d.set_matrix("q", self.q.clone());
        d.set_matrix("qbar", self.qbar.clone());
        d.set_matrix("f", self.f.clone());
        d
    }

    pub fn from_document(d: &Document) -> Result<Self> {
        if d.kind() != "certificate" {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected a certificate document, found `{}`", d.kind()),
            });
        }
        let count = d.scalar("warning_count").unwrap_or(0.0) as usize;
        let warnings = (0..count)
            .map(|i| d.text(&format!("warning_{i}")).map(str::to_string))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            h: d.matrix("h")?.clone(),
            p: d.matrix("p")?.clone(),
            q: d.matrix("q")?.clone(),
            qbar: d.matrix("qbar")?.clone(),
            f: d.matrix("f")?.clone(),
            kappa_hat: d.scalar("kappa_hat")?,
            epsilon: d.scalar("epsilon")?,
            alpha: d.scalar("alpha")?,
            kappa: d.scalar("kappa")?,
            rho: d.scalar("rho").ok(),
            warnings,
        })
    }
}

fn check_epsilon(kappa_hat: f64, epsilon: f64) -> Result<()> {
    if !(kappa_hat > 0.0) || !kappa_hat.is_finite() {
        return Err(Error::InvalidArgument(format!("kappa_hat must be positive, got {kappa_hat}")));
    }
    if !(epsilon > 0.0 && epsilon < kappa_hat) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must lie in (0, kappa_hat) = (0, {kappa_hat}), got {epsilon}"
        )));
    }
    Ok(())
}

/// Factors of the reparametrised LMI.
#[derive(Debug, Clone)]
pub(crate) struct LmiFactors {
    a_tilde: DMatrix<f64>,
    u_b: DMatrix<f64>,
    s_b: Vec<f64>,
    v_b: DMatrix<f64>,
    x0: DMatrix<f64>,
    x0_pinv: DMatrix<f64>,
    scale: f64,
}

impl LmiFactors {
    pub(crate) fn new(x0: &DMatrix<f64>, x1: &DMatrix<f64>, kappa_hat: f64) -> Result<Self> {
        let n = x0.nrows();
        let t = x0.ncols();
        let x0_pinv = linalg::right_pseudoinverse(x0).map_err(|e| match e {
            Error::RankDeficient { rank, required, tolerance, .. } => Error::RankDeficient {
                what: "state data matrix X0".into(),
                rank,
                required,
                tolerance,
            },
            other => other,
        })?;
        let proj = DMatrix::<f64>::identity(t, t) - &x0_pinv * x0;
        let g = x1 * proj;
        let thr = 1e-9 * linalg::spectral_norm(x1).max(f64::MIN_POSITIVE);
        let (u_b, s_b, v_b) = linalg::truncated_svd(&g, thr);
        let a_tilde = x1 * &x0_pinv + DMatrix::<f64>::identity(n, n) * (0.5 * kappa_hat);
        let scale = linalg::spectral_norm(&a_tilde).max(1.0);
        Ok(Self {
            a_tilde,
            u_b,
            s_b,
            v_b,
            x0: x0.clone(),
            x0_pinv,
            scale,
        })
    }

    fn n(&self) -> usize {
        self.a_tilde.nrows()
    }

    fn r(&self) -> usize {
        self.s_b.len()
    }

    fn ny(&self) -> usize {
        sdp::sym_count(self.n())
    }

    /// `ÃY + YÃᵀ + ŨW + WᵀŨᵀ`.
    fn lmi(&self, y: &DMatrix<f64>, w: &DMatrix<f64>) -> DMatrix<f64> {
        let ay = &self.a_tilde * y;
        let bw = &self.u_b * w;
        &ay + ay.transpose() + &bw + bw.transpose()
    }

    fn h(&self, y: &DMatrix<f64>, w: &DMatrix<f64>) -> DMatrix<f64> {
        let mut vs = self.v_b.clone();
        for (k, s) in self.s_b.iter().enumerate() {
            vs.column_mut(k).scale_mut(1.0 / s);
        }
        let mut h = &self.x0_pinv * y + vs * w;
        // Iterative refinement: rounding in X₀V_b ≈ 0 is amplified by S⁻¹W.
        for _ in 0..3 {
            let r = y - &self.x0 * &h;
            h += &self.x0_pinv * r;
        }
        h
    }

    /// Dictionary `[I | Ã | Ũ]` and the terms of `coef · LMI(Y, W)`.
    fn lmi_block(&self, constant: DMatrix<f64>, coef: f64) -> Block {
        let n = self.n();
        let dict = linalg::hstack(&[&DMatrix::identity(n, n), &self.a_tilde, &self.u_b]);
        let mut b = Block::new(dict, constant);
        for p in 0..n {
            for q in p..n {
                let terms = if p == q {
                    vec![Term { u: n + p, v: p, coef }]
                } else {
                    vec![Term { u: n + p, v: q, coef }, Term { u: n + q, v: p, coef }]
                };
                b.add(sdp::sym_index(n, p, q), terms);
            }
        }
        let ny = self.ny();
        for r in 0..self.r() {
            for i in 0..n {
                b.add(ny + r * n + i, vec![Term { u: 2 * n + r, v: i, coef }]);
            }
        }
        b
    }

    /// `coef·Y + shift·I` over dictionary `I` with `Y` at offset 0.
    fn y_block(&self, coef: f64, shift: f64, dim_offset: usize, extra_dim: usize) -> Block {
        let n = self.n();
        let d = n + extra_dim;
        let mut constant = DMatrix::zeros(d, d);
        for i in 0..n {
            constant[(dim_offset + i, dim_offset + i)] = shift;
        }
        let mut b = Block::new(DMatrix::identity(d, d), constant);
        for p in 0..n {
            for q in p..n {
                b.add(sdp::sym_index(n, p, q), sdp::sym_basis_terms(dim_offset, p, q, coef));
            }
        }
        b
    }

    /// `[[βI, Wᵀ], [W, βI]] ⪰ 0`, i.e. `‖W‖₂ ≤ β`, keeping the free directions bounded.
    fn w_bound_block(&self) -> Option<Block> {
        let n = self.n();
        let r = self.r();
        if r == 0 {
            return None;
        }
        let beta = W_BOUND * self.scale;
        let d = n + r;
        let mut b = Block::new(DMatrix::identity(d, d), DMatrix::identity(d, d) * beta);
        let ny = self.ny();
        for k in 0..r {
            for i in 0..n {
                b.add(ny + k * n + i, vec![Term { u: n + k, v: i, coef: 1.0 }]);
            }
        }
        Some(b)
    }

    fn unpack(&self, y: &DVector<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
        let n = self.n();
        let ny = self.ny();
        let ym = sdp::unpack_sym(y, 0, n);
        let w = DMatrix::from_fn(self.r(), n, |r, i| y[ny + r * n + i]);
        (ym, w)
    }

    /// Minimise the LMI's top eigenvalue `s` over `δI ⪯ Y ⪯ I`, stopping as
    /// soon as the margin is comfortably negative.
    fn phase_one(&self, delta: f64) -> Option<(DMatrix<f64>, DMatrix<f64>, f64)> {
        let n = self.n();
        let ny = self.ny();
        let nv = ny + self.r() * n + 1;
        let s_idx = nv - 1;

        let mut sblock = self.lmi_block(DMatrix::zeros(n, n), -1.0);
        sblock.add(s_idx, (0..n).map(|i| Term { u: i, v: i, coef: 0.5 }).collect());
        let lower = self.y_block(1.0, -delta, 0, 0);
        let upper = self.y_block(-1.0, 1.0, 0, 0);
        let mut objective = DVector::zeros(nv);
        objective[s_idx] = 1.0;
        let mut blocks = vec![sblock, lower, upper];
        blocks.extend(self.w_bound_block());
        let problem = Problem {
            num_vars: nv,
            objective,
            blocks,
        };

        let y0m = DMatrix::<f64>::identity(n, n) * 0.5;
        let w0 = DMatrix::zeros(self.r(), n);
        let s0 = linalg::lambda_max(&self.lmi(&y0m, &w0)) + self.scale;
        let mut y0 = DVector::zeros(nv);
        sdp::pack_sym(&y0m, &mut y0, 0);
        y0[s_idx] = s0;

        let goal = 1e-3 * self.scale;
        let opts = sdp::Options {
            t0: problem.blocks.iter().map(|b| b.dim()).sum::<usize>() as f64 / s0.abs().max(1.0),
            gap_tol: 1e-10 * self.scale,
            ..Default::default()
        };
        let out = problem.minimize(y0, &opts, |y| y[s_idx] < -goal)?;
        let (ym, w) = self.unpack(&out.y);
        let s = linalg::lambda_max(&self.lmi(&ym, &w));
        Some((ym, w, s))
    }
}

/// Target of the optional second solve that shapes `P` to make
/// `‖√P (B Ψ − Θ B̂)‖` small.
#[derive(Debug, Clone, Copy)]
pub struct RhoShaping<'a> {
    pub b_data: &'a DMatrix<f64>,
    pub theta: &'a DMatrix<f64>,
    pub b_hat: &'a DMatrix<f64>,
    pub condition_cap: f64,
}

pub(crate) fn solve_h(
    x0: &DMatrix<f64>,
    x1: &DMatrix<f64>,
    kappa_hat: f64,
    pd_margin: f64,
) -> Result<DMatrix<f64>> {
    let f = LmiFactors::new(x0, x1, kappa_hat)?;
    // Prefer well-conditioned X₀H: raise the eigenvalue floor first and
    // relax it down to `pd_margin` only if needed.
    let mut best: Option<(DMatrix<f64>, DMatrix<f64>, f64)> = None;
    for delta in DELTA_LADDER.iter().copied().filter(|d| *d > pd_margin).chain([pd_margin]) {
        if let Some(found) = f.phase_one(delta) {
            let done = found.2 < 0.0;
            if best.as_ref().is_none_or(|b| found.2 < b.2) {
                best = Some(found);
            }
            if done {
                break;
            }
        }
    }
    let (y, w, s) = best.ok_or_else(|| Error::Infeasible {
        reason: "barrier solver failed to start".into(),
    })?;
    if !(s < 0.0) {
        return Err(Error::Infeasible {
            reason: format!(
                "smallest achievable top eigenvalue of the LMI is {s:.3e} > 0 (kappa_hat = {kappa_hat})"
            ),
        });
    }
    Ok(f.h(&y, &w))
}

/// Find `H` satisfying the certificate LMI and derive `P`, `Q`, `F`, `α`.
/// `ε` defaults to `κ̂/3`.
pub fn solve_feasibility(data: &DataSet, kappa_hat: f64, pd_margin: f64) -> Result<Certificate> {
    check_epsilon(kappa_hat, kappa_hat / 3.0)?;
    if !(pd_margin > 0.0) {
        return Err(Error::InvalidArgument(format!("pd_margin must be positive, got {pd_margin}")));
    }
    let h = solve_h(&data.x0, &data.x1, kappa_hat, pd_margin)?;
    Certificate::from_h(data, h, kappa_hat, kappa_hat / 3.0)
}

/// Feasibility followed by minimisation of `t` subject to
/// `[[tI, Rᵀ], [R, X₀H]] ⪰ 0` with `R = B Ψ − Θ B̂` and `Ψ` free, under
/// `cap·I ⪯ X₀H ⪯ I`. Falls back to the plain certificate if the shaped
/// problem has no strictly feasible start.
pub fn solve_shaped(
    data: &DataSet,
    kappa_hat: f64,
    pd_margin: f64,
    shaping: &RhoShaping<'_>,
) -> Result<Certificate> {
    let f = LmiFactors::new(&data.x0, &data.x1, kappa_hat)?;
    let n = f.n();
    let (bd, theta, bh) = (shaping.b_data, shaping.theta, shaping.b_hat);
    if bd.nrows() != n || theta.nrows() != n || theta.ncols() != bh.nrows() {
        return Err(Error::dim(
            "shaping matrices",
            format!("B {n}xm, Θ {n}xn̂, B̂ n̂xm̂"),
            format!(
                "B {}x{}, Θ {}x{}, B̂ {}x{}",
                bd.nrows(),
                bd.ncols(),
                theta.nrows(),
                theta.ncols(),
                bh.nrows(),
                bh.ncols()
            ),
        ));
    }
    let cap = shaping.condition_cap.max(pd_margin);
    let fallback = |note: String| -> Result<Certificate> {
        let mut c = solve_feasibility(data, kappa_hat, pd_margin)?;
        c.warnings.push(note);
        Ok(c)
    };
    let Some((y1, w1, s1)) = f.phase_one(cap) else {
        return fallback("rho shaping skipped: no start point".into());
    };
    let sigma = 1e-6 * f.scale;
    if !(s1 < -2.0 * sigma) {
        return fallback(format!("rho shaping skipped: LMI margin {s1:.3e} under condition cap"));
    }

    let m = bd.ncols();
    let mh = bh.ncols();
    let ny = f.ny();
    let nw = f.r() * n;
    let psi_off = ny + nw;
    let t_idx = psi_off + m * mh;
    let nv = t_idx + 1;

    let lmi = f.lmi_block(DMatrix::identity(n, n) * -sigma, -1.0);
    let lower = f.y_block(1.0, -cap, 0, 0);
    let upper = f.y_block(-1.0, 1.0, 0, 0);

    // Schur block over dictionary [I_{m̂+n} | lifted columns of B].
    let d = mh + n;
    let tb = theta * bh;
    let mut dict = DMatrix::zeros(d, d + m);
    dict.view_mut((0, 0), (d, d)).copy_from(&DMatrix::identity(d, d));
    dict.view_mut((mh, d), (n, m)).copy_from(bd);
    let mut constant = DMatrix::zeros(d, d);
    for i in 0..n {
        for j in 0..mh {
            constant[(mh + i, j)] = -tb[(i, j)];
            constant[(j, mh + i)] = -tb[(i, j)];
        }
    }
    let mut schur = Block::new(dict, constant);
    for p in 0..n {
        for q in p..n {
            schur.add(sdp::sym_index(n, p, q), sdp::sym_basis_terms(mh, p, q, 1.0));
        }
    }
    for i in 0..m {
        for j in 0..mh {
            schur.add(psi_off + i * mh + j, vec![Term { u: d + i, v: j, coef: 1.0 }]);
        }
    }
    schur.add(t_idx, (0..mh).map(|j| Term { u: j, v: j, coef: 0.5 }).collect());

    let mut objective = DVector::zeros(nv);
    objective[t_idx] = 1.0;
    let mut blocks = vec![lmi, lower, upper, schur];
    blocks.extend(f.w_bound_block());
    let problem = Problem {
        num_vars: nv,
        objective,
        blocks,
    };

    let p1 = match y1.clone().try_inverse() {
        Some(p) => linalg::sym(&p),
        None => return fallback("rho shaping skipped: singular start".into()),
    };
    let gram = bd.transpose() * &p1 * bd;
    let psi0 = gram
        .clone()
        .try_inverse()
        .map(|gi| gi * bd.transpose() * &p1 * &tb)
        .unwrap_or_else(|| DMatrix::zeros(m, mh));
    let r0 = bd * &psi0 - &tb;
    let t0 = 1.1 * linalg::lambda_max(&(r0.transpose() * &p1 * &r0)).max(0.0)
        + 1e-9 * (1.0 + tb.norm_squared());

    let mut y0 = DVector::zeros(nv);
    sdp::pack_sym(&y1, &mut y0, 0);
    for r in 0..f.r() {
        for i in 0..n {
            y0[ny + r * n + i] = w1[(r, i)];
        }
    }
    for i in 0..m {
        for j in 0..mh {
            y0[psi_off + i * mh + j] = psi0[(i, j)];
        }
    }
    y0[t_idx] = t0;

    let total_dim = problem.blocks.iter().map(|b| b.dim()).sum::<usize>() as f64;
    let opts = sdp::Options {
        t0: total_dim / t0,
        gap_tol: 1e-6 * t0,
        ..Default::default()
    };
    let Some(out) = problem.minimize(y0, &opts, |_| false) else {
        return fallback("rho shaping skipped: start point not strictly feasible".into());
    };
    let (ym, w) = f.unpack(&out.y);
    let top = linalg::lambda_max(&f.lmi(&ym, &w));
    if !(top < 0.0) {
        return fallback(format!("rho shaping rejected: LMI top eigenvalue {top:.3e}"));
    }
    Certificate::from_h(data, f.h(&ym, &w), kappa_hat, kappa_hat / 3.0)
}

/// One named residual with its verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    /// `true` when the check is `value < threshold`, `false` for `value > threshold`.
    pub upper: bool,
    pub passed: bool,
}

impl Check {
    pub fn below(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            upper: true,
            passed: value < threshold,
        }
    }

    pub fn above(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            upper: false,
            passed: value > threshold,
        }
    }

    pub fn line(&self) -> String {
        format!(
            "[{}] {}: {:.6e} {} {:.1e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.value,
            if self.upper { "<" } else { ">" },
            self.threshold
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn verdicts(&self) -> Vec<(String, bool)> {
        self.checks.iter().map(|c| (c.name.clone(), c.passed)).collect()
    }
}

pub const CHECK_SYMMETRY: &str = "certificate: symmetry of X0*H";
pub const CHECK_PD: &str = "certificate: lambda_min(X0*H)";
pub const CHECK_LMI: &str = "certificate: lambda_max(X1*H + H'*X1' + kappa_hat*X0*H)";
pub const CHECK_IDENTITY: &str = "certificate: |X0*Q - I|_F";

/// Recompute every certificate condition from the data.
pub fn verify_certificate(data: &DataSet, cert: &Certificate) -> Result<Report> {
    let n = data.state_dim();
    let t = data.samples();
    for (name, m, shape) in [
        ("H", &cert.h, (t, n)),
        ("P", &cert.p, (n, n)),
        ("Q", &cert.q, (t, n)),
        ("F", &cert.f, (data.input_dim(), n)),
    ] {
        if m.shape() != shape {
            return Err(Error::dim(name, format!("{}x{}", shape.0, shape.1), format!("{}x{}", m.nrows(), m.ncols())));
        }
    }
    let id = DMatrix::<f64>::identity(n, n);
    let xh = &data.x0 * &cert.h;
    let x1h = &data.x1 * &cert.h;
    let lmi = &x1h + x1h.transpose() + &xh * cert.kappa_hat;
    let alpha_true = linalg::lambda_min(&cert.p);
    let scale = 1.0 + cert.p.amax();
    let f_scale = 1.0 + cert.f.amax();
    let checks = vec![
        Check::below(CHECK_SYMMETRY, (&xh - xh.transpose()).norm(), CHECK_TOL),
        Check::above(CHECK_PD, linalg::lambda_min(&xh), 0.0),
        Check::below(CHECK_LMI, linalg::lambda_max(&lmi), CHECK_TOL),
        Check::below(CHECK_IDENTITY, (&data.x0 * &cert.q - &id).norm(), CHECK_TOL),
        Check::below("certificate: |P*X0*H - I|_F", (&cert.p * &xh - &id).norm(), CHECK_TOL),
        Check::below("certificate: asymmetry of P", (&cert.p - cert.p.transpose()).norm() / scale, CHECK_TOL),
        Check::below("certificate: |Q - H*P|_F", (&cert.q - &cert.h * &cert.p).norm() / (1.0 + cert.q.amax()), CHECK_TOL),
        Check::below("certificate: |F - U0*Q|_F", (&cert.f - &data.u0 * &cert.q).norm() / f_scale, CHECK_TOL),
        Check::below("certificate: |alpha - lambda_min(P)|", (cert.alpha - alpha_true).abs() / scale, CHECK_TOL),
        Check::above("certificate: alpha", cert.alpha, 0.0),
        Check::below("certificate: |kappa - (kappa_hat - epsilon)|", (cert.kappa - (cert.kappa_hat - cert.epsilon)).abs(), 1e-12),
        Check::above("certificate: epsilon", cert.epsilon, 0.0),
        Check::above("certificate: kappa", cert.kappa, 0.0),
    ];
    Ok(Report { checks })
}

/// `‖X₁Q − (A + BF)‖_F`, available only with the ground-truth plant.
pub fn closed_loop_reconstruction_check(plant: &LtiPlant, data: &DataSet, cert: &Certificate) -> f64 {
    (&data.x1 * &cert.q - (plant.a() + plant.b() * &cert.f)).norm()
}
