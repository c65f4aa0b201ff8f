//! Collection of the excited and zero-input trajectories and their data matrices.

use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::AaBox;
use crate::linalg::{self, RANK_TOL};
use crate::systems::{finite_difference_derivatives, simulate, LtiPlant};

pub const RETRY_LIMIT: usize = 20;
pub const IDENTITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeMode {
    Exact,
    FiniteDifference,
}

impl DerivativeMode {
    pub fn label(self) -> &'static str {
        match self {
            DerivativeMode::Exact => "exact",
            DerivativeMode::FiniteDifference => "fd",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(DerivativeMode::Exact),
            "fd" | "finite-difference" => Ok(DerivativeMode::FiniteDifference),
            _ => Err(Error::Config(format!(
                "derivative mode must be `exact` or `fd`, got `{s}`"
            ))),
        }
    }
}

/// Piecewise-constant i.i.d. uniform excitation over `input_box`.
#[derive(Debug, Clone, PartialEq)]
pub struct Excitation {
    pub input_box: AaBox,
    /// Box for the random initial state when none is given.
    pub initial_box: AaBox,
    pub seed: u64,
}

impl Excitation {
    pub fn uniform(input_box: AaBox, n: usize, seed: u64) -> Self {
        Self {
            input_box,
            initial_box: AaBox::symmetric(n, 1.0),
            seed,
        }
    }
}

/// The five data matrices: `U₀`, `X₀`, `X₁` from the excited run and
/// `X̄₀`, `X̄₁` from the zero-input twin started at the same state.
#[derive(Debug, Clone, PartialEq)]
pub struct DataSet {
    pub u0: DMatrix<f64>,
    pub x0: DMatrix<f64>,
    pub x1: DMatrix<f64>,
    pub xbar0: DMatrix<f64>,
    pub xbar1: DMatrix<f64>,
    pub tau: f64,
    pub shared_initial_state: DVector<f64>,
}

impl DataSet {
    pub fn state_dim(&self) -> usize {
        self.x0.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.u0.nrows()
    }

    pub fn samples(&self) -> usize {
        self.x0.ncols()
    }

    /// `[U₀; X₀]`.
    pub fn stacked(&self) -> DMatrix<f64> {
        linalg::vstack(&[&self.u0, &self.x0])
    }

    /// Shape, sample-count and rank invariants.
    pub fn validate(&self) -> Result<()> {
        let n = self.state_dim();
        let t = self.samples();
        for (name, m) in [("x1", &self.x1), ("xbar0", &self.xbar0), ("xbar1", &self.xbar1)] {
            if m.nrows() != n || m.ncols() != t {
                return Err(Error::dim(name, format!("{n}x{t}"), format!("{}x{}", m.nrows(), m.ncols())));
            }
        }
        if self.u0.ncols() != t || self.u0.nrows() == 0 {
            return Err(Error::dim("u0", format!("mx{t}"), format!("{}x{}", self.u0.nrows(), self.u0.ncols())));
        }
        if self.shared_initial_state.len() != n {
            return Err(Error::dim("shared initial state", n, self.shared_initial_state.len()));
        }
        if t <= n {
            return Err(sample_count_error(t, n));
        }
        if !(self.tau > 0.0) {
            return Err(Error::InvalidArgument(format!("tau must be positive, got {}", self.tau)));
        }
        for (name, m) in [("x0", &self.x0), ("xbar0", &self.xbar0)] {
            let r = linalg::numeric_rank(m, RANK_TOL);
            if r.rank < n {
                return Err(Error::RankDeficient {
                    what: name.into(),
                    rank: r.rank,
                    required: n,
                    tolerance: r.tolerance,
                });
            }
        }
        let c0 = self.x0.column(0);
        let cb = self.xbar0.column(0);
        if (c0 - cb).amax() > 1e-12 * (1.0 + c0.amax()) {
            return Err(Error::Precondition(
                "excited and zero-input trajectories must share the initial state".into(),
            ));
        }
        Ok(())
    }
}

fn sample_count_error(t: usize, n: usize) -> Error {
    Error::Precondition(format!(
        "the number of samples T must be greater than n (T = {t}, n = {n})"
    ))
}

fn columns(vs: &[DVector<f64>]) -> DMatrix<f64> {
    DMatrix::from_columns(vs)
}

/// Sample both trajectories and verify the rank conditions, reseeding on failure.
///
/// `x_init = None` draws the shared initial state from `excitation.initial_box`.
pub fn collect(
    plant: &LtiPlant,
    x_init: Option<&DVector<f64>>,
    excitation: &Excitation,
    tau: f64,
    samples: usize,
    mode: DerivativeMode,
) -> Result<DataSet> {
    let n = plant.state_dim();
    let m = plant.input_dim();
    if samples <= n {
        return Err(sample_count_error(samples, n));
    }
    if excitation.input_box.dim() != m {
        return Err(Error::dim("excitation box", m, excitation.input_box.dim()));
    }
    if let Some(x) = x_init {
        if x.len() != n {
            return Err(Error::dim("initial state", n, x.len()));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(excitation.seed);
    let mut last_failure = None;
    for _ in 0..RETRY_LIMIT {
        let xi = match x_init {
            Some(x) => x.clone(),
            None => DVector::from_vec(excitation.initial_box.sample(&mut rng)),
        };
        let us: Vec<DVector<f64>> = (0..samples)
            .map(|_| DVector::from_vec(excitation.input_box.sample(&mut rng)))
            .collect();
        let data = sample_pair(plant, &xi, &us, tau, mode)?;

        let checks = [
            ("X0", linalg::numeric_rank(&data.x0, RANK_TOL).rank, n),
            ("X0bar", linalg::numeric_rank(&data.xbar0, RANK_TOL).rank, n),
            (
                "[U0; X0]",
                linalg::numeric_rank(&data.stacked(), RANK_TOL).rank,
                (n + m).min(samples),
            ),
        ];
        match checks.iter().find(|(_, r, req)| r < req) {
            None => return Ok(data),
            Some(&(name, rank, required)) => last_failure = Some((name, rank, required)),
        }
    }
    let (matrix, rank, required) = last_failure.expect("at least one attempt");
    if matrix == "X0bar" {
        let ra = linalg::numeric_rank(plant.a(), RANK_TOL).rank;
        if ra < n {
            return Err(Error::SingularDrift { rank: ra, n });
        }
    }
    Err(Error::ExcitationFailure {
        matrix: matrix.into(),
        attempts: RETRY_LIMIT,
        rank,
        required,
    })
}

/// Zero-input data for the verification mode: `U₀ = 0` and the excited run
/// coincides with its twin, so only `X̄₀` needs full row rank.
pub fn collect_autonomous(
    plant: &LtiPlant,
    x_init: Option<&DVector<f64>>,
    initial_box: &AaBox,
    seed: u64,
    tau: f64,
    samples: usize,
    mode: DerivativeMode,
) -> Result<DataSet> {
    let n = plant.state_dim();
    if samples <= n {
        return Err(sample_count_error(samples, n));
    }
    if initial_box.dim() != n {
        return Err(Error::dim("initial-state box", n, initial_box.dim()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zeros = vec![DVector::zeros(plant.input_dim()); samples];
    let mut rank = 0;
    for _ in 0..RETRY_LIMIT {
        let xi = match x_init {
            Some(x) if x.len() == n => x.clone(),
            Some(x) => return Err(Error::dim("initial state", n, x.len())),
            None => DVector::from_vec(initial_box.sample(&mut rng)),
        };
        let data = sample_pair(plant, &xi, &zeros, tau, mode)?;
        rank = linalg::numeric_rank(&data.xbar0, RANK_TOL).rank;
        if rank == n {
            return Ok(data);
        }
        if x_init.is_some() {
            break;
        }
    }
    if linalg::numeric_rank(plant.a(), RANK_TOL).rank < n {
        return Err(Error::SingularDrift {
            rank: linalg::numeric_rank(plant.a(), RANK_TOL).rank,
            n,
        });
    }
    Err(Error::ExcitationFailure {
        matrix: "X0bar".into(),
        attempts: RETRY_LIMIT,
        rank,
        required: n,
    })
}

fn sample_pair(
    plant: &LtiPlant,
    x_init: &DVector<f64>,
    inputs: &[DVector<f64>],
    tau: f64,
    mode: DerivativeMode,
) -> Result<DataSet> {
    let t = inputs.len();
    let m = plant.input_dim();
    let zero = DVector::zeros(m);
    let held = |time: f64| {
        let k = ((time / tau).round() as usize).min(t - 1);
        inputs[k].clone()
    };
    // Finite differences consume one extra sample at the end.
    let steps = match mode {
        DerivativeMode::Exact => t.saturating_sub(1).max(1),
        DerivativeMode::FiniteDifference => t,
    };
    let excited = simulate(plant, x_init, held, tau, steps)?;
    let twin = simulate(plant, x_init, |_| zero.clone(), tau, steps)?;

    let x0 = columns(&excited.states[..t]);
    let xbar0 = columns(&twin.states[..t]);
    let u0 = columns(inputs);
    let (x1, xbar1) = match mode {
        DerivativeMode::Exact => (
            plant.a() * &x0 + plant.b() * &u0,
            plant.a() * &xbar0,
        ),
        DerivativeMode::FiniteDifference => (
            columns(&finite_difference_derivatives(&excited)?[..t]),
            columns(&finite_difference_derivatives(&twin)?[..t]),
        ),
    };
    Ok(DataSet {
        u0,
        x0,
        x1,
        xbar0,
        xbar1,
        tau,
        shared_initial_state: x_init.clone(),
    })
}

pub use crate::linalg::right_pseudoinverse;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityReport {
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// `‖XQ − I‖_F` against [`IDENTITY_TOL`].
pub fn identity_factor_check(x: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<IdentityReport> {
    if x.ncols() != q.nrows() || x.nrows() != q.ncols() {
        return Err(Error::dim(
            "identity factor",
            format!("Q of size {}x{}", x.ncols(), x.nrows()),
            format!("{}x{}", q.nrows(), q.ncols()),
        ));
    }
    let n = x.nrows();
    let residual = (x * q - DMatrix::<f64>::identity(n, n)).norm();
    Ok(IdentityReport {
        residual,
        tolerance: IDENTITY_TOL,
        passed: residual < IDENTITY_TOL,
    })
}

const BUNDLE_FILES: [&str; 6] = ["u0", "x0", "x1", "xbar0", "xbar1", "x_init"];

fn write_matrix_csv(path: &Path, name: &str, m: &DMatrix<f64>, tau: f64, t: usize) -> Result<()> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_path(path)?;
    w.write_record([
        name.to_string(),
        "tau".into(),
        format!("{tau:.16e}"),
        "T".into(),
        t.to_string(),
    ])?;
    for r in 0..m.nrows() {
        w.write_record(m.row(r).iter().map(|v| format!("{v:.16e}")))?;
    }
    w.flush()?;
    Ok(())
}

fn read_matrix_csv(path: &Path, name: &str) -> Result<(DMatrix<f64>, f64, usize)> {
    let file = path.display().to_string();
    let perr = |line: usize, message: String| Error::Parse {
        line,
        message: format!("{file}: {message}"),
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_path(path)?;
    let mut records = rdr.records();
    let header = records
        .next()
        .ok_or_else(|| perr(1, "missing header".into()))??;
    if header.len() != 5 || &header[0] != name || &header[1] != "tau" || &header[3] != "T" {
        return Err(perr(1, format!("expected header `{name},tau,<tau>,T,<T>`")));
    }
    let tau: f64 = header[2]
        .parse()
        .map_err(|_| perr(1, format!("invalid tau `{}`", &header[2])))?;
    let t: usize = header[4]
        .parse()
        .map_err(|_| perr(1, format!("invalid T `{}`", &header[4])))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, rec) in records.enumerate() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|s| s.trim().parse::<f64>().map_err(|_| perr(i + 2, format!("invalid number `{s}`"))))
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(perr(i + 2, format!("row has {} values, expected {}", row.len(), first.len())));
            }
        }
        rows.push(row);
    }
    let cols = rows.first().map_or(0, |r| r.len());
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Ok((DMatrix::from_row_slice(rows.len(), cols, &flat), tau, t))
}

impl DataSet {
    /// One CSV per matrix with a `name,tau,<tau>,T,<T>` header row.
    pub fn export_bundle(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let t = self.samples();
        let init = DMatrix::from_column_slice(self.state_dim(), 1, self.shared_initial_state.as_slice());
        let mats = [&self.u0, &self.x0, &self.x1, &self.xbar0, &self.xbar1, &init];
        for (name, m) in BUNDLE_FILES.iter().zip(mats) {
            write_matrix_csv(&dir.join(format!("{name}.csv")), name, m, self.tau, t)?;
        }
        Ok(())
    }

    pub fn import_bundle(dir: &Path) -> Result<Self> {
        let mut mats = Vec::new();
        let mut meta = None;
        for name in BUNDLE_FILES {
            let (m, tau, t) = read_matrix_csv(&dir.join(format!("{name}.csv")), name)?;
            match meta {
                None => meta = Some((tau, t)),
                Some(prev) if prev != (tau, t) => {
                    return Err(Error::Parse {
                        line: 1,
                        message: format!("{name}.csv header disagrees on tau/T"),
                    })
                }
                _ => {}
            }
            mats.push(m);
        }
        let (tau, _) = meta.expect("bundle has files");
        let init = mats.pop().expect("x_init");
        let mut it = mats.into_iter();
        let data = DataSet {
            u0: it.next().expect("u0"),
            x0: it.next().expect("x0"),
            x1: it.next().expect("x1"),
            xbar0: it.next().expect("xbar0"),
            xbar1: it.next().expect("xbar1"),
            tau,
            shared_initial_state: DVector::from_column_slice(init.as_slice()),
        };
        data.validate()?;
        Ok(data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_plant() -> LtiPlant {
        LtiPlant::from_rows(1, 1, &[-1.0], &[1.0]).unwrap()
    }

    #[test]
    fn rejects_too_few_samples() {
        let p = scalar_plant();
        let ex = Excitation::uniform(AaBox::symmetric(1, 1.0), 1, 0);
        let e = collect(&p, None, &ex, 0.1, 1, DerivativeMode::Exact).unwrap_err();
        assert!(e.to_string().contains("greater than n"));
    }

    #[test]
    fn scalar_collection() {
        let p = scalar_plant();
        let ex = Excitation::uniform(AaBox::symmetric(1, 1.0), 1, 3);
        let x1 = DVector::from_element(1, 1.0);
        let d = collect(&p, Some(&x1), &ex, 0.1, 3, DerivativeMode::Exact).unwrap();
        assert_eq!(d.x0.shape(), (1, 3));
        assert_eq!(linalg::numeric_rank(&d.x0, RANK_TOL).rank, 1);
        assert_eq!(d.x0[(0, 0)], 1.0);
        assert_eq!(d.xbar0[(0, 0)], 1.0);
        d.validate().unwrap();
    }

    #[test]
    fn singular_drift_is_reported() {
        // With A = 0 the zero-input run is constant.
        let p = LtiPlant::from_rows(2, 1, &[0.0; 4], &[1.0, 0.0]).unwrap();
        let ex = Excitation::uniform(AaBox::symmetric(1, 1.0), 2, 1);
        match collect(&p, None, &ex, 0.1, 5, DerivativeMode::Exact) {
            Err(Error::SingularDrift { rank: 0, n: 2 }) => {}
            other => panic!("expected singular drift error, got {other:?}"),
        }
    }

    #[test]
    fn identity_check() {
        let mut x = DMatrix::zeros(2, 4);
        x[(0, 0)] = 1.0;
        x[(1, 1)] = 1.0;
        let q = x.transpose();
        let r = identity_factor_check(&x, &q).unwrap();
        assert_eq!(r.residual, 0.0);
        assert!(r.passed);
        let mut bad = q.clone();
        bad[(0, 0)] += 1.0;
        let r = identity_factor_check(&x, &bad).unwrap();
        assert!(r.residual > 0.5 && !r.passed);
    }
}
