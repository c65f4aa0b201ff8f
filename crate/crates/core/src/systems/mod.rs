//! Ground-truth LTI plants and their numerical integration.
//!
//! Plants here stand in for the physical system: the certificate pipeline
//! never reads `A` or `B` directly, it only sees sampled data.

mod benchmarks;

pub use benchmarks::{
    benchmark, benchmark_names, high25_plant, Benchmark, SpecKind, TableRow, HIGH25_SEED,
};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;

/// Seeded input-free test plant `Q·D·Qᵀ` with `D` a stable diagonal whose
/// entries lie in `[−3, −0.5]` and `Q` a random rotation; `B` is a zero column.
pub fn seeded_stable_plant(n: usize, seed: u64) -> Result<LtiPlant> {
    use rand::{Rng, SeedableRng};
    use rand_distr::StandardNormal;
    if n == 0 {
        return Err(Error::InvalidArgument("state dimension must be positive".into()));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let q = g.qr().q();
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(n, |_, _| rng.random_range(-3.0..-0.5)));
    LtiPlant::new(&q * d * q.transpose(), DMatrix::zeros(n, 1))
}

/// Continuous-time plant `ẋ = Ax + Bu` with full-state output.
#[derive(Debug, Clone, PartialEq)]
pub struct LtiPlant {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
}

impl LtiPlant {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>) -> Result<Self> {
        if !a.is_square() || a.nrows() == 0 {
            return Err(Error::dim(
                "plant A",
                "square, nonempty",
                format!("{}x{}", a.nrows(), a.ncols()),
            ));
        }
        if b.nrows() != a.nrows() || b.ncols() == 0 {
            return Err(Error::dim(
                "plant B",
                format!("{}xm with m >= 1", a.nrows()),
                format!("{}x{}", b.nrows(), b.ncols()),
            ));
        }
        if !linalg::all_finite(&a) || !linalg::all_finite(&b) {
            return Err(Error::InvalidArgument("plant matrices must be finite".into()));
        }
        Ok(Self { a, b })
    }

    pub fn from_rows(n: usize, m: usize, a: &[f64], b: &[f64]) -> Result<Self> {
        if a.len() != n * n || b.len() != n * m {
            return Err(Error::dim(
                "plant row data",
                format!("{} and {} entries", n * n, n * m),
                format!("{} and {}", a.len(), b.len()),
            ));
        }
        Self::new(
            DMatrix::from_row_slice(n, n, a),
            DMatrix::from_row_slice(n, m, b),
        )
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.b.ncols()
    }

    /// PBH test restricted to eigenvalues with nonnegative real part.
    pub fn is_stabilizable(&self) -> bool {
        let n = self.state_dim();
        let m = self.input_dim();
        for lam in self.a.complex_eigenvalues().iter() {
            if lam.re < 0.0 {
                continue;
            }
            // Real embedding of [A - λI, B]; its rank is twice the complex rank.
            let mut emb = DMatrix::zeros(2 * n, 2 * (n + m));
            for i in 0..n {
                for j in 0..n {
                    let v = self.a[(i, j)] - if i == j { lam.re } else { 0.0 };
                    emb[(i, j)] = v;
                    emb[(n + i, n + m + j)] = v;
                }
                emb[(i, n + m + i)] = lam.im;
                emb[(n + i, i)] = -lam.im;
                for j in 0..m {
                    emb[(i, n + j)] = self.b[(i, j)];
                    emb[(n + i, 2 * n + m + j)] = self.b[(i, j)];
                }
            }
            if linalg::numeric_rank(&emb, 1e-10).rank < 2 * n {
                return false;
            }
        }
        true
    }
}

/// Uniformly sampled trajectory; `inputs[k]` is held over `[t_k, t_{k+1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub tau: f64,
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
    pub inputs: Vec<DVector<f64>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &DVector<f64> {
        self.states.last().expect("trajectory has at least one sample")
    }
}

/// `Ax + Bu`.
pub fn exact_derivative(
    plant: &LtiPlant,
    x: &DVector<f64>,
    u: &DVector<f64>,
) -> Result<DVector<f64>> {
    if x.len() != plant.state_dim() {
        return Err(Error::dim("state", plant.state_dim(), x.len()));
    }
    if u.len() != plant.input_dim() {
        return Err(Error::dim("input", plant.input_dim(), u.len()));
    }
    Ok(plant.a() * x + plant.b() * u)
}

/// One classical RK4 step of `ẋ = Ax + b` with `b` constant over the step.
pub(crate) fn rk4_step(
    a: &DMatrix<f64>,
    drive: &DVector<f64>,
    x: &DVector<f64>,
    tau: f64,
) -> DVector<f64> {
    let f = |v: &DVector<f64>| a * v + drive;
    let k1 = f(x);
    let k2 = f(&(x + &k1 * (0.5 * tau)));
    let k3 = f(&(x + &k2 * (0.5 * tau)));
    let k4 = f(&(x + &k3 * tau));
    x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (tau / 6.0)
}

/// Fixed-step RK4 with zero-order-hold inputs, returning `steps + 1` samples.
pub fn simulate<F>(
    plant: &LtiPlant,
    x0: &DVector<f64>,
    input_signal: F,
    tau: f64,
    steps: usize,
) -> Result<Trajectory>
where
    F: Fn(f64) -> DVector<f64>,
{
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::InvalidArgument(format!("tau must be positive, got {tau}")));
    }
    if steps == 0 {
        return Err(Error::InvalidArgument("steps must be at least 1".into()));
    }
    if x0.len() != plant.state_dim() {
        return Err(Error::dim("initial state", plant.state_dim(), x0.len()));
    }
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut inputs = Vec::with_capacity(steps + 1);
    let mut x = x0.clone();
    for k in 0..=steps {
        let t = k as f64 * tau;
        let u = input_signal(t);
        if u.len() != plant.input_dim() {
            return Err(Error::dim("input signal", plant.input_dim(), u.len()));
        }
        times.push(t);
        states.push(x.clone());
        if k < steps {
            let drive = plant.b() * &u;
            x = rk4_step(plant.a(), &drive, &x, tau);
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::IntegrationDiverged {
                    step: k + 1,
                    time: (k + 1) as f64 * tau,
                });
            }
        }
        inputs.push(u);
    }
    Ok(Trajectory {
        tau,
        times,
        states,
        inputs,
    })
}

/// Forward differences `(x_{k+1} - x_k) / τ`; the error is O(τ).
pub fn finite_difference_derivatives(traj: &Trajectory) -> Result<Vec<DVector<f64>>> {
    if traj.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "finite differences need at least 2 samples, got {}",
            traj.len()
        )));
    }
    Ok(traj
        .states
        .windows(2)
        .map(|w| (&w[1] - &w[0]) / traj.tau)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zero_input(m: usize) -> impl Fn(f64) -> DVector<f64> {
        move |_| DVector::zeros(m)
    }

    #[test]
    fn zero_dynamics_hold_state() {
        let p = LtiPlant::from_rows(1, 1, &[0.0], &[0.0]).unwrap();
        let tr = simulate(&p, &DVector::from_element(1, 3.0), |_| DVector::from_element(1, 7.0), 0.1, 20)
            .unwrap();
        assert!(tr.states.iter().all(|x| x[0] == 3.0));
    }

    #[test]
    fn decaying_exponential() {
        let p = LtiPlant::from_rows(2, 1, &[-1.0, 0.0, 0.0, -1.0], &[0.0, 0.0]).unwrap();
        let tr = simulate(&p, &DVector::from_element(2, 1.0), zero_input(1), 0.01, 100).unwrap();
        let e = (-1.0f64).exp();
        assert!((tr.final_state()[0] - e).abs() < 1e-6);
        assert!((tr.final_state()[1] - e).abs() < 1e-6);
        assert!((tr.times[100] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn divergence_names_the_step() {
        let p = LtiPlant::from_rows(1, 1, &[1e3], &[0.0]).unwrap();
        match simulate(&p, &DVector::from_element(1, 1.0), zero_input(1), 1.0, 400) {
            Err(Error::IntegrationDiverged { step, .. }) => assert!(step > 1 && step < 400),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn derivative_is_ax_plus_bu() {
        let p = LtiPlant::from_rows(2, 1, &[1.0, 0.0, 0.0, 1.0], &[0.0, 0.0]).unwrap();
        let d = exact_derivative(&p, &DVector::from_vec(vec![1.0, 2.0]), &DVector::zeros(1)).unwrap();
        assert_eq!(d.as_slice(), &[1.0, 2.0]);
        assert!(exact_derivative(&p, &DVector::zeros(3), &DVector::zeros(1)).is_err());
    }

    #[test]
    fn finite_differences() {
        let ramp = Trajectory {
            tau: 1.0,
            times: vec![0.0, 1.0, 2.0],
            states: (0..3).map(|k| DVector::from_element(1, k as f64)).collect(),
            inputs: vec![DVector::zeros(1); 3],
        };
        let d = finite_difference_derivatives(&ramp).unwrap();
        assert_eq!(d.len(), 2);
        assert!(d.iter().all(|v| v[0] == 1.0));

        let p = LtiPlant::from_rows(1, 1, &[-1.0], &[0.0]).unwrap();
        let tr = simulate(&p, &DVector::from_element(1, 1.0), zero_input(1), 1e-4, 3).unwrap();
        let d = finite_difference_derivatives(&tr).unwrap();
        assert!((d[0][0] + 1.0).abs() < 1e-3);

        let single = Trajectory {
            tau: 1.0,
            times: vec![0.0],
            states: vec![DVector::zeros(1)],
            inputs: vec![DVector::zeros(1)],
        };
        assert!(matches!(
            finite_difference_derivatives(&single),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn stabilizability() {
        let unstab = LtiPlant::from_rows(1, 1, &[1.0], &[0.0]).unwrap();
        assert!(!unstab.is_stabilizable());
        let ok = LtiPlant::from_rows(1, 1, &[1.0], &[1.0]).unwrap();
        assert!(ok.is_stabilizable());
        // Rotation with an uncontrolled marginal pair.
        let rot = LtiPlant::from_rows(2, 1, &[0.0, 1.0, -1.0, 0.0], &[0.0, 0.0]).unwrap();
        assert!(!rot.is_stabilizable());
    }
}
