//! The five benchmark plants and their specification metadata.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::LtiPlant;
use crate::document::Document;
use crate::error::{Error, Result};
use crate::geometry::AaBox;
use crate::linalg;

/// Seed used for the 25-state plant unless overridden.
pub const HIGH25_SEED: u64 = 7;
/// Strength of the feedback from states 1 and 2 into the internal network.
pub const HIGH25_COUPLING: f64 = 0.02;
const M: usize = 2;

const NAMES: [&str; 5] = ["motor", "spacecraft", "glucose", "cart", "high25"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpecKind {
    Safety,
    ReachAvoid,
    Tracking,
    Verification,
}

impl SpecKind {
    pub fn label(self) -> &'static str {
        match self {
            SpecKind::Safety => "safety",
            SpecKind::ReachAvoid => "reach-while-avoid",
            SpecKind::Tracking => "tracking",
            SpecKind::Verification => "verification",
        }
    }
}

/// One row of the published summary table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableRow {
    pub name: &'static str,
    pub n: usize,
    pub n_hat: usize,
    pub spec: SpecKind,
    pub samples: usize,
    pub runtime_s: f64,
}

#[derive(Debug, Clone)]
pub struct Benchmark {
    pub row: TableRow,
    pub plant: LtiPlant,
    /// ROM input bounds used by the original controller designs.
    pub rom_input_box: Option<AaBox>,
    /// Linear map from the state to the specification coordinates.
    pub spec_map: DMatrix<f64>,
    pub safe_set: Option<AaBox>,
    pub start_set: Option<AaBox>,
    pub target_set: Option<AaBox>,
    pub obstacles: Vec<AaBox>,
    pub domain: Option<AaBox>,
}

pub fn benchmark_names() -> &'static [&'static str] {
    &NAMES
}

pub fn benchmark(name: &str) -> Result<Benchmark> {
    match name {
        "motor" => Ok(motor()),
        "spacecraft" => Ok(spacecraft()),
        "glucose" => Ok(glucose()),
        "cart" => Ok(cart()),
        "high25" => high25(HIGH25_SEED),
        _ => Err(Error::UnknownBenchmark {
            name: name.to_string(),
            valid: NAMES.join(", "),
        }),
    }
}

fn select_rows(n: usize, rows: &[usize]) -> DMatrix<f64> {
    let mut s = DMatrix::zeros(rows.len(), n);
    for (i, &r) in rows.iter().enumerate() {
        s[(i, r)] = 1.0;
    }
    s
}

fn motor() -> Benchmark {
    #[rustfmt::skip]
    let a = [
        -18.925, 0.0, 0.22572, 80.823, 29.973,
        0.0, -18.925, -80.823, 0.22572, 0.017978,
        -0.22572, 80.823, -76.569, 0.0, -0.26957,
        -80.823, -0.22572, 0.0, -76.569, -122.93,
        29.973, 0.017978, 0.26957, 122.93, -194.95,
    ];
    #[rustfmt::skip]
    let b = [
        5.3423, 0.0,
        0.0, -5.3423,
        0.02, 6.8169,
        6.8169, -0.02,
        4.5252, 0.003,
    ];
    Benchmark {
        row: TableRow {
            name: "motor",
            n: 5,
            n_hat: 1,
            spec: SpecKind::Safety,
            samples: 6,
            runtime_s: 0.10,
        },
        plant: LtiPlant::from_rows(5, 2, &a, &b).expect("motor matrices are valid"),
        rom_input_box: Some(AaBox::symmetric(1, 10.0)),
        spec_map: select_rows(5, &[0, 1, 2]),
        safe_set: Some(AaBox::from_pairs(&[(1.0, 1.5), (1.0, 1.5), (0.3, 0.7)])),
        start_set: None,
        target_set: None,
        obstacles: Vec::new(),
        domain: None,
    }
}

fn spacecraft() -> Benchmark {
    #[rustfmt::skip]
    let a = [
        0.0, 0.0, 1.0, 0.0,
        0.0, 0.0, 0.0, 1.0,
        -3.1623, 0.0017, -4.0404, 0.0022,
        -0.0017, -3.1623, -0.0022, -4.0404,
    ];
    let b = [0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0];
    Benchmark {
        row: TableRow {
            name: "spacecraft",
            n: 4,
            n_hat: 2,
            spec: SpecKind::ReachAvoid,
            samples: 10,
            runtime_s: 0.11,
        },
        plant: LtiPlant::from_rows(4, 2, &a, &b).expect("spacecraft matrices are valid"),
        rom_input_box: Some(AaBox::symmetric(2, 6.0)),
        spec_map: select_rows(4, &[0, 1]),
        safe_set: None,
        start_set: Some(AaBox::from_pairs(&[(0.0, 1.0), (0.0, 1.0)])),
        target_set: Some(AaBox::from_pairs(&[(9.0, 10.0), (9.0, 10.0)])),
        obstacles: vec![
            AaBox::from_pairs(&[(2.5, 4.5), (0.0, 5.5)]),
            AaBox::from_pairs(&[(6.0, 7.5), (4.0, 10.0)]),
        ],
        domain: Some(AaBox::from_pairs(&[(0.0, 10.0), (0.0, 10.0)])),
    }
}

fn glucose() -> Benchmark {
    #[rustfmt::skip]
    let a = [
        -1.73, 1.73, 0.0, 0.0, 0.0, 0.0, 0.0,
        0.45, -3.15, 0.0, 0.90, 0.72, 1.06, 0.0,
        0.0, 0.76, -0.76, 0.0, 0.0, 0.0, 0.0,
        0.0, 0.08, 0.32, -0.76, 0.0, 0.0, 0.0,
        0.0, 1.41, 0.0, 0.0, 1.19, 0.0, 0.0,
        0.0, 1.41, 0.0, 0.0, 0.0, -1.87, 0.45,
        0.0, 0.0, 0.0, 0.0, 0.0, 0.05, -0.46,
    ];
    let b = [0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0];
    Benchmark {
        row: TableRow {
            name: "glucose",
            n: 7,
            n_hat: 1,
            spec: SpecKind::Safety,
            samples: 250,
            runtime_s: 0.52,
        },
        plant: LtiPlant::from_rows(7, 1, &a, &b).expect("glucose matrices are valid"),
        rom_input_box: None,
        spec_map: DMatrix::from_element(1, 7, 1.0),
        safe_set: Some(AaBox::from_pairs(&[(30.0, 40.0)])),
        start_set: None,
        target_set: None,
        obstacles: Vec::new(),
        domain: None,
    }
}

fn cart() -> Benchmark {
    #[rustfmt::skip]
    let a = [
        0.0, 1.0, 0.0, 0.0, 0.0, 0.0,
        -1.0, -1.0, 19.6, 1.0, 0.0, 0.0,
        0.0, 0.0, 0.0, 1.0, 0.0, 0.0,
        1.0, 1.0, -39.2, -2.0, 9.8, 1.0,
        0.0, 0.0, 0.0, 0.0, 0.0, 1.0,
        0.0, 0.0, 19.6, 1.0, -19.6, -2.0,
    ];
    let b = [0.0, 1.0, 0.0, -1.0, 0.0, 0.0];
    Benchmark {
        row: TableRow {
            name: "cart",
            n: 6,
            n_hat: 1,
            spec: SpecKind::Tracking,
            samples: 7,
            runtime_s: 0.17,
        },
        plant: LtiPlant::from_rows(6, 1, &a, &b).expect("cart matrices are valid"),
        rom_input_box: None,
        spec_map: select_rows(6, &[0]),
        safe_set: None,
        start_set: None,
        target_set: None,
        obstacles: Vec::new(),
        domain: None,
    }
}

fn high25(seed: u64) -> Result<Benchmark> {
    Ok(Benchmark {
        row: TableRow {
            name: "high25",
            n: 25,
            n_hat: 2,
            spec: SpecKind::ReachAvoid,
            samples: 48,
            runtime_s: 0.68,
        },
        plant: high25_plant(seed)?,
        rom_input_box: None,
        spec_map: select_rows(25, &[0, 1]),
        safe_set: None,
        start_set: Some(AaBox::from_pairs(&[(4.0, 5.0), (0.0, 1.0)])),
        target_set: Some(AaBox::from_pairs(&[(0.0, 1.0), (3.5, 6.0)])),
        obstacles: vec![AaBox::from_pairs(&[(1.5, 3.0), (1.5, 3.0)])],
        domain: Some(AaBox::from_pairs(&[(0.0, 6.0), (0.0, 6.0)])),
    })
}

/// Seeded 25-state, 2-input plant.
///
/// States 1 and 2 form a slowly unstable pair driven directly by the two
/// inputs and by a stable 23-state network: eleven damped rotation blocks
/// with distinct frequencies plus one real mode, mixed by a random
/// orthogonal similarity. The network hears back from states 1 and 2
/// through a weak coupling of size `HIGH25_COUPLING`. Distinct eigenvalues
/// keep the zero-input Krylov sequence well conditioned.
pub fn high25_plant(seed: u64) -> Result<LtiPlant> {
    const N: usize = 25;
    const NI: usize = 23;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..20 {
        let mut d = DMatrix::<f64>::zeros(NI, NI);
        for k in 0..11 {
            let a: f64 = rng.random_range(-0.6..-0.3);
            let w = 3.0 * (k + 1) as f64 / 11.0 * rng.random_range(0.95..1.05);
            let i = 2 * k;
            d[(i, i)] = a;
            d[(i, i + 1)] = w;
            d[(i + 1, i)] = -w;
            d[(i + 1, i + 1)] = a;
        }
        d[(NI - 1, NI - 1)] = -0.3;
        let g = DMatrix::<f64>::from_fn(NI, NI, |_, _| rng.sample(StandardNormal));
        let q = g.qr().q();

        let mut a = DMatrix::<f64>::zeros(N, N);
        a[(0, 0)] = 0.1;
        a[(1, 1)] = 0.05;
        for j in 2..N {
            a[(0, j)] = rng.random_range(-0.3..0.3);
            a[(1, j)] = rng.random_range(-0.3..0.3);
        }
        for i in 2..N {
            a[(i, 0)] = HIGH25_COUPLING * rng.random_range(-1.0..1.0);
            a[(i, 1)] = HIGH25_COUPLING * rng.random_range(-1.0..1.0);
        }
        a.view_mut((2, 2), (NI, NI)).copy_from(&(&q * d * q.transpose()));
        let mut b = DMatrix::<f64>::zeros(N, M);
        for i in 0..M {
            for j in 0..M {
                b[(i, j)] = rng.random_range(-1.0..=1.0);
            }
        }
        let plant = LtiPlant::new(a, b)?;
        if linalg::numeric_rank(plant.a(), linalg::RANK_TOL).rank == N && plant.is_stabilizable() {
            return Ok(plant);
        }
    }
    Err(Error::Precondition(format!(
        "could not generate a full-rank stabilizable 25-state plant from seed {seed}"
    )))
}

impl Benchmark {
    pub fn name(&self) -> &'static str {
        self.row.name
    }

    /// Structured text export of the matrices and specification sets.
    pub fn metadata_document(&self) -> Document {
        let mut doc = Document::new("benchmark");
        doc.set_text("name", self.row.name);
        doc.set_text("specification", self.row.spec.label());
        doc.set_scalar("n", self.row.n as f64);
        doc.set_scalar("n_hat", self.row.n_hat as f64);
        doc.set_scalar("samples", self.row.samples as f64);
        doc.set_scalar("reference_runtime_s", self.row.runtime_s);
        doc.set_matrix("a", self.plant.a().clone());
        doc.set_matrix("b", self.plant.b().clone());
        doc.set_matrix("spec_map", self.spec_map.clone());
        let mut put_box = |key: &str, b: &AaBox| doc.set_box(key, b);
        if let Some(b) = &self.rom_input_box {
            put_box("rom_input_box", b);
        }
        if let Some(b) = &self.safe_set {
            put_box("safe_set", b);
        }
        if let Some(b) = &self.start_set {
            put_box("start_set", b);
        }
        if let Some(b) = &self.target_set {
            put_box("target_set", b);
        }
        if let Some(b) = &self.domain {
            put_box("domain", b);
        }
        for (i, o) in self.obstacles.iter().enumerate() {
            put_box(&format!("obstacle_{i}"), o);
        }
        doc
    }
}
