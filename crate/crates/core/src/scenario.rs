//! Scenario configuration files.
//!
//! ```toml
//! name = "motor"
//!
//! [plant]
//! benchmark = "motor"
//!
//! [reduction]
//! n_hat = 1
//! kappa_hat = 3.0
//! epsilon = 1.0
//! a_hat_decay = 0.02
//! b_hat_scale = "auto"
//!
//! [data]
//! tau = 0.005
//! samples = 6
//! seed = 1
//! input_bound = 10.0
//!
//! [spec]
//! kind = "safety"
//! rom_input_bound = 0.1
//!
//! [run]
//! runs = 30
//! ```

use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::data::DerivativeMode;
use crate::error::{Error, Result};
use crate::geometry::AaBox;
use crate::systems::{self, Benchmark, LtiPlant};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub plant: PlantConfig,
    pub reduction: ReductionConfig,
    pub data: DataConfig,
    #[serde(default)]
    pub spec: SpecConfig,
    #[serde(default)]
    pub run: RunConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

/// Exactly one of `benchmark`, inline `a`/`b`, or `seeded_stable`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub benchmark: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeded_stable: Option<SeededStable>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeededStable {
    pub n: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scale {
    Fixed(f64),
    Named(String),
}

impl Default for Scale {
    fn default() -> Self {
        Scale::Named("auto".into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReductionConfig {
    pub n_hat: usize,
    pub kappa_hat: f64,
    /// Defaults to `kappa_hat / 3`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default = "default_decay")]
    pub a_hat_decay: f64,
    /// A number, or `"auto"` to pick the scale at which `ρ = ακ`.
    #[serde(default)]
    pub b_hat_scale: Scale,
    /// Target for `S·Θ`, one row per specification coordinate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_alignment: Option<Vec<Vec<f64>>>,
    #[serde(default = "default_true")]
    pub shape_rho: bool,
    #[serde(default = "default_pd_margin")]
    pub pd_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    pub tau: f64,
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    /// Half-width of the excitation box on every input channel.
    #[serde(default = "default_one")]
    pub input_bound: f64,
    /// Half-width of the box the shared initial state is drawn from.
    #[serde(default = "default_one")]
    pub initial_bound: f64,
    #[serde(default = "default_mode")]
    pub derivative_mode: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpecChoice {
    Safety,
    ReachAvoid,
    Tracking,
    Verification,
    #[default]
    None,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecConfig {
    #[serde(default)]
    pub kind: SpecChoice,
    /// Rows of `S`; defaults to the benchmark's specification map.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_map: Option<Vec<Vec<f64>>>,
    /// Half-width of the ROM input box.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rom_input_bound: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub safe_box: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_box: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_box: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub obstacles: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub runs: usize,
    #[serde(default = "default_cosim_tau")]
    pub tau: f64,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_sf_samples")]
    pub sf_samples: usize,
    /// Half-width of the plant and ROM state boxes sampled by the SF check.
    #[serde(default = "default_one")]
    pub sf_state_bound: f64,
    /// Write every k-th grid point to the run CSVs.
    #[serde(default = "default_csv_every")]
    pub csv_every: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            runs: 0,
            tau: default_cosim_tau(),
            horizon: default_horizon(),
            seed: 0,
            sf_samples: default_sf_samples(),
            sf_state_bound: 1.0,
            csv_every: default_csv_every(),
        }
    }
}

fn default_decay() -> f64 {
    1.0
}
fn default_true() -> bool {
    true
}
fn default_pd_margin() -> f64 {
    crate::certificate::PD_MARGIN
}
fn default_one() -> f64 {
    1.0
}
fn default_mode() -> String {
    "exact".into()
}
fn default_cosim_tau() -> f64 {
    1e-3
}
fn default_horizon() -> f64 {
    10.0
}
fn default_sf_samples() -> usize {
    1000
}
fn default_csv_every() -> usize {
    10
}

fn cfg_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn matrix_from_rows(what: &str, rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let r = rows.len();
    let c = rows.first().map_or(0, |row| row.len());
    if r == 0 || c == 0 || rows.iter().any(|row| row.len() != c) {
        return Err(cfg_err(format!("`{what}` must be a non-empty rectangular list of rows")));
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    if flat.iter().any(|v| !v.is_finite()) {
        return Err(cfg_err(format!("`{what}` has non-finite entries")));
    }
    Ok(DMatrix::from_row_slice(r, c, &flat))
}

fn box_from_pairs(what: &str, pairs: &[[f64; 2]]) -> Result<AaBox> {
    AaBox::new(pairs.iter().map(|p| p[0]).collect(), pairs.iter().map(|p| p[1]).collect())
        .map_err(|e| cfg_err(format!("`{what}`: {e}")))
}

/// Everything a run needs, with benchmark defaults filled in.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub plant: LtiPlant,
    pub benchmark: Option<Benchmark>,
    pub epsilon: f64,
    pub mode: DerivativeMode,
    pub output_map: DMatrix<f64>,
    pub alignment: Option<DMatrix<f64>>,
    pub rom_input_box: AaBox,
    pub safe_box: Option<AaBox>,
    pub start_box: Option<AaBox>,
    pub target_box: Option<AaBox>,
    pub obstacles: Vec<AaBox>,
    pub domain: Option<AaBox>,
}

impl ScenarioConfig {
    pub fn from_toml(src: &str) -> Result<Self> {
        toml::from_str(src).map_err(|e| cfg_err(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path)
            .map_err(|e| cfg_err(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&src)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario configs serialise")
    }

    pub fn epsilon(&self) -> f64 {
        self.reduction.epsilon.unwrap_or(self.reduction.kappa_hat / 3.0)
    }

    /// Check the invariants and fill in benchmark defaults.
    pub fn resolve(&self) -> Result<Resolved> {
        let r = &self.reduction;
        if !(r.kappa_hat > 0.0) || !r.kappa_hat.is_finite() {
            return Err(cfg_err(format!("kappa_hat must be positive, got {}", r.kappa_hat)));
        }
        let epsilon = self.epsilon();
        if !(epsilon > 0.0 && epsilon < r.kappa_hat) {
            return Err(cfg_err(format!(
                "epsilon must satisfy 0 < epsilon < kappa_hat, got epsilon = {epsilon}, kappa_hat = {}",
                r.kappa_hat
            )));
        }
        if !(r.a_hat_decay > 0.0) {
            return Err(cfg_err(format!("a_hat_decay must be positive, got {}", r.a_hat_decay)));
        }
        match &r.b_hat_scale {
            Scale::Fixed(s) if !(*s > 0.0) || !s.is_finite() => {
                return Err(cfg_err(format!("b_hat_scale must be positive, got {s}")))
            }
            Scale::Named(s) if s != "auto" => {
                return Err(cfg_err(format!("b_hat_scale must be a number or \"auto\", got \"{s}\"")))
            }
            _ => {}
        }
        if !(r.pd_margin > 0.0) {
            return Err(cfg_err("pd_margin must be positive"));
        }
        let d = &self.data;
        if !(d.tau > 0.0) || !(d.input_bound > 0.0) || !(d.initial_bound > 0.0) {
            return Err(cfg_err("data tau, input_bound and initial_bound must be positive"));
        }
        let mode = DerivativeMode::parse(&d.derivative_mode)?;
        let run = &self.run;
        if !(run.tau > 0.0) || !(run.horizon >= 0.0) || run.csv_every == 0 || !(run.sf_state_bound > 0.0) {
            return Err(cfg_err("run tau, csv_every and sf_state_bound must be positive, horizon nonnegative"));
        }

        let p = &self.plant;
        let choices = p.benchmark.is_some() as u8 + (p.a.is_some() || p.b.is_some()) as u8 + p.seeded_stable.is_some() as u8;
        if choices != 1 {
            return Err(cfg_err("[plant] needs exactly one of `benchmark`, `a` + `b`, or `seeded_stable`"));
        }
        let benchmark = match &p.benchmark {
            Some(name) => Some(systems::benchmark(name)?),
            None => None,
        };
        let plant = if let Some(bm) = &benchmark {
            bm.plant.clone()
        } else if let Some(s) = &p.seeded_stable {
            systems::seeded_stable_plant(s.n, s.seed)?
        } else {
            let a = matrix_from_rows("plant.a", p.a.as_deref().ok_or_else(|| cfg_err("inline plant needs `a`"))?)?;
            let b = matrix_from_rows("plant.b", p.b.as_deref().ok_or_else(|| cfg_err("inline plant needs `b`"))?)?;
            LtiPlant::new(a, b).map_err(|e| cfg_err(format!("inline plant: {e}")))?
        };
        let n = plant.state_dim();
        if d.samples <= n {
            return Err(cfg_err(format!(
                "the number of samples T must be greater than n (T = {}, n = {n})",
                d.samples
            )));
        }
        if r.n_hat == 0 || r.n_hat > n {
            return Err(cfg_err(format!("n_hat must satisfy 1 <= n_hat <= n = {n}, got {}", r.n_hat)));
        }

        let s = &self.spec;
        let output_map = match (&s.output_map, &benchmark) {
            (Some(rows), _) => matrix_from_rows("spec.output_map", rows)?,
            (None, Some(bm)) => bm.spec_map.clone(),
            (None, None) => DMatrix::identity(n, n),
        };
        if output_map.ncols() != n {
            return Err(cfg_err(format!("spec.output_map must have n = {n} columns")));
        }
        let alignment = match &r.theta_alignment {
            Some(rows) => {
                let t = matrix_from_rows("reduction.theta_alignment", rows)?;
                if t.shape() != (output_map.nrows(), r.n_hat) {
                    return Err(cfg_err(format!(
                        "theta_alignment must be {}x{} (rows of S by n_hat)",
                        output_map.nrows(),
                        r.n_hat
                    )));
                }
                Some(t)
            }
            None => None,
        };
        let rom_input_box = match (s.rom_input_bound, benchmark.as_ref().and_then(|b| b.rom_input_box.as_ref())) {
            (Some(v), _) if v > 0.0 => AaBox::symmetric(r.n_hat, v),
            (Some(v), _) => return Err(cfg_err(format!("rom_input_bound must be positive, got {v}"))),
            (None, Some(b)) if b.dim() == r.n_hat => b.clone(),
            _ => AaBox::symmetric(r.n_hat, 1.0),
        };
        let pick = |what: &str, own: &Option<Vec<[f64; 2]>>, fallback: Option<&AaBox>| -> Result<Option<AaBox>> {
            match own {
                Some(pairs) => box_from_pairs(what, pairs).map(Some),
                None => Ok(fallback.cloned()),
            }
        };
        let bm = benchmark.as_ref();
        let safe_box = pick("spec.safe_box", &s.safe_box, bm.and_then(|b| b.safe_set.as_ref()))?;
        let start_box = pick("spec.start_box", &s.start_box, bm.and_then(|b| b.start_set.as_ref()))?;
        let target_box = pick("spec.target_box", &s.target_box, bm.and_then(|b| b.target_set.as_ref()))?;
        let domain = pick("spec.domain", &s.domain, bm.and_then(|b| b.domain.as_ref()))?;
        let obstacles = match &s.obstacles {
            Some(list) => list
                .iter()
                .enumerate()
                .map(|(i, o)| box_from_pairs(&format!("spec.obstacles[{i}]"), o))
                .collect::<Result<Vec<_>>>()?,
            None => bm.map(|b| b.obstacles.clone()).unwrap_or_default(),
        };
        let out_dim = output_map.nrows();
        match s.kind {
            SpecChoice::Safety => {
                let b = safe_box.as_ref().ok_or_else(|| cfg_err("safety needs `spec.safe_box`"))?;
                if b.dim() != out_dim {
                    return Err(cfg_err(format!("safe_box has dimension {}, output map has {out_dim} rows", b.dim())));
                }
            }
            SpecChoice::ReachAvoid => {
                for (what, b) in [("start_box", &start_box), ("target_box", &target_box), ("domain", &domain)] {
                    let b = b.as_ref().ok_or_else(|| cfg_err(format!("reach-avoid needs `spec.{what}`")))?;
                    if b.dim() != 2 || out_dim != 2 {
                        return Err(cfg_err(format!("reach-avoid works in a 2-D output plane; {what} has dimension {}", b.dim())));
                    }
                }
                if r.n_hat != 2 {
                    return Err(cfg_err("reach-avoid needs n_hat = 2"));
                }
            }
            _ => {}
        }
        Ok(Resolved {
            plant,
            benchmark,
            epsilon,
            mode,
            output_map,
            alignment,
            rom_input_box,
            safe_box,
            start_box,
            target_box,
            obstacles,
            domain,
        })
    }
}
