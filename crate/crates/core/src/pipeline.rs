//! End-to-end scenario runs, artifact bundles and re-verification.
//!
//! Step numbers in errors follow the construction order: 1 collect data,
//! 2 `Q̄`, 3 LMI, 4 `Q`, 5 reduction equation, 6 `B̂`, 7 ROM assembly,
//! 8 `Ψ`, 9 `α, κ, ρ`, 10 closeness runs.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::certificate::{self, Certificate, Check, Report, RhoShaping, SHAPING_CONDITION_CAP};
use crate::control::{self, CosimRecord, ReachAvoidSpec, RomPolicy, ZeroPolicy};
use crate::data::{self, DataSet, DerivativeMode, Excitation};
use crate::document::Document;
use crate::error::{Error, Result};
use crate::geometry::AaBox;
use crate::linalg;
use crate::rom::{self, DataRepresentation, Rom, ThetaSelection};
use crate::scenario::{Resolved, RunConfig, Scale, ScenarioConfig, SpecChoice};
use crate::sf::{self, ClosenessBound, SamplingBoxes, SfConstants, SF_SLACK};
use crate::systems::{self, LtiPlant};

pub const CERTIFICATE_FILE: &str = "certificate.txt";
pub const ROM_FILE: &str = "rom.txt";
pub const SUMMARY_FILE: &str = "summary.txt";
pub const SCENARIO_FILE: &str = "scenario.toml";
pub const DATA_DIR: &str = "data";
pub const METADATA_FILE: &str = "benchmark.txt";

pub const RECOVERY_A_TOL: f64 = 1e-8;
pub const RECOVERY_B_TOL: f64 = 1e-7;
pub const CLOSED_LOOP_TOL: f64 = 1e-8;
pub const SPECTRUM_TOL: f64 = 1e-6;
pub const BOUND_SLACK: f64 = 1e-9;
/// Relative tolerance when recomputing `Ψ` and `ρ` from stored artifacts.
pub const RECOMPUTE_TOL: f64 = 1e-8;

/// Outcome of one co-simulated initial condition.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub index: usize,
    pub max_error: f64,
    pub bound_limit: f64,
    pub worst_excess: f64,
    /// `None` when the scenario has no specification to check.
    pub spec_met: Option<bool>,
    /// First time the target was reached, for reach-avoid runs.
    pub reach_time: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub name: String,
    pub certificate: Certificate,
    pub rom: Rom,
    pub constants: SfConstants,
    pub b_hat_scale: f64,
    pub margin: f64,
    pub runs: Vec<RunResult>,
    pub report: Report,
    pub lmi_seconds: f64,
    pub total_seconds: f64,
    pub output_dir: Option<PathBuf>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.report.passed()
    }

    /// 0 when every check passed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    /// `ρ/(ακ)·sup‖û‖` over all runs.
    pub fn bound(&self) -> f64 {
        self.runs.iter().map(|r| r.bound_limit).fold(0.0, f64::max)
    }

    pub fn max_error(&self) -> f64 {
        self.runs.iter().map(|r| r.max_error).fold(0.0, f64::max)
    }

    pub fn summary(&self) -> String {
        let c = &self.constants;
        let mut s = String::new();
        let _ = writeln!(s, "scenario {}", self.name);
        let _ = writeln!(
            s,
            "dimensions: n = {}, m = {}, n_hat = {}",
            self.rom.theta.nrows(),
            self.rom.xi.nrows(),
            self.rom.reduced_dim()
        );
        let _ = writeln!(s, "kappa_hat = {:.6e}", c.kappa_hat);
        let _ = writeln!(s, "epsilon = {:.6e}", c.epsilon);
        let _ = writeln!(s, "alpha = {:.6e}", c.alpha);
        let _ = writeln!(s, "kappa = {:.6e}", c.kappa);
        let _ = writeln!(s, "rho = {:.6e}", c.rho);
        let _ = writeln!(s, "rho/(alpha*kappa) = {:.6e}", c.steady_gain());
        let _ = writeln!(s, "b_hat scale = {:.6e}", self.b_hat_scale);
        let _ = writeln!(s, "output margin = {:.6e}", self.margin);
        let _ = writeln!(s, "runs = {}", self.runs.len());
        if !self.runs.is_empty() {
            let _ = writeln!(s, "bound rho/(alpha*kappa)*sup|u_hat| = {:.6e}", self.bound());
            let _ = writeln!(s, "max empirical error = {:.6e}", self.max_error());
            for r in &self.runs {
                let spec = match r.spec_met {
                    Some(true) => "met",
                    Some(false) => "violated",
                    None => "n/a",
                };
                let _ = write!(
                    s,
                    "  run {}: max error {:.6e}, bound {:.6e}, spec {spec}",
                    r.index, r.max_error, r.bound_limit
                );
                if let Some(t) = r.reach_time {
                    let _ = write!(s, ", reached at t = {t:.3}");
                }
                s.push('\n');
            }
        }
        let _ = writeln!(s, "time: lmi {:.3} s, pipeline {:.3} s", self.lmi_seconds, self.total_seconds);
        for w in &self.certificate.warnings {
            let _ = writeln!(s, "warning: {w}");
        }
        let _ = writeln!(s, "checks:");
        for ch in &self.report.checks {
            let _ = writeln!(s, "{}", ch.line());
        }
        let failed = self.report.checks.iter().filter(|c| !c.passed).count();
        if failed == 0 {
            s.push_str("all checks passed\n");
        } else {
            let _ = writeln!(s, "{failed} checks failed");
        }
        s
    }
}

/// Everything [`audit`] recomputes from.
#[derive(Debug, Clone, Copy)]
pub struct AuditInput<'a> {
    pub plant: &'a LtiPlant,
    pub data: &'a DataSet,
    pub cert: &'a Certificate,
    pub rom: &'a Rom,
    pub rom_input_box: &'a AaBox,
    pub mode: DerivativeMode,
    pub autonomous: bool,
    pub run: &'a RunConfig,
}

fn representation(data: &DataSet, cert: &Certificate, autonomous: bool) -> Result<DataRepresentation> {
    if autonomous {
        Ok(DataRepresentation {
            a_data: &data.xbar1 * &cert.qbar,
            b_data: DMatrix::zeros(data.state_dim(), data.input_dim()),
        })
    } else {
        rom::build_data_representation(data, cert)
    }
}

fn relative_gap(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / (1.0 + b.norm())
}

/// Residual checks on a certificate and ROM, shared by fresh runs and
/// [`reverify`] so both produce the same verdicts.
pub fn audit(input: &AuditInput<'_>) -> Result<Report> {
    let AuditInput {
        plant,
        data,
        cert,
        rom,
        rom_input_box,
        mode,
        autonomous,
        run,
    } = *input;
    let n = data.state_dim();
    if plant.state_dim() != n || rom.theta.nrows() != n || plant.input_dim() != data.input_dim() {
        return Err(Error::dim(
            "artifacts",
            format!("n = {}, m = {}", plant.state_dim(), plant.input_dim()),
            format!("data n = {n}, m = {}, Θ rows {}", data.input_dim(), rom.theta.nrows()),
        ));
    }
    let mut report = certificate::verify_certificate(data, cert)?;
    let closed = &data.x1 * &cert.q;
    report.checks.push(Check::below(
        "certificate: max Re eig(X1*Q) + kappa_hat/2",
        linalg::spectral_abscissa(&closed) + cert.kappa_hat / 2.0,
        SPECTRUM_TOL,
    ));

    let rep = representation(data, cert, autonomous)?;
    if mode == DerivativeMode::Exact {
        report
            .checks
            .push(Check::below("recovery: |X1bar*Qbar - A|_F", (&rep.a_data - plant.a()).norm(), RECOVERY_A_TOL));
        if !autonomous {
            report
                .checks
                .push(Check::below("recovery: |B_data - B|_F", (&rep.b_data - plant.b()).norm(), RECOVERY_B_TOL));
            report.checks.push(Check::below(
                "recovery: |X1*Q - (A + B*F)|_F",
                certificate::closed_loop_reconstruction_check(plant, data, cert),
                CLOSED_LOOP_TOL,
            ));
        }
    }

    let scale = 1.0 + linalg::spectral_norm(&rep.a_data) + linalg::spectral_norm(&rep.b_data) * rom.xi.norm();
    report.checks.push(Check::below(
        "rom: reduction residual (relative)",
        rom::reduction_residual(&rep, &rom.a_hat, &rom.theta, &rom.xi) / scale,
        rom::REDUCTION_TOL,
    ));
    report
        .checks
        .push(Check::below("rom: range condition residual", rom::range_residual(&rep, &rom.theta), rom::RANGE_TOL * 10.0));

    let rho = cert.rho.unwrap_or(0.0);
    if !autonomous {
        let psi = sf::compute_psi(&rep, &cert.p, &rom.theta, &rom.b_hat)?;
        report
            .checks
            .push(Check::below("rom: Psi recomputation gap", relative_gap(&rom.psi, &psi), RECOMPUTE_TOL));
        let rho_now = sf::compute_rho(&rep, &cert.p, &rom.theta, &rom.b_hat, &rom.psi, cert.epsilon)?;
        report.checks.push(Check::below(
            "sf: rho recomputation gap",
            (rho_now - rho).abs() / rho.abs().max(rho_now.abs()).max(f64::MIN_POSITIVE),
            RECOMPUTE_TOL,
        ));
    }

    let constants = SfConstants::new(cert, rho)?;
    let boxes = SamplingBoxes {
        state: AaBox::symmetric(n, run.sf_state_bound),
        rom_state: AaBox::symmetric(rom.reduced_dim(), run.sf_state_bound),
        rom_input: rom_input_box.clone(),
    };
    let sfr = sf::sample_sf_conditions(plant, cert, rom, &constants, &boxes, run.sf_samples, run.seed)?;
    report
        .checks
        .push(Check::below("sf: max lower-bound violation", sfr.max_violation_lower, SF_SLACK));
    report
        .checks
        .push(Check::below("sf: max decay violation", sfr.max_violation_decay, SF_SLACK));
    Ok(report)
}

/// Output-space margin covering both `ρ/(ακ)·‖û‖` and its square-root form.
pub fn output_margin(output_map: &DMatrix<f64>, constants: &SfConstants, rom_input_box: &AaBox) -> f64 {
    let g = constants.steady_gain();
    linalg::spectral_norm(output_map) * g.max(g.sqrt()) * rom_input_box.max_norm()
}

struct Built {
    data: DataSet,
    cert: Certificate,
    rom: Rom,
    constants: SfConstants,
    b_hat_scale: f64,
    lmi_seconds: f64,
}

fn build_rom(cfg: &ScenarioConfig, res: &Resolved) -> Result<Built> {
    let plant = &res.plant;
    let n = plant.state_dim();
    let m = plant.input_dim();
    let r = &cfg.reduction;
    let d = &cfg.data;
    let kh = r.kappa_hat;

    let data = data::collect(
        plant,
        None,
        &Excitation {
            input_box: AaBox::symmetric(m, d.input_bound),
            initial_box: AaBox::symmetric(n, d.initial_bound),
            seed: d.seed,
        },
        d.tau,
        d.samples,
        res.mode,
    )
    .map_err(|e| e.at_step(1, "collect data"))?;

    let qbar = linalg::pinv(&data.xbar0, linalg::RANK_TOL);
    let id = data::identity_factor_check(&data.xbar0, &qbar).map_err(|e| e.at_step(2, "compute Q_bar"))?;
    if !id.passed {
        return Err(Error::RankDeficient {
            what: "X0bar".into(),
            rank: linalg::numeric_rank(&data.xbar0, linalg::RANK_TOL).rank,
            required: n,
            tolerance: id.tolerance,
        }
        .at_step(2, "compute Q_bar"));
    }

    let lmi_start = Instant::now();
    let cert = certificate::solve_feasibility(&data, kh, r.pd_margin)
        .and_then(|c| c.with_epsilon(res.epsilon))
        .map_err(|e| e.at_step(3, "solve LMI"))?;
    let mut lmi_seconds = lmi_start.elapsed().as_secs_f64();
    let rep = rom::build_data_representation(&data, &cert).map_err(|e| e.at_step(4, "compute Q"))?;

    let a_hat = rom::choose_a_hat(r.n_hat, r.a_hat_decay).map_err(|e| e.at_step(5, "solve reduction equation"))?;
    let selection = match &res.alignment {
        Some(target) => ThetaSelection::Aligned {
            output_map: res.output_map.clone(),
            target: target.clone(),
        },
        None => ThetaSelection::MaxMinSingular,
    };
    let (theta, xi) = rom::solve_reduction_equation_with(&rep, &a_hat, r.n_hat, &selection)
        .map_err(|e| e.at_step(5, "solve reduction equation"))?;

    let unit = rom::choose_b_hat(r.n_hat, 1.0).map_err(|e| e.at_step(6, "choose B_hat"))?;
    let (cert, rep) = if r.shape_rho {
        let shaping = RhoShaping {
            b_data: &rep.b_data,
            theta: &theta,
            b_hat: &unit,
            condition_cap: SHAPING_CONDITION_CAP,
        };
        let start = Instant::now();
        let shaped = certificate::solve_shaped(&data, kh, r.pd_margin, &shaping)
            .and_then(|c| c.with_epsilon(res.epsilon))
            .map_err(|e| e.at_step(3, "solve LMI"))?;
        lmi_seconds += start.elapsed().as_secs_f64();
        let rep = rom::build_data_representation(&data, &shaped).map_err(|e| e.at_step(4, "compute Q"))?;
        (shaped, rep)
    } else {
        (cert, rep)
    };

    let b_hat_scale = match r.b_hat_scale {
        Scale::Fixed(s) => s,
        Scale::Named(_) => {
            let psi1 = sf::compute_psi(&rep, &cert.p, &theta, &unit).map_err(|e| e.at_step(8, "compute Psi"))?;
            let rho1 = sf::compute_rho(&rep, &cert.p, &theta, &unit, &psi1, cert.epsilon)
                .map_err(|e| e.at_step(9, "compute alpha, kappa, rho"))?;
            if rho1 > 0.0 {
                (cert.alpha * cert.kappa / rho1).sqrt()
            } else {
                1.0
            }
        }
    };
    let b_hat = rom::choose_b_hat(r.n_hat, b_hat_scale).map_err(|e| e.at_step(6, "choose B_hat"))?;
    let psi = sf::compute_psi(&rep, &cert.p, &theta, &b_hat).map_err(|e| e.at_step(8, "compute Psi"))?;
    let rho = sf::compute_rho(&rep, &cert.p, &theta, &b_hat, &psi, cert.epsilon)
        .map_err(|e| e.at_step(9, "compute alpha, kappa, rho"))?;
    let mut cert = cert;
    cert.rho = Some(rho);
    let constants = SfConstants::new(&cert, rho).map_err(|e| e.at_step(9, "compute alpha, kappa, rho"))?;
    let rom = Rom::new(a_hat, b_hat, theta, xi, psi).map_err(|e| e.at_step(7, "assemble ROM"))?;
    Ok(Built {
        data,
        cert,
        rom,
        constants,
        b_hat_scale,
        lmi_seconds,
    })
}

fn build_autonomous(cfg: &ScenarioConfig, res: &Resolved) -> Result<Built> {
    let plant = &res.plant;
    let n = plant.state_dim();
    let m = plant.input_dim();
    let r = &cfg.reduction;
    let d = &cfg.data;
    let data = data::collect_autonomous(
        plant,
        None,
        &AaBox::symmetric(n, d.initial_bound),
        d.seed,
        d.tau,
        d.samples,
        res.mode,
    )
    .map_err(|e| e.at_step(1, "collect data"))?;
    let start = Instant::now();
    let auto = sf::verify_autonomous(&data, r.kappa_hat, res.epsilon, r.n_hat, r.pd_margin).map_err(|e| match e {
        Error::VerificationInfeasible(_) => e.at_step(5, "solve reduction equation"),
        e => e.at_step(3, "solve LMI"),
    })?;
    let lmi_seconds = start.elapsed().as_secs_f64();
    let mut cert = auto.cert;
    cert.rho = Some(0.0);
    let constants = SfConstants::new(&cert, 0.0).map_err(|e| e.at_step(9, "compute alpha, kappa, rho"))?;
    let rom = Rom::new(
        auto.a_hat,
        DMatrix::zeros(r.n_hat, m),
        auto.theta,
        DMatrix::zeros(m, r.n_hat),
        DMatrix::zeros(m, m),
    )
    .map_err(|e| e.at_step(7, "assemble ROM"))?;
    Ok(Built {
        data,
        cert,
        rom,
        constants,
        b_hat_scale: 0.0,
        lmi_seconds,
    })
}

fn sample_in(b: &AaBox, rng: &mut ChaCha8Rng) -> DVector<f64> {
    DVector::from_vec(b.sample(rng))
}

/// Check the plant output `Sx(t)` of a finished run against the specification.
fn judge(kind: SpecChoice, res: &Resolved, rec: &CosimRecord) -> (Option<bool>, Option<f64>) {
    let outputs = rec.plant_states.iter().map(|x| &res.output_map * x);
    match kind {
        SpecChoice::Safety => {
            let safe = res.safe_box.as_ref().expect("validated");
            (Some(outputs.into_iter().all(|y| safe.contains(y.as_slice()))), None)
        }
        SpecChoice::ReachAvoid => {
            let target = res.target_box.as_ref().expect("validated");
            let mut reach = None;
            let mut clear = true;
            for (t, y) in rec.times.iter().zip(outputs) {
                if reach.is_none() && target.contains(y.as_slice()) {
                    reach = Some(*t);
                }
                if res.obstacles.iter().any(|o| o.contains(y.as_slice())) {
                    clear = false;
                }
            }
            (Some(clear && reach.is_some()), reach)
        }
        _ => (None, None),
    }
}

fn simulate_runs(
    cfg: &ScenarioConfig,
    res: &Resolved,
    built: &Built,
    margin: f64,
    out: Option<&Path>,
) -> Result<Vec<RunResult>> {
    let run = &cfg.run;
    let rom = &built.rom;
    let plant = &res.plant;
    let mut rng = ChaCha8Rng::seed_from_u64(run.seed);
    let step = |e: Error| e.at_step(10, "closeness runs");
    let safety = match cfg.spec.kind {
        SpecChoice::Safety => Some(
            control::safety_controller(
                rom,
                &res.output_map,
                res.safe_box.as_ref().expect("validated"),
                &res.rom_input_box,
                margin,
            )
            .map_err(step)?,
        ),
        _ => None,
    };
    let c_out = &res.output_map * &rom.theta;
    let mut results = Vec::with_capacity(run.runs);
    for k in 0..run.runs {
        let (mut policy, x_hat0): (Box<dyn RomPolicy>, DVector<f64>) = match cfg.spec.kind {
            SpecChoice::Safety => {
                let ctrl = safety.clone().expect("built above");
                let x_hat0 = sample_in(&ctrl.start_box, &mut rng);
                (Box::new(ctrl), x_hat0)
            }
            SpecChoice::ReachAvoid => {
                let start = sample_in(res.start_box.as_ref().expect("validated"), &mut rng);
                let c_inv = c_out
                    .clone()
                    .try_inverse()
                    .ok_or_else(|| step(Error::Precondition("the ROM output map S*Θ is singular".into())))?;
                let x_hat0 = c_inv * &start;
                let spec = ReachAvoidSpec {
                    output_map: res.output_map.clone(),
                    domain: res.domain.clone().expect("validated"),
                    start,
                    target: res.target_box.clone().expect("validated"),
                    obstacles: res.obstacles.clone(),
                    input_box: res.rom_input_box.clone(),
                    margin,
                };
                (Box::new(control::reach_avoid_controller(rom, &spec).map_err(step)?), x_hat0)
            }
            _ => (
                Box::new(ZeroPolicy(rom.input_dim())),
                sample_in(&AaBox::symmetric(rom.reduced_dim(), run.sf_state_bound), &mut rng),
            ),
        };
        let mut x0 = &rom.theta * &x_hat0;
        if cfg.spec.kind == SpecChoice::Verification {
            let dir = sample_in(&AaBox::symmetric(x0.len(), 1.0), &mut rng);
            x0 += dir.normalize();
        }
        let rec = control::cosimulate(
            plant,
            rom,
            &built.cert,
            &built.constants,
            policy.as_mut(),
            &x0,
            &x_hat0,
            run.tau,
            run.horizon,
        )
        .map_err(step)?;
        if let Some(dir) = out {
            let f = fs::File::create(dir.join(format!("run_{k}.csv")))?;
            rec.write_csv(std::io::BufWriter::new(f), run.csv_every)?;
        }
        let (spec_met, reach_time) = judge(cfg.spec.kind, res, &rec);
        results.push(RunResult {
            index: k,
            max_error: rec.max_error(),
            bound_limit: ClosenessBound::limit(&built.constants, rec.u_hat_sup()),
            worst_excess: rec.worst_excess(),
            spec_met,
            reach_time,
        });
    }
    Ok(results)
}

fn write_artifacts(dir: &Path, cfg: &ScenarioConfig, res: &Resolved, built: &Built) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(SCENARIO_FILE), cfg.to_toml())?;
    fs::write(dir.join(CERTIFICATE_FILE), built.cert.to_document().render())?;
    fs::write(dir.join(ROM_FILE), built.rom.to_document().render())?;
    built.data.export_bundle(&dir.join(DATA_DIR))?;
    if let Some(bm) = &res.benchmark {
        fs::write(dir.join(METADATA_FILE), bm.metadata_document().render())?;
    }
    Ok(())
}

/// Run the whole construction for one scenario.
///
/// Artifacts go to `out_dir`, or to the configured `output_dir` when that
/// is `None`; with neither nothing is written. Failed checks are reported
/// in the outcome, while errors abort the run.
pub fn run_scenario(cfg: &ScenarioConfig, out_dir: Option<&Path>) -> Result<Outcome> {
    let started = Instant::now();
    let res = cfg.resolve()?;
    let dir = out_dir.map(Path::to_path_buf).or_else(|| cfg.output_dir.clone());
    let autonomous = cfg.spec.kind == SpecChoice::Verification;
    let built = if autonomous {
        build_autonomous(cfg, &res)?
    } else {
        build_rom(cfg, &res)?
    };
    if let Some(d) = &dir {
        write_artifacts(d, cfg, &res, &built)?;
    }

    let mut report = audit(&AuditInput {
        plant: &res.plant,
        data: &built.data,
        cert: &built.cert,
        rom: &built.rom,
        rom_input_box: &res.rom_input_box,
        mode: res.mode,
        autonomous,
        run: &cfg.run,
    })
    .map_err(|e| e.at_step(10, "closeness runs"))?;

    let margin = output_margin(&res.output_map, &built.constants, &res.rom_input_box);
    let runs = simulate_runs(cfg, &res, &built, margin, dir.as_deref())?;
    if !runs.is_empty() {
        let worst = runs.iter().map(|r| r.worst_excess).fold(f64::NEG_INFINITY, f64::max);
        report.checks.push(Check::below("runs: worst excess of error over bound", worst, BOUND_SLACK));
        let judged: Vec<bool> = runs.iter().filter_map(|r| r.spec_met).collect();
        if !judged.is_empty() {
            let failed = judged.iter().filter(|ok| !**ok).count();
            report.checks.push(Check::below(
                format!("runs: {} runs violating the {} specification", judged.len(), spec_label(cfg.spec.kind)),
                failed as f64,
                0.5,
            ));
        }
    }

    let outcome = Outcome {
        name: cfg.name.clone(),
        certificate: built.cert,
        rom: built.rom,
        constants: built.constants,
        b_hat_scale: built.b_hat_scale,
        margin,
        runs,
        report,
        lmi_seconds: built.lmi_seconds,
        total_seconds: started.elapsed().as_secs_f64(),
        output_dir: dir.clone(),
    };
    if let Some(d) = &dir {
        fs::write(d.join(SUMMARY_FILE), outcome.summary())?;
    }
    Ok(outcome)
}

fn spec_label(kind: SpecChoice) -> &'static str {
    match kind {
        SpecChoice::Safety => "safety",
        SpecChoice::ReachAvoid => "reach-while-avoid",
        SpecChoice::Tracking => "tracking",
        SpecChoice::Verification => "verification",
        SpecChoice::None => "empty",
    }
}

/// Result of re-checking a stored bundle.
#[derive(Debug, Clone)]
pub struct Reverification {
    pub report: Report,
    /// Verdicts recorded in the bundle's summary for the same checks.
    pub recorded: Vec<(String, bool)>,
}

impl Reverification {
    /// True when every recomputed check has the verdict recorded at run time.
    pub fn matches_recorded(&self) -> bool {
        self.report.checks.iter().all(|c| {
            self.recorded
                .iter()
                .find(|(name, _)| *name == c.name)
                .is_some_and(|(_, ok)| *ok == c.passed)
        })
    }

    pub fn exit_code(&self) -> i32 {
        if self.report.passed() {
            0
        } else {
            1
        }
    }
}

fn read_document(path: &Path) -> Result<Document> {
    let src = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    Document::parse(&src)
}

/// Parse `[PASS] name: ...` lines of a summary.
pub fn recorded_verdicts(summary: &str) -> Vec<(String, bool)> {
    summary
        .lines()
        .filter_map(|l| {
            let (ok, rest) = if let Some(r) = l.strip_prefix("[PASS] ") {
                (true, r)
            } else {
                (false, l.strip_prefix("[FAIL] ")?)
            };
            let (name, _) = rest.rsplit_once(": ")?;
            Some((name.to_string(), ok))
        })
        .collect()
}

/// Re-run the residual audit on a bundle written by [`run_scenario`].
pub fn reverify(dir: &Path) -> Result<Reverification> {
    let cfg = ScenarioConfig::load(&dir.join(SCENARIO_FILE))?;
    let res = cfg.resolve()?;
    let cert = Certificate::from_document(&read_document(&dir.join(CERTIFICATE_FILE))?)?;
    let rom = Rom::from_document(&read_document(&dir.join(ROM_FILE))?)?;
    let data = DataSet::import_bundle(&dir.join(DATA_DIR))?;
    let n = data.state_dim();
    if cert.p.shape() != (n, n) || rom.theta.nrows() != n || cert.h.shape() != (data.samples(), n) {
        return Err(Error::dim(
            "stored artifacts",
            format!("P {n}x{n}, Θ with {n} rows, H {}x{n}", data.samples()),
            format!(
                "P {}x{}, Θ with {} rows, H {}x{}",
                cert.p.nrows(),
                cert.p.ncols(),
                rom.theta.nrows(),
                cert.h.nrows(),
                cert.h.ncols()
            ),
        ));
    }
    let report = audit(&AuditInput {
        plant: &res.plant,
        data: &data,
        cert: &cert,
        rom: &rom,
        rom_input_box: &res.rom_input_box,
        mode: res.mode,
        autonomous: cfg.spec.kind == SpecChoice::Verification,
        run: &cfg.run,
    })?;
    let recorded = fs::read_to_string(dir.join(SUMMARY_FILE))
        .map(|s| recorded_verdicts(&s))
        .unwrap_or_default();
    Ok(Reverification { report, recorded })
}

/// One line per built-in benchmark: name, n, default n̂, specification,
/// default number of samples.
pub fn list_benchmarks() -> Vec<String> {
    systems::benchmark_names()
        .iter()
        .filter_map(|name| systems::benchmark(name).ok())
        .map(|b| {
            let r = b.row;
            format!("{}, {}, {}, {}, {}", r.name, r.n, r.n_hat, r.spec.label(), r.samples)
        })
        .collect()
}
