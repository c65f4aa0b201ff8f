//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
//!
//! Tolerances and run counts are pinned here and are not configurable.

use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use nalgebra::DMatrix;
use romcert::certificate::{self, CHECK_LMI, CHECK_PD, CHECK_SYMMETRY, PD_MARGIN};
use romcert::data::{collect, collect_autonomous, DataSet, DerivativeMode, Excitation};
use romcert::linalg;
use romcert::pipeline::{run_scenario, Outcome};
use romcert::rom::{self, DataRepresentation};
use romcert::scenario::ScenarioConfig;
use romcert::sf::{self, closeness_bound, SamplingBoxes};
use romcert::systems::{benchmark, LtiPlant};
use romcert::{AaBox, Certificate};

const BENCHMARKS: [&str; 5] = ["motor", "spacecraft", "glucose", "cart", "high25"];

const BOUND_DECIMALS: f64 = 1e4;
const RECOVERY_A_TOL: f64 = 1e-8;
const RECOVERY_B_TOL: f64 = 1e-7;
const CLOSED_LOOP_TOL: f64 = 1e-8;
const RECOVERY_SECONDS: f64 = 5.0;
const SYMMETRY_TOL: f64 = 1e-7;
const LMI_TOL: f64 = 1e-7;
const SPECTRUM_TOL: f64 = 1e-6;
const CERTIFICATE_SECONDS: f64 = 10.0;
const PUBLISHED_REDUCTION_TOL: f64 = 5e-3;
const SF_SAMPLES: usize = 1000;
const SF_SLACK: f64 = 1e-9;
const SF_SECONDS: f64 = 5.0;
const DOMINANCE_RUNS: usize = 30;
const DOMINANCE_SLACK: f64 = 1e-9;
const DOMINANCE_HORIZON: f64 = 10.0;
const DOMINANCE_TAU: f64 = 1e-3;
const SPEC_RUNS: [(&str, usize); 3] = [("motor", 30), ("spacecraft", 10), ("high25", 20)];
const VERIFICATION_TOL: f64 = 1e-7;
const RUNTIME_SLACK: f64 = 50.0;

struct Verdict {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn scenario(name: &str) -> ScenarioConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(format!("{name}.toml"));
    ScenarioConfig::load(&path).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn collect_for(name: &str) -> (LtiPlant, DataSet, ScenarioConfig) {
    let cfg = scenario(name);
    let plant = benchmark(name).unwrap().plant;
    let d = &cfg.data;
    let ex = Excitation {
        input_box: AaBox::symmetric(plant.input_dim(), d.input_bound),
        initial_box: AaBox::symmetric(plant.state_dim(), d.initial_bound),
        seed: d.seed,
    };
    let data = collect(&plant, None, &ex, d.tau, d.samples, DerivativeMode::Exact).unwrap();
    (plant, data, cfg)
}

fn closeness_arithmetic() -> Verdict {
    let round = |x: f64| (x * BOUND_DECIMALS).round() / BOUND_DECIMALS;
    let motor = round(closeness_bound(0.0, 5.1859e-4, 2.0, 7.5529e-5, 10.0, 0.0));
    let spacecraft = round(closeness_bound(0.0, 9.0420e-9, 4.0, 2.1718e-9, 6.0, 0.0));
    Verdict {
        name: "closeness-bound arithmetic",
        passed: motor == 0.7282 && spacecraft == 0.3603,
        detail: format!("motor {motor:.4}, spacecraft {spacecraft:.4}"),
    }
}

struct Solved {
    name: &'static str,
    plant: LtiPlant,
    data: DataSet,
    cert: Certificate,
    seconds: f64,
}

fn solve_all() -> Vec<Solved> {
    BENCHMARKS
        .iter()
        .map(|&name| {
            let start = Instant::now();
            let (plant, data, cfg) = collect_for(name);
            let cert = certificate::solve_feasibility(&data, cfg.reduction.kappa_hat, PD_MARGIN)
                .unwrap_or_else(|e| panic!("{name}: {e}"));
            Solved {
                name,
                plant,
                data,
                cert,
                seconds: start.elapsed().as_secs_f64(),
            }
        })
        .collect()
}

fn recovery(solved: &[Solved]) -> Verdict {
    let mut worst = (0.0f64, 0.0f64, 0.0f64);
    let mut failures = Vec::new();
    for s in solved {
        let rep = rom::build_data_representation(&s.data, &s.cert).unwrap();
        let ea = (&rep.a_data - s.plant.a()).norm();
        let eb = (&rep.b_data - s.plant.b()).norm();
        let ec = certificate::closed_loop_reconstruction_check(&s.plant, &s.data, &s.cert);
        worst = (worst.0.max(ea), worst.1.max(eb), worst.2.max(ec));
        if !(ea < RECOVERY_A_TOL && eb < RECOVERY_B_TOL && ec < CLOSED_LOOP_TOL) {
            failures.push(s.name);
        }
    }
    let seconds: f64 = solved.iter().map(|s| s.seconds).sum();
    Verdict {
        name: "data-based recovery oracle",
        passed: failures.is_empty() && seconds < RECOVERY_SECONDS,
        detail: format!(
            "max |A_data - A| {:.2e}, |B_data - B| {:.2e}, |X1*Q - (A+BF)| {:.2e}; {seconds:.2} s; failing: {failures:?}",
            worst.0, worst.1, worst.2
        ),
    }
}

fn certificate_suite(solved: &[Solved]) -> Verdict {
    let mut lines = Vec::new();
    let mut passed = true;
    for s in solved {
        let report = certificate::verify_certificate(&s.data, &s.cert).unwrap();
        let value = |name: &str| report.get(name).unwrap().value;
        let sym = value(CHECK_SYMMETRY);
        let pd = value(CHECK_PD);
        let lmi = value(CHECK_LMI);
        let abscissa = linalg::spectral_abscissa(&(&s.data.x1 * &s.cert.q));
        let ok = sym < SYMMETRY_TOL
            && pd > 0.0
            && lmi < LMI_TOL
            && abscissa <= -s.cert.kappa_hat / 2.0 + SPECTRUM_TOL
            && s.seconds < CERTIFICATE_SECONDS;
        passed &= ok;
        lines.push(format!(
            "{} {}: sym {sym:.1e}, lmin {pd:.1e}, lmax {lmi:.1e}, max Re eig {abscissa:.3e} vs {:.3e}, {:.2} s",
            s.name,
            if ok { "ok" } else { "FAIL" },
            -s.cert.kappa_hat / 2.0,
            s.seconds
        ));
    }
    Verdict {
        name: "certificate residual suite",
        passed,
        detail: lines.join("; "),
    }
}

fn published_reduction_check() -> Verdict {
    let plant = benchmark("motor").unwrap().plant;
    let rep = DataRepresentation {
        a_data: plant.a().clone(),
        b_data: plant.b().clone(),
    };
    let theta = DMatrix::from_column_slice(5, 1, &[0.2490, 0.2490, 0.0804, -0.1039, 0.0255]);
    let xi = DMatrix::from_column_slice(2, 1, &[2.2615, -2.0573]);
    let a_hat = DMatrix::from_element(1, 1, -1.0);
    let r = rom::reduction_residual(&rep, &a_hat, &theta, &xi);
    Verdict {
        name: "reduction-equation check on published motor values",
        passed: r < PUBLISHED_REDUCTION_TOL,
        detail: format!("|A*Theta - Theta*A_hat + B*Xi|_F = {r:.5e} (tolerance {PUBLISHED_REDUCTION_TOL:e})"),
    }
}

fn built(name: &str, runs: usize) -> Outcome {
    let mut cfg = scenario(name);
    cfg.run.runs = runs;
    cfg.run.sf_samples = SF_SAMPLES;
    run_scenario(&cfg, None).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn sf_suite(outcomes: &[(&str, Outcome)]) -> Verdict {
    let mut lines = Vec::new();
    let mut passed = true;
    for (name, out) in outcomes {
        let cfg = scenario(name);
        let res = cfg.resolve().unwrap();
        let boxes = SamplingBoxes {
            state: AaBox::symmetric(res.plant.state_dim(), cfg.run.sf_state_bound),
            rom_state: AaBox::symmetric(out.rom.reduced_dim(), cfg.run.sf_state_bound),
            rom_input: res.rom_input_box.clone(),
        };
        let start = Instant::now();
        let r = sf::sample_sf_conditions(&res.plant, &out.certificate, &out.rom, &out.constants, &boxes, SF_SAMPLES, cfg.run.seed)
            .unwrap();
        let seconds = start.elapsed().as_secs_f64();
        let ok = r.samples == SF_SAMPLES
            && r.max_violation_lower <= SF_SLACK
            && r.max_violation_decay <= SF_SLACK
            && seconds < SF_SECONDS;
        passed &= ok;
        lines.push(format!(
            "{name}: {} lower / {} decay violations in {} samples, {seconds:.2} s",
            r.violations_lower, r.violations_decay, r.samples
        ));
    }
    Verdict {
        name: "simulation-function conditions on random samples",
        passed,
        detail: lines.join("; "),
    }
}

fn bound_dominance(outcomes: &[(&str, Outcome)]) -> Verdict {
    let mut lines = Vec::new();
    let mut passed = true;
    for (name, out) in outcomes {
        let cfg = scenario(name);
        let grid_ok = cfg.run.horizon >= DOMINANCE_HORIZON && cfg.run.tau <= DOMINANCE_TAU;
        let worst = out
            .runs
            .iter()
            .map(|r| r.max_error - r.bound_limit)
            .fold(f64::NEG_INFINITY, f64::max);
        let ok = grid_ok && out.runs.len() >= DOMINANCE_RUNS && worst <= DOMINANCE_SLACK;
        passed &= ok;
        lines.push(format!(
            "{name}: {} runs, max error {:.3e}, bound {:.3e}",
            out.runs.len(),
            out.max_error(),
            out.bound()
        ));
    }
    Verdict {
        name: "bound dominance over co-simulations",
        passed,
        detail: lines.join("; "),
    }
}

fn spec_runs(timed: &[(&str, Outcome)]) -> Verdict {
    let mut lines = Vec::new();
    let mut passed = true;
    for (name, required) in SPEC_RUNS {
        let out = &timed.iter().find(|(n, _)| *n == name).unwrap().1;
        let judged: Vec<bool> = out.runs.iter().take(required).filter_map(|r| r.spec_met).collect();
        let met = judged.iter().filter(|ok| **ok).count();
        let ok = judged.len() == required && met == required;
        passed &= ok;
        lines.push(format!("{name}: {met}/{required}"));
    }
    Verdict {
        name: "specification runs",
        passed,
        detail: lines.join("; "),
    }
}

fn verification_mode() -> Verdict {
    let cfg = scenario("verification");
    let res = cfg.resolve().unwrap();
    let d = &cfg.data;
    let data = collect_autonomous(
        &res.plant,
        None,
        &AaBox::symmetric(res.plant.state_dim(), d.initial_bound),
        d.seed,
        d.tau,
        d.samples,
        DerivativeMode::Exact,
    )
    .unwrap();
    let auto = sf::verify_autonomous(&data, cfg.reduction.kappa_hat, res.epsilon, cfg.reduction.n_hat, PD_MARGIN).unwrap();
    let a_data = &data.xbar1 * &auto.cert.qbar;
    let residual = (&a_data * &auto.theta - &auto.theta * &auto.a_hat).norm();
    let out = run_scenario(&cfg, None).unwrap();
    let worst = out.runs.iter().map(|r| r.worst_excess).fold(f64::NEG_INFINITY, f64::max);
    Verdict {
        name: "verification mode",
        passed: residual < VERIFICATION_TOL && !out.runs.is_empty() && worst <= DOMINANCE_SLACK,
        detail: format!("residual {residual:.2e}, {} runs, worst excess over bound {worst:.3e}", out.runs.len()),
    }
}

fn runtimes(timed: &[(&str, Outcome)]) -> Verdict {
    let mut lines = Vec::new();
    let mut passed = true;
    for (name, out) in timed {
        let limit = RUNTIME_SLACK * benchmark(name).unwrap().row.runtime_s;
        let ok = out.total_seconds <= limit;
        passed &= ok;
        lines.push(format!("{name}: {:.2} s (lmi {:.2} s) <= {limit:.1} s", out.total_seconds, out.lmi_seconds));
    }
    Verdict {
        name: "order-of-magnitude runtime",
        passed,
        detail: lines.join("; "),
    }
}

fn main() -> ExitCode {
    let mut verdicts = vec![closeness_arithmetic()];
    let solved = solve_all();
    verdicts.push(recovery(&solved));
    verdicts.push(certificate_suite(&solved));
    verdicts.push(published_reduction_check());

    let dominance: Vec<(&str, Outcome)> = BENCHMARKS.iter().map(|&n| (n, built(n, DOMINANCE_RUNS))).collect();
    verdicts.push(sf_suite(&dominance));
    verdicts.push(bound_dominance(&dominance));

    let timed: Vec<(&str, Outcome)> = BENCHMARKS
        .iter()
        .map(|&n| (n, run_scenario(&scenario(n), None).unwrap_or_else(|e| panic!("{n}: {e}"))))
        .collect();
    verdicts.push(spec_runs(&timed));
    verdicts.push(verification_mode());
    verdicts.push(runtimes(&timed));

    for v in &verdicts {
        println!("[{}] {}: {}", if v.passed { "PASS" } else { "FAIL" }, v.name, v.detail);
    }
    let failed = verdicts.iter().filter(|v| !v.passed).count();
    println!("acceptance: {} passed, {failed} failed", verdicts.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
