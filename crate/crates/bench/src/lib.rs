//! Shared fixtures for the criterion benchmarks.

use std::path::Path;

use romcert::data::{collect, DataSet, DerivativeMode, Excitation};
use romcert::scenario::ScenarioConfig;
use romcert::systems::benchmark;
use romcert::{AaBox, LtiPlant};

/// A shipped scenario file by name.
pub fn scenario(name: &str) -> ScenarioConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(format!("{name}.toml"));
    ScenarioConfig::load(&path).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// Benchmark plant and exact-mode data collected as its scenario does.
pub fn collected(name: &str) -> (LtiPlant, DataSet, ScenarioConfig) {
    let cfg = scenario(name);
    let plant = benchmark(name).expect("known benchmark").plant;
    let d = &cfg.data;
    let ex = Excitation {
        input_box: AaBox::symmetric(plant.input_dim(), d.input_bound),
        initial_box: AaBox::symmetric(plant.state_dim(), d.initial_bound),
        seed: d.seed,
    };
    let data = collect(&plant, None, &ex, d.tau, d.samples, DerivativeMode::Exact).expect("collection succeeds");
    (plant, data, cfg)
}
