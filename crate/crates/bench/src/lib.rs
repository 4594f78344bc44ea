//! Shared fixtures for the criterion benchmarks in `benches/`.

use ddehopf::{BuiltinModel, ExpansionOptions, ExpansionResult, Z0Scale};

/// The shipped models with the delays at which orbits are benchmarked.
pub fn cases() -> [(BuiltinModel, f64); 2] {
    [
        (BuiltinModel::by_name("ndde").expect("built-in model"), 1.4),
        (BuiltinModel::by_name("sir").expect("built-in model"), 120.0),
    ]
}

pub fn expansion(model: &BuiltinModel, order: usize) -> ExpansionResult {
    let options = ExpansionOptions { z0_scale: Z0Scale::TwoPi, ..Default::default() };
    ddehopf::expand_with(model, order, &options).expect("built-in models expand")
}
