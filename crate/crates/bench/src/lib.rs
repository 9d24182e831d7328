//! Fixtures shared by the criterion benches.

use ghostvar_core::predictors::fit_linear;
use ghostvar_core::synthetic::generate;
use ghostvar_core::{LinearModel, Scenario, ScenarioSpec, SplitSample};

/// A synthetic design with a linear fit on its training part.
pub struct Fixture {
    pub split: SplitSample,
    pub model: LinearModel,
}

pub fn fixture(scenario: Scenario, seed: u64) -> Fixture {
    let split = generate(&ScenarioSpec::new(scenario, seed)).expect("scenario generates").split;
    let model = fit_linear(&split.train).expect("linear fit");
    Fixture { split, model }
}
