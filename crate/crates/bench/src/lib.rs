//! Shared inputs for the criterion benchmarks in `benches/`.

use floquet_core::models::{model1_lindbladian, model2_lindbladian, Model1Params, Model2Params};
use floquet_core::PeriodicLindbladian;

/// Model 1 at the default parameters and drive frequency `omega`.
pub fn model1(omega: f64) -> PeriodicLindbladian {
    model1_lindbladian(&Model1Params {
        omega,
        ..Model1Params::default()
    })
    .expect("valid model 1 parameters")
}

/// Model 2 at the default parameters.
pub fn model2() -> PeriodicLindbladian {
    model2_lindbladian(&Model2Params::default()).expect("valid model 2 parameters")
}
