use crate::error::{FloquetError, Result};
use crate::propagation::TRACE_DRIFT_TOL;
use crate::superop::{hermitize, DensityMatrix, PSD_TOL};

use super::FloquetGenerator;

/// States `exp(𝓛_F kT)(ρ0)` for k = 0..=n.
///
/// Truncated generators may drift in trace or leave the positive cone; that
/// is reported through the warning flags rather than corrected.
#[derive(Debug, Clone)]
pub struct StroboscopicTrajectory {
    pub states: Vec<DensityMatrix>,
    pub max_trace_drift: f64,
    pub trace_warning: bool,
    pub positivity_warning: bool,
}

pub fn stroboscopic_evolve(
    gen: &FloquetGenerator,
    rho0: &DensityMatrix,
    n_periods: usize,
) -> Result<StroboscopicTrajectory> {
    if rho0.dim() != gen.dim() {
        return Err(FloquetError::Dimension(format!(
            "state dimension {} does not match generator dimension {}",
            rho0.dim(),
            gen.dim()
        )));
    }
    rho0.validate()?;
    let step = gen.one_period_map();
    let mut states = Vec::with_capacity(n_periods + 1);
    states.push(rho0.clone());
    let mut max_trace_drift: f64 = 0.0;
    let mut positivity_warning = false;
    let mut current = rho0.data().clone();
    for _ in 0..n_periods {
        current = hermitize(&step.apply(&current));
        max_trace_drift = max_trace_drift.max((current.trace().re - 1.0).abs());
        let state = DensityMatrix::unchecked(current.clone())?;
        if state.lowest_eigenvalue() < -PSD_TOL {
            positivity_warning = true;
        }
        states.push(state);
    }
    let trace_warning = max_trace_drift > TRACE_DRIFT_TOL;
    if trace_warning || positivity_warning {
        log::warn!(
            "{} stroboscopic evolution left the state space (trace drift {max_trace_drift:e}, positivity {})",
            gen.method,
            if positivity_warning { "violated" } else { "ok" }
        );
    }
    Ok(StroboscopicTrajectory {
        states,
        max_trace_drift,
        trace_warning,
        positivity_warning,
    })
}
