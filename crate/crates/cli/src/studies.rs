//! Scaling and convergence tables for the command line.

use floquet_core::floquet::floquet_generator_exact;
use floquet_core::studies::{
    magnus_convergence, micromotion_convergence, scaling_study, steady_state_convergence, ConvergenceRow,
    ScalingTable,
};
use floquet_core::{DensityMatrix, FloquetError};
use serde_json::json;

use crate::config::ModelKind;
use crate::error::{CliError, Result};
use crate::model::ResolvedModel;
use crate::output::fmt_float;

/// Exact-propagation time, in units of 1/γ, spent reaching the periodic regime.
const BURN_IN_DECAY_TIMES: f64 = 60.0;

#[derive(Debug, Clone)]
pub struct ScalingRequest {
    pub model: ModelKind,
    pub params: toml::Table,
    pub omegas: Vec<f64>,
    /// Periods to discard; defaults to 60/γ worth of periods.
    pub burn_in: Option<usize>,
    pub samples: usize,
}

fn model_at(kind: ModelKind, params: &toml::Table, omega: f64) -> Result<ResolvedModel> {
    let mut params = params.clone();
    params.insert("omega".into(), toml::Value::Float(omega));
    ResolvedModel::builtin(kind, &params)
}

pub fn run_scaling(request: &ScalingRequest, rho0: &DensityMatrix) -> Result<ScalingTable> {
    // Parameter problems are configuration errors, reported before any propagation.
    for &omega in &request.omegas {
        model_at(request.model, &request.params, omega)?;
    }
    let build = |omega: f64| {
        model_at(request.model, &request.params, omega)
            .map_err(|e| FloquetError::InvalidInput(e.to_string()))?
            .lindbladian()
    };
    let burn_in = |omega: f64| {
        request.burn_in.unwrap_or_else(|| {
            let model = model_at(request.model, &request.params, omega).expect("validated parameters");
            let period = model.lindbladian().map(|l| l.period()).unwrap_or(f64::NAN);
            match model.gamma() {
                Some(g) if g > 0.0 && period.is_finite() => (BURN_IN_DECAY_TIMES / g / period).ceil() as usize,
                _ => 0,
            }
        })
    };
    scaling_study(build, rho0, &request.omegas, burn_in, request.samples)
        .map_err(|e| CliError::numerical("scaling study", e))
}

pub const SCALING_HEADER: [&str; 3] = ["omega", "amplitude", "error"];

pub fn scaling_rows(table: &ScalingTable) -> Vec<Vec<String>> {
    table
        .points
        .iter()
        .map(|p| match &p.amplitude {
            Ok(a) => vec![fmt_float(p.omega), fmt_float(*a), String::new()],
            Err(e) => vec![fmt_float(p.omega), String::new(), e.to_string()],
        })
        .collect()
}

pub fn scaling_json(table: &ScalingTable) -> serde_json::Value {
    let points: Vec<_> = table
        .points
        .iter()
        .map(|p| match &p.amplitude {
            Ok(a) => json!({ "omega": p.omega, "amplitude": a }),
            Err(e) => json!({ "omega": p.omega, "error": e.to_string() }),
        })
        .collect();
    let fit = table.fit.map(|f| {
        json!({ "slope": f.slope, "intercept": f.intercept, "slope_stderr": f.slope_stderr })
    });
    json!({ "version": env!("CARGO_PKG_VERSION"), "points": points, "fit": fit })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ConvergenceKind {
    /// Steady-state block residual against harmonic cutoff M.
    Steady,
    /// Harmonic-balance micromotion against the propagator, per M.
    Micromotion,
    /// Fixed-node Magnus generator against the exact log, per node count.
    Magnus,
}

pub fn run_convergence(
    model: &ResolvedModel,
    kind: ConvergenceKind,
    levels: &[usize],
    order: u8,
    samples: usize,
) -> Result<Vec<ConvergenceRow>> {
    let l = model
        .lindbladian()
        .map_err(|e| CliError::numerical("building the Lindbladian", e))?;
    let rows = match kind {
        ConvergenceKind::Steady => steady_state_convergence(&l, levels),
        ConvergenceKind::Micromotion => {
            floquet_generator_exact(&l, 0.0).and_then(|gen| micromotion_convergence(&l, &gen, levels, samples))
        }
        ConvergenceKind::Magnus => magnus_convergence(&l, order, levels),
    };
    rows.map_err(|e| CliError::numerical("convergence study", e))
}

pub const CONVERGENCE_HEADER: [&str; 4] = ["level", "residual", "difference", "insufficient_truncation"];

pub fn convergence_rows(rows: &[ConvergenceRow]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|r| {
            vec![
                r.level.to_string(),
                fmt_float(r.residual),
                if r.difference.is_nan() { String::new() } else { fmt_float(r.difference) },
                u8::from(r.insufficient_truncation).to_string(),
            ]
        })
        .collect()
}

pub fn convergence_json(rows: &[ConvergenceRow]) -> serde_json::Value {
    let rows: Vec<_> = rows
        .iter()
        .map(|r| {
            json!({
                "level": r.level,
                "residual": r.residual,
                "difference": if r.difference.is_nan() { None } else { Some(r.difference) },
                "insufficient_truncation": r.insufficient_truncation,
            })
        })
        .collect();
    json!({ "version": env!("CARGO_PKG_VERSION"), "rows": rows })
}
