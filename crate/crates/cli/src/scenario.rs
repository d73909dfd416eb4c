//! Exact-versus-approximate trajectory comparison for one scenario.

use std::collections::BTreeMap;
use std::time::Instant;

use floquet_core::floquet::{
    default_truncation, floquet_generator_exact_with, lindbladian_fourier_auto, magnus_generator_at,
    micromotion_fourier, stroboscopic_evolve,
};
use floquet_core::linalg::CMatrix;
use floquet_core::propagation::evolve_state_with;
use floquet_core::superop::{hermitize, pauli, root_fidelity, trace_norm_distance};
use floquet_core::{AdaptiveOptions, DensityMatrix, FloquetError, FloquetGenerator, PeriodicLindbladian};
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{InitialState, Method, ScenarioConfig};
use crate::error::{CliError, Result};
use crate::model::ResolvedModel;

/// Highest Lindbladian harmonic searched when building Fourier series.
const MAX_HARMONICS: usize = 16;
/// Quadrature nodes per period for numerical Magnus generators.
const MAGNUS_NODES: usize = 16;
/// Micromotion residual above which a warning is attached.
const MICROMOTION_WARN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub tol: f64,
    pub seed: u64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            tol: floquet_core::propagation::DEFAULT_TOL,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sample {
    pub time: f64,
    pub sx: f64,
    pub sy: f64,
    pub sz: f64,
    pub trace_distance_vs_exact: f64,
    pub fidelity_vs_exact: f64,
    pub is_stroboscopic: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StroboscopicRow {
    pub period: usize,
    pub time: f64,
    pub trace_distance: f64,
    pub fidelity: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MethodSeries {
    pub method: Method,
    pub samples: Vec<Sample>,
    pub stroboscopic: Vec<StroboscopicRow>,
    pub residuals: BTreeMap<String, f64>,
    pub warnings: Vec<String>,
    pub wall_time_s: f64,
}

impl MethodSeries {
    pub fn max_stroboscopic_deviation(&self) -> f64 {
        self.stroboscopic.iter().map(|r| r.trace_distance).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MethodFailure {
    pub method: Method,
    pub error: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub name: String,
    pub period: f64,
    pub t0: f64,
    pub initial_bloch: [f64; 3],
    pub methods: Vec<MethodSeries>,
    pub failures: Vec<MethodFailure>,
}

/// Bloch components ⟨σ_x⟩, ⟨σ_y⟩, ⟨σ_z⟩ of a (possibly unnormalized) qubit matrix.
fn bloch(rho: &CMatrix) -> [f64; 3] {
    [pauli::sigma_x(), pauli::sigma_y(), pauli::sigma_z()].map(|s| (s * rho).trace().re)
}

pub fn initial_state(choice: &InitialState, seed: u64) -> Result<DensityMatrix> {
    let state = match choice {
        InitialState::Excited => DensityMatrix::excited(),
        InitialState::Ground => DensityMatrix::ground(),
        InitialState::Mixed => DensityMatrix::maximally_mixed(2),
        InitialState::Bloch(r) => DensityMatrix::from_bloch(*r).map_err(|e| CliError::Config(e.to_string()))?,
        InitialState::Random => {
            // Uniform in the Bloch ball.
            let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
            let radius = rng.random::<f64>().cbrt();
            let z: f64 = rng.random_range(-1.0..=1.0);
            let azimuth = rng.random_range(0.0..std::f64::consts::TAU);
            let s = (1.0 - z * z).sqrt();
            DensityMatrix::from_bloch([
                radius * s * azimuth.cos(),
                radius * s * azimuth.sin(),
                radius * z,
            ])
            .map_err(|e| CliError::Config(e.to_string()))?
        }
    };
    Ok(state)
}

struct Reference {
    times: Vec<f64>,
    states: Vec<CMatrix>,
    per_period: usize,
    n_periods: usize,
}

pub fn run_scenario(config: &ScenarioConfig, options: &RunOptions) -> Result<RunReport> {
    let model = ResolvedModel::from_config(config)?;
    let l = model
        .lindbladian()
        .map_err(|e| CliError::numerical("building the Lindbladian", e))?;
    let rho0 = initial_state(&config.initial_state, options.seed)?;
    let period = l.period();
    let per_period = config.time.points_per_period;
    let n_periods = config.time.n_periods;
    let steps = n_periods * per_period;
    let local: Vec<f64> = (0..=steps).map(|j| period * j as f64 / per_period as f64).collect();
    let opts = AdaptiveOptions::with_tol(options.tol);

    let started = Instant::now();
    let exact = evolve_state_with(&l.shifted(config.t0), &rho0, &local, &opts)
        .map_err(|e| CliError::numerical("exact propagation", e))?;
    let reference = Reference {
        times: local.iter().map(|t| config.t0 + t).collect(),
        states: exact.into_iter().map(DensityMatrix::into_inner).collect(),
        per_period,
        n_periods,
    };
    let exact_time = started.elapsed().as_secs_f64();
    log::info!("{}: exact reference in {exact_time:.3} s", config.name);

    let results: Vec<std::result::Result<MethodSeries, MethodFailure>> = config
        .methods
        .par_iter()
        .map(|&method| {
            let started = Instant::now();
            let outcome = if method == Method::Exact {
                Ok(exact_series(&reference))
            } else {
                approximate_series(method, &model, &l, config, &reference, &opts)
            };
            match outcome {
                Ok(mut series) => {
                    series.wall_time_s = started.elapsed().as_secs_f64()
                        + if method == Method::Exact { exact_time } else { 0.0 };
                    Ok(series)
                }
                Err(e) => {
                    log::error!("{}: {method} failed: {e}", config.name);
                    Err(MethodFailure {
                        method,
                        error: e.to_string(),
                    })
                }
            }
        })
        .collect();

    let mut methods = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(s) => methods.push(s),
            Err(f) => failures.push(f),
        }
    }
    Ok(RunReport {
        name: config.name.clone(),
        period,
        t0: config.t0,
        initial_bloch: rho0.bloch(),
        methods,
        failures,
    })
}

fn exact_series(reference: &Reference) -> MethodSeries {
    let samples = reference
        .times
        .iter()
        .zip(&reference.states)
        .enumerate()
        .map(|(j, (&time, rho))| {
            let [sx, sy, sz] = bloch(rho);
            Sample {
                time,
                sx,
                sy,
                sz,
                trace_distance_vs_exact: 0.0,
                fidelity_vs_exact: 1.0,
                is_stroboscopic: j % reference.per_period == 0,
            }
        })
        .collect();
    let stroboscopic = (0..=reference.n_periods)
        .map(|k| StroboscopicRow {
            period: k,
            time: reference.times[k * reference.per_period],
            trace_distance: 0.0,
            fidelity: 1.0,
        })
        .collect();
    MethodSeries {
        method: Method::Exact,
        samples,
        stroboscopic,
        residuals: BTreeMap::new(),
        warnings: Vec::new(),
        wall_time_s: 0.0,
    }
}

fn generator_for(
    method: Method,
    model: &ResolvedModel,
    l: &PeriodicLindbladian,
    t0: f64,
    opts: &AdaptiveOptions,
) -> floquet_core::Result<FloquetGenerator> {
    let analytic = |order: u8| {
        if t0 != 0.0 {
            return Err(FloquetError::InvalidInput(
                "closed-form generators are anchored at t0 = 0".into(),
            ));
        }
        model.analytic(order)
    };
    match method {
        Method::Exact => unreachable!("the exact method has no generator"),
        Method::ExactLog => floquet_generator_exact_with(l, t0, opts),
        Method::Magnus0 => magnus_generator_at(l, 0, MAGNUS_NODES, t0),
        Method::Magnus1 => magnus_generator_at(l, 1, MAGNUS_NODES, t0),
        Method::Magnus2 => magnus_generator_at(l, 2, MAGNUS_NODES, t0),
        Method::Analytic0 => analytic(0),
        Method::Analytic1 => analytic(1),
    }
}

fn approximate_series(
    method: Method,
    model: &ResolvedModel,
    l: &PeriodicLindbladian,
    config: &ScenarioConfig,
    reference: &Reference,
    opts: &AdaptiveOptions,
) -> floquet_core::Result<MethodSeries> {
    let gen = generator_for(method, model, l, config.t0, opts)?;
    let mut residuals = BTreeMap::new();
    let mut warnings = Vec::new();
    residuals.insert("generator".to_string(), gen.residual);

    let rho0 = DensityMatrix::unchecked(reference.states[0].clone())?;
    let strobe = stroboscopic_evolve(&gen, &rho0, reference.n_periods)?;
    residuals.insert("max_trace_drift".to_string(), strobe.max_trace_drift);
    if strobe.trace_warning {
        warnings.push(format!("trace drift {:e} over the run", strobe.max_trace_drift));
    }
    if strobe.positivity_warning {
        warnings.push("stroboscopic state left the positive cone".to_string());
    }

    let per_period = reference.per_period;
    // Intra-period states need the micromotion map; stroboscopic-only grids do not.
    let micromotion = if per_period > 1 && reference.n_periods > 0 {
        let series = lindbladian_fourier_auto(l, MAX_HARMONICS)?;
        let truncation = config.truncation.unwrap_or_else(|| default_truncation(&series));
        let k = micromotion_fourier(&series, &gen, truncation)?;
        residuals.insert("micromotion".to_string(), k.residual);
        // A truncated generator admits no exactly periodic 𝓚, so its balance
        // residual measures the truncation itself rather than a failure.
        if method == Method::ExactLog && k.residual > MICROMOTION_WARN {
            warnings.push(format!(
                "micromotion harmonic balance residual {:e} at M = {truncation}",
                k.residual
            ));
        }
        let h = l.period() / per_period as f64;
        let maps: Vec<_> = (1..per_period)
            .map(|r| {
                let t = h * r as f64;
                k.evaluate(t).compose(&gen.generator.exp(t))
            })
            .collect();
        Some(maps)
    } else {
        None
    };

    let mut samples = Vec::with_capacity(reference.times.len());
    let mut stroboscopic = Vec::with_capacity(reference.n_periods + 1);
    for (j, (&time, exact)) in reference.times.iter().zip(&reference.states).enumerate() {
        let (k, r) = (j / per_period, j % per_period);
        let approx = if r == 0 {
            strobe.states[k].data().clone()
        } else {
            let maps = micromotion.as_ref().expect("intra-period maps");
            hermitize(&maps[r - 1].apply(strobe.states[k].data()))
        };
        let [sx, sy, sz] = bloch(&approx);
        let trace_distance = trace_norm_distance(exact, &approx);
        let fidelity = root_fidelity(exact, &approx);
        if r == 0 {
            stroboscopic.push(StroboscopicRow {
                period: k,
                time,
                trace_distance,
                fidelity,
            });
        }
        samples.push(Sample {
            time,
            sx,
            sy,
            sz,
            trace_distance_vs_exact: trace_distance,
            fidelity_vs_exact: fidelity,
            is_stroboscopic: r == 0,
        });
    }
    Ok(MethodSeries {
        method,
        samples,
        stroboscopic,
        residuals,
        warnings,
        wall_time_s: 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(text: &str) -> ScenarioConfig {
        ScenarioConfig::from_toml(text).unwrap()
    }

    #[test]
    fn zero_periods_gives_initial_row() {
        let c = config("model = \"model1\"\nmethods = [\"exact\", \"magnus1\"]\n[time]\nn_periods = 0\n");
        let report = run_scenario(&c, &RunOptions::default()).unwrap();
        assert!(report.failures.is_empty());
        for m in &report.methods {
            assert_eq!(m.samples.len(), 1);
            assert_eq!(m.samples[0].sz, 1.0);
            assert_eq!(m.samples[0].trace_distance_vs_exact, 0.0);
        }
    }

    #[test]
    fn exact_log_tracks_exact_everywhere() {
        let c = config(
            "model = \"model1\"\nmethods = [\"exact-log\"]\n[params]\nomega = 6.0\n[time]\nn_periods = 3\npoints_per_period = 8\n",
        );
        let report = run_scenario(&c, &RunOptions::default()).unwrap();
        let series = &report.methods[0];
        assert_eq!(series.samples.len(), 25);
        let worst = series
            .samples
            .iter()
            .map(|s| s.trace_distance_vs_exact)
            .fold(0.0, f64::max);
        assert!(worst < 1e-8, "{worst}");
    }

    #[test]
    fn analytic_requires_zero_anchor() {
        let c = config("model = \"model1\"\nt0 = 0.3\nmethods = [\"exact\", \"analytic1\"]\n[time]\nn_periods = 1\n");
        let report = run_scenario(&c, &RunOptions::default()).unwrap();
        assert_eq!(report.methods.len(), 1);
        assert_eq!(report.failures.len(), 1);
        assert_eq!(report.failures[0].method, Method::Analytic1);
    }

    #[test]
    fn random_state_is_seeded() {
        let a = initial_state(&InitialState::Random, 7).unwrap();
        let b = initial_state(&InitialState::Random, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.validate().is_ok());
    }
}
