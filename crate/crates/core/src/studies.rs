//! Error, scaling and convergence studies built from the core operations.

use crate::error::{FloquetError, Result};
use crate::floquet::{
    floquet_generator_exact, lindbladian_fourier_auto, magnus_terms_fixed, micromotion_fourier,
    micromotion_ode, steady_state_block, stroboscopic_evolve, FloquetGenerator,
};
use crate::linalg::max_norm;
use crate::propagation::{evolve_state, monodromy, PeriodicLindbladian};
use crate::superop::{hermitize, trace_norm_distance, DensityMatrix, Superoperator};

/// Harmonics searched when expanding 𝓛 automatically.
const MAX_LINDBLADIAN_HARMONICS: usize = 16;

/// Trace distance between exact and `gen`-driven states at t = kT,
/// k = 0..=n_periods. The first entry is always zero.
pub fn stroboscopic_deviation(
    l: &PeriodicLindbladian,
    gen: &FloquetGenerator,
    rho0: &DensityMatrix,
    n_periods: usize,
) -> Result<Vec<f64>> {
    let grid: Vec<f64> = (0..=n_periods).map(|k| gen.t0 + k as f64 * l.period()).collect();
    let exact = if gen.t0 == 0.0 {
        evolve_state(l, rho0, &grid)?
    } else {
        evolve_state(&l.shifted(gen.t0), rho0, &grid.iter().map(|t| t - gen.t0).collect::<Vec<_>>())?
    };
    let approx = stroboscopic_evolve(gen, rho0, n_periods)?;
    Ok(exact
        .iter()
        .zip(&approx.states)
        .map(|(a, b)| trace_norm_distance(a.data(), b.data()))
        .collect())
}

pub fn max_stroboscopic_deviation(
    l: &PeriodicLindbladian,
    gen: &FloquetGenerator,
    rho0: &DensityMatrix,
    n_periods: usize,
) -> Result<f64> {
    Ok(stroboscopic_deviation(l, gen, rho0, n_periods)?
        .into_iter()
        .fold(0.0, f64::max))
}

/// Micromotion amplitude in the long-time regime: after `burn_in` periods,
/// the largest trace distance over one period between the exact state and
/// the smooth stroboscopic flow `exp(𝓛_F t)` started from the same state.
pub fn micromotion_amplitude(
    l: &PeriodicLindbladian,
    rho0: &DensityMatrix,
    burn_in: usize,
    samples: usize,
) -> Result<f64> {
    if samples == 0 {
        return Err(FloquetError::InvalidInput("need at least one sample per period".into()));
    }
    let gen = floquet_generator_exact(l, 0.0)?;
    let step = monodromy(l, 0.0)?.map;
    let mut rho = rho0.data().clone();
    for _ in 0..burn_in {
        rho = hermitize(&step.apply(&rho));
        rho /= rho.trace();
    }
    let start = DensityMatrix::unchecked(rho)?;
    let grid: Vec<f64> = (0..=samples).map(|k| l.period() * k as f64 / samples as f64).collect();
    let exact = evolve_state(l, &start, &grid)?;
    let mut amplitude: f64 = 0.0;
    for (t, state) in grid.iter().zip(&exact) {
        let smooth = gen.generator.exp(*t).apply(start.data());
        amplitude = amplitude.max(trace_norm_distance(state.data(), &smooth));
    }
    Ok(amplitude)
}

/// Least-squares line through `(x, y)` with the standard error of the slope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    let n = x.len();
    if n != y.len() || n < 2 {
        return Err(FloquetError::InvalidInput(format!(
            "linear fit needs ≥ 2 matching points, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(FloquetError::InvalidInput("linear fit needs distinct abscissae".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let slope_stderr = if n > 2 {
        let ssr: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
        (ssr / (nf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok(LinearFit {
        slope,
        intercept,
        slope_stderr,
    })
}

#[derive(Debug, Clone)]
pub struct ScalingPoint {
    pub omega: f64,
    pub amplitude: Result<f64>,
}

#[derive(Debug, Clone)]
pub struct ScalingTable {
    pub points: Vec<ScalingPoint>,
    /// log-log fit over the points with positive amplitude; `None` when the
    /// amplitudes vanish (no micromotion to fit).
    pub fit: Option<LinearFit>,
}

/// Micromotion amplitude against drive frequency. `build` constructs the
/// Lindbladian for a given ω. At least three frequencies must succeed.
pub fn scaling_study<F>(
    build: F,
    rho0: &DensityMatrix,
    omegas: &[f64],
    burn_in: impl Fn(f64) -> usize,
    samples: usize,
) -> Result<ScalingTable>
where
    F: Fn(f64) -> Result<PeriodicLindbladian>,
{
    if omegas.len() < 3 {
        return Err(FloquetError::InvalidInput(format!(
            "scaling study needs ≥ 3 frequencies, got {}",
            omegas.len()
        )));
    }
    let points: Vec<ScalingPoint> = omegas
        .iter()
        .map(|&omega| ScalingPoint {
            omega,
            amplitude: build(omega).and_then(|l| micromotion_amplitude(&l, rho0, burn_in(omega), samples)),
        })
        .collect();
    let valid: Vec<(f64, f64)> = points
        .iter()
        .filter_map(|p| p.amplitude.as_ref().ok().map(|a| (p.omega, *a)))
        .collect();
    if valid.len() < 3 {
        return Err(FloquetError::InvalidInput(format!(
            "only {} of {} frequencies produced an amplitude",
            valid.len(),
            omegas.len()
        )));
    }
    let positive: Vec<(f64, f64)> = valid.iter().copied().filter(|(_, a)| *a > 1e-14).collect();
    let fit = if positive.len() >= 3 {
        let x: Vec<f64> = positive.iter().map(|(w, _)| w.ln()).collect();
        let y: Vec<f64> = positive.iter().map(|(_, a)| a.ln()).collect();
        Some(linear_fit(&x, &y)?)
    } else {
        None
    };
    Ok(ScalingTable { points, fit })
}

/// One row of a truncation or quadrature convergence table.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub level: usize,
    pub residual: f64,
    /// Max-norm change against the previous level (NaN on the first row).
    pub difference: f64,
    pub insufficient_truncation: bool,
}

/// Steady-state block residual against harmonic cutoff M.
pub fn steady_state_convergence(l: &PeriodicLindbladian, levels: &[usize]) -> Result<Vec<ConvergenceRow>> {
    check_ascending(levels)?;
    let series = lindbladian_fourier_auto(l, MAX_LINDBLADIAN_HARMONICS)?;
    let content = series.harmonic_content(1e-12);
    let mut rows = Vec::with_capacity(levels.len());
    let mut previous: Option<crate::linalg::CMatrix> = None;
    for &m in levels {
        let solution = steady_state_block(&series, m)?;
        let rho0 = solution.coefficient(0).cloned().unwrap_or_default();
        let difference = previous.as_ref().map_or(f64::NAN, |p| max_norm(&(p - &rho0)));
        previous = Some(rho0);
        rows.push(ConvergenceRow {
            level: m,
            residual: solution.residual,
            difference,
            insufficient_truncation: m < content,
        });
    }
    Ok(rows)
}

/// Harmonic-balance micromotion against the propagator-based 𝓚(t) on
/// `samples` times in one period, per harmonic cutoff M. The residual
/// column holds the max-norm Fourier-vs-ODE deviation.
pub fn micromotion_convergence(
    l: &PeriodicLindbladian,
    gen: &FloquetGenerator,
    levels: &[usize],
    samples: usize,
) -> Result<Vec<ConvergenceRow>> {
    check_ascending(levels)?;
    let series = lindbladian_fourier_auto(l, MAX_LINDBLADIAN_HARMONICS)?;
    let content = series.harmonic_content(1e-12);
    let grid: Vec<f64> = (0..samples).map(|k| l.period() * k as f64 / samples as f64).collect();
    let reference = micromotion_ode(l, gen, &grid)?;
    let mut rows = Vec::with_capacity(levels.len());
    let mut previous: Option<f64> = None;
    for &m in levels {
        let fourier = micromotion_fourier(&series, gen, m)?;
        let deviation = grid
            .iter()
            .zip(&reference)
            .map(|(t, k)| fourier.evaluate(*t).max_abs_diff(k))
            .fold(0.0, f64::max);
        rows.push(ConvergenceRow {
            level: m,
            residual: deviation,
            difference: previous.map_or(f64::NAN, |p| (p - deviation).abs()),
            insufficient_truncation: m < content,
        });
        previous = Some(deviation);
    }
    Ok(rows)
}

/// Fixed-node Magnus generator of the given order per node count. The
/// residual column is `‖exp(𝓛_F T) − monodromy‖`, which unlike a direct
/// comparison with the principal log does not depend on branch choice.
pub fn magnus_convergence(
    l: &PeriodicLindbladian,
    order: u8,
    levels: &[usize],
) -> Result<Vec<ConvergenceRow>> {
    check_ascending(levels)?;
    let target = monodromy(l, 0.0)?.map;
    let mut rows = Vec::with_capacity(levels.len());
    let mut previous: Option<Superoperator> = None;
    for &nodes in levels {
        let terms = magnus_terms_fixed(l, 0.0, order, nodes)?;
        let total = terms
            .iter()
            .skip(1)
            .fold(terms[0].clone(), |acc, term| &acc + term);
        rows.push(ConvergenceRow {
            level: nodes,
            residual: total.exp(l.period()).max_abs_diff(&target),
            difference: previous.as_ref().map_or(f64::NAN, |p| p.max_abs_diff(&total)),
            insufficient_truncation: false,
        });
        previous = Some(total);
    }
    Ok(rows)
}

fn check_ascending(levels: &[usize]) -> Result<()> {
    if levels.is_empty() || levels.windows(2).any(|w| w[1] <= w[0]) {
        return Err(FloquetError::InvalidInput(
            "convergence levels must be non-empty and strictly ascending".into(),
        ));
    }
    Ok(())
}
