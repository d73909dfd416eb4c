//! Time-ordered propagation of a periodic Lindblad generator.
//!
//! The propagator 𝓥(t₂, t₁) is built as an ordered product of exact
//! exponentials of frozen generators. Two product rules are available:
//!
//! * [`Scheme::Midpoint`]: `∏ exp(𝓛(tᵢ + δt/2) δt)`, second order. The
//!   product is often written with left-endpoint samples; both converge to
//!   the same 𝓥, the midpoint rule just does it at order two.
//! * [`Scheme::Magnus4`]: two Gauss points per step and one commutator,
//!   fourth order. Each factor is still the exponential of a
//!   trace-annihilating generator, so trace preservation holds per step.
//!
//! The adaptive wrapper doubles the step count until two successive
//! propagators agree in max norm.

use std::fmt;
use std::sync::Arc;

use crate::error::{FloquetError, Result};
use crate::linalg::{c, commutator, expm, max_norm, CMatrix};
use crate::superop::{hermitize, DensityMatrix, Superoperator, PSD_TOL};

pub type GeneratorFn = dyn Fn(f64) -> Superoperator + Send + Sync;

/// Periodicity samples are checked to this absolute tolerance (scaled by
/// the generator norm when it exceeds one).
pub const PERIODICITY_TOL: f64 = 1e-12;
pub const DEFAULT_TOL: f64 = 1e-10;
pub const MAX_STEPS: usize = 1 << 20;
/// Trace drift beyond this fails a trajectory.
pub const TRACE_DRIFT_TOL: f64 = 1e-8;

/// A generator 𝓛(t) with 𝓛(t + T) = 𝓛(t).
#[derive(Clone)]
pub struct PeriodicLindbladian {
    generator: Arc<GeneratorFn>,
    period: f64,
    dim: usize,
    label: String,
}

impl fmt::Debug for PeriodicLindbladian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PeriodicLindbladian")
            .field("label", &self.label)
            .field("period", &self.period)
            .field("dim", &self.dim)
            .finish()
    }
}

impl PeriodicLindbladian {
    /// Wraps `generator` after checking periodicity and trace preservation
    /// on 16 sample times.
    pub fn new<F>(label: impl Into<String>, period: f64, dim: usize, generator: F) -> Result<Self>
    where
        F: Fn(f64) -> Superoperator + Send + Sync + 'static,
    {
        if !(period > 0.0 && period.is_finite()) {
            return Err(FloquetError::InvalidInput(format!(
                "period must be positive and finite, got {period}"
            )));
        }
        let lindbladian = Self {
            generator: Arc::new(generator),
            period,
            dim,
            label: label.into(),
        };
        lindbladian.check_samples()?;
        Ok(lindbladian)
    }

    /// A time-independent generator with a declared period.
    pub fn constant(label: impl Into<String>, generator: Superoperator, period: f64) -> Result<Self> {
        let dim = generator.dim();
        Self::new(label, period, dim, move |_| generator.clone())
    }

    fn check_samples(&self) -> Result<()> {
        let n = self.dim * self.dim;
        for k in 0..16 {
            let t = self.period * (0.173 + 0.931 * k as f64) / 7.0;
            let here = self.at(t);
            if here.data().nrows() != n || here.dim() != self.dim {
                return Err(FloquetError::Dimension(format!(
                    "generator at t = {t} is not a d = {} superoperator",
                    self.dim
                )));
            }
            let scale = here.max_abs().max(1.0);
            let later = self.at(t + self.period);
            let drift = here.max_abs_diff(&later);
            if drift > PERIODICITY_TOL * scale {
                return Err(FloquetError::InvalidInput(format!(
                    "generator '{}' is not {}-periodic: difference {drift:e} at t = {t}",
                    self.label, self.period
                )));
            }
            let defect = here.trace_defect();
            if defect > 1e-10 * scale {
                return Err(FloquetError::TracePreservation(defect));
            }
        }
        Ok(())
    }

    pub fn at(&self, t: f64) -> Superoperator {
        (self.generator)(t)
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// `2π / T`.
    pub fn base_frequency(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.period
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// The same generator with a different declared period (which must still
    /// be a period of the generator).
    pub fn with_period(&self, period: f64) -> Result<Self> {
        let generator = Arc::clone(&self.generator);
        Self::new(self.label.clone(), period, self.dim, move |t| generator(t))
    }

    /// The generator shifted in time, `t ↦ 𝓛(t + shift)`.
    pub fn shifted(&self, shift: f64) -> Self {
        let generator = Arc::clone(&self.generator);
        Self {
            generator: Arc::new(move |t| generator(t + shift)),
            period: self.period,
            dim: self.dim,
            label: self.label.clone(),
        }
    }
}

/// 𝓥(t_end, t_start).
#[derive(Debug, Clone, PartialEq)]
pub struct PropagatorMap {
    pub map: Superoperator,
    pub t_start: f64,
    pub t_end: f64,
}

impl PropagatorMap {
    pub fn apply(&self, rho: &DensityMatrix) -> CMatrix {
        self.map.apply_state(rho)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    Midpoint,
    #[default]
    Magnus4,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveOptions {
    pub tol: f64,
    /// Starting step count; 0 picks one from the period and generator norm.
    pub initial_steps: usize,
    pub max_steps: usize,
    pub scheme: Scheme,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            initial_steps: 0,
            max_steps: MAX_STEPS,
            scheme: Scheme::default(),
        }
    }
}

impl AdaptiveOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

/// Ordered exponential of `y' = A(t) y` over `[t1, t2]` in `steps` equal
/// steps. Works for Liouville-space generators and Hilbert-space `−iH(t)`.
pub(crate) fn ordered_exponential<F>(a: F, n: usize, t1: f64, t2: f64, steps: usize, scheme: Scheme) -> CMatrix
where
    F: Fn(f64) -> CMatrix,
{
    let mut v = CMatrix::identity(n, n);
    if t2 == t1 {
        return v;
    }
    let h = (t2 - t1) / steps as f64;
    const GAUSS_OFFSET: f64 = 0.288_675_134_594_812_9; // √3 / 6
    const COMMUTATOR_WEIGHT: f64 = 0.144_337_567_297_406_43; // √3 / 12
    for i in 0..steps {
        let start = t1 + i as f64 * h;
        let exponent = match scheme {
            Scheme::Midpoint => a(start + 0.5 * h) * c(h),
            Scheme::Magnus4 => {
                let a1 = a(start + (0.5 - GAUSS_OFFSET) * h);
                let a2 = a(start + (0.5 + GAUSS_OFFSET) * h);
                (&a1 + &a2) * c(0.5 * h) + commutator(&a2, &a1) * c(COMMUTATOR_WEIGHT * h * h)
            }
        };
        v = expm(&exponent) * v;
    }
    v
}

/// Adaptive step doubling around [`ordered_exponential`].
pub(crate) fn ordered_exponential_adaptive<F>(
    a: F,
    n: usize,
    t1: f64,
    t2: f64,
    natural_time: f64,
    opts: &AdaptiveOptions,
) -> Result<(CMatrix, usize)>
where
    F: Fn(f64) -> CMatrix,
{
    if t2 == t1 {
        return Ok((CMatrix::identity(n, n), 0));
    }
    let span = t2 - t1;
    let mut steps = if opts.initial_steps > 0 {
        opts.initial_steps
    } else {
        let norm = max_norm(&a(t1 + 0.5 * span)) * n as f64;
        let by_period = (8.0 * span / natural_time).ceil();
        let by_norm = (2.0 * norm * span).ceil();
        by_period.max(by_norm).max(1.0) as usize
    };
    let mut previous = ordered_exponential(&a, n, t1, t2, steps, opts.scheme);
    let mut difference = f64::INFINITY;
    loop {
        let next_steps = steps * 2;
        if next_steps > opts.max_steps {
            return Err(FloquetError::NonConvergence { steps, difference });
        }
        let current = ordered_exponential(&a, n, t1, t2, next_steps, opts.scheme);
        difference = max_norm(&(&current - &previous));
        steps = next_steps;
        if difference < opts.tol {
            return Ok((current, steps));
        }
        previous = current;
    }
}

fn check_span(t1: f64, t2: f64) -> Result<()> {
    if !(t2 >= t1) || !t1.is_finite() || !t2.is_finite() {
        return Err(FloquetError::InvalidInput(format!(
            "propagation requires finite t2 ≥ t1, got [{t1}, {t2}]"
        )));
    }
    Ok(())
}

/// Midpoint product `∏ᵢ exp(𝓛(t1 + (i + ½)δt) δt)` with `steps` factors.
pub fn propagate(l: &PeriodicLindbladian, t1: f64, t2: f64, steps: usize) -> Result<PropagatorMap> {
    propagate_with(l, t1, t2, steps, Scheme::Midpoint)
}

pub fn propagate_with(
    l: &PeriodicLindbladian,
    t1: f64,
    t2: f64,
    steps: usize,
    scheme: Scheme,
) -> Result<PropagatorMap> {
    check_span(t1, t2)?;
    if steps == 0 {
        return Err(FloquetError::InvalidInput("steps must be at least 1".into()));
    }
    let n = l.dim() * l.dim();
    let map = ordered_exponential(|t| l.at(t).data().clone(), n, t1, t2, steps, scheme);
    Ok(PropagatorMap {
        map: Superoperator::from_parts(map, l.dim()),
        t_start: t1,
        t_end: t2,
    })
}

/// Doubles the step count until successive propagators differ by less than
/// `opts.tol` in max norm.
pub fn propagate_adaptive(
    l: &PeriodicLindbladian,
    t1: f64,
    t2: f64,
    opts: &AdaptiveOptions,
) -> Result<PropagatorMap> {
    check_span(t1, t2)?;
    let n = l.dim() * l.dim();
    let (map, steps) =
        ordered_exponential_adaptive(|t| l.at(t).data().clone(), n, t1, t2, l.period(), opts)?;
    log::trace!("propagated '{}' over [{t1}, {t2}] with {steps} steps", l.label());
    Ok(PropagatorMap {
        map: Superoperator::from_parts(map, l.dim()),
        t_start: t1,
        t_end: t2,
    })
}

/// One-period map 𝓥(t0 + T, t0).
pub fn monodromy(l: &PeriodicLindbladian, t0: f64) -> Result<PropagatorMap> {
    monodromy_with(l, t0, &AdaptiveOptions::default())
}

pub fn monodromy_with(l: &PeriodicLindbladian, t0: f64, opts: &AdaptiveOptions) -> Result<PropagatorMap> {
    propagate_adaptive(l, t0, t0 + l.period(), opts)
}

/// Re-Hermitizes an evolved matrix and checks trace drift and positivity.
pub(crate) fn finalize_state(m: &CMatrix) -> Result<DensityMatrix> {
    let h = hermitize(m);
    let drift = (h.trace().re - 1.0).abs();
    if drift > TRACE_DRIFT_TOL {
        return Err(FloquetError::AccuracyLoss { drift });
    }
    let state = DensityMatrix::unchecked(h)?;
    let lowest = state.lowest_eigenvalue();
    if lowest < -PSD_TOL {
        return Err(FloquetError::AccuracyLoss { drift: -lowest });
    }
    Ok(state)
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(FloquetError::InvalidInput("time grid is empty".into()));
    }
    if !(t_grid[0] >= 0.0) {
        return Err(FloquetError::InvalidInput(
            "time grid must start at or after the anchor time 0".into(),
        ));
    }
    if t_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(FloquetError::InvalidInput(
            "time grid must be strictly ascending".into(),
        ));
    }
    Ok(())
}

/// If the grid is uniform with spacing commensurate with the period, the
/// number of grid intervals per period.
fn commensurate_intervals(t_grid: &[f64], period: f64) -> Option<usize> {
    if t_grid.len() < 3 {
        return None;
    }
    let h = t_grid[1] - t_grid[0];
    let uniform = t_grid
        .windows(2)
        .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-12 * period);
    let per_period = period / h;
    let rounded = per_period.round();
    let start_phase = t_grid[0] / h;
    if uniform
        && rounded >= 1.0
        && (per_period - rounded).abs() < 1e-9
        && (start_phase - start_phase.round()).abs() < 1e-9
    {
        Some(rounded as usize)
    } else {
        None
    }
}

/// States ρ(t) for each grid time, given ρ(0) = `rho0`.
pub fn evolve_state(
    l: &PeriodicLindbladian,
    rho0: &DensityMatrix,
    t_grid: &[f64],
) -> Result<Vec<DensityMatrix>> {
    evolve_state_with(l, rho0, t_grid, &AdaptiveOptions::default())
}

pub fn evolve_state_with(
    l: &PeriodicLindbladian,
    rho0: &DensityMatrix,
    t_grid: &[f64],
    opts: &AdaptiveOptions,
) -> Result<Vec<DensityMatrix>> {
    check_grid(t_grid)?;
    if rho0.dim() != l.dim() {
        return Err(FloquetError::Dimension(format!(
            "state dimension {} does not match generator dimension {}",
            rho0.dim(),
            l.dim()
        )));
    }
    rho0.validate()?;
    let mut rho = if t_grid[0] > 0.0 {
        propagate_adaptive(l, 0.0, t_grid[0], opts)?.apply(rho0)
    } else {
        rho0.data().clone()
    };
    let mut states = Vec::with_capacity(t_grid.len());
    states.push(finalize_state(&rho)?);

    // Intervals repeat every period on commensurate uniform grids.
    let cached: Option<Vec<Superoperator>> = match commensurate_intervals(t_grid, l.period()) {
        Some(per_period) if t_grid.len() - 1 > per_period => {
            let h = t_grid[1] - t_grid[0];
            let maps = (0..per_period)
                .map(|j| {
                    let start = t_grid[0] + j as f64 * h;
                    propagate_adaptive(l, start, start + h, opts).map(|p| p.map)
                })
                .collect::<Result<Vec<_>>>()?;
            Some(maps)
        }
        _ => None,
    };

    for (k, window) in t_grid.windows(2).enumerate() {
        let map = match &cached {
            Some(maps) => maps[k % maps.len()].clone(),
            None => propagate_adaptive(l, window[0], window[1], opts)?.map,
        };
        rho = map.apply(&rho);
        let herm = max_norm(&(&rho - rho.adjoint()));
        if herm > 1e-9 {
            return Err(FloquetError::AccuracyLoss { drift: herm });
        }
        let state = finalize_state(&rho)?;
        rho = state.data().clone();
        states.push(state);
    }
    Ok(states)
}
