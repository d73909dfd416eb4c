use crate::error::{FloquetError, Result};
use crate::linalg::{c, expm, logm_principal, max_norm, CMatrix, I};
use crate::propagation::{ordered_exponential_adaptive, AdaptiveOptions, PeriodicLindbladian};
use crate::superop::{hermitize, trace_norm_distance, DensityMatrix, Observable, Superoperator};

use super::generator::floquet_generator_exact_with;

const SAMPLE_TIMES: usize = 16;
const REDUCE_TOL: f64 = 1e-12;
/// One-period maps of the two routes must agree to this max-norm accuracy.
pub const ONE_PERIOD_TOL: f64 = 1e-9;

/// Comparison of the Hilbert-space and Liouville-space Floquet pictures of a
/// closed drive.
#[derive(Debug, Clone)]
pub struct ClosedSystemReport {
    /// H_F = (i/T) log U(T, 0) on the principal branch.
    pub floquet_hamiltonian: Observable,
    /// Principal log of the Liouville-space monodromy over T.
    pub liouville_generator: Superoperator,
    /// `‖exp(𝓛_F T) − exp(−i[H_F,·] T)‖_max`.
    pub one_period_mismatch: f64,
    /// `‖𝓛_F − (−i[H_F,·])‖_max`; nonzero when the two logs fold
    /// quasi-energies differently.
    pub gauge_difference: f64,
    pub gauge_consistent: bool,
    /// Max trace distance between 𝓚(t)ρ and P(t)ρP(t)† over sample states
    /// and times. Only meaningful when the gauges agree.
    pub micromotion_mismatch: f64,
    /// Max trace distance between 𝓥(t, 0)ρ and U(t)ρU(t)† over one period.
    pub trajectory_mismatch: f64,
}

fn sample_states() -> Vec<DensityMatrix> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    vec![
        DensityMatrix::excited(),
        DensityMatrix::ground(),
        DensityMatrix::pure(&[c(s), c(s)]),
        DensityMatrix::pure(&[c(s), I * s]),
    ]
}

/// Floquet reduction of a closed two-level drive `h(t)` with period `period`.
pub fn closed_system_reduce<F>(h: F, period: f64) -> Result<ClosedSystemReport>
where
    F: Fn(f64) -> CMatrix + Send + Sync + Clone + 'static,
{
    if !(period > 0.0) || !period.is_finite() {
        return Err(FloquetError::InvalidInput(format!("period must be positive, got {period}")));
    }
    let h0 = h(0.0);
    let dim = h0.nrows();
    if h0.ncols() != dim {
        return Err(FloquetError::Dimension("Hamiltonian must be square".into()));
    }
    for k in 0..SAMPLE_TIMES {
        let t = period * k as f64 / SAMPLE_TIMES as f64;
        let hk = h(t);
        if max_norm(&(&hk - hk.adjoint())) > 1e-12 {
            return Err(FloquetError::InvalidInput(format!("H({t}) is not Hermitian")));
        }
    }

    let opts = AdaptiveOptions::with_tol(REDUCE_TOL);
    let minus_ih = {
        let h = h.clone();
        move |t: f64| h(t) * (-I)
    };
    let unitary = |t: f64| -> Result<CMatrix> {
        ordered_exponential_adaptive(&minus_ih, dim, 0.0, t, period, &opts).map(|(u, _)| u)
    };

    let u_period = unitary(period)?;
    let h_f = hermitize(&(logm_principal(&u_period)? * (I / period)));
    let floquet_hamiltonian = Observable::new(h_f.clone())?;
    let coherent = Superoperator::hamiltonian(&h_f);

    let liouville = {
        let h = h.clone();
        PeriodicLindbladian::new("closed", period, dim, move |t| Superoperator::hamiltonian(&h(t)))?
    };
    let gen = floquet_generator_exact_with(&liouville, 0.0, &opts)?;

    let one_period_mismatch = gen.one_period_map().max_abs_diff(&coherent.exp(period));
    if one_period_mismatch > ONE_PERIOD_TOL {
        return Err(FloquetError::Decomposition(
            "Hilbert-space and Liouville-space one-period maps disagree",
        ));
    }
    let gauge_difference = gen.generator.max_abs_diff(&coherent);
    let gauge_consistent = gauge_difference < 1e-8;
    if !gauge_consistent {
        log::info!("closed reduction: generators differ by a branch choice ({gauge_difference:e})");
    }

    let states = sample_states();
    let mut micromotion_mismatch: f64 = 0.0;
    let mut trajectory_mismatch: f64 = 0.0;
    for k in 1..=SAMPLE_TIMES {
        let t = period * k as f64 / SAMPLE_TIMES as f64;
        let u = unitary(t)?;
        let v = crate::propagation::propagate_adaptive(&liouville, 0.0, t, &opts)?.map;
        let p = &u * expm(&(&h_f * (I * t)));
        let kmap = v.compose(&gen.generator.exp(-t));
        for rho in &states {
            let hilbert = &u * rho.data() * u.adjoint();
            trajectory_mismatch = trajectory_mismatch.max(trace_norm_distance(&v.apply(rho.data()), &hilbert));
            let conj = &p * rho.data() * p.adjoint();
            micromotion_mismatch = micromotion_mismatch.max(trace_norm_distance(&kmap.apply(rho.data()), &conj));
        }
    }

    Ok(ClosedSystemReport {
        floquet_hamiltonian,
        liouville_generator: gen.generator,
        one_period_mismatch,
        gauge_difference,
        gauge_consistent,
        micromotion_mismatch,
        trajectory_mismatch,
    })
}
