//! Floquet decomposition of a periodic Lindblad generator:
//!
//! ```text
//! 𝓥(t₂, t₁) = 𝓚(δt₂) · exp(𝓛_F (t₂ − t₁)) · 𝓙(δt₁)
//! ```
//!
//! with 𝓛_F the time-independent effective generator anchored at `t0`,
//! 𝓚 the periodic micromotion and 𝓙 its counterpart on the right.
//! 𝓛_F is available exactly (principal logarithm of the monodromy) or as
//! a truncated Magnus series; 𝓚 from the propagator or by harmonic balance;
//! the asymptotic periodic state from the block Fourier system.

mod closed;
mod fourier;
mod generator;
mod micromotion;
mod steady;
mod stroboscopic;

pub use closed::{closed_system_reduce, ClosedSystemReport, ONE_PERIOD_TOL};
pub use fourier::{
    lindbladian_fourier, lindbladian_fourier_auto, micromotion_fourier, FourierSeriesSuperop, FOURIER_TOL,
};
pub use generator::{
    floquet_generator_exact, floquet_generator_exact_with, magnus_generator, magnus_generator_at,
    magnus_terms, magnus_terms_fixed, FloquetGenerator, GeneratorMethod, MagnusTerms, QUADRATURE_TOL,
};
pub use micromotion::{
    decompose, defect_map, factorization_error, micromotion_ode, micromotion_ode_residual,
    DefectMaps, FloquetDecomposition,
};
pub use steady::{default_truncation, steady_state_block, SteadyStateSeries, MIN_SEPARATION};
pub use stroboscopic::{stroboscopic_evolve, StroboscopicTrajectory};
