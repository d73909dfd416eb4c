//! Floquet theory for time-periodic Lindblad master equations.
//!
//! Superoperators act on column-stacked density matrices,
//! `vec(AρB) = (Bᵀ ⊗ A) vec(ρ)`. Qubit basis is (|e⟩, |g⟩) with
//! `σ_z = diag(1, −1)` and `σ₊ = |e⟩⟨g|`. Dissipators follow
//! `γ(2AρA† − {A†A, ρ})`, and ħ = 1.

pub mod error;
pub mod floquet;
pub mod linalg;
pub mod models;
pub mod propagation;
pub mod studies;
pub mod superop;

pub use error::{FloquetError, Result};
pub use floquet::{
    closed_system_reduce, decompose, floquet_generator_exact, lindbladian_fourier, magnus_generator,
    micromotion_fourier, micromotion_ode, steady_state_block, stroboscopic_evolve, ClosedSystemReport,
    FloquetDecomposition, FloquetGenerator, FourierSeriesSuperop, GeneratorMethod, SteadyStateSeries,
    StroboscopicTrajectory,
};
pub use linalg::{CMatrix, CVector};
pub use models::{
    model1_lindbladian, model1_magnus_analytic, model2_geometry, model2_lindbladian, model2_magnus_analytic,
    GeometryCoefficients, Model1Params, Model2Params,
};
pub use propagation::{evolve_state, monodromy, propagate, AdaptiveOptions, PeriodicLindbladian, PropagatorMap, Scheme};
pub use superop::{
    expectation, lindblad_superop, pauli, state_fidelity, trace_distance, DensityMatrix, JumpOperator,
    LindbladTerms, Observable, Superoperator,
};
