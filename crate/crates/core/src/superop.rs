//! Density matrices, observables and superoperators.
//!
//! # Conventions
//!
//! * Vectorization is column stacking, so `vec(A ρ B) = (Bᵀ ⊗ A) vec(ρ)`.
//!   Every superoperator matrix in this crate is written in that convention.
//! * The qubit basis is ordered `(|e⟩, |g⟩)`: `σ_z = diag(1, −1)`,
//!   `σ₊ = |e⟩⟨g|`, `σ₋ = |g⟩⟨e|`.
//! * Dissipators use the factor-two normalization
//!   `γ (2 A ρ A† − {A†A, ρ})`, i.e. there is no ½ in front of the
//!   anticommutator. A rate `γ` here corresponds to `2γ` in the more common
//!   GKSL form `γ' (A ρ A† − ½{A†A, ρ})`.
//! * ħ = 1.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::SymmetricEigen;
use num_complex::Complex64;

use crate::error::{FloquetError, Result};
use crate::linalg::{c, expm, kron, max_norm, CMatrix, CVector, I};

pub const HERMITICITY_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = 1e-10;
pub const TRACE_PRESERVATION_TOL: f64 = 1e-10;

pub mod pauli {
    use super::*;

    pub fn identity() -> CMatrix {
        CMatrix::identity(2, 2)
    }

    pub fn sigma_x() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)])
    }

    pub fn sigma_y() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(0.0), -I, I, c(0.0)])
    }

    pub fn sigma_z() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)])
    }

    /// Raising operator |e⟩⟨g|.
    pub fn sigma_plus() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)])
    }

    /// Lowering operator |g⟩⟨e|.
    pub fn sigma_minus() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(0.0), c(0.0), c(1.0), c(0.0)])
    }

    /// `(x σ_x + y σ_y + z σ_z)`.
    pub fn dot(v: [f64; 3]) -> CMatrix {
        sigma_x() * c(v[0]) + sigma_y() * c(v[1]) + sigma_z() * c(v[2])
    }
}

fn hermiticity_defect(m: &CMatrix) -> f64 {
    max_norm(&(m - m.adjoint()))
}

/// Hermitian part `(m + m†) / 2`.
pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c(0.5)
}

/// A d×d Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    data: CMatrix,
}

impl DensityMatrix {
    /// Validates all three state invariants.
    pub fn new(data: CMatrix) -> Result<Self> {
        let state = Self::unchecked(data)?;
        state.validate()?;
        Ok(state)
    }

    /// Accepts any square matrix without checking the state invariants.
    /// Used for intermediate states (truncated-generator evolution may leave
    /// the state space); call [`DensityMatrix::validate`] before relying on
    /// positivity.
    pub fn unchecked(data: CMatrix) -> Result<Self> {
        if !data.is_square() || data.nrows() == 0 {
            return Err(FloquetError::Dimension(format!(
                "density matrix must be square and non-empty, got {}×{}",
                data.nrows(),
                data.ncols()
            )));
        }
        Ok(Self { data })
    }

    pub fn validate(&self) -> Result<()> {
        let herm = hermiticity_defect(&self.data);
        if herm > HERMITICITY_TOL {
            return Err(FloquetError::InvalidInput(format!(
                "density matrix is not Hermitian (defect {herm:e})"
            )));
        }
        let trace = self.data.trace();
        if (trace - c(1.0)).norm() > TRACE_TOL {
            return Err(FloquetError::InvalidInput(format!(
                "density matrix trace is {trace}, expected 1"
            )));
        }
        let lowest = self.lowest_eigenvalue();
        if lowest < -PSD_TOL {
            return Err(FloquetError::InvalidInput(format!(
                "density matrix is not positive semidefinite (eigenvalue {lowest:e})"
            )));
        }
        Ok(())
    }

    pub fn lowest_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(hermitize(&self.data))
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn excited() -> Self {
        Self::pure(&[c(1.0), c(0.0)])
    }

    pub fn ground() -> Self {
        Self::pure(&[c(0.0), c(1.0)])
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            data: CMatrix::identity(dim, dim) * c(1.0 / dim as f64),
        }
    }

    /// Qubit state `(I + r·σ) / 2`; requires `|r| ≤ 1`.
    pub fn from_bloch(r: [f64; 3]) -> Result<Self> {
        let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1.0 + 1e-12 {
            return Err(FloquetError::InvalidInput(format!(
                "Bloch vector norm {norm} exceeds 1"
            )));
        }
        Ok(Self {
            data: (pauli::identity() + pauli::dot(r)) * c(0.5),
        })
    }

    /// `|ψ⟩⟨ψ|` for a normalized amplitude vector.
    pub fn pure(amplitudes: &[Complex64]) -> Self {
        let psi = CVector::from_row_slice(amplitudes);
        let norm = psi.norm();
        let psi = psi / c(norm);
        Self {
            data: &psi * psi.adjoint(),
        }
    }

    pub fn data(&self) -> &CMatrix {
        &self.data
    }

    pub fn into_inner(self) -> CMatrix {
        self.data
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    /// Bloch components `(⟨σ_x⟩, ⟨σ_y⟩, ⟨σ_z⟩)` for a qubit; real parts only.
    pub fn bloch(&self) -> [f64; 3] {
        let r = &self.data;
        [
            (pauli::sigma_x() * r).trace().re,
            (pauli::sigma_y() * r).trace().re,
            (pauli::sigma_z() * r).trace().re,
        ]
    }
}

/// A Hermitian d×d matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    data: CMatrix,
}

impl Observable {
    pub fn new(data: CMatrix) -> Result<Self> {
        if !data.is_square() {
            return Err(FloquetError::Dimension("observable must be square".into()));
        }
        let defect = hermiticity_defect(&data);
        if defect > HERMITICITY_TOL * max_norm(&data).max(1.0) {
            return Err(FloquetError::InvalidInput(format!(
                "observable is not Hermitian (defect {defect:e})"
            )));
        }
        Ok(Self { data })
    }

    pub fn sigma_x() -> Self {
        Self { data: pauli::sigma_x() }
    }

    pub fn sigma_y() -> Self {
        Self { data: pauli::sigma_y() }
    }

    pub fn sigma_z() -> Self {
        Self { data: pauli::sigma_z() }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            data: CMatrix::identity(dim, dim),
        }
    }

    pub fn data(&self) -> &CMatrix {
        &self.data
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }
}

/// Column-stacking vectorization.
pub fn vectorize(m: &CMatrix) -> CVector {
    CVector::from_iterator(m.len(), m.iter().copied())
}

pub fn devectorize(v: &CVector, dim: usize) -> Result<CMatrix> {
    if v.len() != dim * dim {
        return Err(FloquetError::Dimension(format!(
            "vector of length {} cannot be reshaped to {dim}×{dim}",
            v.len()
        )));
    }
    Ok(CMatrix::from_column_slice(dim, dim, v.as_slice()))
}

/// A linear map on d×d matrices stored as a d²×d² matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    data: CMatrix,
    dim: usize,
}

impl Superoperator {
    pub fn new(data: CMatrix, dim: usize) -> Result<Self> {
        let n = dim * dim;
        if data.nrows() != n || data.ncols() != n {
            return Err(FloquetError::Dimension(format!(
                "superoperator for d = {dim} must be {n}×{n}, got {}×{}",
                data.nrows(),
                data.ncols()
            )));
        }
        Ok(Self { data, dim })
    }

    pub(crate) fn from_parts(data: CMatrix, dim: usize) -> Self {
        debug_assert_eq!(data.nrows(), dim * dim);
        Self { data, dim }
    }

    pub fn identity(dim: usize) -> Self {
        let n = dim * dim;
        Self {
            data: CMatrix::identity(n, n),
            dim,
        }
    }

    pub fn zero(dim: usize) -> Self {
        let n = dim * dim;
        Self {
            data: CMatrix::zeros(n, n),
            dim,
        }
    }

    /// The map `ρ ↦ A ρ B`.
    pub fn sandwich(a: &CMatrix, b: &CMatrix) -> Self {
        let dim = a.nrows();
        Self {
            data: kron(&b.transpose(), a),
            dim,
        }
    }

    /// `ρ ↦ −i[H, ρ]`.
    pub fn hamiltonian(h: &CMatrix) -> Self {
        let ident = CMatrix::identity(h.nrows(), h.nrows());
        let comm = Self::sandwich(h, &ident) - Self::sandwich(&ident, h);
        comm * (-I)
    }

    /// `ρ ↦ γ (2 A ρ A† − {A†A, ρ})`.
    pub fn dissipator(a: &CMatrix, rate: f64) -> Self {
        let ident = CMatrix::identity(a.nrows(), a.nrows());
        let ad = a.adjoint();
        let ada = &ad * a;
        (Self::sandwich(a, &ad) * 2.0 - Self::sandwich(&ada, &ident) - Self::sandwich(&ident, &ada))
            * rate
    }

    pub fn data(&self) -> &CMatrix {
        &self.data
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn apply(&self, m: &CMatrix) -> CMatrix {
        let v = &self.data * vectorize(m);
        CMatrix::from_column_slice(self.dim, self.dim, v.as_slice())
    }

    pub fn apply_state(&self, rho: &DensityMatrix) -> CMatrix {
        self.apply(rho.data())
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Superoperator) -> Superoperator {
        Self::from_parts(&self.data * &other.data, self.dim)
    }

    pub fn commutator(&self, other: &Superoperator) -> Superoperator {
        Self::from_parts(
            &self.data * &other.data - &other.data * &self.data,
            self.dim,
        )
    }

    /// `exp(self · t)`.
    pub fn exp(&self, t: f64) -> Superoperator {
        Self::from_parts(expm(&(&self.data * c(t))), self.dim)
    }

    /// Max-norm of `vec(I)† · self`; zero for trace-annihilating generators
    /// (and for `P − 1` with `P` trace preserving).
    pub fn trace_defect(&self) -> f64 {
        let d = self.dim;
        let n = d * d;
        (0..n)
            .map(|col| {
                (0..d)
                    .map(|k| self.data[(k * d + k, col)])
                    .sum::<Complex64>()
                    .norm()
            })
            .fold(0.0, f64::max)
    }

    /// `max|vec(I)†(P − 1)|`: trace-preservation defect of a propagator.
    pub fn propagator_trace_defect(&self) -> f64 {
        (self - &Superoperator::identity(self.dim)).trace_defect()
    }

    pub fn max_abs_diff(&self, other: &Superoperator) -> f64 {
        max_norm(&(&self.data - &other.data))
    }

    pub fn max_abs(&self) -> f64 {
        max_norm(&self.data)
    }

    pub fn scale(&self, z: Complex64) -> Superoperator {
        Self::from_parts(&self.data * z, self.dim)
    }

    pub fn try_inverse(&self) -> Option<Superoperator> {
        self.data
            .clone()
            .try_inverse()
            .map(|inv| Self::from_parts(inv, self.dim))
    }
}

impl Add for Superoperator {
    type Output = Superoperator;
    fn add(self, rhs: Superoperator) -> Superoperator {
        Superoperator::from_parts(self.data + rhs.data, self.dim)
    }
}

impl<'a> Add<&'a Superoperator> for &'a Superoperator {
    type Output = Superoperator;
    fn add(self, rhs: &Superoperator) -> Superoperator {
        Superoperator::from_parts(&self.data + &rhs.data, self.dim)
    }
}

impl Sub for Superoperator {
    type Output = Superoperator;
    fn sub(self, rhs: Superoperator) -> Superoperator {
        Superoperator::from_parts(self.data - rhs.data, self.dim)
    }
}

impl<'a> Sub<&'a Superoperator> for &'a Superoperator {
    type Output = Superoperator;
    fn sub(self, rhs: &Superoperator) -> Superoperator {
        Superoperator::from_parts(&self.data - &rhs.data, self.dim)
    }
}

impl Neg for Superoperator {
    type Output = Superoperator;
    fn neg(self) -> Superoperator {
        Superoperator::from_parts(-self.data, self.dim)
    }
}

impl Mul<f64> for Superoperator {
    type Output = Superoperator;
    fn mul(self, rhs: f64) -> Superoperator {
        Superoperator::from_parts(self.data * c(rhs), self.dim)
    }
}

impl Mul<Complex64> for Superoperator {
    type Output = Superoperator;
    fn mul(self, rhs: Complex64) -> Superoperator {
        Superoperator::from_parts(self.data * rhs, self.dim)
    }
}

impl<'a> Mul<&'a Superoperator> for &'a Superoperator {
    type Output = Superoperator;
    fn mul(self, rhs: &Superoperator) -> Superoperator {
        self.compose(rhs)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JumpOperator {
    pub operator: CMatrix,
    pub rate: f64,
}

/// Hamiltonian plus jump operators with their rates.
#[derive(Debug, Clone, PartialEq)]
pub struct LindbladTerms {
    pub hamiltonian: Observable,
    pub jumps: Vec<JumpOperator>,
}

impl LindbladTerms {
    pub fn new(hamiltonian: Observable, jumps: Vec<JumpOperator>) -> Result<Self> {
        let d = hamiltonian.dim();
        for jump in &jumps {
            if jump.operator.nrows() != d || jump.operator.ncols() != d {
                return Err(FloquetError::Dimension(format!(
                    "jump operator is {}×{}, Hamiltonian is {d}×{d}",
                    jump.operator.nrows(),
                    jump.operator.ncols()
                )));
            }
            if !(jump.rate >= 0.0) {
                return Err(FloquetError::InvalidInput(format!(
                    "jump rate must be non-negative, got {}",
                    jump.rate
                )));
            }
        }
        Ok(Self { hamiltonian, jumps })
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }
}

/// Matrix of `ρ ↦ −i[H, ρ] + Σⱼ γⱼ (2 Aⱼ ρ Aⱼ† − {Aⱼ†Aⱼ, ρ})`.
pub fn lindblad_superop(terms: &LindbladTerms) -> Result<Superoperator> {
    let d = terms.dim();
    let mut generator = Superoperator::hamiltonian(terms.hamiltonian.data());
    for jump in &terms.jumps {
        if !(jump.rate >= 0.0) {
            return Err(FloquetError::InvalidInput(format!(
                "jump rate must be non-negative, got {}",
                jump.rate
            )));
        }
        if jump.operator.nrows() != d {
            return Err(FloquetError::Dimension("jump operator dimension".into()));
        }
        if jump.rate > 0.0 {
            generator = generator + Superoperator::dissipator(&jump.operator, jump.rate);
        }
    }
    Ok(generator)
}

/// `Tr(obs · ρ)`; errors if the imaginary part exceeds 1e-10.
pub fn expectation(obs: &Observable, rho: &DensityMatrix) -> Result<f64> {
    if obs.dim() != rho.dim() {
        return Err(FloquetError::Dimension(format!(
            "observable is {}-dimensional, state is {}-dimensional",
            obs.dim(),
            rho.dim()
        )));
    }
    let value = (obs.data() * rho.data()).trace();
    if value.im.abs() > 1e-10 {
        return Err(FloquetError::NonHermitianExpectation(value.im));
    }
    Ok(value.re)
}

/// `½‖a − b‖₁` of two Hermitian matrices, without state validation.
pub fn trace_norm_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    let diff = hermitize(&(a - b));
    0.5 * SymmetricEigen::new(diff)
        .eigenvalues
        .iter()
        .map(|x| x.abs())
        .sum::<f64>()
}

fn psd_sqrt(m: &CMatrix) -> CMatrix {
    let eig = SymmetricEigen::new(hermitize(m));
    let roots = eig.eigenvalues.map(|x| c(x.max(0.0).sqrt()));
    let v = &eig.eigenvectors;
    v * CMatrix::from_diagonal(&roots) * v.adjoint()
}

/// Uhlmann root fidelity `Tr√(√a b √a)` of two PSD matrices, without
/// state validation.
pub fn root_fidelity(a: &CMatrix, b: &CMatrix) -> f64 {
    let sa = psd_sqrt(a);
    let inner = &sa * b * &sa;
    let eig = SymmetricEigen::new(hermitize(&inner));
    eig.eigenvalues
        .iter()
        .map(|x| x.max(0.0).sqrt())
        .sum::<f64>()
        .min(1.0)
}

fn check_pair(a: &DensityMatrix, b: &DensityMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(FloquetError::Dimension(format!(
            "states have dimensions {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    a.validate()?;
    b.validate()
}

/// Trace distance `½‖ρ₁ − ρ₂‖₁ ∈ [0, 1]`.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    check_pair(a, b)?;
    Ok(trace_norm_distance(a.data(), b.data()).min(1.0))
}

/// Uhlmann fidelity `Tr√(√ρ₁ ρ₂ √ρ₁) ∈ [0, 1]` (root form: orthogonal pure
/// states give 0, `|e⟩⟨e|` against `I/2` gives `√½`).
pub fn state_fidelity(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    check_pair(a, b)?;
    Ok(root_fidelity(a.data(), b.data()))
}
