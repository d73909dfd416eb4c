use num_complex::Complex64;

use crate::error::{FloquetError, Result};
use crate::linalg::{c, max_norm, null_direction, CMatrix, CVector, I};
use crate::superop::{devectorize, hermitize, DensityMatrix};

use super::fourier::FourierSeriesSuperop;

/// Minimum ratio between the two smallest singular values of the block
/// matrix for the steady state to count as unique.
pub const MIN_SEPARATION: f64 = 1e3;

/// Fourier coefficients ρ_m of the asymptotic T-periodic state.
#[derive(Debug, Clone)]
pub struct SteadyStateSeries {
    rho_m: Vec<CMatrix>,
    pub base_frequency: f64,
    pub truncation: usize,
    /// `‖B x‖ / ‖x‖` for the block matrix B and the returned coefficients.
    pub residual: f64,
    /// `max_m ‖ρ_{−m} − ρ_m†‖` before symmetrization.
    pub conjugation_asymmetry: f64,
    /// Second-smallest over smallest singular value.
    pub separation: f64,
}

impl SteadyStateSeries {
    pub fn coefficient(&self, m: i64) -> Option<&CMatrix> {
        let idx = m + self.truncation as i64;
        if idx < 0 {
            return None;
        }
        self.rho_m.get(idx as usize)
    }

    pub fn dim(&self) -> usize {
        self.rho_m[0].nrows()
    }

    /// ρ(t) = Σ ρ_m e^{iωmt}.
    pub fn evaluate(&self, t: f64) -> CMatrix {
        let offset = self.truncation as i64;
        let mut total = CMatrix::zeros(self.dim(), self.dim());
        for (i, rho) in self.rho_m.iter().enumerate() {
            let m = i as i64 - offset;
            total += rho * Complex64::from_polar(1.0, self.base_frequency * m as f64 * t);
        }
        total
    }

    /// ρ(t) as a Hermitized state (positivity is not enforced).
    pub fn state_at(&self, t: f64) -> Result<DensityMatrix> {
        DensityMatrix::unchecked(hermitize(&self.evaluate(t)))
    }
}

/// Default truncation: twice the highest harmonic of 𝓛 plus four.
pub fn default_truncation(l_series: &FourierSeriesSuperop) -> usize {
    2 * l_series.harmonic_content(1e-12) + 4
}

/// Solves `iωm ρ_m = Σ_n 𝓛_n(ρ_{m−n})` for |m| ≤ M as the nullspace of the
/// block matrix with diagonal blocks `𝓛_0 − iωm` and off-diagonal blocks
/// `𝓛_{m−m′}` (coefficients beyond the series truncation are zero).
pub fn steady_state_block(l_series: &FourierSeriesSuperop, truncation: usize) -> Result<SteadyStateSeries> {
    let dim = l_series.dim();
    let n = dim * dim;
    let omega = l_series.base_frequency;
    let m_max = truncation as i64;
    let harmonics = 2 * truncation + 1;
    let size = harmonics * n;

    let mut block = CMatrix::zeros(size, size);
    for (row, m) in (-m_max..=m_max).enumerate() {
        for (col, m_prime) in (-m_max..=m_max).enumerate() {
            if let Some(coeff) = l_series.coefficient(m - m_prime) {
                let mut view = block.view_mut((row * n, col * n), (n, n));
                view += coeff.data();
            }
        }
        for d in 0..n {
            block[(row * n + d, row * n + d)] -= I * (omega * m as f64);
        }
    }

    let null = null_direction(&block)?;
    // Singular values at rounding level are indistinguishable from zero.
    let floor = 1e-14 * max_norm(&block).max(1.0) * size as f64;
    let separation = null.second / null.smallest.max(floor);
    if separation < MIN_SEPARATION {
        return Err(FloquetError::DegenerateSteadySpace { separation });
    }

    let mut rho_m: Vec<CMatrix> = (0..harmonics)
        .map(|h| devectorize(&CVector::from_column_slice(null.vector.rows(h * n, n).as_slice()), dim))
        .collect::<Result<_>>()?;
    let trace0 = rho_m[truncation].trace();
    if trace0.norm() < 1e-300 {
        return Err(FloquetError::Decomposition("steady-state vector has zero trace"));
    }
    for rho in rho_m.iter_mut() {
        *rho /= trace0;
    }

    let mut asymmetry: f64 = 0.0;
    for m in 0..=truncation {
        let neg = truncation - m;
        let pos = truncation + m;
        asymmetry = asymmetry.max(max_norm(&(&rho_m[neg] - rho_m[pos].adjoint())));
        let averaged = (&rho_m[neg] + rho_m[pos].adjoint()) * c(0.5);
        rho_m[pos] = averaged.adjoint();
        rho_m[neg] = averaged;
    }

    let mut x = CVector::zeros(size);
    for (h, rho) in rho_m.iter().enumerate() {
        x.rows_mut(h * n, n).copy_from_slice(rho.as_slice());
    }
    let residual = (&block * &x).norm() / x.norm();

    Ok(SteadyStateSeries {
        rho_m,
        base_frequency: omega,
        truncation,
        residual,
        conjugation_asymmetry: asymmetry,
        separation,
    })
}
