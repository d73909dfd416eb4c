use num_complex::Complex64;

use crate::error::{FloquetError, Result};
use crate::linalg::{c, kron, least_squares, CMatrix, CVector, I};
use crate::propagation::PeriodicLindbladian;
use crate::superop::{vectorize, Superoperator};

use super::FloquetGenerator;

/// Reconstruction residual above which a Fourier expansion is rejected.
pub const FOURIER_TOL: f64 = 1e-8;
const MAX_SAMPLES: usize = 1 << 14;
/// Relative smallest singular value below which the harmonic-balance
/// system is treated as rank deficient.
const GAUGE_TOL: f64 = 1e-13;
/// Constraint rows are scaled by this factor times the block scale.
const CONSTRAINT_WEIGHT: f64 = 1e3;

/// `f(t) ≈ Σ_{|m| ≤ M} C_m e^{iωmt}` with superoperator coefficients.
#[derive(Debug, Clone)]
pub struct FourierSeriesSuperop {
    coefficients: Vec<Superoperator>,
    pub base_frequency: f64,
    pub truncation: usize,
    /// Max-norm reconstruction (or equation) residual recorded by the
    /// routine that built the series.
    pub residual: f64,
}

impl FourierSeriesSuperop {
    pub fn new(
        coefficients: Vec<Superoperator>,
        base_frequency: f64,
        residual: f64,
    ) -> Result<Self> {
        if coefficients.is_empty() || coefficients.len() % 2 == 0 {
            return Err(FloquetError::InvalidInput(
                "Fourier series needs 2M + 1 coefficients".into(),
            ));
        }
        let truncation = coefficients.len() / 2;
        Ok(Self {
            coefficients,
            base_frequency,
            truncation,
            residual,
        })
    }

    pub fn coefficient(&self, m: i64) -> Option<&Superoperator> {
        let idx = m + self.truncation as i64;
        if idx < 0 {
            return None;
        }
        self.coefficients.get(idx as usize)
    }

    /// `(m, C_m)` pairs from `−M` to `M`.
    pub fn iter(&self) -> impl Iterator<Item = (i64, &Superoperator)> {
        let offset = self.truncation as i64;
        self.coefficients
            .iter()
            .enumerate()
            .map(move |(i, coeff)| (i as i64 - offset, coeff))
    }

    pub fn dim(&self) -> usize {
        self.coefficients[0].dim()
    }

    pub fn period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.base_frequency
    }

    pub fn evaluate(&self, t: f64) -> Superoperator {
        let mut total = CMatrix::zeros(self.coefficients[0].data().nrows(), self.coefficients[0].data().ncols());
        for (m, coeff) in self.iter() {
            let phase = Complex64::from_polar(1.0, self.base_frequency * m as f64 * t);
            total += coeff.data() * phase;
        }
        Superoperator::from_parts(total, self.dim())
    }

    /// Highest |m| whose coefficient exceeds `tol` in max norm.
    pub fn harmonic_content(&self, tol: f64) -> usize {
        self.iter()
            .filter(|(_, coeff)| coeff.max_abs() > tol)
            .map(|(m, _)| m.unsigned_abs() as usize)
            .max()
            .unwrap_or(0)
    }

    /// The series of `t ↦ f(t + shift)`.
    pub fn shifted(&self, shift: f64) -> Self {
        let coefficients = self
            .iter()
            .map(|(m, coeff)| {
                coeff.scale(Complex64::from_polar(1.0, self.base_frequency * m as f64 * shift))
            })
            .collect();
        Self {
            coefficients,
            base_frequency: self.base_frequency,
            truncation: self.truncation,
            residual: self.residual,
        }
    }
}

fn trapezoid_coefficients(
    l: &PeriodicLindbladian,
    truncation: usize,
    samples: usize,
) -> Vec<Superoperator> {
    let period = l.period();
    let omega = l.base_frequency();
    let values: Vec<(f64, Superoperator)> = (0..samples)
        .map(|k| {
            let t = period * k as f64 / samples as f64;
            (t, l.at(t))
        })
        .collect();
    let m_max = truncation as i64;
    (-m_max..=m_max)
        .map(|m| {
            let mut acc = CMatrix::zeros(values[0].1.data().nrows(), values[0].1.data().ncols());
            for (t, value) in &values {
                acc += value.data() * Complex64::from_polar(1.0, -omega * m as f64 * t);
            }
            Superoperator::from_parts(acc / c(samples as f64), l.dim())
        })
        .collect()
}

fn reconstruction_residual(l: &PeriodicLindbladian, series: &FourierSeriesSuperop, samples: usize) -> f64 {
    // Probe between the quadrature nodes.
    let period = l.period();
    (0..samples)
        .map(|k| {
            let t = period * (k as f64 + 0.5) / samples as f64;
            series.evaluate(t).max_abs_diff(&l.at(t))
        })
        .fold(0.0, f64::max)
}

/// Fourier coefficients `𝓛_m = (1/T) ∫₀ᵀ 𝓛(t) e^{−iωmt} dt`, |m| ≤ M, by the
/// trapezoidal rule on `quad_points` uniform nodes. The node count doubles
/// while the reconstruction residual exceeds 1e-8.
pub fn lindbladian_fourier(
    l: &PeriodicLindbladian,
    truncation: usize,
    quad_points: usize,
) -> Result<FourierSeriesSuperop> {
    if quad_points < 4 * truncation + 4 {
        return Err(FloquetError::InvalidInput(format!(
            "{quad_points} quadrature points cannot resolve {truncation} harmonics (need ≥ {})",
            4 * truncation + 4
        )));
    }
    let mut samples = quad_points;
    let mut last_residual = f64::INFINITY;
    loop {
        let coefficients = trapezoid_coefficients(l, truncation, samples);
        let mut series = FourierSeriesSuperop::new(coefficients, l.base_frequency(), 0.0)?;
        let residual = reconstruction_residual(l, &series, samples);
        series.residual = residual;
        if residual <= FOURIER_TOL {
            return Ok(series);
        }
        // Doubling stops paying off once the residual is truncation bound.
        if samples * 2 > MAX_SAMPLES || residual > 0.5 * last_residual {
            return Err(FloquetError::InsufficientTruncation { residual });
        }
        last_residual = residual;
        samples *= 2;
    }
}

/// [`lindbladian_fourier`] at the smallest truncation ≤ `max_truncation`
/// that captures 𝓛 to [`FOURIER_TOL`].
pub fn lindbladian_fourier_auto(l: &PeriodicLindbladian, max_truncation: usize) -> Result<FourierSeriesSuperop> {
    let mut last = FloquetError::InsufficientTruncation { residual: f64::INFINITY };
    for m in 0..=max_truncation {
        match lindbladian_fourier(l, m, 8 * m + 16) {
            Ok(series) => return Ok(series),
            Err(err @ FloquetError::InsufficientTruncation { .. }) => last = err,
            Err(err) => return Err(err),
        }
    }
    Err(last)
}

/// Harmonic-balance solution for the micromotion coefficients 𝓚_m:
///
/// ```text
/// iωm 𝓚_m = Σ_n 𝓛_n 𝓚_{m−n} − 𝓚_m 𝓛_F,   |m| ≤ M,
/// Σ_m 𝓚_m = 1                              (𝓚(0) = identity)
/// ```
///
/// assembled as one bordered system in the d⁴(2M+1) unknowns and solved by
/// least squares. If `gen` is anchored at `t0 ≠ 0` the Lindbladian series is
/// shifted accordingly. The returned residual is the max-norm residual of
/// the harmonic equations.
pub fn micromotion_fourier(
    l_series: &FourierSeriesSuperop,
    gen: &FloquetGenerator,
    truncation: usize,
) -> Result<FourierSeriesSuperop> {
    let omega = l_series.base_frequency;
    if (gen.period - l_series.period()).abs() > 1e-12 * gen.period {
        return Err(FloquetError::InvalidInput(format!(
            "generator period {} does not match series period {}",
            gen.period,
            l_series.period()
        )));
    }
    if gen.dim() != l_series.dim() {
        return Err(FloquetError::Dimension("generator and series dimension differ".into()));
    }
    let series = if gen.t0 != 0.0 {
        l_series.shifted(gen.t0)
    } else {
        l_series.clone()
    };
    let dim = gen.dim();
    let n = dim * dim; // superoperator side
    let block = n * n; // unknowns per coefficient
    let m_max = truncation as i64;
    let harmonics = 2 * truncation + 1;
    let rows = harmonics * block + block;
    let cols = harmonics * block;

    let ident = CMatrix::identity(n, n);
    let right = kron(&gen.generator.data().transpose(), &ident);
    let left_blocks: Vec<(i64, CMatrix)> = series
        .iter()
        .map(|(k, coeff)| (k, kron(&ident, coeff.data())))
        .collect();

    let mut scale: f64 = omega * truncation as f64;
    for (_, coeff) in series.iter() {
        scale = scale.max(coeff.max_abs());
    }
    scale = scale.max(gen.generator.max_abs()).max(1.0);
    let weight = CONSTRAINT_WEIGHT * scale;

    let mut a = CMatrix::zeros(rows, cols);
    for (row_idx, m) in (-m_max..=m_max).enumerate() {
        let r0 = row_idx * block;
        // diagonal: −(𝓛_Fᵀ ⊗ 1) − iωm
        {
            let c0 = row_idx * block;
            let mut view = a.view_mut((r0, c0), (block, block));
            view -= &right;
            for d in 0..block {
                view[(d, d)] -= I * (omega * m as f64);
            }
        }
        for (k, lk) in &left_blocks {
            let source = m - k;
            if source.abs() > m_max {
                continue;
            }
            let c0 = (source + m_max) as usize * block;
            let mut view = a.view_mut((r0, c0), (block, block));
            view += lk;
        }
    }
    let constraint_row = harmonics * block;
    for h in 0..harmonics {
        for d in 0..block {
            a[(constraint_row + d, h * block + d)] = c(weight);
        }
    }
    let mut b = CVector::zeros(rows);
    let target = vectorize(&ident);
    for d in 0..block {
        b[constraint_row + d] = target[d] * weight;
    }

    let (x, relative_sigma) = least_squares(&a, &b)?;
    if relative_sigma < GAUGE_TOL {
        return Err(FloquetError::GaugeAmbiguity {
            sigma: relative_sigma,
        });
    }
    let equations = a.rows(0, harmonics * block) * &x;
    let residual = equations.iter().map(|z| z.norm()).fold(0.0, f64::max);

    let coefficients = (0..harmonics)
        .map(|h| {
            let chunk = x.rows(h * block, block);
            Superoperator::from_parts(CMatrix::from_column_slice(n, n, chunk.as_slice()), dim)
        })
        .collect();
    FourierSeriesSuperop::new(coefficients, omega, residual)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floquet::floquet_generator_exact;
    use crate::superop::{lindblad_superop, pauli, JumpOperator, LindbladTerms, Observable};

    fn static_generator() -> Superoperator {
        lindblad_superop(
            &LindbladTerms::new(
                Observable::new(pauli::sigma_y() * c(0.3)).unwrap(),
                vec![JumpOperator {
                    operator: pauli::sigma_minus(),
                    rate: 0.25,
                }],
            )
            .unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn constant_lindbladian_has_only_zeroth_coefficient() {
        let g = static_generator();
        let l = PeriodicLindbladian::constant("c", g.clone(), 2.0).unwrap();
        let series = lindbladian_fourier(&l, 3, 16).unwrap();
        assert!(series.coefficient(0).unwrap().max_abs_diff(&g) < 1e-14);
        for (m, coeff) in series.iter() {
            if m != 0 {
                assert!(coeff.max_abs() < 1e-14);
            }
        }
        assert_eq!(series.harmonic_content(1e-12), 0);
    }

    #[test]
    fn too_few_quadrature_points_rejected() {
        let l = PeriodicLindbladian::constant("c", static_generator(), 2.0).unwrap();
        assert!(lindbladian_fourier(&l, 3, 15).is_err());
    }

    #[test]
    fn truncation_below_content_is_insufficient() {
        let omega = 2.0;
        let g = static_generator();
        let l = PeriodicLindbladian::new("cos3", 2.0 * std::f64::consts::PI / omega, 2, move |t| {
            g.clone()
                + Superoperator::hamiltonian(&(pauli::sigma_x() * c((3.0 * omega * t).cos())))
        })
        .unwrap();
        assert!(matches!(
            lindbladian_fourier(&l, 2, 16),
            Err(FloquetError::InsufficientTruncation { .. })
        ));
        let ok = lindbladian_fourier(&l, 3, 16).unwrap();
        assert_eq!(ok.harmonic_content(1e-12), 3);
    }

    #[test]
    fn micromotion_of_constant_generator_is_identity() {
        let g = static_generator();
        let l = PeriodicLindbladian::constant("c", g.clone(), 2.0).unwrap();
        let series = lindbladian_fourier(&l, 2, 16).unwrap();
        let gen = floquet_generator_exact(&l, 0.0).unwrap();
        let k = micromotion_fourier(&series, &gen, 4).unwrap();
        assert!(k.coefficient(0).unwrap().max_abs_diff(&Superoperator::identity(2)) < 1e-12);
        for (m, coeff) in k.iter() {
            if m != 0 {
                assert!(coeff.max_abs() < 1e-12, "m = {m}");
            }
        }
    }

    #[test]
    fn shifted_series_evaluates_at_offset() {
        let omega = 3.0;
        let l = PeriodicLindbladian::new("drive", 2.0 * std::f64::consts::PI / omega, 2, move |t| {
            Superoperator::hamiltonian(&(pauli::sigma_x() * c((omega * t).sin())))
        })
        .unwrap();
        let series = lindbladian_fourier(&l, 2, 32).unwrap();
        let shifted = series.shifted(0.4);
        assert!(shifted.evaluate(0.1).max_abs_diff(&l.at(0.5)) < 1e-12);
    }
}
