use num_complex::Complex64;

use crate::error::{FloquetError, Result};
use crate::linalg::{c, condition_number, CMatrix};
use crate::propagation::{propagate_adaptive, AdaptiveOptions, PeriodicLindbladian};
use crate::superop::Superoperator;

use super::fourier::{lindbladian_fourier, micromotion_fourier, FourierSeriesSuperop};
use super::generator::{floquet_generator_exact, FloquetGenerator};

/// Condition number beyond which the forward propagator is not inverted.
pub const MAX_CONDITION: f64 = 1e12;

fn check_times(t_grid: &[f64]) -> Result<()> {
    if t_grid.iter().any(|t| !(*t >= 0.0)) || t_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(FloquetError::InvalidInput(
            "micromotion grid must be non-negative and ascending".into(),
        ));
    }
    Ok(())
}

/// Forward propagators 𝓥(t0 + t, t0) along an ascending grid.
fn forward_propagators(
    l: &PeriodicLindbladian,
    t0: f64,
    t_grid: &[f64],
    opts: &AdaptiveOptions,
) -> Result<Vec<Superoperator>> {
    check_times(t_grid)?;
    let mut out = Vec::with_capacity(t_grid.len());
    let mut current = Superoperator::identity(l.dim());
    let mut last = 0.0;
    for &t in t_grid {
        if t > last {
            let step = propagate_adaptive(l, t0 + last, t0 + t, opts)?;
            current = step.map.compose(&current);
            last = t;
        }
        out.push(current.clone());
    }
    Ok(out)
}

/// 𝓚(t) = 𝓥(t0 + t, t0) · exp(−𝓛_F t) on each grid time, from the exact
/// propagator. Solves ∂ₜ𝓚 = 𝓛(t + t0)𝓚 − 𝓚𝓛_F with 𝓚(0) = 1.
pub fn micromotion_ode(
    l: &PeriodicLindbladian,
    gen: &FloquetGenerator,
    t_grid: &[f64],
) -> Result<Vec<Superoperator>> {
    let forward = forward_propagators(l, gen.t0, t_grid, &AdaptiveOptions::default())?;
    Ok(forward
        .iter()
        .zip(t_grid)
        .map(|(v, &t)| v.compose(&gen.generator.exp(-t)))
        .collect())
}

/// Max-norm residual of ∂ₜ𝓚 − (𝓛(t + t0)𝓚 − 𝓚𝓛_F) at `t`, with the
/// derivative from a fourth-order central difference of the exact 𝓚.
pub fn micromotion_ode_residual(l: &PeriodicLindbladian, gen: &FloquetGenerator, t: f64) -> Result<f64> {
    let h = 1e-3 * l.period();
    let tight = AdaptiveOptions::with_tol(1e-13);
    let centre = t.max(2.0 * h);
    let times: Vec<f64> = [-2.0, -1.0, 0.0, 1.0, 2.0]
        .iter()
        .map(|k| centre + k * h)
        .collect();
    let forward = forward_propagators(l, gen.t0, &times, &tight)?;
    let k: Vec<Superoperator> = forward
        .iter()
        .zip(&times)
        .map(|(v, &s)| v.compose(&gen.generator.exp(-s)))
        .collect();
    let derivative = (k[0].data() - k[1].data() * c(8.0) + k[3].data() * c(8.0) - k[4].data()) / c(12.0 * h);
    let l_t = l.at(centre + gen.t0);
    let rhs = l_t.data() * k[2].data() - k[2].data() * gen.generator.data();
    Ok((derivative - rhs).iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// 𝓙(t) = exp(𝓛_F t) · 𝓥(t0, t0 + t) with the condition number of each
/// inverted forward propagator.
#[derive(Debug, Clone)]
pub struct DefectMaps {
    pub maps: Vec<Superoperator>,
    pub condition_numbers: Vec<f64>,
}

pub fn defect_map(l: &PeriodicLindbladian, gen: &FloquetGenerator, t_grid: &[f64]) -> Result<DefectMaps> {
    let forward = forward_propagators(l, gen.t0, t_grid, &AdaptiveOptions::default())?;
    let mut maps = Vec::with_capacity(forward.len());
    let mut condition_numbers = Vec::with_capacity(forward.len());
    for (v, &t) in forward.iter().zip(t_grid) {
        let (inverse, condition) = invert_propagator(v)?;
        maps.push(gen.generator.exp(t).compose(&inverse));
        condition_numbers.push(condition);
    }
    Ok(DefectMaps {
        maps,
        condition_numbers,
    })
}

fn invert_propagator(v: &Superoperator) -> Result<(Superoperator, f64)> {
    let condition = condition_number(v.data())?;
    if condition > MAX_CONDITION {
        return Err(FloquetError::IllConditioned { condition });
    }
    let inverse = v
        .try_inverse()
        .ok_or(FloquetError::IllConditioned { condition })?;
    Ok((inverse, condition))
}

/// Max-norm difference between 𝓥(t₂, t₁) and 𝓚(δt₂) exp(𝓛_F(t₂ − t₁)) 𝓙(δt₁)
/// with δt₁ = t₁ − t0, δt₂ = t₂ − (nT + t0), n = ⌊(t₂ − t0)/T⌋.
pub fn factorization_error(l: &PeriodicLindbladian, gen: &FloquetGenerator, t1: f64, t2: f64) -> Result<f64> {
    if !(t2 >= t1) || t1 < gen.t0 {
        return Err(FloquetError::InvalidInput(
            "factorization needs t0 ≤ t1 ≤ t2".into(),
        ));
    }
    let opts = AdaptiveOptions::default();
    let period = l.period();
    let direct = propagate_adaptive(l, t1, t2, &opts)?.map;

    let n = ((t2 - gen.t0) / period).floor();
    let dt2 = t2 - (n * period + gen.t0);
    let dt1 = t1 - gen.t0;
    let k = propagate_adaptive(l, gen.t0, gen.t0 + dt2, &opts)?
        .map
        .compose(&gen.generator.exp(-dt2));
    let (v_inv, _) = invert_propagator(&propagate_adaptive(l, gen.t0, gen.t0 + dt1, &opts)?.map)?;
    let j = gen.generator.exp(dt1).compose(&v_inv);
    let factored = k.compose(&gen.generator.exp(t2 - t1)).compose(&j);
    Ok(direct.max_abs_diff(&factored))
}

/// Effective generator together with Fourier series of 𝓚 and (optionally) 𝓙.
#[derive(Debug, Clone)]
pub struct FloquetDecomposition {
    pub generator: FloquetGenerator,
    pub micromotion: FourierSeriesSuperop,
    pub defect: Option<FourierSeriesSuperop>,
}

impl FloquetDecomposition {
    pub fn period(&self) -> f64 {
        self.generator.period
    }

    /// 𝓚(t), periodic.
    pub fn micromotion_at(&self, t: f64) -> Superoperator {
        self.micromotion.evaluate(t.rem_euclid(self.period()))
    }

    /// 𝓙(t) from its series when present, otherwise 𝓚(t)⁻¹.
    pub fn defect_at(&self, t: f64) -> Result<Superoperator> {
        match &self.defect {
            Some(series) => Ok(series.evaluate(t.rem_euclid(self.period()))),
            None => Ok(invert_propagator(&self.micromotion_at(t))?.0),
        }
    }

    /// 𝓥(t₂, t₁) reconstructed from the decomposition.
    pub fn propagator(&self, t1: f64, t2: f64) -> Result<Superoperator> {
        let t0 = self.generator.t0;
        let k = self.micromotion_at(t2 - t0);
        let j = self.defect_at(t1 - t0)?;
        Ok(k.compose(&self.generator.generator.exp(t2 - t1)).compose(&j))
    }
}

/// Exact generator at `t0` plus harmonic-balance micromotion truncated at
/// `truncation`; the defect series is sampled from [`defect_map`].
pub fn decompose(
    l: &PeriodicLindbladian,
    t0: f64,
    truncation: usize,
    with_defect: bool,
) -> Result<FloquetDecomposition> {
    let generator = floquet_generator_exact(l, t0)?;
    let samples = 4 * truncation + 4;
    let l_series = lindbladian_fourier(l, truncation, samples)?;
    let micromotion = micromotion_fourier(&l_series, &generator, truncation)?;
    let defect = if with_defect {
        let period = l.period();
        let omega = l.base_frequency();
        let samples = 4 * truncation + 4;
        let grid: Vec<f64> = (0..samples).map(|k| period * k as f64 / samples as f64).collect();
        let maps = defect_map(l, &generator, &grid)?.maps;
        let m_max = truncation as i64;
        let coefficients = (-m_max..=m_max)
            .map(|m| {
                let mut acc = CMatrix::zeros(maps[0].data().nrows(), maps[0].data().ncols());
                for (t, map) in grid.iter().zip(&maps) {
                    acc += map.data() * Complex64::from_polar(1.0, -omega * m as f64 * t);
                }
                Superoperator::from_parts(acc / c(samples as f64), l.dim())
            })
            .collect();
        Some(FourierSeriesSuperop::new(coefficients, omega, 0.0)?)
    } else {
        None
    };
    Ok(FloquetDecomposition {
        generator,
        micromotion,
        defect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::superop::{lindblad_superop, pauli, JumpOperator, LindbladTerms, Observable};

    fn driven(omega: f64) -> PeriodicLindbladian {
        PeriodicLindbladian::new("driven", 2.0 * std::f64::consts::PI / omega, 2, move |t| {
            let h = pauli::sigma_z() * c(0.4) + pauli::sigma_x() * c(0.5 * (omega * t).sin());
            lindblad_superop(
                &LindbladTerms::new(
                    Observable::new(h).unwrap(),
                    vec![JumpOperator {
                        operator: pauli::sigma_minus(),
                        rate: 0.1,
                    }],
                )
                .unwrap(),
            )
            .unwrap()
        })
        .unwrap()
    }

    #[test]
    fn micromotion_starts_and_ends_at_identity() {
        let l = driven(3.0);
        let gen = floquet_generator_exact(&l, 0.0).unwrap();
        let k = micromotion_ode(&l, &gen, &[0.0, 0.5 * l.period(), l.period()]).unwrap();
        let id = Superoperator::identity(2);
        assert!(k[0].max_abs_diff(&id) < 1e-15);
        assert!(k[2].max_abs_diff(&id) < 1e-9);
        assert!(k[1].max_abs_diff(&id) > 1e-3);
    }

    #[test]
    fn defect_map_boundary_values() {
        let l = driven(3.0);
        let gen = floquet_generator_exact(&l, 0.0).unwrap();
        let j = defect_map(&l, &gen, &[0.0, l.period()]).unwrap();
        let id = Superoperator::identity(2);
        assert!(j.maps[0].max_abs_diff(&id) < 1e-15);
        assert!(j.maps[1].max_abs_diff(&id) < 1e-9);
        assert!(j.condition_numbers.iter().all(|c| *c >= 1.0));
    }

    #[test]
    fn ode_residual_is_small() {
        let l = driven(3.0);
        let gen = floquet_generator_exact(&l, 0.0).unwrap();
        for t in [0.1, 0.9, 1.7] {
            let r = micromotion_ode_residual(&l, &gen, t).unwrap();
            assert!(r < 1e-8, "t = {t}: {r:e}");
        }
    }

    #[test]
    fn decomposition_reproduces_propagator() {
        let l = driven(4.0);
        let dec = decompose(&l, 0.0, 10, true).unwrap();
        let t1 = 0.2 * l.period();
        let t2 = 2.6 * l.period();
        let direct = propagate_adaptive(&l, t1, t2, &AdaptiveOptions::default()).unwrap().map;
        let rebuilt = dec.propagator(t1, t2).unwrap();
        assert!(direct.max_abs_diff(&rebuilt) < 1e-6);
        let k_series_vs_inverse = dec
            .defect_at(t1)
            .unwrap()
            .compose(&dec.micromotion_at(t1))
            .max_abs_diff(&Superoperator::identity(2));
        assert!(k_series_vs_inverse < 1e-6);
    }

    #[test]
    fn factorization_rejects_reversed_times() {
        let l = driven(3.0);
        let gen = floquet_generator_exact(&l, 0.0).unwrap();
        assert!(factorization_error(&l, &gen, 2.0, 1.0).is_err());
    }
}
