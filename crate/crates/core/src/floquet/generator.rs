use std::fmt;

use crate::error::{FloquetError, Result};
use crate::linalg::{c, gauss_legendre, logm_principal, CMatrix};
use crate::propagation::{monodromy_with, AdaptiveOptions, PeriodicLindbladian};
use crate::superop::Superoperator;

/// Convergence target of the nested Magnus quadrature (max norm).
pub const QUADRATURE_TOL: f64 = 1e-9;
/// `exp(𝓛_F T)` must reproduce the monodromy to this max-norm accuracy.
pub const LOG_RECONSTRUCTION_TOL: f64 = 1e-10;
const MAX_QUAD_POINTS: usize = 256;
const MAX_QUAD_POINTS_ORDER2: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorMethod {
    /// Principal logarithm of the monodromy.
    ExactLog,
    /// Magnus series through `order`, by quadrature.
    Magnus { order: u8 },
    /// Closed-form Magnus terms of a built-in model.
    Analytic { order: u8 },
}

impl fmt::Display for GeneratorMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorMethod::ExactLog => write!(f, "exact-log"),
            GeneratorMethod::Magnus { order } => write!(f, "magnus{order}"),
            GeneratorMethod::Analytic { order } => write!(f, "analytic{order}"),
        }
    }
}

/// A time-independent effective generator 𝓛_F[t₀].
#[derive(Debug, Clone)]
pub struct FloquetGenerator {
    pub generator: Superoperator,
    pub t0: f64,
    pub method: GeneratorMethod,
    pub period: f64,
    /// Method-specific accuracy indicator: `‖exp(𝓛_F T) − monodromy‖` for
    /// the exact log, last quadrature refinement difference for Magnus,
    /// zero for closed forms.
    pub residual: f64,
}

impl FloquetGenerator {
    pub fn new(
        generator: Superoperator,
        t0: f64,
        method: GeneratorMethod,
        period: f64,
        residual: f64,
    ) -> Result<Self> {
        let scale = generator.max_abs().max(1.0);
        let defect = generator.trace_defect();
        let limit = match method {
            GeneratorMethod::ExactLog => 1e-9,
            _ => 1e-12,
        };
        if defect > limit * scale {
            return Err(FloquetError::TracePreservation(defect));
        }
        Ok(Self {
            generator,
            t0,
            method,
            period,
            residual,
        })
    }

    pub fn dim(&self) -> usize {
        self.generator.dim()
    }

    /// `exp(𝓛_F · T)`.
    pub fn one_period_map(&self) -> Superoperator {
        self.generator.exp(self.period)
    }
}

/// 𝓛_F[t₀] = log(𝓥(t₀ + T, t₀)) / T on the principal branch.
pub fn floquet_generator_exact(l: &PeriodicLindbladian, t0: f64) -> Result<FloquetGenerator> {
    floquet_generator_exact_with(l, t0, &AdaptiveOptions::default())
}

pub fn floquet_generator_exact_with(
    l: &PeriodicLindbladian,
    t0: f64,
    opts: &AdaptiveOptions,
) -> Result<FloquetGenerator> {
    let period = l.period();
    let monodromy = monodromy_with(l, t0, opts)?.map;
    let log = logm_principal(monodromy.data()).map_err(|err| match err {
        FloquetError::BranchAmbiguity { eigenvalue, .. } => FloquetError::BranchAmbiguity {
            eigenvalue,
            t0: Some(t0),
        },
        other => other,
    })?;
    let generator = Superoperator::new(log * c(1.0 / period), l.dim())?;
    let residual = generator.exp(period).max_abs_diff(&monodromy);
    if residual > LOG_RECONSTRUCTION_TOL {
        return Err(FloquetError::Decomposition(
            "principal logarithm does not reproduce the monodromy",
        ));
    }
    FloquetGenerator::new(generator, t0, GeneratorMethod::ExactLog, period, residual)
}

/// Individual Magnus contributions 𝓛_F^(0..=order).
#[derive(Debug, Clone)]
pub struct MagnusTerms {
    pub terms: Vec<Superoperator>,
    pub nodes: usize,
    pub residual: f64,
}

impl MagnusTerms {
    pub fn sum(&self) -> Superoperator {
        let mut total = self.terms[0].clone();
        for term in &self.terms[1..] {
            total = &total + term;
        }
        total
    }
}

/// Nested Gauss–Legendre evaluation of
///
/// ```text
/// 𝓛_F^(0) = 1/T ∫₀ᵀ 𝓛
/// 𝓛_F^(1) = 1/(2T) ∫₀ᵀdt₁ ∫₀^t₁dt₂ [𝓛₁, 𝓛₂]
/// 𝓛_F^(2) = 1/(6T) ∫₀ᵀdt₁ ∫₀^t₁dt₂ ∫₀^t₂dt₃ ([𝓛₁,[𝓛₂,𝓛₃]] + [[𝓛₁,𝓛₂],𝓛₃])
/// ```
///
/// The innermost integral is collected into `C(t) = ∫₀ᵗ 𝓛`, which enters
/// both order-2 commutators linearly.
fn magnus_quadrature(l: &PeriodicLindbladian, t0: f64, order: u8, n: usize) -> Vec<Superoperator> {
    let period = l.period();
    let dim = l.dim();
    let (x, w) = gauss_legendre(n);
    let eval = |t: f64| l.at(t0 + t).data().clone();
    let cumulative = |t: f64| -> CMatrix {
        let mut acc = CMatrix::zeros(dim * dim, dim * dim);
        for (xk, wk) in x.iter().zip(&w) {
            acc += eval(t * xk) * c(wk * t);
        }
        acc
    };
    let outer: Vec<(f64, f64, CMatrix)> = x
        .iter()
        .zip(&w)
        .map(|(xi, wi)| (period * xi, period * wi, eval(period * xi)))
        .collect();

    let mut terms = Vec::with_capacity(order as usize + 1);
    let mut zeroth = CMatrix::zeros(dim * dim, dim * dim);
    for (_, weight, value) in &outer {
        zeroth += value * c(*weight);
    }
    terms.push(zeroth / c(period));

    if order >= 1 {
        let mut first = CMatrix::zeros(dim * dim, dim * dim);
        for (t1, weight, l1) in &outer {
            let c1 = cumulative(*t1);
            first += (l1 * &c1 - &c1 * l1) * c(*weight);
        }
        terms.push(first / c(2.0 * period));
    }

    if order >= 2 {
        let mut second = CMatrix::zeros(dim * dim, dim * dim);
        for (t1, weight1, l1) in &outer {
            let mut inner = CMatrix::zeros(dim * dim, dim * dim);
            for (xj, wj) in x.iter().zip(&w) {
                let t2 = t1 * xj;
                let l2 = eval(t2);
                let c2 = cumulative(t2);
                let l2c2 = &l2 * &c2 - &c2 * &l2;
                let nested = l1 * &l2c2 - &l2c2 * l1;
                let l12 = l1 * &l2 - &l2 * l1;
                let outer_nested = &l12 * &c2 - &c2 * &l12;
                inner += (nested + outer_nested) * c(wj * t1);
            }
            second += inner * c(*weight1);
        }
        terms.push(second / c(6.0 * period));
    }

    terms
        .into_iter()
        .map(|m| Superoperator::from_parts(m, dim))
        .collect()
}

/// Magnus terms on a fixed number of Gauss–Legendre nodes per level, without
/// refinement. Used for quadrature convergence tables.
pub fn magnus_terms_fixed(l: &PeriodicLindbladian, t0: f64, order: u8, nodes: usize) -> Result<Vec<Superoperator>> {
    if order > 2 {
        return Err(FloquetError::InvalidInput(format!(
            "Magnus order {order} is not available (0, 1 or 2)"
        )));
    }
    if nodes == 0 {
        return Err(FloquetError::InvalidInput("quadrature needs at least one node".into()));
    }
    Ok(magnus_quadrature(l, t0, order, nodes))
}

/// Magnus terms anchored at `t0`, refining the node count by doubling from
/// `quad_points` until successive results agree to [`QUADRATURE_TOL`].
pub fn magnus_terms(l: &PeriodicLindbladian, t0: f64, order: u8, quad_points: usize) -> Result<MagnusTerms> {
    if order > 2 {
        return Err(FloquetError::InvalidInput(format!(
            "Magnus order {order} is not available (0, 1 or 2)"
        )));
    }
    let ceiling = if order >= 2 {
        MAX_QUAD_POINTS_ORDER2
    } else {
        MAX_QUAD_POINTS
    };
    let mut n = quad_points.max(4);
    let mut previous = magnus_quadrature(l, t0, order, n);
    loop {
        let next_n = 2 * n;
        let current = magnus_quadrature(l, t0, order, next_n);
        let residual = previous
            .iter()
            .zip(&current)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max);
        if residual < QUADRATURE_TOL {
            return Ok(MagnusTerms {
                terms: current,
                nodes: next_n,
                residual,
            });
        }
        if next_n >= ceiling {
            return Err(FloquetError::Quadrature {
                residual,
                points: next_n,
            });
        }
        n = next_n;
        previous = current;
    }
}

/// Σ_{n ≤ order} 𝓛_F^(n) anchored at t = 0.
pub fn magnus_generator(l: &PeriodicLindbladian, order: u8, quad_points: usize) -> Result<FloquetGenerator> {
    magnus_generator_at(l, order, quad_points, 0.0)
}

pub fn magnus_generator_at(
    l: &PeriodicLindbladian,
    order: u8,
    quad_points: usize,
    t0: f64,
) -> Result<FloquetGenerator> {
    let terms = magnus_terms(l, t0, order, quad_points)?;
    FloquetGenerator::new(
        terms.sum(),
        t0,
        GeneratorMethod::Magnus { order },
        l.period(),
        terms.residual,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eigenvalues;
    use crate::superop::{lindblad_superop, pauli, JumpOperator, LindbladTerms, Observable};

    fn constant_generator() -> Superoperator {
        lindblad_superop(
            &LindbladTerms::new(
                Observable::new(pauli::sigma_x() * c(0.7) + pauli::sigma_z() * c(0.2)).unwrap(),
                vec![JumpOperator {
                    operator: pauli::sigma_minus(),
                    rate: 0.15,
                }],
            )
            .unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn exact_generator_of_constant_lindbladian_is_itself() {
        let g = constant_generator();
        let l = PeriodicLindbladian::constant("c", g.clone(), 1.3).unwrap();
        let f = floquet_generator_exact(&l, 0.0).unwrap();
        assert!(f.generator.max_abs_diff(&g) < 1e-11);
        assert_eq!(f.method, GeneratorMethod::ExactLog);
    }

    #[test]
    fn magnus_of_constant_lindbladian_is_itself() {
        let g = constant_generator();
        let l = PeriodicLindbladian::constant("c", g.clone(), 1.3).unwrap();
        for order in 0..=2 {
            let f = magnus_generator(&l, order, 8).unwrap();
            assert!(f.generator.max_abs_diff(&g) < 1e-13, "order {order}");
        }
    }

    #[test]
    fn order_three_rejected() {
        let l = PeriodicLindbladian::constant("c", constant_generator(), 1.0).unwrap();
        assert!(magnus_generator(&l, 3, 8).is_err());
    }

    #[test]
    fn closed_drive_has_imaginary_floquet_spectrum() {
        let omega = 4.0;
        let l = PeriodicLindbladian::new("rabi", 2.0 * std::f64::consts::PI / omega, 2, move |t| {
            Superoperator::hamiltonian(
                &(pauli::sigma_z() * c(0.5) + pauli::sigma_x() * c(0.6 * (omega * t).cos())),
            )
        })
        .unwrap();
        let f = floquet_generator_exact(&l, 0.0).unwrap();
        for z in eigenvalues(f.generator.data()).unwrap() {
            assert!(z.re.abs() < 1e-10, "eigenvalue {z}");
        }
    }
}
