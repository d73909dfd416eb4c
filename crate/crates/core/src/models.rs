//! The two driven qubit models and their closed-form Magnus terms.
//!
//! Model 1: `H = Ωσ_z`, one jump operator `A(t) = cos(ωt)σ₊ + sin(ωt)σ₋`.
//! Model 2: `H(t) = ½α B(t)·σ` with a unit field precessing on a cone of
//! half-angle β around the axis (θ, φ), decay through σ₋.

use std::f64::consts::PI;

use crate::error::{FloquetError, Result};
use crate::floquet::{FloquetGenerator, GeneratorMethod};
use crate::linalg::{c, gauss_legendre, CMatrix, I};
use crate::propagation::PeriodicLindbladian;
use crate::superop::{pauli, JumpOperator, LindbladTerms, Observable, Superoperator};

/// Closed-form geometry coefficients must match their quadrature to this.
pub const GEOMETRY_TOL: f64 = 1e-7;
const GEOMETRY_NODES: usize = 48;

fn check_finite(name: &str, value: f64) -> Result<()> {
    if !value.is_finite() {
        return Err(FloquetError::InvalidInput(format!("{name} must be finite, got {value}")));
    }
    Ok(())
}

fn check_rates(gamma: f64, omega: f64) -> Result<()> {
    check_finite("gamma", gamma)?;
    check_finite("omega", omega)?;
    if gamma < 0.0 {
        return Err(FloquetError::InvalidInput(format!("gamma must be ≥ 0, got {gamma}")));
    }
    if omega <= 0.0 {
        return Err(FloquetError::InvalidInput(format!("omega must be > 0, got {omega}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Model1Params {
    pub omega_z: f64,
    pub gamma: f64,
    pub omega: f64,
    /// Declare the true period π/ω instead of 2π/ω.
    pub half_period: bool,
}

impl Model1Params {
    pub fn new(omega_z: f64, gamma: f64, omega: f64) -> Self {
        Self {
            omega_z,
            gamma,
            omega,
            half_period: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_finite("omega_z", self.omega_z)?;
        check_rates(self.gamma, self.omega)
    }

    pub fn period(&self) -> f64 {
        if self.half_period {
            PI / self.omega
        } else {
            2.0 * PI / self.omega
        }
    }
}

impl Default for Model1Params {
    fn default() -> Self {
        Self::new(1.0, 0.2, 2.0)
    }
}

pub fn model1_jump(p: &Model1Params, t: f64) -> CMatrix {
    let (s, co) = (p.omega * t).sin_cos();
    pauli::sigma_plus() * c(co) + pauli::sigma_minus() * c(s)
}

pub fn model1_terms(p: &Model1Params, t: f64) -> Result<LindbladTerms> {
    p.validate()?;
    LindbladTerms::new(
        Observable::new(pauli::sigma_z() * c(p.omega_z))?,
        vec![JumpOperator {
            operator: model1_jump(p, t),
            rate: p.gamma,
        }],
    )
}

pub fn model1_lindbladian(p: &Model1Params) -> Result<PeriodicLindbladian> {
    p.validate()?;
    let params = *p;
    let coherent = Superoperator::hamiltonian(&(pauli::sigma_z() * c(params.omega_z)));
    PeriodicLindbladian::new("model1", params.period(), 2, move |t| {
        &coherent + &Superoperator::dissipator(&model1_jump(&params, t), params.gamma)
    })
}

/// Order 0: `−i[Ωσ_z,·] + γ(σ₊·σ₋ + σ₋·σ₊ − ·)`.
/// Order 1 adds `2iγ(Ω/ω)(σ₋·σ₋ − σ₊·σ₊)`.
pub fn model1_magnus_analytic(p: &Model1Params, order: u8) -> Result<FloquetGenerator> {
    p.validate()?;
    if order > 1 {
        return Err(FloquetError::InvalidInput(format!(
            "closed-form Magnus terms exist for orders 0 and 1, not {order}"
        )));
    }
    let sp = pauli::sigma_plus();
    let sm = pauli::sigma_minus();
    let mut generator = Superoperator::hamiltonian(&(pauli::sigma_z() * c(p.omega_z)))
        + (Superoperator::sandwich(&sp, &sm) + Superoperator::sandwich(&sm, &sp) - Superoperator::identity(2))
            * p.gamma;
    if order == 1 {
        generator = generator + model1_first_order(p);
    }
    FloquetGenerator::new(generator, 0.0, GeneratorMethod::Analytic { order }, p.period(), 0.0)
}

fn model1_first_order(p: &Model1Params) -> Superoperator {
    let sp = pauli::sigma_plus();
    let sm = pauli::sigma_minus();
    (Superoperator::sandwich(&sm, &sm) - Superoperator::sandwich(&sp, &sp))
        * (I * (2.0 * p.gamma * p.omega_z / p.omega))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Model2Params {
    pub alpha: f64,
    pub gamma: f64,
    pub omega: f64,
    pub theta: f64,
    pub phi: f64,
    pub beta: f64,
}

impl Model2Params {
    pub fn validate(&self) -> Result<()> {
        check_finite("alpha", self.alpha)?;
        check_rates(self.gamma, self.omega)?;
        let ranges = [
            ("theta", self.theta, 0.0, 2.0 * PI, false),
            ("phi", self.phi, 0.0, PI, true),
            ("beta", self.beta, 0.0, PI / 2.0, true),
        ];
        for (name, value, lo, hi, closed) in ranges {
            let inside = value >= lo && if closed { value <= hi } else { value < hi };
            if !inside {
                let bracket = if closed { ']' } else { ')' };
                return Err(FloquetError::InvalidInput(format!(
                    "{name} must lie in [{lo}, {hi}{bracket}, got {value}"
                )));
            }
        }
        Ok(())
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }

    /// Unit vector of the cone axis.
    pub fn axis(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [ct * sp, st * sp, cp]
    }
}

impl Default for Model2Params {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            gamma: 0.2,
            omega: 5.0,
            theta: PI / 4.0,
            phi: PI / 4.0,
            beta: PI / 3.0,
        }
    }
}

/// B(t) = cos β · axis + sin β (sin ωt · u + cos ωt · v), with (u, v, axis)
/// a right-handed orthonormal frame.
pub fn model2_field(p: &Model2Params, t: f64) -> [f64; 3] {
    let (st, ct) = p.theta.sin_cos();
    let (sp, cp) = p.phi.sin_cos();
    let (sb, cb) = p.beta.sin_cos();
    let (sw, cw) = (p.omega * t).sin_cos();
    let axis = [ct * sp, st * sp, cp];
    let u = [ct * cp, st * cp, -sp];
    let v = [st, -ct, 0.0];
    std::array::from_fn(|k| cb * axis[k] + sb * (sw * u[k] + cw * v[k]))
}

pub fn model2_hamiltonian(p: &Model2Params, t: f64) -> CMatrix {
    pauli::dot(model2_field(p, t)) * c(0.5 * p.alpha)
}

fn model2_dissipator(p: &Model2Params) -> Superoperator {
    Superoperator::dissipator(&pauli::sigma_minus(), p.gamma)
}

pub fn model2_lindbladian(p: &Model2Params) -> Result<PeriodicLindbladian> {
    p.validate()?;
    for k in 0..32 {
        let b = model2_field(p, p.period() * k as f64 / 32.0);
        let norm = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(FloquetError::GeometryInconsistency {
                component: "|B|",
                closed_form: 1.0,
                quadrature: norm,
            });
        }
    }
    let params = *p;
    let dissipator = model2_dissipator(p);
    PeriodicLindbladian::new("model2", params.period(), 2, move |t| {
        &Superoperator::hamiltonian(&model2_hamiltonian(&params, t)) + &dissipator
    })
}

/// The 1/ω geometry of the model-2 field: M = ⟨⟨B(t₂) × B(t₁)⟩⟩,
/// N = ⟨⟨B(t₁) − B(t₂)⟩⟩ (x, y only), with the ordered double average
/// `⟨⟨f⟩⟩ = 1/(2T) ∫₀ᵀdt₁ ∫₀^t₁dt₂ f(t₁, t₂)`, and the time-averaged
/// Hamiltonian H̄.
#[derive(Debug, Clone)]
pub struct GeometryCoefficients {
    pub m: [f64; 3],
    pub n: [f64; 2],
    pub h_bar_avg: Observable,
    /// Largest |closed form − quadrature| over the five components.
    pub quadrature_mismatch: f64,
}

fn geometry_closed_form(p: &Model2Params) -> ([f64; 3], [f64; 2]) {
    let (st, ct) = p.theta.sin_cos();
    let (sp, cp) = p.phi.sin_cos();
    let (sb, cb) = p.beta.sin_cos();
    let w = p.omega;
    let m = [
        sb * (sb * ct * sp + 2.0 * cb * st) / (2.0 * w),
        sb * (sb * st * sp - 2.0 * cb * ct) / (2.0 * w),
        cp * sb * sb / (2.0 * w),
    ];
    let n = [-ct * cp * sb / w, -st * cp * sb / w];
    (m, n)
}

fn geometry_quadrature(p: &Model2Params) -> ([f64; 3], [f64; 2]) {
    let period = p.period();
    let (x, w) = gauss_legendre(GEOMETRY_NODES);
    let mut m = [0.0; 3];
    let mut n = [0.0; 2];
    for (xi, wi) in x.iter().zip(&w) {
        let t1 = period * xi;
        let b1 = model2_field(p, t1);
        for (xj, wj) in x.iter().zip(&w) {
            let t2 = t1 * xj;
            let b2 = model2_field(p, t2);
            let weight = period * wi * t1 * wj / (2.0 * period);
            m[0] += weight * (b2[1] * b1[2] - b1[1] * b2[2]);
            m[1] += weight * (b2[2] * b1[0] - b1[2] * b2[0]);
            m[2] += weight * (b2[0] * b1[1] - b1[0] * b2[1]);
            n[0] += weight * (b1[0] - b2[0]);
            n[1] += weight * (b1[1] - b2[1]);
        }
    }
    (m, n)
}

pub fn model2_geometry(p: &Model2Params) -> Result<GeometryCoefficients> {
    p.validate()?;
    let (m, n) = geometry_closed_form(p);
    let (mq, nq) = geometry_quadrature(p);
    let names = ["M_x", "M_y", "M_z", "N_x", "N_y"];
    let closed = [m[0], m[1], m[2], n[0], n[1]];
    let quad = [mq[0], mq[1], mq[2], nq[0], nq[1]];
    let mut mismatch: f64 = 0.0;
    for ((name, a), b) in names.iter().zip(closed).zip(quad) {
        let diff = (a - b).abs();
        if diff > GEOMETRY_TOL {
            return Err(FloquetError::GeometryInconsistency {
                component: name,
                closed_form: a,
                quadrature: b,
            });
        }
        mismatch = mismatch.max(diff);
    }
    let cb = p.beta.cos();
    let h_bar = pauli::dot(p.axis()) * c(0.5 * p.alpha * cb);
    Ok(GeometryCoefficients {
        m,
        n,
        h_bar_avg: Observable::new(h_bar)?,
        quadrature_mismatch: mismatch,
    })
}

/// Order 0: `−i[H̄,·] + 𝓓`. Order 1 adds
/// `(i/2)α²[M·σ,·] + (i/2)αγ(N_x + iN_y)(2σ₋·σ_z + {·,σ₋})
///  − (i/2)αγ(N_x − iN_y)(2σ_z·σ₊ + {·,σ₊})`.
pub fn model2_magnus_analytic(p: &Model2Params, order: u8) -> Result<FloquetGenerator> {
    if order > 1 {
        return Err(FloquetError::InvalidInput(format!(
            "closed-form Magnus terms exist for orders 0 and 1, not {order}"
        )));
    }
    let geometry = model2_geometry(p)?;
    let mut generator = Superoperator::hamiltonian(geometry.h_bar_avg.data()) + model2_dissipator(p);
    if order == 1 {
        generator = generator + model2_first_order(p, &geometry);
    }
    FloquetGenerator::new(generator, 0.0, GeneratorMethod::Analytic { order }, p.period(), 0.0)
}

fn model2_first_order(p: &Model2Params, g: &GeometryCoefficients) -> Superoperator {
    let id = pauli::identity();
    let sz = pauli::sigma_z();
    let sp = pauli::sigma_plus();
    let sm = pauli::sigma_minus();
    let m_sigma = pauli::dot(g.m);
    let coherent = (Superoperator::sandwich(&m_sigma, &id) - Superoperator::sandwich(&id, &m_sigma))
        * (I * (0.5 * p.alpha * p.alpha));
    let lowering = (Superoperator::sandwich(&sm, &sz) * 2.0
        + Superoperator::sandwich(&id, &sm)
        + Superoperator::sandwich(&sm, &id))
        * (I * 0.5 * p.alpha * p.gamma * (c(g.n[0]) + I * g.n[1]));
    let raising = (Superoperator::sandwich(&sz, &sp) * 2.0
        + Superoperator::sandwich(&id, &sp)
        + Superoperator::sandwich(&sp, &id))
        * (I * 0.5 * p.alpha * p.gamma * (c(g.n[0]) - I * g.n[1]));
    coherent + lowering - raising
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_norm;

    #[test]
    fn model1_jump_at_quarter_period_is_pure_decay() {
        let p = Model1Params::default();
        let a = model1_jump(&p, PI / (2.0 * p.omega));
        assert!(max_norm(&(a - pauli::sigma_minus())) < 1e-15);
        let l = model1_lindbladian(&p).unwrap();
        let expected = Superoperator::hamiltonian(&pauli::sigma_z())
            + Superoperator::dissipator(&pauli::sigma_plus(), p.gamma);
        assert!(l.at(0.0).max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn model1_has_half_period() {
        let p = Model1Params::default();
        let l = model1_lindbladian(&p).unwrap();
        for t in [0.1, 0.77, 2.3] {
            assert!(l.at(t).max_abs_diff(&l.at(t + PI / p.omega)) < 1e-14);
        }
    }

    #[test]
    fn model1_zero_gamma_is_coherent() {
        let mut p = Model1Params::default();
        p.gamma = 0.0;
        for order in 0..=1 {
            let g = model1_magnus_analytic(&p, order).unwrap();
            assert!(g.generator.max_abs_diff(&Superoperator::hamiltonian(&pauli::sigma_z())) < 1e-15);
        }
    }

    #[test]
    fn model1_first_order_scales_as_inverse_frequency() {
        let increments: Vec<f64> = [1.0, 2.0, 4.0]
            .iter()
            .map(|&w| {
                let p = Model1Params::new(1.0, 0.2, w);
                let g0 = model1_magnus_analytic(&p, 0).unwrap().generator;
                let g1 = model1_magnus_analytic(&p, 1).unwrap().generator;
                (g1 - g0).max_abs() * w
            })
            .collect();
        assert!((increments[0] - increments[1]).abs() < 1e-14);
        assert!((increments[0] - increments[2]).abs() < 1e-14);
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(model1_lindbladian(&Model1Params::new(1.0, -0.1, 2.0)).is_err());
        assert!(model1_lindbladian(&Model1Params::new(1.0, 0.1, 0.0)).is_err());
        let mut p = Model2Params::default();
        p.beta = 2.0;
        assert!(model2_lindbladian(&p).is_err());
        p = Model2Params::default();
        p.theta = 2.0 * PI;
        assert!(model2_geometry(&p).is_err());
    }

    #[test]
    fn model2_field_is_unit_and_static_without_cone() {
        let mut p = Model2Params::default();
        for k in 0..32 {
            let b = model2_field(&p, k as f64 * 0.1);
            assert!((b.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-14);
        }
        p.beta = 0.0;
        let l = model2_lindbladian(&p).unwrap();
        let h = pauli::dot(p.axis()) * c(0.5 * p.alpha);
        let expected = Superoperator::hamiltonian(&h) + Superoperator::dissipator(&pauli::sigma_minus(), p.gamma);
        assert!(l.at(0.37).max_abs_diff(&expected) < 1e-15);
        let g = model2_geometry(&p).unwrap();
        assert!(g.m.iter().chain(&g.n).all(|x| x.abs() < 1e-15));
        let g0 = model2_magnus_analytic(&p, 0).unwrap();
        let g1 = model2_magnus_analytic(&p, 1).unwrap();
        assert!(g0.generator.max_abs_diff(&g1.generator) < 1e-15);
    }

    #[test]
    fn model2_special_angles() {
        let p = Model2Params {
            alpha: 1.0,
            gamma: 0.1,
            omega: 3.0,
            theta: PI / 4.0,
            phi: PI / 2.0,
            beta: PI / 2.0,
        };
        let g = model2_geometry(&p).unwrap();
        let expected = 2f64.sqrt() / (4.0 * p.omega);
        assert!(g.m[2].abs() < 1e-12 && g.n[0].abs() < 1e-12 && g.n[1].abs() < 1e-12);
        assert!(max_norm(g.h_bar_avg.data()) < 1e-12);
        assert!((g.m[0] - expected).abs() < 1e-12);
        assert!((g.m[1] - expected).abs() < 1e-12);
    }

    #[test]
    fn model2_geometry_scales_as_inverse_frequency() {
        let p = Model2Params::default();
        let q = Model2Params { omega: 2.0 * p.omega, ..p };
        let a = model2_geometry(&p).unwrap();
        let b = model2_geometry(&q).unwrap();
        for k in 0..3 {
            assert!((a.m[k] - 2.0 * b.m[k]).abs() < 1e-15);
        }
        for k in 0..2 {
            assert!((a.n[k] - 2.0 * b.n[k]).abs() < 1e-15);
        }
        assert!(a.quadrature_mismatch < 1e-12);
    }
}
