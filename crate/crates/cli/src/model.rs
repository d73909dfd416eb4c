//! Model construction from scenario parameters.
//!
//! Custom models are qubit drives described in their own TOML file:
//!
//! ```toml
//! omega = 3.0
//!
//! [[hamiltonian]]
//! operator = "sigma_z"
//! amplitude = 0.5
//!
//! [[hamiltonian]]
//! operator = "sigma_x"
//! amplitude = 0.8
//! waveform = "cos"      # const | cos | sin, at `harmonic` × omega
//!
//! [[jump]]
//! rate = 0.1
//! terms = [{ operator = "sigma_minus" }]
//! ```

use floquet_core::linalg::{c, CMatrix};
use floquet_core::models::{
    model1_lindbladian, model1_magnus_analytic, model2_lindbladian, model2_magnus_analytic, Model1Params,
    Model2Params,
};
use floquet_core::superop::{lindblad_superop, pauli, JumpOperator, LindbladTerms, Observable};
use floquet_core::{FloquetGenerator, PeriodicLindbladian};
use serde::Deserialize;

use crate::config::{typed_params, ModelKind, Number, ScenarioConfig};
use crate::error::{CliError, Result};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Model1Fields {
    #[serde(default)]
    omega_z: Option<Number>,
    #[serde(default)]
    gamma: Option<Number>,
    #[serde(default)]
    omega: Option<Number>,
    #[serde(default)]
    half_period: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Model2Fields {
    #[serde(default)]
    alpha: Option<Number>,
    #[serde(default)]
    gamma: Option<Number>,
    #[serde(default)]
    omega: Option<Number>,
    #[serde(default)]
    theta: Option<Number>,
    #[serde(default)]
    phi: Option<Number>,
    #[serde(default)]
    beta: Option<Number>,
}

fn or(value: Option<Number>, fallback: f64) -> f64 {
    value.map_or(fallback, |n| n.value)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
enum OperatorName {
    Identity,
    SigmaX,
    SigmaY,
    SigmaZ,
    SigmaPlus,
    SigmaMinus,
}

impl OperatorName {
    fn matrix(self) -> CMatrix {
        match self {
            OperatorName::Identity => pauli::identity(),
            OperatorName::SigmaX => pauli::sigma_x(),
            OperatorName::SigmaY => pauli::sigma_y(),
            OperatorName::SigmaZ => pauli::sigma_z(),
            OperatorName::SigmaPlus => pauli::sigma_plus(),
            OperatorName::SigmaMinus => pauli::sigma_minus(),
        }
    }

    fn hermitian(self) -> bool {
        !matches!(self, OperatorName::SigmaPlus | OperatorName::SigmaMinus)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
enum Waveform {
    #[default]
    Const,
    Cos,
    Sin,
}

fn one() -> Number {
    Number::new(1.0)
}

fn first_harmonic() -> u32 {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct Term {
    operator: OperatorName,
    #[serde(default = "one")]
    amplitude: Number,
    #[serde(default)]
    waveform: Waveform,
    #[serde(default = "first_harmonic")]
    harmonic: u32,
}

impl Term {
    fn at(&self, omega: f64, t: f64) -> CMatrix {
        let phase = omega * self.harmonic as f64 * t;
        let envelope = match self.waveform {
            Waveform::Const => 1.0,
            Waveform::Cos => phase.cos(),
            Waveform::Sin => phase.sin(),
        };
        self.operator.matrix() * c(self.amplitude.value * envelope)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct Jump {
    rate: Number,
    terms: Vec<Term>,
}

/// A user-defined qubit drive.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomModel {
    omega: Number,
    #[serde(default)]
    hamiltonian: Vec<Term>,
    #[serde(default)]
    jump: Vec<Jump>,
}

impl CustomModel {
    pub fn from_toml(text: &str) -> Result<Self> {
        let model: CustomModel = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        if !(model.omega.value > 0.0) || !model.omega.value.is_finite() {
            return Err(CliError::Config(format!("omega must be positive, got {}", model.omega)));
        }
        if let Some(term) = model.hamiltonian.iter().find(|t| !t.operator.hermitian()) {
            return Err(CliError::Config(format!(
                "Hamiltonian term {:?} is not Hermitian",
                term.operator
            )));
        }
        if let Some(j) = model.jump.iter().find(|j| !(j.rate.value >= 0.0)) {
            return Err(CliError::Config(format!("jump rate must be ≥ 0, got {}", j.rate)));
        }
        Ok(model)
    }

    fn terms_at(&self, t: f64) -> floquet_core::Result<LindbladTerms> {
        let omega = self.omega.value;
        let mut h = CMatrix::zeros(2, 2);
        for term in &self.hamiltonian {
            h += term.at(omega, t);
        }
        let jumps = self
            .jump
            .iter()
            .map(|j| {
                let mut a = CMatrix::zeros(2, 2);
                for term in &j.terms {
                    a += term.at(omega, t);
                }
                JumpOperator {
                    operator: a,
                    rate: j.rate.value,
                }
            })
            .collect();
        LindbladTerms::new(Observable::new(h)?, jumps)
    }

    pub fn lindbladian(&self) -> floquet_core::Result<PeriodicLindbladian> {
        // Validate once so the generator closure cannot fail.
        lindblad_superop(&self.terms_at(0.0)?)?;
        let model = self.clone();
        PeriodicLindbladian::new("custom", 2.0 * std::f64::consts::PI / self.omega.value, 2, move |t| {
            lindblad_superop(&model.terms_at(t).expect("validated terms")).expect("validated generator")
        })
    }
}

#[derive(Debug, Clone)]
pub enum ResolvedModel {
    Model1(Model1Params),
    Model2(Model2Params),
    Custom(CustomModel),
}

impl ResolvedModel {
    pub fn from_config(config: &ScenarioConfig) -> Result<Self> {
        match config.model {
            ModelKind::Custom => {
                if !config.params.is_empty() {
                    return Err(CliError::Config("custom models take no [params]".into()));
                }
                let file = config
                    .custom_file
                    .as_ref()
                    .ok_or_else(|| CliError::Config("custom_file missing".into()))?;
                let path = config.resolve(file);
                let text = std::fs::read_to_string(&path).map_err(|source| CliError::Io {
                    path: path.clone(),
                    source,
                })?;
                let model = CustomModel::from_toml(&text)
                    .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                Ok(ResolvedModel::Custom(model))
            }
            kind => Self::builtin(kind, &config.params),
        }
    }

    /// Model 1 or model 2 from a parameter table; missing keys take defaults.
    pub fn builtin(kind: ModelKind, params: &toml::Table) -> Result<Self> {
        let model = match kind {
            ModelKind::Model1 => {
                let f: Model1Fields = typed_params(params)?;
                let d = Model1Params::default();
                let p = Model1Params {
                    omega_z: or(f.omega_z, d.omega_z),
                    gamma: or(f.gamma, d.gamma),
                    omega: or(f.omega, d.omega),
                    half_period: f.half_period,
                };
                p.validate().map_err(|e| CliError::Config(format!("params: {e}")))?;
                ResolvedModel::Model1(p)
            }
            ModelKind::Model2 => {
                let f: Model2Fields = typed_params(params)?;
                let d = Model2Params::default();
                let p = Model2Params {
                    alpha: or(f.alpha, d.alpha),
                    gamma: or(f.gamma, d.gamma),
                    omega: or(f.omega, d.omega),
                    theta: or(f.theta, d.theta),
                    phi: or(f.phi, d.phi),
                    beta: or(f.beta, d.beta),
                };
                p.validate().map_err(|e| CliError::Config(format!("params: {e}")))?;
                ResolvedModel::Model2(p)
            }
            ModelKind::Custom => {
                return Err(CliError::Config("custom models are read from custom_file".into()));
            }
        };
        Ok(model)
    }

    pub fn lindbladian(&self) -> floquet_core::Result<PeriodicLindbladian> {
        match self {
            ResolvedModel::Model1(p) => model1_lindbladian(p),
            ResolvedModel::Model2(p) => model2_lindbladian(p),
            ResolvedModel::Custom(m) => m.lindbladian(),
        }
    }

    /// Closed-form Magnus generator, anchored at t = 0.
    pub fn analytic(&self, order: u8) -> floquet_core::Result<FloquetGenerator> {
        match self {
            ResolvedModel::Model1(p) => model1_magnus_analytic(p, order),
            ResolvedModel::Model2(p) => model2_magnus_analytic(p, order),
            ResolvedModel::Custom(_) => Err(floquet_core::FloquetError::InvalidInput(
                "closed-form generators exist only for the built-in models".into(),
            )),
        }
    }

    /// Decay rate used to size burn-in windows.
    pub fn gamma(&self) -> Option<f64> {
        match self {
            ResolvedModel::Model1(p) => Some(p.gamma),
            ResolvedModel::Model2(p) => Some(p.gamma),
            ResolvedModel::Custom(m) => m.jump.iter().map(|j| j.rate.value).reduce(f64::max),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn custom_model_parses_and_builds() {
        let m = CustomModel::from_toml(
            r#"
omega = 3.0
[[hamiltonian]]
operator = "sigma_z"
amplitude = 0.5
[[hamiltonian]]
operator = "sigma_x"
amplitude = 0.8
waveform = "cos"
[[jump]]
rate = 0.1
terms = [{ operator = "sigma_minus" }]
"#,
        )
        .unwrap();
        let l = m.lindbladian().unwrap();
        assert!((l.period() - 2.0 * std::f64::consts::PI / 3.0).abs() < 1e-15);
        assert!(l.at(0.3).trace_defect() < 1e-14);
    }

    #[test]
    fn custom_model_rejects_non_hermitian_hamiltonian() {
        let err = CustomModel::from_toml(
            "omega = 1.0\n[[hamiltonian]]\noperator = \"sigma_plus\"\n",
        );
        assert!(err.is_err());
        assert!(CustomModel::from_toml("omega = 0.0\n").is_err());
        assert!(CustomModel::from_toml("omega = 1.0\nfoo = 2\n").is_err());
    }

    #[test]
    fn unknown_params_rejected() {
        let config =
            ScenarioConfig::from_toml("model = \"model1\"\nmethods = [\"exact\"]\n[params]\nalpha = 1.0\n").unwrap();
        assert!(ResolvedModel::from_config(&config).is_err());
    }
}
