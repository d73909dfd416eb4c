//! Declarative scenario files (TOML).
//!
//! ```toml
//! name = "decay"
//! model = "model1"
//! methods = ["exact", "magnus1"]
//! initial_state = "excited"        # ground | mixed | random | { bloch = [x, y, z] }
//!
//! [params]
//! omega_z = 1.0
//! gamma = 0.2
//! omega = 2.0
//!
//! [time]
//! n_periods = 10
//! points_per_period = 40
//!
//! [sweep]
//! parameter = "omega"
//! values = [1.0, 1.5, 2.0, 3.0]
//! ```
//!
//! Numeric parameters also accept multiples of π as strings: `"pi/4"`,
//! `"3pi/4"`, `"2*pi"`.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{CliError, Result};

/// A real number written either literally or as a rational multiple of π.
#[derive(Debug, Clone, PartialEq)]
pub struct Number {
    pub value: f64,
    /// Source spelling when given as text.
    pub text: Option<String>,
}

impl Number {
    pub fn new(value: f64) -> Self {
        Self { value, text: None }
    }

    pub fn parse(text: &str) -> std::result::Result<f64, String> {
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if let Ok(v) = compact.parse::<f64>() {
            return Ok(v);
        }
        let (numerator, denominator) = match compact.split_once('/') {
            Some((n, d)) => (n, Some(d)),
            None => (compact.as_str(), None),
        };
        let scale = match numerator.strip_suffix("pi") {
            Some("") | Some("+") => 1.0,
            Some("-") => -1.0,
            Some(prefix) => prefix
                .trim_end_matches('*')
                .parse::<f64>()
                .map_err(|_| format!("cannot read {text:?} as a number"))?,
            None => return Err(format!("cannot read {text:?} as a number")),
        };
        let divisor = match denominator {
            Some(d) => d.parse::<f64>().map_err(|_| format!("cannot read {text:?} as a number"))?,
            None => 1.0,
        };
        if divisor == 0.0 {
            return Err(format!("division by zero in {text:?}"));
        }
        Ok(scale * std::f64::consts::PI / divisor)
    }

    /// Short label for file names.
    pub fn label(&self) -> String {
        match &self.text {
            Some(t) => t.replace('/', "_").replace('*', ""),
            None => format!("{}", self.value),
        }
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.text {
            Some(t) => write!(f, "{t}"),
            None => write!(f, "{}", self.value),
        }
    }
}

impl<'de> Deserialize<'de> for Number {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Float(f64),
            Int(i64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Float(v) => Ok(Number::new(v)),
            Raw::Int(v) => Ok(Number::new(v as f64)),
            Raw::Text(t) => Number::parse(&t)
                .map(|value| Number {
                    value,
                    text: Some(t),
                })
                .map_err(serde::de::Error::custom),
        }
    }
}

impl Serialize for Number {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match &self.text {
            Some(t) => serializer.serialize_str(t),
            None => serializer.serialize_f64(self.value),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Model1,
    Model2,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "exact")]
    Exact,
    #[serde(rename = "exact-log")]
    ExactLog,
    #[serde(rename = "magnus0")]
    Magnus0,
    #[serde(rename = "magnus1")]
    Magnus1,
    #[serde(rename = "magnus2")]
    Magnus2,
    #[serde(rename = "analytic0")]
    Analytic0,
    #[serde(rename = "analytic1")]
    Analytic1,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::ExactLog => "exact-log",
            Method::Magnus0 => "magnus0",
            Method::Magnus1 => "magnus1",
            Method::Magnus2 => "magnus2",
            Method::Analytic0 => "analytic0",
            Method::Analytic1 => "analytic1",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum InitialState {
    #[default]
    Excited,
    Ground,
    Mixed,
    /// Uniform in the Bloch ball, drawn from `--seed`.
    Random,
    Bloch([f64; 3]),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    #[serde(default = "default_periods")]
    pub n_periods: usize,
    #[serde(default = "default_points")]
    pub points_per_period: usize,
}

fn default_periods() -> usize {
    10
}

fn default_points() -> usize {
    40
}

impl Default for TimeConfig {
    fn default() -> Self {
        Self {
            n_periods: default_periods(),
            points_per_period: default_points(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub format: Format,
    #[serde(default)]
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub parameter: String,
    pub values: Vec<Number>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub model: ModelKind,
    #[serde(default)]
    pub params: toml::Table,
    /// Model description for `model = "custom"`, relative to the config.
    #[serde(default)]
    pub custom_file: Option<PathBuf>,
    #[serde(default)]
    pub t0: f64,
    #[serde(default)]
    pub initial_state: InitialState,
    #[serde(default)]
    pub time: TimeConfig,
    pub methods: Vec<Method>,
    /// Harmonic cutoff M for the micromotion series.
    #[serde(default)]
    pub truncation: Option<usize>,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub sweep: Option<Sweep>,
    /// Directory that relative paths in the file resolve against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

fn default_name() -> String {
    "scenario".into()
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: ScenarioConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut config = Self::from_toml(&text)
            .map_err(|e| CliError::Config(format!("{}: {}", path.display(), strip_prefix(e))))?;
        config.base_dir = path.parent().map(Path::to_path_buf);
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(CliError::Config("at least one method is required".into()));
        }
        if self.time.points_per_period == 0 {
            return Err(CliError::Config("time.points_per_period must be ≥ 1".into()));
        }
        if !self.t0.is_finite() {
            return Err(CliError::Config("t0 must be finite".into()));
        }
        if let InitialState::Bloch(r) = &self.initial_state {
            let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
            if !(norm <= 1.0 + 1e-12) {
                return Err(CliError::Config(format!("Bloch vector norm {norm} exceeds 1")));
            }
        }
        if self.model == ModelKind::Custom && self.custom_file.is_none() {
            return Err(CliError::Config("model = \"custom\" requires custom_file".into()));
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return Err(CliError::Config("sweep.values must not be empty".into()));
            }
        }
        Ok(())
    }

    /// One config per sweep value (or the config itself), each with the
    /// swept parameter written into `params` and a file-name suffix.
    pub fn expand(&self) -> Vec<(Option<String>, ScenarioConfig)> {
        match &self.sweep {
            None => vec![(None, self.clone())],
            Some(sweep) => sweep
                .values
                .iter()
                .map(|value| {
                    let mut point = self.clone();
                    point.sweep = None;
                    point.params.insert(sweep.parameter.clone(), toml::Value::Float(value.value));
                    (Some(format!("{}-{}", sweep.parameter, value.label())), point)
                })
                .collect(),
        }
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        match &self.base_dir {
            Some(base) if path.is_relative() => base.join(path),
            _ => path.to_path_buf(),
        }
    }
}

fn strip_prefix(err: CliError) -> String {
    match err {
        CliError::Config(msg) => msg,
        other => other.to_string(),
    }
}

/// Typed view of `params`; unknown keys are rejected.
pub fn typed_params<T: serde::de::DeserializeOwned>(params: &toml::Table) -> Result<T> {
    toml::Value::Table(params.clone())
        .try_into()
        .map_err(|e: toml::de::Error| CliError::Config(format!("params: {}", e.message())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pi_multiples() {
        let pi = std::f64::consts::PI;
        assert_eq!(Number::parse("pi/4").unwrap(), pi / 4.0);
        assert_eq!(Number::parse("3pi/4").unwrap(), 3.0 * pi / 4.0);
        assert_eq!(Number::parse("2*pi").unwrap(), 2.0 * pi);
        assert_eq!(Number::parse("-pi").unwrap(), -pi);
        assert_eq!(Number::parse("0.5").unwrap(), 0.5);
        assert!(Number::parse("tau").is_err());
        assert!(Number::parse("pi/0").is_err());
    }

    #[test]
    fn minimal_config_uses_defaults() {
        let c = ScenarioConfig::from_toml("model = \"model1\"\nmethods = [\"exact\"]\n").unwrap();
        assert_eq!(c.time, TimeConfig::default());
        assert_eq!(c.initial_state, InitialState::Excited);
        assert_eq!(c.output.format, Format::Csv);
    }

    #[test]
    fn bloch_state_and_sweep() {
        let c = ScenarioConfig::from_toml(
            r#"
model = "model2"
methods = ["exact", "analytic1"]
initial_state = { bloch = [0.0, 0.6, 0.8] }
[sweep]
parameter = "beta"
values = ["pi/2", 0.5]
"#,
        )
        .unwrap();
        assert_eq!(c.initial_state, InitialState::Bloch([0.0, 0.6, 0.8]));
        let points = c.expand();
        assert_eq!(points.len(), 2);
        assert_eq!(points[0].0.as_deref(), Some("beta-pi_2"));
        assert_eq!(points[1].0.as_deref(), Some("beta-0.5"));
    }

    #[test]
    fn invalid_configs_rejected() {
        assert!(ScenarioConfig::from_toml("model = \"model1\"\nmethods = []\n").is_err());
        assert!(ScenarioConfig::from_toml("model = \"model3\"\nmethods = [\"exact\"]\n").is_err());
        assert!(ScenarioConfig::from_toml("model = \"model1\"\nmethods = [\"magnus7\"]\n").is_err());
        assert!(ScenarioConfig::from_toml(
            "model = \"model1\"\nmethods = [\"exact\"]\ninitial_state = { bloch = [1.0, 1.0, 0.0] }\n"
        )
        .is_err());
        assert!(ScenarioConfig::from_toml(
            "model = \"model1\"\nmethods = [\"exact\"]\n[time]\npoints_per_period = 0\n"
        )
        .is_err());
        assert!(ScenarioConfig::from_toml("model = \"custom\"\nmethods = [\"exact\"]\n").is_err());
    }
}
