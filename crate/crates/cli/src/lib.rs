//! Scenario files, presets, studies and output formats behind the
//! `floquet-lindblad` command.

pub mod config;
pub mod error;
pub mod model;
pub mod output;
pub mod scenario;
pub mod studies;

pub use config::{Format, Method, ScenarioConfig};
pub use error::{CliError, Result};
pub use scenario::{run_scenario, RunOptions, RunReport};

/// Shipped preset configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Preset {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
}

impl Preset {
    pub fn source(self) -> &'static str {
        match self {
            Preset::Fig1 => include_str!("../presets/fig1.toml"),
            Preset::Fig2 => include_str!("../presets/fig2.toml"),
            Preset::Fig3 => include_str!("../presets/fig3.toml"),
            Preset::Fig4 => include_str!("../presets/fig4.toml"),
        }
    }

    pub fn config(self) -> Result<ScenarioConfig> {
        ScenarioConfig::from_toml(self.source())
    }
}
