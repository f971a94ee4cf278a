//! Run configuration: built-in defaults, then an optional JSON file, then
//! command-line flags, each layer overriding the one before.

use std::path::{Path, PathBuf};

use cellcov::analytic::{LinkMode, NetworkParams, ThresholdGrid};
use cellcov::montecarlo::{DEFAULT_LAMBDA, DEFAULT_REALIZATIONS, DEFAULT_SEED, DEFAULT_WINDOW_SIDE};
use cellcov::parallel::Execution;
use cellcov::spatial::SimWindow;
use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::error::{as_config_error, CliError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Analytic,
    Sim,
    Both,
}

impl Method {
    pub fn analytic(self) -> bool {
        matches!(self, Method::Analytic | Method::Both)
    }

    pub fn simulated(self) -> bool {
        matches!(self, Method::Sim | Method::Both)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub mode: LinkMode,
    pub method: Method,
    pub alpha: f64,
    /// Power-control factors; the downlink always uses a single series.
    pub epsilons: Vec<f64>,
    pub lambda: f64,
    pub side: f64,
    pub xi_min: f64,
    pub xi_max: f64,
    pub xi_step: f64,
    pub realizations: u64,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
    /// Worker threads; `None` lets rayon decide.
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: LinkMode::Dl,
            method: Method::Analytic,
            alpha: 4.0,
            epsilons: vec![0.0],
            lambda: DEFAULT_LAMBDA,
            side: DEFAULT_WINDOW_SIDE,
            xi_min: -15.0,
            xi_max: 15.0,
            xi_step: 1.0,
            realizations: DEFAULT_REALIZATIONS,
            seed: DEFAULT_SEED,
            out: None,
            format: Format::Csv,
            threads: None,
        }
    }
}

fn parse_link_mode(s: &str) -> Result<LinkMode, String> {
    match s.to_ascii_lowercase().as_str() {
        "dl" | "downlink" => Ok(LinkMode::Dl),
        "ul" | "uplink" => Ok(LinkMode::Ul),
        other => Err(format!("unknown mode `{other}` (expected dl or ul)")),
    }
}

/// Every field optional: the shape of both the JSON config file and the
/// command-line flags.
#[derive(Debug, Clone, Default, PartialEq, Deserialize, clap::Args)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigOverrides {
    /// Link direction: dl or ul.
    #[arg(long, value_parser = parse_link_mode)]
    pub mode: Option<LinkMode>,
    #[arg(long, value_enum)]
    pub method: Option<Method>,
    /// Path-loss exponent (> 2).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Uplink power-control factor in [0, 1]; repeat for several curves.
    #[arg(long = "epsilon", value_name = "EPSILON")]
    #[serde(alias = "epsilons")]
    pub epsilon: Option<Vec<f64>>,
    /// Base-station density in BS/m².
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Side of the square simulation window in metres.
    #[arg(long)]
    pub side: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub xi_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub xi_max: Option<f64>,
    #[arg(long)]
    pub xi_step: Option<f64>,
    #[arg(long)]
    pub realizations: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub threads: Option<usize>,
}

impl ConfigOverrides {
    pub fn from_json_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path.display().to_string(), e))?;
        serde_json::from_str(&text).map_err(|e| CliError::config("config", format!("{}: {e}", path.display())))
    }

    fn apply(&self, config: &mut RunConfig) {
        macro_rules! take {
            ($($field:ident => $target:ident),*) => {
                $(if let Some(v) = &self.$field { config.$target = v.clone(); })*
            };
        }
        take!(mode => mode, method => method, alpha => alpha, epsilon => epsilons, lambda => lambda,
              side => side, xi_min => xi_min, xi_max => xi_max, xi_step => xi_step,
              realizations => realizations, seed => seed, format => format);
        if self.out.is_some() {
            config.out = self.out.clone();
        }
        if self.threads.is_some() {
            config.threads = self.threads;
        }
    }
}

impl RunConfig {
    /// Defaults, overridden by `file` if given, overridden by `flags`.
    pub fn resolve(file: Option<&Path>, flags: &ConfigOverrides) -> Result<Self, CliError> {
        let mut config = RunConfig::default();
        if let Some(path) = file {
            ConfigOverrides::from_json_file(path)?.apply(&mut config);
        }
        flags.apply(&mut config);
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.epsilons.is_empty() {
            return Err(CliError::config("epsilon", "at least one value required"));
        }
        for &e in &self.epsilons {
            NetworkParams::new(self.lambda, self.alpha, e, 1.0).map_err(as_config_error)?;
        }
        self.grid()?;
        self.window()?;
        if self.method.simulated() && self.realizations == 0 {
            return Err(CliError::config("realizations", "must be at least 1 when simulating"));
        }
        if self.threads == Some(0) {
            return Err(CliError::config("threads", "must be at least 1"));
        }
        Ok(())
    }

    pub fn kappa(&self) -> f64 {
        self.alpha / 2.0
    }

    pub fn grid(&self) -> Result<ThresholdGrid, CliError> {
        ThresholdGrid::from_db_range(self.xi_min, self.xi_max, self.xi_step).map_err(as_config_error)
    }

    pub fn window(&self) -> Result<SimWindow, CliError> {
        SimWindow::new(self.side).map_err(as_config_error)
    }

    /// The power-control factors that get a curve: the configured list in
    /// the uplink, a single 0 in the downlink.
    pub fn series_epsilons(&self) -> Vec<f64> {
        match self.mode {
            LinkMode::Dl => vec![0.0],
            LinkMode::Ul => self.epsilons.clone(),
        }
    }

    pub fn params(&self) -> Result<NetworkParams, CliError> {
        NetworkParams::new(self.lambda, self.alpha, 0.0, 1.0).map_err(as_config_error)
    }

    pub fn execution(&self) -> Execution {
        self.threads.map(Execution::with_threads).unwrap_or_default()
    }
}
