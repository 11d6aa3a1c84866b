//! Pipeline configuration: a TOML file with sections, overridden by CLI
//! flags (flags win).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Which imputation conditions to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Enhanced,
    Baseline,
    Both,
}

impl Mode {
    pub fn runs_enhanced(self) -> bool {
        matches!(self, Mode::Enhanced | Mode::Both)
    }

    pub fn runs_baseline(self) -> bool {
        matches!(self, Mode::Baseline | Mode::Both)
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "enhanced" => Ok(Mode::Enhanced),
            "baseline" => Ok(Mode::Baseline),
            "both" => Ok(Mode::Both),
            other => Err(format!("unknown mode '{other}' (enhanced|baseline|both)")),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputConfig {
    pub path: PathBuf,
    #[serde(default = "default_date_column")]
    pub date_column: String,
    #[serde(default = "default_value_column")]
    pub value_column: String,
    /// Optional truth file for pre-existing gaps (date,value rows).
    #[serde(default)]
    pub holdout: Option<PathBuf>,
}

fn default_date_column() -> String {
    "date".into()
}

fn default_value_column() -> String {
    "value".into()
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarConfig {
    pub total_rate: f64,
    #[serde(default = "default_weekend_share")]
    pub weekend_share: f64,
}

fn default_weekend_share() -> f64 {
    0.60
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentConfig {
    pub name: String,
    pub period: usize,
    pub harmonics: Vec<u32>,
    pub window: usize,
    pub iterations: usize,
}

impl ComponentConfig {
    pub fn to_spec(&self) -> periodica::vbpbb::ComponentSpec {
        periodica::vbpbb::ComponentSpec {
            name: self.name.clone(),
            period: self.period,
            harmonics: self.harmonics.clone(),
            window: self.window,
            iterations: self.iterations,
        }
    }

    fn from_spec(spec: &periodica::vbpbb::ComponentSpec) -> Self {
        Self {
            name: spec.name.clone(),
            period: spec.period,
            harmonics: spec.harmonics.clone(),
            window: spec.window,
            iterations: spec.iterations,
        }
    }

    pub fn defaults() -> Vec<Self> {
        periodica::vbpbb::ComponentSpec::defaults()
            .iter()
            .map(Self::from_spec)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BootstrapSettings {
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default = "default_ci_level")]
    pub ci_level: f64,
}

fn default_replicates() -> usize {
    200
}

fn default_ci_level() -> f64 {
    0.95
}

impl Default for BootstrapSettings {
    fn default() -> Self {
        Self {
            replicates: default_replicates(),
            ci_level: default_ci_level(),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImputationSettings {
    #[serde(default = "default_imputations")]
    pub imputations: usize,
    #[serde(default = "default_mode")]
    pub mode: Mode,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_ridge")]
    pub ridge: f64,
}

fn default_imputations() -> usize {
    5
}

fn default_mode() -> Mode {
    Mode::Both
}

fn default_tolerance() -> f64 {
    1e-4
}

fn default_max_iterations() -> usize {
    500
}

fn default_ridge() -> f64 {
    1e-4
}

impl Default for ImputationSettings {
    fn default() -> Self {
        Self {
            imputations: default_imputations(),
            mode: default_mode(),
            tolerance: default_tolerance(),
            max_iterations: default_max_iterations(),
            ridge: default_ridge(),
        }
    }
}

impl ImputationSettings {
    pub fn em_config(&self) -> periodica::imputer::EmConfig {
        periodica::imputer::EmConfig {
            tol: self.tolerance,
            max_iter: self.max_iterations,
            ridge: self.ridge,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmoothingSettings {
    #[serde(default = "default_loess_span")]
    pub loess_span: f64,
    #[serde(default = "default_loess_degree")]
    pub loess_degree: usize,
    #[serde(default = "default_ma_window")]
    pub ma_window: usize,
}

fn default_loess_span() -> f64 {
    0.1
}

fn default_loess_degree() -> usize {
    1
}

fn default_ma_window() -> usize {
    29
}

impl Default for SmoothingSettings {
    fn default() -> Self {
        Self {
            loess_span: default_loess_span(),
            loess_degree: default_loess_degree(),
            ma_window: default_ma_window(),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralSettings {
    #[serde(default)]
    pub nominate: bool,
    #[serde(default = "default_peak_count")]
    pub peak_count: usize,
    #[serde(default = "default_min_separation")]
    pub min_separation: f64,
}

fn default_peak_count() -> usize {
    5
}

fn default_min_separation() -> f64 {
    0.002
}

/// Fully resolved configuration for one run.
#[derive(Debug, Clone, Serialize)]
pub struct PipelineConfig {
    pub seed: u64,
    pub input: InputConfig,
    pub mar: Option<MarConfig>,
    pub components: Vec<ComponentConfig>,
    pub bootstrap: BootstrapSettings,
    pub imputation: ImputationSettings,
    pub smoothing: SmoothingSettings,
    pub spectral: Option<SpectralSettings>,
    pub output: PathBuf,
}

/// TOML file shape (everything optional except the input section).
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    seed: Option<u64>,
    input: Option<InputConfig>,
    mar: Option<MarConfig>,
    #[serde(default)]
    component: Vec<ComponentConfig>,
    bootstrap: Option<BootstrapSettings>,
    imputation: Option<ImputationSettings>,
    smoothing: Option<SmoothingSettings>,
    spectral: Option<SpectralSettings>,
    output: Option<OutputSection>,
}

#[derive(Debug, Deserialize)]
struct OutputSection {
    dir: PathBuf,
}

/// Flag-level overrides; flags win over the file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub mode: Option<Mode>,
    pub replicates: Option<usize>,
    pub imputations: Option<usize>,
}

pub fn load_config(path: Option<&Path>, overrides: &Overrides) -> CliResult<PipelineConfig> {
    let raw: RawConfig = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| {
                CliError::Config(format!("cannot read config {}: {e}", p.display()))
            })?;
            toml::from_str(&text)
                .map_err(|e| CliError::Config(format!("config {}: {e}", p.display())))?
        }
        None => RawConfig::default(),
    };

    let mut input = match (raw.input, &overrides.input) {
        (Some(mut section), maybe_path) => {
            if let Some(p) = maybe_path {
                section.path = p.clone();
            }
            section
        }
        (None, Some(p)) => InputConfig {
            path: p.clone(),
            date_column: default_date_column(),
            value_column: default_value_column(),
            holdout: None,
        },
        (None, None) => {
            return Err(CliError::Config(
                "no input series: set [input].path in the config or pass --input".into(),
            ))
        }
    };
    if input.date_column.is_empty() || input.value_column.is_empty() {
        return Err(CliError::Config("empty column name in [input]".into()));
    }

    let components = if raw.component.is_empty() {
        ComponentConfig::defaults()
    } else {
        raw.component
    };

    let mut bootstrap = raw.bootstrap.unwrap_or_default();
    if let Some(b) = overrides.replicates {
        bootstrap.replicates = b;
    }
    let mut imputation = raw.imputation.unwrap_or_default();
    if let Some(m) = overrides.imputations {
        imputation.imputations = m;
    }
    if let Some(mode) = overrides.mode {
        imputation.mode = mode;
    }

    let output = overrides
        .out
        .clone()
        .or(raw.output.map(|o| o.dir))
        .unwrap_or_else(|| PathBuf::from("out"));

    if let Some(mar) = &raw.mar {
        if !(0.0..=1.0).contains(&mar.total_rate) {
            return Err(CliError::Config(format!(
                "[mar].total_rate {} outside [0, 1]",
                mar.total_rate
            )));
        }
        if !(0.0..=1.0).contains(&mar.weekend_share) {
            return Err(CliError::Config(format!(
                "[mar].weekend_share {} outside [0, 1]",
                mar.weekend_share
            )));
        }
    }
    for c in &components {
        c.to_spec()
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }

    // Holdout path is part of the input section; normalize empty to None.
    if let Some(h) = &input.holdout {
        if h.as_os_str().is_empty() {
            input.holdout = None;
        }
    }

    Ok(PipelineConfig {
        seed: overrides.seed.or(raw.seed).unwrap_or(0),
        input,
        mar: raw.mar,
        components,
        bootstrap,
        imputation,
        smoothing: raw.smoothing.unwrap_or_default(),
        spectral: raw.spectral,
        output,
    })
}
