//! Pipeline configuration: one JSON document, with command-line overrides.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use monetif_core::diagnostics::DiagnosticsOptions;
use monetif_core::ingest::RateFormat;
use monetif_core::ols::CovarianceKind;
use monetif_core::series::{PeriodPartition, Year, YearBounds};
use monetif_core::synth::{IfGenConfig, RateGenConfig};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataMode {
    #[default]
    Synthetic,
    Files,
}

impl FromStr for DataMode {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "synthetic" => Ok(Self::Synthetic),
            "files" => Ok(Self::Files),
            other => Err(CliError::Config(format!("unknown mode {other:?} (expected synthetic or files)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
    #[default]
    Text,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Json => "json",
            Self::Text => "txt",
        }
    }
}

impl FromStr for OutputFormat {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            "text" | "txt" => Ok(Self::Text),
            other => Err(CliError::Config(format!("unknown format {other:?} (expected csv, json or text)"))),
        }
    }
}

/// Half-open seed range `start..end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedRange {
    pub start: u64,
    pub end: u64,
}

impl SeedRange {
    pub fn seeds(&self) -> Vec<u64> {
        (self.start..self.end).collect()
    }
}

impl fmt::Display for SeedRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

impl FromStr for SeedRange {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        let bad = || CliError::Config(format!("seed range {s:?} must look like A..B with A < B"));
        let (a, b) = s.split_once("..").ok_or_else(bad)?;
        let start = a.trim().parse().map_err(|_| bad())?;
        let end = b.trim().parse().map_err(|_| bad())?;
        if start >= end {
            return Err(bad());
        }
        Ok(Self { start, end })
    }
}

/// Input files for `files` mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FileInputs {
    /// FRED monthly export; takes precedence where it has data.
    pub fred: Option<PathBuf>,
    /// World Bank annual `year,value` export; fills years FRED lacks.
    pub worldbank: Option<PathBuf>,
    /// Annual `year,value` impact-factor file. Without it the impact factor is generated.
    pub impact: Option<PathBuf>,
    /// Noise sd for forward-fill imputation of remaining gaps.
    pub impute_noise_sd: f64,
}

impl Default for FileInputs {
    fn default() -> Self {
        Self {
            fred: None,
            worldbank: None,
            impact: None,
            impute_noise_sd: 0.1,
        }
    }
}

/// A rate series to swap in for `real_rate` in the robustness table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AltRate {
    pub name: String,
    pub path: PathBuf,
    #[serde(default)]
    pub format: Option<RateFormat>,
}

impl AltRate {
    pub fn from_path(path: &Path) -> Self {
        let name = path.file_stem().map_or_else(|| "alt".to_string(), |s| s.to_string_lossy().into_owned());
        Self {
            name,
            path: path.to_path_buf(),
            format: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Robustness {
    pub drop_years: Vec<Year>,
    pub alt_rates: Vec<AltRate>,
}

impl Default for Robustness {
    fn default() -> Self {
        Self {
            drop_years: vec![Year(2021)],
            alt_rates: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Extensions {
    pub max_lag: usize,
    pub quantiles: Vec<f64>,
}

impl Default for Extensions {
    fn default() -> Self {
        Self {
            max_lag: 2,
            quantiles: vec![0.25, 0.5, 0.75],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub mode: DataMode,
    pub files: FileInputs,
    pub impact: IfGenConfig,
    pub rate: RateGenConfig,
    pub seed: u64,
    pub seeds: Option<SeedRange>,
    pub partition: PeriodPartition,
    pub breakpoint: Year,
    pub covariance: CovarianceKind,
    pub out_dir: PathBuf,
    pub format: OutputFormat,
    pub robustness: Robustness,
    pub diagnostics: DiagnosticsOptions,
    pub extensions: Extensions,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            mode: DataMode::Synthetic,
            files: FileInputs::default(),
            impact: IfGenConfig::default(),
            rate: RateGenConfig::default(),
            seed: 0,
            seeds: None,
            partition: PeriodPartition::default(),
            breakpoint: Year(2008),
            covariance: CovarianceKind::Hc1,
            out_dir: PathBuf::from("out"),
            format: OutputFormat::Text,
            robustness: Robustness::default(),
            diagnostics: DiagnosticsOptions::default(),
            extensions: Extensions::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let cfg = |m: String| Err(CliError::Config(m));
        match self.mode {
            DataMode::Synthetic => {
                self.impact.validate().map_err(|e| CliError::Config(e.to_string()))?;
                self.rate.validate().map_err(|e| CliError::Config(e.to_string()))?;
            }
            DataMode::Files => {
                if self.files.fred.is_none() && self.files.worldbank.is_none() {
                    return cfg("files mode needs at least one of files.fred or files.worldbank".into());
                }
                for p in [&self.files.fred, &self.files.worldbank, &self.files.impact].into_iter().flatten() {
                    if !p.is_file() {
                        return cfg(format!("input file {} is not readable", p.display()));
                    }
                }
                if self.files.impact.is_none() {
                    self.impact.validate().map_err(|e| CliError::Config(e.to_string()))?;
                }
                if !(self.files.impute_noise_sd >= 0.0 && self.files.impute_noise_sd.is_finite()) {
                    return cfg(format!("impute_noise_sd {} must be non-negative", self.files.impute_noise_sd));
                }
            }
        }
        for alt in &self.robustness.alt_rates {
            if !alt.path.is_file() {
                return cfg(format!("alternative rate file {} is not readable", alt.path.display()));
            }
        }
        let bounds = YearBounds::default();
        self.partition
            .validate(bounds)
            .map_err(|e| CliError::Config(format!("partition: {e}")))?;
        if !(bounds.min < self.breakpoint.0 && self.breakpoint.0 <= bounds.max) {
            return cfg(format!("breakpoint {} is outside the sample", self.breakpoint));
        }
        if self.extensions.quantiles.iter().any(|t| !(*t > 0.0 && *t < 1.0)) {
            return cfg(format!("quantile levels {:?} must lie in (0, 1)", self.extensions.quantiles));
        }
        if !(0.0..1.0).contains(&self.diagnostics.goldfeld_quandt_drop) {
            return cfg("diagnostics.goldfeld_quandt_drop must lie in [0, 1)".into());
        }
        Ok(())
    }
}
