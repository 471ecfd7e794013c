//! End-to-end run: data, descriptives, regressions, break test, diagnostics,
//! extensions and robustness variants.

use serde::{Deserialize, Serialize};
use std::path::Path;

use monetif_core::diagnostics::{self, DiagnosticsReport, TestOutcome};
use monetif_core::extend::{self, QuantileFit};
use monetif_core::ingest::{
    detect_format, impute_forward, merge_sources, parse_rate_csv, DataSource, RateFormat, SourceLog,
};
use monetif_core::ols::{self, CovarianceKind, FitResult, ModelSpec, Prediction};
use monetif_core::series::{
    correlation_matrix, describe_values, AnnualSeries, CorrelationMatrix, Dataset, Segment, Summary, Year, YearBounds,
};
use monetif_core::synth::{build_dataset, generate_if, synthetic_dataset, IfGenConfig};

use crate::config::{AltRate, DataMode, PipelineConfig};
use crate::error::CliError;

pub const RATE: &str = "real_rate";
pub const IMPACT: &str = "impact_factor";

/// The dataset a run works on, with per-year provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedData {
    pub dataset: Dataset,
    pub log: SourceLog,
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(&format!("reading {}", path.display()), e))
}

/// Reads a rate file, annualising monthly data.
pub fn load_rate_file(path: &Path, format: Option<RateFormat>, name: &str) -> Result<AnnualSeries, CliError> {
    let text = read(path)?;
    let format = format.unwrap_or_else(|| detect_format(&text));
    let stage = format!("ingest {}", path.display());
    parse_rate_csv(&text, format)
        .and_then(|p| p.into_series(name))
        .map_err(|e| CliError::at(&stage, e))
}

fn synthetic_log(dataset: &Dataset, seed: u64) -> SourceLog {
    let mut log = SourceLog::new();
    for &y in dataset.years() {
        log.record(y, RATE, DataSource::Synthetic, format!("seed {seed}"));
        log.record(y, IMPACT, DataSource::Synthetic, format!("seed {seed}"));
    }
    log
}

/// Builds the dataset for `seed`: generated in synthetic mode, merged and
/// imputed from the configured files otherwise.
pub fn load_data(config: &PipelineConfig, seed: u64) -> Result<LoadedData, CliError> {
    match config.mode {
        DataMode::Synthetic => {
            let dataset =
                synthetic_dataset(&config.impact, &config.rate, seed).map_err(|e| CliError::at("synthesize", e))?;
            let log = synthetic_log(&dataset, seed);
            Ok(LoadedData { dataset, log })
        }
        DataMode::Files => load_files(config, seed),
    }
}

fn load_files(config: &PipelineConfig, seed: u64) -> Result<LoadedData, CliError> {
    let bounds = YearBounds::default();
    let files = &config.files;
    let fred = files
        .fred
        .as_deref()
        .map(|p| load_rate_file(p, Some(RateFormat::Fred), RATE))
        .transpose()?
        .map(|s| s.restrict(bounds));
    let wb = files
        .worldbank
        .as_deref()
        .map(|p| load_rate_file(p, Some(RateFormat::WorldBank), RATE))
        .transpose()?
        .map(|s| s.restrict(bounds));
    let mut log = SourceLog::new();
    let merged = match (fred, wb) {
        (Some(f), Some(w)) => merge_sources(&f, DataSource::Fred, &w, DataSource::WorldBank, &mut log),
        (Some(f), None) => {
            let empty = AnnualSeries::empty(RATE);
            merge_sources(&f, DataSource::Fred, &empty, DataSource::WorldBank, &mut log)
        }
        (None, Some(w)) => {
            let empty = AnnualSeries::empty(RATE);
            merge_sources(&empty, DataSource::Fred, &w, DataSource::WorldBank, &mut log)
        }
        (None, None) => return Err(CliError::Config("files mode needs a rate file".into())),
    }
    .map_err(|e| CliError::at("merge", e))?;
    let rate = impute_forward(&merged, bounds, files.impute_noise_sd, seed, &mut log)
        .map_err(|e| CliError::at("impute", e))?;

    let impact = match &files.impact {
        Some(p) => {
            let s = load_rate_file(p, Some(RateFormat::WorldBank), IMPACT)?.restrict(bounds);
            for pt in s.points() {
                log.record(pt.year, IMPACT, DataSource::WorldBank, format!("file {}", p.display()));
            }
            s
        }
        None => {
            let cfg = IfGenConfig {
                seed,
                ..config.impact.clone()
            };
            let s = generate_if(&cfg, bounds).map_err(|e| CliError::at("synthesize", e))?;
            for pt in s.points() {
                log.record(pt.year, IMPACT, DataSource::Synthetic, format!("seed {seed}"));
            }
            s
        }
    };
    let dataset = build_dataset(&rate, &impact).map_err(|e| CliError::at("build dataset", e))?;
    let sources = dataset
        .years()
        .iter()
        .map(|y| log.get(RATE, *y).map_or_else(|| "unknown".to_string(), |e| e.source.to_string()))
        .collect();
    let dataset = dataset.with_sources(sources).map_err(|e| CliError::at("build dataset", e))?;
    Ok(LoadedData { dataset, log })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedSummary {
    pub variable: String,
    pub summary: Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodFits {
    pub segment: Segment,
    pub model1: FitResult,
    pub model2: FitResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AltVariableFit {
    pub name: String,
    pub fit: FitResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutlierFit {
    pub drop_years: Vec<Year>,
    pub fit: FitResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessResults {
    pub alternatives: Vec<AltVariableFit>,
    /// `None` when no years were configured for removal.
    pub outlier_removed: Option<OutlierFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtensionResults {
    pub lag_model: FitResult,
    pub quadratic: FitResult,
    pub quantiles: Vec<QuantileFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub seed: u64,
    pub config: PipelineConfig,
    pub n: usize,
    pub descriptives: Vec<NamedSummary>,
    pub correlations: CorrelationMatrix,
    /// Models 1–3 on the full sample with the headline covariance.
    pub full_sample: Vec<FitResult>,
    /// Model 2 on the full sample with Newey-West standard errors.
    pub full_sample_hac: FitResult,
    pub periods: Vec<PeriodFits>,
    pub chow: TestOutcome,
    pub diagnostics: DiagnosticsReport,
    pub prediction: Prediction,
    pub robustness: RobustnessResults,
    pub extensions: ExtensionResults,
}

impl RunReport {
    pub fn model(&self, name: &str) -> Option<&FitResult> {
        self.full_sample.iter().find(|f| f.model == name)
    }

    pub fn period(&self, label: &str) -> Option<&PeriodFits> {
        self.periods.iter().find(|p| p.segment.label == label)
    }

    /// Every regression in the report under a stable key.
    pub fn all_fits(&self) -> Vec<(String, &FitResult)> {
        let mut out: Vec<(String, &FitResult)> =
            self.full_sample.iter().map(|f| (format!("full.{}", f.model), f)).collect();
        out.push(("full.model2_hac".into(), &self.full_sample_hac));
        for p in &self.periods {
            out.push((format!("{}.model1", p.segment.label), &p.model1));
            out.push((format!("{}.model2", p.segment.label), &p.model2));
        }
        for a in &self.robustness.alternatives {
            out.push((format!("alt.{}", a.name), &a.fit));
        }
        if let Some(o) = &self.robustness.outlier_removed {
            out.push(("outlier_removed.model2".into(), &o.fit));
        }
        out.push(("ext.lag".into(), &self.extensions.lag_model));
        out.push(("ext.quadratic".into(), &self.extensions.quadratic));
        out
    }
}

fn fit(dataset: &Dataset, spec: &ModelSpec, stage: &str) -> Result<FitResult, CliError> {
    ols::fit_spec(dataset, spec).map_err(|e| CliError::at(stage, e))
}

/// Model 2 with the rate column taken from an alternative series.
pub fn fit_alternative(
    config: &PipelineConfig,
    dataset: &Dataset,
    alt: &AltRate,
    seed: u64,
) -> Result<AltVariableFit, CliError> {
    let bounds = dataset.bounds();
    let series = load_rate_file(&alt.path, alt.format, RATE)?.restrict(bounds);
    let mut scratch = SourceLog::new();
    let series = impute_forward(&series, bounds, config.files.impute_noise_sd, seed, &mut scratch)
        .map_err(|e| CliError::at(&format!("impute {}", alt.name), e))?;
    let swapped = dataset
        .clone()
        .with_rate(&series)
        .map_err(|e| CliError::at(&format!("alternative {}", alt.name), e))?;
    let spec = ModelSpec::model2()
        .with_name(format!("alt_{}", alt.name))
        .with_covariance(config.covariance);
    Ok(AltVariableFit {
        name: alt.name.clone(),
        fit: fit(&swapped, &spec, &format!("alternative {}", alt.name))?,
    })
}

/// Runs every analysis on an already loaded dataset.
pub fn analyse(config: &PipelineConfig, dataset: &Dataset, seed: u64) -> Result<RunReport, CliError> {
    let cov = config.covariance;
    let mut descriptives = Vec::new();
    for name in [RATE, IMPACT, "log_if", "time_trend"] {
        let values = dataset.column(name).map_err(|e| CliError::at("describe", e))?;
        descriptives.push(NamedSummary {
            variable: name.into(),
            summary: describe_values(&values).map_err(|e| CliError::at("describe", e))?,
        });
    }
    let correlations =
        correlation_matrix(dataset, &[RATE, "log_if", "time_trend"]).map_err(|e| CliError::at("correlate", e))?;

    let specs = [ModelSpec::model1(), ModelSpec::model2(), ModelSpec::model3()];
    let full_sample = specs
        .iter()
        .map(|s| fit(dataset, &s.clone().with_covariance(cov), "full-sample fit"))
        .collect::<Result<Vec<_>, _>>()?;
    let model2 = &full_sample[1];
    let full_sample_hac = fit(
        dataset,
        &ModelSpec::model2()
            .with_name("model2_hac")
            .with_covariance(CovarianceKind::NeweyWest { lags: None }),
        "full-sample HAC fit",
    )?;

    let mut periods = Vec::new();
    for seg in &config.partition.segments {
        let stage = format!("period {} fit", seg.label);
        let m1 = ModelSpec::model1().with_window(seg.start, seg.end).with_covariance(cov);
        let m2 = ModelSpec::model2().with_window(seg.start, seg.end).with_covariance(cov);
        periods.push(PeriodFits {
            segment: seg.clone(),
            model1: fit(dataset, &m1, &stage)?,
            model2: fit(dataset, &m2, &stage)?,
        });
    }

    let chow = diagnostics::chow_test(dataset, &ModelSpec::model2(), config.breakpoint)
        .map_err(|e| CliError::at("chow test", e))?;
    let diag = diagnostics::diagnose(model2, &config.diagnostics).map_err(|e| CliError::at("diagnostics", e))?;
    let prediction = ols::predict_and_score(model2, dataset).map_err(|e| CliError::at("prediction", e))?;

    let alternatives = config
        .robustness
        .alt_rates
        .iter()
        .map(|a| fit_alternative(config, dataset, a, seed))
        .collect::<Result<Vec<_>, _>>()?;
    let outlier_removed = if config.robustness.drop_years.is_empty() {
        None
    } else {
        let spec = ModelSpec::model2()
            .with_name("model2_outlier_removed")
            .with_covariance(cov)
            .excluding(&config.robustness.drop_years);
        Some(OutlierFit {
            drop_years: config.robustness.drop_years.clone(),
            fit: fit(dataset, &spec, "outlier-removed fit")?,
        })
    };

    let ext = |e| CliError::at("extensions", e);
    let lag_model = ols::fit_spec(
        dataset,
        &extend::lag_model_spec(config.extensions.max_lag).with_covariance(cov),
    )
    .map_err(|e| CliError::at("lag model", e))?;
    let quadratic = ols::fit_spec(dataset, &extend::quadratic_spec().with_covariance(cov))
        .map_err(|e| CliError::at("quadratic model", e))?;
    let (design, y) = ols::build_design(dataset, &ModelSpec::model2()).map_err(|e| CliError::at("quantile design", e))?;
    let quantiles = config
        .extensions
        .quantiles
        .iter()
        .map(|&tau| extend::fit_quantile(&design, &y, tau).map_err(ext))
        .collect::<Result<Vec<_>, _>>()?;

    Ok(RunReport {
        seed,
        config: config.clone(),
        n: dataset.len(),
        descriptives,
        correlations,
        full_sample,
        full_sample_hac,
        periods,
        chow,
        diagnostics: diag,
        prediction,
        robustness: RobustnessResults {
            alternatives,
            outlier_removed,
        },
        extensions: ExtensionResults {
            lag_model,
            quadratic,
            quantiles,
        },
    })
}

/// Loads data for `config.seed` and runs every analysis.
pub fn run_pipeline(config: &PipelineConfig) -> Result<(RunReport, LoadedData), CliError> {
    config.validate()?;
    let data = load_data(config, config.seed)?;
    let report = analyse(config, &data.dataset, config.seed)?;
    Ok((report, data))
}

/// Reads a dataset written by `simulate` or `ingest`; the rate provenance is
/// rebuilt from its `source` column.
pub fn load_dataset_csv(path: &Path) -> Result<LoadedData, CliError> {
    let text = read(path)?;
    let dataset = Dataset::from_csv(&text).map_err(|e| CliError::at(&format!("reading {}", path.display()), e))?;
    let mut log = SourceLog::new();
    for (y, s) in dataset.years().iter().zip(dataset.source()) {
        if let Ok(src) = s.parse::<DataSource>() {
            log.record(*y, RATE, src, format!("from {}", path.display()));
        }
    }
    Ok(LoadedData { dataset, log })
}
