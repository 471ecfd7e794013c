//! Command-line surface: subcommands, flag overrides and dispatch.

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::io::Write;
use std::path::{Path, PathBuf};

use monetif_core::diagnostics;
use monetif_core::extend;
use monetif_core::ols::{self, CovarianceKind, ModelSpec};
use monetif_core::series::Year;

use crate::config::{AltRate, DataMode, PipelineConfig, SeedRange};
use crate::emit;
use crate::error::CliError;
use crate::pipeline::{self, LoadedData};
use crate::sweep;

#[derive(Debug, Parser)]
#[command(name = "monetif", version, about = "Real interest rates and journal impact factors: data, models, tables")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset and write dataset.csv.
    Simulate(Common),
    /// Merge FRED / World Bank files into dataset.csv and data_source_log.txt.
    Ingest(Common),
    /// Fit one model and print its table.
    Fit(ModelArgs),
    /// Run the residual diagnostics battery on one model.
    Diagnose(ModelArgs),
    /// Chow break test on Model 2.
    Chow(Common),
    /// Full pipeline: all tables, figure data, report.json and manifest.
    Report(Common),
    /// Run the pipeline over a seed range and aggregate.
    Sweep(Common),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelChoice {
    Model1,
    Model2,
    Model3,
    Lag,
    Quadratic,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value = "model2")]
    pub model: ModelChoice,
}

#[derive(Debug, Default, Args)]
pub struct Common {
    /// JSON config file; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// synthetic or files
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Half-open range A..B
    #[arg(long)]
    pub seeds: Option<String>,
    #[arg(long)]
    pub breakpoint: Option<i32>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// csv, json or text
    #[arg(long)]
    pub format: Option<String>,
    /// Comma-separated years for the outlier-removal variant; empty disables it.
    #[arg(long)]
    pub drop_years: Option<String>,
    /// Alternative rate series (repeatable).
    #[arg(long = "alt-rate")]
    pub alt_rate: Vec<PathBuf>,
    /// hc1 (default), hc0, classical, newey_west or newey_west(L)
    #[arg(long)]
    pub covariance: Option<String>,
    #[arg(long)]
    pub fred: Option<PathBuf>,
    #[arg(long)]
    pub worldbank: Option<PathBuf>,
    /// Annual impact-factor file for files mode.
    #[arg(long)]
    pub impact: Option<PathBuf>,
    /// Existing dataset.csv to analyse instead of loading or generating data.
    #[arg(long)]
    pub data: Option<PathBuf>,
}

fn parse_years(s: &str) -> Result<Vec<Year>, CliError> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse()
                .map(Year)
                .map_err(|_| CliError::Config(format!("bad year {t:?} in --drop-years")))
        })
        .collect()
}

impl Common {
    /// Config file (or defaults) with flag overrides applied.
    pub fn resolve(&self) -> Result<PipelineConfig, CliError> {
        let mut c = match &self.config {
            Some(p) => PipelineConfig::load(p)?,
            None => PipelineConfig::default(),
        };
        if let Some(m) = &self.mode {
            c.mode = m.parse()?;
        }
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(r) = &self.seeds {
            c.seeds = Some(r.parse::<SeedRange>()?);
        }
        if let Some(b) = self.breakpoint {
            c.breakpoint = Year(b);
        }
        if let Some(o) = &self.out {
            c.out_dir = o.clone();
        }
        if let Some(f) = &self.format {
            c.format = f.parse()?;
        }
        if let Some(d) = &self.drop_years {
            c.robustness.drop_years = parse_years(d)?;
        }
        if !self.alt_rate.is_empty() {
            c.robustness.alt_rates = self.alt_rate.iter().map(|p| AltRate::from_path(p)).collect();
        }
        if let Some(cv) = &self.covariance {
            c.covariance = cv.parse::<CovarianceKind>().map_err(CliError::Config)?;
        }
        if self.fred.is_some() || self.worldbank.is_some() {
            c.files.fred = self.fred.clone().or(c.files.fred);
            c.files.worldbank = self.worldbank.clone().or(c.files.worldbank);
            if self.mode.is_none() {
                c.mode = DataMode::Files;
            }
        }
        if let Some(i) = &self.impact {
            c.files.impact = Some(i.clone());
        }
        Ok(c)
    }
}

fn data_for(common: &Common, config: &PipelineConfig) -> Result<LoadedData, CliError> {
    match &common.data {
        Some(p) => pipeline::load_dataset_csv(p),
        None => {
            config.validate()?;
            pipeline::load_data(config, config.seed)
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::io(&format!("writing {}", path.display()), e))
}

fn print(out: &mut dyn Write, s: &str) -> Result<(), CliError> {
    out.write_all(s.as_bytes()).map_err(|e| CliError::io("writing output", e))
}

fn model_spec(choice: ModelChoice, config: &PipelineConfig) -> ModelSpec {
    let spec = match choice {
        ModelChoice::Model1 => ModelSpec::model1(),
        ModelChoice::Model2 => ModelSpec::model2(),
        ModelChoice::Model3 => ModelSpec::model3(),
        ModelChoice::Lag => extend::lag_model_spec(config.extensions.max_lag),
        ModelChoice::Quadratic => extend::quadratic_spec(),
    };
    spec.with_covariance(config.covariance)
}

/// Runs one parsed command, writing human output to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(common) => {
            let mut config = common.resolve()?;
            config.mode = DataMode::Synthetic;
            let data = data_for(&common, &config)?;
            emit::ensure_dir(&config.out_dir)?;
            let path = config.out_dir.join("dataset.csv");
            write_file(&path, &data.dataset.to_csv())?;
            print(out, &format!("wrote {} ({} years)\n", path.display(), data.dataset.len()))
        }
        Command::Ingest(common) => {
            let mut config = common.resolve()?;
            config.mode = DataMode::Files;
            let data = data_for(&common, &config)?;
            emit::ensure_dir(&config.out_dir)?;
            write_file(&config.out_dir.join("dataset.csv"), &data.dataset.to_csv())?;
            write_file(&config.out_dir.join("data_source_log.txt"), &data.log.to_text())?;
            print(
                out,
                &format!(
                    "wrote {} years to {}\n",
                    data.dataset.len(),
                    config.out_dir.join("dataset.csv").display()
                ),
            )
        }
        Command::Fit(args) => {
            let config = args.common.resolve()?;
            let data = data_for(&args.common, &config)?;
            let spec = model_spec(args.model, &config);
            let fit = ols::fit_spec(&data.dataset, &spec).map_err(|e| CliError::at("fit", e))?;
            print(out, &emit::render(&emit::fit_table(&fit), config.format))
        }
        Command::Diagnose(args) => {
            let config = args.common.resolve()?;
            let data = data_for(&args.common, &config)?;
            let spec = model_spec(args.model, &config);
            let fit = ols::fit_spec(&data.dataset, &spec).map_err(|e| CliError::at("fit", e))?;
            let report = diagnostics::diagnose(&fit, &config.diagnostics).map_err(|e| CliError::at("diagnostics", e))?;
            print(out, &emit::render(&emit::diagnostics_table(&report), config.format))
        }
        Command::Chow(common) => {
            let config = common.resolve()?;
            let data = data_for(&common, &config)?;
            let outcome = diagnostics::chow_test(&data.dataset, &ModelSpec::model2(), config.breakpoint)
                .map_err(|e| CliError::at("chow test", e))?;
            print(out, &emit::render(&emit::chow_table(&outcome, config.breakpoint), config.format))
        }
        Command::Report(common) => {
            let config = common.resolve()?;
            let data = data_for(&common, &config)?;
            config.validate()?;
            let report = pipeline::analyse(&config, &data.dataset, config.seed)?;
            let files = emit::emit_all(&report, &data.dataset, &data.log, config.format, &config.out_dir)?;
            print(out, &format!("wrote {} files to {}\n", files.len(), config.out_dir.display()))
        }
        Command::Sweep(common) => {
            let config = common.resolve()?;
            let range = config
                .seeds
                .ok_or_else(|| CliError::Config("sweep needs --seeds A..B or a seeds range in the config".into()))?;
            let summary = sweep::run_seed_sweep(&config, &range.seeds())?;
            emit::ensure_dir(&config.out_dir)?;
            let path = config.out_dir.join("sweep_summary.json");
            write_file(&path, &(summary.to_json() + "\n"))?;
            print(out, &sweep_text(&summary, range))?;
            print(out, &format!("wrote {}\n", path.display()))
        }
    }
}

/// Short human summary of the headline counts.
pub fn sweep_text(s: &sweep::SweepSummary, range: SeedRange) -> String {
    let mut t = format!(
        "seeds {range}: {} completed, {} failed\n",
        s.completed,
        s.failures.len()
    );
    let coef = |fit: &str| s.coefficient(fit, "real_rate");
    for key in ["full.model1", "full.model2", "full.model3"] {
        if let Some(c) = coef(key) {
            t += &format!(
                "{key} real_rate: negative {}, negative and p<0.01 {}, median {:.4}\n",
                c.negative, c.negative_significant_01, c.median
            );
        }
    }
    for c in s.coefficients.iter().filter(|c| c.term == "real_rate" && c.fit.starts_with("Period")) {
        t += &format!(
            "{} real_rate: negative {}, p<0.05 {}, p>=0.10 {}\n",
            c.fit,
            c.negative,
            c.significant_05,
            c.count - c.significant_10
        );
    }
    if let Some(f) = s.fit("full.model2") {
        t += &format!("full.model2 adjusted R²: median {:.4} [q05 {:.4}, q95 {:.4}]\n", f.adj_r2.median, f.adj_r2.q05, f.adj_r2.q95);
    }
    if let Some(c) = &s.chow {
        t += &format!("chow: p<0.01 in {} of {}, median F {:.3}\n", c.significant_01, c.count, c.median_f);
    }
    for c in &s.correlations {
        t += &format!("corr({}, {}): positive {}, negative {}\n", c.a, c.b, c.positive, c.negative);
    }
    t += &format!("all correlation signs as expected: {} of {}\n", s.correlation_signs_expected, s.completed);
    if let Some(d) = &s.drop_years {
        t += &format!("outlier removal: shift < 1 se in {} of {}\n", d.within_one_se, d.count);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::OutputFormat;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("monetif").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn flags_override_defaults() {
        let Command::Report(c) = parse(&[
            "report",
            "--seed",
            "9",
            "--breakpoint",
            "2010",
            "--drop-years",
            "2020, 2021",
            "--covariance",
            "newey_west(2)",
            "--format",
            "json",
        ])
        .command
        else {
            panic!()
        };
        let cfg = c.resolve().unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.breakpoint, Year(2010));
        assert_eq!(cfg.robustness.drop_years, vec![Year(2020), Year(2021)]);
        assert_eq!(cfg.covariance, CovarianceKind::NeweyWest { lags: Some(2) });
        assert_eq!(cfg.format, OutputFormat::Json);
    }

    #[test]
    fn empty_drop_years_disables_variant() {
        let Command::Report(c) = parse(&["report", "--drop-years", ""]).command else {
            panic!()
        };
        assert!(c.resolve().unwrap().robustness.drop_years.is_empty());
    }

    #[test]
    fn rate_files_imply_files_mode() {
        let Command::Ingest(c) = parse(&["ingest", "--fred", "f.csv"]).command else {
            panic!()
        };
        assert_eq!(c.resolve().unwrap().mode, DataMode::Files);
    }

    #[test]
    fn bad_overrides_are_config_errors() {
        for args in [
            &["report", "--format", "xml"][..],
            &["report", "--seeds", "3..1"],
            &["report", "--covariance", "hc9"],
            &["report", "--mode", "web"],
            &["report", "--drop-years", "20x1"],
        ] {
            let Command::Report(c) = parse(args).command else { panic!() };
            assert_eq!(c.resolve().unwrap_err().exit_code(), 2, "{args:?}");
        }
    }

    #[test]
    fn fit_prints_a_table() {
        let mut buf = Vec::new();
        run(parse(&["fit", "--model", "model3", "--seed", "4"]), &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.contains("QE dummy"));
        assert!(s.contains("Observations"));
    }
}
