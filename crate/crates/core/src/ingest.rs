//! CSV ingest for real-rate exports, monthly → annual aggregation, forward-fill
//! imputation and the per-year source log.
//!
//! Two input layouts are understood:
//!
//! - FRED: `DATE,VALUE` with ISO dates (`YYYY-MM-DD`), missing values written as `.`
//! - World Bank: `year,value`, one annual observation per row
//!
//! A leading header row is detected and skipped in either layout.

use chrono::{Datelike, NaiveDate};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

use crate::series::{AnnualSeries, Point, Provenance, SeriesError, Year, YearBounds};

/// ChaCha stream reserved for imputation noise.
pub const IMPUTE_STREAM: u64 = 3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IngestError {
    #[error("input is empty")]
    EmptyInput,
    #[error("unknown input format {0:?} (expected `fred` or `worldbank`)")]
    UnknownFormat(String),
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("duplicate observation for {year}-{month:02}")]
    DuplicateMonth { year: i32, month: u32 },
    #[error("cannot impute {year}: no earlier observation to carry forward")]
    NoPredecessor { year: i32 },
    #[error("noise standard deviation must be finite and non-negative, got {0}")]
    InvalidNoise(f64),
    #[error("cannot merge series {primary} with {fallback}")]
    NameMismatch { primary: String, fallback: String },
    #[error(transparent)]
    Series(#[from] SeriesError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RateFormat {
    Fred,
    WorldBank,
}

impl FromStr for RateFormat {
    type Err = IngestError;
    fn from_str(s: &str) -> Result<Self, IngestError> {
        match s.to_ascii_lowercase().as_str() {
            "fred" => Ok(Self::Fred),
            "worldbank" | "world_bank" | "wb" => Ok(Self::WorldBank),
            _ => Err(IngestError::UnknownFormat(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonthlyObservation {
    pub year: Year,
    pub month: u32,
    pub value: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnualObservation {
    pub year: Year,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParsedRates {
    Monthly(Vec<MonthlyObservation>),
    Annual(Vec<AnnualObservation>),
}

impl ParsedRates {
    pub fn len(&self) -> usize {
        match self {
            Self::Monthly(v) => v.len(),
            Self::Annual(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Collapses either layout to an annual series (monthly data is averaged).
    pub fn into_series(self, name: &str) -> Result<AnnualSeries, IngestError> {
        match self {
            Self::Monthly(m) => annualize(name, &m),
            Self::Annual(a) => Ok(AnnualSeries::from_pairs(
                name,
                a.into_iter().map(|o| (o.year.0, o.value)),
                Provenance::Observed,
            )?),
        }
    }
}

fn split_row(line: &str) -> Vec<&str> {
    line.split(',').map(|f| f.trim().trim_matches('"')).collect()
}

fn parse_value(raw: &str, line: usize) -> Result<Option<f64>, IngestError> {
    if raw == "." || raw.is_empty() || raw.eq_ignore_ascii_case("na") {
        return Ok(None);
    }
    raw.parse::<f64>()
        .map(Some)
        .map_err(|e| IngestError::Malformed {
            line,
            message: format!("value {raw:?}: {e}"),
        })
}

/// Parses a rate export in file order.
pub fn parse_rate_csv(text: &str, format: RateFormat) -> Result<ParsedRates, IngestError> {
    if text.trim().is_empty() {
        return Err(IngestError::EmptyInput);
    }
    let mut rows = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty())
        .peekable();

    // Header detection: the first field of a data row always parses.
    if let Some((_, first)) = rows.peek() {
        let key = split_row(first)[0];
        let is_data = match format {
            RateFormat::Fred => NaiveDate::parse_from_str(key, "%Y-%m-%d").is_ok(),
            RateFormat::WorldBank => key.parse::<i32>().is_ok(),
        };
        if !is_data {
            rows.next();
        }
    }

    match format {
        RateFormat::Fred => {
            let mut out = Vec::new();
            let mut seen = HashSet::new();
            for (line, raw) in rows {
                let f = split_row(raw);
                if f.len() != 2 {
                    return Err(IngestError::Malformed {
                        line,
                        message: format!("expected 2 fields, found {}", f.len()),
                    });
                }
                let date = NaiveDate::parse_from_str(f[0], "%Y-%m-%d").map_err(|e| IngestError::Malformed {
                    line,
                    message: format!("date {:?}: {e}", f[0]),
                })?;
                let (year, month) = (date.year(), date.month());
                if !seen.insert((year, month)) {
                    return Err(IngestError::DuplicateMonth { year, month });
                }
                out.push(MonthlyObservation {
                    year: Year(year),
                    month,
                    value: parse_value(f[1], line)?,
                });
            }
            Ok(ParsedRates::Monthly(out))
        }
        RateFormat::WorldBank => {
            let mut out = Vec::new();
            for (line, raw) in rows {
                let f = split_row(raw);
                if f.len() != 2 {
                    return Err(IngestError::Malformed {
                        line,
                        message: format!("expected 2 fields, found {}", f.len()),
                    });
                }
                let year = f[0].parse::<i32>().map_err(|e| IngestError::Malformed {
                    line,
                    message: format!("year {:?}: {e}", f[0]),
                })?;
                // annual files have no missing-value marker worth keeping
                if let Some(value) = parse_value(f[1], line)? {
                    out.push(AnnualObservation { year: Year(year), value });
                }
            }
            Ok(ParsedRates::Annual(out))
        }
    }
}

/// Guesses the layout from the first data row: ISO dates mean FRED.
pub fn detect_format(text: &str) -> RateFormat {
    let iso = |l: &str| NaiveDate::parse_from_str(split_row(l)[0], "%Y-%m-%d").is_ok();
    if text.lines().filter(|l| !l.trim().is_empty()).take(2).any(iso) {
        RateFormat::Fred
    } else {
        RateFormat::WorldBank
    }
}

/// Annual means of the available months. Years with no values are omitted.
pub fn annualize(name: &str, monthly: &[MonthlyObservation]) -> Result<AnnualSeries, IngestError> {
    let mut seen = HashSet::new();
    let mut sums: BTreeMap<Year, (f64, usize)> = BTreeMap::new();
    for obs in monthly {
        if !seen.insert((obs.year, obs.month)) {
            return Err(IngestError::DuplicateMonth {
                year: obs.year.0,
                month: obs.month,
            });
        }
        if let Some(v) = obs.value {
            let e = sums.entry(obs.year).or_insert((0.0, 0));
            e.0 += v;
            e.1 += 1;
        }
    }
    Ok(AnnualSeries::from_pairs(
        name,
        sums.into_iter().map(|(y, (s, c))| (y.0, s / c as f64)),
        Provenance::Observed,
    )?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DataSource {
    #[serde(rename = "FRED")]
    Fred,
    WorldBank,
    #[serde(rename = "imputed")]
    Imputed,
    #[serde(rename = "synthetic")]
    Synthetic,
}

impl fmt::Display for DataSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Fred => "FRED",
            Self::WorldBank => "WorldBank",
            Self::Imputed => "imputed",
            Self::Synthetic => "synthetic",
        })
    }
}

impl FromStr for DataSource {
    type Err = IngestError;
    fn from_str(s: &str) -> Result<Self, IngestError> {
        match s {
            "FRED" => Ok(Self::Fred),
            "WorldBank" => Ok(Self::WorldBank),
            "imputed" => Ok(Self::Imputed),
            "synthetic" => Ok(Self::Synthetic),
            other => Err(IngestError::UnknownFormat(other.into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceEntry {
    pub year: Year,
    pub variable: String,
    pub source: DataSource,
    pub note: String,
}

/// One entry per `(variable, year)`; later records replace earlier ones.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceLog {
    entries: BTreeMap<(String, Year), SourceEntry>,
}

impl SourceLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, year: Year, variable: &str, source: DataSource, note: impl Into<String>) {
        self.entries.insert(
            (variable.to_string(), year),
            SourceEntry {
                year,
                variable: variable.to_string(),
                source,
                note: note.into(),
            },
        );
    }

    pub fn get(&self, variable: &str, year: Year) -> Option<&SourceEntry> {
        self.entries.get(&(variable.to_string(), year))
    }

    pub fn entries(&self) -> impl Iterator<Item = &SourceEntry> {
        self.entries.values()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn count(&self, variable: &str, source: DataSource) -> usize {
        self.entries()
            .filter(|e| e.variable == variable && e.source == source)
            .count()
    }

    /// Tab-separated `year variable source note`, one line per entry.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in self.entries() {
            out.push_str(&format!("{}\t{}\t{}\t{}\n", e.year, e.variable, e.source, e.note.replace('\t', " ")));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, IngestError> {
        let mut log = Self::new();
        for (i, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let f: Vec<&str> = line.splitn(4, '\t').collect();
            let bad = |m: String| IngestError::Malformed { line: i + 1, message: m };
            if f.len() != 4 {
                return Err(bad(format!("expected 4 tab-separated fields, found {}", f.len())));
            }
            let year = f[0].parse::<i32>().map_err(|e| bad(e.to_string()))?;
            let source = f[2].parse::<DataSource>().map_err(|e| bad(e.to_string()))?;
            log.record(Year(year), f[1], source, f[3]);
        }
        Ok(log)
    }
}

/// Overlays `fallback` under `primary`: primary wins on every year it covers.
pub fn merge_sources(
    primary: &AnnualSeries,
    primary_source: DataSource,
    fallback: &AnnualSeries,
    fallback_source: DataSource,
    log: &mut SourceLog,
) -> Result<AnnualSeries, IngestError> {
    if primary.name() != fallback.name() {
        return Err(IngestError::NameMismatch {
            primary: primary.name().into(),
            fallback: fallback.name().into(),
        });
    }
    let mut merged: BTreeMap<Year, (Point, DataSource)> = BTreeMap::new();
    for p in fallback.points() {
        merged.insert(p.year, (*p, fallback_source));
    }
    for p in primary.points() {
        merged.insert(p.year, (*p, primary_source));
    }
    let name = primary.name();
    let mut points = Vec::with_capacity(merged.len());
    for (year, (p, src)) in merged {
        log.record(year, name, src, "");
        points.push(p);
    }
    Ok(AnnualSeries::new(name, points)?)
}

/// Fills years of `target` that have no value with `value[y−1] + ε`,
/// `ε ~ N(0, noise_sd)`, in increasing year order so chained gaps accumulate noise.
pub fn impute_forward(
    series: &AnnualSeries,
    target: YearBounds,
    noise_sd: f64,
    seed: u64,
    log: &mut SourceLog,
) -> Result<AnnualSeries, IngestError> {
    if !(noise_sd >= 0.0 && noise_sd.is_finite()) {
        return Err(IngestError::InvalidNoise(noise_sd));
    }
    let normal = Normal::new(0.0, noise_sd).map_err(|_| IngestError::InvalidNoise(noise_sd))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(IMPUTE_STREAM);

    let mut points: BTreeMap<Year, Point> = series.points().iter().map(|p| (p.year, *p)).collect();
    for year in target.years() {
        if points.contains_key(&year) {
            continue;
        }
        let prev = points
            .get(&Year(year.0 - 1))
            .copied()
            .ok_or(IngestError::NoPredecessor { year: year.0 })?;
        let eps = if noise_sd > 0.0 { normal.sample(&mut rng) } else { 0.0 };
        points.insert(
            year,
            Point {
                year,
                value: prev.value + eps,
                provenance: Provenance::Imputed,
            },
        );
        log.record(
            year,
            series.name(),
            DataSource::Imputed,
            format!("forward fill from {}, noise sd {noise_sd}", prev.year),
        );
    }
    Ok(AnnualSeries::new(series.name(), points.into_values().collect())?)
}
