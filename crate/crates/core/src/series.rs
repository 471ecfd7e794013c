//! Year-indexed series, the aligned annual [`Dataset`], and descriptive statistics.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

use crate::dist;

/// First year of the sample; also the origin of the time trend.
pub const TREND_ORIGIN: i32 = 1975;
/// First year the QE dummy is switched on.
pub const QE_START: i32 = 2008;
pub const SAMPLE_START: i32 = 1975;
pub const SAMPLE_END: i32 = 2026;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeriesError {
    #[error("year {year} outside allowed range {min}..={max}")]
    YearOutOfBounds { year: i32, min: i32, max: i32 },
    #[error("series {name}: years must be strictly increasing (found {year} after {prev})")]
    NotIncreasing { name: String, prev: i32, year: i32 },
    #[error("series {name}: non-positive value {value} in {year}")]
    NonPositive { name: String, year: i32, value: f64 },
    #[error("need at least {needed} observations, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("variable {0} has zero variance")]
    ZeroVariance(String),
    #[error("unknown column {0}")]
    UnknownColumn(String),
    #[error("slice {start}..={end} is empty or outside the dataset range {min}..={max}")]
    EmptySlice { start: i32, end: i32, min: i32, max: i32 },
    #[error("dataset years are not contiguous: {0}")]
    NotContiguous(String),
    #[error("column {name} has length {got}, expected {expected}")]
    LengthMismatch { name: String, got: usize, expected: usize },
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("csv line {line}: {message}")]
    Csv { line: usize, message: String },
}

/// A calendar year.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Year(pub i32);

impl Year {
    pub fn value(self) -> i32 {
        self.0
    }

    /// Validates against inclusive bounds.
    pub fn checked(value: i32, bounds: YearBounds) -> Result<Self, SeriesError> {
        if value < bounds.min || value > bounds.max {
            Err(SeriesError::YearOutOfBounds {
                year: value,
                min: bounds.min,
                max: bounds.max,
            })
        } else {
            Ok(Year(value))
        }
    }
}

impl fmt::Display for Year {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct YearBounds {
    pub min: i32,
    pub max: i32,
}

impl Default for YearBounds {
    fn default() -> Self {
        Self {
            min: SAMPLE_START,
            max: SAMPLE_END,
        }
    }
}

impl YearBounds {
    pub fn years(&self) -> impl Iterator<Item = Year> {
        (self.min..=self.max).map(Year)
    }

    pub fn len(&self) -> usize {
        (self.max - self.min + 1).max(0) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, y: Year) -> bool {
        (self.min..=self.max).contains(&y.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Observed,
    Imputed,
    Synthetic,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Observed => "observed",
            Self::Imputed => "imputed",
            Self::Synthetic => "synthetic",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub year: Year,
    pub value: f64,
    pub provenance: Provenance,
}

/// One named variable with strictly increasing years.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnualSeries {
    name: String,
    points: Vec<Point>,
}

impl AnnualSeries {
    pub fn new(name: impl Into<String>, points: Vec<Point>) -> Result<Self, SeriesError> {
        let name = name.into();
        for w in points.windows(2) {
            if w[1].year <= w[0].year {
                return Err(SeriesError::NotIncreasing {
                    name,
                    prev: w[0].year.0,
                    year: w[1].year.0,
                });
            }
        }
        Ok(Self { name, points })
    }

    pub fn empty(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            points: Vec::new(),
        }
    }

    /// Builds a series from `(year, value)` pairs sharing one provenance.
    pub fn from_pairs(
        name: impl Into<String>,
        pairs: impl IntoIterator<Item = (i32, f64)>,
        provenance: Provenance,
    ) -> Result<Self, SeriesError> {
        let points = pairs
            .into_iter()
            .map(|(y, value)| Point {
                year: Year(y),
                value,
                provenance,
            })
            .collect();
        Self::new(name, points)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.value).collect()
    }

    pub fn years(&self) -> Vec<Year> {
        self.points.iter().map(|p| p.year).collect()
    }

    pub fn get(&self, year: Year) -> Option<&Point> {
        self.points
            .binary_search_by_key(&year, |p| p.year)
            .ok()
            .map(|i| &self.points[i])
    }

    pub fn first_year(&self) -> Option<Year> {
        self.points.first().map(|p| p.year)
    }

    pub fn last_year(&self) -> Option<Year> {
        self.points.last().map(|p| p.year)
    }

    pub fn is_contiguous(&self) -> bool {
        self.points.windows(2).all(|w| w[1].year.0 == w[0].year.0 + 1)
    }

    /// Years in `bounds` with no point.
    pub fn missing_years(&self, bounds: YearBounds) -> Vec<Year> {
        bounds.years().filter(|y| self.get(*y).is_none()).collect()
    }

    pub fn check_bounds(&self, bounds: YearBounds) -> Result<(), SeriesError> {
        for p in &self.points {
            Year::checked(p.year.0, bounds)?;
        }
        Ok(())
    }

    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            name: self.name.clone(),
            points: self
                .points
                .iter()
                .map(|p| Point {
                    value: f(p.value),
                    ..*p
                })
                .collect(),
        }
    }

    pub fn restrict(&self, bounds: YearBounds) -> Self {
        Self {
            name: self.name.clone(),
            points: self
                .points
                .iter()
                .filter(|p| bounds.contains(p.year))
                .copied()
                .collect(),
        }
    }
}

pub fn make_time_trend(year: Year) -> i32 {
    year.0 - TREND_ORIGIN
}

pub fn make_qe_dummy(year: Year) -> u8 {
    u8::from(year.0 >= QE_START)
}

/// Pointwise natural log; provenance is kept.
pub fn log_transform(series: &AnnualSeries) -> Result<AnnualSeries, SeriesError> {
    if let Some(p) = series.points.iter().find(|p| !(p.value > 0.0)) {
        return Err(SeriesError::NonPositive {
            name: series.name.clone(),
            year: p.year.0,
            value: p.value,
        });
    }
    Ok(series.map_values(f64::ln))
}

/// Moment-based summary.
///
/// `std_dev` uses the n−1 denominator. Skewness and kurtosis are the
/// bias-unadjusted `g1` and `g2 − 3` (excess kurtosis, normal = 0); both are
/// `None` when the sample has zero variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    pub std_dev: f64,
    pub min: f64,
    pub max: f64,
    pub skewness: Option<f64>,
    pub excess_kurtosis: Option<f64>,
}

pub fn describe_values(values: &[f64]) -> Result<Summary, SeriesError> {
    let n = values.len();
    if n < 2 {
        return Err(SeriesError::TooShort { needed: 2, got: n });
    }
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &v in values {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let std_dev = (m2 / (nf - 1.0)).sqrt();
    let (m2, m3, m4) = (m2 / nf, m3 / nf, m4 / nf);
    let (skewness, excess_kurtosis) = if m2 > 0.0 {
        (Some(m3 / m2.powf(1.5)), Some(m4 / (m2 * m2) - 3.0))
    } else {
        (None, None)
    };
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(Summary {
        n,
        mean,
        std_dev,
        min,
        max,
        skewness,
        excess_kurtosis,
    })
}

pub fn describe(series: &AnnualSeries) -> Result<Summary, SeriesError> {
    describe_values(&series.values())
}

pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    if x.is_empty() {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Pearson correlations with two-sided p-values from `t = r √((n−2)/(1−r²))`, df n−2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub variables: Vec<String>,
    pub n: usize,
    pub r: Vec<Vec<f64>>,
    pub p: Vec<Vec<f64>>,
}

impl CorrelationMatrix {
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.variables.iter().position(|v| v == a)?;
        let j = self.variables.iter().position(|v| v == b)?;
        Some(self.r[i][j])
    }

    pub fn p_value(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.variables.iter().position(|v| v == a)?;
        let j = self.variables.iter().position(|v| v == b)?;
        Some(self.p[i][j])
    }
}

pub fn correlation_p_value(r: f64, n: usize) -> f64 {
    if r.abs() >= 1.0 {
        return 0.0;
    }
    let df = n as f64 - 2.0;
    let t = r * (df / (1.0 - r * r)).sqrt();
    dist::t_two_sided_p(t, df).unwrap_or(f64::NAN)
}

pub fn correlation_matrix_of(columns: &[(String, Vec<f64>)]) -> Result<CorrelationMatrix, SeriesError> {
    let n = columns.first().map_or(0, |c| c.1.len());
    if n < 3 {
        return Err(SeriesError::TooShort { needed: 3, got: n });
    }
    for (name, col) in columns {
        if col.len() != n {
            return Err(SeriesError::LengthMismatch {
                name: name.clone(),
                got: col.len(),
                expected: n,
            });
        }
        let first = col[0];
        if col.iter().all(|v| *v == first) {
            return Err(SeriesError::ZeroVariance(name.clone()));
        }
    }
    let k = columns.len();
    let mut r = vec![vec![0.0; k]; k];
    let mut p = vec![vec![0.0; k]; k];
    for i in 0..k {
        r[i][i] = 1.0;
        for j in 0..i {
            let rij = pearson(&columns[i].1, &columns[j].1)
                .ok_or_else(|| SeriesError::ZeroVariance(columns[i].0.clone()))?;
            let pij = correlation_p_value(rij, n);
            r[i][j] = rij;
            r[j][i] = rij;
            p[i][j] = pij;
            p[j][i] = pij;
        }
    }
    Ok(CorrelationMatrix {
        variables: columns.iter().map(|c| c.0.clone()).collect(),
        n,
        r,
        p,
    })
}

pub fn correlation_matrix(dataset: &Dataset, variables: &[&str]) -> Result<CorrelationMatrix, SeriesError> {
    let cols = variables
        .iter()
        .map(|v| Ok((v.to_string(), dataset.column(v)?)))
        .collect::<Result<Vec<_>, SeriesError>>()?;
    correlation_matrix_of(&cols)
}

/// Aligned annual panel over a contiguous year range.
///
/// `log_if`, `time_trend` and `qe_dummy` are always derived from
/// `impact_factor` and the years; they are never set independently.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    years: Vec<Year>,
    real_rate: Vec<f64>,
    impact_factor: Vec<f64>,
    log_if: Vec<f64>,
    time_trend: Vec<i32>,
    qe_dummy: Vec<u8>,
    source: Vec<String>,
    #[serde(default)]
    extra: BTreeMap<String, Vec<f64>>,
}

pub const CSV_HEADER: &str = "year,real_rate,impact_factor,log_if,time_trend,qe_dummy,source";

impl Dataset {
    /// Assembles a dataset from aligned columns, deriving log/trend/dummy.
    pub fn new(
        years: Vec<Year>,
        real_rate: Vec<f64>,
        impact_factor: Vec<f64>,
        source: Vec<String>,
    ) -> Result<Self, SeriesError> {
        let n = years.len();
        if n == 0 {
            return Err(SeriesError::TooShort { needed: 1, got: 0 });
        }
        for (name, len) in [
            ("real_rate", real_rate.len()),
            ("impact_factor", impact_factor.len()),
            ("source", source.len()),
        ] {
            if len != n {
                return Err(SeriesError::LengthMismatch {
                    name: name.into(),
                    got: len,
                    expected: n,
                });
            }
        }
        if let Some(w) = years.windows(2).find(|w| w[1].0 != w[0].0 + 1) {
            return Err(SeriesError::NotContiguous(format!("{} followed by {}", w[0], w[1])));
        }
        if let Some((y, v)) = years
            .iter()
            .zip(&impact_factor)
            .find(|(_, v)| !(**v > 0.0))
        {
            return Err(SeriesError::NonPositive {
                name: "impact_factor".into(),
                year: y.0,
                value: *v,
            });
        }
        let log_if = impact_factor.iter().map(|v| v.ln()).collect();
        let time_trend = years.iter().map(|y| make_time_trend(*y)).collect();
        let qe_dummy = years.iter().map(|y| make_qe_dummy(*y)).collect();
        Ok(Self {
            years,
            real_rate,
            impact_factor,
            log_if,
            time_trend,
            qe_dummy,
            source,
            extra: BTreeMap::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.years.len()
    }

    pub fn is_empty(&self) -> bool {
        self.years.is_empty()
    }

    pub fn years(&self) -> &[Year] {
        &self.years
    }

    pub fn first_year(&self) -> Year {
        self.years[0]
    }

    pub fn last_year(&self) -> Year {
        *self.years.last().expect("dataset is never empty")
    }

    pub fn bounds(&self) -> YearBounds {
        YearBounds {
            min: self.first_year().0,
            max: self.last_year().0,
        }
    }

    pub fn real_rate(&self) -> &[f64] {
        &self.real_rate
    }

    pub fn impact_factor(&self) -> &[f64] {
        &self.impact_factor
    }

    pub fn log_if(&self) -> &[f64] {
        &self.log_if
    }

    pub fn time_trend(&self) -> &[i32] {
        &self.time_trend
    }

    pub fn qe_dummy(&self) -> &[u8] {
        &self.qe_dummy
    }

    pub fn source(&self) -> &[String] {
        &self.source
    }

    pub fn index_of(&self, year: Year) -> Option<usize> {
        let off = year.0 - self.first_year().0;
        (off >= 0 && (off as usize) < self.len()).then_some(off as usize)
    }

    /// Any named column as reals: the six standard columns or an extra one.
    pub fn column(&self, name: &str) -> Result<Vec<f64>, SeriesError> {
        Ok(match name {
            "year" => self.years.iter().map(|y| y.0 as f64).collect(),
            "real_rate" => self.real_rate.clone(),
            "impact_factor" => self.impact_factor.clone(),
            "log_if" => self.log_if.clone(),
            "time_trend" => self.time_trend.iter().map(|&t| t as f64).collect(),
            "qe_dummy" => self.qe_dummy.iter().map(|&d| d as f64).collect(),
            other => self
                .extra
                .get(other)
                .cloned()
                .ok_or_else(|| SeriesError::UnknownColumn(other.to_string()))?,
        })
    }

    pub fn extra_columns(&self) -> impl Iterator<Item = &String> {
        self.extra.keys()
    }

    /// Attaches an extra aligned column; the series must cover every dataset year.
    pub fn with_column(mut self, name: &str, series: &AnnualSeries) -> Result<Self, SeriesError> {
        let values = self.align(series)?;
        self.extra.insert(name.to_string(), values);
        Ok(self)
    }

    /// Replaces the real-rate column (alternative monetary-policy variable).
    pub fn with_rate(mut self, series: &AnnualSeries) -> Result<Self, SeriesError> {
        self.real_rate = self.align(series)?;
        Ok(self)
    }

    pub fn with_sources(mut self, source: Vec<String>) -> Result<Self, SeriesError> {
        if source.len() != self.len() {
            return Err(SeriesError::LengthMismatch {
                name: "source".into(),
                got: source.len(),
                expected: self.len(),
            });
        }
        self.source = source;
        Ok(self)
    }

    fn align(&self, series: &AnnualSeries) -> Result<Vec<f64>, SeriesError> {
        let missing = series.missing_years(self.bounds());
        if !missing.is_empty() {
            let list: Vec<String> = missing.iter().map(Year::to_string).collect();
            return Err(SeriesError::NotContiguous(format!(
                "series {} lacks years {}",
                series.name(),
                list.join(", ")
            )));
        }
        Ok(self
            .years
            .iter()
            .map(|y| series.get(*y).expect("checked above").value)
            .collect())
    }

    /// Inclusive sub-range. Derived columns keep their values (trend origin stays 1975).
    pub fn slice(&self, start: Year, end: Year) -> Result<Self, SeriesError> {
        let b = self.bounds();
        if start > end || start.0 < b.min || end.0 > b.max {
            return Err(SeriesError::EmptySlice {
                start: start.0,
                end: end.0,
                min: b.min,
                max: b.max,
            });
        }
        let lo = self.index_of(start).expect("in range");
        let hi = self.index_of(end).expect("in range") + 1;
        Ok(Self {
            years: self.years[lo..hi].to_vec(),
            real_rate: self.real_rate[lo..hi].to_vec(),
            impact_factor: self.impact_factor[lo..hi].to_vec(),
            log_if: self.log_if[lo..hi].to_vec(),
            time_trend: self.time_trend[lo..hi].to_vec(),
            qe_dummy: self.qe_dummy[lo..hi].to_vec(),
            source: self.source[lo..hi].to_vec(),
            extra: self
                .extra
                .iter()
                .map(|(k, v)| (k.clone(), v[lo..hi].to_vec()))
                .collect(),
        })
    }

    /// Stacks `other` after `self`; years must continue without a gap.
    pub fn concat(&self, other: &Dataset) -> Result<Self, SeriesError> {
        if other.first_year().0 != self.last_year().0 + 1 {
            return Err(SeriesError::NotContiguous(format!(
                "{} followed by {}",
                self.last_year(),
                other.first_year()
            )));
        }
        let mut out = self.clone();
        out.years.extend_from_slice(&other.years);
        out.real_rate.extend_from_slice(&other.real_rate);
        out.impact_factor.extend_from_slice(&other.impact_factor);
        out.log_if.extend_from_slice(&other.log_if);
        out.time_trend.extend_from_slice(&other.time_trend);
        out.qe_dummy.extend_from_slice(&other.qe_dummy);
        out.source.extend_from_slice(&other.source);
        for (k, v) in out.extra.iter_mut() {
            let more = other
                .extra
                .get(k)
                .ok_or_else(|| SeriesError::UnknownColumn(k.clone()))?;
            v.extend_from_slice(more);
        }
        Ok(out)
    }

    /// One row per year under [`CSV_HEADER`]; floats use shortest round-trip formatting.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for i in 0..self.len() {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                self.years[i],
                self.real_rate[i],
                self.impact_factor[i],
                self.log_if[i],
                self.time_trend[i],
                self.qe_dummy[i],
                self.source[i]
            ));
        }
        out
    }

    /// Parses [`Dataset::to_csv`] output. Derived columns are recomputed and
    /// must agree with the file.
    pub fn from_csv(text: &str) -> Result<Self, SeriesError> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == CSV_HEADER => {}
            _ => {
                return Err(SeriesError::Csv {
                    line: 1,
                    message: format!("expected header `{CSV_HEADER}`"),
                })
            }
        }
        let (mut years, mut rate, mut impact, mut source) = (vec![], vec![], vec![], vec![]);
        let mut logs = vec![];
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let lineno = i + 1;
            let bad = |message: String| SeriesError::Csv { line: lineno, message };
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 7 {
                return Err(bad(format!("expected 7 fields, found {}", fields.len())));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|e| bad(format!("{s:?}: {e}")));
            years.push(Year(
                fields[0].parse().map_err(|e| bad(format!("year {:?}: {e}", fields[0])))?,
            ));
            rate.push(num(fields[1])?);
            impact.push(num(fields[2])?);
            logs.push((lineno, num(fields[3])?));
            source.push(fields[6].to_string());
        }
        let ds = Self::new(years, rate, impact, source)?;
        for ((line, stored), derived) in logs.into_iter().zip(&ds.log_if) {
            if (stored - derived).abs() > 1e-9 * derived.abs().max(1.0) {
                return Err(SeriesError::Csv {
                    line,
                    message: format!("log_if {stored} disagrees with ln(impact_factor) = {derived}"),
                });
            }
        }
        Ok(ds)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub label: String,
    pub start: Year,
    pub end: Year,
}

/// Ordered, disjoint, inclusive segments covering a dataset's range.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodPartition {
    pub segments: Vec<Segment>,
}

impl Default for PeriodPartition {
    fn default() -> Self {
        let seg = |label: &str, a, b| Segment {
            label: label.into(),
            start: Year(a),
            end: Year(b),
        };
        Self {
            segments: vec![
                seg("Period 1", 1975, 2000),
                seg("Period 2", 2001, 2020),
                seg("Period 3", 2021, 2026),
            ],
        }
    }
}

impl PeriodPartition {
    pub fn validate(&self, bounds: YearBounds) -> Result<(), SeriesError> {
        let bad = |m: String| Err(SeriesError::InvalidPartition(m));
        let first = match self.segments.first() {
            Some(s) => s,
            None => return bad("no segments".into()),
        };
        if first.start.0 != bounds.min {
            return bad(format!("first segment starts at {}, data at {}", first.start, bounds.min));
        }
        for s in &self.segments {
            if s.start > s.end {
                return bad(format!("segment {} is reversed", s.label));
            }
        }
        for w in self.segments.windows(2) {
            if w[1].start.0 != w[0].end.0 + 1 {
                return bad(format!("gap or overlap between {} and {}", w[0].label, w[1].label));
            }
        }
        let last = self.segments.last().expect("non-empty");
        if last.end.0 != bounds.max {
            return bad(format!("last segment ends at {}, data at {}", last.end, bounds.max));
        }
        Ok(())
    }

    pub fn label_of(&self, year: Year) -> Option<&str> {
        self.segments
            .iter()
            .find(|s| s.start <= year && year <= s.end)
            .map(|s| s.label.as_str())
    }
}

pub fn slice_period(dataset: &Dataset, segment: &Segment) -> Result<Dataset, SeriesError> {
    dataset.slice(segment.start, segment.end)
}
