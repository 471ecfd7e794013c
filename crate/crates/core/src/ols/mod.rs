//! Model specification, design matrices and least-squares estimation.
//!
//! Fits are solved by Householder QR. A column is rejected as collinear when
//! its `|R_jj|` is below `1e-10` times the largest diagonal magnitude.

mod covariance;

pub use covariance::{
    bartlett_weights, covariance_classical, covariance_hc, covariance_newey_west, newey_west_auto_lag, HcFlavor,
};

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

use crate::dist;
use crate::linalg::{Matrix, Qr};
use crate::serde_f64;
use crate::series::{pearson, Dataset, SeriesError, Year, YearBounds};

pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OlsError {
    #[error("need more observations than coefficients (n = {n}, k = {k})")]
    TooFewObservations { n: usize, k: usize },
    #[error("design matrix is rank deficient; collinear columns: {}", columns.join(", "))]
    RankDeficient { columns: Vec<String> },
    #[error("term {0} appears more than once")]
    DuplicateTerm(String),
    #[error("unknown term {0:?}")]
    UnknownTerm(String),
    #[error("window {min}..={max} is empty or outside the data range")]
    EmptyWindow { min: i32, max: i32 },
    #[error("lag count {lags} must be smaller than the sample size {n}")]
    InvalidLag { lags: usize, n: usize },
    #[error("response and design have different lengths ({response} vs {design})")]
    LengthMismatch { response: usize, design: usize },
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// One regressor column.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Term {
    Intercept,
    RealRate,
    TimeTrend,
    QeDummy,
    /// `real_rate × qe_dummy`
    RateXQe,
    /// `real_rate` lagged by k years
    RateLag(usize),
    RateSquared,
    /// Any other dataset column, by name
    Column(String),
}

impl Term {
    pub fn label(&self) -> String {
        match self {
            Self::Intercept => "const".into(),
            Self::RealRate => "real_rate".into(),
            Self::TimeTrend => "time_trend".into(),
            Self::QeDummy => "qe_dummy".into(),
            Self::RateXQe => "real_rate_x_qe".into(),
            Self::RateLag(k) => format!("real_rate_lag{k}"),
            Self::RateSquared => "real_rate_sq".into(),
            Self::Column(c) => c.clone(),
        }
    }

    fn lag(&self) -> usize {
        match self {
            Self::RateLag(k) => *k,
            _ => 0,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl From<Term> for String {
    fn from(t: Term) -> String {
        t.label()
    }
}

impl FromStr for Term {
    type Err = OlsError;
    fn from_str(s: &str) -> Result<Self, OlsError> {
        Ok(match s {
            "const" | "intercept" => Self::Intercept,
            "real_rate" => Self::RealRate,
            "time_trend" => Self::TimeTrend,
            "qe_dummy" => Self::QeDummy,
            "real_rate_x_qe" => Self::RateXQe,
            "real_rate_sq" => Self::RateSquared,
            other => match other.strip_prefix("real_rate_lag").map(str::parse::<usize>) {
                Some(Ok(k)) => Self::RateLag(k),
                Some(Err(_)) => return Err(OlsError::UnknownTerm(other.into())),
                None if other.is_empty() => return Err(OlsError::UnknownTerm(other.into())),
                None => Self::Column(other.into()),
            },
        })
    }
}

impl TryFrom<String> for Term {
    type Error = OlsError;
    fn try_from(s: String) -> Result<Self, OlsError> {
        s.parse()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CovarianceKind {
    Classical,
    Hc0,
    Hc1,
    /// `lags: None` selects `floor(4·(n/100)^(2/9))`.
    NeweyWest { lags: Option<usize> },
}

impl fmt::Display for CovarianceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Classical => f.write_str("classical"),
            Self::Hc0 => f.write_str("hc0"),
            Self::Hc1 => f.write_str("hc1"),
            Self::NeweyWest { lags: None } => f.write_str("newey_west"),
            Self::NeweyWest { lags: Some(l) } => write!(f, "newey_west({l})"),
        }
    }
}

impl FromStr for CovarianceKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "classical" | "ols" => Ok(Self::Classical),
            "hc0" => Ok(Self::Hc0),
            "hc1" | "robust" => Ok(Self::Hc1),
            "newey_west" | "nw" | "hac" => Ok(Self::NeweyWest { lags: None }),
            _ => {
                let inner = s
                    .strip_prefix("newey_west(")
                    .or_else(|| s.strip_prefix("nw("))
                    .and_then(|r| r.strip_suffix(')'));
                match inner.map(str::parse::<usize>) {
                    Some(Ok(l)) => Ok(Self::NeweyWest { lags: Some(l) }),
                    _ => Err(format!("unknown covariance estimator {s:?}")),
                }
            }
        }
    }
}

/// Declarative regression: response, ordered terms, covariance and sample window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub name: String,
    pub response: String,
    pub terms: Vec<Term>,
    pub covariance: CovarianceKind,
    /// Inclusive year window; `None` means the whole dataset.
    #[serde(default)]
    pub window: Option<YearBounds>,
    #[serde(default)]
    pub exclude_years: Vec<Year>,
}

impl ModelSpec {
    pub fn new(name: impl Into<String>, terms: Vec<Term>) -> Self {
        Self {
            name: name.into(),
            response: "log_if".into(),
            terms,
            covariance: CovarianceKind::Hc1,
            window: None,
            exclude_years: Vec::new(),
        }
    }

    /// `log_if ~ const + real_rate`
    pub fn model1() -> Self {
        Self::new("model1", vec![Term::Intercept, Term::RealRate])
    }

    /// `log_if ~ const + real_rate + time_trend`
    pub fn model2() -> Self {
        Self::new("model2", vec![Term::Intercept, Term::RealRate, Term::TimeTrend])
    }

    /// `log_if ~ const + real_rate + qe_dummy + real_rate×qe + time_trend`
    pub fn model3() -> Self {
        Self::new(
            "model3",
            vec![Term::Intercept, Term::RealRate, Term::QeDummy, Term::RateXQe, Term::TimeTrend],
        )
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_window(mut self, start: Year, end: Year) -> Self {
        self.window = Some(YearBounds {
            min: start.0,
            max: end.0,
        });
        self
    }

    pub fn with_covariance(mut self, covariance: CovarianceKind) -> Self {
        self.covariance = covariance;
        self
    }

    pub fn excluding(mut self, years: &[Year]) -> Self {
        self.exclude_years.extend_from_slice(years);
        self
    }

    pub fn max_lag(&self) -> usize {
        self.terms.iter().map(Term::lag).max().unwrap_or(0)
    }

    pub fn validate(&self) -> Result<(), OlsError> {
        for (i, t) in self.terms.iter().enumerate() {
            if self.terms[..i].contains(t) {
                return Err(OlsError::DuplicateTerm(t.label()));
            }
        }
        Ok(())
    }
}

/// Regressor matrix with column labels and the year of each row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignMatrix {
    pub labels: Vec<String>,
    pub years: Vec<Year>,
    pub x: Matrix,
}

impl DesignMatrix {
    pub fn new(labels: Vec<String>, years: Vec<Year>, x: Matrix) -> Self {
        assert_eq!(labels.len(), x.cols());
        assert_eq!(years.len(), x.rows());
        Self { labels, years, x }
    }

    /// Design without year semantics (rows numbered from year 0).
    pub fn from_columns(labels: &[&str], columns: &[Vec<f64>]) -> Self {
        let x = Matrix::from_columns(columns);
        let years = (0..x.rows() as i32).map(Year).collect();
        Self::new(labels.iter().map(|s| s.to_string()).collect(), years, x)
    }

    pub fn n(&self) -> usize {
        self.x.rows()
    }

    pub fn k(&self) -> usize {
        self.x.cols()
    }

    pub fn column_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn has_intercept(&self) -> bool {
        self.column_index("const").is_some()
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        Self {
            labels: self.labels.clone(),
            years: idx.iter().map(|&i| self.years[i]).collect(),
            x: self.x.select_rows(idx),
        }
    }
}

/// Builds the regressor matrix and response for `spec` on `dataset`.
///
/// Rows are the window years whose longest lag still falls inside the
/// window, minus any excluded years.
pub fn build_design(dataset: &Dataset, spec: &ModelSpec) -> Result<(DesignMatrix, Vec<f64>), OlsError> {
    spec.validate()?;
    let data = dataset.bounds();
    let window = spec.window.unwrap_or(data);
    if window.is_empty() || window.min < data.min || window.max > data.max {
        return Err(OlsError::EmptyWindow {
            min: window.min,
            max: window.max,
        });
    }
    let max_lag = spec.max_lag() as i32;
    let first = window.min + max_lag;
    let rows: Vec<usize> = (first..=window.max)
        .map(Year)
        .filter(|y| !spec.exclude_years.contains(y))
        .map(|y| dataset.index_of(y).expect("inside data range"))
        .collect();
    if rows.is_empty() {
        return Err(OlsError::EmptyWindow {
            min: window.min,
            max: window.max,
        });
    }

    let rate = dataset.real_rate();
    let qe = dataset.qe_dummy();
    let mut columns = Vec::with_capacity(spec.terms.len());
    for term in &spec.terms {
        let col: Vec<f64> = match term {
            Term::Intercept => vec![1.0; rows.len()],
            Term::RealRate => rows.iter().map(|&i| rate[i]).collect(),
            Term::TimeTrend => rows.iter().map(|&i| dataset.time_trend()[i] as f64).collect(),
            Term::QeDummy => rows.iter().map(|&i| qe[i] as f64).collect(),
            Term::RateXQe => rows.iter().map(|&i| rate[i] * qe[i] as f64).collect(),
            Term::RateLag(k) => rows.iter().map(|&i| rate[i - k]).collect(),
            Term::RateSquared => rows.iter().map(|&i| rate[i] * rate[i]).collect(),
            Term::Column(name) => {
                let all = dataset.column(name)?;
                rows.iter().map(|&i| all[i]).collect()
            }
        };
        columns.push(col);
    }
    let response_all = dataset.column(&spec.response)?;
    let response = rows.iter().map(|&i| response_all[i]).collect();
    let years = rows.iter().map(|&i| dataset.years()[i]).collect();
    let labels = spec.terms.iter().map(Term::label).collect();
    Ok((DesignMatrix::new(labels, years, Matrix::from_columns(&columns)), response))
}

/// Gaussian-likelihood information criteria, constant term included:
/// `aic = n·ln(ssr/n) + 2k + n(1 + ln 2π)`, `bic` uses `k·ln n` for the penalty.
pub fn information_criteria(ssr: f64, n: usize, k: usize) -> (f64, f64) {
    let nf = n as f64;
    let base = nf * (ssr / nf).ln() + nf * (1.0 + (2.0 * std::f64::consts::PI).ln());
    (base + 2.0 * k as f64, base + k as f64 * nf.ln())
}

pub mod flags {
    pub const CONSTANT_RESPONSE: &str = "constant_response";
    pub const PERFECT_FIT: &str = "perfect_fit";
}

/// Everything a fit produces. Inference uses `n − k` degrees of freedom for
/// every covariance estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: String,
    pub terms: Vec<String>,
    pub coefficients: Vec<f64>,
    pub covariance_kind: CovarianceKind,
    pub newey_west_lags: Option<usize>,
    pub covariance: Vec<Vec<f64>>,
    pub std_errors: Vec<f64>,
    #[serde(with = "serde_f64::vec")]
    pub t_stats: Vec<f64>,
    pub p_values: Vec<f64>,
    pub conf_intervals: Vec<[f64; 2]>,
    pub years: Vec<Year>,
    pub response: Vec<f64>,
    pub fitted: Vec<f64>,
    pub residuals: Vec<f64>,
    pub ssr: f64,
    pub sst: f64,
    pub r2: f64,
    pub adj_r2: f64,
    #[serde(with = "serde_f64::option")]
    pub f_stat: Option<f64>,
    pub f_df: [f64; 2],
    pub f_p_value: Option<f64>,
    #[serde(with = "serde_f64")]
    pub aic: f64,
    #[serde(with = "serde_f64")]
    pub bic: f64,
    pub n: usize,
    pub k: usize,
    pub sigma2: f64,
    /// `β(real_rate) + β(real_rate_x_qe)` when both are in the model.
    pub post_qe_rate_effect: Option<f64>,
    pub flags: Vec<String>,
    pub design: DesignMatrix,
    pub spec: Option<ModelSpec>,
}

impl FitResult {
    pub fn index(&self, label: &str) -> Option<usize> {
        self.terms.iter().position(|t| t == label)
    }

    pub fn coef(&self, label: &str) -> Option<f64> {
        self.index(label).map(|i| self.coefficients[i])
    }

    pub fn se(&self, label: &str) -> Option<f64> {
        self.index(label).map(|i| self.std_errors[i])
    }

    pub fn p(&self, label: &str) -> Option<f64> {
        self.index(label).map(|i| self.p_values[i])
    }

    pub fn has_flag(&self, flag: &str) -> bool {
        self.flags.iter().any(|f| f == flag)
    }

    pub fn covariance_matrix(&self) -> Matrix {
        Matrix::from_rows(&self.covariance)
    }
}

/// Ordinary least squares on a prepared design.
pub fn fit(design: &DesignMatrix, response: &[f64], covariance: CovarianceKind) -> Result<FitResult, OlsError> {
    let (n, k) = (design.n(), design.k());
    if response.len() != n {
        return Err(OlsError::LengthMismatch {
            response: response.len(),
            design: n,
        });
    }
    if n <= k {
        return Err(OlsError::TooFewObservations { n, k });
    }
    let qr = Qr::new(&design.x);
    let bad = qr.deficient_columns(RANK_TOLERANCE);
    if !bad.is_empty() {
        return Err(OlsError::RankDeficient {
            columns: bad.iter().map(|&j| design.labels[j].clone()).collect(),
        });
    }
    let beta = qr.solve(response);
    let fitted = design.x.mul_vec(&beta);
    let residuals: Vec<f64> = response.iter().zip(&fitted).map(|(y, f)| y - f).collect();
    let ssr: f64 = residuals.iter().map(|e| e * e).sum();
    let mean = response.iter().sum::<f64>() / n as f64;
    let sst: f64 = response.iter().map(|y| (y - mean).powi(2)).sum();
    let df_resid = (n - k) as f64;
    let sigma2 = ssr / df_resid;

    let mut flags = Vec::new();
    let scale2: f64 = response.iter().map(|y| y * y).sum::<f64>().max(f64::MIN_POSITIVE);
    let perfect = ssr <= 1e-26 * scale2;
    let r2 = if sst > 0.0 {
        1.0 - ssr / sst
    } else {
        flags.push(flags::CONSTANT_RESPONSE.to_string());
        0.0
    };
    let adj_r2 = 1.0 - (1.0 - r2) * (n as f64 - 1.0) / df_resid;

    let xtx_inv = qr.gram_inverse();
    let (cov, nw_lags) = match covariance {
        CovarianceKind::Classical => (covariance_classical(&xtx_inv, sigma2), None),
        CovarianceKind::Hc0 => (covariance_hc(&design.x, &xtx_inv, &residuals, HcFlavor::Hc0), None),
        CovarianceKind::Hc1 => (covariance_hc(&design.x, &xtx_inv, &residuals, HcFlavor::Hc1), None),
        CovarianceKind::NeweyWest { lags } => {
            let (m, l) = covariance_newey_west(&design.x, &xtx_inv, &residuals, lags)?;
            (m, Some(l))
        }
    };

    let std_errors: Vec<f64> = cov.diagonal().iter().map(|v| v.max(0.0).sqrt()).collect();
    let t_crit = dist::t_critical(0.975, df_resid).expect("df > 0");
    let mut t_stats = Vec::with_capacity(k);
    let mut p_values = Vec::with_capacity(k);
    let mut conf_intervals = Vec::with_capacity(k);
    for (&b, &se) in beta.iter().zip(&std_errors) {
        let (t, p) = if se > 0.0 {
            let t = b / se;
            (t, dist::t_two_sided_p(t, df_resid).expect("df > 0"))
        } else if b == 0.0 {
            (0.0, 1.0)
        } else {
            (f64::INFINITY.copysign(b), 0.0)
        };
        t_stats.push(t);
        p_values.push(p);
        conf_intervals.push([b - t_crit * se, b + t_crit * se]);
    }

    let (f_stat, f_p_value) = if design.has_intercept() && k > 1 {
        let df1 = (k - 1) as f64;
        let f = if r2 >= 1.0 || perfect {
            f64::INFINITY
        } else {
            (r2 / df1) / ((1.0 - r2) / df_resid)
        };
        let p = if f.is_finite() && f >= 0.0 {
            dist::f_sf(f, df1, df_resid).ok()
        } else if f.is_infinite() {
            Some(0.0)
        } else {
            None
        };
        (Some(f), p)
    } else {
        (None, None)
    };

    let (aic, bic) = if perfect {
        flags.push(flags::PERFECT_FIT.to_string());
        (f64::NEG_INFINITY, f64::NEG_INFINITY)
    } else {
        information_criteria(ssr, n, k)
    };

    let post_qe_rate_effect = match (design.column_index("real_rate"), design.column_index("real_rate_x_qe")) {
        (Some(a), Some(b)) => Some(beta[a] + beta[b]),
        _ => None,
    };

    Ok(FitResult {
        model: String::new(),
        terms: design.labels.clone(),
        coefficients: beta,
        covariance_kind: covariance,
        newey_west_lags: nw_lags,
        covariance: cov.to_rows(),
        std_errors,
        t_stats,
        p_values,
        conf_intervals,
        years: design.years.clone(),
        response: response.to_vec(),
        fitted,
        residuals,
        ssr,
        sst,
        r2,
        adj_r2,
        f_stat,
        f_df: [(k.saturating_sub(1)) as f64, df_resid],
        f_p_value,
        aic,
        bic,
        n,
        k,
        sigma2,
        post_qe_rate_effect,
        flags,
        design: design.clone(),
        spec: None,
    })
}

/// Builds the design for `spec` and fits it with the spec's covariance estimator.
pub fn fit_spec(dataset: &Dataset, spec: &ModelSpec) -> Result<FitResult, OlsError> {
    let (design, y) = build_design(dataset, spec)?;
    let mut fit = fit(&design, &y, spec.covariance)?;
    fit.model = spec.name.clone();
    fit.spec = Some(spec.clone());
    Ok(fit)
}

/// Refits the same design with another covariance estimator.
pub fn refit_with(fit_result: &FitResult, covariance: CovarianceKind) -> Result<FitResult, OlsError> {
    let mut out = fit(&fit_result.design, &fit_result.response, covariance)?;
    out.model = fit_result.model.clone();
    out.spec = fit_result.spec.clone().map(|s| s.with_covariance(covariance));
    Ok(out)
}

/// Wald F test that the named coefficients are jointly zero, using the fit's
/// covariance. Returns `(F, p, q)` with `F ~ F(q, n−k)`.
pub fn wald_test(fit: &FitResult, labels: &[&str]) -> Result<(f64, f64, usize), OlsError> {
    let idx = labels
        .iter()
        .map(|l| fit.index(l).ok_or_else(|| OlsError::UnknownTerm(l.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    let q = idx.len();
    let sub = Matrix::from_rows(
        &idx.iter()
            .map(|&i| idx.iter().map(|&j| fit.covariance[i][j]).collect())
            .collect::<Vec<Vec<f64>>>(),
    );
    let b: Vec<f64> = idx.iter().map(|&i| fit.coefficients[i]).collect();
    let qr = Qr::new(&sub);
    if !qr.deficient_columns(RANK_TOLERANCE).is_empty() {
        return Err(OlsError::RankDeficient {
            columns: labels.iter().map(|s| s.to_string()).collect(),
        });
    }
    let sol = qr.solve(&b);
    let w: f64 = b.iter().zip(&sol).map(|(a, c)| a * c).sum();
    let f = w / q as f64;
    let df2 = (fit.n - fit.k) as f64;
    let p = dist::f_sf(f.max(0.0), q as f64, df2).expect("positive df");
    Ok((f, p, q))
}

/// In-sample fit quality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub years: Vec<Year>,
    pub actual: Vec<f64>,
    pub predicted: Vec<f64>,
    /// Pearson correlation of actual and predicted; `None` when either is constant.
    pub corr: Option<f64>,
    pub rmse: f64,
}

/// Fitted values over the fit's window on `dataset`, with correlation and RMSE.
pub fn predict_and_score(fit: &FitResult, dataset: &Dataset) -> Result<Prediction, OlsError> {
    let (design, actual) = match &fit.spec {
        Some(spec) => build_design(dataset, spec)?,
        None => (fit.design.clone(), fit.response.clone()),
    };
    if design.k() != fit.coefficients.len() {
        return Err(OlsError::LengthMismatch {
            response: fit.coefficients.len(),
            design: design.k(),
        });
    }
    let predicted = design.x.mul_vec(&fit.coefficients);
    let n = actual.len() as f64;
    let rmse = (actual
        .iter()
        .zip(&predicted)
        .map(|(a, p)| (a - p).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(Prediction {
        years: design.years,
        corr: pearson(&actual, &predicted),
        actual,
        predicted,
        rmse,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::Dataset;

    fn simple(x: &[f64], y: &[f64]) -> FitResult {
        let d = DesignMatrix::from_columns(&["const", "x"], &[vec![1.0; x.len()], x.to_vec()]);
        fit(&d, y, CovarianceKind::Classical).unwrap()
    }

    fn dataset() -> Dataset {
        let years: Vec<Year> = (1975..=2026).map(Year).collect();
        let rate: Vec<f64> = (0..52).map(|i| 5.0 - 0.08 * i as f64 + (i as f64 * 0.7).sin()).collect();
        let impact: Vec<f64> = (0..52)
            .map(|i| 2.0 * (0.06 * i as f64 - 0.05 * rate[i] + 0.03 * (i as f64 * 1.3).cos()).exp())
            .collect();
        Dataset::new(years, rate, impact, vec!["synthetic".into(); 52]).unwrap()
    }

    #[test]
    fn exact_line() {
        let f = simple(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]);
        assert!((f.coefficients[0] - 1.0).abs() < 1e-12);
        assert!((f.coefficients[1] - 2.0).abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12);
        assert!(f.has_flag(flags::PERFECT_FIT));
        assert_eq!(f.aic, f64::NEG_INFINITY);
    }

    #[test]
    fn hand_solved_regression() {
        // normal equations: 3a + 3b = 2, 3a + 5b = 3
        let f = simple(&[0.0, 1.0, 2.0], &[0.0, 1.0, 1.0]);
        assert!((f.coefficients[0] - 1.0 / 6.0).abs() < 1e-12);
        assert!((f.coefficients[1] - 0.5).abs() < 1e-12);
        assert!((f.ssr - 1.0 / 6.0).abs() < 1e-12);
        assert!((f.r2 - 0.75).abs() < 1e-12);
        assert!((f.adj_r2 - (1.0 - 0.25 * 2.0 / 1.0)).abs() < 1e-12);
    }

    #[test]
    fn constant_response() {
        let f = simple(&[0.0, 1.0, 2.0, 3.0], &[2.0; 4]);
        assert!(f.coefficients[1].abs() < 1e-12);
        assert_eq!(f.sst, 0.0);
        assert_eq!(f.r2, 0.0);
        assert!(f.has_flag(flags::CONSTANT_RESPONSE));
    }

    #[test]
    fn errors_name_columns() {
        let d = DesignMatrix::from_columns(
            &["const", "x", "twice_x"],
            &[vec![1.0; 4], vec![1.0, 2.0, 3.0, 4.0], vec![2.0, 4.0, 6.0, 8.0]],
        );
        match fit(&d, &[1.0, 2.0, 3.0, 5.0], CovarianceKind::Hc1) {
            Err(OlsError::RankDeficient { columns }) => assert_eq!(columns, vec!["twice_x".to_string()]),
            other => panic!("unexpected {other:?}"),
        }
        let d = DesignMatrix::from_columns(&["const", "x"], &[vec![1.0; 2], vec![1.0, 2.0]]);
        assert_eq!(
            fit(&d, &[1.0, 2.0], CovarianceKind::Classical).unwrap_err(),
            OlsError::TooFewObservations { n: 2, k: 2 }
        );
    }

    #[test]
    fn classical_covariance_scaling() {
        let x = [0.0, 1.0, 2.0, 3.0, 4.0];
        let y = [0.3, 1.1, 1.9, 3.4, 3.9];
        let base = simple(&x, &y);
        let doubled: Vec<f64> = x.iter().map(|v| v * 2.0).collect();
        let d = simple(&doubled, &y);
        assert!((d.covariance[1][1] - base.covariance[1][1] / 4.0).abs() < 1e-14);
        // orthonormal design: covariance = sigma2 · I
        let q = DesignMatrix::from_columns(&["a", "b"], &[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]);
        let f = fit(&q, &[1.0, 2.0, 3.0], CovarianceKind::Classical).unwrap();
        let expect = Matrix::identity(2).scale(f.sigma2);
        assert!(f.covariance_matrix().max_abs_diff(&expect) < 1e-14);
    }

    #[test]
    fn duplicated_data_shrinks_covariance() {
        let x = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0];
        let y = [0.3, 1.1, 1.9, 3.4, 3.9, 5.6];
        let base = simple(&x, &y);
        let m = 10;
        let xs: Vec<f64> = x.iter().cycle().take(x.len() * m).copied().collect();
        let ys: Vec<f64> = y.iter().cycle().take(y.len() * m).copied().collect();
        let big = simple(&xs, &ys);
        // exact ratio is (n−k)/(m·n−k)
        let ratio = big.covariance[1][1] / base.covariance[1][1];
        let exact = (6.0 - 2.0) / (60.0 - 2.0);
        assert!((ratio - exact).abs() < 1e-12);
        assert!((ratio - 1.0 / m as f64).abs() < 0.05);
    }

    #[test]
    fn hc_identities() {
        // |e| constant → HC0 = classical with sigma2 replaced by e² = ssr/n
        let x = [-1.0, 1.0, -1.0, 1.0];
        let y = [1.0, 1.0, -1.0, -1.0]; // e = ±1 everywhere
        let d = DesignMatrix::from_columns(&["const", "x"], &[vec![1.0; 4], x.to_vec()]);
        let c = fit(&d, &y, CovarianceKind::Classical).unwrap();
        let h0 = fit(&d, &y, CovarianceKind::Hc0).unwrap();
        let h1 = fit(&d, &y, CovarianceKind::Hc1).unwrap();
        assert!(c.residuals.iter().all(|e| (e.abs() - 1.0).abs() < 1e-12));
        let rescaled = c.covariance_matrix().scale((4.0 - 2.0) / 4.0);
        assert!(h0.covariance_matrix().max_abs_diff(&rescaled) < 1e-12);
        assert!(h1.covariance_matrix().max_abs_diff(&h0.covariance_matrix().scale(2.0)) < 1e-12);
    }

    #[test]
    fn newey_west_zero_lag_is_hc0() {
        let ds = dataset();
        let f = fit_spec(&ds, &ModelSpec::model2().with_covariance(CovarianceKind::Hc0)).unwrap();
        let nw = refit_with(&f, CovarianceKind::NeweyWest { lags: Some(0) }).unwrap();
        assert!(nw.covariance_matrix().max_abs_diff(&f.covariance_matrix()) < 1e-12);
        let auto = refit_with(&f, CovarianceKind::NeweyWest { lags: None }).unwrap();
        assert_eq!(auto.newey_west_lags, Some(3));
        let err = refit_with(&f, CovarianceKind::NeweyWest { lags: Some(52) });
        assert_eq!(err.unwrap_err(), OlsError::InvalidLag { lags: 52, n: 52 });
    }

    #[test]
    fn design_shapes() {
        let ds = dataset();
        let (d1, y1) = build_design(&ds, &ModelSpec::model1()).unwrap();
        assert_eq!((d1.n(), d1.k()), (52, 2));
        assert_eq!(y1.len(), 52);
        let (d3, _) = build_design(&ds, &ModelSpec::model3()).unwrap();
        assert_eq!((d3.n(), d3.k()), (52, 5));
        let i = d3.column_index("real_rate_x_qe").unwrap();
        for r in 0..52 {
            assert_eq!(d3.x[(r, i)], ds.real_rate()[r] * ds.qe_dummy()[r] as f64);
        }
        let lag = ModelSpec::new("lag", vec![Term::Intercept, Term::RealRate, Term::RateLag(1), Term::RateLag(2)]);
        let (dl, _) = build_design(&ds, &lag).unwrap();
        assert_eq!(dl.n(), 50);
        assert_eq!(dl.years[0], Year(1977));
        assert_eq!(dl.x[(0, 3)], ds.real_rate()[0]);
        let dropped = build_design(&ds, &ModelSpec::model2().excluding(&[Year(2021)])).unwrap();
        assert_eq!(dropped.0.n(), 51);
        let dup = ModelSpec::new("dup", vec![Term::Intercept, Term::Intercept]);
        assert_eq!(build_design(&ds, &dup).unwrap_err(), OlsError::DuplicateTerm("const".into()));
        let out = ModelSpec::model1().with_window(Year(1970), Year(1980));
        assert!(build_design(&ds, &out).is_err());
    }

    #[test]
    fn information_criteria_arithmetic() {
        let (a1, b1) = information_criteria(2.0, 50, 3);
        let (a2, _) = information_criteria(3.0, 50, 3);
        let (a3, b3) = information_criteria(2.0, 50, 4);
        assert!(a2 > a1);
        assert!((a3 - a1 - 2.0).abs() < 1e-12);
        assert!((b3 - b1 - 50f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn f_statistic_matches_ssr_route() {
        let ds = dataset();
        let f = fit_spec(&ds, &ModelSpec::model3()).unwrap();
        let restricted_ssr = f.sst; // intercept-only model
        let via_ssr = ((restricted_ssr - f.ssr) / 4.0) / (f.ssr / (52.0 - 5.0));
        assert!((f.f_stat.unwrap() - via_ssr).abs() < 1e-8 * via_ssr);
        assert_eq!(f.post_qe_rate_effect.unwrap(), f.coef("real_rate").unwrap() + f.coef("real_rate_x_qe").unwrap());
    }

    #[test]
    fn prediction_metrics() {
        let ds = dataset();
        let f = fit_spec(&ds, &ModelSpec::model2()).unwrap();
        let p = predict_and_score(&f, &ds).unwrap();
        assert!((p.corr.unwrap().powi(2) - f.r2).abs() < 1e-10);
        let rmse = (f.ssr / 52.0).sqrt();
        assert!((p.rmse - rmse).abs() < 1e-12);

        let perfect = simple(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]);
        let p = predict_and_score(&perfect, &ds).unwrap();
        assert!((p.corr.unwrap() - 1.0).abs() < 1e-12);
        assert!(p.rmse < 1e-12);

        let flat = simple(&[0.0, 1.0, 2.0, 3.0], &[1.0, 2.0, 2.0, 1.0]);
        let p = predict_and_score(&flat, &ds).unwrap();
        assert_eq!(p.corr, None);
    }

    #[test]
    fn wald_single_restriction_is_t_squared() {
        let ds = dataset();
        let f = fit_spec(&ds, &ModelSpec::model2()).unwrap();
        let (w, p, q) = wald_test(&f, &["real_rate"]).unwrap();
        assert_eq!(q, 1);
        let t = f.t_stats[1];
        assert!((w - t * t).abs() < 1e-8 * w.max(1.0));
        assert!((p - f.p_values[1]).abs() < 1e-10);
    }

    #[test]
    fn term_and_covariance_parsing() {
        for t in [
            Term::Intercept,
            Term::RealRate,
            Term::RateLag(3),
            Term::RateSquared,
            Term::Column("fed_funds".into()),
        ] {
            assert_eq!(t.label().parse::<Term>().unwrap(), t);
        }
        assert!("real_rate_lagx".parse::<Term>().is_err());
        assert_eq!("hc1".parse::<CovarianceKind>().unwrap(), CovarianceKind::Hc1);
        assert_eq!(
            "newey_west(4)".parse::<CovarianceKind>().unwrap(),
            CovarianceKind::NeweyWest { lags: Some(4) }
        );
        assert!("bogus".parse::<CovarianceKind>().is_err());
    }

    #[test]
    fn fit_result_json_round_trip() {
        let ds = dataset();
        let f = fit_spec(&ds, &ModelSpec::model3().with_covariance(CovarianceKind::NeweyWest { lags: None })).unwrap();
        let json = serde_json::to_string(&f).unwrap();
        let back: FitResult = serde_json::from_str(&json).unwrap();
        assert_eq!(back, f);
        let perfect = simple(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]);
        let back: FitResult = serde_json::from_str(&serde_json::to_string(&perfect).unwrap()).unwrap();
        assert_eq!(back.aic, f64::NEG_INFINITY);
    }
}
