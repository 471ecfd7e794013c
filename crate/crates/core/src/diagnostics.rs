//! Residual diagnostics: normality, serial correlation, heteroskedasticity,
//! ACF/PACF and the Chow structural-break test.

use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use thiserror::Error;

use crate::dist::{self, Sidedness};
use crate::linalg::{Matrix, Qr};
use crate::ols::{self, build_design, CovarianceKind, DesignMatrix, FitResult, ModelSpec, OlsError, RANK_TOLERANCE};
use crate::serde_f64;
use crate::series::{Dataset, SeriesError, Year};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiagnosticsError {
    #[error("{test} needs at least {min} observations, got {n}")]
    TooFewObservations { test: &'static str, n: usize, min: usize },
    #[error("{0}: residuals have zero variance")]
    ZeroVariance(&'static str),
    #[error("{test}: lag {lags} must be between 1 and n − 1 (n = {n})")]
    InvalidLag { test: &'static str, lags: usize, n: usize },
    #[error("drop fraction {0} must lie in [0, 1)")]
    InvalidFraction(f64),
    #[error("{0}: every auxiliary column was dropped")]
    NoAuxiliaryColumns(&'static str),
    #[error("unknown sort variable {0:?}")]
    UnknownSortVariable(String),
    #[error(transparent)]
    Ols(#[from] OlsError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

type Result<T> = std::result::Result<T, DiagnosticsError>;

/// One row of a diagnostics table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub name: String,
    #[serde(with = "serde_f64")]
    pub statistic: f64,
    pub p_value: Option<f64>,
    pub sidedness: Option<Sidedness>,
    /// Degrees of freedom or lag parameters, in the order the test defines them.
    pub df: Vec<f64>,
    pub note: String,
    #[serde(default)]
    pub flags: Vec<String>,
}

impl TestOutcome {
    fn new(name: &str, statistic: f64, p_value: Option<f64>, df: Vec<f64>, note: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            statistic,
            p_value: p_value.map(|p| p.clamp(0.0, 1.0)),
            sidedness: p_value.map(|_| Sidedness::UpperTail),
            df,
            note: note.into(),
            flags: Vec::new(),
        }
    }

    pub fn rejects_at(&self, alpha: f64) -> bool {
        self.p_value.is_some_and(|p| p < alpha)
    }
}

fn central_moments(x: &[f64]) -> (f64, f64, f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for v in x {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    (mean, m2 / n, m3 / n, m4 / n)
}

fn check_len(test: &'static str, n: usize, min: usize) -> Result<()> {
    if n < min {
        Err(DiagnosticsError::TooFewObservations { test, n, min })
    } else {
        Ok(())
    }
}

/// `JB = n/6 · (S² + K²/4)` with moment skewness `S` and excess kurtosis `K`; χ²(2).
pub fn jarque_bera(residuals: &[f64]) -> Result<TestOutcome> {
    check_len("jarque_bera", residuals.len(), 8)?;
    let (_, m2, m3, m4) = central_moments(residuals);
    if m2 <= 0.0 {
        return Err(DiagnosticsError::ZeroVariance("jarque_bera"));
    }
    let s = m3 / m2.powf(1.5);
    let k = m4 / (m2 * m2) - 3.0;
    let n = residuals.len() as f64;
    let jb = n / 6.0 * (s * s + k * k / 4.0);
    let p = dist::chi2_sf(jb, 2.0).expect("df = 2");
    Ok(TestOutcome::new(
        "jarque_bera",
        jb,
        Some(p),
        vec![2.0],
        format!("skewness {s:.4}, excess kurtosis {k:.4}"),
    ))
}

/// `DW = Σ(e_t − e_{t−1})² / Σe_t²`; no p-value.
pub fn durbin_watson(residuals: &[f64]) -> Result<TestOutcome> {
    check_len("durbin_watson", residuals.len(), 2)?;
    let denom: f64 = residuals.iter().map(|e| e * e).sum();
    if denom == 0.0 {
        return Err(DiagnosticsError::ZeroVariance("durbin_watson"));
    }
    let num: f64 = residuals.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
    let mut out = TestOutcome::new("durbin_watson", num / denom, None, Vec::new(), "values near 2 indicate no first-order autocorrelation");
    out.sidedness = None;
    Ok(out)
}

/// Sample autocorrelations `ρ_0..=ρ_max_lag` with the biased (divide-by-n) autocovariance.
pub fn acf(x: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let n = x.len();
    if n == 0 || max_lag >= n {
        return Err(DiagnosticsError::InvalidLag {
            test: "acf",
            lags: max_lag,
            n,
        });
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    let d: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let c0: f64 = d.iter().map(|v| v * v).sum();
    if c0 == 0.0 {
        return Err(DiagnosticsError::ZeroVariance("acf"));
    }
    let mut out = Vec::with_capacity(max_lag + 1);
    out.push(1.0);
    for l in 1..=max_lag {
        let c: f64 = (l..n).map(|t| d[t] * d[t - l]).sum();
        out.push(c / c0);
    }
    Ok(out)
}

/// Partial autocorrelations from an ACF via Durbin-Levinson; index 0 is 1.
pub fn pacf_from_acf(rho: &[f64]) -> Vec<f64> {
    let m = rho.len().saturating_sub(1);
    let mut out = vec![1.0];
    if m == 0 {
        return out;
    }
    let mut phi = vec![rho[1]];
    let mut v = 1.0 - rho[1] * rho[1];
    out.push(rho[1]);
    for k in 2..=m {
        let num = rho[k] - (1..k).map(|j| phi[j - 1] * rho[k - j]).sum::<f64>();
        let pkk = if v > 0.0 { num / v } else { 0.0 };
        let mut next: Vec<f64> = (1..k).map(|j| phi[j - 1] - pkk * phi[k - j - 1]).collect();
        next.push(pkk);
        phi = next;
        v *= 1.0 - pkk * pkk;
        out.push(pkk);
    }
    out
}

pub fn acf_pacf(residuals: &[f64], max_lag: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let a = acf(residuals, max_lag)?;
    let p = pacf_from_acf(&a);
    Ok((a, p))
}

/// Two-sided p-values for `H0: ρ_l = 0` using Bartlett's standard error
/// `sqrt((1 + 2Σ_{j<l} ρ_j²)/n)`. Index 0 is 0 by convention.
pub fn acf_bartlett_p_values(rho: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0];
    let mut acc = 0.0;
    for l in 1..rho.len() {
        let se = ((1.0 + 2.0 * acc) / n as f64).sqrt();
        out.push((2.0 * dist::normal_sf((rho[l] / se).abs())).min(1.0));
        acc += rho[l] * rho[l];
    }
    out
}

/// `Q = n(n+2) Σ_{l=1..m} ρ_l²/(n−l)`, χ²(m).
pub fn ljung_box(residuals: &[f64], lags: usize) -> Result<TestOutcome> {
    let n = residuals.len();
    if lags == 0 || lags >= n {
        return Err(DiagnosticsError::InvalidLag {
            test: "ljung_box",
            lags,
            n,
        });
    }
    let rho = acf(residuals, lags)?;
    let nf = n as f64;
    let q = nf * (nf + 2.0) * (1..=lags).map(|l| rho[l] * rho[l] / (nf - l as f64)).sum::<f64>();
    let p = dist::chi2_sf(q, lags as f64).expect("positive df");
    Ok(TestOutcome::new("ljung_box", q, Some(p), vec![lags as f64], format!("{lags} lags")))
}

fn aux_r2(x: &Matrix, y: &[f64]) -> Result<f64> {
    let labels = (0..x.cols()).map(|j| format!("aux{j}")).collect();
    let years = (0..x.rows() as i32).map(Year).collect();
    let d = DesignMatrix::new(labels, years, x.clone());
    Ok(ols::fit(&d, y, CovarianceKind::Classical)?.r2)
}

/// Breusch-Godfrey LM test: regress `e_t` on the original design plus
/// `e_{t−1..t−p}` (zero before the sample start); `LM = n·R²`, χ²(p).
pub fn breusch_godfrey(fit: &FitResult, lags: usize) -> Result<TestOutcome> {
    breusch_godfrey_design(&fit.design, &fit.residuals, lags)
}

pub fn breusch_godfrey_design(design: &DesignMatrix, residuals: &[f64], lags: usize) -> Result<TestOutcome> {
    let (n, k) = (design.n(), design.k());
    if lags == 0 {
        return Err(DiagnosticsError::InvalidLag {
            test: "breusch_godfrey",
            lags,
            n,
        });
    }
    check_len("breusch_godfrey", n, k + lags + 1)?;
    let mut cols: Vec<Vec<f64>> = (0..k).map(|j| design.x.column(j)).collect();
    for l in 1..=lags {
        cols.push((0..n).map(|t| if t >= l { residuals[t - l] } else { 0.0 }).collect());
    }
    let lm = if residuals.iter().all(|&e| e == 0.0) {
        0.0
    } else {
        n as f64 * aux_r2(&Matrix::from_columns(&cols), residuals)?
    };
    let p = dist::chi2_sf(lm, lags as f64).expect("positive df");
    Ok(TestOutcome::new(
        "breusch_godfrey",
        lm,
        Some(p),
        vec![lags as f64],
        format!("{lags} lag(s), zero-padded pre-sample residuals"),
    ))
}

fn squared(residuals: &[f64]) -> Vec<f64> {
    residuals.iter().map(|e| e * e).collect()
}

fn is_constant(v: &[f64]) -> bool {
    v.iter().all(|x| *x == v[0])
}

/// Keeps columns that add rank, in order, starting from an intercept.
fn independent_columns(candidates: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let n = candidates.first().map_or(0, Vec::len);
    let mut kept = vec![vec![1.0; n]];
    for c in candidates {
        if is_constant(&c) || kept.iter().any(|k| k == &c) {
            continue;
        }
        kept.push(c);
        if kept.len() > n || !Qr::new(&Matrix::from_columns(&kept)).deficient_columns(RANK_TOLERANCE).is_empty() {
            kept.pop();
        }
    }
    kept
}

fn non_intercept_columns(design: &DesignMatrix) -> Vec<Vec<f64>> {
    (0..design.k())
        .map(|j| design.x.column(j))
        .filter(|c| !is_constant(c))
        .collect()
}

fn lm_on(name: &'static str, aux: Vec<Vec<f64>>, residuals: &[f64], note: &str) -> Result<TestOutcome> {
    let n = residuals.len();
    if aux.len() < 2 {
        return Err(DiagnosticsError::NoAuxiliaryColumns(name));
    }
    check_len(name, n, aux.len() + 1)?;
    let e2 = squared(residuals);
    let lm = if is_constant(&e2) {
        0.0
    } else {
        n as f64 * aux_r2(&Matrix::from_columns(&aux), &e2)?
    };
    let df = (aux.len() - 1) as f64;
    let p = dist::chi2_sf(lm, df).expect("positive df");
    Ok(TestOutcome::new(name, lm, Some(p), vec![df], note))
}

/// White test: `e²` on the regressors, their squares and pairwise products.
/// Constant, duplicate and collinear auxiliary columns are dropped.
pub fn white_test(fit: &FitResult) -> Result<TestOutcome> {
    white_test_design(&fit.design, &fit.residuals)
}

pub fn white_test_design(design: &DesignMatrix, residuals: &[f64]) -> Result<TestOutcome> {
    let base = non_intercept_columns(design);
    let mut cand = base.clone();
    for i in 0..base.len() {
        for j in i..base.len() {
            cand.push(base[i].iter().zip(&base[j]).map(|(a, b)| a * b).collect());
        }
    }
    lm_on("white", independent_columns(cand), residuals, "n·R² of e² on levels, squares and cross products")
}

/// Breusch-Pagan (Koenker studentised form): `n·R²` of `e²` on the regressors.
pub fn breusch_pagan(fit: &FitResult) -> Result<TestOutcome> {
    breusch_pagan_design(&fit.design, &fit.residuals)
}

pub fn breusch_pagan_design(design: &DesignMatrix, residuals: &[f64]) -> Result<TestOutcome> {
    let aux = independent_columns(non_intercept_columns(design));
    lm_on("breusch_pagan", aux, residuals, "n·R² of e² on the regressors")
}

/// Goldfeld-Quandt on a prepared design: rows sorted by `sort_key`, the
/// middle `drop_fraction` removed, each tail refitted. The statistic is the
/// larger residual variance over the smaller; the p-value is doubled and capped at 1.
pub fn goldfeld_quandt_design(
    design: &DesignMatrix,
    response: &[f64],
    sort_key: &[f64],
    drop_fraction: f64,
) -> Result<TestOutcome> {
    if !(0.0..1.0).contains(&drop_fraction) {
        return Err(DiagnosticsError::InvalidFraction(drop_fraction));
    }
    let (n, k) = (design.n(), design.k());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| sort_key[a].total_cmp(&sort_key[b]));
    let dropped = (n as f64 * drop_fraction).round() as usize;
    let tail = (n - dropped.min(n)) / 2;
    check_len("goldfeld_quandt", tail, k + 1)?;
    let low_idx = &order[..tail];
    let high_idx = &order[n - tail..];
    let sub = |idx: &[usize]| -> Result<f64> {
        let d = design.select_rows(idx);
        let y: Vec<f64> = idx.iter().map(|&i| response[i]).collect();
        let f = ols::fit(&d, &y, CovarianceKind::Classical)?;
        Ok(f.ssr / (tail - k) as f64)
    };
    let (v_low, v_high) = (sub(low_idx)?, sub(high_idx)?);
    let (big, small) = if v_high >= v_low { (v_high, v_low) } else { (v_low, v_high) };
    if big == 0.0 {
        return Err(DiagnosticsError::ZeroVariance("goldfeld_quandt"));
    }
    let df = (tail - k) as f64;
    let (stat, p) = if small == 0.0 {
        (f64::INFINITY, 0.0)
    } else {
        let s = big / small;
        (s, (2.0 * dist::f_sf(s, df, df).expect("positive df")).min(1.0))
    };
    let mut out = TestOutcome::new(
        "goldfeld_quandt",
        stat,
        Some(p),
        vec![df, df],
        format!(
            "{} variance over {}; middle {dropped} of {n} observations dropped",
            if v_high >= v_low { "upper" } else { "lower" },
            if v_high >= v_low { "lower" } else { "upper" },
        ),
    );
    out.sidedness = Some(Sidedness::TwoSided);
    Ok(out)
}

/// Goldfeld-Quandt for `spec` on `dataset`, sorting by the named column.
pub fn goldfeld_quandt(dataset: &Dataset, spec: &ModelSpec, sort_var: &str, drop_fraction: f64) -> Result<TestOutcome> {
    let (design, y) = build_design(dataset, spec)?;
    let key = sort_values(dataset, &design, sort_var)?;
    goldfeld_quandt_design(&design, &y, &key, drop_fraction)
}

fn sort_values(dataset: &Dataset, design: &DesignMatrix, sort_var: &str) -> Result<Vec<f64>> {
    if sort_var == "year" {
        return Ok(design.years.iter().map(|y| y.0 as f64).collect());
    }
    let col = dataset
        .column(sort_var)
        .map_err(|_| DiagnosticsError::UnknownSortVariable(sort_var.into()))?;
    Ok(design
        .years
        .iter()
        .map(|y| col[dataset.index_of(*y).expect("design year in dataset")])
        .collect())
}

/// One-sample KS distance to the normal with estimated mean and standard
/// deviation; p from the asymptotic Kolmogorov distribution.
pub fn ks_normality(residuals: &[f64]) -> Result<TestOutcome> {
    let n = residuals.len();
    check_len("ks_normality", n, 8)?;
    let (mean, m2, _, _) = central_moments(residuals);
    if m2 <= 0.0 {
        return Err(DiagnosticsError::ZeroVariance("ks_normality"));
    }
    let sd = (m2 * n as f64 / (n as f64 - 1.0)).sqrt();
    let mut z: Vec<f64> = residuals.iter().map(|e| (e - mean) / sd).collect();
    z.sort_by(f64::total_cmp);
    let nf = n as f64;
    let d = z
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = dist::normal_cdf(v);
            ((i + 1) as f64 / nf - f).max(f - i as f64 / nf)
        })
        .fold(0.0, f64::max);
    let p = dist::kolmogorov_sf(nf.sqrt() * d);
    Ok(TestOutcome::new(
        "kolmogorov_smirnov",
        d,
        Some(p),
        Vec::new(),
        "mean and sd are estimated, so this p-value is conservative (Lilliefors)",
    ))
}

pub mod flags {
    pub const DEGENERATE_DENOMINATOR: &str = "degenerate_denominator";
}

/// Chow F test on a prepared design split into rows where `post[i]` is false/true.
pub fn chow_test_design(design: &DesignMatrix, response: &[f64], post: &[bool]) -> Result<TestOutcome> {
    let k = design.k();
    let pre_idx: Vec<usize> = (0..design.n()).filter(|&i| !post[i]).collect();
    let post_idx: Vec<usize> = (0..design.n()).filter(|&i| post[i]).collect();
    let (n1, n2) = (pre_idx.len(), post_idx.len());
    check_len("chow", n1, k + 1)?;
    check_len("chow", n2, k + 1)?;
    let ssr_of = |idx: &[usize]| -> Result<f64> {
        let d = design.select_rows(idx);
        let y: Vec<f64> = idx.iter().map(|&i| response[i]).collect();
        Ok(ols::fit(&d, &y, CovarianceKind::Classical)?.ssr)
    };
    let pooled = ols::fit(design, response, CovarianceKind::Classical)?.ssr;
    let (s1, s2) = (ssr_of(&pre_idx)?, ssr_of(&post_idx)?);
    let df1 = k as f64;
    let df2 = (n1 + n2 - 2 * k) as f64;
    let num = (pooled - s1 - s2).max(0.0) / df1;
    let den = (s1 + s2) / df2;
    let scale: f64 = response.iter().map(|y| y * y).sum::<f64>().max(f64::MIN_POSITIVE);
    let mut out = if den <= 1e-26 * scale {
        let (stat, p) = if num <= 1e-26 * scale { (0.0, 1.0) } else { (f64::INFINITY, 0.0) };
        let mut o = TestOutcome::new("chow", stat, Some(p), vec![df1, df2], "both sub-sample fits are exact");
        o.flags.push(flags::DEGENERATE_DENOMINATOR.into());
        o
    } else {
        let f = num / den;
        let p = dist::f_sf(f, df1, df2).expect("positive df");
        TestOutcome::new("chow", f, Some(p), vec![df1, df2], format!("n1 = {n1}, n2 = {n2}"))
    };
    out.sidedness = Some(Sidedness::UpperTail);
    Ok(out)
}

/// Chow test for `spec` with the second regime starting at `breakpoint`.
pub fn chow_test(dataset: &Dataset, spec: &ModelSpec, breakpoint: Year) -> Result<TestOutcome> {
    let (design, y) = build_design(dataset, spec)?;
    let post: Vec<bool> = design.years.iter().map(|yr| *yr >= breakpoint).collect();
    let mut out = chow_test_design(&design, &y, &post)?;
    out.note = format!("breakpoint {}; {}", breakpoint.0, out.note);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DiagnosticsOptions {
    pub max_lag: usize,
    pub ljung_box_lags: Vec<usize>,
    pub breusch_godfrey_lags: Vec<usize>,
    pub goldfeld_quandt_drop: f64,
}

impl Default for DiagnosticsOptions {
    fn default() -> Self {
        Self {
            max_lag: 10,
            ljung_box_lags: vec![5, 10],
            breusch_godfrey_lags: vec![1, 2],
            goldfeld_quandt_drop: 0.2,
        }
    }
}

/// Test battery for one fit, plus residual ACF/PACF.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub model: String,
    pub n: usize,
    pub outcomes: Vec<TestOutcome>,
    pub acf: Vec<f64>,
    pub pacf: Vec<f64>,
    /// Bartlett-band two-sided p-values per ACF lag.
    pub acf_p_values: Vec<f64>,
}

impl DiagnosticsReport {
    pub fn get(&self, name: &str) -> Option<&TestOutcome> {
        self.outcomes.iter().find(|o| o.name == name)
    }

    /// Outcome of `name` whose first df/lag parameter equals `param`.
    pub fn find(&self, name: &str, param: f64) -> Option<&TestOutcome> {
        self.outcomes.iter().find(|o| o.name == name && o.df.first() == Some(&param))
    }

    /// `lag,acf,pacf` rows.
    pub fn acf_csv(&self) -> String {
        let mut s = String::from("lag,acf,pacf\n");
        for (l, (a, p)) in self.acf.iter().zip(&self.pacf).enumerate() {
            writeln!(s, "{l},{a},{p}").unwrap();
        }
        s
    }
}

/// Runs every residual test on `fit`. Goldfeld-Quandt sorts rows by
/// `time_trend` when present and by year otherwise.
pub fn diagnose(fit: &FitResult, options: &DiagnosticsOptions) -> Result<DiagnosticsReport> {
    let e = &fit.residuals;
    let n = e.len();
    let max_lag = options.max_lag.min(n.saturating_sub(1));
    let (acf, pacf) = acf_pacf(e, max_lag)?;
    let key: Vec<f64> = match fit.design.column_index("time_trend") {
        Some(j) => fit.design.x.column(j),
        None => fit.design.years.iter().map(|y| y.0 as f64).collect(),
    };
    let mut outcomes = vec![jarque_bera(e)?, ks_normality(e)?, durbin_watson(e)?];
    for &m in &options.ljung_box_lags {
        outcomes.push(ljung_box(e, m)?);
    }
    for &p in &options.breusch_godfrey_lags {
        outcomes.push(breusch_godfrey(fit, p)?);
    }
    outcomes.push(white_test(fit)?);
    outcomes.push(breusch_pagan(fit)?);
    outcomes.push(goldfeld_quandt_design(&fit.design, &fit.response, &key, options.goldfeld_quandt_drop)?);
    Ok(DiagnosticsReport {
        model: fit.model.clone(),
        n,
        acf_p_values: acf_bartlett_p_values(&acf, n),
        outcomes,
        acf,
        pacf,
    })
}
