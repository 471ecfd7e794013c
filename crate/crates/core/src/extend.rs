//! Distributed-lag, quadratic and quantile-regression extensions.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{Matrix, Qr};
use crate::ols::{self, build_design, DesignMatrix, FitResult, ModelSpec, OlsError, Term, RANK_TOLERANCE};
use crate::series::Dataset;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExtendError {
    #[error("quantile level {0} must lie strictly between 0 and 1")]
    InvalidTau(f64),
    #[error("need more observations than coefficients (n = {n}, k = {k})")]
    TooFewObservations { n: usize, k: usize },
    #[error(transparent)]
    Ols(#[from] OlsError),
}

type Result<T> = std::result::Result<T, ExtendError>;

/// `log_if ~ const + r_t + r_{t−1} + … + r_{t−max_lag} + time_trend`
pub fn lag_model_spec(max_lag: usize) -> ModelSpec {
    let mut terms = vec![Term::Intercept, Term::RealRate];
    terms.extend((1..=max_lag).map(Term::RateLag));
    terms.push(Term::TimeTrend);
    ModelSpec::new(format!("lag{max_lag}"), terms)
}

/// `log_if ~ const + r + r² + time_trend`
pub fn quadratic_spec() -> ModelSpec {
    ModelSpec::new(
        "quadratic",
        vec![Term::Intercept, Term::RealRate, Term::RateSquared, Term::TimeTrend],
    )
}

pub fn fit_lag_model(dataset: &Dataset, max_lag: usize) -> Result<FitResult> {
    Ok(ols::fit_spec(dataset, &lag_model_spec(max_lag))?)
}

pub fn fit_quadratic(dataset: &Dataset) -> Result<FitResult> {
    Ok(ols::fit_spec(dataset, &quadratic_spec())?)
}

pub const QUANTILE_MAX_ITER: usize = 500;
const EPS_START: f64 = 1e-2;
const EPS_END: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileFit {
    pub tau: f64,
    pub labels: Vec<String>,
    pub coefficients: Vec<f64>,
    /// `Σ ρ_τ(y − Xβ)` at the returned coefficients.
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Check-loss objective after each reweighting step.
    pub trace: Vec<f64>,
    /// Smoothing level in force for each trace entry.
    pub trace_eps: Vec<f64>,
}

/// `ρ_τ(u) = u·(τ − 1{u<0})`
pub fn check_loss(u: f64, tau: f64) -> f64 {
    if u < 0.0 {
        u * (tau - 1.0)
    } else {
        u * tau
    }
}

pub fn quantile_objective(design: &DesignMatrix, response: &[f64], beta: &[f64], tau: f64) -> f64 {
    design
        .x
        .mul_vec(beta)
        .iter()
        .zip(response)
        .map(|(f, y)| check_loss(y - f, tau))
        .sum()
}

fn weighted_solve(x: &Matrix, y: &[f64], w: &[f64]) -> Vec<f64> {
    let mut xw = x.clone();
    let mut yw = y.to_vec();
    for i in 0..x.rows() {
        let s = w[i].sqrt();
        for j in 0..x.cols() {
            xw[(i, j)] *= s;
        }
        yw[i] *= s;
    }
    Qr::new(&xw).solve(&yw)
}

/// Exact fit through each `k`-subset of the `k + 3` observations with the
/// smallest absolute residuals; returns the best such vertex.
fn vertex_polish(design: &DesignMatrix, response: &[f64], beta: &[f64], tau: f64) -> Option<(Vec<f64>, f64)> {
    let (n, k) = (design.n(), design.k());
    let fitted = design.x.mul_vec(beta);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| (response[a] - fitted[a]).abs().total_cmp(&(response[b] - fitted[b]).abs()));
    let pool = &order[..(k + 3).min(n)];
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut pick: Vec<usize> = (0..k).collect();
    loop {
        let rows: Vec<usize> = pick.iter().map(|&p| pool[p]).collect();
        let sub = design.x.select_rows(&rows);
        let qr = Qr::new(&sub);
        if qr.deficient_columns(RANK_TOLERANCE).is_empty() {
            let y: Vec<f64> = rows.iter().map(|&r| response[r]).collect();
            let b = qr.solve(&y);
            let obj = quantile_objective(design, response, &b, tau);
            if best.as_ref().is_none_or(|(_, o)| obj < *o) {
                best = Some((b, obj));
            }
        }
        // next k-combination of 0..pool.len()
        let m = pool.len();
        let mut i = k;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if pick[i] < m - k + i {
                break;
            }
        }
        pick[i] += 1;
        for j in i + 1..k {
            pick[j] = pick[j - 1] + 1;
        }
    }
}

/// Quantile regression by majorise-minimise IRLS on a smoothed check loss.
///
/// Each step solves weighted least squares with weights `1/a_i`,
/// `a_i = max(|u_i|, ε)`, on the shifted response `y_i + (2τ−1)a_i`. The
/// smoothing `ε` is lowered from `1e-2` to `1e-8` by factors of ten, with at
/// most 500 steps in total. A final vertex search replaces the IRLS limit
/// when an exact basic solution has a lower objective.
pub fn fit_quantile(design: &DesignMatrix, response: &[f64], tau: f64) -> Result<QuantileFit> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(ExtendError::InvalidTau(tau));
    }
    let (n, k) = (design.n(), design.k());
    if n <= k {
        return Err(ExtendError::TooFewObservations { n, k });
    }
    let qr = Qr::new(&design.x);
    let bad = qr.deficient_columns(RANK_TOLERANCE);
    if !bad.is_empty() {
        return Err(OlsError::RankDeficient {
            columns: bad.iter().map(|&j| design.labels[j].clone()).collect(),
        }
        .into());
    }
    let mut beta = qr.solve(response);
    let mut best = (beta.clone(), quantile_objective(design, response, &beta, tau));
    let mut trace = Vec::new();
    let mut trace_eps = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    let mut eps = EPS_START;
    'outer: loop {
        let mut stage_done = false;
        while iterations < QUANTILE_MAX_ITER {
            iterations += 1;
            let fitted = design.x.mul_vec(&beta);
            let a: Vec<f64> = response.iter().zip(&fitted).map(|(y, f)| (y - f).abs().max(eps)).collect();
            let w: Vec<f64> = a.iter().map(|v| 1.0 / v).collect();
            let shifted: Vec<f64> = response.iter().zip(&a).map(|(y, ai)| y + (2.0 * tau - 1.0) * ai).collect();
            let next = weighted_solve(&design.x, &shifted, &w);
            let step = next.iter().zip(&beta).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
            let scale = next.iter().map(|v| v.abs()).fold(1.0, f64::max);
            beta = next;
            let obj = quantile_objective(design, response, &beta, tau);
            trace.push(obj);
            trace_eps.push(eps);
            if obj < best.1 {
                best = (beta.clone(), obj);
            }
            if step <= 1e-10 * scale {
                stage_done = true;
                break;
            }
        }
        if !stage_done {
            break 'outer;
        }
        if eps <= EPS_END * (1.0 + 1e-9) {
            converged = true;
            break;
        }
        eps = (eps / 10.0).max(EPS_END);
    }
    if let Some((b, obj)) = vertex_polish(design, response, &best.0, tau) {
        // vertices win ties up to summation rounding
        if obj <= best.1 + 1e-12 * (1.0 + best.1) {
            best = (b, obj);
        }
    }
    Ok(QuantileFit {
        tau,
        labels: design.labels.clone(),
        coefficients: best.0,
        objective: best.1,
        iterations,
        converged,
        trace,
        trace_eps,
    })
}

/// Quantile regression with the regressors of `spec` on `dataset`.
pub fn fit_quantile_spec(dataset: &Dataset, spec: &ModelSpec, tau: f64) -> Result<QuantileFit> {
    let (design, y) = build_design(dataset, spec)?;
    fit_quantile(&design, &y, tau)
}
