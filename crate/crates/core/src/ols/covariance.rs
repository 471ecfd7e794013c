//! Classical, White (HC0/HC1) and Newey-West covariance estimators for OLS.

use crate::linalg::Matrix;
use crate::ols::OlsError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HcFlavor {
    Hc0,
    Hc1,
}

/// `sigma2 · (XᵀX)⁻¹`
pub fn covariance_classical(xtx_inv: &Matrix, sigma2: f64) -> Matrix {
    xtx_inv.scale(sigma2)
}

fn sandwich(xtx_inv: &Matrix, meat: &Matrix) -> Matrix {
    xtx_inv.matmul(meat).matmul(xtx_inv)
}

/// `Σ_t a_t b_tᵀ` over rows of score vectors
fn score_outer(scores: &Matrix, lag: usize) -> Matrix {
    let k = scores.cols();
    let mut g = Matrix::zeros(k, k);
    for t in lag..scores.rows() {
        let a = scores.row(t);
        let b = scores.row(t - lag);
        for i in 0..k {
            if a[i] == 0.0 {
                continue;
            }
            for j in 0..k {
                g[(i, j)] += a[i] * b[j];
            }
        }
    }
    g
}

fn scores(x: &Matrix, residuals: &[f64]) -> Matrix {
    let mut s = x.clone();
    for (t, &e) in residuals.iter().enumerate() {
        for j in 0..x.cols() {
            s[(t, j)] *= e;
        }
    }
    s
}

/// White sandwich `(XᵀX)⁻¹ Xᵀ diag(e²) X (XᵀX)⁻¹`; HC1 rescales by `n/(n−k)`.
pub fn covariance_hc(x: &Matrix, xtx_inv: &Matrix, residuals: &[f64], flavor: HcFlavor) -> Matrix {
    let meat = score_outer(&scores(x, residuals), 0);
    let v = sandwich(xtx_inv, &meat);
    match flavor {
        HcFlavor::Hc0 => v,
        HcFlavor::Hc1 => {
            let (n, k) = (x.rows() as f64, x.cols() as f64);
            v.scale(n / (n - k))
        }
    }
}

/// `floor(4 · (n/100)^(2/9))`
pub fn newey_west_auto_lag(n: usize) -> usize {
    (4.0 * (n as f64 / 100.0).powf(2.0 / 9.0)).floor() as usize
}

/// Bartlett kernel weights `1 − l/(L+1)` for `l = 1..=L`.
pub fn bartlett_weights(lags: usize) -> Vec<f64> {
    (1..=lags).map(|l| 1.0 - l as f64 / (lags as f64 + 1.0)).collect()
}

/// Newey-West HAC covariance with Bartlett weights. Returns the matrix and
/// the lag count actually used. No small-sample rescaling, so `L = 0` is HC0.
pub fn covariance_newey_west(
    x: &Matrix,
    xtx_inv: &Matrix,
    residuals: &[f64],
    lags: Option<usize>,
) -> Result<(Matrix, usize), OlsError> {
    let n = x.rows();
    let lags = lags.unwrap_or_else(|| newey_west_auto_lag(n));
    if lags >= n {
        return Err(OlsError::InvalidLag { lags, n });
    }
    let u = scores(x, residuals);
    let mut meat = score_outer(&u, 0);
    for (l, w) in (1..=lags).zip(bartlett_weights(lags)) {
        let g = score_outer(&u, l);
        let k = g.rows();
        for i in 0..k {
            for j in 0..k {
                meat[(i, j)] += w * (g[(i, j)] + g[(j, i)]);
            }
        }
    }
    Ok((sandwich(xtx_inv, &meat), lags))
}
