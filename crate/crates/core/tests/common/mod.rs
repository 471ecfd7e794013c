#![allow(dead_code)]

use monetif_core::ols::DesignMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normals(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// Intercept plus `k − 1` standard-normal regressors.
pub fn random_design(rng: &mut ChaCha8Rng, n: usize, k: usize) -> DesignMatrix {
    let mut cols = vec![vec![1.0; n]];
    for _ in 1..k {
        cols.push(normals(rng, n));
    }
    let labels: Vec<String> = (0..k).map(|j| if j == 0 { "const".into() } else { format!("x{j}") }).collect();
    let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
    DesignMatrix::from_columns(&refs, &cols)
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for j in c..n {
                a[r][j] -= f * a[c][j];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|j| a[r][j] * x[j]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

/// Coefficients from the normal equations `XᵀX β = Xᵀy`.
pub fn normal_equation_beta(design: &DesignMatrix, y: &[f64]) -> Vec<f64> {
    let (n, k) = (design.n(), design.k());
    let mut xtx = vec![vec![0.0; k]; k];
    let mut xty = vec![0.0; k];
    for i in 0..n {
        let row = design.x.row(i);
        for a in 0..k {
            xty[a] += row[a] * y[i];
            for b in 0..k {
                xtx[a][b] += row[a] * row[b];
            }
        }
    }
    gauss_solve(xtx, xty)
}

/// SSR of the least-squares fit by the normal equations.
pub fn oracle_ssr(design: &DesignMatrix, y: &[f64]) -> f64 {
    let b = normal_equation_beta(design, y);
    let f = design.x.mul_vec(&b);
    y.iter().zip(&f).map(|(a, c)| (a - c).powi(2)).sum()
}

pub fn design_from(labels: &[&str], cols: &[Vec<f64>]) -> DesignMatrix {
    DesignMatrix::from_columns(labels, cols)
}

/// AR(1) series `e_t = φ e_{t−1} + z_t` started from the stationary law.
pub fn ar1(rng: &mut ChaCha8Rng, n: usize, phi: f64) -> Vec<f64> {
    let z = normals(rng, n);
    let mut e = vec![z[0] / (1.0 - phi * phi).sqrt()];
    for t in 1..n {
        e.push(phi * e[t - 1] + z[t]);
    }
    e
}

pub fn default_dataset(seed: u64) -> monetif_core::series::Dataset {
    use monetif_core::synth::{synthetic_dataset, IfGenConfig, RateGenConfig};
    synthetic_dataset(&IfGenConfig::default(), &RateGenConfig::default(), seed).unwrap()
}
