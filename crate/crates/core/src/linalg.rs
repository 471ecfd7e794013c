//! Dense row-major matrices and a Householder QR least-squares solver.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds a matrix from equal-length columns.
    pub fn from_columns(columns: &[Vec<f64>]) -> Self {
        let cols = columns.len();
        let rows = columns.first().map_or(0, Vec::len);
        let mut m = Self::zeros(rows, cols);
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows, "ragged columns");
            for (i, &v) in col.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(n * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Self { rows: n, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len(), "dimension mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `selfᵀ v`
    pub fn tr_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.rows, v.len(), "dimension mismatch");
        let mut out = vec![0.0; self.cols];
        for (i, &vi) in v.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += a * vi;
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    /// Keeps the listed rows, in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            rows: idx.len(),
            cols: self.cols,
            data,
        }
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Householder QR factorisation of a tall matrix (`rows >= cols`).
///
/// `R` is stored in the upper triangle of `qr`; the Householder vectors live
/// below the diagonal with their leading components in `head`.
#[derive(Debug, Clone)]
pub struct Qr {
    qr: Matrix,
    head: Vec<f64>,
    r_diag: Vec<f64>,
}

impl Qr {
    pub fn new(a: &Matrix) -> Self {
        let (m, n) = (a.rows(), a.cols());
        assert!(m >= n, "QR needs rows >= cols");
        let mut qr = a.clone();
        let mut head = vec![0.0; n];
        let mut r_diag = vec![0.0; n];
        for k in 0..n {
            let norm = (k..m).map(|i| qr[(i, k)].powi(2)).sum::<f64>().sqrt();
            if norm == 0.0 {
                r_diag[k] = 0.0;
                head[k] = 0.0;
                continue;
            }
            let alpha = if qr[(k, k)] > 0.0 { -norm } else { norm };
            // v = x - alpha e1, stored in place
            qr[(k, k)] -= alpha;
            let vnorm2: f64 = (k..m).map(|i| qr[(i, k)].powi(2)).sum();
            for j in k + 1..n {
                let dot: f64 = (k..m).map(|i| qr[(i, k)] * qr[(i, j)]).sum();
                let f = 2.0 * dot / vnorm2;
                for i in k..m {
                    let vik = qr[(i, k)];
                    qr[(i, j)] -= f * vik;
                }
            }
            head[k] = qr[(k, k)];
            r_diag[k] = alpha;
        }
        Self { qr, head, r_diag }
    }

    pub fn r_diagonal(&self) -> &[f64] {
        &self.r_diag
    }

    fn r(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.r_diag[i]
        } else {
            self.qr[(i, j)]
        }
    }

    /// Applies `Qᵀ` to `b` in place.
    pub fn apply_qt(&self, b: &mut [f64]) {
        let (m, n) = (self.qr.rows(), self.qr.cols());
        assert_eq!(b.len(), m);
        for k in 0..n {
            if self.head[k] == 0.0 && self.r_diag[k] == 0.0 {
                continue;
            }
            let v = |i: usize| if i == k { self.head[k] } else { self.qr[(i, k)] };
            let vnorm2: f64 = (k..m).map(|i| v(i).powi(2)).sum();
            if vnorm2 == 0.0 {
                continue;
            }
            let dot: f64 = (k..m).map(|i| v(i) * b[i]).sum();
            let f = 2.0 * dot / vnorm2;
            for (i, bi) in b.iter_mut().enumerate().skip(k) {
                *bi -= f * v(i);
            }
        }
    }

    /// Least-squares solution of `A x ≈ b`. Assumes full column rank.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.qr.cols();
        let mut qtb = b.to_vec();
        self.apply_qt(&mut qtb);
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = qtb[i];
            for j in i + 1..n {
                s -= self.r(i, j) * x[j];
            }
            x[i] = s / self.r_diag[i];
        }
        x
    }

    /// `R⁻¹` (upper triangular).
    pub fn r_inverse(&self) -> Matrix {
        let n = self.qr.cols();
        let mut inv = Matrix::zeros(n, n);
        for col in 0..n {
            // solve R x = e_col
            for i in (0..=col).rev() {
                let mut s = if i == col { 1.0 } else { 0.0 };
                for j in i + 1..=col {
                    s -= self.r(i, j) * inv[(j, col)];
                }
                inv[(i, col)] = s / self.r_diag[i];
            }
        }
        inv
    }

    /// `(AᵀA)⁻¹ = R⁻¹ R⁻ᵀ`.
    pub fn gram_inverse(&self) -> Matrix {
        let rinv = self.r_inverse();
        rinv.matmul(&rinv.transpose())
    }

    /// Indices of columns whose `|R_jj|` falls below `rel_tol` times the largest.
    pub fn deficient_columns(&self, rel_tol: f64) -> Vec<usize> {
        let max = self.r_diag.iter().map(|v| v.abs()).fold(0.0, f64::max);
        self.r_diag
            .iter()
            .enumerate()
            .filter(|(_, v)| max == 0.0 || v.abs() < rel_tol * max)
            .map(|(j, _)| j)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qr_solves_square_system() {
        let a = Matrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 3.0]]);
        let x = Qr::new(&a).solve(&[3.0, 5.0]);
        assert!((x[0] - 0.8).abs() < 1e-14);
        assert!((x[1] - 1.4).abs() < 1e-14);
    }

    #[test]
    fn gram_inverse_matches_direct_inverse() {
        let a = Matrix::from_rows(&[
            vec![1.0, 0.0],
            vec![1.0, 1.0],
            vec![1.0, 2.0],
            vec![1.0, 5.0],
        ]);
        let g = a.transpose().matmul(&a);
        let inv = Qr::new(&a).gram_inverse();
        let prod = g.matmul(&inv);
        assert!(prod.max_abs_diff(&Matrix::identity(2)) < 1e-12);
    }

    #[test]
    fn qt_preserves_norm() {
        let a = Matrix::from_rows(&[vec![1.0, 4.0], vec![2.0, -1.0], vec![0.5, 3.0]]);
        let qr = Qr::new(&a);
        let mut b = vec![1.0, -2.0, 7.0];
        let before: f64 = b.iter().map(|v| v * v).sum();
        qr.apply_qt(&mut b);
        let after: f64 = b.iter().map(|v| v * v).sum();
        assert!((before - after).abs() < 1e-12);
    }

    #[test]
    fn deficient_column_is_flagged() {
        let a = Matrix::from_columns(&[vec![1.0, 1.0, 1.0], vec![1.0, 2.0, 3.0], vec![2.0, 4.0, 6.0]]);
        assert_eq!(Qr::new(&a).deficient_columns(1e-10), vec![2]);
    }
}
