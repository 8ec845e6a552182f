//! Dense least squares on a column-major matrix via Householder QR.

use crate::error::{Error, Result};

/// Column-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
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

    /// All columns must share one length.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let rows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::InvalidInput("design columns differ in length".into()));
        }
        let mut data = Vec::with_capacity(rows * columns.len());
        for c in columns {
            data.extend_from_slice(c);
        }
        Ok(Self {
            rows,
            cols: columns.len(),
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn column_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.rows + i]
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.cols).map(|j| self.get(i, j)).collect()
    }

    /// Leading `n` rows.
    pub fn top_rows(&self, n: usize) -> Matrix {
        let mut out = Matrix::zeros(n, self.cols);
        for j in 0..self.cols {
            out.column_mut(j).copy_from_slice(&self.column(j)[..n]);
        }
        out
    }

    pub fn mul_vec(&self, b: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        for (j, &bj) in b.iter().enumerate().take(self.cols) {
            for (o, x) in out.iter_mut().zip(self.column(j)) {
                *o += x * bj;
            }
        }
        out
    }

    /// `X' v`.
    pub fn tr_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.cols).map(|j| dot(self.column(j), v)).collect()
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

const RANK_TOL: f64 = 1e-10;

/// Compact Householder QR factorisation.
#[derive(Clone, Debug)]
pub struct Qr {
    rows: usize,
    cols: usize,
    // R above the diagonal, Householder vectors below (with implicit leading 1).
    packed: Vec<f64>,
    betas: Vec<f64>,
    rdiag: Vec<f64>,
}

impl Qr {
    /// Factorises `x`, failing when any column lies (numerically) in the span
    /// of the columns before it.
    pub fn new(x: &Matrix) -> Result<Self> {
        let (m, n) = (x.rows, x.cols);
        if m < n {
            return Err(Error::Length { needed: n, got: m });
        }
        let norms: Vec<f64> = (0..n).map(|j| dot(x.column(j), x.column(j)).sqrt()).collect();
        let mut a = x.data.clone();
        let mut betas = vec![0.0; n];
        let mut rdiag = vec![0.0; n];
        let mut dependent = Vec::new();
        for k in 0..n {
            let col = &mut a[k * m..(k + 1) * m];
            let sigma: f64 = col[k + 1..].iter().map(|v| v * v).sum();
            let alpha = col[k];
            let norm = (alpha * alpha + sigma).sqrt();
            if norm <= RANK_TOL * norms[k] || norms[k] == 0.0 {
                dependent.push(k);
                continue;
            }
            let r = if alpha > 0.0 { -norm } else { norm };
            let v0 = alpha - r;
            for v in col[k + 1..].iter_mut() {
                *v /= v0;
            }
            let beta = -v0 / r;
            betas[k] = beta;
            rdiag[k] = r;
            col[k] = r;
            // apply H = I - beta v v' to the trailing columns
            let (head, tail) = a.split_at_mut((k + 1) * m);
            let v = &head[k * m..(k + 1) * m];
            for j in 0..(n - k - 1) {
                let c = &mut tail[j * m..(j + 1) * m];
                let mut s = c[k];
                for i in k + 1..m {
                    s += v[i] * c[i];
                }
                s *= beta;
                c[k] -= s;
                for i in k + 1..m {
                    c[i] -= s * v[i];
                }
            }
        }
        if !dependent.is_empty() {
            return Err(Error::Singular { columns: dependent });
        }
        Ok(Self {
            rows: m,
            cols: n,
            packed: a,
            betas,
            rdiag,
        })
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Overwrites `y` with `Q' y`.
    pub fn qt_mul(&self, y: &mut [f64]) {
        let m = self.rows;
        for k in 0..self.cols {
            let v = &self.packed[k * m..(k + 1) * m];
            let mut s = y[k];
            for i in k + 1..m {
                s += v[i] * y[i];
            }
            s *= self.betas[k];
            y[k] -= s;
            for i in k + 1..m {
                y[i] -= s * v[i];
            }
        }
    }

    fn r(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.rdiag[i]
        } else {
            self.packed[j * self.rows + i]
        }
    }

    /// Solves `R_q b = z[..q]` for the leading `q` columns.
    pub fn solve_prefix(&self, z: &[f64], q: usize) -> Vec<f64> {
        let mut b = z[..q].to_vec();
        for i in (0..q).rev() {
            let mut s = b[i];
            for j in i + 1..q {
                s -= self.r(i, j) * b[j];
            }
            b[i] = s / self.r(i, i);
        }
        b
    }

    /// Diagonal element `j` of `(R_q' R_q)^{-1}`, i.e. of `(X_q' X_q)^{-1}`.
    pub fn xtx_inv_diag_prefix(&self, j: usize, q: usize) -> f64 {
        // row j of R_q^{-1} solves R_q' u = e_j
        let mut u = vec![0.0; q];
        for i in j..q {
            let mut s = if i == j { 1.0 } else { 0.0 };
            for l in j..i {
                s -= self.r(l, i) * u[l];
            }
            u[i] = s / self.r(i, i);
        }
        u.iter().map(|v| v * v).sum()
    }

    /// Full `(X' X)^{-1}`.
    pub fn xtx_inv(&self) -> Vec<Vec<f64>> {
        let n = self.cols;
        // R^{-1}, upper triangular
        let mut rinv = vec![vec![0.0; n]; n];
        for j in 0..n {
            rinv[j][j] = 1.0 / self.r(j, j);
            for i in (0..j).rev() {
                let mut s = 0.0;
                for l in i + 1..=j {
                    s += self.r(i, l) * rinv[l][j];
                }
                rinv[i][j] = -s / self.r(i, i);
            }
        }
        let mut out = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i..n {
                let s: f64 = (j..n).map(|l| rinv[i][l] * rinv[j][l]).sum();
                out[i][j] = s;
                out[j][i] = s;
            }
        }
        out
    }
}

/// Covariance estimator for OLS coefficients.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovarianceKind {
    /// `s^2 (X'X)^{-1}`.
    #[default]
    Conventional,
    /// White heteroskedasticity-consistent with the `n/(n-k)` correction (HC1).
    Hc1,
}

#[derive(Clone, Debug)]
pub struct OlsFit {
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub ssr: f64,
    /// `ssr / (n - k)`.
    pub sigma2: f64,
    pub r_squared: f64,
    pub nobs: usize,
}

impl OlsFit {
    pub fn t_stat(&self, j: usize) -> f64 {
        self.coefficients[j] / self.std_errors[j]
    }

    pub fn dof(&self) -> usize {
        self.nobs - self.coefficients.len()
    }
}

pub fn ols(x: &Matrix, y: &[f64]) -> Result<OlsFit> {
    ols_with(x, y, CovarianceKind::Conventional)
}

pub fn ols_with(x: &Matrix, y: &[f64], cov: CovarianceKind) -> Result<OlsFit> {
    let (n, k) = (x.rows(), x.cols());
    if y.len() != n {
        return Err(Error::InvalidInput(format!(
            "response has {} rows, design has {n}",
            y.len()
        )));
    }
    if n <= k {
        return Err(Error::Length { needed: k + 1, got: n });
    }
    let qr = Qr::new(x)?;
    let mut z = y.to_vec();
    qr.qt_mul(&mut z);
    let coefficients = qr.solve_prefix(&z, k);
    let fitted = x.mul_vec(&coefficients);
    let residuals: Vec<f64> = y.iter().zip(&fitted).map(|(a, b)| a - b).collect();
    let ssr = dot(&residuals, &residuals);
    let sigma2 = ssr / (n - k) as f64;
    let xtx_inv = qr.xtx_inv();
    let covariance: Vec<Vec<f64>> = match cov {
        CovarianceKind::Conventional => xtx_inv
            .iter()
            .map(|row| row.iter().map(|v| v * sigma2).collect())
            .collect(),
        CovarianceKind::Hc1 => {
            // (X'X)^{-1} X' diag(e^2) X (X'X)^{-1} * n/(n-k)
            let mut meat = vec![vec![0.0; k]; k];
            for t in 0..n {
                let e2 = residuals[t] * residuals[t];
                for a in 0..k {
                    let xa = x.get(t, a) * e2;
                    for b in a..k {
                        meat[a][b] += xa * x.get(t, b);
                    }
                }
            }
            for a in 0..k {
                for b in 0..a {
                    meat[a][b] = meat[b][a];
                }
            }
            let scale = n as f64 / (n - k) as f64;
            let left = mat_mul(&xtx_inv, &meat);
            mat_mul(&left, &xtx_inv)
                .into_iter()
                .map(|row| row.into_iter().map(|v| v * scale).collect())
                .collect()
        }
    };
    let std_errors = (0..k).map(|j| covariance[j][j].max(0.0).sqrt()).collect();
    let mean = y.iter().sum::<f64>() / n as f64;
    let sst: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
    let r_squared = if sst > 0.0 { 1.0 - ssr / sst } else { 0.0 };
    Ok(OlsFit {
        coefficients,
        std_errors,
        covariance,
        residuals,
        ssr,
        sigma2,
        r_squared,
        nobs: n,
    })
}

pub(crate) fn mat_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let m = b.first().map_or(0, Vec::len);
    let inner = b.len();
    let mut out = vec![vec![0.0; m]; n];
    for i in 0..n {
        for l in 0..inner {
            let ail = a[i][l];
            for j in 0..m {
                out[i][j] += ail * b[l][j];
            }
        }
    }
    out
}
