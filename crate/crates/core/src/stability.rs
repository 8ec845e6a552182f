//! Recursive residuals and the CUSUM / CUSUM-of-squares stability tests.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::Level;
use crate::linalg::{Matrix, Qr};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CusumKind {
    Cusum,
    CusumSq,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CusumPath {
    pub kind: CusumKind,
    pub k: usize,
    pub n: usize,
    pub level: Level,
    /// `a` for CUSUM, `c0` for CUSUM of squares.
    pub bound_constant: f64,
    /// Observation index `r` (1-based), `k + 1 ..= n`.
    pub r: Vec<usize>,
    pub statistics: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub breached: bool,
    pub first_breach: Option<usize>,
}

impl CusumPath {
    fn assemble(
        kind: CusumKind,
        k: usize,
        n: usize,
        level: Level,
        bound_constant: f64,
        statistics: Vec<f64>,
        lower: Vec<f64>,
        upper: Vec<f64>,
    ) -> Self {
        let r: Vec<usize> = (k + 1..=n).collect();
        let first_breach = (0..statistics.len())
            .find(|&i| statistics[i] < lower[i] || statistics[i] > upper[i])
            .map(|i| r[i]);
        Self {
            kind,
            k,
            n,
            level,
            bound_constant,
            r,
            statistics,
            lower,
            upper,
            breached: first_breach.is_some(),
            first_breach,
        }
    }
}

/// Recursive estimates: standardized one-step-ahead residuals and the
/// coefficient vector after the last update.
#[derive(Clone, Debug, PartialEq)]
pub struct RecursiveFit {
    pub w: Vec<f64>,
    pub beta: Vec<f64>,
}

/// `w_r = (y_r - x_r' b_{r-1}) / sqrt(1 + x_r' (X'X)^{-1}_{r-1} x_r)` for
/// `r = k+1..n`.
pub fn recursive_residuals(y: &[f64], x: &Matrix) -> Result<Vec<f64>> {
    Ok(recursive_fit(y, x)?.w)
}

pub fn recursive_fit(y: &[f64], x: &Matrix) -> Result<RecursiveFit> {
    let n = x.rows();
    let k = x.cols();
    if y.len() != n {
        return Err(Error::InvalidInput(format!("response has {} rows, design {n}", y.len())));
    }
    if n <= k {
        return Err(Error::Length { needed: k + 1, got: n });
    }
    // exact fit on the first k rows
    let head = x.top_rows(k);
    let qr = Qr::new(&head)?;
    let mut z = y[..k].to_vec();
    qr.qt_mul(&mut z);
    let mut beta = qr.solve_prefix(&z, k);
    let mut p = qr.xtx_inv();

    let mut w = Vec::with_capacity(n - k);
    let mut px = vec![0.0; k];
    for t in k..n {
        let row = x.row(t);
        for a in 0..k {
            px[a] = (0..k).map(|b| p[a][b] * row[b]).sum();
        }
        let f = 1.0 + (0..k).map(|a| row[a] * px[a]).sum::<f64>();
        let e = y[t] - (0..k).map(|a| row[a] * beta[a]).sum::<f64>();
        w.push(e / f.sqrt());
        for a in 0..k {
            beta[a] += px[a] * e / f;
        }
        for a in 0..k {
            for b in 0..k {
                p[a][b] -= px[a] * px[b] / f;
            }
        }
    }
    Ok(RecursiveFit { w, beta })
}

/// CUSUM bound coefficient `a`.
pub fn cusum_coefficient(level: Level) -> f64 {
    match level {
        Level::One => 1.143,
        Level::Five => 0.948,
        Level::Ten => 0.850,
    }
}

fn check_lengths(w: &[f64], k: usize, n: usize) -> Result<()> {
    if n <= k || w.len() != n - k {
        return Err(Error::InvalidInput(format!(
            "expected n - k = {} recursive residuals, got {}",
            n.saturating_sub(k),
            w.len()
        )));
    }
    Ok(())
}

/// Sample standard deviation with `n - k - 1` denominator.
pub fn residual_scale(w: &[f64]) -> f64 {
    let m = w.len() as f64;
    if w.len() < 2 {
        return 0.0;
    }
    let mean = w.iter().sum::<f64>() / m;
    (w.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1.0)).sqrt()
}

/// `W_r = sum_{j<=r} w_j / s_w` with bounds `+/- a (sqrt(n-k) + 2 (r-k) / sqrt(n-k))`.
pub fn cusum(w: &[f64], k: usize, n: usize, level: Level) -> Result<CusumPath> {
    check_lengths(w, k, n)?;
    let s = residual_scale(w);
    let a = cusum_coefficient(level);
    let root = ((n - k) as f64).sqrt();
    let mut acc = 0.0;
    let mut stats = Vec::with_capacity(w.len());
    let mut lower = Vec::with_capacity(w.len());
    let mut upper = Vec::with_capacity(w.len());
    for (i, v) in w.iter().enumerate() {
        acc += v;
        stats.push(if s > 0.0 { acc / s } else { 0.0 });
        let bound = a * (root + 2.0 * (i + 1) as f64 / root);
        lower.push(-bound);
        upper.push(bound);
    }
    Ok(CusumPath::assemble(CusumKind::Cusum, k, n, level, a, stats, lower, upper))
}

// Upper quantiles of max_r (S_r - r/m) for m iid N(0,1) recursive residuals,
// at one-sided 0.5%, 2.5%, 5% (two-sided 1%, 5%, 10%). 400k replications per
// row, generated by tools/cusumsq_table.py.
const C0_GRID: [(usize, [f64; 3]); 30] = [
    (5, [0.6875, 0.5698, 0.5153]),
    (6, [0.6559, 0.5534, 0.4885]),
    (7, [0.6331, 0.5267, 0.4705]),
    (8, [0.6119, 0.5086, 0.4534]),
    (9, [0.5927, 0.4917, 0.4375]),
    (10, [0.5720, 0.4732, 0.4225]),
    (12, [0.5380, 0.4447, 0.3964]),
    (14, [0.5108, 0.4200, 0.3743]),
    (16, [0.4841, 0.3999, 0.3563]),
    (18, [0.4632, 0.3821, 0.3409]),
    (20, [0.4429, 0.3661, 0.3264]),
    (25, [0.4056, 0.3350, 0.2989]),
    (30, [0.3750, 0.3094, 0.2765]),
    (35, [0.3518, 0.2900, 0.2593]),
    (40, [0.3306, 0.2737, 0.2445]),
    (50, [0.3013, 0.2479, 0.2217]),
    (60, [0.2771, 0.2286, 0.2045]),
    (70, [0.2570, 0.2131, 0.1910]),
    (80, [0.2420, 0.2005, 0.1794]),
    (90, [0.2292, 0.1897, 0.1698]),
    (100, [0.2179, 0.1805, 0.1617]),
    (120, [0.2003, 0.1660, 0.1488]),
    (140, [0.1866, 0.1546, 0.1385]),
    (160, [0.1745, 0.1448, 0.1300]),
    (180, [0.1652, 0.1369, 0.1230]),
    (200, [0.1564, 0.1302, 0.1169]),
    (250, [0.1408, 0.1168, 0.1050]),
    (300, [0.1289, 0.1071, 0.0963]),
    (400, [0.1125, 0.0934, 0.0840]),
    (500, [0.1008, 0.0836, 0.0752]),
];

// Edgerton & Wells (1994) response surface, c0 = a/sqrt(h) + b/h + c/h^1.5
// with h = m/2 - 1; used beyond the simulated grid.
const EDGERTON_WELLS: [[f64; 3]; 3] = [
    [1.6276236, -0.6703724, -1.2365861],
    [1.3581015, -0.6701218, -0.8858694],
    [1.2238734, -0.6700069, -0.7351697],
];

fn level_column(level: Level) -> usize {
    match level {
        Level::One => 0,
        Level::Five => 1,
        Level::Ten => 2,
    }
}

/// CUSUM-of-squares bound `c0` for `m = n - k` residuals, linearly
/// interpolated in `m` on the simulated grid.
pub fn cusum_sq_c0(m: usize, level: Level) -> Result<f64> {
    let col = level_column(level);
    let first = C0_GRID[0].0;
    if m < first {
        return Err(Error::Range(format!("CUSUM of squares needs at least {first} recursive residuals, got {m}")));
    }
    if let Some(pair) = C0_GRID.windows(2).find(|w| m >= w[0].0 && m <= w[1].0) {
        let (m0, c0) = (pair[0].0 as f64, pair[0].1[col]);
        let (m1, c1) = (pair[1].0 as f64, pair[1].1[col]);
        return Ok(c0 + (m as f64 - m0) / (m1 - m0) * (c1 - c0));
    }
    let h = m as f64 / 2.0 - 1.0;
    let [a, b, c] = EDGERTON_WELLS[col];
    Ok(a / h.sqrt() + b / h + c / h.powf(1.5))
}

/// Footer text describing how the CUSUM-of-squares bounds were obtained.
pub const CUSUM_SQ_BOUND_NOTE: &str = "c0 from simulated quantiles of max(S_r - (r-k)/(n-k)) under iid normal \
recursive residuals (400k replications per grid point), linear in n-k; Edgerton-Wells approximation beyond n-k = 500";

/// `S_r = sum_{j<=r} w_j^2 / sum_j w_j^2` with bounds `(r-k)/(n-k) +/- c0`.
pub fn cusum_sq(w: &[f64], k: usize, n: usize, level: Level) -> Result<CusumPath> {
    check_lengths(w, k, n)?;
    let total: f64 = w.iter().map(|v| v * v).sum();
    if !(total > 0.0) {
        return Err(Error::Degenerate("recursive residuals are all zero".into()));
    }
    let m = n - k;
    let c0 = cusum_sq_c0(m, level)?;
    let mut acc = 0.0;
    let mut stats = Vec::with_capacity(m);
    let mut lower = Vec::with_capacity(m);
    let mut upper = Vec::with_capacity(m);
    for (i, v) in w.iter().enumerate() {
        acc += v * v;
        stats.push(if i + 1 == m { 1.0 } else { acc / total });
        let line = (i + 1) as f64 / m as f64;
        lower.push(line - c0);
        upper.push(line + c0);
    }
    Ok(CusumPath::assemble(CusumKind::CusumSq, k, n, level, c0, stats, lower, upper))
}
