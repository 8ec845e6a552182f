//! Augmented Dickey-Fuller and Phillips-Perron unit-root tests.

use serde::{Deserialize, Serialize};

use crate::cointegration::{default_bandwidth, long_run_variance};
use crate::error::{Error, Result};
use crate::inference::{CriticalValues, Level};
use crate::linalg::{dot, ols, Matrix, Qr};
use crate::series::TimeSeries;

/// Deterministic terms in the test regression.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrendSpec {
    #[default]
    Constant,
    ConstantTrend,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Deterministic {
    None,
    Constant,
    ConstantTrend,
}

impl Deterministic {
    fn count(self) -> usize {
        match self {
            Deterministic::None => 0,
            Deterministic::Constant => 1,
            Deterministic::ConstantTrend => 2,
        }
    }
}

impl From<TrendSpec> for Deterministic {
    fn from(s: TrendSpec) -> Self {
        match s {
            TrendSpec::Constant => Deterministic::Constant,
            TrendSpec::ConstantTrend => Deterministic::ConstantTrend,
        }
    }
}

/// How the augmentation order is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LagRule {
    Bic,
    Aic,
    Fixed(usize),
}

impl Default for LagRule {
    fn default() -> Self {
        LagRule::Bic
    }
}

/// `floor(12 (n/100)^{1/4})`.
pub fn default_max_lags(n: usize) -> usize {
    (12.0 * (n as f64 / 100.0).powf(0.25)).floor() as usize
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct AdfOutcome {
    pub stat: f64,
    pub lags: usize,
}

/// Builds `[x_{t-1}, det..., dx_{t-1}..dx_{t-k}]` and `dx_t` for rows
/// `t = first..n-1` (0-based on `x`).
fn adf_system(x: &[f64], det: Deterministic, k: usize, first: usize) -> (Matrix, Vec<f64>) {
    let n = x.len();
    let rows = n - first;
    let cols = 1 + det.count() + k;
    let mut m = Matrix::zeros(rows, cols);
    let mut y = Vec::with_capacity(rows);
    for (r, t) in (first..n).enumerate() {
        y.push(x[t] - x[t - 1]);
        m.column_mut(0)[r] = x[t - 1];
    }
    let mut c = 1;
    if det.count() >= 1 {
        m.column_mut(c).fill(1.0);
        c += 1;
    }
    if det.count() == 2 {
        for (r, t) in (first..n).enumerate() {
            m.column_mut(c)[r] = t as f64;
        }
        c += 1;
    }
    for j in 1..=k {
        let col = m.column_mut(c);
        for (r, t) in (first..n).enumerate() {
            col[r] = x[t - j] - x[t - j - 1];
        }
        c += 1;
    }
    (m, y)
}

fn t_on_first(qr: &Qr, z: &[f64], q: usize, ssr: f64, nobs: usize) -> f64 {
    let b = qr.solve_prefix(z, q);
    let s2 = ssr / (nobs - q) as f64;
    b[0] / (s2 * qr.xtx_inv_diag_prefix(0, q)).sqrt()
}

/// Dickey-Fuller t-ratio on the lagged level with `k` augmentation lags.
///
/// Automatic orders compare information criteria on the common sample that
/// the largest order allows, then the chosen order is re-estimated on its
/// own maximal sample.
pub(crate) fn adf_engine(
    x: &[f64],
    det: Deterministic,
    rule: LagRule,
    max_lags: Option<usize>,
) -> Result<AdfOutcome> {
    let n = x.len();
    let ndet = det.count();
    let chosen = match rule {
        LagRule::Fixed(k) => k,
        LagRule::Bic | LagRule::Aic => {
            let mut kmax = max_lags.unwrap_or_else(|| default_max_lags(n));
            // keep enough degrees of freedom in the common sample
            while kmax > 0 && (n as isize - 1 - kmax as isize) < (2 * (kmax + 1 + ndet) + 10) as isize {
                kmax -= 1;
            }
            let first = kmax + 1;
            if n <= first + ndet + 2 {
                return Err(Error::Length {
                    needed: first + ndet + 3,
                    got: n,
                });
            }
            let (m, y) = adf_system(x, det, kmax, first);
            let nobs = y.len();
            let qr = Qr::new(&m)?;
            let mut z = y.clone();
            qr.qt_mul(&mut z);
            let total = dot(&y, &y);
            let mut explained: f64 = z[..1 + ndet].iter().map(|v| v * v).sum();
            let mut best = (f64::INFINITY, 0usize);
            let ln_n = (nobs as f64).ln();
            for k in 0..=kmax {
                if k > 0 {
                    explained += z[ndet + k] * z[ndet + k];
                }
                let q = 1 + ndet + k;
                let ssr = (total - explained).max(f64::MIN_POSITIVE);
                let penalty = match rule {
                    LagRule::Aic => 2.0,
                    _ => ln_n,
                };
                let ic = (ssr / nobs as f64).ln() + q as f64 * penalty / nobs as f64;
                if ic < best.0 {
                    best = (ic, k);
                }
            }
            best.1
        }
    };
    let first = chosen + 1;
    let q = 1 + ndet + chosen;
    if n < first + q + 2 {
        return Err(Error::Length {
            needed: first + q + 2,
            got: n,
        });
    }
    let (m, y) = adf_system(x, det, chosen, first);
    let qr = Qr::new(&m)?;
    let mut z = y.clone();
    qr.qt_mul(&mut z);
    let ssr: f64 = z[q..].iter().map(|v| v * v).sum();
    if !(ssr > 0.0) {
        return Err(Error::Degenerate("perfect fit in the ADF regression".into()));
    }
    Ok(AdfOutcome {
        stat: t_on_first(&qr, &z, q, ssr, y.len()),
        lags: chosen,
    })
}

/// MacKinnon (2010) response-surface coefficients for a single series:
/// `cv(T) = b0 + b1/T + b2/T^2 + b3/T^3`.
const MACKINNON_CONSTANT: [[f64; 4]; 3] = [
    [-3.43035, -6.5393, -16.786, -79.433],
    [-2.86154, -2.8903, -4.234, -40.040],
    [-2.56677, -1.5384, -2.809, 0.0],
];
const MACKINNON_TREND: [[f64; 4]; 3] = [
    [-3.95877, -9.0531, -28.428, -134.155],
    [-3.41049, -4.3904, -9.036, -45.374],
    [-3.12705, -2.5856, -3.925, -22.380],
];

/// Finite-sample Dickey-Fuller critical values for `nobs` observations.
pub fn mackinnon_critical_values(spec: TrendSpec, nobs: usize) -> CriticalValues {
    let table = match spec {
        TrendSpec::Constant => &MACKINNON_CONSTANT,
        TrendSpec::ConstantTrend => &MACKINNON_TREND,
    };
    let t = nobs as f64;
    let eval = |b: &[f64; 4]| b[0] + b[1] / t + b[2] / (t * t) + b[3] / (t * t * t);
    CriticalValues::new(eval(&table[0]), eval(&table[1]), eval(&table[2]))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitRootResult {
    pub statistic: f64,
    /// Augmentation order (ADF) or Bartlett bandwidth (PP).
    pub chosen_lags_or_bandwidth: usize,
    pub critical_values: CriticalValues,
    pub reject_at: Option<Level>,
    pub spec: TrendSpec,
}

fn finite_input(s: &TimeSeries) -> Result<()> {
    if s.len() < 20 {
        return Err(Error::Length {
            needed: 20,
            got: s.len(),
        });
    }
    if let Some(i) = s.values().iter().position(|v| !v.is_finite()) {
        return Err(Error::Domain {
            date: s.date_at(i),
            reason: "non-finite value".into(),
        });
    }
    Ok(())
}

fn require_variation(s: &TimeSeries) -> Result<()> {
    let v = s.values();
    if v.iter().all(|x| *x == v[0]) {
        return Err(Error::Singular { columns: vec![0] });
    }
    Ok(())
}

/// ADF test with BIC-selected order by default.
pub fn adf_test(s: &TimeSeries, spec: TrendSpec, max_lags: Option<usize>) -> Result<UnitRootResult> {
    adf_test_with(s, spec, LagRule::Bic, max_lags)
}

pub fn adf_test_with(
    s: &TimeSeries,
    spec: TrendSpec,
    rule: LagRule,
    max_lags: Option<usize>,
) -> Result<UnitRootResult> {
    finite_input(s)?;
    require_variation(s)?;
    let out = adf_engine(s.values(), spec.into(), rule, max_lags)?;
    let cv = mackinnon_critical_values(spec, s.len() - 1 - out.lags);
    Ok(UnitRootResult {
        statistic: out.stat,
        chosen_lags_or_bandwidth: out.lags,
        critical_values: cv,
        reject_at: cv.reject_at(out.stat),
        spec,
    })
}

/// Phillips-Perron Z_t with a Bartlett long-run variance.
pub fn pp_test(s: &TimeSeries, spec: TrendSpec, bandwidth: Option<usize>) -> Result<UnitRootResult> {
    finite_input(s)?;
    require_variation(s)?;
    let x = s.values();
    let n = x.len();
    let t_obs = n - 1;
    let mut cols = vec![x[..n - 1].to_vec(), vec![1.0; t_obs]];
    if spec == TrendSpec::ConstantTrend {
        cols.push((1..n).map(|t| t as f64).collect());
    }
    let m = Matrix::from_columns(&cols)?;
    let fit = ols(&m, &x[1..])?;
    let bw = bandwidth.unwrap_or_else(|| default_bandwidth(n));
    let lrv = long_run_variance(&fit.residuals, bw)?;
    let gamma0 = lrv.gamma0;
    let lambda2 = lrv.sigma2;
    let se = fit.std_errors[0];
    let s_hat = fit.sigma2.sqrt();
    let t_rho = (fit.coefficients[0] - 1.0) / se;
    let stat = (gamma0 / lambda2).sqrt() * t_rho
        - 0.5 * (lambda2 - gamma0) / lambda2.sqrt() * (t_obs as f64 * se / s_hat);
    let cv = mackinnon_critical_values(spec, t_obs);
    Ok(UnitRootResult {
        statistic: stat,
        chosen_lags_or_bandwidth: bw,
        critical_values: cv,
        reject_at: cv.reject_at(stat),
        spec,
    })
}
