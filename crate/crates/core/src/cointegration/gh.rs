//! Residual-based cointegration tests allowing one break at an unknown date.
//!
//! Every admissible break position is tried; each statistic keeps its own
//! minimum and minimising date.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::critical::{gh_critical_values, GhStatistic, SourcedCriticalValues};
use super::design::{design_columns, require_aligned, GhModel, Trim};
use super::phillips::{default_bandwidth, phillips_stats};
use crate::error::{Error, Result};
use crate::linalg::{Qr, Matrix};
use crate::series::{MonthIndex, TimeSeries};
use crate::unitroot::{adf_engine, Deterministic, LagRule};

/// Tuning for [`gh_test`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GhOptions {
    pub trim: Trim,
    /// Bartlett bandwidth for Z_t / Z_alpha; `None` uses `floor(4 (n/100)^{2/9})`.
    pub bandwidth: Option<usize>,
    /// Augmentation order rule for the residual ADF regression.
    pub lag_rule: LagRule,
    /// Upper bound for automatic lag search; `None` uses `floor(12 (n/100)^{1/4})`.
    pub max_lags: Option<usize>,
}

impl Default for GhOptions {
    fn default() -> Self {
        Self {
            trim: Trim::default(),
            bandwidth: None,
            lag_rule: LagRule::Bic,
            max_lags: None,
        }
    }
}

/// ADF t-statistic on `eps_{t-1}` in the regression of `d eps_t` on
/// `eps_{t-1}, d eps_{t-1}, ..., d eps_{t-K}` without deterministic terms.
/// `k = None` selects K by BIC.
pub fn adf_on_residuals(eps: &[f64], k: Option<usize>) -> Result<(f64, usize)> {
    let need = k.unwrap_or(0) + 10;
    if eps.len() < need {
        return Err(Error::Length {
            needed: need,
            got: eps.len(),
        });
    }
    let rule = k.map_or(LagRule::Bic, LagRule::Fixed);
    let out = adf_engine(eps, Deterministic::None, rule, None)?;
    Ok((out.stat, out.lags))
}

fn adf_on_residuals_with(eps: &[f64], rule: LagRule, max_lags: Option<usize>) -> Result<(f64, usize)> {
    let out = adf_engine(eps, Deterministic::None, rule, max_lags)?;
    Ok((out.stat, out.lags))
}

/// Statistics for one candidate break.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateStats {
    /// 1-based index of the last pre-break observation.
    pub position: usize,
    pub adf: f64,
    pub adf_lags: usize,
    pub z_t: f64,
    pub z_alpha: f64,
}

/// Regresses `y` on the model design with a break after `position` and
/// returns the residuals.
pub(crate) fn break_residuals(y: &[f64], xs: &[&[f64]], model: GhModel, position: usize) -> Result<Vec<f64>> {
    let mat = design_columns(xs, y.len(), model, Some(position));
    residuals(&mat, y)
}

fn residuals(mat: &Matrix, y: &[f64]) -> Result<Vec<f64>> {
    let qr = Qr::new(mat)?;
    let mut z = y.to_vec();
    qr.qt_mul(&mut z);
    let b = qr.solve_prefix(&z, mat.cols());
    let fitted = mat.mul_vec(&b);
    Ok(y.iter().zip(&fitted).map(|(a, f)| a - f).collect())
}

/// All three statistics at a single break position.
pub fn candidate_stats(
    y: &[f64],
    xs: &[&[f64]],
    model: GhModel,
    position: usize,
    opts: &GhOptions,
) -> Result<CandidateStats> {
    let eps = break_residuals(y, xs, model, position)?;
    let bw = opts.bandwidth.unwrap_or_else(|| default_bandwidth(eps.len()));
    let ph = phillips_stats(&eps, bw)?;
    let (adf, adf_lags) = adf_on_residuals_with(&eps, opts.lag_rule, opts.max_lags)?;
    Ok(CandidateStats {
        position,
        adf,
        adf_lags,
        z_t: ph.z_t,
        z_alpha: ph.z_alpha,
    })
}

/// Minimum of each statistic over the trimmed window, without dates.
#[derive(Clone, Debug, PartialEq)]
pub struct GhMinima {
    pub adf: (f64, usize, usize),
    pub z_t: (f64, usize),
    pub z_alpha: (f64, usize),
    pub trace: Vec<CandidateStats>,
}

/// Slice-level driver shared by [`gh_test`] and the simulation engine.
pub fn gh_minima(y: &[f64], xs: &[&[f64]], model: GhModel, opts: &GhOptions) -> Result<GhMinima> {
    let n = y.len();
    if xs.iter().any(|x| x.len() != n) {
        return Err(Error::Alignment("regressors differ in length from the response".into()));
    }
    let positions: Vec<usize> = opts.trim.positions(n).collect();
    if positions.len() < 10 {
        return Err(Error::Range(format!(
            "trimmed window holds {} candidate breaks (n = {n}); at least 10 required",
            positions.len()
        )));
    }
    if n <= model.column_count(xs.len()) + 20 {
        return Err(Error::Length {
            needed: model.column_count(xs.len()) + 21,
            got: n,
        });
    }
    let trace: Vec<CandidateStats> = positions
        .par_iter()
        .map(|&p| candidate_stats(y, xs, model, p, opts))
        .collect::<Result<_>>()?;
    // strict comparison keeps the earliest date on ties
    let mut adf = (f64::INFINITY, 0, 0);
    let mut zt = (f64::INFINITY, 0);
    let mut za = (f64::INFINITY, 0);
    for c in &trace {
        if c.adf < adf.0 {
            adf = (c.adf, c.position, c.adf_lags);
        }
        if c.z_t < zt.0 {
            zt = (c.z_t, c.position);
        }
        if c.z_alpha < za.0 {
            za = (c.z_alpha, c.position);
        }
    }
    Ok(GhMinima {
        adf,
        z_t: zt,
        z_alpha: za,
        trace,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BreakStat {
    pub statistic: f64,
    pub position: usize,
    /// Last month with the dummy at zero.
    pub break_date: MonthIndex,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GhResult {
    pub model: GhModel,
    pub adf: BreakStat,
    pub adf_lags: usize,
    pub z_t: BreakStat,
    pub z_alpha: BreakStat,
    pub candidate_trace: Vec<CandidateStats>,
    pub critical_values: GhCriticalSet,
    /// Number of stochastic regressors.
    pub m: usize,
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GhCriticalSet {
    pub adf: SourcedCriticalValues,
    pub z_t: SourcedCriticalValues,
    pub z_alpha: SourcedCriticalValues,
}

impl GhCriticalSet {
    pub fn lookup(model: GhModel, m: usize) -> Result<Self> {
        Ok(Self {
            adf: gh_critical_values(model, m, GhStatistic::Adf)?,
            z_t: gh_critical_values(model, m, GhStatistic::Zt)?,
            z_alpha: gh_critical_values(model, m, GhStatistic::Zalpha)?,
        })
    }
}

/// Single-break cointegration test of `y` on `xs` under `model`.
pub fn gh_test(y: &TimeSeries, xs: &[TimeSeries], model: GhModel, opts: &GhOptions) -> Result<GhResult> {
    require_aligned(y, xs)?;
    let critical_values = GhCriticalSet::lookup(model, xs.len())?;
    let slices: Vec<&[f64]> = xs.iter().map(|x| x.values()).collect();
    let mins = gh_minima(y.values(), &slices, model, opts)?;
    let date = |p: usize| y.date_at(p - 1);
    Ok(GhResult {
        model,
        adf: BreakStat {
            statistic: mins.adf.0,
            position: mins.adf.1,
            break_date: date(mins.adf.1),
        },
        adf_lags: mins.adf.2,
        z_t: BreakStat {
            statistic: mins.z_t.0,
            position: mins.z_t.1,
            break_date: date(mins.z_t.1),
        },
        z_alpha: BreakStat {
            statistic: mins.z_alpha.0,
            position: mins.z_alpha.1,
            break_date: date(mins.z_alpha.1),
        },
        candidate_trace: mins.trace,
        critical_values,
        m: xs.len(),
        n: y.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ols;
    use crate::rng::substream;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn walk(r: &mut crate::rng::Rng, n: usize) -> Vec<f64> {
        let mut acc = 0.0;
        (0..n)
            .map(|_| {
                acc += r.sample::<f64, _>(StandardNormal);
                acc
            })
            .collect()
    }

    fn ts(id: &str, v: Vec<f64>) -> TimeSeries {
        TimeSeries::new(id, MonthIndex::new(2002, 7).unwrap(), v).unwrap()
    }

    fn cointegrated(seed: u64, n: usize) -> (TimeSeries, Vec<TimeSeries>) {
        let mut r = substream(seed, 0);
        let x1 = walk(&mut r, n);
        let x2 = walk(&mut r, n);
        let y: Vec<f64> = (0..n)
            .map(|i| {
                let post = if i >= n / 2 { 1.0 } else { 0.0 };
                1.0 + 2.0 * post + x1[i] * (0.5 + post) - 0.8 * x2[i] + 0.3 * r.sample::<f64, _>(StandardNormal)
            })
            .collect();
        (ts("DJ", y), vec![ts("I", x1), ts("U", x2)])
    }

    #[test]
    fn zero_lag_residual_adf_is_dickey_fuller() {
        let mut r = substream(1, 1);
        let e: Vec<f64> = (0..100).map(|_| r.sample::<f64, _>(StandardNormal)).collect();
        let (stat, k) = adf_on_residuals(&e, Some(0)).unwrap();
        assert_eq!(k, 0);
        let m = Matrix::from_columns(&[e[..99].to_vec()]).unwrap();
        let de: Vec<f64> = e.windows(2).map(|w| w[1] - w[0]).collect();
        let fit = ols(&m, &de).unwrap();
        assert!((stat - fit.t_stat(0)).abs() < 1e-10);
        // white noise sits far below any critical value
        let (auto, _) = adf_on_residuals(&e, None).unwrap();
        assert!(auto < -6.0, "{auto}");
    }

    #[test]
    fn random_walk_residual_adf_near_zero() {
        let mut below = 0;
        let mut mean = 0.0;
        for s in 0..200 {
            let mut r = substream(s, 2);
            let e = walk(&mut r, 160);
            let (stat, _) = adf_on_residuals(&e, None).unwrap();
            mean += stat / 200.0;
            if stat < -4.92 {
                below += 1;
            }
        }
        assert!((-1.5..=0.0).contains(&mean), "{mean}");
        assert!(below <= 2);
    }

    #[test]
    fn minimum_property_and_trace_spot_check() {
        let (y, xs) = cointegrated(5, 120);
        let opts = GhOptions::default();
        let res = gh_test(&y, &xs, GhModel::RS, &opts).unwrap();
        let min_adf = res.candidate_trace.iter().map(|c| c.adf).fold(f64::INFINITY, f64::min);
        let min_zt = res.candidate_trace.iter().map(|c| c.z_t).fold(f64::INFINITY, f64::min);
        assert_eq!(res.adf.statistic, min_adf);
        assert_eq!(res.z_t.statistic, min_zt);
        let slices: Vec<&[f64]> = xs.iter().map(|x| x.values()).collect();
        for c in res.candidate_trace.iter().step_by(17).take(5) {
            let again = candidate_stats(y.values(), &slices, GhModel::RS, c.position, &opts).unwrap();
            assert_eq!(&again, c);
        }
        let window = opts.trim.positions(120);
        for b in [&res.adf, &res.z_t, &res.z_alpha] {
            assert!(window.contains(&b.position));
            assert_eq!(b.break_date, y.date_at(b.position - 1));
        }
    }

    #[test]
    fn single_candidate_reduces_to_engle_granger() {
        let (y, xs) = cointegrated(6, 100);
        let slices: Vec<&[f64]> = xs.iter().map(|x| x.values()).collect();
        let c = candidate_stats(y.values(), &slices, GhModel::LS, 50, &GhOptions::default()).unwrap();
        // independent route: explicit regression with the dummy column
        let dummy: Vec<f64> = (0..100).map(|i| if i >= 50 { 1.0 } else { 0.0 }).collect();
        let m = Matrix::from_columns(&[vec![1.0; 100], dummy, slices[0].to_vec(), slices[1].to_vec()]).unwrap();
        let eps = ols(&m, y.values()).unwrap().residuals;
        let (stat, _) = adf_on_residuals(&eps, None).unwrap();
        assert!((stat - c.adf).abs() < 1e-8);
    }

    #[test]
    fn scale_equivariance() {
        let (y, xs) = cointegrated(7, 100);
        let scaled = y.map_values(y.values().iter().map(|v| v * 37.5).collect()).unwrap();
        for model in GhModel::ALL {
            let a = gh_test(&y, &xs, model, &GhOptions::default()).unwrap();
            let b = gh_test(&scaled, &xs, model, &GhOptions::default()).unwrap();
            assert!((a.adf.statistic - b.adf.statistic).abs() < 1e-8);
            assert!((a.z_t.statistic - b.z_t.statistic).abs() < 1e-8);
            assert!((a.z_alpha.statistic - b.z_alpha.statistic).abs() < 1e-8);
        }
    }

    #[test]
    fn narrow_window_rejected() {
        let (y, xs) = cointegrated(8, 100);
        let opts = GhOptions {
            trim: Trim::new(0.45, 0.5).unwrap(),
            ..GhOptions::default()
        };
        assert!(matches!(gh_test(&y, &xs, GhModel::LS, &opts), Err(Error::Range(_))));
    }

    #[test]
    fn strong_cointegration_detected() {
        let (y, xs) = cointegrated(9, 160);
        let res = gh_test(&y, &xs, GhModel::RS, &GhOptions::default()).unwrap();
        assert!(res.z_t.statistic < res.critical_values.z_t.values.one);
        assert!((res.z_t.position as i64 - 80).abs() <= 5);
    }
}
