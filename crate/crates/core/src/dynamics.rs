//! Short-run models: error-correction regressions for cointegrated sets and
//! VARs in first differences for the rest.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::cointegration::Coefficient;
use crate::error::{Error, Result};
use crate::inference::t_pvalue;
use crate::linalg::{ols, Matrix, OlsFit};
use crate::series::{MonthIndex, TimeSeries};

/// Eigenvalue moduli at or above `1 - STABILITY_MARGIN` count as unstable.
pub const STABILITY_MARGIN: f64 = 1e-10;

fn coefficients(fit: &OlsFit, names: &[String]) -> Vec<Coefficient> {
    let dof = fit.dof();
    names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let t = fit.t_stat(j);
            Coefficient {
                name: name.clone(),
                estimate: fit.coefficients[j],
                std_error: fit.std_errors[j],
                t_stat: t,
                p_value: t_pvalue(t, dof),
            }
        })
        .collect()
}

fn check_same_sample(reference: &TimeSeries, others: &[&TimeSeries]) -> Result<()> {
    for s in others {
        if s.start() != reference.start() || s.len() != reference.len() {
            return Err(Error::Alignment(format!(
                "{} ({}..{}) and {} ({}..{}) are not aligned",
                reference.id(),
                reference.start(),
                reference.end(),
                s.id(),
                s.start(),
                s.end()
            )));
        }
    }
    Ok(())
}

fn differences(v: &[f64]) -> Vec<f64> {
    v.windows(2).map(|w| w[1] - w[0]).collect()
}

#[derive(Clone, Debug)]
pub struct EcmFit {
    pub coefficients: Vec<Coefficient>,
    pub r_squared: f64,
    pub nobs: usize,
    /// Month of the first observation entering the regression.
    pub start: MonthIndex,
    pub design: Matrix,
    pub response: Vec<f64>,
    pub residuals: Vec<f64>,
}

impl EcmFit {
    pub fn coefficient(&self, name: &str) -> Option<&Coefficient> {
        self.coefficients.iter().find(|c| c.name == name)
    }
}

pub const ECM_TERM: &str = "ECM(-1)";

/// OLS of `D(dj)_t` on `[1, ecm_{t-1}, D(i)_t, D(u)_t, (D(ip)_t)]`, plus
/// `extra_lags` lags of every difference when requested.
pub fn fit_ecm(
    dj: &TimeSeries,
    i: &TimeSeries,
    u: &TimeSeries,
    ecm_resid: &TimeSeries,
    ip: Option<&TimeSeries>,
    extra_lags: usize,
) -> Result<EcmFit> {
    let mut others = vec![i, u, ecm_resid];
    others.extend(ip);
    check_same_sample(dj, &others)?;
    let mut levels = vec![dj, i, u];
    levels.extend(ip);
    let d: Vec<Vec<f64>> = levels.iter().map(|s| differences(s.values())).collect();
    let n_diff = d[0].len();
    // regression rows use difference index r = extra_lags..n_diff, i.e. level index r + 1
    let first = extra_lags;
    if n_diff <= first + others.len() + 2 + extra_lags * levels.len() {
        return Err(Error::Length {
            needed: first + others.len() + 3 + extra_lags * levels.len() + 1,
            got: dj.len(),
        });
    }
    let rows = n_diff - first;
    let ecm = ecm_resid.values();
    let mut columns = vec![vec![1.0; rows], (first..n_diff).map(|r| ecm[r]).collect()];
    let mut names = vec!["C".to_string(), ECM_TERM.to_string()];
    for (s, dv) in levels.iter().zip(&d).skip(1) {
        columns.push(dv[first..].to_vec());
        names.push(format!("D({})", s.id()));
    }
    for l in 1..=extra_lags {
        for (s, dv) in levels.iter().zip(&d) {
            columns.push((first..n_diff).map(|r| dv[r - l]).collect());
            names.push(format!("D({})(-{l})", s.id()));
        }
    }
    let design = Matrix::from_columns(&columns)?;
    let response = d[0][first..].to_vec();
    let fit = ols(&design, &response)?;
    Ok(EcmFit {
        coefficients: coefficients(&fit, &names),
        r_squared: fit.r_squared,
        nobs: fit.nobs,
        start: dj.date_at(first + 1),
        design,
        response,
        residuals: fit.residuals,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct VarEquation {
    pub dependent: String,
    pub coefficients: Vec<Coefficient>,
    pub r_squared: f64,
    pub nobs: usize,
    pub residuals: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VarFit {
    pub p: usize,
    /// Ids of the level series, in equation order.
    pub names: Vec<String>,
    pub equations: Vec<VarEquation>,
    /// `lag_matrices[l][i][j]`: lag `l + 1`, equation `i`, variable `j`.
    pub lag_matrices: Vec<Vec<Vec<f64>>>,
    pub intercepts: Vec<f64>,
    pub spectral_radius: f64,
    pub stable: bool,
}

impl VarFit {
    /// A fit holding only lag matrices (no equations), for stability checks.
    pub fn from_coefficients(lag_matrices: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let k = lag_matrices.first().map_or(0, |a| a.len());
        if k == 0 || lag_matrices.iter().any(|a| a.len() != k || a.iter().any(|r| r.len() != k)) {
            return Err(Error::InvalidInput("lag matrices must be square and equal-sized".into()));
        }
        let radius = spectral_radius(&lag_matrices);
        Ok(Self {
            p: lag_matrices.len(),
            names: (1..=k).map(|j| format!("v{j}")).collect(),
            equations: Vec::new(),
            intercepts: vec![0.0; k],
            lag_matrices,
            spectral_radius: radius,
            stable: radius < 1.0 - STABILITY_MARGIN,
        })
    }

    pub fn k(&self) -> usize {
        self.names.len()
    }
}

/// `[A_1 .. A_p; I 0]`.
pub fn companion_matrix(lag_matrices: &[Vec<Vec<f64>>]) -> DMatrix<f64> {
    let p = lag_matrices.len();
    let k = lag_matrices[0].len();
    let mut c = DMatrix::zeros(k * p, k * p);
    for (l, a) in lag_matrices.iter().enumerate() {
        for i in 0..k {
            for j in 0..k {
                c[(i, l * k + j)] = a[i][j];
            }
        }
    }
    for r in k..k * p {
        c[(r, r - k)] = 1.0;
    }
    c
}

/// Largest eigenvalue modulus of the companion matrix.
pub fn spectral_radius(lag_matrices: &[Vec<Vec<f64>>]) -> f64 {
    companion_matrix(lag_matrices)
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

pub fn var_stability(fit: &VarFit) -> bool {
    spectral_radius(&fit.lag_matrices) < 1.0 - STABILITY_MARGIN
}

/// Lagged regressor block `[1, v1(-1)..v1(-p), v2(-1)..]` over rows
/// `first..len` of the differenced data.
fn var_regressors(d: &[Vec<f64>], p: usize, first: usize) -> Matrix {
    let len = d[0].len();
    let mut cols = vec![vec![1.0; len - first]];
    for dv in d {
        for l in 1..=p {
            cols.push((first..len).map(|t| dv[t - l]).collect());
        }
    }
    Matrix::from_columns(&cols).expect("equal-length columns")
}

fn check_var_input(series: &[TimeSeries], p: usize) -> Result<()> {
    if series.len() < 2 {
        return Err(Error::InvalidInput("a VAR needs at least two series".into()));
    }
    if p == 0 {
        return Err(Error::InvalidInput("lag order must be positive".into()));
    }
    let refs: Vec<&TimeSeries> = series[1..].iter().collect();
    check_same_sample(&series[0], &refs)?;
    let needed = series.len() * p + 6;
    if series[0].len() < needed {
        return Err(Error::Length {
            needed,
            got: series[0].len(),
        });
    }
    Ok(())
}

/// Equation-by-equation OLS of each differenced series on `p` lags of all
/// differenced series and an intercept.
pub fn fit_var_diff(series: &[TimeSeries], p: usize) -> Result<VarFit> {
    check_var_input(series, p)?;
    let k = series.len();
    let d: Vec<Vec<f64>> = series.iter().map(|s| differences(s.values())).collect();
    let x = var_regressors(&d, p, p);
    let mut names = vec!["C".to_string()];
    for s in series {
        for l in 1..=p {
            names.push(format!("D({})(-{l})", s.id()));
        }
    }
    let mut lag_matrices = vec![vec![vec![0.0; k]; k]; p];
    let mut intercepts = Vec::with_capacity(k);
    let mut equations = Vec::with_capacity(k);
    for (i, s) in series.iter().enumerate() {
        let fit = ols(&x, &d[i][p..])?;
        intercepts.push(fit.coefficients[0]);
        for j in 0..k {
            for l in 0..p {
                lag_matrices[l][i][j] = fit.coefficients[1 + j * p + l];
            }
        }
        equations.push(VarEquation {
            dependent: format!("D({})", s.id()),
            coefficients: coefficients(&fit, &names),
            r_squared: fit.r_squared,
            nobs: fit.nobs,
            residuals: fit.residuals,
        });
    }
    let radius = spectral_radius(&lag_matrices);
    Ok(VarFit {
        p,
        names: series.iter().map(|s| s.id().to_string()).collect(),
        equations,
        lag_matrices,
        intercepts,
        spectral_radius: radius,
        stable: radius < 1.0 - STABILITY_MARGIN,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InformationCriterion {
    Aic,
    #[default]
    Bic,
}

/// Lag order in `1..=max_p` minimising the criterion, every order fitted on
/// the sample left after `max_p` lags.
pub fn select_var_order(series: &[TimeSeries], max_p: usize, ic: InformationCriterion) -> Result<usize> {
    check_var_input(series, max_p)?;
    let k = series.len();
    let d: Vec<Vec<f64>> = series.iter().map(|s| differences(s.values())).collect();
    let nobs = d[0].len() - max_p;
    let mut best = (f64::INFINITY, 1);
    for p in 1..=max_p {
        let x = var_regressors(&d, p, max_p);
        let mut resid = Vec::with_capacity(k);
        for dv in &d {
            resid.push(ols(&x, &dv[max_p..])?.residuals);
        }
        let sigma = DMatrix::from_fn(k, k, |a, b| {
            resid[a].iter().zip(&resid[b]).map(|(u, v)| u * v).sum::<f64>() / nobs as f64
        });
        let det = sigma.determinant();
        if !(det > 0.0) {
            return Err(Error::Degenerate("residual covariance is singular".into()));
        }
        let params = (k * (k * p + 1)) as f64;
        let pen = match ic {
            InformationCriterion::Aic => 2.0,
            InformationCriterion::Bic => (nobs as f64).ln(),
        };
        let value = det.ln() + params * pen / nobs as f64;
        if value < best.0 {
            best = (value, p);
        }
    }
    Ok(best.1)
}
