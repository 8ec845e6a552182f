//! Long-run regressions with a break dummy and Wald restrictions on them.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::design::{column_names, design_columns, require_aligned, GhModel};
use crate::error::{Error, Result};
use crate::inference::t_pvalue;
use crate::linalg::{mat_mul, ols_with, CovarianceKind, Matrix, Qr};
use crate::series::{MonthIndex, TimeSeries};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub t_stat: f64,
    pub p_value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CointegrationFit {
    /// `None` for the regression without a break.
    pub model: Option<GhModel>,
    pub break_date: Option<MonthIndex>,
    pub coefficients: Vec<Coefficient>,
    pub covariance: Vec<Vec<f64>>,
    pub residuals: TimeSeries,
    pub r_squared: f64,
    pub nobs: usize,
}

impl CointegrationFit {
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.coefficients.iter().position(|c| c.name == name)
    }

    pub fn estimates(&self) -> Vec<f64> {
        self.coefficients.iter().map(|c| c.estimate).collect()
    }
}

fn assemble(
    y: &TimeSeries,
    mat: &Matrix,
    names: Vec<String>,
    model: Option<GhModel>,
    break_date: Option<MonthIndex>,
    cov: CovarianceKind,
) -> Result<CointegrationFit> {
    let fit = ols_with(mat, y.values(), cov)?;
    let dof = fit.dof();
    let coefficients = names
        .into_iter()
        .enumerate()
        .map(|(j, name)| {
            let t = fit.t_stat(j);
            Coefficient {
                name,
                estimate: fit.coefficients[j],
                std_error: fit.std_errors[j],
                t_stat: t,
                p_value: t_pvalue(t, dof),
            }
        })
        .collect();
    Ok(CointegrationFit {
        model,
        break_date,
        coefficients,
        covariance: fit.covariance,
        residuals: y.map_values(fit.residuals)?.with_id(format!("{}_resid", y.id())),
        r_squared: fit.r_squared,
        nobs: fit.nobs,
    })
}

/// `y = c + sum a_j x_j + e` without a break.
pub fn fit_long_run(y: &TimeSeries, xs: &[TimeSeries], cov: CovarianceKind) -> Result<CointegrationFit> {
    require_aligned(y, xs)?;
    let mut cols = vec![vec![1.0; y.len()]];
    cols.extend(xs.iter().map(|x| x.values().to_vec()));
    let mut names = vec!["C".to_string()];
    names.extend(xs.iter().map(|x| x.id().to_string()));
    assemble(y, &Matrix::from_columns(&cols)?, names, None, None, cov)
}

/// OLS on the break design with the dummy switching on after `break_date`.
///
/// A break at the final observation leaves the dummy identically zero; the
/// fit then reduces to [`fit_long_run`] (with a trend when the model has one).
pub fn fit_break_regression(
    y: &TimeSeries,
    xs: &[TimeSeries],
    model: GhModel,
    break_date: MonthIndex,
    cov: CovarianceKind,
) -> Result<CointegrationFit> {
    require_aligned(y, xs)?;
    let offset = y.start().months_until(break_date);
    if offset < 0 || offset as usize >= y.len() {
        return Err(Error::Range(format!(
            "break date {break_date} outside sample {}..{}",
            y.start(),
            y.end()
        )));
    }
    let position = offset as usize + 1;
    let slices: Vec<&[f64]> = xs.iter().map(|x| x.values()).collect();
    let ids: Vec<&str> = xs.iter().map(|x| x.id()).collect();
    let mat = design_columns(&slices, y.len(), model, Some(position));
    let names = column_names(model, &ids);
    if position == y.len() {
        let keep: Vec<usize> = (0..mat.cols()).filter(|&j| !names[j].starts_with("Dum")).collect();
        let cols: Vec<Vec<f64>> = keep.iter().map(|&j| mat.column(j).to_vec()).collect();
        let names = keep.iter().map(|&j| names[j].clone()).collect();
        return assemble(y, &Matrix::from_columns(&cols)?, names, Some(model), Some(break_date), cov);
    }
    assemble(y, &mat, names, Some(model), Some(break_date), cov)
}

/// `R beta = r`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearRestriction {
    pub rows: Vec<Vec<f64>>,
    pub values: Vec<f64>,
}

impl LinearRestriction {
    /// Sum of the named coefficients equals `value`.
    pub fn sum_of(fit: &CointegrationFit, names: &[&str], value: f64) -> Result<Self> {
        let mut row = vec![0.0; fit.coefficients.len()];
        for n in names {
            let j = fit
                .index_of(n)
                .ok_or_else(|| Error::InvalidInput(format!("no coefficient named '{n}'")))?;
            row[j] += 1.0;
        }
        Ok(Self {
            rows: vec![row],
            values: vec![value],
        })
    }

    pub fn stack(mut self, other: LinearRestriction) -> Self {
        self.rows.extend(other.rows);
        self.values.extend(other.values);
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaldResult {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
}

/// Chi-square Wald test of `R beta = r` using the fit's coefficient covariance.
pub fn wald_test(fit: &CointegrationFit, restriction: &LinearRestriction) -> Result<WaldResult> {
    let p = fit.coefficients.len();
    let q = restriction.rows.len();
    if q == 0 || q > p || restriction.values.len() != q {
        return Err(Error::InvalidInput(format!(
            "restriction has {q} rows and {} values for {p} coefficients",
            restriction.values.len()
        )));
    }
    if restriction.rows.iter().any(|r| r.len() != p) {
        return Err(Error::InvalidInput(format!("restriction rows must have {p} entries")));
    }
    // rows independent <=> R' has full column rank
    Qr::new(&Matrix::from_columns(&restriction.rows)?)
        .map_err(|_| Error::Degenerate("restriction rows are linearly dependent".into()))?;
    let beta = fit.estimates();
    let diff: Vec<f64> = restriction
        .rows
        .iter()
        .zip(&restriction.values)
        .map(|(row, r)| row.iter().zip(&beta).map(|(a, b)| a * b).sum::<f64>() - r)
        .collect();
    // R V R'
    let rv = mat_mul(&restriction.rows, &fit.covariance);
    let rt: Vec<Vec<f64>> = (0..p).map(|j| restriction.rows.iter().map(|r| r[j]).collect()).collect();
    let middle = mat_mul(&rv, &rt);
    let m = nalgebra::DMatrix::from_fn(q, q, |i, j| middle[i][j]);
    let inv = m
        .try_inverse()
        .ok_or_else(|| Error::Degenerate("restricted covariance is singular".into()))?;
    let d = nalgebra::DVector::from_column_slice(&diff);
    let statistic = (d.transpose() * inv * &d)[(0, 0)].max(0.0);
    let chi = ChiSquared::new(q as f64).map_err(|e| Error::InvalidInput(e.to_string()))?;
    Ok(WaldResult {
        statistic,
        df: q,
        p_value: 1.0 - chi.cdf(statistic),
    })
}

/// One restriction per broken slope: pre-break slope plus its shift is zero.
pub fn post_break_restrictions(fit: &CointegrationFit) -> Result<Vec<(String, LinearRestriction)>> {
    let mut out = Vec::new();
    for c in &fit.coefficients {
        if let Some(base) = c.name.strip_prefix("Dum x ") {
            if base == "C" || base == "Trend" || fit.index_of(base).is_none() {
                continue;
            }
            let r = LinearRestriction::sum_of(fit, &[base, &c.name], 0.0)?;
            out.push((format!("{base} + Dum x {base} = 0"), r));
        }
    }
    Ok(out)
}
