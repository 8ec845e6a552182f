//! Break-dummy regression designs for the four single-break models.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::series::TimeSeries;

/// Which deterministic terms and slopes shift at the break.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GhModel {
    /// Level shift.
    LS,
    /// Level shift with (unbroken) trend.
    LST,
    /// Regime shift: intercept and slopes.
    RS,
    /// Regime shift with trend change.
    RST,
}

impl GhModel {
    pub const ALL: [GhModel; 4] = [GhModel::LS, GhModel::LST, GhModel::RS, GhModel::RST];

    pub fn has_trend(self) -> bool {
        matches!(self, GhModel::LST | GhModel::RST)
    }

    pub fn breaks_trend(self) -> bool {
        self == GhModel::RST
    }

    pub fn breaks_slopes(self) -> bool {
        matches!(self, GhModel::RS | GhModel::RST)
    }

    pub fn column_count(self, m: usize) -> usize {
        match self {
            GhModel::LS => 2 + m,
            GhModel::LST => 3 + m,
            GhModel::RS => 2 + 2 * m,
            GhModel::RST => 4 + 2 * m,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            GhModel::LS => "GH-LS",
            GhModel::LST => "GH-LST",
            GhModel::RS => "GH-RS",
            GhModel::RST => "GH-RST",
        }
    }
}

impl fmt::Display for GhModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            GhModel::LS => "LS",
            GhModel::LST => "LST",
            GhModel::RS => "RS",
            GhModel::RST => "RST",
        };
        f.write_str(s)
    }
}

impl FromStr for GhModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let upper = s.trim().to_ascii_uppercase();
        match upper.trim_start_matches("GH-") {
            "LS" => Ok(GhModel::LS),
            "LST" => Ok(GhModel::LST),
            "RS" => Ok(GhModel::RS),
            "RST" => Ok(GhModel::RST),
            other => Err(Error::InvalidInput(format!("unknown model '{other}'"))),
        }
    }
}

/// Trimming fractions for candidate breaks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trim {
    pub lower: f64,
    pub upper: f64,
}

impl Default for Trim {
    fn default() -> Self {
        Self {
            lower: 0.15,
            upper: 0.85,
        }
    }
}

impl Trim {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(0.0 < lower && lower <= upper && upper < 1.0) {
            return Err(Error::Range(format!("trim ({lower}, {upper}) must satisfy 0 < a <= b < 1")));
        }
        Ok(Self { lower, upper })
    }

    /// Admissible break positions `[n a] ..= [n b]`, at least 2 from either end.
    pub fn positions(&self, n: usize) -> std::ops::RangeInclusive<usize> {
        let lo = ((n as f64 * self.lower).floor() as usize).max(2);
        let hi = ((n as f64 * self.upper).floor() as usize).min(n.saturating_sub(2));
        lo..=hi
    }
}

/// Step dummy: zero through observation `position` (1-based), one after.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BreakDummy {
    pub position: usize,
}

impl BreakDummy {
    pub fn new(position: usize, n: usize, trim: Trim) -> Result<Self> {
        let range = trim.positions(n);
        if !range.contains(&position) {
            return Err(Error::Range(format!(
                "break position {position} outside trimmed window {}..={} (n = {n})",
                range.start(),
                range.end()
            )));
        }
        Ok(Self { position })
    }

    pub fn tau(&self, n: usize) -> f64 {
        self.position as f64 / n as f64
    }

    /// Value for 0-based row `i`.
    pub fn at(&self, i: usize) -> f64 {
        if i + 1 > self.position {
            1.0
        } else {
            0.0
        }
    }
}

/// Regression matrix with human-readable column names.
#[derive(Clone, Debug)]
pub struct Design {
    pub matrix: Matrix,
    pub names: Vec<String>,
}

/// Raw-slice design in the fixed order `[1, phi, (t), (t*phi), X.., (X*phi..)]`.
///
/// `position = None` builds the dummy as identically zero (no break), which
/// collapses the design to the no-break regression plus a zero column.
pub(crate) fn design_columns(
    regressors: &[&[f64]],
    n: usize,
    model: GhModel,
    position: Option<usize>,
) -> Matrix {
    let m = regressors.len();
    let mut mat = Matrix::zeros(n, model.column_count(m));
    let phi = |i: usize| match position {
        Some(p) if i + 1 > p => 1.0,
        _ => 0.0,
    };
    let mut c = 0;
    mat.column_mut(c).fill(1.0);
    c += 1;
    for (i, v) in mat.column_mut(c).iter_mut().enumerate() {
        *v = phi(i);
    }
    c += 1;
    if model.has_trend() {
        for (i, v) in mat.column_mut(c).iter_mut().enumerate() {
            *v = (i + 1) as f64;
        }
        c += 1;
    }
    if model.breaks_trend() {
        for (i, v) in mat.column_mut(c).iter_mut().enumerate() {
            *v = (i + 1) as f64 * phi(i);
        }
        c += 1;
    }
    for x in regressors {
        mat.column_mut(c).copy_from_slice(x);
        c += 1;
    }
    if model.breaks_slopes() {
        for x in regressors {
            for (i, v) in mat.column_mut(c).iter_mut().enumerate() {
                *v = x[i] * phi(i);
            }
            c += 1;
        }
    }
    mat
}

pub(crate) fn column_names(model: GhModel, ids: &[&str]) -> Vec<String> {
    let mut names = vec!["C".to_string(), "Dum x C".to_string()];
    if model.has_trend() {
        names.push("Trend".into());
    }
    if model.breaks_trend() {
        names.push("Dum x Trend".into());
    }
    names.extend(ids.iter().map(|s| s.to_string()));
    if model.breaks_slopes() {
        names.extend(ids.iter().map(|s| format!("Dum x {s}")));
    }
    names
}

pub(crate) fn require_aligned(y: &TimeSeries, xs: &[TimeSeries]) -> Result<()> {
    if xs.is_empty() {
        return Err(Error::InvalidInput("at least one regressor is required".into()));
    }
    for x in xs {
        if x.start() != y.start() || x.len() != y.len() {
            return Err(Error::Alignment(format!(
                "{} ({}..{}) and {} ({}..{}) are not aligned",
                y.id(),
                y.start(),
                y.end(),
                x.id(),
                x.start(),
                x.end()
            )));
        }
    }
    Ok(())
}

/// Design for the given model and break position (1-based index of the last
/// pre-break observation), validated against the default trimming window.
pub fn build_design(y: &TimeSeries, xs: &[TimeSeries], model: GhModel, position: usize) -> Result<Design> {
    build_design_trimmed(y, xs, model, position, Trim::default())
}

pub fn build_design_trimmed(
    y: &TimeSeries,
    xs: &[TimeSeries],
    model: GhModel,
    position: usize,
    trim: Trim,
) -> Result<Design> {
    require_aligned(y, xs)?;
    let dummy = BreakDummy::new(position, y.len(), trim)?;
    let slices: Vec<&[f64]> = xs.iter().map(|x| x.values()).collect();
    let ids: Vec<&str> = xs.iter().map(|x| x.id()).collect();
    Ok(Design {
        matrix: design_columns(&slices, y.len(), model, Some(dummy.position)),
        names: column_names(model, &ids),
    })
}
