//! Monthly time-series container and the level transforms applied before
//! modelling (logs, growth rates, differences, common-sample alignment).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A calendar month. Ordered by (year, month).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct MonthIndex {
    year: i32,
    month: u32,
}

impl MonthIndex {
    pub fn new(year: i32, month: u32) -> Result<Self> {
        if !(1..=12).contains(&month) {
            return Err(Error::InvalidInput(format!("month {month} not in 1..=12")));
        }
        Ok(Self { year, month })
    }

    /// Const constructor; panics on an invalid month.
    pub const fn from_parts(year: i32, month: u32) -> Self {
        assert!(month >= 1 && month <= 12, "month out of range");
        Self { year, month }
    }

    pub fn year(self) -> i32 {
        self.year
    }

    pub fn month(self) -> u32 {
        self.month
    }

    /// Months since year 0, month 1.
    fn ordinal(self) -> i64 {
        self.year as i64 * 12 + (self.month as i64 - 1)
    }

    fn from_ordinal(ord: i64) -> Self {
        Self {
            year: ord.div_euclid(12) as i32,
            month: (ord.rem_euclid(12) + 1) as u32,
        }
    }

    pub fn succ(self) -> Self {
        self.plus(1)
    }

    pub fn plus(self, months: i64) -> Self {
        Self::from_ordinal(self.ordinal() + months)
    }

    /// Signed number of months from `self` to `other`.
    pub fn months_until(self, other: MonthIndex) -> i64 {
        other.ordinal() - self.ordinal()
    }

    /// `YYYY-MM`, the CSV date format.
    pub fn iso(self) -> String {
        format!("{:04}-{:02}", self.year, self.month)
    }
}

/// Paper-table style: `2009M12`.
impl fmt::Display for MonthIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}M{}", self.year, self.month)
    }
}

/// Accepts `YYYY-MM`, `YYYY-MM-DD` (day ignored) and `YYYYMm`.
impl FromStr for MonthIndex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidInput(format!("unrecognised month '{s}'"));
        let (year, rest) = if let Some((y, m)) = s.split_once('M') {
            (y, m)
        } else {
            let mut parts = s.splitn(3, '-');
            let y = parts.next().ok_or_else(bad)?;
            let m = parts.next().ok_or_else(bad)?;
            if let Some(day) = parts.next() {
                let d: u32 = day.parse().map_err(|_| bad())?;
                if !(1..=31).contains(&d) || day.len() != 2 {
                    return Err(bad());
                }
            }
            (y, m)
        };
        if year.len() != 4 || !year.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        if rest.is_empty() || rest.len() > 2 || !rest.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let year: i32 = year.parse().map_err(|_| bad())?;
        let month: u32 = rest.parse().map_err(|_| bad())?;
        MonthIndex::new(year, month)
    }
}

impl TryFrom<String> for MonthIndex {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<MonthIndex> for String {
    fn from(m: MonthIndex) -> String {
        m.iso()
    }
}

/// Contiguous monthly observations.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeries {
    id: String,
    start: MonthIndex,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(id: impl Into<String>, start: MonthIndex, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Length { needed: 1, got: 0 });
        }
        Ok(Self {
            id: id.into(),
            start,
            values,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn start(&self) -> MonthIndex {
        self.start
    }

    pub fn end(&self) -> MonthIndex {
        self.start.plus(self.values.len() as i64 - 1)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn date_at(&self, i: usize) -> MonthIndex {
        self.start.plus(i as i64)
    }

    pub fn dates(&self) -> impl Iterator<Item = MonthIndex> + '_ {
        (0..self.values.len()).map(move |i| self.date_at(i))
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    /// Same dates, new values.
    pub fn map_values(&self, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.values.len() {
            return Err(Error::InvalidInput(format!(
                "replacement has {} values, series has {}",
                values.len(),
                self.values.len()
            )));
        }
        Ok(Self {
            id: self.id.clone(),
            start: self.start,
            values,
        })
    }

    /// Sub-series covering `[from, to]` inclusive.
    pub fn window(&self, from: MonthIndex, to: MonthIndex) -> Result<Self> {
        let lo = from.max(self.start);
        let hi = to.min(self.end());
        if lo > hi {
            return Err(Error::Alignment(format!(
                "{} covers {}..{}, window {}..{} is disjoint",
                self.id,
                self.start,
                self.end(),
                from,
                to
            )));
        }
        let a = self.start.months_until(lo) as usize;
        let b = self.start.months_until(hi) as usize;
        Ok(Self {
            id: self.id.clone(),
            start: lo,
            values: self.values[a..=b].to_vec(),
        })
    }

    fn require_len(&self, needed: usize) -> Result<()> {
        if self.values.len() < needed {
            Err(Error::Length {
                needed,
                got: self.values.len(),
            })
        } else {
            Ok(())
        }
    }

    fn require_positive(&self) -> Result<()> {
        match self.values.iter().position(|&v| !(v > 0.0)) {
            Some(i) => Err(Error::Domain {
                date: self.date_at(i),
                reason: format!("value {} is not strictly positive", self.values[i]),
            }),
            None => Ok(()),
        }
    }
}

/// Elementwise natural log.
pub fn log_level(s: &TimeSeries) -> Result<TimeSeries> {
    s.require_positive()?;
    s.map_values(s.values.iter().map(|v| v.ln()).collect())
}

/// Year-over-year percent change, `100 (s_t / s_{t-12} - 1)`.
pub fn yoy_growth(s: &TimeSeries) -> Result<TimeSeries> {
    s.require_len(13)?;
    s.require_positive()?;
    let v = &s.values;
    let out = (12..v.len()).map(|t| 100.0 * (v[t] / v[t - 12] - 1.0)).collect();
    TimeSeries::new(s.id.clone(), s.start.plus(12), out)
}

/// Month-over-month change, annualised: `100 ((s_t / s_{t-1})^12 - 1)`.
pub fn mom_annualized(s: &TimeSeries) -> Result<TimeSeries> {
    s.require_len(2)?;
    s.require_positive()?;
    let v = &s.values;
    let out = (1..v.len())
        .map(|t| 100.0 * ((v[t] / v[t - 1]).powi(12) - 1.0))
        .collect();
    TimeSeries::new(s.id.clone(), s.start.succ(), out)
}

/// First difference.
pub fn diff(s: &TimeSeries) -> Result<TimeSeries> {
    s.require_len(2)?;
    let out = s.values.windows(2).map(|w| w[1] - w[0]).collect();
    TimeSeries::new(s.id.clone(), s.start.succ(), out)
}

/// Running sum; inverse of [`diff`] up to the starting level.
pub fn cumsum(s: &TimeSeries) -> TimeSeries {
    let mut acc = 0.0;
    let out = s
        .values
        .iter()
        .map(|v| {
            acc += v;
            acc
        })
        .collect();
    TimeSeries {
        id: s.id.clone(),
        start: s.start,
        values: out,
    }
}

/// Restricts every series to the common window: latest start, earliest end.
pub fn align(set: &[TimeSeries]) -> Result<Vec<TimeSeries>> {
    let first = set
        .first()
        .ok_or_else(|| Error::InvalidInput("align needs at least one series".into()))?;
    let start = set.iter().map(|s| s.start).max().unwrap_or(first.start);
    let end = set.iter().map(|s| s.end()).min().unwrap_or(first.end());
    if start > end {
        let ranges: Vec<String> = set
            .iter()
            .map(|s| format!("{}: {}..{}", s.id, s.start, s.end()))
            .collect();
        return Err(Error::Alignment(ranges.join(", ")));
    }
    set.iter().map(|s| s.window(start, end)).collect()
}
