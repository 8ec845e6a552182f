//! Significance levels, left-tailed critical-value sets and star notation.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Conventional test sizes, most stringent first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Level {
    #[serde(rename = "1%")]
    One,
    #[serde(rename = "5%")]
    Five,
    #[serde(rename = "10%")]
    Ten,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::One, Level::Five, Level::Ten];

    pub fn alpha(self) -> f64 {
        match self {
            Level::One => 0.01,
            Level::Five => 0.05,
            Level::Ten => 0.10,
        }
    }

    /// `***`, `**`, `*`.
    pub fn stars(self) -> &'static str {
        match self {
            Level::One => "***",
            Level::Five => "**",
            Level::Ten => "*",
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Level::One => "1%",
            Level::Five => "5%",
            Level::Ten => "10%",
        };
        f.write_str(s)
    }
}

/// Critical values for a left-tailed statistic at 1%, 5% and 10%.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalValues {
    pub one: f64,
    pub five: f64,
    pub ten: f64,
}

impl CriticalValues {
    pub fn new(one: f64, five: f64, ten: f64) -> Self {
        Self { one, five, ten }
    }

    pub fn get(&self, level: Level) -> f64 {
        match level {
            Level::One => self.one,
            Level::Five => self.five,
            Level::Ten => self.ten,
        }
    }

    pub fn is_ordered(&self) -> bool {
        self.one < self.five && self.five < self.ten
    }

    /// Most stringent level at which `stat` falls below its critical value.
    pub fn reject_at(&self, stat: f64) -> Option<Level> {
        Level::ALL.into_iter().find(|&l| stat < self.get(l))
    }

    pub fn rejects(&self, stat: f64, level: Level) -> bool {
        stat < self.get(level)
    }
}

/// Star suffix for an optional rejection level.
pub fn stars(level: Option<Level>) -> &'static str {
    level.map_or("", Level::stars)
}

/// Two-sided normal-reference stars for a t-ratio.
pub fn t_stars(t: f64) -> &'static str {
    let a = t.abs();
    if a > 2.575_829_303_549 {
        "***"
    } else if a > 1.959_963_984_540 {
        "**"
    } else if a > 1.644_853_626_951 {
        "*"
    } else {
        ""
    }
}

/// Two-sided p-value from Student's t with `dof` degrees of freedom.
pub fn t_pvalue(t: f64, dof: usize) -> f64 {
    use statrs::distribution::{ContinuousCDF, StudentsT};
    match StudentsT::new(0.0, 1.0, dof.max(1) as f64) {
        Ok(d) => 2.0 * (1.0 - d.cdf(t.abs())),
        Err(_) => f64::NAN,
    }
}
