//! Artifact files: a provenance comment line followed by CSV (or markdown).

use std::fmt::Write as _;
use std::str::FromStr;

use sectorcoint_core::series::{MonthIndex, TimeSeries};
use sectorcoint_core::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// What every artifact records about the run that produced it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stamp {
    pub hash: String,
    pub seed: u64,
}

impl Stamp {
    pub fn header(&self) -> String {
        format!("# sectorcoint {VERSION} config_hash={} seed={}\n", self.hash, self.seed)
    }

    /// Strips and checks the header of an artifact named `name`.
    pub fn verify<'a>(&self, name: &str, text: &'a str) -> Result<&'a str> {
        let (first, rest) = text.split_once('\n').unwrap_or((text, ""));
        let found = first
            .strip_prefix("# ")
            .and_then(|l| l.split_whitespace().find_map(|w| w.strip_prefix("config_hash=")))
            .ok_or_else(|| Error::Config(format!("{name} has no provenance header")))?;
        if found != self.hash {
            return Err(Error::Config(format!(
                "{name} was produced under config hash {found}, current config hashes to {}; refusing to mix outputs",
                self.hash
            )));
        }
        Ok(rest)
    }
}

/// Full round-trip precision.
pub fn num(x: f64) -> String {
    format!("{x}")
}

/// Report precision.
pub fn fixed(x: f64) -> String {
    format!("{x:.4}")
}

/// `***`, `**`, `*` for p below 1%, 5%, 10%.
pub fn p_stars(p: f64) -> &'static str {
    if p < 0.01 {
        "***"
    } else if p < 0.05 {
        "**"
    } else if p < 0.10 {
        "*"
    } else {
        ""
    }
}

/// Break dates in `YYYYMmm` form.
pub fn month(m: MonthIndex) -> String {
    m.to_string()
}

/// Simple CSV with a header row, values written without quoting.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }

    pub fn parse(name: &str, body: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(body.as_bytes());
        let columns = reader
            .headers()
            .map_err(|e| Error::Parse {
                line: 1,
                reason: format!("{name}: {e}"),
            })?
            .iter()
            .map(str::to_string)
            .collect();
        let mut rows = Vec::new();
        for rec in reader.records() {
            let rec = rec.map_err(|e| Error::Parse {
                line: e.position().map_or(0, |p| p.line() as usize),
                reason: format!("{name}: {e}"),
            })?;
            rows.push(rec.iter().map(str::to_string).collect());
        }
        Ok(Self { columns, rows })
    }

    pub fn col(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::InvalidInput(format!("missing column '{name}'")))
    }

    /// Markdown rendering of the selected columns.
    pub fn markdown(&self, columns: &[&str]) -> Result<String> {
        let idx: Vec<usize> = columns.iter().map(|c| self.col(c)).collect::<Result<_>>()?;
        let mut out = String::new();
        let _ = writeln!(out, "| {} |", columns.join(" | "));
        let _ = writeln!(out, "|{}", "---|".repeat(columns.len()));
        for r in &self.rows {
            let cells: Vec<&str> = idx.iter().map(|&i| r[i].as_str()).collect();
            let _ = writeln!(out, "| {} |", cells.join(" | "));
        }
        Ok(out)
    }
}

/// Aligned monthly series side by side: `date,<id>,<id>,...`.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    pub series: Vec<TimeSeries>,
}

impl Frame {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("date");
        for s in &self.series {
            out.push(',');
            out.push_str(s.id());
        }
        out.push('\n');
        let Some(first) = self.series.first() else {
            return out;
        };
        for i in 0..first.len() {
            out.push_str(&first.date_at(i).iso());
            for s in &self.series {
                out.push(',');
                out.push_str(&num(s.values()[i]));
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(name: &str, body: &str) -> Result<Self> {
        let t = Table::parse(name, body)?;
        if t.columns.first().map(String::as_str) != Some("date") {
            return Err(Error::Parse {
                line: 1,
                reason: format!("{name}: first column must be 'date'"),
            });
        }
        if t.rows.is_empty() {
            if t.columns.len() > 1 {
                return Err(Error::Length { needed: 1, got: 0 });
            }
            return Ok(Self { series: Vec::new() });
        }
        let start = MonthIndex::from_str(&t.rows[0][0])?;
        for (i, r) in t.rows.iter().enumerate() {
            if MonthIndex::from_str(&r[0])? != start.plus(i as i64) {
                return Err(Error::Parse {
                    line: i + 2,
                    reason: format!("{name}: dates are not consecutive months"),
                });
            }
        }
        let mut series = Vec::with_capacity(t.columns.len() - 1);
        for (j, id) in t.columns.iter().enumerate().skip(1) {
            let values = t
                .rows
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    r[j].parse::<f64>().map_err(|e| Error::Parse {
                        line: i + 2,
                        reason: format!("{name}: column {id}: {e}"),
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            series.push(TimeSeries::new(id.clone(), start, values)?);
        }
        Ok(Self { series })
    }

    pub fn get(&self, id: &str) -> Result<&TimeSeries> {
        self.series
            .iter()
            .find(|s| s.id() == id)
            .ok_or_else(|| Error::InvalidInput(format!("series '{id}' not present")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stamp() -> Stamp {
        Stamp {
            hash: "abc".into(),
            seed: 9,
        }
    }

    #[test]
    fn header_round_trip_and_mismatch() {
        let s = stamp();
        let text = format!("{}date,x\n", s.header());
        assert_eq!(s.verify("f.csv", &text).unwrap(), "date,x\n");
        let other = Stamp {
            hash: "def".into(),
            seed: 9,
        };
        let err = other.verify("f.csv", &text).unwrap_err();
        assert!(err.to_string().contains("refusing"), "{err}");
        assert!(s.verify("f.csv", "date,x\n").is_err());
    }

    #[test]
    fn frame_preserves_values_exactly() {
        let a = TimeSeries::new("a", MonthIndex::new(2002, 7).unwrap(), vec![0.1, -1.0 / 3.0, 1e-12]).unwrap();
        let b = TimeSeries::new("b", MonthIndex::new(2002, 7).unwrap(), vec![2.0, 3.5, f64::MAX]).unwrap();
        let f = Frame { series: vec![a, b] };
        let back = Frame::parse("f", &f.to_csv()).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn frame_rejects_skipped_month() {
        assert!(Frame::parse("f", "date,a\n2002-07,1\n2002-09,2\n").is_err());
    }

    #[test]
    fn stars() {
        assert_eq!(p_stars(0.001), "***");
        assert_eq!(p_stars(0.03), "**");
        assert_eq!(p_stars(0.07), "*");
        assert_eq!(p_stars(0.5), "");
    }

    #[test]
    fn markdown_selects_columns() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["1".into(), "2".into()]);
        assert_eq!(t.markdown(&["b"]).unwrap(), "| b |\n|---|\n| 2 |\n");
    }
}
