//! Monthly series as `date,value` CSV.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::series::{MonthIndex, TimeSeries};

/// Reads one series from `path`; the id is the file stem.
pub fn load_csv(path: &Path, date_column: &str, value_column: &str) -> Result<TimeSeries> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let id = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("series")
        .to_string();
    parse_csv_str(&text, &id, date_column, value_column)
}

/// Parses CSV text with a header row. Lines starting with `#` are skipped.
/// Rows may arrive in any order; the result is sorted and must be
/// contiguous.
pub fn parse_csv_str(text: &str, id: &str, date_column: &str, value_column: &str) -> Result<TimeSeries> {
    let mut reader = ::csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(::csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::Parse {
            line: 1,
            reason: e.to_string(),
        })?
        .clone();
    let column = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| Error::Parse {
            line: 1,
            reason: format!("missing column '{name}'"),
        })
    };
    let di = column(date_column)?;
    let vi = column(value_column)?;

    let mut rows: Vec<(MonthIndex, f64, usize)> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            reason: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let field = |i: usize| {
            record.get(i).ok_or_else(|| Error::Parse {
                line,
                reason: "row has too few fields".into(),
            })
        };
        let date: MonthIndex = field(di)?.parse().map_err(|e: Error| Error::Parse {
            line,
            reason: e.to_string(),
        })?;
        let raw = field(vi)?;
        let value: f64 = raw.parse().map_err(|_| Error::Parse {
            line,
            reason: format!("value '{raw}' is not a number"),
        })?;
        if !value.is_finite() {
            return Err(Error::Parse {
                line,
                reason: format!("value '{raw}' is not finite"),
            });
        }
        rows.push((date, value, line));
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            line: 1,
            reason: "no data rows".into(),
        });
    }
    rows.sort_by_key(|r| r.0);
    for pair in rows.windows(2) {
        let (prev, next) = (pair[0].0, pair[1].0);
        if prev == next {
            return Err(Error::Duplicate(next));
        }
        if prev.succ() != next {
            return Err(Error::Gap {
                previous: prev,
                missing: prev.succ(),
            });
        }
    }
    TimeSeries::new(id, rows[0].0, rows.into_iter().map(|r| r.1).collect())
}

/// `date,value` text with `YYYY-MM` dates and shortest round-trip floats.
pub fn format_csv(series: &TimeSeries) -> String {
    let mut out = String::from("date,value\n");
    for (d, v) in series.dates().zip(series.values()) {
        out.push_str(&d.iso());
        out.push(',');
        out.push_str(&v.to_string());
        out.push('\n');
    }
    out
}

pub fn write_csv(series: &TimeSeries, path: &Path) -> Result<()> {
    fs::write(path, format_csv(series)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parse(text: &str) -> Result<TimeSeries> {
        parse_csv_str(text, "x", "date", "value")
    }

    #[test]
    fn two_rows() {
        let s = parse("date,value\n2002-07,100\n2002-08,101\n").unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.start(), MonthIndex::new(2002, 7).unwrap());
        assert_eq!(s.values(), &[100.0, 101.0]);
    }

    #[test]
    fn unsorted_rows_and_comments() {
        let s = parse("# source: test\ndate,value\n2002-08,2\n2002-07,1\n").unwrap();
        assert_eq!(s.values(), &[1.0, 2.0]);
    }

    #[test]
    fn gap_names_missing_month() {
        match parse("date,value\n2002-07,1\n2002-09,3\n") {
            Err(Error::Gap { previous, missing }) => {
                assert_eq!(previous, MonthIndex::new(2002, 7).unwrap());
                assert_eq!(missing, MonthIndex::new(2002, 8).unwrap());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn duplicates_and_bad_rows() {
        assert!(matches!(parse("date,value\n2002-07,1\n2002-07,2\n"), Err(Error::Duplicate(_))));
        match parse("date,value\n2002-07,1\n2002-08,abc\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("date,value\n2002-13,1\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse("date,value\n2002-07,NaN\n"), Err(Error::Parse { .. })));
        assert!(matches!(parse("when,value\n2002-07,1\n"), Err(Error::Parse { line: 1, .. })));
        assert!(parse("date,value\n").is_err());
    }

    #[test]
    fn named_columns() {
        let s = parse_csv_str("DATE,CLOSE,VOL\n2010-01-01,5.5,7\n2010-02-01,6,8\n", "dj", "DATE", "CLOSE").unwrap();
        assert_eq!(s.values(), &[5.5, 6.0]);
        assert_eq!(s.id(), "dj");
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("DJUSBM.csv");
        let s = TimeSeries::new("DJUSBM", MonthIndex::new(2002, 7).unwrap(), vec![1.0 / 3.0, -2.5e-9, 1e300]).unwrap();
        write_csv(&s, &path).unwrap();
        assert_eq!(load_csv(&path, "date", "value").unwrap(), s);
        assert!(matches!(load_csv(&dir.path().join("nope.csv"), "date", "value"), Err(Error::Io { .. })));
    }

    proptest! {
        #[test]
        fn generated_series_round_trip(values in proptest::collection::vec(-1e12f64..1e12, 1..60), y in 1900i32..2100, m in 1u32..=12) {
            let s = TimeSeries::new("x", MonthIndex::new(y, m).unwrap(), values).unwrap();
            prop_assert_eq!(parse(&format_csv(&s)).unwrap(), s);
        }
    }
}
