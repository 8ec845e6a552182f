//! TOML dataset manifests and their materialisation into an aligned set.
//!
//! ```toml
//! cache_dir = ".fred-cache"
//!
//! [window]
//! start = "2002-07"
//! end = "2015-10"
//!
//! [[series]]
//! id = "CPI"
//! source = "fred"
//! code = "CPIAUCSL"
//! transform = "yoy"
//!
//! [[series]]
//! id = "DJUSBM"
//! source = "csv"
//! path = "DJUSBM.csv"
//! transform = "log"
//! ```
//!
//! Relative paths resolve against the manifest's directory.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::csv::load_csv;
use super::fred::{FredClient, API_KEY_ENV};
use crate::error::{Error, Result};
use crate::series::{align, log_level, mom_annualized, yoy_growth, MonthIndex, TimeSeries};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Csv,
    Fred,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    Log,
    Yoy,
    #[default]
    None,
    MomAnn,
}

impl Transform {
    /// Observations consumed before the first transformed value.
    pub fn lead(self) -> i64 {
        match self {
            Transform::Yoy => 12,
            Transform::MomAnn => 1,
            Transform::Log | Transform::None => 0,
        }
    }

    pub fn apply(self, s: &TimeSeries) -> Result<TimeSeries> {
        match self {
            Transform::Log => log_level(s),
            Transform::Yoy => yoy_growth(s),
            Transform::None => Ok(s.clone()),
            Transform::MomAnn => mom_annualized(s),
        }
    }
}

impl fmt::Display for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Transform::Log => "log",
            Transform::Yoy => "yoy",
            Transform::None => "none",
            Transform::MomAnn => "mom_ann",
        })
    }
}

fn default_date_column() -> String {
    "date".into()
}

fn default_value_column() -> String {
    "value".into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesEntry {
    pub id: String,
    pub source: Source,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub code: Option<String>,
    #[serde(default)]
    pub transform: Transform,
    #[serde(default = "default_date_column")]
    pub date_column: String,
    #[serde(default = "default_value_column")]
    pub value_column: String,
}

impl SeriesEntry {
    /// File path or FRED code.
    pub fn location(&self) -> String {
        match self.source {
            Source::Csv => self.path.as_ref().map(|p| p.display().to_string()).unwrap_or_default(),
            Source::Fred => self.code.clone().unwrap_or_default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Window {
    pub start: MonthIndex,
    pub end: MonthIndex,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub window: Window,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cache_dir: Option<PathBuf>,
    pub series: Vec<SeriesEntry>,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

/// Parses and validates manifest text; relative paths stay relative.
pub fn parse_manifest(text: &str) -> Result<DatasetManifest> {
    let manifest: DatasetManifest = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    manifest.validate()?;
    Ok(manifest)
}

impl DatasetManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut m = parse_manifest(&text)?;
        m.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.window.start > self.window.end {
            return Err(Error::Config(format!(
                "window start {} is after end {}",
                self.window.start, self.window.end
            )));
        }
        if self.series.is_empty() {
            return Err(Error::Config("manifest lists no series".into()));
        }
        let mut seen = HashSet::new();
        for e in &self.series {
            if e.id.trim().is_empty() {
                return Err(Error::Config("series id must be non-empty".into()));
            }
            if !seen.insert(e.id.as_str()) {
                return Err(Error::Config(format!("duplicate series id '{}'", e.id)));
            }
            match e.source {
                Source::Csv if e.path.is_none() => {
                    return Err(Error::Config(format!("csv series '{}' needs a path", e.id)));
                }
                Source::Fred if e.code.as_deref().is_none_or(str::is_empty) => {
                    return Err(Error::Config(format!("fred series '{}' needs a code", e.id)));
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn resolved_cache_dir(&self) -> Option<PathBuf> {
        self.cache_dir.as_ref().map(|p| self.resolve(p))
    }

    pub fn entry(&self, id: &str) -> Option<&SeriesEntry> {
        self.series.iter().find(|e| e.id == id)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Provenance {
    pub id: String,
    pub source: Source,
    pub location: String,
    pub rows_loaded: usize,
    pub transform: Transform,
    pub rows_used: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Materialized {
    /// In manifest order, all on the common window.
    pub series: Vec<TimeSeries>,
    pub provenance: Vec<Provenance>,
    pub start: MonthIndex,
    pub end: MonthIndex,
}

impl Materialized {
    pub fn get(&self, id: &str) -> Option<&TimeSeries> {
        self.series.iter().find(|s| s.id() == id)
    }

    /// Deterministic CSV provenance report.
    pub fn report(&self) -> String {
        let mut out = String::from("id,source,location,rows_loaded,transform,rows_used,start,end\n");
        for p in &self.provenance {
            let source = match p.source {
                Source::Csv => "csv",
                Source::Fred => "fred",
            };
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                p.id,
                source,
                p.location,
                p.rows_loaded,
                p.transform,
                p.rows_used,
                self.start.iso(),
                self.end.iso()
            ));
        }
        out
    }
}

/// Loads every entry with live FRED access (key from `FRED_API_KEY`) and the
/// manifest's cache directory.
pub fn materialize(manifest: &DatasetManifest) -> Result<Materialized> {
    let key = std::env::var(API_KEY_ENV).unwrap_or_default();
    let client = FredClient::http(manifest.resolved_cache_dir());
    materialize_with(manifest, &client, &key)
}

/// Loads, transforms, aligns and windows every entry.
pub fn materialize_with(manifest: &DatasetManifest, client: &FredClient, api_key: &str) -> Result<Materialized> {
    manifest.validate()?;
    let w = manifest.window;
    let mut loaded = Vec::with_capacity(manifest.series.len());
    let mut raw_rows = Vec::with_capacity(manifest.series.len());
    for e in &manifest.series {
        let raw = match e.source {
            Source::Csv => {
                let path = manifest.resolve(e.path.as_deref().unwrap_or(Path::new("")));
                load_csv(&path, &e.date_column, &e.value_column)?
            }
            Source::Fred => {
                let code = e.code.as_deref().unwrap_or_default();
                client.fetch(code, api_key, (w.start.plus(-e.transform.lead()), w.end))?
            }
        };
        raw_rows.push(raw.len());
        loaded.push(e.transform.apply(&raw)?.with_id(e.id.clone()));
    }
    let aligned = align(&loaded)?;
    let start = aligned[0].start().max(w.start);
    let end = aligned[0].end().min(w.end);
    if start > end {
        return Err(Error::Range(format!(
            "no observations inside the window {}..{} after alignment",
            w.start, w.end
        )));
    }
    let series: Vec<TimeSeries> = aligned.iter().map(|s| s.window(start, end)).collect::<Result<_>>()?;
    let provenance = manifest
        .series
        .iter()
        .zip(&raw_rows)
        .zip(&series)
        .map(|((e, rows), s)| Provenance {
            id: e.id.clone(),
            source: e.source,
            location: e.location(),
            rows_loaded: *rows,
            transform: e.transform,
            rows_used: s.len(),
        })
        .collect();
    Ok(Materialized {
        series,
        provenance,
        start,
        end,
    })
}
