//! Data acquisition: CSV files, the FRED observations API and dataset
//! manifests.

pub mod csv;
pub mod fred;
pub mod manifest;

pub use self::csv::{format_csv, load_csv, parse_csv_str, write_csv};
pub use fred::{
    atomic_write, decode_fred_json, fetch_fred, FredClient, HttpTransport, Transport, API_KEY_ENV,
};
pub use manifest::{
    materialize, materialize_with, parse_manifest, DatasetManifest, Materialized, Provenance,
    SeriesEntry, Source, Transform, Window,
};
