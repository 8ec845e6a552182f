//! Command-line pipeline: data ingestion, UC-SV uncertainty, unit-root and
//! break-cointegration tests, long-run and short-run fits, stability paths.

mod cli;
pub mod config;
pub mod demo;
pub mod stages;
pub mod table;

pub use cli::run;
