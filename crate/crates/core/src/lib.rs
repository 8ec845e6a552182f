//! Inflation uncertainty, structural-break cointegration and short-run
//! dynamics for monthly sector stock indexes.

pub mod cointegration;
pub mod dynamics;
pub mod error;
pub mod inference;
pub mod ingest;
pub mod linalg;
pub mod montecarlo;
pub mod rng;
pub mod series;
pub mod stability;
pub mod ucsv;
pub mod unitroot;

pub use error::{Error, Result};
