//! Growth analysis of Autonomous System number allocations.
//!
//! The crate ingests RIR delegated-statistics files and routing-table AS
//! snapshots, turns them into per-country annual count series, and runs the
//! statistical toolchain over those series:
//!
//! - [`series_stats`]: differencing, ACF/PACF, Dickey-Fuller, Jarque-Bera, Shapiro-Wilk
//! - [`arima`]: CSS + exact-likelihood ARIMA fitting and psi-weight forecasts
//! - [`trend`]: drift and linear trends, Fisher z comparison of correlations
//! - [`changepoint`]: variance changepoints via binary segmentation and segment neighbourhood
//! - [`reachability`]: assigned versus advertised ASNs
//! - [`report`]: the end-to-end pipeline behind the `asgrowth` CLI
//!
//! Data-parallel loops (Monte Carlo runs, segment-neighbourhood rows, batch
//! fits, per-country analyses) go through [`exec`], which uses rayon when the
//! `parallel` feature is enabled and plain iterators otherwise.

pub mod arima;
pub mod changepoint;
pub mod error;
pub mod exec;
pub mod ingest;
mod linalg;
pub mod optim;
pub mod reachability;
pub mod report;
pub mod series_stats;
pub mod sim;
pub mod trend;

pub use error::{Error, Result};
pub use series_stats::Series;
