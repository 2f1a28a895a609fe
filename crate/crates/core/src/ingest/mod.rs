//! Parsers for RIR delegated-statistics files and routing-table AS snapshots,
//! plus construction of per-country annual count series.

mod annual;
mod delegated;
mod snapshot;

pub use annual::{build_annual_series, AnnualCountSeries, CountryFilter, SeriesOptions};
pub use delegated::{
    parse_delegated, parse_delegated_str, DelegatedRecord, ParseOptions, Parsed, RecordDate,
    ResourceStart, ResourceType, Status,
};
pub use snapshot::{parse_snapshot, RouteviewSnapshot};
