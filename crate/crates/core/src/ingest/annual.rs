use std::fmt;

use serde::{Deserialize, Serialize};

use super::delegated::{DelegatedRecord, ResourceStart, ResourceType};
use crate::error::{Error, Result};
use crate::series_stats::Series;

/// Which records a series is built from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum CountryFilter {
    /// Two-letter country code, matched case-insensitively.
    Code(String),
    /// Every record in the file (the whole registry region).
    All,
}

impl CountryFilter {
    /// `*`, `all` or a registry name such as `apnic` select the whole region.
    pub fn parse(s: &str) -> Self {
        let t = s.trim();
        let lower = t.to_ascii_lowercase();
        if t == "*"
            || matches!(
                lower.as_str(),
                "all" | "apnic" | "arin" | "ripencc" | "ripe" | "lacnic" | "afrinic"
            )
        {
            CountryFilter::All
        } else {
            CountryFilter::Code(t.to_ascii_uppercase())
        }
    }

    pub fn matches(&self, record: &DelegatedRecord) -> bool {
        match self {
            CountryFilter::All => true,
            CountryFilter::Code(cc) => record.country_code.eq_ignore_ascii_case(cc),
        }
    }
}

impl fmt::Display for CountryFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CountryFilter::All => f.write_str("*"),
            CountryFilter::Code(cc) => f.write_str(cc),
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SeriesOptions {
    /// Count only 16-bit AS numbers (start < 65536).
    pub asn16_only: bool,
}

/// Cumulative in-use resource count per calendar year.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnualCountSeries {
    pub label: String,
    pub start_year: i32,
    pub counts: Vec<u64>,
}

impl AnnualCountSeries {
    pub fn end_year(&self) -> i32 {
        self.start_year + self.counts.len() as i32 - 1
    }

    pub fn years(&self) -> impl Iterator<Item = i32> + '_ {
        (0..self.counts.len()).map(move |k| self.start_year + k as i32)
    }

    pub fn count_at(&self, year: i32) -> Option<u64> {
        let k = usize::try_from(year - self.start_year).ok()?;
        self.counts.get(k).copied()
    }

    pub fn to_series(&self) -> Result<Series> {
        Series::with_origin(
            self.counts.iter().map(|&c| c as f64).collect(),
            self.start_year,
        )
    }
}

/// Cumulative count series of in-use (`allocated`/`assigned`) records, weighted by
/// each record's `value`, from the earliest matching allocation year up to `end_year`.
pub fn build_annual_series(
    records: &[DelegatedRecord],
    country: &CountryFilter,
    resource_type: ResourceType,
    end_year: i32,
    opts: SeriesOptions,
) -> Result<AnnualCountSeries> {
    let matching: Vec<(i32, u64)> = records
        .iter()
        .filter(|r| r.resource_type == resource_type && r.status.is_in_use() && country.matches(r))
        .filter(|r| {
            !opts.asn16_only || matches!(r.start, ResourceStart::Asn(s) if s < 65536)
        })
        .filter_map(|r| r.year().map(|y| (y, r.value)))
        .collect();

    let start_year = matching
        .iter()
        .map(|&(y, _)| y)
        .min()
        .ok_or_else(|| Error::NoRecords(format!("{country} {}", resource_type.as_str())))?;
    if end_year < start_year {
        return Err(Error::DegenerateInput(format!(
            "end year {end_year} precedes first allocation year {start_year}"
        )));
    }

    let len = (end_year - start_year + 1) as usize;
    let mut per_year = vec![0u64; len];
    for (y, v) in matching {
        if y <= end_year {
            per_year[(y - start_year) as usize] += v;
        }
    }
    let counts = per_year
        .iter()
        .scan(0u64, |acc, &v| {
            *acc += v;
            Some(*acc)
        })
        .collect();

    Ok(AnnualCountSeries {
        label: country.to_string(),
        start_year,
        counts,
    })
}
