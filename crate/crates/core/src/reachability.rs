//! Assigned AS numbers versus AS numbers visible in routing-table snapshots.

use std::collections::BTreeSet;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Mode};
use crate::ingest::{CountryFilter, DelegatedRecord, ResourceType, RouteviewSnapshot, Status};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReachabilityStats {
    pub label: String,
    /// All ASN records of the label as of the snapshot date, any status.
    pub registered: u64,
    pub assigned: u64,
    pub advertised: u64,
    pub ratio: f64,
    pub period_increase_pct: Option<f64>,
}

/// `|snapshot ∩ country_asns|`.
pub fn advertised_count(snapshot: &RouteviewSnapshot, country_asns: &BTreeSet<u32>) -> u64 {
    let (small, large) = if snapshot.asn_set.len() <= country_asns.len() {
        (&snapshot.asn_set, country_asns)
    } else {
        (country_asns, &snapshot.asn_set)
    };
    small.iter().filter(|a| large.contains(a)).count() as u64
}

pub fn reachability_ratio(assigned: u64, advertised: u64) -> Result<f64> {
    if assigned == 0 {
        return Err(Error::DivisionByZero("no assigned AS numbers".into()));
    }
    Ok(advertised as f64 / assigned as f64)
}

/// Relative change from the first to the last sample, in percent.
pub fn period_growth_pct(daily: &[(NaiveDate, u64)]) -> Result<f64> {
    let (first, last) = match daily {
        [first, .., last] => (first.1, last.1),
        _ => return Err(Error::DegenerateInput(format!("period growth needs 2 samples, got {}", daily.len()))),
    };
    if first == 0 {
        return Err(Error::DivisionByZero("first sample count is zero".into()));
    }
    Ok(100.0 * (last as f64 - first as f64) / first as f64)
}

/// Days whose count fell by at least `threshold_pct` percent from the previous sample.
pub fn drop_events(daily: &[(NaiveDate, u64)], threshold_pct: f64) -> Result<Vec<(NaiveDate, f64)>> {
    if daily.len() < 2 {
        return Err(Error::DegenerateInput(format!("drop detection needs 2 samples, got {}", daily.len())));
    }
    if !(threshold_pct > 0.0) {
        return Err(Error::DegenerateInput(format!("threshold must be positive, got {threshold_pct}")));
    }
    Ok(daily
        .windows(2)
        .filter(|w| w[0].1 > 0)
        .map(|w| (w[1].0, 100.0 * (w[0].1 as f64 - w[1].1 as f64) / w[0].1 as f64))
        .filter(|&(_, pct)| pct >= threshold_pct)
        .collect())
}

fn asn_records<'a>(
    records: &'a [DelegatedRecord],
    filter: &'a CountryFilter,
    as_of: NaiveDate,
) -> impl Iterator<Item = &'a DelegatedRecord> + 'a {
    records.iter().filter(move |r| {
        r.resource_type == ResourceType::Asn && filter.matches(r) && r.date.date().is_none_or(|d| d <= as_of)
    })
}

/// ASNs in allocated or assigned records dated on or before `as_of`.
pub fn assigned_asns(records: &[DelegatedRecord], filter: &CountryFilter, as_of: NaiveDate) -> BTreeSet<u32> {
    asn_records(records, filter, as_of)
        .filter(|r| r.status.is_in_use() && r.date.date().is_some())
        .filter_map(|r| r.asn_range())
        .flat_map(|range| range.map(|a| a as u32))
        .collect()
}

/// Number of ASNs held in the registry for the filter as of `as_of`: in-use and reserved records.
pub fn registered_count(records: &[DelegatedRecord], filter: &CountryFilter, as_of: NaiveDate) -> u64 {
    asn_records(records, filter, as_of).filter(|r| r.status != Status::Available).map(|r| r.value).sum()
}

/// Table row for one label against one snapshot.
pub fn reachability_stats(
    label: &str,
    records: &[DelegatedRecord],
    filter: &CountryFilter,
    snapshot: &RouteviewSnapshot,
) -> Result<ReachabilityStats> {
    let assigned_set = assigned_asns(records, filter, snapshot.date);
    let assigned = assigned_set.len() as u64;
    let advertised = advertised_count(snapshot, &assigned_set);
    Ok(ReachabilityStats {
        label: label.to_string(),
        registered: registered_count(records, filter, snapshot.date),
        assigned,
        advertised,
        ratio: reachability_ratio(assigned, advertised)?,
        period_increase_pct: None,
    })
}

/// Daily advertised counts for a label, sorted by date.
pub fn daily_advertised(
    mode: Mode,
    records: &[DelegatedRecord],
    filter: &CountryFilter,
    snapshots: &[RouteviewSnapshot],
) -> Vec<(NaiveDate, u64)> {
    let mut out = exec::map_slice(mode, snapshots, |snap| {
        (snap.date, advertised_count(snap, &assigned_asns(records, filter, snap.date)))
    });
    out.sort_by_key(|&(d, _)| d);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{parse_delegated_str, ParseOptions};
    use proptest::prelude::*;

    fn day(d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(2013, 1, d).unwrap()
    }

    fn snap(asns: &[u32]) -> RouteviewSnapshot {
        RouteviewSnapshot { date: day(1), asn_set: asns.iter().copied().collect() }
    }

    #[test]
    fn intersection_counts() {
        let country: BTreeSet<u32> = [2, 3, 4].into();
        assert_eq!(advertised_count(&snap(&[1, 2, 3]), &country), 2);
        assert_eq!(advertised_count(&snap(&[7, 8]), &country), 0);
    }

    #[test]
    fn ratios() {
        assert!((reachability_ratio(607, 495).unwrap() - 0.8155).abs() < 1e-3);
        assert!((reachability_ratio(551, 220).unwrap() - 0.3993).abs() < 1e-3);
        assert_eq!(reachability_ratio(10, 10).unwrap(), 1.0);
        assert!(matches!(reachability_ratio(0, 0), Err(Error::DivisionByZero(_))));
    }

    #[test]
    fn growth() {
        assert_eq!(period_growth_pct(&[(day(1), 100), (day(2), 90), (day(3), 116)]).unwrap(), 16.0);
        assert_eq!(period_growth_pct(&[(day(1), 5), (day(2), 5)]).unwrap(), 0.0);
        assert!(matches!(period_growth_pct(&[(day(1), 0), (day(2), 5)]), Err(Error::DivisionByZero(_))));
        assert!(matches!(period_growth_pct(&[(day(1), 3)]), Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn drops() {
        let d = [(day(1), 100), (day(2), 65), (day(3), 100)];
        let ev = drop_events(&d, 30.0).unwrap();
        assert_eq!(ev.len(), 1);
        assert_eq!(ev[0].0, day(2));
        assert!((ev[0].1 - 35.0).abs() < 1e-12);
        assert!(drop_events(&[(day(1), 1), (day(2), 2), (day(3), 3)], 1.0).unwrap().is_empty());
        assert!(drop_events(&[(day(1), 100), (day(2), 75)], 30.0).unwrap().is_empty());
        assert!(drop_events(&d, 0.0).is_err());
    }

    #[test]
    fn assigned_as_of_date() {
        let text = "\
apnic|IN|asn|100|4|20121230|allocated
apnic|IN|asn|200|1|20130105|assigned
apnic|IN|asn|300|2|20120101|reserved
apnic|JP|asn|400|1|20100101|allocated
apnic||asn|500|9||available
";
        let recs = parse_delegated_str(text, ParseOptions::default()).unwrap().records;
        let india = CountryFilter::Code("IN".into());
        let set = assigned_asns(&recs, &india, day(1));
        assert_eq!(set, [100, 101, 102, 103].into());
        assert_eq!(registered_count(&recs, &india, day(1)), 6);
        let st = reachability_stats("IN", &recs, &india, &snap(&[101, 103, 200, 400])).unwrap();
        assert_eq!((st.assigned, st.advertised), (4, 2));
        assert_eq!(st.ratio, 0.5);
    }

    proptest! {
        #[test]
        fn bounded_by_both_sets(a in prop::collection::btree_set(0u32..200, 0..60),
                                b in prop::collection::btree_set(0u32..200, 1..60)) {
            let s = RouteviewSnapshot { date: day(1), asn_set: a.clone() };
            let adv = advertised_count(&s, &b);
            prop_assert!(adv as usize <= a.len().min(b.len()));
            let r = reachability_ratio(b.len() as u64, adv).unwrap();
            prop_assert!((0.0..=1.0).contains(&r));
        }

        #[test]
        fn tiny_threshold_finds_every_decrease(v in prop::collection::vec(1u64..1000, 2..40)) {
            let daily: Vec<_> = v.iter().enumerate().map(|(i, &c)| (day(1) + chrono::Days::new(i as u64), c)).collect();
            let all = drop_events(&daily, 1e-9).unwrap();
            prop_assert_eq!(all.len(), v.windows(2).filter(|w| w[1] < w[0]).count());
            prop_assert!(drop_events(&daily, 100.0 + 1e-9).unwrap().is_empty());
        }
    }
}
