use std::collections::BTreeSet;
use std::io::BufRead;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::delegated::{ParseOptions, Parsed};
use crate::error::{Error, Result};

/// AS numbers seen in a routing table at one instant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RouteviewSnapshot {
    pub date: NaiveDate,
    pub asn_set: BTreeSet<u32>,
}

impl RouteviewSnapshot {
    pub fn len(&self) -> usize {
        self.asn_set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.asn_set.is_empty()
    }
}

/// Parse a snapshot listing one decimal ASN per line. `#` starts a comment.
/// Non-numeric lines abort in strict mode and are reported in `errors` otherwise.
pub fn parse_snapshot<R: BufRead>(
    reader: R,
    date: NaiveDate,
    opts: ParseOptions,
) -> Result<Parsed<RouteviewSnapshot>> {
    let mut asn_set = BTreeSet::new();
    let mut errors = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        match body.parse::<u32>() {
            Ok(asn) => {
                asn_set.insert(asn);
            }
            Err(_) => {
                let err = Error::MalformedRecord {
                    line: idx + 1,
                    reason: format!("not an AS number: {body:?}"),
                };
                if opts.strict {
                    return Err(err);
                }
                errors.push(err);
            }
        }
    }
    Ok(Parsed {
        records: RouteviewSnapshot { date, asn_set },
        errors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn day() -> NaiveDate {
        NaiveDate::from_ymd_opt(2013, 2, 1).unwrap()
    }

    #[test]
    fn dedups() {
        let p = parse_snapshot("9829\n4755\n9829".as_bytes(), day(), ParseOptions::default()).unwrap();
        assert_eq!(p.records.asn_set.into_iter().collect::<Vec<_>>(), vec![4755, 9829]);
    }

    #[test]
    fn empty_input() {
        let p = parse_snapshot("".as_bytes(), day(), ParseOptions::default()).unwrap();
        assert!(p.records.is_empty());
    }

    #[test]
    fn non_numeric_lines() {
        let strict = parse_snapshot("1\n45abc\n".as_bytes(), day(), ParseOptions { strict: true });
        assert!(matches!(strict, Err(Error::MalformedRecord { line: 2, .. })));
        let lenient =
            parse_snapshot("1\n45abc\n# note\n7 # trailing\n".as_bytes(), day(), ParseOptions::default()).unwrap();
        assert_eq!(lenient.records.len(), 2);
        assert_eq!(lenient.errors.len(), 1);
    }
}
