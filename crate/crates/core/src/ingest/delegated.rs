use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResourceType {
    Asn,
    Ipv4,
    Ipv6,
}

impl ResourceType {
    pub fn as_str(self) -> &'static str {
        match self {
            ResourceType::Asn => "asn",
            ResourceType::Ipv4 => "ipv4",
            ResourceType::Ipv6 => "ipv6",
        }
    }
}

impl FromStr for ResourceType {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "asn" => Ok(ResourceType::Asn),
            "ipv4" => Ok(ResourceType::Ipv4),
            "ipv6" => Ok(ResourceType::Ipv6),
            other => Err(format!("unknown resource type {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Allocated,
    Assigned,
    Reserved,
    Available,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Allocated => "allocated",
            Status::Assigned => "assigned",
            Status::Reserved => "reserved",
            Status::Available => "available",
        }
    }

    /// Allocated and assigned resources are in use; reserved/available are not.
    pub fn is_in_use(self) -> bool {
        matches!(self, Status::Allocated | Status::Assigned)
    }
}

impl FromStr for Status {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "allocated" => Ok(Status::Allocated),
            "assigned" => Ok(Status::Assigned),
            "reserved" => Ok(Status::Reserved),
            "available" => Ok(Status::Available),
            other => Err(format!("unknown status {other:?}")),
        }
    }
}

/// First resource of a record: an AS number, or address text for IP records.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ResourceStart {
    Asn(u32),
    Address(String),
}

impl fmt::Display for ResourceStart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ResourceStart::Asn(n) => write!(f, "{n}"),
            ResourceStart::Address(a) => f.write_str(a),
        }
    }
}

/// Record date. Reserved and available records may carry a placeholder
/// (empty or `00000000`), kept verbatim.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum RecordDate {
    Date(NaiveDate),
    Sentinel(String),
}

impl RecordDate {
    pub fn date(&self) -> Option<NaiveDate> {
        match self {
            RecordDate::Date(d) => Some(*d),
            RecordDate::Sentinel(_) => None,
        }
    }
}

impl fmt::Display for RecordDate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RecordDate::Date(d) => write!(f, "{}", d.format("%Y%m%d")),
            RecordDate::Sentinel(s) => f.write_str(s),
        }
    }
}

/// One resource line of a delegated(-extended) statistics file:
/// `registry|cc|type|start|value|date|status[|extensions...]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DelegatedRecord {
    pub registry: String,
    pub country_code: String,
    pub resource_type: ResourceType,
    pub start: ResourceStart,
    pub value: u64,
    pub date: RecordDate,
    pub status: Status,
    pub extensions: Option<String>,
}

impl DelegatedRecord {
    pub fn year(&self) -> Option<i32> {
        self.date.date().map(|d| d.year())
    }

    /// AS numbers covered by an ASN record (`start .. start + value`), clipped to 32 bits.
    pub fn asn_range(&self) -> Option<std::ops::Range<u64>> {
        match (&self.start, self.resource_type) {
            (ResourceStart::Asn(s), ResourceType::Asn) => {
                let lo = u64::from(*s);
                Some(lo..(lo + self.value).min(1 << 32))
            }
            _ => None,
        }
    }
}

impl fmt::Display for DelegatedRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}|{}|{}|{}|{}|{}|{}",
            self.registry,
            self.country_code,
            self.resource_type.as_str(),
            self.start,
            self.value,
            self.date,
            self.status.as_str()
        )?;
        if let Some(ext) = &self.extensions {
            write!(f, "|{ext}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    /// Abort on the first malformed resource line instead of collecting errors.
    pub strict: bool,
}

/// Records plus any malformed lines that were skipped (non-strict mode).
#[derive(Debug, Default)]
pub struct Parsed<T> {
    pub records: T,
    pub errors: Vec<Error>,
}

fn malformed(line: usize, reason: impl Into<String>) -> Error {
    Error::MalformedRecord {
        line,
        reason: reason.into(),
    }
}

enum Line {
    Skip,
    Record(DelegatedRecord),
}

fn is_version_line(fields: &[&str]) -> bool {
    // e.g. "2|apnic|20130201|53862|19830613|20130131|+1000" or "2.3|ripencc|..."
    fields.len() >= 6
        && !fields[0].is_empty()
        && fields[0].chars().all(|c| c.is_ascii_digit() || c == '.')
}

fn is_summary_line(fields: &[&str]) -> bool {
    // registry|*|type|*|count|summary
    fields.get(5).is_some_and(|f| f.trim() == "summary") || (fields.len() == 6 && fields[1] == "*")
}

fn parse_line(raw: &str, line_no: usize) -> Result<Line> {
    let line = raw.trim_end_matches(['\r', '\n']);
    if line.trim().is_empty() || line.trim_start().starts_with('#') {
        return Ok(Line::Skip);
    }
    let fields: Vec<&str> = line.split('|').collect();
    if is_version_line(&fields) || is_summary_line(&fields) {
        return Ok(Line::Skip);
    }
    if fields.len() < 7 {
        return Err(malformed(
            line_no,
            format!("expected at least 7 fields, found {}", fields.len()),
        ));
    }

    let resource_type: ResourceType = fields[2].parse().map_err(|e| malformed(line_no, e))?;
    let status: Status = fields[6].parse().map_err(|e| malformed(line_no, e))?;

    let value: u64 = fields[4]
        .parse()
        .map_err(|_| malformed(line_no, format!("non-integer value {:?}", fields[4])))?;
    if value == 0 {
        return Err(malformed(line_no, "value must be at least 1"));
    }

    let start = match resource_type {
        ResourceType::Asn => {
            let asn: u32 = fields[3]
                .parse()
                .map_err(|_| malformed(line_no, format!("bad ASN start {:?}", fields[3])))?;
            ResourceStart::Asn(asn)
        }
        _ => ResourceStart::Address(fields[3].to_string()),
    };

    let date = match NaiveDate::parse_from_str(fields[5], "%Y%m%d") {
        Ok(d) if fields[5].len() == 8 => RecordDate::Date(d),
        _ if !status.is_in_use() => RecordDate::Sentinel(fields[5].to_string()),
        _ => return Err(malformed(line_no, format!("bad date {:?}", fields[5]))),
    };

    let extensions = (fields.len() > 7).then(|| fields[7..].join("|"));

    Ok(Line::Record(DelegatedRecord {
        registry: fields[0].to_string(),
        country_code: fields[1].to_string(),
        resource_type,
        start,
        value,
        date,
        status,
        extensions,
    }))
}

/// Parse a delegated statistics stream. Line numbers in errors are 1-based.
pub fn parse_delegated<R: BufRead>(
    reader: R,
    opts: ParseOptions,
) -> Result<Parsed<Vec<DelegatedRecord>>> {
    let mut out: Parsed<Vec<DelegatedRecord>> = Parsed::default();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        match parse_line(&line, idx + 1) {
            Ok(Line::Skip) => {}
            Ok(Line::Record(r)) => out.records.push(r),
            Err(e) if opts.strict => return Err(e),
            Err(e) => out.errors.push(e),
        }
    }
    Ok(out)
}

pub fn parse_delegated_str(text: &str, opts: ParseOptions) -> Result<Parsed<Vec<DelegatedRecord>>> {
    parse_delegated(text.as_bytes(), opts)
}
