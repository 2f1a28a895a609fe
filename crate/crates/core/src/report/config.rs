use std::path::{Path, PathBuf};

use crate::arima::{ArimaSpec, LikelihoodMode};
use crate::changepoint::{PenaltySpec, DEFAULT_MAX_CPS};
use crate::error::{Error, Result};
use crate::exec::Mode;
use crate::ingest::ResourceType;

use super::table::OutputFormat;

/// Settings for a full analysis run. Read from flat `key = value` text.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisConfig {
    pub delegated: Option<PathBuf>,
    pub snapshot_dir: Option<PathBuf>,
    /// Country codes analysed individually, in output order.
    pub countries: Vec<String>,
    /// Baseline for relative growth; a registry name means every record in the file.
    pub region: String,
    pub resource: ResourceType,
    pub asn16_only: bool,
    pub start_year: Option<i32>,
    pub end_year: Option<i32>,
    pub train_len: usize,
    pub horizon: usize,
    pub confidence: f64,
    pub candidate_specs: Vec<ArimaSpec>,
    pub likelihood: LikelihoodMode,
    pub max_lag: usize,
    pub penalty: PenaltySpec,
    pub max_cps: usize,
    /// Differencing order of the changepoint target: 1 is the IAAV, 2 is `|Δ²y|`.
    pub cp_diff: usize,
    /// Partners of the first country in the same group.
    pub group_within: Vec<String>,
    /// Partners of the first country in the other group.
    pub group_across: Vec<String>,
    /// Fixed sample size for correlation tests; the overlap length when unset.
    pub fisher_n: Option<usize>,
    pub drop_threshold_pct: f64,
    pub format: OutputFormat,
    pub strict: bool,
    pub mode: Mode,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            delegated: None,
            snapshot_dir: None,
            countries: Vec::new(),
            region: "apnic".into(),
            resource: ResourceType::Asn,
            asn16_only: false,
            start_year: None,
            end_year: None,
            train_len: 14,
            horizon: 5,
            confidence: 0.95,
            candidate_specs: vec![ArimaSpec::new(1, 1, 1), ArimaSpec::new(1, 1, 2), ArimaSpec::new(2, 1, 3)],
            likelihood: LikelihoodMode::Exact,
            max_lag: 12,
            penalty: PenaltySpec::sic(),
            max_cps: DEFAULT_MAX_CPS,
            cp_diff: 1,
            group_within: Vec::new(),
            group_across: Vec::new(),
            fisher_n: None,
            drop_threshold_pct: 30.0,
            format: OutputFormat::Csv,
            strict: false,
            mode: Mode::default(),
        }
    }
}

fn list(v: &str) -> Vec<String> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect()
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Config(format!("{key}: cannot parse {v:?}")))
}

fn flag(key: &str, v: &str) -> Result<bool> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(Error::Config(format!("{key}: expected a boolean, got {v:?}"))),
    }
}

impl AnalysisConfig {
    /// Parse config text. Relative paths are resolved against `base_dir` when given.
    ///
    /// Blank lines and `#` comments are ignored; `models` takes `;`-separated
    /// `p,d,q[,drift]` specs and list keys take comma-separated values.
    pub fn parse(text: &str, base_dir: Option<&Path>) -> Result<Self> {
        let mut cfg = Self::default();
        let path = |v: &str| -> PathBuf {
            let p = PathBuf::from(v);
            match base_dir {
                Some(b) if p.is_relative() => b.join(p),
                _ => p,
            }
        };
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", idx + 1)))?;
            match key {
                "delegated" | "input" => cfg.delegated = Some(path(value)),
                "snapshots" | "snapshot_dir" => cfg.snapshot_dir = Some(path(value)),
                "countries" => cfg.countries = list(value),
                "region" => cfg.region = value.to_string(),
                "resource" => {
                    cfg.resource = value.parse().map_err(|e: String| Error::Config(format!("resource: {e}")))?
                }
                "asn16_only" => cfg.asn16_only = flag(key, value)?,
                "start_year" => cfg.start_year = Some(num(key, value)?),
                "end_year" => cfg.end_year = Some(num(key, value)?),
                "train_len" => cfg.train_len = num(key, value)?,
                "horizon" => cfg.horizon = num(key, value)?,
                "confidence" => cfg.confidence = num(key, value)?,
                "models" => {
                    cfg.candidate_specs = value
                        .split(';')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(str::parse)
                        .collect::<Result<_>>()?
                }
                "likelihood" => {
                    cfg.likelihood = match value.to_ascii_lowercase().as_str() {
                        "exact" | "ml" => LikelihoodMode::Exact,
                        "css" | "conditional" => LikelihoodMode::Conditional,
                        other => return Err(Error::Config(format!("likelihood: unknown mode {other:?}"))),
                    }
                }
                "max_lag" => cfg.max_lag = num(key, value)?,
                "penalty" => cfg.penalty = value.parse()?,
                "max_cps" => cfg.max_cps = num(key, value)?,
                "cp_diff" => cfg.cp_diff = num(key, value)?,
                "group_within" => cfg.group_within = list(value),
                "group_across" => cfg.group_across = list(value),
                "fisher_n" => cfg.fisher_n = Some(num(key, value)?),
                "drop_threshold" => cfg.drop_threshold_pct = num(key, value)?,
                "format" => cfg.format = value.parse()?,
                "strict" => cfg.strict = flag(key, value)?,
                "parallel" => cfg.mode = if flag(key, value)? { Mode::Parallel } else { Mode::Sequential },
                other => return Err(Error::Config(format!("line {}: unknown key {other:?}", idx + 1))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(e).context(format!("reading config {}", path.display())))?;
        Self::parse(&text, path.parent())
    }

    /// Checks that do not depend on the data.
    pub fn validate(&self) -> Result<()> {
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::Config(format!("confidence must lie in (0, 1), got {}", self.confidence)));
        }
        if self.train_len < 2 || self.horizon == 0 {
            return Err(Error::Config("train_len must be ≥ 2 and horizon ≥ 1".into()));
        }
        if self.candidate_specs.is_empty() {
            return Err(Error::Config("at least one candidate model is required".into()));
        }
        if !(self.drop_threshold_pct > 0.0) {
            return Err(Error::Config("drop_threshold must be positive".into()));
        }
        if !(1..=2).contains(&self.cp_diff) {
            return Err(Error::Config(format!("cp_diff must be 1 or 2, got {}", self.cp_diff)));
        }
        if let Some(n) = self.fisher_n {
            if n <= 3 {
                return Err(Error::Config("fisher_n must exceed 3".into()));
            }
        }
        Ok(())
    }

    /// Holdout needs `train_len + horizon` observations.
    pub fn check_series_length(&self, label: &str, len: usize) -> Result<()> {
        if self.train_len + self.horizon > len {
            return Err(Error::Config(format!(
                "{label}: train_len {} + horizon {} exceeds the series length {len}",
                self.train_len, self.horizon
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides() {
        let cfg = AnalysisConfig::parse(
            "# comment\ncountries = IN, CN\nmodels = 1,1,1; 0,1,0,drift\ntrain_len=10\nformat = json\npenalty = aic\n",
            Some(Path::new("/data")),
        )
        .unwrap();
        assert_eq!(cfg.countries, vec!["IN", "CN"]);
        assert_eq!(cfg.candidate_specs, vec![ArimaSpec::new(1, 1, 1), ArimaSpec::new(0, 1, 0).with_drift()]);
        assert_eq!(cfg.train_len, 10);
        assert_eq!(cfg.horizon, 5);
        assert_eq!(cfg.format, OutputFormat::Json);
        assert_eq!(cfg.penalty, PenaltySpec::aic());

        let cfg = AnalysisConfig::parse("delegated = d.txt\n", Some(Path::new("/data"))).unwrap();
        assert_eq!(cfg.delegated.unwrap(), PathBuf::from("/data/d.txt"));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(AnalysisConfig::parse("bogus = 1", None), Err(Error::Config(_))));
        assert!(matches!(AnalysisConfig::parse("cp_diff = 3", None), Err(Error::Config(_))));
        assert!(matches!(AnalysisConfig::parse("confidence = 1.5", None), Err(Error::Config(_))));
        assert!(matches!(AnalysisConfig::parse("no equals sign", None), Err(Error::Config(_))));
        let cfg = AnalysisConfig::default();
        assert!(cfg.check_series_length("IN", 19).is_ok());
        assert!(matches!(cfg.check_series_length("IN", 18), Err(Error::Config(_))));
    }
}
