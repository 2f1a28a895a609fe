use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use chrono::NaiveDate;

use crate::arima::{
    coefficient_significance, fit_many, forecast, holdout_rmse, ArimaFit, ArimaSpec, FitOptions, ForecastResult,
};
use crate::changepoint::{
    binseg_with, consensus_of, iaav_growth_rates, segneigh_with, ChangePointResult, PenaltySpec, SearchOptions,
};
use crate::error::{Error, Result};
use crate::exec::{self, Mode};
use crate::ingest::{
    build_annual_series, parse_delegated, parse_snapshot, AnnualCountSeries, CountryFilter, DelegatedRecord,
    ParseOptions, Parsed, ResourceType, RouteviewSnapshot, SeriesOptions,
};
use crate::reachability::{daily_advertised, drop_events, period_growth_pct, reachability_stats};
use crate::series_stats::{
    acf, dickey_fuller, difference, iaav, jarque_bera, pacf, shapiro_wilk, PValue, Series, StatTestResult, TrendMode,
};
use crate::trend::{
    aligned_fitted, compare_correlations, fisher_z, linear_trend, relative_growth_pct, rw_drift_trend,
    trend_correlation, TrendEstimate,
};

use super::config::AnalysisConfig;
use super::table::{Cell, Report, Table};

/// Parsed inputs of a run plus any lines skipped while reading them.
#[derive(Debug, Default)]
pub struct Inputs {
    pub records: Vec<DelegatedRecord>,
    pub snapshots: Vec<RouteviewSnapshot>,
    pub skipped: Vec<Error>,
}

fn open(path: &Path) -> Result<Box<dyn BufRead>> {
    if path.as_os_str() == "-" {
        return Ok(Box::new(BufReader::new(std::io::stdin())));
    }
    let f = File::open(path).map_err(|e| Error::Io(e).context(format!("opening {}", path.display())))?;
    Ok(Box::new(BufReader::new(f)))
}

/// Read a delegated statistics file; `-` reads standard input.
pub fn load_delegated(path: &Path, opts: ParseOptions) -> Result<Parsed<Vec<DelegatedRecord>>> {
    parse_delegated(open(path)?, opts).map_err(|e| e.context(format!("parsing {}", path.display())))
}

/// Date embedded in a snapshot file name as `YYYYMMDD` or `YYYY-MM-DD`.
pub fn snapshot_date_from_name(name: &str) -> Option<NaiveDate> {
    let digits: Vec<(usize, char)> = name.char_indices().collect();
    for start in 0..digits.len() {
        let rest: String = digits[start..].iter().map(|&(_, c)| c).collect();
        for (len, fmt) in [(8, "%Y%m%d"), (10, "%Y-%m-%d")] {
            if rest.len() >= len {
                let candidate = &rest[..len];
                let boundary_ok = start == 0 || !digits[start - 1].1.is_ascii_digit();
                if boundary_ok && candidate.starts_with(|c: char| c.is_ascii_digit()) {
                    if let Ok(d) = NaiveDate::parse_from_str(candidate, fmt) {
                        return Some(d);
                    }
                }
            }
        }
    }
    None
}

/// Every regular file in `dir` is a snapshot dated by its file name; sorted by date.
pub fn load_snapshot_dir(dir: &Path, opts: ParseOptions) -> Result<(Vec<RouteviewSnapshot>, Vec<Error>)> {
    let mut entries: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| Error::Io(e).context(format!("listing {}", dir.display())))?
        .collect::<std::io::Result<Vec<_>>>()?;
    entries.sort_by_key(|e| e.file_name());
    let mut snapshots = Vec::new();
    let mut skipped = Vec::new();
    for entry in entries {
        let path = entry.path();
        if !path.is_file() {
            continue;
        }
        let name = entry.file_name().to_string_lossy().into_owned();
        let date = snapshot_date_from_name(&name)
            .ok_or_else(|| Error::Config(format!("snapshot file {name:?} has no YYYYMMDD date in its name")))?;
        let parsed = parse_snapshot(open(&path)?, date, opts).map_err(|e| e.context(format!("parsing {name}")))?;
        skipped.extend(parsed.errors.into_iter().map(|e| e.context(name.clone())));
        snapshots.push(parsed.records);
    }
    snapshots.sort_by_key(|s| s.date);
    Ok((snapshots, skipped))
}

pub fn load_inputs(cfg: &AnalysisConfig) -> Result<Inputs> {
    let opts = ParseOptions { strict: cfg.strict };
    let path = cfg.delegated.as_deref().ok_or_else(|| Error::Config("no delegated input file given".into()))?;
    let parsed = load_delegated(path, opts)?;
    let mut inputs = Inputs { records: parsed.records, snapshots: Vec::new(), skipped: parsed.errors };
    if let Some(dir) = &cfg.snapshot_dir {
        let (snaps, skipped) = load_snapshot_dir(dir, opts)?;
        inputs.snapshots = snaps;
        inputs.skipped.extend(skipped);
    }
    Ok(inputs)
}

/// Latest allocation year among in-use records of a resource type.
pub fn latest_year(records: &[DelegatedRecord], resource: ResourceType) -> Option<i32> {
    records
        .iter()
        .filter(|r| r.resource_type == resource && r.status.is_in_use())
        .filter_map(DelegatedRecord::year)
        .max()
}

/// Annual cumulative series for one label, optionally trimmed to start no earlier than `start_year`.
pub fn label_series(
    records: &[DelegatedRecord],
    label: &str,
    resource: ResourceType,
    start_year: Option<i32>,
    end_year: Option<i32>,
    asn16_only: bool,
) -> Result<AnnualCountSeries> {
    let end = match end_year.or_else(|| latest_year(records, resource)) {
        Some(y) => y,
        None => return Err(Error::NoRecords(format!("{label} {}", resource.as_str()))),
    };
    let mut s = build_annual_series(records, &CountryFilter::parse(label), resource, end, SeriesOptions { asn16_only })?;
    s.label = label.to_string();
    if let Some(start) = start_year {
        if start > s.start_year {
            let skip = ((start - s.start_year) as usize).min(s.counts.len());
            s.counts.drain(..skip);
            s.start_year = start;
            if s.counts.is_empty() {
                return Err(Error::DegenerateInput(format!("{label}: no years left after start_year {start}")));
            }
        }
    }
    Ok(s)
}

pub fn series_table(series: &[AnnualCountSeries]) -> Table {
    let mut t = Table::new("series", &["country", "year", "count", "iaav"]);
    for s in series {
        for (k, year) in s.years().enumerate() {
            let iaav = (k > 0).then(|| s.counts[k].abs_diff(s.counts[k - 1]));
            t.push(vec![s.label.as_str().into(), year.into(), s.counts[k].into(), iaav.map_or(Cell::Empty, Cell::from)]);
        }
    }
    t
}

fn p_cells(p: PValue) -> [Cell; 2] {
    match p {
        PValue::Exact { value } => [Cell::Real(value), Cell::Real(value)],
        PValue::TabulatedBracket { lower, upper } => [Cell::Real(lower), Cell::Real(upper)],
    }
}

/// ACF/PACF and Dickey-Fuller tables for a series and its first difference.
pub fn characterization_tables(label: &str, s: &Series, max_lag: usize) -> Result<(Table, Table)> {
    let mut corr = Table::new("autocorrelation", &["country", "series", "lag", "acf", "pacf", "bound"]);
    let mut df = Table::new(
        "dickey_fuller",
        &["country", "series", "mode", "statistic", "p_lower", "p_upper", "critical_5pct", "reject_unit_root"],
    );
    let diff = difference(s, 1)?;
    for (name, x) in [("level", s), ("diff1", &diff)] {
        let lags = max_lag.min(x.len() - 1);
        if lags >= 1 {
            let a = acf(x, lags)?;
            let p = pacf(x, lags)?;
            for lag in 1..=lags {
                corr.push(vec![
                    label.into(),
                    name.into(),
                    lag.into(),
                    Cell::opt_real(a.at(lag)),
                    Cell::opt_real(p.at(lag)),
                    a.conf_bound.into(),
                ]);
            }
        }
        for (mode_name, mode) in
            [("none", TrendMode::None), ("constant", TrendMode::Constant), ("constant_trend", TrendMode::ConstantTrend)]
        {
            let r = dickey_fuller(x, mode).map_err(|e| e.context(format!("Dickey-Fuller ({name}, {mode_name})")))?;
            let [lo, hi] = p_cells(r.p_value);
            df.push(vec![
                label.into(),
                name.into(),
                mode_name.into(),
                r.statistic.into(),
                lo,
                hi,
                Cell::opt_real(r.critical_value),
                r.reject_null.into(),
            ]);
        }
    }
    Ok((corr, df))
}

/// Residual diagnostics used for model validity.
#[derive(Debug, Clone)]
pub struct ResidualChecks {
    pub jarque_bera: Option<StatTestResult>,
    pub shapiro_wilk: Option<StatTestResult>,
    /// Largest absolute residual autocorrelation over the checked lags.
    pub acf_max: Option<f64>,
    pub acf_bound: Option<f64>,
}

impl ResidualChecks {
    pub fn acf_ok(&self) -> bool {
        matches!((self.acf_max, self.acf_bound), (Some(m), Some(b)) if m <= b)
    }

    /// Normality not rejected by either test and no residual autocorrelation outside the bound.
    pub fn all_pass(&self) -> bool {
        let normal = |t: &Option<StatTestResult>| t.as_ref().is_some_and(|r| !r.reject_null);
        normal(&self.jarque_bera) && normal(&self.shapiro_wilk) && self.acf_ok()
    }
}

pub fn residual_checks(fit: &ArimaFit, max_lag: usize) -> ResidualChecks {
    let res = Series::new(fit.diagnostic_residuals().to_vec()).ok();
    let lag_stats = res.as_ref().and_then(|r| {
        let lags = max_lag.min(r.len() - 1);
        let a = acf(r, lags).ok()?;
        let m = a.lags().filter(|&(lag, _)| lag >= 1).fold(0.0f64, |m, (_, v)| m.max(v.abs()));
        Some((m, a.conf_bound))
    });
    ResidualChecks {
        jarque_bera: res.as_ref().and_then(|r| jarque_bera(r).ok()),
        shapiro_wilk: res.as_ref().and_then(|r| shapiro_wilk(r).ok()),
        acf_max: lag_stats.map(|v| v.0),
        acf_bound: lag_stats.map(|v| v.1),
    }
}

/// One candidate model fitted on the training window and scored on the holdout.
#[derive(Debug, Clone)]
pub struct ModelEvaluation {
    pub fit: ArimaFit,
    pub checks: ResidualChecks,
    pub holdout: Option<ForecastResult>,
    pub observed: Vec<f64>,
    pub rmse: Option<f64>,
}

/// Fit every candidate on the first `train_len` values and forecast the next `horizon`.
/// Candidates that fail are returned as errors alongside the successful evaluations.
pub fn evaluate_candidates(
    s: &Series,
    specs: &[ArimaSpec],
    train_len: usize,
    horizon: usize,
    confidence: f64,
    max_lag: usize,
    opts: &FitOptions,
    mode: Mode,
) -> Result<(Vec<ModelEvaluation>, Vec<(ArimaSpec, Error)>)> {
    let train_len = train_len.min(s.len());
    let origin = s.origin_year();
    let train_values = s.values()[..train_len].to_vec();
    let train = match origin {
        Some(y) => Series::with_origin(train_values, y)?,
        None => Series::new(train_values)?,
    };
    let observed: Vec<f64> = s.values()[train_len..(train_len + horizon).min(s.len())].to_vec();
    let mut evals = Vec::new();
    let mut failures = Vec::new();
    for (spec, result) in specs.iter().zip(fit_many(&train, specs, opts, mode)) {
        match result {
            Ok(fit) => {
                let checks = residual_checks(&fit, max_lag);
                let (holdout, rmse) = if observed.is_empty() {
                    (None, None)
                } else {
                    match forecast(&fit, observed.len(), confidence) {
                        Ok(fc) => {
                            let rmse = holdout_rmse(&observed, &fc.points).ok();
                            (Some(fc), rmse)
                        }
                        Err(e) => {
                            failures.push((*spec, e));
                            (None, None)
                        }
                    }
                };
                evals.push(ModelEvaluation { fit, checks, holdout, observed: observed.clone(), rmse });
            }
            Err(e) => failures.push((*spec, e)),
        }
    }
    Ok((evals, failures))
}

/// Index of the preferred model: residual tests passed, then lowest holdout RMSE,
/// then lowest AICc; earlier candidates win exact ties.
pub fn select_model(evals: &[ModelEvaluation]) -> Option<usize> {
    let key = |e: &ModelEvaluation| (!e.checks.all_pass(), e.rmse.unwrap_or(f64::INFINITY), e.fit.aicc);
    (0..evals.len()).min_by(|&a, &b| {
        let (ka, kb) = (key(&evals[a]), key(&evals[b]));
        ka.0.cmp(&kb.0).then(ka.1.total_cmp(&kb.1)).then(ka.2.total_cmp(&kb.2)).then(a.cmp(&b))
    })
}

pub fn coefficient_table_header() -> Table {
    Table::new("coefficients", &["country", "model", "term", "estimate", "se", "z", "significant"])
}

pub fn coefficient_rows(label: &str, fit: &ArimaFit, t: &mut Table) {
    for c in coefficient_significance(fit) {
        t.push(vec![
            label.into(),
            fit.spec.to_string().into(),
            c.name.into(),
            c.estimate.into(),
            c.se.into(),
            c.z.into(),
            c.significant.into(),
        ]);
    }
}

pub fn model_table_header() -> Table {
    Table::new(
        "models",
        &[
            "country",
            "model",
            "sigma2",
            "loglik",
            "aicc",
            "holdout_rmse",
            "jarque_bera",
            "jarque_bera_p",
            "shapiro_w",
            "shapiro_p",
            "residual_acf_max",
            "residual_acf_bound",
            "residual_tests_pass",
            "selected",
        ],
    )
}

pub fn model_rows(label: &str, evals: &[ModelEvaluation], selected: Option<usize>, t: &mut Table) {
    for (i, e) in evals.iter().enumerate() {
        let stat = |r: &Option<StatTestResult>| Cell::opt_real(r.map(|r| r.statistic));
        let p = |r: &Option<StatTestResult>| Cell::opt_real(r.map(|r| r.p_value.conservative()));
        t.push(vec![
            label.into(),
            e.fit.spec.to_string().into(),
            e.fit.sigma2.into(),
            e.fit.loglik.into(),
            e.fit.aicc.into(),
            Cell::opt_real(e.rmse),
            stat(&e.checks.jarque_bera),
            p(&e.checks.jarque_bera),
            stat(&e.checks.shapiro_wilk),
            p(&e.checks.shapiro_wilk),
            Cell::opt_real(e.checks.acf_max),
            Cell::opt_real(e.checks.acf_bound),
            e.checks.all_pass().into(),
            (selected == Some(i)).into(),
        ]);
    }
}

pub fn forecast_table_header() -> Table {
    Table::new("forecast", &["country", "model", "kind", "year", "step", "observed", "point", "se", "lower", "upper"])
}

pub fn forecast_rows(label: &str, spec: ArimaSpec, kind: &str, fc: &ForecastResult, observed: &[f64], t: &mut Table) {
    for h in 0..fc.horizon {
        t.push(vec![
            label.into(),
            spec.to_string().into(),
            kind.into(),
            fc.first_year.map_or(Cell::Empty, |y| Cell::from(y + h as i32)),
            (h + 1).into(),
            Cell::opt_real(observed.get(h).copied()),
            fc.points[h].into(),
            fc.se[h].into(),
            fc.lower[h].into(),
            fc.upper[h].into(),
        ]);
    }
}

pub fn changepoint_table_header() -> Table {
    Table::new(
        "changepoints",
        &["country", "method", "penalty", "index", "year", "before_pct", "after_pct", "before_slope", "after_slope"],
    )
}

pub fn segment_table_header() -> Table {
    Table::new("segments", &["country", "method", "segment", "start_year", "end_year", "length", "variance"])
}

/// Series searched for changepoints: `|Δ^order y|`, so order 1 is the IAAV.
pub fn changepoint_target(s: &Series, order: usize) -> Result<Series> {
    match order {
        1 => iaav(s),
        2 => {
            let d = difference(s, 2)?;
            let origin = d.origin_year();
            let abs: Vec<f64> = d.into_values().into_iter().map(f64::abs).collect();
            match origin {
                Some(y) => Series::with_origin(abs, y),
                None => Series::new(abs),
            }
        }
        _ => Err(Error::Config(format!("changepoint differencing order must be 1 or 2, got {order}"))),
    }
}

/// Both searches plus their consensus on a series (normally the IAAV).
pub fn changepoint_analysis(
    s: &Series,
    penalty: PenaltySpec,
    max_cps: usize,
    mode: Mode,
) -> Result<(ChangePointResult, ChangePointResult, Vec<usize>)> {
    let opts = SearchOptions { mode, ..SearchOptions::default() };
    let bs = binseg_with(s, penalty, max_cps, &opts)?;
    let sn = segneigh_with(s, penalty, max_cps, &opts)?;
    let consensus = consensus_of(&bs, &sn);
    Ok((bs, sn, consensus))
}

pub fn changepoint_rows(label: &str, s: &Series, method: &str, penalty: PenaltySpec, cps: &[usize], t: &mut Table) {
    for &cp in cps {
        let rates = iaav_growth_rates(s, cp).ok();
        t.push(vec![
            label.into(),
            method.into(),
            penalty.to_string().into(),
            cp.into(),
            s.year_of(cp - 1).map_or(Cell::Empty, Cell::from),
            Cell::opt_real(rates.map(|r| r.before_pct)),
            Cell::opt_real(rates.map(|r| r.after_pct)),
            Cell::opt_real(rates.map(|r| r.before_slope)),
            Cell::opt_real(rates.map(|r| r.after_slope)),
        ]);
    }
}

pub fn segment_rows(label: &str, s: &Series, r: &ChangePointResult, method: &str, t: &mut Table) {
    let bounds: Vec<usize> =
        std::iter::once(0).chain(r.changepoints.iter().copied()).chain(std::iter::once(s.len())).collect();
    for (k, w) in bounds.windows(2).enumerate() {
        t.push(vec![
            label.into(),
            method.into(),
            (k + 1).into(),
            s.year_of(w[0]).map_or(Cell::Empty, Cell::from),
            s.year_of(w[1] - 1).map_or(Cell::Empty, Cell::from),
            (w[1] - w[0]).into(),
            r.segment_variances[k].into(),
        ]);
    }
}

pub fn trend_table_header() -> Table {
    Table::new("trend", &["country", "method", "first_year", "last_year", "annual_growth", "se", "relative_pct"])
}

pub fn trend_rows(label: &str, est: &TrendEstimate, region: Option<&TrendEstimate>, t: &mut Table) {
    let fitted = &est.fitted;
    t.push(vec![
        label.into(),
        est.method.label().into(),
        fitted.origin_year().map_or(Cell::Empty, Cell::from),
        fitted.year_of(fitted.len() - 1).map_or(Cell::Empty, Cell::from),
        est.annual_growth.into(),
        est.se.into(),
        Cell::opt_real(region.and_then(|r| relative_growth_pct(est, r).ok())),
    ]);
}

pub fn correlation_table_header() -> Table {
    Table::new("correlations", &["country", "other", "n", "r", "z"])
}

pub fn correlation_test_header() -> Table {
    Table::new(
        "correlation_tests",
        &["country", "within", "z1", "n1", "across", "z2", "n2", "zd", "p_value", "reject_equal"],
    )
}

pub fn reachability_table_header() -> Table {
    Table::new(
        "reachability",
        &["label", "date", "registered", "assigned", "advertised", "ratio", "period_increase_pct"],
    )
}

pub fn drop_table_header() -> Table {
    Table::new("drop_events", &["label", "date", "advertised", "drop_pct"])
}

/// Reachability rows for each label against the latest snapshot, plus daily drop events.
pub fn reachability_tables(
    labels: &[String],
    records: &[DelegatedRecord],
    snapshots: &[RouteviewSnapshot],
    drop_threshold_pct: f64,
    mode: Mode,
    errors: &mut Table,
) -> (Table, Table) {
    let mut table = reachability_table_header();
    let mut drops = drop_table_header();
    let Some(latest) = snapshots.iter().max_by_key(|s| s.date) else {
        return (table, drops);
    };
    for label in labels {
        let filter = CountryFilter::parse(label);
        let daily = daily_advertised(mode, records, &filter, snapshots);
        match reachability_stats(label, records, &filter, latest) {
            Ok(mut st) => {
                st.period_increase_pct = period_growth_pct(&daily).ok();
                table.push(vec![
                    label.as_str().into(),
                    latest.date.to_string().into(),
                    st.registered.into(),
                    st.assigned.into(),
                    st.advertised.into(),
                    Cell::Fixed(st.ratio, 1),
                    Cell::opt_real(st.period_increase_pct),
                ]);
            }
            Err(e) => push_error(errors, label, "reachability", &e),
        }
        if daily.len() >= 2 {
            match drop_events(&daily, drop_threshold_pct) {
                Ok(events) => {
                    for (date, pct) in events {
                        let count = daily.iter().find(|d| d.0 == date).map_or(0, |d| d.1);
                        drops.push(vec![label.as_str().into(), date.to_string().into(), count.into(), pct.into()]);
                    }
                }
                Err(e) => push_error(errors, label, "drop_events", &e),
            }
        }
    }
    (table, drops)
}

pub fn error_table_header() -> Table {
    Table::new("errors", &["country", "stage", "message"])
}

fn push_error(t: &mut Table, label: &str, stage: &str, e: &Error) {
    t.push(vec![label.into(), stage.into(), e.to_string().into()]);
}

/// Per-country tables, merged in config order after a parallel map.
struct CountryTables {
    corr: Table,
    df: Table,
    models: Table,
    coefficients: Table,
    forecast: Table,
    changepoints: Table,
    segments: Table,
    errors: Table,
}

fn analyze_country(cfg: &AnalysisConfig, label: &str, annual: &AnnualCountSeries) -> CountryTables {
    let mut out = CountryTables {
        corr: Table::new("", &[]),
        df: Table::new("", &[]),
        models: model_table_header(),
        coefficients: coefficient_table_header(),
        forecast: forecast_table_header(),
        changepoints: changepoint_table_header(),
        segments: segment_table_header(),
        errors: error_table_header(),
    };
    let s = match annual.to_series() {
        Ok(s) => s,
        Err(e) => {
            push_error(&mut out.errors, label, "series", &e);
            return out;
        }
    };
    match characterization_tables(label, &s, cfg.max_lag) {
        Ok((c, d)) => {
            out.corr = c;
            out.df = d;
        }
        Err(e) => push_error(&mut out.errors, label, "characterize", &e),
    }

    let opts = FitOptions { likelihood: cfg.likelihood, ..FitOptions::default() };
    // Nested data parallelism buys nothing here; the country loop is already parallel.
    let inner = Mode::Sequential;
    match evaluate_candidates(
        &s,
        &cfg.candidate_specs,
        cfg.train_len,
        cfg.horizon,
        cfg.confidence,
        cfg.max_lag,
        &opts,
        inner,
    ) {
        Ok((evals, failures)) => {
            for (spec, e) in failures {
                push_error(&mut out.errors, label, &format!("fit {spec}"), &e);
            }
            let selected = select_model(&evals);
            for e in &evals {
                coefficient_rows(label, &e.fit, &mut out.coefficients);
            }
            model_rows(label, &evals, selected, &mut out.models);
            if let Some(i) = selected {
                let chosen = &evals[i];
                if let Some(fc) = &chosen.holdout {
                    forecast_rows(label, chosen.fit.spec, "holdout", fc, &chosen.observed, &mut out.forecast);
                }
                match crate::arima::fit_with(&s, chosen.fit.spec, &opts)
                    .and_then(|full| forecast(&full, cfg.horizon, cfg.confidence))
                {
                    Ok(fc) => forecast_rows(label, chosen.fit.spec, "future", &fc, &[], &mut out.forecast),
                    Err(e) => push_error(&mut out.errors, label, "forecast", &e),
                }
            }
        }
        Err(e) => push_error(&mut out.errors, label, "fit", &e),
    }

    match changepoint_target(&s, cfg.cp_diff).and_then(|ia| changepoint_analysis(&ia, cfg.penalty, cfg.max_cps, inner).map(|r| (ia, r))) {
        Ok((ia, (bs, sn, consensus))) => {
            changepoint_rows(label, &ia, "binseg", cfg.penalty, &bs.changepoints, &mut out.changepoints);
            changepoint_rows(label, &ia, "segneigh", cfg.penalty, &sn.changepoints, &mut out.changepoints);
            changepoint_rows(label, &ia, "consensus", cfg.penalty, &consensus, &mut out.changepoints);
            segment_rows(label, &ia, &bs, "binseg", &mut out.segments);
            segment_rows(label, &ia, &sn, "segneigh", &mut out.segments);
        }
        Err(e) => push_error(&mut out.errors, label, "changepoint", &e),
    }
    out
}

fn unique(labels: impl IntoIterator<Item = String>) -> Vec<String> {
    let mut seen = BTreeSet::new();
    labels.into_iter().filter(|l| seen.insert(l.to_ascii_uppercase())).collect()
}

/// Run the full analysis over loaded inputs.
pub fn analyze(cfg: &AnalysisConfig, inputs: &Inputs) -> Result<Report> {
    cfg.validate()?;
    if cfg.countries.is_empty() {
        return Err(Error::Config("no countries configured".into()));
    }
    let mut errors = error_table_header();
    for e in &inputs.skipped {
        push_error(&mut errors, "", "ingest", e);
    }

    let focus = cfg.countries[0].clone();
    let labels = unique(
        cfg.countries
            .iter()
            .chain(std::iter::once(&cfg.region))
            .chain(&cfg.group_within)
            .chain(&cfg.group_across)
            .cloned(),
    );
    let built: Vec<(String, Result<AnnualCountSeries>)> = labels
        .iter()
        .map(|l| (l.clone(), label_series(&inputs.records, l, cfg.resource, cfg.start_year, cfg.end_year, cfg.asn16_only)))
        .collect();
    let series_of = |label: &str| {
        built.iter().find(|(l, _)| l == label).and_then(|(_, r)| r.as_ref().ok())
    };

    // Holdout lengths are a configuration matter: check them all before any fitting.
    for c in &cfg.countries {
        if let Some(s) = series_of(c) {
            cfg.check_series_length(c, s.counts.len())?;
        }
    }
    for (label, r) in &built {
        if let Err(e) = r {
            push_error(&mut errors, label, "series", e);
        }
    }

    let available: Vec<(String, AnnualCountSeries)> = cfg
        .countries
        .iter()
        .filter_map(|c| series_of(c).map(|s| (c.clone(), s.clone())))
        .collect();
    let per_country = exec::map_slice(cfg.mode, &available, |(label, s)| analyze_country(cfg, label, s));

    let mut corr = Table::new(
        "autocorrelation",
        &["country", "series", "lag", "acf", "pacf", "bound"],
    );
    let mut df = Table::new(
        "dickey_fuller",
        &["country", "series", "mode", "statistic", "p_lower", "p_upper", "critical_5pct", "reject_unit_root"],
    );
    let mut models = model_table_header();
    let mut coefficients = coefficient_table_header();
    let mut forecasts = forecast_table_header();
    let mut changepoints = changepoint_table_header();
    let mut segments = segment_table_header();
    for ct in per_country {
        corr.extend(ct.corr);
        df.extend(ct.df);
        models.extend(ct.models);
        coefficients.extend(ct.coefficients);
        forecasts.extend(ct.forecast);
        changepoints.extend(ct.changepoints);
        segments.extend(ct.segments);
        errors.extend(ct.errors);
    }

    let trend_labels: Vec<String> = labels.clone();
    let rw: Vec<(String, Result<TrendEstimate>)> = trend_labels
        .iter()
        .filter_map(|l| series_of(l).map(|s| (l.clone(), s.to_series().and_then(|x| rw_drift_trend(&x)))))
        .collect();
    let lin: Vec<(String, Result<TrendEstimate>)> = trend_labels
        .iter()
        .filter_map(|l| series_of(l).map(|s| (l.clone(), s.to_series().and_then(|x| linear_trend(&x)))))
        .collect();
    let find = |v: &'_ [(String, Result<TrendEstimate>)], l: &str| -> Option<TrendEstimate> {
        v.iter().find(|(x, _)| x == l).and_then(|(_, r)| r.as_ref().ok().cloned())
    };
    let mut trend = trend_table_header();
    for (label, _) in &rw {
        for set in [&rw, &lin] {
            match set.iter().find(|(x, _)| x == label).map(|(_, r)| r) {
                Some(Ok(est)) => trend_rows(label, est, find(set, &cfg.region).as_ref(), &mut trend),
                Some(Err(e)) => push_error(&mut errors, label, "trend", e),
                None => {}
            }
        }
    }

    let mut correlations = correlation_table_header();
    let mut tests = correlation_test_header();
    if let Some(f) = find(&rw, &focus) {
        let pair = |other: &str| -> Result<(f64, usize)> {
            let o = find(&rw, other).ok_or_else(|| Error::NoRecords(other.to_string()))?;
            let (x, _) = aligned_fitted(&f, &o)?;
            Ok((trend_correlation(&f, &o)?, cfg.fisher_n.unwrap_or(x.len())))
        };
        for other in labels.iter().filter(|l| **l != focus) {
            match pair(other) {
                Ok((r, n)) => correlations.push(vec![
                    focus.as_str().into(),
                    other.as_str().into(),
                    n.into(),
                    r.into(),
                    Cell::opt_real(fisher_z(r).ok()),
                ]),
                Err(e) => push_error(&mut errors, other, "correlation", &e),
            }
        }
        for w in &cfg.group_within {
            for a in &cfg.group_across {
                let row = pair(w).and_then(|(r1, n1)| {
                    pair(a).and_then(|(r2, n2)| compare_correlations(r1, n1, r2, n2))
                });
                match row {
                    Ok(c) => tests.push(vec![
                        focus.as_str().into(),
                        w.as_str().into(),
                        c.z1.into(),
                        c.n1.into(),
                        a.as_str().into(),
                        c.z2.into(),
                        c.n2.into(),
                        c.zd.into(),
                        c.p_value.into(),
                        c.reject_equal.into(),
                    ]),
                    Err(e) => push_error(&mut errors, &format!("{w}/{a}"), "correlation_test", &e),
                }
            }
        }
    }

    let reach_labels = unique(cfg.countries.iter().chain(std::iter::once(&cfg.region)).cloned());
    let (reach, drops) =
        reachability_tables(&reach_labels, &inputs.records, &inputs.snapshots, cfg.drop_threshold_pct, cfg.mode, &mut errors);

    let all_series: Vec<AnnualCountSeries> = labels.iter().filter_map(|l| series_of(l).cloned()).collect();
    Ok(Report {
        tables: vec![
            series_table(&all_series),
            corr,
            df,
            models,
            coefficients,
            forecasts,
            trend,
            correlations,
            tests,
            changepoints,
            segments,
            reach,
            drops,
            errors,
        ],
    })
}

/// Load the configured inputs and run the full analysis.
pub fn run_pipeline(cfg: &AnalysisConfig) -> Result<Report> {
    cfg.validate()?;
    let inputs = load_inputs(cfg)?;
    analyze(cfg, &inputs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapshot_names() {
        let d = |y, m, dd| NaiveDate::from_ymd_opt(y, m, dd);
        assert_eq!(snapshot_date_from_name("rib.20130105.txt"), d(2013, 1, 5));
        assert_eq!(snapshot_date_from_name("asns-2013-01-06"), d(2013, 1, 6));
        assert_eq!(snapshot_date_from_name("notes.txt"), None);
        assert_eq!(snapshot_date_from_name("x120130105"), None);
    }

    #[test]
    fn changepoint_target_orders() {
        let s = Series::with_origin(vec![1.0, 4.0, 6.0, 13.0, 14.0], 2000).unwrap();
        let first = changepoint_target(&s, 1).unwrap();
        assert_eq!(first.values(), [3.0, 2.0, 7.0, 1.0]);
        assert_eq!(first.origin_year(), Some(2001));
        let second = changepoint_target(&s, 2).unwrap();
        assert_eq!(second.values(), [1.0, 5.0, 6.0]);
        assert_eq!(second.origin_year(), Some(2002));
        assert!(matches!(changepoint_target(&s, 3), Err(Error::Config(_))));
    }

    fn eval(pass: bool, rmse: Option<f64>, aicc: f64) -> ModelEvaluation {
        let s = Series::new((0..30).map(|i| (i * i) as f64 + if i % 3 == 0 { 1.0 } else { 0.0 }).collect()).unwrap();
        let mut fit = crate::arima::fit(&s, ArimaSpec::new(0, 1, 0).with_drift()).unwrap();
        fit.aicc = aicc;
        let test = StatTestResult {
            statistic: 0.0,
            p_value: PValue::Exact { value: 0.5 },
            reject_null: !pass,
            critical_value: None,
        };
        ModelEvaluation {
            fit,
            checks: ResidualChecks {
                jarque_bera: Some(test),
                shapiro_wilk: Some(test),
                acf_max: Some(0.1),
                acf_bound: Some(0.5),
            },
            holdout: None,
            observed: vec![],
            rmse,
        }
    }

    #[test]
    fn selection_order() {
        let v = vec![eval(false, Some(1.0), 0.0), eval(true, Some(5.0), 9.0), eval(true, Some(5.0), 3.0)];
        assert_eq!(select_model(&v), Some(2));
        let v = vec![eval(true, None, 0.0), eval(true, Some(50.0), 9.0)];
        assert_eq!(select_model(&v), Some(1));
        let v = vec![eval(true, Some(2.0), 1.0), eval(true, Some(2.0), 1.0)];
        assert_eq!(select_model(&v), Some(0));
        assert_eq!(select_model(&[]), None);
    }
}
