//! `asgrowth`: AS-number growth analysis from RIR delegated statistics.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use asgrowth_core::arima::{fit_with, forecast, ArimaSpec, FitOptions, LikelihoodMode};
use asgrowth_core::changepoint::{consensus_of, PenaltySpec};
use asgrowth_core::exec::Mode;
use asgrowth_core::ingest::{AnnualCountSeries, ParseOptions, ResourceType};
use asgrowth_core::report::{self, AnalysisConfig, Cell, OutputFormat, Report, Table};
use asgrowth_core::trend::{compare_correlations, compare_fisher_z, linear_trend, rw_drift_trend, trend_correlation};
use asgrowth_core::{Error, Result, Series};

#[derive(Parser, Debug)]
#[command(name = "asgrowth", version, about = "AS-number growth analysis from RIR delegated statistics")]
struct Cli {
    /// Delegated statistics file (`-` for standard input).
    #[arg(long, global = true)]
    input: Option<PathBuf>,

    /// Output format.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Run data-parallel loops on one thread.
    #[arg(long, global = true)]
    sequential: bool,

    /// Abort on the first malformed input line instead of skipping it.
    #[arg(long, global = true)]
    strict: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Clone)]
struct SeriesArgs {
    /// Country code, or a registry name (e.g. `apnic`) for the whole file.
    #[arg(long)]
    country: Option<String>,

    /// Resource type to count.
    #[arg(long, default_value = "asn")]
    resource: String,

    #[arg(long)]
    start_year: Option<i32>,

    #[arg(long)]
    end_year: Option<i32>,

    /// Count only 16-bit AS numbers.
    #[arg(long)]
    asn16: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build annual cumulative count series.
    Ingest {
        #[command(flatten)]
        series: SeriesArgs,
        /// Additional comma-separated labels.
        #[arg(long, value_delimiter = ',')]
        countries: Vec<String>,
    },
    /// ACF/PACF and Dickey-Fuller tests on the level and differenced series.
    Characterize {
        #[command(flatten)]
        series: SeriesArgs,
        #[arg(long)]
        max_lag: Option<usize>,
    },
    /// Fit candidate ARIMA models and score them on a holdout window.
    Fit {
        #[command(flatten)]
        series: SeriesArgs,
        /// `p,d,q[,drift]`; repeatable.
        #[arg(long = "model")]
        models: Vec<String>,
        #[arg(long)]
        train_len: Option<usize>,
        #[arg(long)]
        horizon: Option<usize>,
        #[arg(long, value_enum)]
        likelihood: Option<Likelihood>,
    },
    /// Forecast with prediction intervals.
    Forecast {
        #[command(flatten)]
        series: SeriesArgs,
        #[arg(long = "model")]
        model: String,
        #[arg(long)]
        horizon: Option<usize>,
        #[arg(long)]
        level: Option<f64>,
        /// Fit on the first N values and compare against the rest.
        #[arg(long)]
        train_len: Option<usize>,
    },
    /// Drift and linear trends with growth relative to the region.
    Trend {
        /// Comma-separated labels.
        #[arg(long, value_delimiter = ',')]
        countries: Vec<String>,
        #[arg(long)]
        region: Option<String>,
        #[arg(long)]
        start_year: Option<i32>,
        #[arg(long)]
        end_year: Option<i32>,
    },
    /// Compare two correlations through Fisher's z.
    Compare {
        #[arg(long, allow_hyphen_values = true)]
        r1: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        r2: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        z1: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        z2: Option<f64>,
        #[arg(long)]
        n1: Option<usize>,
        #[arg(long)]
        n2: Option<usize>,
        /// Compute correlations from the data: focus country.
        #[arg(long)]
        country: Option<String>,
        /// Same-group partner of the focus country.
        #[arg(long)]
        within: Option<String>,
        /// Other-group partner of the focus country.
        #[arg(long)]
        across: Option<String>,
    },
    /// Variance changepoints in the inter-annual absolute variation.
    Changepoint {
        #[command(flatten)]
        series: SeriesArgs,
        #[arg(long, value_enum, default_value = "consensus")]
        method: CpMethod,
        /// `aic`, `sic` or `manual=<value>`.
        #[arg(long)]
        penalty: Option<String>,
        #[arg(long = "max-cps", visible_alias = "Q")]
        max_cps: Option<usize>,
        /// Search the cumulative series itself instead of its IAAV.
        #[arg(long, conflicts_with = "diff")]
        level: bool,
        /// Differencing order of the searched series: 1 is the IAAV, 2 is `|Δ²y|`.
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        diff: Option<u8>,
    },
    /// Assigned versus advertised AS numbers.
    Reachability {
        /// Directory of dated snapshot files.
        #[arg(long)]
        snapshots: Option<PathBuf>,
        /// Comma-separated labels.
        #[arg(long, value_delimiter = ',')]
        countries: Vec<String>,
        #[arg(long)]
        drop_threshold: Option<f64>,
    },
    /// Full analysis driven by the configuration file.
    Report,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Likelihood {
    Exact,
    Css,
}

#[derive(Copy, Clone, Debug, ValueEnum, PartialEq)]
enum CpMethod {
    Binseg,
    Segneigh,
    Consensus,
    All,
}

struct Ctx {
    cfg: AnalysisConfig,
}

impl Ctx {
    fn new(cli: &Cli) -> Result<Self> {
        let mut cfg = match &cli.config {
            Some(p) => AnalysisConfig::from_file(p)?,
            None => AnalysisConfig::default(),
        };
        if let Some(i) = &cli.input {
            cfg.delegated = Some(i.clone());
        }
        if let Some(f) = cli.format {
            cfg.format = match f {
                Format::Csv => OutputFormat::Csv,
                Format::Json => OutputFormat::Json,
            };
        }
        if cli.sequential {
            cfg.mode = Mode::Sequential;
        }
        if cli.strict {
            cfg.strict = true;
        }
        Ok(Self { cfg })
    }

    fn records(&self) -> Result<Vec<asgrowth_core::ingest::DelegatedRecord>> {
        let path = self
            .cfg
            .delegated
            .as_deref()
            .ok_or_else(|| Error::Config("no input: pass --input or set `delegated` in the config".into()))?;
        Ok(report::load_delegated(path, ParseOptions { strict: self.cfg.strict })?.records)
    }

    fn default_label(&self) -> String {
        self.cfg.countries.first().cloned().unwrap_or_else(|| self.cfg.region.clone())
    }

    fn series(&self, a: &SeriesArgs) -> Result<AnnualCountSeries> {
        let label = a.country.clone().unwrap_or_else(|| self.default_label());
        let resource: ResourceType = a.resource.parse().map_err(Error::Config)?;
        report::label_series(
            &self.records()?,
            &label,
            resource,
            a.start_year.or(self.cfg.start_year),
            a.end_year.or(self.cfg.end_year),
            a.asn16 || self.cfg.asn16_only,
        )
    }
}

fn parse_specs(models: &[String], fallback: &[ArimaSpec]) -> Result<Vec<ArimaSpec>> {
    if models.is_empty() {
        return Ok(fallback.to_vec());
    }
    models.iter().map(|m| m.parse()).collect()
}

fn run(cli: &Cli) -> Result<Report> {
    let ctx = Ctx::new(cli)?;
    let cfg = &ctx.cfg;
    let mut errors = report::error_table_header();
    let mut tables = match &cli.command {
        Command::Ingest { series, countries } => {
            let records = ctx.records()?;
            let mut labels: Vec<String> = series.country.iter().cloned().chain(countries.iter().cloned()).collect();
            if labels.is_empty() {
                labels.push(ctx.default_label());
            }
            let resource: ResourceType = series.resource.parse().map_err(Error::Config)?;
            let built = labels
                .iter()
                .map(|l| {
                    report::label_series(
                        &records,
                        l,
                        resource,
                        series.start_year.or(cfg.start_year),
                        series.end_year.or(cfg.end_year),
                        series.asn16 || cfg.asn16_only,
                    )
                })
                .collect::<Result<Vec<_>>>()?;
            vec![report::series_table(&built)]
        }
        Command::Characterize { series, max_lag } => {
            let annual = ctx.series(series)?;
            let (corr, df) =
                report::characterization_tables(&annual.label, &annual.to_series()?, max_lag.unwrap_or(cfg.max_lag))?;
            vec![corr, df]
        }
        Command::Fit { series, models, train_len, horizon, likelihood } => {
            let annual = ctx.series(series)?;
            let s = annual.to_series()?;
            let specs = parse_specs(models, &cfg.candidate_specs)?;
            let train = train_len.unwrap_or(s.len());
            let horizon = if train >= s.len() { 0 } else { horizon.unwrap_or(cfg.horizon) };
            let opts = FitOptions {
                likelihood: match likelihood {
                    Some(Likelihood::Css) => LikelihoodMode::Conditional,
                    Some(Likelihood::Exact) => LikelihoodMode::Exact,
                    None => cfg.likelihood,
                },
                ..FitOptions::default()
            };
            let (evals, failures) =
                report::evaluate_candidates(&s, &specs, train, horizon, cfg.confidence, cfg.max_lag, &opts, cfg.mode)?;
            if evals.is_empty() {
                if let Some((spec, e)) = failures.into_iter().next() {
                    return Err(e.context(format!("fitting {spec}")));
                }
                return Err(Error::Config("no models to fit".into()));
            }
            for (spec, e) in &failures {
                errors.push(vec![annual.label.as_str().into(), format!("fit {spec}").into(), e.to_string().into()]);
            }
            let selected = report::select_model(&evals);
            let mut models = report::model_table_header();
            report::model_rows(&annual.label, &evals, selected, &mut models);
            let mut coefs = report::coefficient_table_header();
            for e in &evals {
                report::coefficient_rows(&annual.label, &e.fit, &mut coefs);
            }
            vec![models, coefs]
        }
        Command::Forecast { series, model, horizon, level, train_len } => {
            let annual = ctx.series(series)?;
            let s = annual.to_series()?;
            let spec: ArimaSpec = model.parse()?;
            let horizon = horizon.unwrap_or(cfg.horizon);
            let level = level.unwrap_or(cfg.confidence);
            let opts = FitOptions { likelihood: cfg.likelihood, ..FitOptions::default() };
            let mut t = report::forecast_table_header();
            match train_len {
                Some(n) => {
                    cfg_check_holdout(*n, horizon, s.len(), &annual.label)?;
                    let train = Series::with_origin(s.values()[..*n].to_vec(), annual.start_year)?;
                    let fit = fit_with(&train, spec, &opts)?;
                    let fc = forecast(&fit, horizon, level)?;
                    report::forecast_rows(&annual.label, spec, "holdout", &fc, &s.values()[*n..*n + horizon], &mut t);
                    let rmse = asgrowth_core::arima::holdout_rmse(&s.values()[*n..*n + horizon], &fc.points)?;
                    let mut summary = Table::new("holdout", &["country", "model", "train_len", "horizon", "rmse"]);
                    summary.push(vec![
                        annual.label.as_str().into(),
                        spec.to_string().into(),
                        (*n).into(),
                        horizon.into(),
                        rmse.into(),
                    ]);
                    vec![t, summary]
                }
                None => {
                    let fit = fit_with(&s, spec, &opts)?;
                    let fc = forecast(&fit, horizon, level)?;
                    report::forecast_rows(&annual.label, spec, "future", &fc, &[], &mut t);
                    vec![t]
                }
            }
        }
        Command::Trend { countries, region, start_year, end_year } => {
            let records = ctx.records()?;
            let region = region.clone().unwrap_or_else(|| cfg.region.clone());
            let labels = if countries.is_empty() { cfg.countries.clone() } else { countries.clone() };
            let build = |l: &str| {
                report::label_series(
                    &records,
                    l,
                    cfg.resource,
                    start_year.or(cfg.start_year),
                    end_year.or(cfg.end_year),
                    cfg.asn16_only,
                )
                .and_then(|s| s.to_series())
            };
            let region_series = build(&region)?;
            let region_rw = rw_drift_trend(&region_series)?;
            let region_lin = linear_trend(&region_series)?;
            let mut t = report::trend_table_header();
            for label in labels.iter().chain(std::iter::once(&region)) {
                let s = build(label)?;
                report::trend_rows(label, &rw_drift_trend(&s)?, Some(&region_rw), &mut t);
                report::trend_rows(label, &linear_trend(&s)?, Some(&region_lin), &mut t);
            }
            vec![t]
        }
        Command::Compare { r1, r2, z1, z2, n1, n2, country, within, across } => {
            let mut t = report::correlation_test_header();
            let need = |v: Option<usize>, name: &str| v.ok_or_else(|| Error::Config(format!("--{name} is required")));
            let cmp = match (r1, r2, z1, z2) {
                (Some(a), Some(b), None, None) => compare_correlations(*a, need(*n1, "n1")?, *b, need(*n2, "n2")?)?,
                (None, None, Some(a), Some(b)) => compare_fisher_z(*a, need(*n1, "n1")?, *b, need(*n2, "n2")?)?,
                (None, None, None, None) => {
                    let focus = country.clone().unwrap_or_else(|| ctx.default_label());
                    let (w, a) = match (within, across) {
                        (Some(w), Some(a)) => (w.clone(), a.clone()),
                        _ => return Err(Error::Config("give --r1/--r2, --z1/--z2, or --within and --across".into())),
                    };
                    let records = ctx.records()?;
                    let trend = |l: &str| {
                        report::label_series(&records, l, cfg.resource, cfg.start_year, cfg.end_year, cfg.asn16_only)
                            .and_then(|s| s.to_series())
                            .and_then(|s| rw_drift_trend(&s))
                    };
                    let (f, tw, ta) = (trend(&focus)?, trend(&w)?, trend(&a)?);
                    let overlap = |o| asgrowth_core::trend::aligned_fitted(&f, o).map(|(x, _)| x.len());
                    let m1 = n1.or(cfg.fisher_n).map_or_else(|| overlap(&tw), Ok)?;
                    let m2 = n2.or(cfg.fisher_n).map_or_else(|| overlap(&ta), Ok)?;
                    let c = compare_correlations(trend_correlation(&f, &tw)?, m1, trend_correlation(&f, &ta)?, m2)?;
                    t.push(row(&focus, &w, &a, &c));
                    return Ok(Report { tables: vec![t] });
                }
                _ => return Err(Error::Config("give either --r1/--r2 or --z1/--z2".into())),
            };
            t.push(row("", "r1", "r2", &cmp));
            vec![t]
        }
        Command::Changepoint { series, method, penalty, max_cps, level, diff } => {
            let annual = ctx.series(series)?;
            let s = annual.to_series()?;
            let order = diff.map_or(cfg.cp_diff, usize::from);
            let target = if *level { s } else { report::changepoint_target(&s, order)? };
            let penalty: PenaltySpec = match penalty {
                Some(p) => p.parse()?,
                None => cfg.penalty,
            };
            let q = max_cps.unwrap_or(cfg.max_cps);
            let (bs, sn, _) = report::changepoint_analysis(&target, penalty, q, cfg.mode)?;
            let mut cps = report::changepoint_table_header();
            let mut segs = report::segment_table_header();
            let label = annual.label.as_str();
            if matches!(method, CpMethod::Binseg | CpMethod::All) {
                report::changepoint_rows(label, &target, "binseg", penalty, &bs.changepoints, &mut cps);
                report::segment_rows(label, &target, &bs, "binseg", &mut segs);
            }
            if matches!(method, CpMethod::Segneigh | CpMethod::All) {
                report::changepoint_rows(label, &target, "segneigh", penalty, &sn.changepoints, &mut cps);
                report::segment_rows(label, &target, &sn, "segneigh", &mut segs);
            }
            if matches!(method, CpMethod::Consensus | CpMethod::All) {
                report::changepoint_rows(label, &target, "consensus", penalty, &consensus_of(&bs, &sn), &mut cps);
            }
            vec![cps, segs]
        }
        Command::Reachability { snapshots, countries, drop_threshold } => {
            let records = ctx.records()?;
            let dir = snapshots
                .clone()
                .or_else(|| cfg.snapshot_dir.clone())
                .ok_or_else(|| Error::Config("no snapshot directory: pass --snapshots".into()))?;
            let (snaps, skipped) = report::load_snapshot_dir(&dir, ParseOptions { strict: cfg.strict })?;
            if snaps.is_empty() {
                return Err(Error::NoRecords(format!("no snapshot files in {}", dir.display())));
            }
            for e in skipped {
                errors.push(vec!["".into(), "ingest".into(), e.to_string().into()]);
            }
            let labels = if countries.is_empty() {
                let mut l = cfg.countries.clone();
                l.push(cfg.region.clone());
                l
            } else {
                countries.clone()
            };
            let (reach, drops) = report::reachability_tables(
                &labels,
                &records,
                &snaps,
                drop_threshold.unwrap_or(cfg.drop_threshold_pct),
                cfg.mode,
                &mut errors,
            );
            vec![reach, drops]
        }
        Command::Report => return report::run_pipeline(cfg),
    };
    if !errors.rows.is_empty() {
        tables.push(errors);
    }
    Ok(Report { tables })
}

fn cfg_check_holdout(train: usize, horizon: usize, len: usize, label: &str) -> Result<()> {
    if train + horizon > len {
        return Err(Error::Config(format!(
            "{label}: train_len {train} + horizon {horizon} exceeds the series length {len}"
        )));
    }
    Ok(())
}

fn row(focus: &str, within: &str, across: &str, c: &asgrowth_core::trend::CorrelationComparison) -> Vec<Cell> {
    vec![
        focus.into(),
        within.into(),
        c.z1.into(),
        c.n1.into(),
        across.into(),
        c.z2.into(),
        c.n2.into(),
        c.zd.into(),
        c.p_value.into(),
        c.reject_equal.into(),
    ]
}

fn format_of(cli: &Cli) -> OutputFormat {
    match cli.format {
        Some(Format::Json) => OutputFormat::Json,
        Some(Format::Csv) => OutputFormat::Csv,
        None => cli
            .config
            .as_deref()
            .and_then(|p: &Path| AnalysisConfig::from_file(p).ok())
            .map_or(OutputFormat::Csv, |c| c.format),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = run(&cli).and_then(|r| r.render(format_of(&cli)));
    match outcome {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("asgrowth: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(if e.root().is_input_error() { 1 } else { 2 })
        }
    }
}
