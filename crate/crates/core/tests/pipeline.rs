use std::path::PathBuf;

use asgrowth_core::exec::Mode;
use asgrowth_core::report::{format_fixed, format_sig, run_pipeline, AnalysisConfig, Cell, OutputFormat};
use asgrowth_core::Error;
use serde_json::Value;

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn synthetic_config() -> AnalysisConfig {
    AnalysisConfig::from_file(&fixtures().join("synthetic/analysis.conf")).unwrap()
}

#[test]
fn report_is_deterministic_across_runs_and_modes() {
    let mut cfg = synthetic_config();
    let a = run_pipeline(&cfg).unwrap();
    let b = run_pipeline(&cfg).unwrap();
    assert_eq!(a.to_csv().unwrap(), b.to_csv().unwrap());
    assert_eq!(a.to_json(), b.to_json());
    cfg.mode = Mode::Sequential;
    let c = run_pipeline(&cfg).unwrap();
    assert_eq!(a.to_csv().unwrap(), c.to_csv().unwrap());
}

#[test]
fn report_has_every_table_in_country_order() {
    let report = run_pipeline(&synthetic_config()).unwrap();
    let names: Vec<&str> = report.tables.iter().map(|t| t.name.as_str()).collect();
    assert_eq!(
        names,
        [
            "series",
            "autocorrelation",
            "dickey_fuller",
            "models",
            "coefficients",
            "forecast",
            "trend",
            "correlations",
            "correlation_tests",
            "changepoints",
            "segments",
            "reachability",
            "drop_events",
            "errors"
        ]
    );
    let models = report.table("models").unwrap();
    let countries: Vec<&str> = models.values("country").iter().filter_map(|c| c.as_str()).collect();
    let mut order = countries.clone();
    order.dedup();
    assert_eq!(order, ["IN", "CN", "JP"]);
    // Exactly one selected model per country.
    for cc in ["IN", "CN", "JP"] {
        let selected = models
            .rows
            .iter()
            .filter(|r| r[0].as_str() == Some(cc) && r[models.column("selected").unwrap()] == Cell::Bool(true))
            .count();
        assert_eq!(selected, 1, "{cc}");
    }
    let fc = report.table("forecast").unwrap();
    assert_eq!(fc.rows.len(), 3 * 10);
    let drops = report.table("drop_events").unwrap();
    assert_eq!(drops.rows.len(), 1);
    assert_eq!(drops.rows[0][1], Cell::text("2013-01-03"));
}

#[test]
fn csv_cells_round_trip_through_json() {
    let report = run_pipeline(&synthetic_config()).unwrap();
    let json: Value = serde_json::from_str(&report.to_json()).unwrap();
    let csv = report.to_csv().unwrap();
    let blocks: Vec<&str> = csv.split("\n# ").collect();
    assert_eq!(blocks.len(), report.tables.len());
    let mut numeric = 0;
    for (ti, (table, block)) in report.tables.iter().zip(blocks).enumerate() {
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(block.split_once('\n').unwrap().1.as_bytes());
        let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
        assert_eq!(rows.len(), table.rows.len(), "{}", table.name);
        for (ri, (row, cells)) in rows.iter().zip(&table.rows).enumerate() {
            for (ci, cell) in cells.iter().enumerate() {
                let j = &json["tables"][ti]["rows"][ri][ci];
                match cell {
                    Cell::Real(v) if v.is_finite() => {
                        let jv = j.as_f64().unwrap();
                        assert!((jv - v).abs() <= 1e-9 * v.abs().max(1.0));
                        assert_eq!(format_sig(jv, 6), row[ci]);
                        let csv_v: f64 = row[ci].parse().unwrap();
                        assert!((csv_v - jv).abs() <= 5e-6 * jv.abs().max(1e-300));
                        numeric += 1;
                    }
                    Cell::Fixed(v, d) => {
                        assert_eq!(format_fixed(j.as_f64().unwrap(), *d), row[ci]);
                        assert_eq!(j.as_f64().unwrap(), *v);
                    }
                    Cell::Int(v) => assert_eq!(j.as_i64().unwrap(), *v),
                    _ => {}
                }
            }
        }
    }
    assert!(numeric > 500);
}

#[test]
fn holdout_longer_than_series_is_a_config_error() {
    let mut cfg = synthetic_config();
    cfg.train_len = 16;
    let err = run_pipeline(&cfg).unwrap_err();
    assert!(matches!(err, Error::Config(_)), "{err}");
    assert!(err.to_string().contains("exceeds the series length 19"));
}

#[test]
fn failing_country_leaves_others_intact() {
    let mut cfg = synthetic_config();
    cfg.countries.push("ZZ".into());
    let report = run_pipeline(&cfg).unwrap();
    let errors = report.table("errors").unwrap();
    assert!(errors.rows.iter().any(|r| r[0].as_str() == Some("ZZ") && r[1].as_str() == Some("series")));
    assert!(report.table("forecast").unwrap().rows.len() >= 30);
}

#[test]
fn reachability_ratio_rows() {
    let dir = fixtures().join("reachability");
    let cfg = AnalysisConfig::parse(
        "delegated = delegated-apnic.txt\nsnapshots = snapshots\ncountries = IN, CN\nregion = apnic\n",
        Some(&dir),
    )
    .unwrap();
    let inputs = asgrowth_core::report::load_inputs(&cfg).unwrap();
    let mut errors = asgrowth_core::report::error_table_header();
    let labels: Vec<String> = ["IN", "CN", "apnic"].iter().map(|s| s.to_string()).collect();
    let (reach, _) =
        asgrowth_core::report::reachability_tables(&labels, &inputs.records, &inputs.snapshots, 30.0, Mode::Sequential, &mut errors);
    let csv = reach.to_csv().unwrap();
    assert_eq!(
        csv,
        "label,date,registered,assigned,advertised,ratio,period_increase_pct\n\
         IN,2013-01-01,614,607,495,0.8,\n\
         CN,2013-01-01,551,551,220,0.4,\n\
         apnic,2013-01-01,8427,8420,5285,0.6,\n"
    );
    assert!(errors.rows.is_empty());
}

#[test]
fn json_output_format_from_config() {
    let mut cfg = synthetic_config();
    cfg.format = OutputFormat::Json;
    let text = run_pipeline(&cfg).unwrap().render(cfg.format).unwrap();
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["tables"].as_array().unwrap().len(), 14);
}

#[test]
fn strict_mode_rejects_malformed_lines() {
    let dir = tempdir();
    std::fs::write(dir.join("d.txt"), "apnic|IN|asn|1|1|20100101|allocated\nnot|a|record\n").unwrap();
    let mut cfg = AnalysisConfig::parse("delegated = d.txt\ncountries = IN\n", Some(&dir)).unwrap();
    let inputs = asgrowth_core::report::load_inputs(&cfg).unwrap();
    assert_eq!(inputs.records.len(), 1);
    assert_eq!(inputs.skipped.len(), 1);
    cfg.strict = true;
    let err = asgrowth_core::report::load_inputs(&cfg).unwrap_err();
    assert!(matches!(err.root(), Error::MalformedRecord { line: 2, .. }), "{err:?}");
}

fn tempdir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("asgrowth-core-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
