//! End-to-end harness tests: determinism of reports, preset correctness,
//! zero-input degeneracy, and serialization round trips.

use radonlab_cli::config::Config;
use radonlab_cli::experiments::{
    self, gauss_table, multiplier_scan, probe_oscillation, split_check, verify_kernel, CliError,
    RunContext,
};
use radonlab_cli::report::{OutputFormat, Report};

fn ctx(seed: u64) -> RunContext {
    RunContext {
        seed,
        budget_cells: 50_000_000,
        threads: 1,
    }
}

#[test]
fn csv_is_byte_identical_across_runs() {
    let cfg = Config::parse("preset = cubic-hilbert\npairs = 9\n").unwrap();
    let a = multiplier_scan(&cfg, &ctx(7)).unwrap();
    let b = multiplier_scan(&cfg, &ctx(7)).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
    assert!(!a.to_csv().is_empty());

    let cfg = Config::parse("families = 50\n").unwrap();
    let a = split_check(&cfg, &ctx(3)).unwrap();
    let b = split_check(&cfg, &ctx(3)).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
}

#[test]
fn cubic_hilbert_preset_passes() {
    let cfg = Config::parse("preset = cubic-hilbert\n").unwrap();
    let report = multiplier_scan(&cfg, &ctx(0)).unwrap();
    assert!(report.passed);
    assert!(report.complete);
    // both statistics present
    assert!(report.rows.iter().any(|r| r.statistic == "integer_freq_abs"));
    assert!(report.rows.iter().any(|r| r.statistic == "psi_closed_form_err"));
}

#[test]
fn unknown_preset_is_usage_error() {
    let cfg = Config::parse("preset = quartic\n").unwrap();
    match multiplier_scan(&cfg, &ctx(0)) {
        Err(CliError::Usage(msg)) => assert!(msg.contains("preset")),
        other => panic!("expected usage error, got {:?}", other.map(|r| r.passed)),
    }
}

#[test]
fn unknown_kernel_is_usage_error() {
    let cfg = Config::parse("kernel = cauchy\n").unwrap();
    match verify_kernel(&cfg, &ctx(0)) {
        Err(CliError::Usage(msg)) => assert!(msg.contains("kernel")),
        other => panic!("expected usage error, got {:?}", other.map(|r| r.passed)),
    }
}

#[test]
fn zero_input_gives_zero_oscillation() {
    let cfg = Config::parse("m_list = 16\nt_count = 16\nrestarts = 5\nzero_input = 1\n").unwrap();
    let report = probe_oscillation(&cfg, &ctx(0)).unwrap();
    assert!(report.passed);
    for row in report.rows.iter().filter(|r| r.statistic == "zero_input_ratio") {
        assert_eq!(row.value, 0.0);
    }
    assert!(report.rows.iter().any(|r| r.statistic == "zero_input_ratio"));
}

#[test]
fn gauss_table_small_run_passes_and_round_trips() {
    let cfg = Config::parse("q_max = 31\n").unwrap();
    let report = gauss_table(&cfg, &ctx(0)).unwrap();
    assert!(report.passed);

    let dir = tempfile::tempdir().unwrap();
    let path = report.emit(dir.path(), OutputFormat::Json).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let back = Report::from_json(&text).unwrap();
    assert_eq!(back.schema_version, report.schema_version);
    assert_eq!(back.experiment, report.experiment);
    assert_eq!(back.config, report.config);
    assert_eq!(back.passed, report.passed);
    assert_eq!(back.complete, report.complete);
    assert_eq!(back.rows.len(), report.rows.len());
    for (a, b) in report.rows.iter().zip(&back.rows) {
        assert_eq!(a.statistic, b.statistic);
        assert_eq!(a.pass, b.pass);
        // the JSON float formatter may drop the last ulp
        assert!((a.value - b.value).abs() <= 1e-15 * a.value.abs().max(1.0));
        assert!((a.tolerance - b.tolerance).abs() <= 1e-15 * a.tolerance.abs().max(1.0));
    }

    let csv_path = report.emit(dir.path(), OutputFormat::Csv).unwrap();
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    assert!(csv.starts_with("experiment,scale,p,n,statistic,value,tolerance,pass\n"));
    assert_eq!(csv.lines().count(), report.rows.len() + 1);
}

#[test]
fn config_echo_covers_known_keys() {
    let cfg = Config::parse("q_max = 31\n").unwrap();
    let report = gauss_table(&cfg, &ctx(5)).unwrap();
    for key in experiments::known_keys("gauss-table") {
        assert!(report.config.contains_key(*key), "missing echo of {}", key);
    }
    assert_eq!(report.config.get("seed").unwrap(), "5");
}
