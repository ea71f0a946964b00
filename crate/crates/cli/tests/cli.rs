use std::path::{Path, PathBuf};
use std::process::Command;

use opalg_cli::builtins::list_builtins;
use opalg_cli::scenario::{Flags, Scenario, Settings, ToleranceOverrides};
use opalg_cli::{run_builtin, run_file, verify_all, CliError, Status};

fn scenarios_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn opalg(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_opalg"))
        .args(args)
        .env_remove("OPALG_SEED")
        .output()
        .expect("binary runs")
}

#[test]
fn registry_lists_section6_and_at_least_ten_entries() {
    let names: Vec<_> = list_builtins().iter().map(|b| b.name).collect();
    assert!(names.contains(&"section6"));
    assert!(names.len() >= 10);
    let out = opalg(&["list"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).lines().count() >= 10);
}

#[test]
fn section6_reports_quarter() {
    let r = run_builtin("section6", None, &Flags::default()).unwrap();
    assert_eq!(r.status, Status::Pass);
    assert_eq!(r.metric("quotient_commutator_norm").unwrap().as_f64().unwrap(), 0.25);
}

#[test]
fn popescu_certificate_passes() {
    let r = run_builtin("popescu-d2", None, &Flags::default()).unwrap();
    assert_eq!(r.status, Status::Pass, "{:?}", r.checks);
    assert!(r.metric("row_defect_min_eigenvalue").unwrap().as_f64().unwrap() >= -1e-12);
}

#[test]
fn malformed_scenario_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        "{\n  \"name\": \"bad\",\n  \"kind\": \"norm\",\n  \"payload\": [1, 2\n",
    )
    .unwrap();
    match run_file(&path, None, &Flags::default()) {
        Err(CliError::Parse { line, .. }) => assert!(line >= 4),
        other => panic!("expected a parse error, got {other:?}"),
    }
    let out = opalg(&["run", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));
}

#[test]
fn unknown_fields_and_kinds_are_rejected() {
    let base = Path::new(".");
    let extra = r#"{"name": "x", "kind": "norm", "payload": {}, "colour": 1}"#;
    assert!(matches!(Scenario::parse(extra, "x", base), Err(CliError::Parse { .. })));
    let kind = r#"{"name": "x", "kind": "spectrum"}"#;
    assert!(matches!(Scenario::parse(kind, "x", base), Err(CliError::Parse { .. })));
    let tol = r#"{"name": "x", "kind": "norm", "tolerances": {"norm_tol": 1e-6, "speed": 2}}"#;
    assert!(matches!(Scenario::parse(tol, "x", base), Err(CliError::Parse { .. })));
    let schema = r#"{"schema": "other/9", "name": "x", "kind": "norm"}"#;
    assert!(matches!(
        Scenario::parse(schema, "x", base),
        Err(CliError::Validation(_))
    ));
}

#[test]
fn payload_errors_are_validation_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ragged.json");
    std::fs::write(
        &path,
        r#"{"name": "r", "kind": "norm", "payload": {"matrix": [[1, 2], [3]]}}"#,
    )
    .unwrap();
    assert!(matches!(
        run_file(&path, None, &Flags::default()),
        Err(CliError::Validation(_))
    ));
    let out = opalg(&["run", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));

    let path = dir.path().join("graph.json");
    std::fs::write(
        &path,
        r#"{"name": "g", "kind": "subgraph", "payload": {"graph": "absent.graph", "vertices": ["u"], "cutoff": 2}}"#,
    )
    .unwrap();
    assert!(matches!(
        run_file(&path, None, &Flags::default()),
        Err(CliError::Io { .. })
    ));
}

#[test]
fn compute_errors_carry_module_context() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("outside.json");
    std::fs::write(
        &path,
        r#"{"name": "o", "kind": "compress", "payload": {
            "generators": [[[0, 1], [0, 0]]], "matrix": [[0, 0], [1, 0]]}}"#,
    )
    .unwrap();
    match run_file(&path, None, &Flags::default()) {
        Err(e @ CliError::Compute { .. }) => {
            assert_eq!(e.exit_code(), 4);
            assert!(e.to_string().contains("compress"));
        }
        other => panic!("expected a compute error, got {other:?}"),
    }
}

#[test]
fn seed_precedence() {
    let none = ToleranceOverrides::default();
    let scenario = ToleranceOverrides {
        rng_seed: Some(3),
        ..Default::default()
    };
    let flag = Flags {
        seed: Some(4),
        ..Default::default()
    };
    assert_eq!(
        Settings::resolve(None, &none, &Flags::default()).unwrap().cfg.rng_seed,
        0
    );
    assert_eq!(
        Settings::resolve(Some(2), &none, &Flags::default())
            .unwrap()
            .cfg
            .rng_seed,
        2
    );
    assert_eq!(
        Settings::resolve(Some(2), &scenario, &Flags::default())
            .unwrap()
            .cfg
            .rng_seed,
        3
    );
    assert_eq!(Settings::resolve(Some(2), &scenario, &flag).unwrap().cfg.rng_seed, 4);
    let bad = Flags {
        tol_norm: Some(-1.0),
        ..Default::default()
    };
    assert!(matches!(
        Settings::resolve(None, &none, &bad),
        Err(CliError::Validation(_))
    ));

    let out = Command::new(env!("CARGO_BIN_EXE_opalg"))
        .args(["run", scenarios_dir().join("section6.json").to_str().unwrap()])
        .env("OPALG_SEED", "17")
        .output()
        .unwrap();
    assert!(String::from_utf8_lossy(&out.stdout).contains("\"seed\": 17"));
}

#[test]
fn example_scenarios_pass() {
    let mut count = 0;
    for entry in std::fs::read_dir(scenarios_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            let r = run_file(&path, None, &Flags::default()).unwrap();
            assert_eq!(
                r.status,
                Status::Pass,
                "{}: {:?}",
                path.display(),
                r.failed_checks().collect::<Vec<_>>()
            );
            count += 1;
        }
    }
    assert!(count >= 10);
}

#[test]
fn artifacts_only_on_request() {
    let path = scenarios_dir().join("compress-triangular.json");
    let plain = run_file(&path, None, &Flags::default()).unwrap();
    assert!(plain.artifacts.is_empty());
    assert!(!plain.to_json().contains("artifacts"));
    let emit = Flags {
        emit_matrices: true,
        ..Default::default()
    };
    let full = run_file(&path, None, &emit).unwrap();
    assert!(full.artifacts.contains_key("subspace_basis"));
}

#[test]
fn report_field_order_is_stable() {
    let r = run_builtin("section6", None, &Flags::default()).unwrap();
    let json = r.to_json();
    let keys = [
        "\"schema\"",
        "\"scenario\"",
        "\"kind\"",
        "\"status\"",
        "\"metrics\"",
        "\"checks\"",
        "\"flags\"",
        "\"provenance\"",
    ];
    let positions: Vec<usize> = keys.iter().map(|k| json.find(k).unwrap()).collect();
    assert!(positions.windows(2).all(|w| w[0] < w[1]));
    assert!(json.contains("\"schema\": \"opalg-report/1\""));
}

#[test]
fn parameterized_builtin_names() {
    let r = run_builtin("fdoa-roots-3", None, &Flags::default()).unwrap();
    assert_eq!(r.status, Status::Pass);
    assert!(matches!(
        run_builtin("fdoa-roots-x", None, &Flags::default()),
        Err(CliError::Validation(_))
    ));
    assert!(matches!(
        run_builtin("no-such-suite", None, &Flags::default()),
        Err(CliError::Validation(_))
    ));
}

#[test]
fn every_builtin_passes_under_default_config() {
    let reports = verify_all(None, &Flags::default(), 4).unwrap();
    assert!(reports.len() >= 10);
    for r in &reports {
        assert_ne!(
            r.status,
            Status::Fail,
            "{}: {:?}",
            r.scenario,
            r.failed_checks().collect::<Vec<_>>()
        );
    }
}

#[test]
fn verify_all_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_opalg"))
        .args(["verify-all", "--parallel", "4", "--out", dir.path().to_str().unwrap()])
        .env_remove("OPALG_SEED")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("section6.json").exists());
    assert!(dir.path().join("fdoa-roots-6.json").exists());
}
