//! Command-line behavior: exit codes, error messages, and the synth →
//! ingest → measure flow through the real binary.

use std::path::PathBuf;
use std::process::Output;

fn matilda(args: &[&str]) -> Output {
    std::process::Command::new(env!("CARGO_BIN_EXE_matilda"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("matilda_cli_{tag}_{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn help_exits_zero() {
    let out = matilda(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("ingest"));
    assert!(text.contains("synth"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(matilda(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(matilda(&["ingest", "--no-such-flag"]).status.code(), Some(1));
    // Malformed year range and out-of-range t_e are usage errors too.
    assert_eq!(matilda(&["ingest", "--cohorts", "1970-2000"]).status.code(), Some(1));
    assert_eq!(matilda(&["ingest", "--te", "0"]).status.code(), Some(1));
}

#[test]
fn missing_inputs_exit_two_with_message() {
    let dir = temp_dir("missing");
    let out_str = dir.to_string_lossy().into_owned();

    let out = matilda(&["ingest", "--out", &out_str]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--input"));

    let out = matilda(&["inequality", "--out", &out_str]);
    assert_eq!(out.status.code(), Some(2));
    assert!(
        String::from_utf8_lossy(&out.stderr).contains("corpus snapshot not found"),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn malformed_input_file_exits_two() {
    let dir = temp_dir("badinput");
    let out_str = dir.to_string_lossy().into_owned();
    let bad = dir.join("pubs.jsonl");
    // Two records with the same id but different years: a data conflict.
    std::fs::write(
        &bad,
        concat!(
            r#"{"pub_id":"p1","title":"A","year":1990,"source_id":"v","authors":[{"author_id":"a","name":"A"}]}"#,
            "\n",
            r#"{"pub_id":"p1","title":"A","year":1991,"source_id":"v","authors":[{"author_id":"a","name":"A"}]}"#,
        ),
    )
    .unwrap();
    let bad_str = bad.to_string_lossy().into_owned();
    let out = matilda(&["ingest", "--input", &bad_str, "--out", &out_str]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("conflicting"));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn synth_then_stages_produce_expected_files() {
    let dir = temp_dir("flow");
    let out_str = dir.to_string_lossy().into_owned();
    let params = matilda::synth::SynthParams {
        seed: 11,
        cohort_years: (1970, 1971),
        first_cohort_size: 90,
        field_authors: 50,
        ..matilda::synth::paper_shaped_scenario()
    };
    let params_path = dir.join("params.json");
    std::fs::write(&params_path, serde_json::to_string(&params).unwrap()).unwrap();
    let params_str = params_path.to_string_lossy().into_owned();

    let out = matilda(&["synth", "--out", &out_str, "--params", &params_str]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["publications.jsonl", "citations.csv", "genders.csv"] {
        assert!(dir.join(name).exists(), "missing {name}");
    }

    let pubs = dir.join("publications.jsonl").to_string_lossy().into_owned();
    let cites = dir.join("citations.csv").to_string_lossy().into_owned();
    let genders = dir.join("genders.csv").to_string_lossy().into_owned();
    let out = matilda(&[
        "ingest",
        "--input",
        &pubs,
        "--citations",
        &cites,
        "--genders",
        &genders,
        "--cohorts",
        "1970:1971",
        "--out",
        &out_str,
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.join("corpus.json").exists());
    assert!(dir.join("reports/ingest.json").exists());

    // Individual downstream stages run off the snapshot.
    for stage in ["describe", "inequality", "gender", "matthew", "features", "predict"] {
        let out = matilda(&[stage, "--cohorts", "1970:1971", "--out", &out_str]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{stage}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    for artifact in [
        "reports/descriptives.json",
        "data/gini/gini_impact_window3_first_stayers.csv",
        "data/gender/grid_productivity_every_all.csv",
        "data/matthew/productivity_by_cohort.csv",
        "data/features.csv",
        "data/source_index.csv",
        "reports/success_social_support_stayers.json",
        "manifest.json",
    ] {
        assert!(dir.join(artifact).exists(), "missing {artifact}");
    }

    // Emitted artifacts parse back through their documented schemas.
    let manifest: matilda::pipeline::Manifest =
        serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap())
            .unwrap();
    assert!(!manifest.artifacts.is_empty());
    let _descriptives: matilda::careers::FieldDescriptives = serde_json::from_str(
        &std::fs::read_to_string(dir.join("reports/descriptives.json")).unwrap(),
    )
    .unwrap();
    let report: matilda::predict::RegressionReport = serde_json::from_str(
        &std::fs::read_to_string(dir.join("reports/dropout_social_support.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(report.folds_evaluated + report.folds_skipped, 10);
    let mut grid = csv::Reader::from_path(dir.join("data/gender/grid_impact_every_all.csv"))
        .unwrap();
    assert_eq!(grid.headers().unwrap().len(), 8);
    assert!(grid.records().all(|r| r.unwrap().len() == 8));

    // A config change without re-ingesting is refused as stale.
    let out = matilda(&["describe", "--cohorts", "1970:1971", "--te", "5", "--out", &out_str]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("different configuration"));

    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn env_var_sets_default_output_root() {
    let dir = temp_dir("envout");
    let params = matilda::synth::SynthParams {
        seed: 17,
        cohort_years: (1970, 1970),
        first_cohort_size: 40,
        field_authors: 30,
        ..matilda::synth::paper_shaped_scenario()
    };
    let params_path = dir.join("params.json");
    std::fs::write(&params_path, serde_json::to_string(&params).unwrap()).unwrap();
    let params_str = params_path.to_string_lossy().into_owned();
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_matilda"))
        .args(["synth", "--params", &params_str])
        .env("MATILDA_OUT", &dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.join("publications.jsonl").exists());
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn config_file_with_flag_overrides() {
    let dir = temp_dir("config");
    let out_str = dir.to_string_lossy().into_owned();
    let params = matilda::synth::SynthParams {
        seed: 13,
        cohort_years: (1970, 1971),
        first_cohort_size: 60,
        field_authors: 40,
        ..matilda::synth::paper_shaped_scenario()
    };
    let params_path = dir.join("params.json");
    std::fs::write(&params_path, serde_json::to_string(&params).unwrap()).unwrap();
    let params_str = params_path.to_string_lossy().into_owned();
    assert_eq!(
        matilda(&["synth", "--out", &out_str, "--params", &params_str]).status.code(),
        Some(0)
    );

    // Config file points at the generated inputs; the flag overrides the
    // cohort range it names.
    let config = serde_json::json!({
        "input": dir.join("publications.jsonl"),
        "citations": dir.join("citations.csv"),
        "genders": dir.join("genders.csv"),
        "cohorts": [1900, 1901],
        "out": dir,
    });
    let config_path = dir.join("run.json");
    std::fs::write(&config_path, serde_json::to_string(&config).unwrap()).unwrap();
    let config_str = config_path.to_string_lossy().into_owned();

    // The file's cohort range is invalid for this corpus; the flag wins.
    let out = matilda(&["ingest", "--config", &config_str, "--cohorts", "1970:1971"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out = matilda(&["describe", "--config", &config_str, "--cohorts", "1970:1971"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let _ = std::fs::remove_dir_all(&dir);
}
