//! End-to-end behavior of the `mcp-risk` binary: exit codes, stage
//! composition, and flag handling.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn workspace() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn mcp_risk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mcp-risk"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path_arg(relative: &str) -> String {
    workspace().join(relative).to_string_lossy().into_owned()
}

fn run_args(out: &Path) -> Vec<String> {
    vec![
        "run".into(),
        "--cwe-xml".into(),
        path_arg("fixtures/catalogs/cwec_v4.19.1.xml"),
        "--capec-xml".into(),
        path_arg("fixtures/catalogs/capec_v3.9.xml"),
        "--findings-dir".into(),
        path_arg("fixtures/corpus"),
        "--joern-manifest".into(),
        path_arg("fixtures/corpus/joern_manifest.csv"),
        "--out".into(),
        out.to_string_lossy().into_owned(),
    ]
}

#[test]
fn run_produces_all_artifacts_and_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let args: Vec<String> = run_args(&out);
    let output = Command::new(env!("CARGO_BIN_EXE_mcp-risk")).args(&args).output().unwrap();
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    for artifact in [
        "risk_index.csv",
        "repo_scores.csv",
        "surface_shares.csv",
        "cooccurrence.csv",
        "band_distribution.csv",
        "skipped_findings.csv",
        "run_manifest.json",
    ] {
        assert!(out.join(artifact).is_file(), "{artifact} missing");
    }
}

#[test]
fn missing_catalog_path_is_config_error_with_no_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let output = mcp_risk(&[
        "run",
        "--cwe-xml",
        "/does/not/exist.xml",
        "--capec-xml",
        &path_arg("fixtures/catalogs/capec_v3.9.xml"),
        "--findings-dir",
        &path_arg("fixtures/corpus"),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2), "{}", String::from_utf8_lossy(&output.stderr));
    if out.exists() {
        assert_eq!(std::fs::read_dir(&out).unwrap().count(), 0, "artifacts written on failure");
    }
}

#[test]
fn malformed_catalog_is_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.xml");
    std::fs::write(&bad, "<Weakness_Catalog><oops").unwrap();
    let out = dir.path().join("out");
    let output = mcp_risk(&[
        "run",
        "--cwe-xml",
        bad.to_str().unwrap(),
        "--capec-xml",
        &path_arg("fixtures/catalogs/capec_v3.9.xml"),
        "--findings-dir",
        &path_arg("fixtures/corpus"),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(3), "{}", String::from_utf8_lossy(&output.stderr));
}

#[test]
fn corpus_without_scorable_findings_is_scoring_error() {
    let dir = tempfile::tempdir().unwrap();
    let findings = dir.path().join("findings/empty-repo");
    std::fs::create_dir_all(&findings).unwrap();
    std::fs::write(
        findings.join("scan.scan.json"),
        r#"{"findings":[{"category":"not-in-the-map","file":"a.py","detail":""}]}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let output = mcp_risk(&[
        "run",
        "--cwe-xml",
        &path_arg("fixtures/catalogs/cwec_v4.19.1.xml"),
        "--capec-xml",
        &path_arg("fixtures/catalogs/capec_v3.9.xml"),
        "--findings-dir",
        dir.path().join("findings").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(4), "{}", String::from_utf8_lossy(&output.stderr));
}

#[test]
fn staged_subcommands_compose_like_run() {
    let dir = tempfile::tempdir().unwrap();
    let run_out = dir.path().join("run");
    let staged = dir.path().join("staged");
    let args: Vec<String> = run_args(&run_out);
    assert!(Command::new(env!("CARGO_BIN_EXE_mcp-risk")).args(&args).status().unwrap().success());

    let catalog = mcp_risk(&[
        "catalog",
        "--cwe-xml",
        &path_arg("fixtures/catalogs/cwec_v4.19.1.xml"),
        "--capec-xml",
        &path_arg("fixtures/catalogs/capec_v3.9.xml"),
        "--out",
        staged.to_str().unwrap(),
    ]);
    assert!(catalog.status.success(), "{}", String::from_utf8_lossy(&catalog.stderr));

    let ingest = mcp_risk(&[
        "ingest",
        "--findings-dir",
        &path_arg("fixtures/corpus"),
        "--joern-manifest",
        &path_arg("fixtures/corpus/joern_manifest.csv"),
        "--out",
        staged.to_str().unwrap(),
    ]);
    assert!(ingest.status.success(), "{}", String::from_utf8_lossy(&ingest.stderr));

    let score = mcp_risk(&[
        "score",
        "--risk-index",
        staged.join("risk_index.csv").to_str().unwrap(),
        "--profiles",
        staged.join("profiles.json").to_str().unwrap(),
        "--out",
        staged.to_str().unwrap(),
    ]);
    assert!(score.status.success(), "{}", String::from_utf8_lossy(&score.stderr));

    let surfaces = mcp_risk(&[
        "surfaces",
        "--risk-index",
        staged.join("risk_index.csv").to_str().unwrap(),
        "--profiles",
        staged.join("profiles.json").to_str().unwrap(),
        "--out",
        staged.to_str().unwrap(),
    ]);
    assert!(surfaces.status.success(), "{}", String::from_utf8_lossy(&surfaces.stderr));

    for table in ["risk_index.csv", "repo_scores.csv", "surface_shares.csv", "cooccurrence.csv"] {
        let from_run = std::fs::read_to_string(run_out.join(table)).unwrap();
        let from_stages = std::fs::read_to_string(staged.join(table)).unwrap();
        assert_eq!(from_run, from_stages, "{table} differs between run and staged execution");
    }
}

#[test]
fn deleting_one_artifact_and_rerunning_regenerates_it_identically() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let args: Vec<String> = run_args(&out);
    assert!(Command::new(env!("CARGO_BIN_EXE_mcp-risk")).args(&args).status().unwrap().success());
    let original = std::fs::read(out.join("repo_scores.csv")).unwrap();
    std::fs::remove_file(out.join("repo_scores.csv")).unwrap();
    assert!(Command::new(env!("CARGO_BIN_EXE_mcp-risk")).args(&args).status().unwrap().success());
    assert_eq!(std::fs::read(out.join("repo_scores.csv")).unwrap(), original);
}

#[test]
fn cwe_level_dedup_caps_frequencies_at_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let mut args: Vec<String> = run_args(&out);
    args.push("--dedup".into());
    args.push("cwe-level".into());
    let output = Command::new(env!("CARGO_BIN_EXE_mcp-risk")).args(&args).output().unwrap();
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));

    let profiles = std::fs::read_to_string(out.join("profiles.json")).unwrap();
    let docs: serde_json::Value = serde_json::from_str(&profiles).unwrap();
    for doc in docs.as_array().unwrap() {
        for entry in doc["frequencies"].as_array().unwrap() {
            assert_eq!(entry["count"], 1, "cwe-level mode must cap counts at 1");
        }
    }
}

#[test]
fn config_file_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    let flag_out = dir.path().join("flag-out");
    let config_out = dir.path().join("config-out");
    let config_path = dir.path().join("run.toml");
    std::fs::write(
        &config_path,
        format!("out = {:?}\n", config_out.to_str().unwrap()),
    )
    .unwrap();

    let mut args: Vec<String> = run_args(&flag_out);
    args.push("--config".into());
    args.push(config_path.to_string_lossy().into_owned());
    let output = Command::new(env!("CARGO_BIN_EXE_mcp-risk")).args(&args).output().unwrap();
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    assert!(config_out.join("run_manifest.json").is_file());
    assert!(!flag_out.exists());
}

#[test]
fn report_requires_scored_repositories() {
    let dir = tempfile::tempdir().unwrap();
    let output = mcp_risk(&["report", "--in", dir.path().to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn report_rejects_unknown_format() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let args: Vec<String> = run_args(&out);
    assert!(Command::new(env!("CARGO_BIN_EXE_mcp-risk")).args(&args).status().unwrap().success());
    let output =
        mcp_risk(&["report", "--in", out.to_str().unwrap(), "--format", "parquet"]);
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("unknown report format"), "stderr: {stderr}");
}

#[test]
fn report_emits_figure_files_and_charts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let args: Vec<String> = run_args(&out);
    assert!(Command::new(env!("CARGO_BIN_EXE_mcp-risk")).args(&args).status().unwrap().success());

    let output = mcp_risk(&["report", "--in", out.to_str().unwrap(), "--render"]);
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let report = out.join("report");
    for name in [
        "cwe_frequency.csv",
        "repo_scatter.csv",
        "surface_shares.csv",
        "band_distribution.csv",
        "cooccurrence_matrix.csv",
    ] {
        assert!(report.join(name).is_file(), "{name} missing");
    }
    for name in [
        "cwe_frequency.svg",
        "repo_scatter.svg",
        "surface_shares.svg",
        "band_distribution.svg",
        "cooccurrence_heatmap.svg",
    ] {
        assert!(report.join("charts").join(name).is_file(), "{name} missing");
    }

    // rerunning report and charts is byte-identical
    let before = std::fs::read(report.join("charts/cooccurrence_heatmap.svg")).unwrap();
    assert!(mcp_risk(&["report", "--in", out.to_str().unwrap(), "--render"]).status.success());
    let after = std::fs::read(report.join("charts/cooccurrence_heatmap.svg")).unwrap();
    assert_eq!(before, after);

    // json format emits json documents
    let json_out = dir.path().join("report-json");
    let output = mcp_risk(&[
        "report",
        "--in",
        out.to_str().unwrap(),
        "--out",
        json_out.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert!(output.status.success());
    assert!(json_out.join("cwe_frequency.json").is_file());
}

#[test]
fn band_distribution_has_no_zero_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let args: Vec<String> = run_args(&out);
    assert!(Command::new(env!("CARGO_BIN_EXE_mcp-risk")).args(&args).status().unwrap().success());
    let table = std::fs::read_to_string(out.join("band_distribution.csv")).unwrap();
    // the bundled corpus yields exactly one repository per band
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(
        lines,
        vec!["band,count", "VeryLow,1", "Low,1", "Medium,1", "High,1", "VeryHigh,1"]
    );
}

#[test]
fn harvest_replay_writes_snapshot_and_exclusion_log() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("snapshot.json");
    let exclusions = dir.path().join("exclusions.csv");
    let output = mcp_risk(&[
        "harvest",
        "--fixture-dir",
        &path_arg("fixtures/harvest/pages"),
        "--snapshot-time",
        "2026-01-05T00:00:00Z",
        "--out",
        manifest.to_str().unwrap(),
        "--exclusions-out",
        exclusions.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));

    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&manifest).unwrap()).unwrap();
    let repos = doc["repos"].as_array().unwrap();
    assert_eq!(repos.len(), 4);
    let stars: Vec<u64> = repos.iter().map(|r| r["stars"].as_u64().unwrap()).collect();
    assert_eq!(stars, vec![38167, 9120, 740, 101]);
    assert!(exclusions.is_file());

    // identical replay produces an identical manifest
    let manifest_2 = dir.path().join("snapshot2.json");
    assert!(mcp_risk(&[
        "harvest",
        "--fixture-dir",
        &path_arg("fixtures/harvest/pages"),
        "--snapshot-time",
        "2026-01-05T00:00:00Z",
        "--out",
        manifest_2.to_str().unwrap(),
    ])
    .status
    .success());
    assert_eq!(
        std::fs::read(&manifest).unwrap(),
        std::fs::read(&manifest_2).unwrap()
    );
}

#[test]
fn harvest_without_source_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let output = mcp_risk(&[
        "harvest",
        "--out",
        dir.path().join("m.json").to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2));
}
