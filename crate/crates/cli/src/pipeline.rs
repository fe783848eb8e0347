//! The four-stage pipeline: catalog preparation, finding ingestion,
//! repository scoring, and threat-surface analytics, with all artifacts
//! written at the end so a failed run leaves nothing behind.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use mcp_risk_core::catalog::{
    apply_manual_overrides, build_pairs, catalog_stats, compute_cwe_risk_index,
    parse_capec_catalog, parse_cwe_catalog, risk_indices, CatalogError, CatalogStats, CweRiskEntry,
    OverrideTable, RiskIndices,
};
use mcp_risk_core::findings::{
    normalize_and_dedup, parse_joern_results, parse_sarif, parse_scanner_output, CategoryMap,
    QueryManifest, RawFinding, RepoFindingProfile,
};
use mcp_risk_core::scoring::{normalize_scores, score_repo, RepoScore};
use mcp_risk_core::surfaces::{cooccurrence, surface_shares, CooccurrenceMatrix, SurfaceMap, SurfaceShares};
use mcp_risk_core::tables;

use crate::config::PipelineConfig;
use crate::errors::{CliError, CliResult};
use crate::report;

pub struct CatalogOutputs {
    pub entries: BTreeMap<u32, CweRiskEntry>,
    pub names: BTreeMap<u32, String>,
    pub stats: CatalogStats,
    pub cwe_version: String,
    pub capec_version: String,
    pub discard_summary: BTreeMap<&'static str, usize>,
}

/// Parses both catalogs, applies overrides, and computes risk entries and
/// statistics.
pub fn load_catalog(
    cwe_xml: &Path,
    capec_xml: &Path,
    overrides_path: Option<&Path>,
) -> CliResult<CatalogOutputs> {
    let cwe_bytes = std::fs::read(cwe_xml)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", cwe_xml.display())))?;
    let capec_bytes = std::fs::read(capec_xml)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", capec_xml.display())))?;
    let cwe = parse_cwe_catalog(&cwe_bytes)
        .map_err(|e| CliError::parse(format!("{}: {e}", cwe_xml.display())))?;
    let capec = parse_capec_catalog(&capec_bytes)
        .map_err(|e| CliError::parse(format!("{}: {e}", capec_xml.display())))?;

    let overrides = match overrides_path {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
            OverrideTable::parse_csv(&text)
                .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?
        }
        None => OverrideTable::builtin(),
    };

    let stats = catalog_stats(&cwe.weaknesses, &capec.patterns);
    let outcome = build_pairs(&cwe.weaknesses, &capec.patterns);
    let mut discard_summary: BTreeMap<&'static str, usize> = BTreeMap::new();
    for discard in &outcome.discards {
        *discard_summary.entry(discard.reason.label()).or_insert(0) += 1;
    }
    let pairs =
        apply_manual_overrides(outcome.pairs, &overrides, &cwe.weaknesses, &capec.patterns)
            .map_err(|e| match e {
                CatalogError::OverrideUnknownCwe { .. }
                | CatalogError::OverrideUnresolved { .. } => CliError::config(e),
                other => CliError::parse(other),
            })?;
    let entries = compute_cwe_risk_index(&pairs).map_err(CliError::scoring)?;
    let names = cwe.weaknesses.iter().map(|w| (w.cwe_id, w.name.clone())).collect();

    Ok(CatalogOutputs {
        entries,
        names,
        stats,
        cwe_version: cwe.version,
        capec_version: capec.version,
        discard_summary,
    })
}

pub struct IngestOutputs {
    pub profiles: BTreeMap<String, RepoFindingProfile>,
    /// Parser-stage skip reasons per repository (records that never became
    /// findings), merged into the skipped tally artifact.
    pub parse_skips: BTreeMap<String, BTreeMap<String, u64>>,
}

/// Walks `findings_dir` (one subdirectory per repository) and ingests every
/// recognized analyzer file: `*.sarif`/`*.sarif.json`, `*.jsonl` (Joern),
/// `*.scan.json` (MCP scanner).
pub fn ingest_findings(
    findings_dir: &Path,
    manifest: &QueryManifest,
    categories: &CategoryMap,
    dedup: mcp_risk_core::findings::DedupMode,
) -> CliResult<IngestOutputs> {
    let mut repo_dirs: Vec<PathBuf> = std::fs::read_dir(findings_dir)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", findings_dir.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|path| path.is_dir())
        .collect();
    repo_dirs.sort();

    let mut findings: Vec<RawFinding> = Vec::new();
    let mut parse_skips: BTreeMap<String, BTreeMap<String, u64>> = BTreeMap::new();
    let mut repo_ids = Vec::new();

    for repo_dir in &repo_dirs {
        let repo_id = repo_dir
            .file_name()
            .and_then(|n| n.to_str())
            .ok_or_else(|| CliError::config(format!("bad repo directory {}", repo_dir.display())))?
            .to_string();
        repo_ids.push(repo_id.clone());

        let mut files: Vec<PathBuf> = std::fs::read_dir(repo_dir)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", repo_dir.display())))?
            .filter_map(|entry| entry.ok().map(|e| e.path()))
            .filter(|path| path.is_file())
            .collect();
        files.sort();

        for file in files {
            let name = file.file_name().and_then(|n| n.to_str()).unwrap_or_default();
            let bytes = std::fs::read(&file)
                .map_err(|e| CliError::config(format!("cannot read {}: {e}", file.display())))?;
            let parsed = if name.ends_with(".sarif") || name.ends_with(".sarif.json") {
                parse_sarif(&bytes, &repo_id)
            } else if name.ends_with(".scan.json") {
                parse_scanner_output(&bytes, categories, &repo_id)
            } else if name.ends_with(".jsonl") {
                parse_joern_results(&bytes, manifest, &repo_id)
            } else {
                continue;
            }
            .map_err(|e| CliError::parse(format!("{}: {e}", file.display())))?;

            findings.extend(parsed.findings);
            let repo_skips = parse_skips.entry(repo_id.clone()).or_default();
            for (reason, count) in parsed.skipped.reasons {
                // findings with an unresolved CWE flow into the profile's own
                // skipped counter during dedup; only count records that never
                // became findings
                if reason == "no_cwe" {
                    continue;
                }
                *repo_skips.entry(reason).or_insert(0) += count;
            }
        }
    }

    let mut profiles = normalize_and_dedup(&findings, dedup);
    for repo_id in repo_ids {
        profiles.entry(repo_id.clone()).or_insert_with(|| RepoFindingProfile {
            repo_id,
            ..RepoFindingProfile::default()
        });
    }
    Ok(IngestOutputs { profiles, parse_skips })
}

/// Moves findings on CWEs without a risk index out of the profiles and
/// into the skip tally under `unscorable_cwe`.
pub fn drop_unscorable(
    profiles: &mut BTreeMap<String, RepoFindingProfile>,
    indices: &RiskIndices,
    parse_skips: &mut BTreeMap<String, BTreeMap<String, u64>>,
) {
    for profile in profiles.values_mut() {
        let unscorable: Vec<u32> = profile
            .frequencies
            .keys()
            .filter(|cwe| !indices.contains_key(cwe))
            .copied()
            .collect();
        for cwe in unscorable {
            let count = profile.frequencies.remove(&cwe).unwrap_or(0);
            profile.total -= count;
            profile.provenance.remove(&cwe);
            *parse_skips
                .entry(profile.repo_id.clone())
                .or_default()
                .entry("unscorable_cwe".to_string())
                .or_insert(0) += u64::from(count);
        }
    }
}

pub struct ScoringOutputs {
    pub scores: Vec<RepoScore>,
    pub unscored: Vec<String>,
}

/// Scores every repository with findings and normalizes over the corpus;
/// repositories without scorable findings are reported as unscored.
pub fn score_corpus(
    profiles: &BTreeMap<String, RepoFindingProfile>,
    indices: &RiskIndices,
) -> CliResult<ScoringOutputs> {
    let mut metrics = Vec::new();
    let mut unscored = Vec::new();
    for profile in profiles.values() {
        if profile.total == 0 {
            unscored.push(profile.repo_id.clone());
        } else {
            metrics.push(score_repo(profile, indices).map_err(CliError::scoring)?);
        }
    }
    if metrics.is_empty() {
        return Err(CliError::scoring("no scored repositories"));
    }
    let scores = normalize_scores(metrics).map_err(CliError::scoring)?;
    Ok(ScoringOutputs { scores, unscored })
}

pub struct PipelineOutputs {
    pub catalog: CatalogOutputs,
    pub profiles: BTreeMap<String, RepoFindingProfile>,
    pub parse_skips: BTreeMap<String, BTreeMap<String, u64>>,
    pub scores: Vec<RepoScore>,
    pub unscored: Vec<String>,
    pub shares: SurfaceShares,
    pub matrix: CooccurrenceMatrix,
}

/// Runs catalog -> findings -> scoring -> surfaces and writes every
/// artifact into `config.out`. Nothing is written until all stages
/// succeed; a failure while writing removes the partial outputs.
pub fn run_pipeline(config: &PipelineConfig) -> CliResult<PipelineOutputs> {
    config.validate()?;

    let catalog =
        load_catalog(&config.cwe_xml, &config.capec_xml, config.overrides.as_deref())?;
    let indices = risk_indices(&catalog.entries);

    let manifest = match &config.joern_manifest {
        Some(path) => load_query_manifest(path)?,
        None => QueryManifest::builtin(),
    };
    let categories = match &config.scanner_map {
        Some(path) => load_category_map(path)?,
        None => CategoryMap::builtin(),
    };
    let surface_map = match &config.surface_map {
        Some(path) => load_surface_map(path)?,
        None => SurfaceMap::builtin(),
    };

    let IngestOutputs { mut profiles, mut parse_skips } =
        ingest_findings(&config.findings_dir, &manifest, &categories, config.dedup)?;
    drop_unscorable(&mut profiles, &indices, &mut parse_skips);

    let ScoringOutputs { scores, unscored } = score_corpus(&profiles, &indices)?;
    let shares = surface_shares(&profiles, &indices, &surface_map).map_err(CliError::scoring)?;
    let matrix = cooccurrence(&profiles, &surface_map);

    let outputs = PipelineOutputs {
        catalog,
        profiles,
        parse_skips,
        scores,
        unscored,
        shares,
        matrix,
    };
    write_artifacts(config, &outputs)?;

    if config.render {
        let report_dir = config.out.join("report");
        report::emit_report(&config.out, &report_dir, report::ReportFormat::Csv)?;
        crate::charts::render_charts(&report_dir, &config.out.join("charts"))?;
    }
    Ok(outputs)
}

pub fn load_query_manifest(path: &Path) -> CliResult<QueryManifest> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    QueryManifest::parse_csv(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

pub fn load_category_map(path: &Path) -> CliResult<CategoryMap> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    CategoryMap::parse_csv(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

pub fn load_surface_map(path: &Path) -> CliResult<SurfaceMap> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    SurfaceMap::parse_csv(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

/// Writes a set of files, removing everything written so far if any write
/// fails.
pub fn write_all(files: Vec<(PathBuf, String)>) -> CliResult<()> {
    let mut written: Vec<PathBuf> = Vec::new();
    for (path, contents) in files {
        if let Some(parent) = path.parent() {
            if let Err(e) = std::fs::create_dir_all(parent) {
                remove_files(&written);
                return Err(CliError::other(format!("cannot create {}: {e}", parent.display())));
            }
        }
        if let Err(e) = std::fs::write(&path, contents) {
            remove_files(&written);
            return Err(CliError::other(format!("cannot write {}: {e}", path.display())));
        }
        written.push(path);
    }
    Ok(())
}

fn remove_files(paths: &[PathBuf]) {
    for path in paths {
        let _ = std::fs::remove_file(path);
    }
}

fn write_artifacts(config: &PipelineConfig, outputs: &PipelineOutputs) -> CliResult<()> {
    let out = &config.out;
    let mut score_rows: Vec<tables::ScoreRow> =
        outputs.scores.iter().map(tables::ScoreRow::scored).collect();
    score_rows.extend(outputs.unscored.iter().map(|id| tables::ScoreRow::unscored(id)));
    score_rows.sort_by(|a, b| a.repo_id.cmp(&b.repo_id));

    let manifest = run_manifest(config, outputs)?;
    let files = vec![
        (
            out.join("risk_index.csv"),
            tables::render_risk_table(&outputs.catalog.entries, &outputs.catalog.names),
        ),
        (
            out.join("catalog_stats.json"),
            serde_json::to_string_pretty(&outputs.catalog.stats).map_err(CliError::other)? + "\n",
        ),
        (
            out.join("profiles.json"),
            tables::render_profiles_json(&outputs.profiles).map_err(CliError::other)?,
        ),
        (out.join("repo_scores.csv"), tables::render_score_table(&score_rows)),
        (out.join("surface_shares.csv"), tables::render_shares_table(&outputs.shares)),
        (out.join("cooccurrence.csv"), tables::render_cooccurrence_grid(&outputs.matrix)),
        (
            out.join("cooccurrence.json"),
            serde_json::to_string_pretty(&outputs.matrix).map_err(CliError::other)? + "\n",
        ),
        (out.join("band_distribution.csv"), tables::render_band_distribution(&outputs.scores)),
        (
            out.join("skipped_findings.csv"),
            tables::render_skipped_table(&outputs.profiles, &outputs.parse_skips),
        ),
        (out.join("run_manifest.json"), manifest),
    ];
    write_all(files)
}

fn run_manifest(config: &PipelineConfig, outputs: &PipelineOutputs) -> CliResult<String> {
    let total_findings: u32 = outputs.profiles.values().map(|p| p.total).sum();
    let skipped: u64 = outputs.profiles.values().map(|p| p.skipped).sum::<u64>()
        + outputs
            .parse_skips
            .values()
            .flat_map(|reasons| reasons.values())
            .sum::<u64>();
    let manifest = serde_json::json!({
        "tool": {
            "name": "mcp-risk",
            "version": env!("CARGO_PKG_VERSION"),
        },
        "catalogs": {
            "cwe_version": outputs.catalog.cwe_version,
            "capec_version": outputs.catalog.capec_version,
        },
        "config_sha256": config.digest()?,
        "dedup_mode": config.dedup,
        "counts": {
            "repositories": outputs.profiles.len(),
            "scored_repositories": outputs.scores.len(),
            "findings": total_findings,
            "scored_cwes": outputs.catalog.entries.len(),
            "skipped_findings": skipped,
        },
    });
    Ok(serde_json::to_string_pretty(&manifest).map_err(CliError::other)? + "\n")
}
