//! `mcp-risk`: metadata-driven security risk scoring for MCP server
//! repositories.

use mcp_risk_cli::{charts, config, errors, pipeline, report};

use std::collections::BTreeMap;
use std::path::PathBuf;

use chrono::{DateTime, Utc};
use clap::{Args, Parser, Subcommand};
use mcp_risk_core::catalog::risk_indices;
use mcp_risk_core::findings::DedupMode;
use mcp_risk_core::harvest::{
    filter_repositories, load_snapshot, save_snapshot, search_repositories, ExclusionRules,
    HttpTransport, ReplayTransport, SearchOptions, SearchTransport, SnapshotManifest,
    DEFAULT_QUERY,
};
use mcp_risk_core::surfaces::{chain_report, cooccurrence, surface_shares};
use mcp_risk_core::tables;

use config::{ConfigFile, PipelineConfig};
use errors::{CliError, CliResult};

#[derive(Parser)]
#[command(
    name = "mcp-risk",
    version,
    about = "Converts static-analysis findings over MCP server repositories into \
             standardized CWE/CAPEC-driven risk scores, threat-surface shares, and \
             co-occurrence analytics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse the CWE/CAPEC catalogs and emit the risk-index table and stats
    Catalog(CatalogArgs),
    /// Ingest analyzer outputs into per-repository finding profiles
    Ingest(IngestArgs),
    /// Score finding profiles against a risk-index table
    Score(ScoreArgs),
    /// Compute threat-surface shares, co-occurrence, and exploit chains
    Surfaces(SurfacesArgs),
    /// Derive per-figure report data files (and optionally charts)
    Report(ReportArgs),
    /// Search the hosting service for candidate MCP server repositories
    Harvest(HarvestArgs),
    /// Run the full pipeline: catalog, ingest, score, surfaces
    Run(RunArgs),
}

#[derive(Args)]
struct CatalogArgs {
    #[arg(long, value_name = "FILE")]
    cwe_xml: PathBuf,
    #[arg(long, value_name = "FILE")]
    capec_xml: PathBuf,
    /// Manual-completion table; defaults to the shipped table
    #[arg(long, value_name = "FILE")]
    overrides: Option<PathBuf>,
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

#[derive(Args)]
struct IngestArgs {
    /// Directory with one subdirectory of analyzer outputs per repository
    #[arg(long, value_name = "DIR")]
    findings_dir: PathBuf,
    /// Joern query-to-CWE manifest; defaults to the shipped manifest
    #[arg(long, value_name = "FILE")]
    joern_manifest: Option<PathBuf>,
    /// Scanner category-to-CWE table; defaults to the shipped table
    #[arg(long, value_name = "FILE")]
    scanner_map: Option<PathBuf>,
    /// Frequency granularity after cross-tool deduplication
    #[arg(long, value_enum, default_value = "location")]
    dedup: DedupArg,
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

#[derive(Args)]
struct ScoreArgs {
    /// risk_index.csv from the catalog stage
    #[arg(long, value_name = "FILE")]
    risk_index: PathBuf,
    /// profiles.json from the ingest stage
    #[arg(long, value_name = "FILE")]
    profiles: PathBuf,
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

#[derive(Args)]
struct SurfacesArgs {
    #[arg(long, value_name = "FILE")]
    risk_index: PathBuf,
    #[arg(long, value_name = "FILE")]
    profiles: PathBuf,
    /// CWE-to-surface table; defaults to the shipped mapping
    #[arg(long, value_name = "FILE")]
    surface_map: Option<PathBuf>,
    /// Chain-report threshold, percent
    #[arg(long, default_value_t = 85.0)]
    chain_threshold: f64,
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// Directory holding the pipeline tables (the `run` output)
    #[arg(long = "in", value_name = "DIR")]
    input: PathBuf,
    /// Output directory; defaults to <in>/report
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: String,
    /// Also render chart images
    #[arg(long)]
    render: bool,
}

#[derive(Args)]
struct HarvestArgs {
    /// Search query
    #[arg(long, default_value = DEFAULT_QUERY)]
    query: String,
    #[arg(long, default_value_t = 10)]
    page_limit: u32,
    /// Replay recorded responses from this directory
    #[arg(long, value_name = "DIR", conflicts_with = "live")]
    fixture_dir: Option<PathBuf>,
    /// Query the live endpoint (token from MCP_RISK_TOKEN)
    #[arg(long)]
    live: bool,
    /// Exclusion rules; defaults to the shipped rules
    #[arg(long, value_name = "FILE")]
    rules: Option<PathBuf>,
    /// Extra denylist of full names, one per line
    #[arg(long, value_name = "FILE")]
    denylist: Option<PathBuf>,
    /// Snapshot time override (RFC 3339); defaults to now (live) or the
    /// Unix epoch (fixture replay)
    #[arg(long, value_name = "TIMESTAMP")]
    snapshot_time: Option<String>,
    /// Manifest output path
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// Where to write the exclusion log
    #[arg(long, value_name = "FILE")]
    exclusions_out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_name = "FILE")]
    cwe_xml: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    capec_xml: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    overrides: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    surface_map: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    joern_manifest: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    scanner_map: Option<PathBuf>,
    #[arg(long, value_name = "DIR")]
    findings_dir: Option<PathBuf>,
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "location")]
    dedup: DedupArg,
    /// Also emit report data files and charts
    #[arg(long)]
    render: bool,
    /// TOML config file; values in it override the flags
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum DedupArg {
    Location,
    #[value(name = "cwe-level")]
    CweLevel,
}

impl From<DedupArg> for DedupMode {
    fn from(arg: DedupArg) -> Self {
        match arg {
            DedupArg::Location => DedupMode::Location,
            DedupArg::CweLevel => DedupMode::CweLevel,
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(error) = dispatch(cli.command) {
        eprintln!("error: {error}");
        std::process::exit(error.code);
    }
}

fn dispatch(command: Command) -> CliResult<()> {
    match command {
        Command::Catalog(args) => cmd_catalog(args),
        Command::Ingest(args) => cmd_ingest(args),
        Command::Score(args) => cmd_score(args),
        Command::Surfaces(args) => cmd_surfaces(args),
        Command::Report(args) => cmd_report(args),
        Command::Harvest(args) => cmd_harvest(args),
        Command::Run(args) => cmd_run(args),
    }
}

fn ensure_out_dir(path: &PathBuf) -> CliResult<()> {
    std::fs::create_dir_all(path)
        .map_err(|e| CliError::config(format!("cannot create --out `{}`: {e}", path.display())))
}

fn cmd_catalog(args: CatalogArgs) -> CliResult<()> {
    ensure_out_dir(&args.out)?;
    let catalog =
        pipeline::load_catalog(&args.cwe_xml, &args.capec_xml, args.overrides.as_deref())?;
    for (reason, count) in &catalog.discard_summary {
        eprintln!("discarded {count} pair(s): {reason}");
    }
    pipeline::write_all(vec![
        (
            args.out.join("risk_index.csv"),
            tables::render_risk_table(&catalog.entries, &catalog.names),
        ),
        (
            args.out.join("catalog_stats.json"),
            serde_json::to_string_pretty(&catalog.stats).map_err(CliError::other)? + "\n",
        ),
    ])?;
    println!(
        "scored {} CWEs from {} weaknesses / {} patterns",
        catalog.entries.len(),
        catalog.stats.weakness_count,
        catalog.stats.attack_pattern_count
    );
    Ok(())
}

fn cmd_ingest(args: IngestArgs) -> CliResult<()> {
    ensure_out_dir(&args.out)?;
    let manifest = match &args.joern_manifest {
        Some(path) => pipeline::load_query_manifest(path)?,
        None => mcp_risk_core::findings::QueryManifest::builtin(),
    };
    let categories = match &args.scanner_map {
        Some(path) => pipeline::load_category_map(path)?,
        None => mcp_risk_core::findings::CategoryMap::builtin(),
    };
    let outputs =
        pipeline::ingest_findings(&args.findings_dir, &manifest, &categories, args.dedup.into())?;
    pipeline::write_all(vec![
        (
            args.out.join("profiles.json"),
            tables::render_profiles_json(&outputs.profiles).map_err(CliError::other)?,
        ),
        (
            args.out.join("skipped_findings.csv"),
            tables::render_skipped_table(&outputs.profiles, &outputs.parse_skips),
        ),
    ])?;
    let total: u32 = outputs.profiles.values().map(|p| p.total).sum();
    println!("ingested {} findings across {} repositories", total, outputs.profiles.len());
    Ok(())
}

fn load_profiles(path: &PathBuf) -> CliResult<BTreeMap<String, mcp_risk_core::findings::RepoFindingProfile>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    tables::parse_profiles_json(&text).map_err(CliError::parse)
}

fn load_indices(path: &PathBuf) -> CliResult<BTreeMap<u32, f64>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    let rows = tables::parse_risk_table(&text).map_err(CliError::parse)?;
    Ok(tables::risk_indices_from_rows(&rows))
}

fn cmd_score(args: ScoreArgs) -> CliResult<()> {
    ensure_out_dir(&args.out)?;
    let indices = load_indices(&args.risk_index)?;
    let mut profiles = load_profiles(&args.profiles)?;
    let mut extra = BTreeMap::new();
    pipeline::drop_unscorable(&mut profiles, &indices, &mut extra);

    let outputs = pipeline::score_corpus(&profiles, &indices)?;
    let mut rows: Vec<tables::ScoreRow> =
        outputs.scores.iter().map(tables::ScoreRow::scored).collect();
    rows.extend(outputs.unscored.iter().map(|id| tables::ScoreRow::unscored(id)));
    rows.sort_by(|a, b| a.repo_id.cmp(&b.repo_id));

    pipeline::write_all(vec![
        (args.out.join("repo_scores.csv"), tables::render_score_table(&rows)),
        (
            args.out.join("band_distribution.csv"),
            tables::render_band_distribution(&outputs.scores),
        ),
    ])?;
    println!("scored {} repositories ({} unscored)", outputs.scores.len(), outputs.unscored.len());
    Ok(())
}

fn cmd_surfaces(args: SurfacesArgs) -> CliResult<()> {
    ensure_out_dir(&args.out)?;
    let indices = load_indices(&args.risk_index)?;
    let mut profiles = load_profiles(&args.profiles)?;
    let mut extra = BTreeMap::new();
    pipeline::drop_unscorable(&mut profiles, &indices, &mut extra);
    let map = match &args.surface_map {
        Some(path) => pipeline::load_surface_map(path)?,
        None => mcp_risk_core::surfaces::SurfaceMap::builtin(),
    };

    let shares = surface_shares(&profiles, &indices, &map).map_err(CliError::scoring)?;
    let matrix = cooccurrence(&profiles, &map);
    let chains = chain_report(&matrix, args.chain_threshold);

    let mut chains_csv = String::from("from,to,percentage,chain\n");
    for cell in &chains {
        chains_csv.push_str(&format!(
            "{},{},{},{}\n",
            cell.from.label(),
            cell.to.label(),
            cell.percentage,
            cell.chain.map(|c| c.id).unwrap_or_default(),
        ));
    }

    pipeline::write_all(vec![
        (args.out.join("surface_shares.csv"), tables::render_shares_table(&shares)),
        (args.out.join("cooccurrence.csv"), tables::render_cooccurrence_grid(&matrix)),
        (
            args.out.join("cooccurrence.json"),
            serde_json::to_string_pretty(&matrix).map_err(CliError::other)? + "\n",
        ),
        (args.out.join("chains.csv"), chains_csv),
    ])?;
    println!("{} co-occurrence cells at or above {}%", chains.len(), args.chain_threshold);
    Ok(())
}

fn cmd_report(args: ReportArgs) -> CliResult<()> {
    let format = report::ReportFormat::from_flag(&args.format)?;
    let out_dir = args.out.clone().unwrap_or_else(|| args.input.join("report"));
    report::emit_report(&args.input, &out_dir, format)?;
    if args.render {
        if format != report::ReportFormat::Csv {
            return Err(CliError::config("--render requires --format csv"));
        }
        charts::render_charts(&out_dir, &out_dir.join("charts"))?;
    }
    println!("report written to {}", out_dir.display());
    Ok(())
}

fn cmd_harvest(args: HarvestArgs) -> CliResult<()> {
    let snapshot_time: DateTime<Utc> = match &args.snapshot_time {
        Some(text) => text
            .parse()
            .map_err(|e| CliError::config(format!("bad --snapshot-time `{text}`: {e}")))?,
        None if args.live => Utc::now(),
        None => DateTime::<Utc>::UNIX_EPOCH,
    };

    let mut transport: Box<dyn SearchTransport> = match (&args.fixture_dir, args.live) {
        (Some(dir), _) => Box::new(ReplayTransport::from_dir(dir).map_err(CliError::config)?),
        (None, true) => Box::new(HttpTransport::from_env(None).map_err(CliError::config)?),
        (None, false) => {
            return Err(CliError::config(
                "harvest needs --fixture-dir (recorded responses) or --live",
            ))
        }
    };

    let options = SearchOptions::new(args.query.clone(), args.page_limit, snapshot_time);
    let outcome =
        search_repositories(transport.as_mut(), &options, &mut |d| std::thread::sleep(d))
            .map_err(CliError::other)?;
    for warning in &outcome.warnings {
        eprintln!("warning: {warning}");
    }

    let mut rules = match &args.rules {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
            ExclusionRules::parse_csv(&text)
                .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?
        }
        None => ExclusionRules::builtin(),
    };
    if let Some(path) = &args.denylist {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        rules = rules.with_denylist(text.lines().map(|l| l.trim().to_string()).filter(|l| !l.is_empty()));
    }

    let (retained, excluded) = filter_repositories(outcome.repos, &rules);
    for exclusion in &excluded {
        eprintln!("excluded {}: {}", exclusion.full_name, exclusion.reason);
    }
    if let Some(path) = &args.exclusions_out {
        let mut text = String::from("full_name,reason\n");
        for e in &excluded {
            text.push_str(&format!("{},{}\n", e.full_name, e.reason));
        }
        pipeline::write_all(vec![(path.clone(), text)])?;
    }

    let manifest = SnapshotManifest {
        query: args.query,
        snapshot_time,
        repos: retained,
    };
    save_snapshot(&manifest, &args.out).map_err(CliError::other)?;
    // snapshots must survive a save/load round trip
    load_snapshot(&args.out).map_err(CliError::other)?;
    println!(
        "{} repositories retained ({} excluded) -> {}",
        manifest.repos.len(),
        excluded.len(),
        args.out.display()
    );
    Ok(())
}

fn cmd_run(args: RunArgs) -> CliResult<()> {
    let mut config = PipelineConfig {
        cwe_xml: args.cwe_xml.unwrap_or_default(),
        capec_xml: args.capec_xml.unwrap_or_default(),
        overrides: args.overrides,
        surface_map: args.surface_map,
        joern_manifest: args.joern_manifest,
        scanner_map: args.scanner_map,
        findings_dir: args.findings_dir.unwrap_or_default(),
        out: args.out.unwrap_or_default(),
        dedup: args.dedup.into(),
        render: args.render,
    };
    if let Some(path) = &args.config {
        config.overlay(ConfigFile::load(path)?);
    }
    for (flag, path) in [
        ("--cwe-xml", &config.cwe_xml),
        ("--capec-xml", &config.capec_xml),
        ("--findings-dir", &config.findings_dir),
        ("--out", &config.out),
    ] {
        if path.as_os_str().is_empty() {
            return Err(CliError::config(format!("{flag} is required")));
        }
    }

    let outputs = pipeline::run_pipeline(&config)?;
    let indices = risk_indices(&outputs.catalog.entries);
    println!(
        "scored {} of {} repositories against {} CWE risk indices -> {}",
        outputs.scores.len(),
        outputs.profiles.len(),
        indices.len(),
        config.out.display()
    );
    Ok(())
}
