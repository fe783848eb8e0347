//! Per-figure report data files derived from the pipeline tables.
//!
//! Emits five data files: the CWE frequency/risk table, the repository
//! scatter triples, the surface shares, the band histogram, and the
//! co-occurrence matrix.

use std::collections::BTreeMap;
use std::path::Path;

use mcp_risk_core::scoring::RiskBand;
use mcp_risk_core::surfaces::ThreatSurface;
use mcp_risk_core::tables;

use crate::errors::{CliError, CliResult};
use crate::pipeline::write_all;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl ReportFormat {
    pub fn from_flag(flag: &str) -> CliResult<Self> {
        match flag {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(CliError::config(format!("unknown report format `{other}`"))),
        }
    }
}

fn read_table(dir: &Path, name: &str) -> CliResult<String> {
    let path = dir.join(name);
    std::fs::read_to_string(&path)
        .map_err(|e| CliError::config(format!("missing report input {}: {e}", path.display())))
}

/// One row of the CWE frequency report.
#[derive(Debug, Clone, serde::Serialize)]
pub struct CweFrequencyRow {
    pub cwe_id: u32,
    pub name: String,
    pub frequency: u32,
    pub risk_index: f64,
}

/// One row of the repository scatter report.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ScatterRow {
    pub repo_id: String,
    pub n_findings: u32,
    pub rms: f64,
    pub normalized: f64,
}

/// Derives the five per-figure data files from the pipeline tables in
/// `in_dir` and writes them under `out_dir`.
pub fn emit_report(in_dir: &Path, out_dir: &Path, format: ReportFormat) -> CliResult<()> {
    let profiles = tables::parse_profiles_json(&read_table(in_dir, "profiles.json")?)
        .map_err(CliError::parse)?;
    let risk_rows =
        tables::parse_risk_table(&read_table(in_dir, "risk_index.csv")?).map_err(CliError::parse)?;
    let score_rows = tables::parse_score_table(&read_table(in_dir, "repo_scores.csv")?)
        .map_err(CliError::parse)?;
    let share_rows = tables::parse_shares_table(&read_table(in_dir, "surface_shares.csv")?)
        .map_err(CliError::parse)?;
    let grid = tables::parse_cooccurrence_grid(&read_table(in_dir, "cooccurrence.csv")?)
        .map_err(CliError::parse)?;

    let scored: Vec<&tables::ScoreRow> =
        score_rows.iter().filter(|r| r.band.is_some()).collect();
    if scored.is_empty() {
        return Err(CliError::config("no scored repositories"));
    }

    // corpus-wide CWE frequencies joined with risk metadata
    let mut frequency: BTreeMap<u32, u32> = BTreeMap::new();
    for profile in profiles.values() {
        for (&cwe, &count) in &profile.frequencies {
            *frequency.entry(cwe).or_insert(0) += count;
        }
    }
    let risk_by_cwe: BTreeMap<u32, &tables::RiskRow> =
        risk_rows.iter().map(|r| (r.cwe_id, r)).collect();
    let mut cwe_rows: Vec<CweFrequencyRow> = frequency
        .iter()
        .map(|(&cwe_id, &frequency)| {
            let risk = risk_by_cwe.get(&cwe_id);
            CweFrequencyRow {
                cwe_id,
                name: risk.map(|r| r.name.clone()).unwrap_or_default(),
                frequency,
                risk_index: risk.map(|r| r.risk_index).unwrap_or(0.0),
            }
        })
        .collect();
    cwe_rows.sort_by(|a, b| b.frequency.cmp(&a.frequency).then(a.cwe_id.cmp(&b.cwe_id)));

    let scatter_rows: Vec<ScatterRow> = scored
        .iter()
        .map(|row| ScatterRow {
            repo_id: row.repo_id.clone(),
            n_findings: row.n_findings,
            rms: row.rms.unwrap_or(0.0),
            normalized: row.normalized.unwrap_or(0.0),
        })
        .collect();

    let mut band_counts: BTreeMap<RiskBand, u32> = BTreeMap::new();
    for row in &scored {
        if let Some(band) = row.band {
            *band_counts.entry(band).or_insert(0) += 1;
        }
    }

    let files = match format {
        ReportFormat::Csv => vec![
            (out_dir.join("cwe_frequency.csv"), cwe_frequency_csv(&cwe_rows)),
            (out_dir.join("repo_scatter.csv"), scatter_csv(&scatter_rows)),
            (out_dir.join("surface_shares.csv"), shares_csv(&share_rows)),
            (out_dir.join("band_distribution.csv"), bands_csv(&band_counts)),
            (out_dir.join("cooccurrence_matrix.csv"), grid_csv(&grid)),
        ],
        ReportFormat::Json => vec![
            (
                out_dir.join("cwe_frequency.json"),
                serde_json::to_string_pretty(&cwe_rows).map_err(CliError::other)? + "\n",
            ),
            (
                out_dir.join("repo_scatter.json"),
                serde_json::to_string_pretty(&scatter_rows).map_err(CliError::other)? + "\n",
            ),
            (
                out_dir.join("surface_shares.json"),
                serde_json::to_string_pretty(
                    &share_rows
                        .iter()
                        .map(|(s, f, e)| {
                            serde_json::json!({
                                "surface": s.label(),
                                "finding_share": f,
                                "exposure_share": e,
                            })
                        })
                        .collect::<Vec<_>>(),
                )
                .map_err(CliError::other)?
                    + "\n",
            ),
            (
                out_dir.join("band_distribution.json"),
                serde_json::to_string_pretty(
                    &band_counts
                        .iter()
                        .map(|(band, count)| {
                            serde_json::json!({"band": band.label(), "count": count})
                        })
                        .collect::<Vec<_>>(),
                )
                .map_err(CliError::other)?
                    + "\n",
            ),
            (
                out_dir.join("cooccurrence_matrix.json"),
                serde_json::to_string_pretty(&serde_json::json!({
                    "surfaces": ThreatSurface::NAMED.iter().map(|s| s.label()).collect::<Vec<_>>(),
                    "cells": grid,
                }))
                .map_err(CliError::other)?
                    + "\n",
            ),
        ],
    };
    write_all(files)
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().from_writer(Vec::new())
}

fn csv_finish(writer: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(writer.into_inner().expect("in-memory writer")).expect("utf-8 csv")
}

fn cwe_frequency_csv(rows: &[CweFrequencyRow]) -> String {
    let mut w = csv_writer();
    w.write_record(["cwe_id", "name", "frequency", "risk_index"]).expect("header");
    for row in rows {
        w.write_record([
            row.cwe_id.to_string(),
            row.name.clone(),
            row.frequency.to_string(),
            row.risk_index.to_string(),
        ])
        .expect("row");
    }
    csv_finish(w)
}

fn scatter_csv(rows: &[ScatterRow]) -> String {
    let mut w = csv_writer();
    w.write_record(["repo_id", "n_findings", "rms", "normalized"]).expect("header");
    for row in rows {
        w.write_record([
            row.repo_id.clone(),
            row.n_findings.to_string(),
            row.rms.to_string(),
            row.normalized.to_string(),
        ])
        .expect("row");
    }
    csv_finish(w)
}

fn shares_csv(rows: &[(ThreatSurface, f64, f64)]) -> String {
    let mut w = csv_writer();
    w.write_record(["surface", "finding_share", "exposure_share"]).expect("header");
    for (surface, finding, exposure) in rows {
        w.write_record([surface.label().to_string(), finding.to_string(), exposure.to_string()])
            .expect("row");
    }
    csv_finish(w)
}

fn bands_csv(counts: &BTreeMap<RiskBand, u32>) -> String {
    let mut w = csv_writer();
    w.write_record(["band", "count"]).expect("header");
    for band in RiskBand::ALL {
        if let Some(count) = counts.get(&band) {
            w.write_record([band.label().to_string(), count.to_string()]).expect("row");
        }
    }
    csv_finish(w)
}

fn grid_csv(cells: &[[Option<f64>; 4]; 4]) -> String {
    let mut w = csv_writer();
    let mut header = vec!["surface".to_string()];
    header.extend(ThreatSurface::NAMED.iter().map(|s| s.label().to_string()));
    w.write_record(&header).expect("header");
    for (i, surface) in ThreatSurface::NAMED.iter().enumerate() {
        let mut row = vec![surface.label().to_string()];
        row.extend(cells[i].iter().map(|cell| cell.map(|v| v.to_string()).unwrap_or_default()));
        w.write_record(&row).expect("row");
    }
    csv_finish(w)
}

fn records(text: &str, table: &'static str) -> CliResult<Vec<csv::StringRecord>> {
    csv::ReaderBuilder::new()
        .from_reader(text.as_bytes())
        .records()
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::parse(format!("{table}: {e}")))
}

fn parse_num<T: std::str::FromStr>(cell: &str, table: &'static str) -> CliResult<T> {
    cell.trim()
        .parse()
        .map_err(|_| CliError::parse(format!("{table}: bad value `{cell}`")))
}

/// Parses the emitted cwe_frequency.csv (used by chart rendering).
pub fn parse_cwe_frequency(text: &str) -> CliResult<Vec<CweFrequencyRow>> {
    records(text, "cwe_frequency")?
        .iter()
        .map(|record| {
            Ok(CweFrequencyRow {
                cwe_id: parse_num(&record[0], "cwe_frequency")?,
                name: record[1].to_string(),
                frequency: parse_num(&record[2], "cwe_frequency")?,
                risk_index: parse_num(&record[3], "cwe_frequency")?,
            })
        })
        .collect()
}

/// Parses the emitted repo_scatter.csv (used by chart rendering).
pub fn parse_scatter(text: &str) -> CliResult<Vec<ScatterRow>> {
    records(text, "repo_scatter")?
        .iter()
        .map(|record| {
            Ok(ScatterRow {
                repo_id: record[0].to_string(),
                n_findings: parse_num(&record[1], "repo_scatter")?,
                rms: parse_num(&record[2], "repo_scatter")?,
                normalized: parse_num(&record[3], "repo_scatter")?,
            })
        })
        .collect()
}

/// Parses the emitted band_distribution.csv (used by chart rendering).
pub fn parse_bands(text: &str) -> CliResult<Vec<(String, u32)>> {
    records(text, "band_distribution")?
        .iter()
        .map(|record| Ok((record[0].to_string(), parse_num(&record[1], "band_distribution")?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quoting_round_trip() {
        let rows = vec![CweFrequencyRow {
            cwe_id: 89,
            name: "Improper Neutralization of Special Elements used in an SQL Command ('SQL Injection')".into(),
            frequency: 5,
            risk_index: 83.3,
        }];
        let text = cwe_frequency_csv(&rows);
        let parsed = parse_cwe_frequency(&text).unwrap();
        assert_eq!(parsed.len(), 1);
        assert_eq!(parsed[0].cwe_id, 89);
        assert_eq!(parsed[0].frequency, 5);
    }

    #[test]
    fn quoted_comma_fields_survive() {
        let rows = vec![CweFrequencyRow {
            cwe_id: 20,
            name: "Improper Input Validation, allegedly".into(),
            frequency: 1,
            risk_index: 30.0,
        }];
        let parsed = parse_cwe_frequency(&cwe_frequency_csv(&rows)).unwrap();
        assert_eq!(parsed[0].name, "Improper Input Validation, allegedly");
    }

    #[test]
    fn unknown_format_flag_is_usage_error() {
        let err = ReportFormat::from_flag("yaml").unwrap_err();
        assert_eq!(err.code, 2);
    }
}
