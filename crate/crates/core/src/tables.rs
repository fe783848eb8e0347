//! Rendering and parsing of the delimited tables exchanged between
//! pipeline stages.
//!
//! Numeric cells are written with Rust's shortest round-trip float
//! formatting, so tables parse back to the exact values that were
//! computed; any display rounding happens in renderers, never here.

use std::collections::BTreeMap;

use crate::catalog::CweRiskEntry;
use crate::findings::{ProfileDoc, RepoFindingProfile};
use crate::scoring::{RepoScore, RiskBand};
use crate::surfaces::{CooccurrenceMatrix, SurfaceShares, ThreatSurface};

#[derive(Debug, thiserror::Error)]
pub enum TableError {
    #[error("malformed {table} table at line {line}: {message}")]
    Malformed { table: &'static str, line: usize, message: String },
    #[error("{table} table is missing column `{column}`")]
    MissingColumn { table: &'static str, column: &'static str },
    #[error("failed to write table: {0}")]
    Write(#[from] csv::Error),
    #[error("table is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
}

fn writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().from_writer(Vec::new())
}

fn finish(writer: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(writer.into_inner().expect("in-memory writer")).expect("utf-8 csv")
}

fn parse_cell<T: std::str::FromStr>(
    table: &'static str,
    line: usize,
    cell: &str,
) -> Result<T, TableError> {
    cell.trim().parse().map_err(|_| TableError::Malformed {
        table,
        line,
        message: format!("bad value `{cell}`"),
    })
}

// --- risk-index table ------------------------------------------------------

/// One row of the risk-index table.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskRow {
    pub cwe_id: u32,
    pub name: String,
    pub raw_risk: u32,
    pub risk_index: f64,
    /// Pipe-joined imputation flag labels, possibly empty.
    pub imputation_flags: String,
}

/// Renders the risk-index table with columns
/// `cwe_id,name,raw_risk,risk_index,imputation_flags`.
pub fn render_risk_table(
    entries: &BTreeMap<u32, CweRiskEntry>,
    names: &BTreeMap<u32, String>,
) -> String {
    let mut w = writer();
    w.write_record(["cwe_id", "name", "raw_risk", "risk_index", "imputation_flags"])
        .expect("header");
    for (cwe_id, entry) in entries {
        let flags: Vec<&str> = entry.flags().iter().map(|f| f.label()).collect();
        w.write_record([
            cwe_id.to_string(),
            names.get(cwe_id).cloned().unwrap_or_default(),
            entry.raw_risk.to_string(),
            entry.risk_index.to_string(),
            flags.join("|"),
        ])
        .expect("row");
    }
    finish(w)
}

pub fn parse_risk_table(text: &str) -> Result<Vec<RiskRow>, TableError> {
    let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (index, record) in reader.records().enumerate() {
        let line = index + 2;
        let record = record.map_err(|e| TableError::Malformed {
            table: "risk-index",
            line,
            message: e.to_string(),
        })?;
        if record.len() < 5 {
            return Err(TableError::Malformed {
                table: "risk-index",
                line,
                message: "expected five columns".into(),
            });
        }
        rows.push(RiskRow {
            cwe_id: parse_cell("risk-index", line, &record[0])?,
            name: record[1].to_string(),
            raw_risk: parse_cell("risk-index", line, &record[2])?,
            risk_index: parse_cell("risk-index", line, &record[3])?,
            imputation_flags: record[4].to_string(),
        });
    }
    Ok(rows)
}

/// Extracts the `cwe_id -> risk_index` weights from parsed rows.
pub fn risk_indices_from_rows(rows: &[RiskRow]) -> BTreeMap<u32, f64> {
    rows.iter().map(|r| (r.cwe_id, r.risk_index)).collect()
}

// --- score table ------------------------------------------------------------

/// One row of the per-repository score table. Repositories with no
/// scorable findings keep their metric cells empty and report the band
/// label `Unscored`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRow {
    pub repo_id: String,
    pub n_findings: u32,
    pub exposure: f64,
    pub rms: Option<f64>,
    pub overall: Option<f64>,
    pub normalized: Option<f64>,
    pub band: Option<RiskBand>,
}

impl ScoreRow {
    pub fn scored(score: &RepoScore) -> Self {
        ScoreRow {
            repo_id: score.repo_id.clone(),
            n_findings: score.n_findings,
            exposure: score.exposure,
            rms: Some(score.rms),
            overall: Some(score.overall),
            normalized: Some(score.normalized),
            band: Some(score.band),
        }
    }

    pub fn unscored(repo_id: &str) -> Self {
        ScoreRow {
            repo_id: repo_id.to_string(),
            n_findings: 0,
            exposure: 0.0,
            rms: None,
            overall: None,
            normalized: None,
            band: None,
        }
    }

    pub fn band_label(&self) -> &'static str {
        self.band.map_or("Unscored", RiskBand::label)
    }
}

fn opt_cell(value: Option<f64>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}

fn parse_opt_cell(table: &'static str, line: usize, cell: &str) -> Result<Option<f64>, TableError> {
    if cell.trim().is_empty() {
        Ok(None)
    } else {
        parse_cell(table, line, cell).map(Some)
    }
}

/// Renders the score table with columns
/// `repo_id,n_findings,exposure,rms,overall,normalized,band`.
pub fn render_score_table(rows: &[ScoreRow]) -> String {
    let mut w = writer();
    w.write_record(["repo_id", "n_findings", "exposure", "rms", "overall", "normalized", "band"])
        .expect("header");
    for row in rows {
        w.write_record([
            row.repo_id.clone(),
            row.n_findings.to_string(),
            row.exposure.to_string(),
            opt_cell(row.rms),
            opt_cell(row.overall),
            opt_cell(row.normalized),
            row.band_label().to_string(),
        ])
        .expect("row");
    }
    finish(w)
}

pub fn parse_score_table(text: &str) -> Result<Vec<ScoreRow>, TableError> {
    let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (index, record) in reader.records().enumerate() {
        let line = index + 2;
        let record = record.map_err(|e| TableError::Malformed {
            table: "score",
            line,
            message: e.to_string(),
        })?;
        if record.len() < 7 {
            return Err(TableError::Malformed {
                table: "score",
                line,
                message: "expected seven columns".into(),
            });
        }
        let band = match &record[6] {
            "Unscored" => None,
            label => Some(RiskBand::from_label(label).ok_or(TableError::Malformed {
                table: "score",
                line,
                message: format!("unknown band `{label}`"),
            })?),
        };
        rows.push(ScoreRow {
            repo_id: record[0].to_string(),
            n_findings: parse_cell("score", line, &record[1])?,
            exposure: parse_cell("score", line, &record[2])?,
            rms: parse_opt_cell("score", line, &record[3])?,
            overall: parse_opt_cell("score", line, &record[4])?,
            normalized: parse_opt_cell("score", line, &record[5])?,
            band,
        });
    }
    Ok(rows)
}

// --- surface shares ----------------------------------------------------------

/// Renders the shares table with columns `surface,finding_share,exposure_share`.
pub fn render_shares_table(shares: &SurfaceShares) -> String {
    let mut w = writer();
    w.write_record(["surface", "finding_share", "exposure_share"]).expect("header");
    for entry in &shares.entries {
        w.write_record([
            entry.surface.label().to_string(),
            entry.finding_share.to_string(),
            entry.exposure_share.to_string(),
        ])
        .expect("row");
    }
    finish(w)
}

pub fn parse_shares_table(text: &str) -> Result<Vec<(ThreatSurface, f64, f64)>, TableError> {
    let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (index, record) in reader.records().enumerate() {
        let line = index + 2;
        let record = record.map_err(|e| TableError::Malformed {
            table: "shares",
            line,
            message: e.to_string(),
        })?;
        let surface = ThreatSurface::from_label(&record[0]).ok_or(TableError::Malformed {
            table: "shares",
            line,
            message: format!("unknown surface `{}`", &record[0]),
        })?;
        rows.push((
            surface,
            parse_cell("shares", line, &record[1])?,
            parse_cell("shares", line, &record[2])?,
        ));
    }
    Ok(rows)
}

// --- co-occurrence grid -------------------------------------------------------

/// Renders the 4x4 grid with a leading `surface` column; absent cells
/// (zero support) render as empty.
pub fn render_cooccurrence_grid(matrix: &CooccurrenceMatrix) -> String {
    let mut w = writer();
    let mut header = vec!["surface".to_string()];
    header.extend(ThreatSurface::NAMED.iter().map(|s| s.label().to_string()));
    w.write_record(&header).expect("header");
    for (i, surface) in ThreatSurface::NAMED.iter().enumerate() {
        let mut row = vec![surface.label().to_string()];
        for j in 0..ThreatSurface::NAMED.len() {
            row.push(opt_cell(matrix.cells[i][j]));
        }
        w.write_record(&row).expect("row");
    }
    finish(w)
}

pub fn parse_cooccurrence_grid(text: &str) -> Result<[[Option<f64>; 4]; 4], TableError> {
    let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let mut cells = [[None; 4]; 4];
    for (index, record) in reader.records().enumerate() {
        let line = index + 2;
        let record = record.map_err(|e| TableError::Malformed {
            table: "co-occurrence",
            line,
            message: e.to_string(),
        })?;
        if index >= 4 || record.len() != 5 {
            return Err(TableError::Malformed {
                table: "co-occurrence",
                line,
                message: "expected a 4x4 grid".into(),
            });
        }
        for j in 0..4 {
            cells[index][j] = parse_opt_cell("co-occurrence", line, &record[j + 1])?;
        }
    }
    Ok(cells)
}

// --- band distribution and skip tally ------------------------------------------

/// Renders `band,count` rows for non-empty bands, in band order.
pub fn render_band_distribution(scores: &[RepoScore]) -> String {
    let mut counts: BTreeMap<RiskBand, u32> = BTreeMap::new();
    for score in scores {
        *counts.entry(score.band).or_insert(0) += 1;
    }
    let mut w = writer();
    w.write_record(["band", "count"]).expect("header");
    for band in RiskBand::ALL {
        if let Some(count) = counts.get(&band) {
            w.write_record([band.label().to_string(), count.to_string()]).expect("row");
        }
    }
    finish(w)
}

/// Renders the per-repository skipped-findings tally with a
/// `reason=count` detail column.
pub fn render_skipped_table(profiles: &BTreeMap<String, RepoFindingProfile>, extra: &BTreeMap<String, BTreeMap<String, u64>>) -> String {
    let mut w = writer();
    w.write_record(["repo_id", "skipped", "detail"]).expect("header");
    for (repo_id, profile) in profiles {
        let mut reasons: BTreeMap<String, u64> = BTreeMap::new();
        if profile.skipped > 0 {
            reasons.insert("no_cwe".to_string(), profile.skipped);
        }
        if let Some(parse_reasons) = extra.get(repo_id) {
            for (reason, count) in parse_reasons {
                *reasons.entry(reason.clone()).or_insert(0) += count;
            }
        }
        let total: u64 = reasons.values().sum();
        let detail: Vec<String> = reasons.iter().map(|(r, c)| format!("{r}={c}")).collect();
        w.write_record([repo_id.clone(), total.to_string(), detail.join(";")]).expect("row");
    }
    finish(w)
}

// --- profile documents ----------------------------------------------------------

/// Serializes profiles as a JSON array of
/// `{repo_id, frequencies, total, skipped}` documents.
pub fn render_profiles_json(
    profiles: &BTreeMap<String, RepoFindingProfile>,
) -> Result<String, TableError> {
    let docs: Vec<ProfileDoc> = profiles.values().map(RepoFindingProfile::to_doc).collect();
    let mut json = serde_json::to_string_pretty(&docs)?;
    json.push('\n');
    Ok(json)
}

pub fn parse_profiles_json(
    text: &str,
) -> Result<BTreeMap<String, RepoFindingProfile>, TableError> {
    let docs: Vec<ProfileDoc> = serde_json::from_str(text)?;
    Ok(docs
        .into_iter()
        .map(|doc| {
            let profile = RepoFindingProfile::from_doc(doc);
            (profile.repo_id.clone(), profile)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{compute_cwe_risk_index, CweCapecPair};
    use std::collections::BTreeSet;

    fn sample_entries() -> BTreeMap<u32, CweRiskEntry> {
        let pairs = vec![
            CweCapecPair {
                cwe_id: 89,
                capec_id: Some(66),
                la: 3,
                le: 3,
                mi: 2,
                cc: 5,
                ts: 5,
                flags: BTreeSet::new(),
            },
            CweCapecPair {
                cwe_id: 639,
                capec_id: None,
                la: 3,
                le: 3,
                mi: 1,
                cc: 3,
                ts: 5,
                flags: BTreeSet::from([crate::catalog::ImputationFlag::ManualOverride]),
            },
        ];
        compute_cwe_risk_index(&pairs).unwrap()
    }

    #[test]
    fn risk_table_round_trip() {
        let entries = sample_entries();
        let names: BTreeMap<u32, String> =
            [(89u32, "SQL Injection, sort of".to_string()), (639, "Key Bypass".to_string())]
                .into_iter()
                .collect();
        let text = render_risk_table(&entries, &names);
        let rows = parse_risk_table(&text).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].cwe_id, 89);
        assert_eq!(rows[0].name, "SQL Injection, sort of");
        assert_eq!(rows[0].risk_index, 100.0);
        assert_eq!(rows[1].imputation_flags, "MANUAL_OVERRIDE");
        let indices = risk_indices_from_rows(&rows);
        assert_eq!(indices[&639], entries[&639].risk_index);
    }

    #[test]
    fn score_table_round_trip_with_unscored() {
        let scored = RepoScore {
            repo_id: "alpha".into(),
            n_findings: 11,
            exposure: 723.3,
            rms: 71.329,
            overall: 76.977,
            ln_overall: 4.34,
            normalized: 100.0,
            band: RiskBand::VeryHigh,
        };
        let rows = vec![ScoreRow::scored(&scored), ScoreRow::unscored("echo")];
        let text = render_score_table(&rows);
        let parsed = parse_score_table(&text).unwrap();
        assert_eq!(parsed.len(), 2);
        assert_eq!(parsed[0].band, Some(RiskBand::VeryHigh));
        assert_eq!(parsed[0].normalized, Some(100.0));
        assert_eq!(parsed[1].band, None);
        assert_eq!(parsed[1].band_label(), "Unscored");
        assert_eq!(parsed[1].rms, None);
    }

    #[test]
    fn malformed_score_table_is_rejected() {
        let err = parse_score_table("repo_id,n_findings\nx,notanumber\n").unwrap_err();
        assert!(matches!(err, TableError::Malformed { .. }));
    }

    #[test]
    fn band_distribution_skips_empty_bands() {
        let score = |repo_id: &str, band| RepoScore {
            repo_id: repo_id.into(),
            n_findings: 1,
            exposure: 1.0,
            rms: 1.0,
            overall: 1.0,
            ln_overall: 0.0,
            normalized: 50.0,
            band,
        };
        let scores = vec![
            score("a", RiskBand::Medium),
            score("b", RiskBand::Medium),
            score("c", RiskBand::High),
        ];
        let table = render_band_distribution(&scores);
        assert_eq!(table, "band,count\nMedium,2\nHigh,1\n");
    }
}
