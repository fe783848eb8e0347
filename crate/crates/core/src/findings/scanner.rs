//! MCP scanner report ingestion: category-tagged findings mapped to CWEs
//! through a configured category table.

use std::collections::BTreeMap;

use serde::Deserialize;

use super::{normalize_path, FindingsError, ParsedFindings, RawFinding, SkippedTally, Tool};
use crate::tables::TableError;

/// Maps scanner output categories to CWE ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CategoryMap {
    map: BTreeMap<String, u32>,
}

impl CategoryMap {
    /// The shipped default category table.
    pub fn builtin() -> Self {
        Self::parse_csv(include_str!("../../data/scanner_map.csv"))
            .expect("shipped scanner map parses")
    }

    /// Parses two-column delimited text `category,cwe_id` with a header row.
    pub fn parse_csv(text: &str) -> Result<Self, TableError> {
        let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
        let mut map = BTreeMap::new();
        for (index, record) in reader.records().enumerate() {
            let record = record.map_err(|e| TableError::Malformed {
                table: "scanner map",
                line: index + 2,
                message: e.to_string(),
            })?;
            let (Some(category), Some(cwe)) = (record.get(0), record.get(1)) else {
                return Err(TableError::Malformed {
                    table: "scanner map",
                    line: index + 2,
                    message: "expected two columns".into(),
                });
            };
            let cwe_id = cwe.trim().parse().map_err(|_| TableError::Malformed {
                table: "scanner map",
                line: index + 2,
                message: format!("bad CWE id `{cwe}`"),
            })?;
            map.insert(category.trim().to_string(), cwe_id);
        }
        Ok(CategoryMap { map })
    }

    pub fn cwe_for(&self, category: &str) -> Option<u32> {
        self.map.get(category).copied()
    }
}

#[derive(Debug, Deserialize)]
struct ScannerEntry {
    category: String,
    file: String,
    #[serde(default)]
    detail: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum ScannerDoc {
    Report { findings: Vec<ScannerEntry> },
    Entries(Vec<ScannerEntry>),
}

/// Parses a scanner report of `(category, file, detail)` entries.
///
/// Accepts either a top-level array or an object with a `findings` array.
/// Entries with an unmapped category are skipped and tallied. Scanner
/// findings carry no line information and land on line 1.
pub fn parse_scanner_output(
    bytes: &[u8],
    categories: &CategoryMap,
    repo_id: &str,
) -> Result<ParsedFindings, FindingsError> {
    let doc: ScannerDoc = serde_json::from_slice(bytes)
        .map_err(|e| FindingsError::MalformedReport(e.to_string()))?;
    let entries = match doc {
        ScannerDoc::Report { findings } => findings,
        ScannerDoc::Entries(entries) => entries,
    };

    let mut findings = Vec::new();
    let mut skipped = SkippedTally::default();
    for entry in entries {
        let Some(cwe_id) = categories.cwe_for(&entry.category) else {
            skipped.bump("unmapped_category");
            continue;
        };
        findings.push(RawFinding {
            repo_id: repo_id.to_string(),
            tool: Tool::McpScanner,
            rule_id: entry.category,
            cwe_id: Some(cwe_id),
            file_path: normalize_path(&entry.file),
            start_line: 1,
            end_line: 1,
            message: entry.detail.unwrap_or_default(),
        });
    }
    Ok(ParsedFindings { findings, skipped })
}
