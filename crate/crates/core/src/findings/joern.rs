//! Joern result ingestion: JSON Lines records mapped to CWEs through the
//! query manifest.

use std::collections::BTreeMap;

use serde::Deserialize;

use super::{normalize_path, FindingsError, ParsedFindings, RawFinding, SkippedTally, Tool};
use crate::tables::TableError;

/// Maps each Joern query id to exactly one CWE id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QueryManifest {
    map: BTreeMap<String, u32>,
}

impl QueryManifest {
    /// The shipped manifest for the bundled Python query suite.
    pub fn builtin() -> Self {
        Self::parse_csv(include_str!("../../data/joern_manifest.csv"))
            .expect("shipped query manifest parses")
    }

    /// Parses two-column delimited text `query_id,cwe_id` with a header row.
    pub fn parse_csv(text: &str) -> Result<Self, TableError> {
        let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
        let mut map = BTreeMap::new();
        for (index, record) in reader.records().enumerate() {
            let record = record.map_err(|e| TableError::Malformed {
                table: "joern manifest",
                line: index + 2,
                message: e.to_string(),
            })?;
            let (Some(query), Some(cwe)) = (record.get(0), record.get(1)) else {
                return Err(TableError::Malformed {
                    table: "joern manifest",
                    line: index + 2,
                    message: "expected two columns".into(),
                });
            };
            let cwe_id = cwe.trim().parse().map_err(|_| TableError::Malformed {
                table: "joern manifest",
                line: index + 2,
                message: format!("bad CWE id `{cwe}`"),
            })?;
            map.insert(query.trim().to_string(), cwe_id);
        }
        Ok(QueryManifest { map })
    }

    pub fn cwe_for(&self, query_id: &str) -> Option<u32> {
        self.map.get(query_id).copied()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

#[derive(Debug, Deserialize)]
struct JoernRecord {
    query_id: String,
    filename: String,
    line_number: u32,
    #[serde(default)]
    snippet: Option<String>,
}

/// Parses line-delimited Joern records with fields
/// `(query_id, filename, line_number, snippet)`.
///
/// Findings inherit the CWE of the query that produced them; records whose
/// query id is absent from the manifest are skipped and tallied. A
/// malformed line is a parse error naming the offending line.
pub fn parse_joern_results(
    bytes: &[u8],
    manifest: &QueryManifest,
    repo_id: &str,
) -> Result<ParsedFindings, FindingsError> {
    let text = String::from_utf8_lossy(bytes);
    let mut findings = Vec::new();
    let mut skipped = SkippedTally::default();
    for (index, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: JoernRecord =
            serde_json::from_str(line).map_err(|e| FindingsError::MalformedRecord {
                line: index + 1,
                message: e.to_string(),
            })?;
        let Some(cwe_id) = manifest.cwe_for(&record.query_id) else {
            skipped.bump("unknown_query");
            continue;
        };
        findings.push(RawFinding {
            repo_id: repo_id.to_string(),
            tool: Tool::Joern,
            rule_id: record.query_id,
            cwe_id: Some(cwe_id),
            file_path: normalize_path(&record.filename),
            start_line: record.line_number.max(1),
            end_line: record.line_number.max(1),
            message: record.snippet.unwrap_or_default(),
        });
    }
    Ok(ParsedFindings { findings, skipped })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn manifest() -> QueryManifest {
        QueryManifest::parse_csv("query_id,cwe_id\nq_cwe_78,78\nq_cwe_89,89\n").unwrap()
    }

    #[test]
    fn manifest_lookup_assigns_cwe() {
        let line = r#"{"query_id": "q_cwe_78", "filename": "tools/shell.py", "line_number": 17, "snippet": "os.system(x)"}"#;
        let parsed = parse_joern_results(line.as_bytes(), &manifest(), "r1").unwrap();
        let f = &parsed.findings[0];
        assert_eq!(f.cwe_id, Some(78));
        assert_eq!(f.file_path, "tools/shell.py");
        assert_eq!(f.start_line, 17);
        assert_eq!(f.tool, Tool::Joern);
    }

    #[test]
    fn unknown_query_is_skipped_and_tallied() {
        let line = r#"{"query_id": "q_new", "filename": "a.py", "line_number": 1}"#;
        let parsed = parse_joern_results(line.as_bytes(), &manifest(), "r1").unwrap();
        assert!(parsed.findings.is_empty());
        assert_eq!(parsed.skipped.reasons["unknown_query"], 1);
    }

    #[test]
    fn empty_document_is_empty() {
        let parsed = parse_joern_results(b"", &manifest(), "r1").unwrap();
        assert!(parsed.findings.is_empty());
        assert_eq!(parsed.skipped.total(), 0);
    }

    #[test]
    fn malformed_line_names_its_number() {
        let text = "{\"query_id\": \"q_cwe_78\", \"filename\": \"a.py\", \"line_number\": 1}\nnot json\n";
        let err = parse_joern_results(text.as_bytes(), &manifest(), "r1").unwrap_err();
        assert!(matches!(err, FindingsError::MalformedRecord { line: 2, .. }));
    }

    #[test]
    fn builtin_manifest_has_the_full_query_suite() {
        let manifest = QueryManifest::builtin();
        assert_eq!(manifest.len(), 54);
        assert_eq!(manifest.cwe_for("py-cwe-089-cursor-execute-format"), Some(89));
    }
}
