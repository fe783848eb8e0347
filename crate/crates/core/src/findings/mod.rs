//! Static-analyzer output ingestion and cross-tool deduplication.
//!
//! Each parser turns one analyzer document into [`RawFinding`]s plus a
//! tally of records it had to skip; [`normalize_and_dedup`] then folds
//! findings from any mix of tools and repositories into deterministic
//! per-repository profiles.

mod joern;
mod sarif;
mod scanner;

pub use joern::{parse_joern_results, QueryManifest};
pub use sarif::parse_sarif;
pub use scanner::{parse_scanner_output, CategoryMap};

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

/// Which analyzer produced a finding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Tool {
    #[serde(rename = "CODEQL")]
    CodeQl,
    #[serde(rename = "JOERN")]
    Joern,
    #[serde(rename = "MCP_SCANNER")]
    McpScanner,
}

impl Tool {
    pub fn label(self) -> &'static str {
        match self {
            Tool::CodeQl => "CODEQL",
            Tool::Joern => "JOERN",
            Tool::McpScanner => "MCP_SCANNER",
        }
    }
}

/// One normalized analyzer finding.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawFinding {
    pub repo_id: String,
    pub tool: Tool,
    pub rule_id: String,
    /// Absent when the tool output carried no resolvable CWE; such findings
    /// are excluded from scoring but surface in the skipped tally.
    pub cwe_id: Option<u32>,
    /// Repo-relative path with forward slashes and no parent-directory
    /// segments.
    pub file_path: String,
    pub start_line: u32,
    pub end_line: u32,
    pub message: String,
}

/// Normalizes separators, strips current-directory segments, and resolves
/// parent-directory segments lexically. Paths are case-preserved.
pub fn normalize_path(raw: &str) -> String {
    let unified = raw.replace('\\', "/");
    let mut parts: Vec<&str> = Vec::new();
    for segment in unified.split('/') {
        match segment {
            "" | "." => {}
            ".." => {
                parts.pop();
            }
            other => parts.push(other),
        }
    }
    parts.join("/")
}

/// Counts of analyzer records that produced no scorable finding, keyed by
/// reason.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedTally {
    pub reasons: BTreeMap<String, u64>,
}

impl SkippedTally {
    pub fn bump(&mut self, reason: &str) {
        *self.reasons.entry(reason.to_string()).or_insert(0) += 1;
    }

    pub fn total(&self) -> u64 {
        self.reasons.values().sum()
    }

    pub fn merge(&mut self, other: &SkippedTally) {
        for (reason, count) in &other.reasons {
            *self.reasons.entry(reason.clone()).or_insert(0) += count;
        }
    }
}

/// Findings extracted from one analyzer document plus its skip tally.
#[derive(Debug, Clone, Default)]
pub struct ParsedFindings {
    pub findings: Vec<RawFinding>,
    pub skipped: SkippedTally,
}

/// Frequency granularity after cross-tool deduplication.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DedupMode {
    /// Distinct (CWE, file, 5-line bucket) locations count separately;
    /// identical locations reported by several tools collapse to one.
    #[default]
    Location,
    /// At most one occurrence of a CWE per repository.
    CweLevel,
}

/// Per-repository CWE frequency profile.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RepoFindingProfile {
    pub repo_id: String,
    /// `f_r(c)`: deduplicated finding frequency per CWE.
    pub frequencies: BTreeMap<u32, u32>,
    /// `N_r`: sum of all frequencies.
    pub total: u32,
    /// Findings excluded because their CWE could not be resolved.
    pub skipped: u64,
    /// Contributing (tool, file, line) tuples per CWE, deduplicated and
    /// sorted. Not part of the serialized profile document.
    pub provenance: BTreeMap<u32, Vec<(Tool, String, u32)>>,
}

/// Serialized form of a profile: `{repo_id, frequencies, total, skipped}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileDoc {
    pub repo_id: String,
    pub frequencies: Vec<FrequencyEntry>,
    pub total: u32,
    pub skipped: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrequencyEntry {
    pub cwe: u32,
    pub count: u32,
}

impl RepoFindingProfile {
    pub fn to_doc(&self) -> ProfileDoc {
        ProfileDoc {
            repo_id: self.repo_id.clone(),
            frequencies: self
                .frequencies
                .iter()
                .map(|(&cwe, &count)| FrequencyEntry { cwe, count })
                .collect(),
            total: self.total,
            skipped: self.skipped,
        }
    }

    pub fn from_doc(doc: ProfileDoc) -> Self {
        let frequencies: BTreeMap<u32, u32> =
            doc.frequencies.into_iter().map(|e| (e.cwe, e.count)).collect();
        RepoFindingProfile {
            repo_id: doc.repo_id,
            total: frequencies.values().sum(),
            frequencies,
            skipped: doc.skipped,
            provenance: BTreeMap::new(),
        }
    }
}

const LINE_BUCKET: u32 = 5;

/// Deduplicates findings across tools and aggregates per-repository CWE
/// frequencies.
///
/// Findings without a CWE are excluded first and counted into the owning
/// profile's `skipped`. The dedup key is `(repo, cwe, file, line bucket)`
/// where the bucket is the start line rounded down to a multiple of five;
/// in [`DedupMode::CweLevel`] the key degenerates to `(repo, cwe)`. Output
/// is deterministic regardless of input order.
pub fn normalize_and_dedup(
    findings: &[RawFinding],
    mode: DedupMode,
) -> BTreeMap<String, RepoFindingProfile> {
    let mut profiles: BTreeMap<String, RepoFindingProfile> = BTreeMap::new();
    let mut keys: BTreeSet<(String, u32, String, u32)> = BTreeSet::new();
    let mut skip_keys: BTreeSet<(String, Tool, String, String, u32, String)> = BTreeSet::new();

    for finding in findings {
        let profile = profiles
            .entry(finding.repo_id.clone())
            .or_insert_with(|| RepoFindingProfile {
                repo_id: finding.repo_id.clone(),
                ..RepoFindingProfile::default()
            });
        let Some(cwe_id) = finding.cwe_id else {
            // distinct unresolvable findings count once each
            let skip_key = (
                finding.repo_id.clone(),
                finding.tool,
                finding.rule_id.clone(),
                finding.file_path.clone(),
                finding.start_line,
                finding.message.clone(),
            );
            if skip_keys.insert(skip_key) {
                profile.skipped += 1;
            }
            continue;
        };
        let key = match mode {
            DedupMode::Location => (
                finding.repo_id.clone(),
                cwe_id,
                finding.file_path.clone(),
                finding.start_line - finding.start_line % LINE_BUCKET,
            ),
            DedupMode::CweLevel => (finding.repo_id.clone(), cwe_id, String::new(), 0),
        };
        if keys.insert(key) {
            *profile.frequencies.entry(cwe_id).or_insert(0) += 1;
            profile.total += 1;
        }
        let tuples = profile.provenance.entry(cwe_id).or_default();
        let tuple = (finding.tool, finding.file_path.clone(), finding.start_line);
        if !tuples.contains(&tuple) {
            tuples.push(tuple);
        }
    }

    for profile in profiles.values_mut() {
        for tuples in profile.provenance.values_mut() {
            tuples.sort();
        }
    }
    profiles
}

#[derive(Debug, thiserror::Error)]
pub enum FindingsError {
    #[error("not a SARIF document: {0}")]
    NotSarif(String),
    #[error("malformed record on line {line}: {message}")]
    MalformedRecord { line: usize, message: String },
    #[error("malformed scanner report: {0}")]
    MalformedReport(String),
}

#[cfg(test)]
mod tests {
    use super::*;

    fn finding(tool: Tool, cwe: Option<u32>, path: &str, line: u32) -> RawFinding {
        RawFinding {
            repo_id: "r1".into(),
            tool,
            rule_id: "rule".into(),
            cwe_id: cwe,
            file_path: normalize_path(path),
            start_line: line,
            end_line: line,
            message: String::new(),
        }
    }

    #[test]
    fn path_normalization() {
        assert_eq!(normalize_path("src\\db.py"), "src/db.py");
        assert_eq!(normalize_path("./src/./db.py"), "src/db.py");
        assert_eq!(normalize_path("src/sub/../db.py"), "src/db.py");
        assert_eq!(normalize_path("/src/db.py"), "src/db.py");
        assert_eq!(normalize_path("../../etc/passwd"), "etc/passwd");
        assert!(!normalize_path("a/../../b/../../c").contains(".."));
    }

    #[test]
    fn same_location_across_tools_collapses() {
        let findings = [
            finding(Tool::CodeQl, Some(89), "src/db.py", 42),
            finding(Tool::Joern, Some(89), "src/db.py", 44),
        ];
        let profiles = normalize_and_dedup(&findings, DedupMode::Location);
        assert_eq!(profiles["r1"].frequencies[&89], 1);
        assert_eq!(profiles["r1"].total, 1);
        // both tools still appear in provenance
        assert_eq!(profiles["r1"].provenance[&89].len(), 2);
    }

    #[test]
    fn distinct_locations_stay_distinct() {
        let findings = [
            finding(Tool::CodeQl, Some(89), "src/db.py", 42),
            finding(Tool::CodeQl, Some(89), "src/db.py", 90),
        ];
        let profiles = normalize_and_dedup(&findings, DedupMode::Location);
        assert_eq!(profiles["r1"].frequencies[&89], 2);
    }

    #[test]
    fn cwe_level_mode_caps_at_one() {
        let findings = [
            finding(Tool::CodeQl, Some(89), "src/db.py", 42),
            finding(Tool::CodeQl, Some(89), "src/other.py", 90),
            finding(Tool::Joern, Some(78), "src/sh.py", 1),
        ];
        let profiles = normalize_and_dedup(&findings, DedupMode::CweLevel);
        assert_eq!(profiles["r1"].frequencies[&89], 1);
        assert_eq!(profiles["r1"].frequencies[&78], 1);
        assert_eq!(profiles["r1"].total, 2);
    }

    #[test]
    fn cwe_less_findings_are_counted_as_skipped() {
        let findings = [
            finding(Tool::CodeQl, None, "a.py", 1),
            finding(Tool::CodeQl, Some(78), "b.py", 1),
        ];
        let profiles = normalize_and_dedup(&findings, DedupMode::Location);
        assert_eq!(profiles["r1"].skipped, 1);
        assert_eq!(profiles["r1"].total, 1);
    }

    #[test]
    fn order_independent_and_idempotent() {
        let mut findings = vec![
            finding(Tool::CodeQl, Some(89), "src/db.py", 42),
            finding(Tool::Joern, Some(89), "src/db.py", 44),
            finding(Tool::CodeQl, Some(78), "src/sh.py", 17),
            finding(Tool::McpScanner, Some(200), "src/info.py", 1),
        ];
        let forward = normalize_and_dedup(&findings, DedupMode::Location);
        findings.reverse();
        assert_eq!(normalize_and_dedup(&findings, DedupMode::Location), forward);

        let doubled: Vec<RawFinding> =
            findings.iter().chain(findings.iter()).cloned().collect();
        assert_eq!(normalize_and_dedup(&doubled, DedupMode::Location), forward);
    }

    #[test]
    fn per_repo_partitions_merge_to_the_same_profiles() {
        // processing disjoint repositories separately and merging equals
        // processing the whole batch
        let mut findings = vec![
            finding(Tool::CodeQl, Some(89), "a.py", 10),
            finding(Tool::Joern, Some(78), "b.py", 20),
        ];
        let mut other = finding(Tool::CodeQl, Some(22), "c.py", 5);
        other.repo_id = "r2".into();
        findings.push(other);

        let combined = normalize_and_dedup(&findings, DedupMode::Location);
        let mut merged = BTreeMap::new();
        for chunk in [&findings[..2], &findings[2..]] {
            merged.extend(normalize_and_dedup(chunk, DedupMode::Location));
        }
        assert_eq!(combined, merged);
    }

    #[test]
    fn profile_doc_round_trip() {
        let findings = [
            finding(Tool::CodeQl, Some(89), "src/db.py", 42),
            finding(Tool::CodeQl, None, "src/x.py", 1),
        ];
        let profiles = normalize_and_dedup(&findings, DedupMode::Location);
        let doc = profiles["r1"].to_doc();
        let json = serde_json::to_string(&doc).unwrap();
        let reparsed: ProfileDoc = serde_json::from_str(&json).unwrap();
        assert_eq!(reparsed, doc);
        let profile = RepoFindingProfile::from_doc(reparsed);
        assert_eq!(profile.frequencies, profiles["r1"].frequencies);
        assert_eq!(profile.total, profiles["r1"].total);
        assert_eq!(profile.skipped, profiles["r1"].skipped);
    }
}
