//! SARIF 2.1.0 ingestion.
//!
//! CWE identity is read from rule metadata tags of the form
//! `external/cwe/cwe-NNN` or from a `cwe` property on the rule or result.

use serde::Deserialize;

use super::{normalize_path, FindingsError, ParsedFindings, RawFinding, SkippedTally, Tool};

#[derive(Debug, Deserialize)]
struct SarifDoc {
    runs: Vec<SarifRun>,
}

#[derive(Debug, Deserialize)]
struct SarifRun {
    #[serde(default)]
    tool: SarifTool,
    #[serde(default)]
    results: Vec<SarifResult>,
}

#[derive(Debug, Default, Deserialize)]
struct SarifTool {
    #[serde(default)]
    driver: SarifDriver,
}

#[derive(Debug, Default, Deserialize)]
struct SarifDriver {
    #[serde(default)]
    rules: Vec<SarifRule>,
}

#[derive(Debug, Deserialize)]
struct SarifRule {
    id: String,
    #[serde(default)]
    properties: SarifProperties,
}

#[derive(Debug, Default, Deserialize)]
struct SarifProperties {
    #[serde(default)]
    tags: Vec<String>,
    #[serde(default)]
    cwe: Option<CweProperty>,
}

/// A `cwe` property may be a number, a string like "CWE-89" or "89", or a
/// list of either.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum CweProperty {
    Number(u32),
    Text(String),
    List(Vec<CweProperty>),
}

impl CweProperty {
    fn first_id(&self) -> Option<u32> {
        match self {
            CweProperty::Number(n) => Some(*n),
            CweProperty::Text(s) => parse_cwe_text(s),
            CweProperty::List(items) => items.iter().find_map(CweProperty::first_id),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
struct SarifResult {
    #[serde(default)]
    rule_id: Option<String>,
    #[serde(default)]
    rule_index: Option<usize>,
    #[serde(default)]
    message: SarifMessage,
    #[serde(default)]
    locations: Vec<SarifLocation>,
    #[serde(default)]
    properties: SarifProperties,
}

#[derive(Debug, Default, Deserialize)]
struct SarifMessage {
    #[serde(default)]
    text: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
struct SarifLocation {
    #[serde(default)]
    physical_location: Option<PhysicalLocation>,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
struct PhysicalLocation {
    #[serde(default)]
    artifact_location: Option<ArtifactLocation>,
    #[serde(default)]
    region: Option<Region>,
}

#[derive(Debug, Deserialize)]
struct ArtifactLocation {
    #[serde(default)]
    uri: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
struct Region {
    #[serde(default)]
    start_line: Option<u32>,
    #[serde(default)]
    end_line: Option<u32>,
}

/// Extracts "cwe-089" / "CWE-89" / "89" style identifiers.
fn parse_cwe_text(text: &str) -> Option<u32> {
    let trimmed = text.trim();
    let digits = trimmed
        .strip_prefix("CWE-")
        .or_else(|| trimmed.strip_prefix("cwe-"))
        .unwrap_or(trimmed);
    // all-zero ids become empty after trimming and are rejected by parse
    digits.trim_start_matches('0').parse().ok()
}

fn cwe_from_tags(tags: &[String]) -> Option<u32> {
    tags.iter().find_map(|tag| {
        let rest = tag
            .strip_prefix("external/cwe/")
            .or_else(|| tag.strip_prefix("EXTERNAL/CWE/"))?;
        parse_cwe_text(rest)
    })
}

/// Parses one SARIF document into findings attributed to CODEQL.
///
/// One finding per result with a resolvable location; results without a
/// resolvable CWE keep `cwe_id` absent and are counted in the skipped
/// tally, as are results with no usable location. A document with zero
/// runs yields an empty list.
pub fn parse_sarif(bytes: &[u8], repo_id: &str) -> Result<ParsedFindings, FindingsError> {
    let doc: SarifDoc =
        serde_json::from_slice(bytes).map_err(|e| FindingsError::NotSarif(e.to_string()))?;

    let mut findings = Vec::new();
    let mut skipped = SkippedTally::default();
    for run in &doc.runs {
        for result in &run.results {
            let rule = result
                .rule_index
                .and_then(|i| run.tool.driver.rules.get(i))
                .or_else(|| {
                    result.rule_id.as_deref().and_then(|id| {
                        run.tool.driver.rules.iter().find(|r| r.id == id)
                    })
                });
            let rule_id = result
                .rule_id
                .clone()
                .or_else(|| rule.map(|r| r.id.clone()))
                .unwrap_or_else(|| "<unknown-rule>".to_string());

            let cwe_id = result
                .properties
                .cwe
                .as_ref()
                .and_then(CweProperty::first_id)
                .or_else(|| rule.and_then(|r| r.properties.cwe.as_ref().and_then(CweProperty::first_id)))
                .or_else(|| rule.and_then(|r| cwe_from_tags(&r.properties.tags)));

            let location = result.locations.iter().find_map(|loc| {
                let physical = loc.physical_location.as_ref()?;
                let uri = physical.artifact_location.as_ref()?.uri.as_deref()?;
                let region = physical.region.as_ref();
                let start = region.and_then(|r| r.start_line).unwrap_or(1).max(1);
                let end = region.and_then(|r| r.end_line).unwrap_or(start).max(start);
                Some((normalize_path(uri), start, end))
            });
            let Some((file_path, start_line, end_line)) = location else {
                skipped.bump("no_location");
                continue;
            };
            if cwe_id.is_none() {
                skipped.bump("no_cwe");
            }

            findings.push(RawFinding {
                repo_id: repo_id.to_string(),
                tool: Tool::CodeQl,
                rule_id,
                cwe_id,
                file_path,
                start_line,
                end_line,
                message: result.message.text.clone().unwrap_or_default(),
            });
        }
    }
    Ok(ParsedFindings { findings, skipped })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(results: &str, rules: &str) -> String {
        format!(
            r#"{{"version":"2.1.0","runs":[{{"tool":{{"driver":{{"name":"CodeQL","rules":[{rules}]}}}},"results":[{results}]}}]}}"#
        )
    }

    const SQLI_RULE: &str = r#"{"id":"py/sql-injection","properties":{"tags":["security","external/cwe/cwe-089"]}}"#;

    #[test]
    fn resolves_cwe_from_rule_tag() {
        let json = doc(
            r#"{"ruleId":"py/sql-injection","ruleIndex":0,"message":{"text":"tainted"},
                "locations":[{"physicalLocation":{"artifactLocation":{"uri":"src/db.py"},
                "region":{"startLine":42}}}]}"#,
            SQLI_RULE,
        );
        let parsed = parse_sarif(json.as_bytes(), "r1").unwrap();
        assert_eq!(parsed.findings.len(), 1);
        let f = &parsed.findings[0];
        assert_eq!(f.cwe_id, Some(89));
        assert_eq!(f.file_path, "src/db.py");
        assert_eq!(f.start_line, 42);
        assert_eq!(f.tool, Tool::CodeQl);
        assert_eq!(parsed.skipped.total(), 0);
    }

    #[test]
    fn two_results_share_one_rule() {
        let json = doc(
            r#"{"ruleId":"py/sql-injection","locations":[{"physicalLocation":{"artifactLocation":{"uri":"a.py"},"region":{"startLine":1}}}]},
               {"ruleId":"py/sql-injection","locations":[{"physicalLocation":{"artifactLocation":{"uri":"b.py"},"region":{"startLine":2}}}]}"#,
            SQLI_RULE,
        );
        let parsed = parse_sarif(json.as_bytes(), "r1").unwrap();
        assert_eq!(parsed.findings.len(), 2);
        assert!(parsed.findings.iter().all(|f| f.rule_id == "py/sql-injection"));
    }

    #[test]
    fn rule_without_cwe_tag_keeps_absent_cwe_and_tallies() {
        let json = doc(
            r#"{"ruleId":"py/unused","locations":[{"physicalLocation":{"artifactLocation":{"uri":"a.py"},"region":{"startLine":1}}}]}"#,
            r#"{"id":"py/unused","properties":{"tags":["maintainability"]}}"#,
        );
        let parsed = parse_sarif(json.as_bytes(), "r1").unwrap();
        assert_eq!(parsed.findings.len(), 1);
        assert_eq!(parsed.findings[0].cwe_id, None);
        assert_eq!(parsed.skipped.reasons["no_cwe"], 1);
    }

    #[test]
    fn cwe_property_on_result_wins() {
        let json = doc(
            r#"{"ruleId":"py/sql-injection","properties":{"cwe":"CWE-564"},
                "locations":[{"physicalLocation":{"artifactLocation":{"uri":"a.py"},"region":{"startLine":1}}}]}"#,
            SQLI_RULE,
        );
        let parsed = parse_sarif(json.as_bytes(), "r1").unwrap();
        assert_eq!(parsed.findings[0].cwe_id, Some(564));
    }

    #[test]
    fn result_without_location_is_skipped() {
        let json = doc(r#"{"ruleId":"py/sql-injection","message":{"text":"x"}}"#, SQLI_RULE);
        let parsed = parse_sarif(json.as_bytes(), "r1").unwrap();
        assert!(parsed.findings.is_empty());
        assert_eq!(parsed.skipped.reasons["no_location"], 1);
    }

    #[test]
    fn zero_runs_is_empty_not_error() {
        let parsed = parse_sarif(br#"{"version":"2.1.0","runs":[]}"#, "r1").unwrap();
        assert!(parsed.findings.is_empty());
    }

    #[test]
    fn non_sarif_input_is_a_parse_error() {
        assert!(matches!(parse_sarif(b"not json", "r1"), Err(FindingsError::NotSarif(_))));
        assert!(matches!(
            parse_sarif(br#"{"some":"json"}"#, "r1"),
            Err(FindingsError::NotSarif(_))
        ));
    }

    #[test]
    fn cwe_text_forms_parse() {
        assert_eq!(parse_cwe_text("CWE-89"), Some(89));
        assert_eq!(parse_cwe_text("cwe-089"), Some(89));
        assert_eq!(parse_cwe_text("89"), Some(89));
        assert_eq!(parse_cwe_text("089"), Some(89));
        assert_eq!(parse_cwe_text("none"), None);
    }
}
