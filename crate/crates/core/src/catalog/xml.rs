//! Schema-driven parsing of the MITRE CWE (4.x) and CAPEC (3.x) XML catalogs.
//!
//! Matching is by local element name, so any namespaced 4.x/3.x minor
//! version parses the same way.

use std::collections::BTreeSet;

use roxmltree::{Document, Node};

use super::{
    AttackPatternRecord, CapecCatalog, CatalogError, ConsequenceEntry, CweCatalog, Likelihood,
    Severity, WeaknessRecord,
};

fn xml_error(doc: &str, err: roxmltree::Error) -> CatalogError {
    let _ = doc;
    let pos = err.pos();
    CatalogError::Xml {
        line: pos.row,
        col: pos.col,
        message: err.to_string(),
    }
}

fn id_attribute(node: Node, element: &'static str, attribute: &'static str) -> Result<u32, CatalogError> {
    let raw = node
        .attribute(attribute)
        .ok_or(CatalogError::MissingAttribute { element, attribute })?;
    raw.parse().map_err(|_| CatalogError::InvalidValue {
        what: "id",
        value: raw.to_string(),
    })
}

fn element_text(node: Node) -> String {
    node.text().unwrap_or_default().trim().to_string()
}

/// Parses a CWE catalog document (any 4.x minor version).
///
/// One record per `Weakness` element, in document order. Absent optional
/// fields remain absent. Duplicate CWE ids are an integrity error.
pub fn parse_cwe_catalog(xml: &[u8]) -> Result<CweCatalog, CatalogError> {
    let text = std::str::from_utf8(xml)?;
    let doc = Document::parse(text).map_err(|e| xml_error(text, e))?;
    let root = doc.root_element();
    if root.tag_name().name() != "Weakness_Catalog" {
        return Err(CatalogError::UnexpectedRoot {
            expected: "Weakness_Catalog",
            found: root.tag_name().name().to_string(),
        });
    }
    let version = root.attribute("Version").unwrap_or_default().to_string();

    let mut weaknesses = Vec::new();
    let mut seen = BTreeSet::new();
    for node in root.descendants().filter(|n| n.tag_name().name() == "Weakness") {
        let record = parse_weakness(node)?;
        if !seen.insert(record.cwe_id) {
            return Err(CatalogError::DuplicateId { kind: "CWE", id: record.cwe_id });
        }
        weaknesses.push(record);
    }
    Ok(CweCatalog { version, weaknesses })
}

fn parse_weakness(node: Node) -> Result<WeaknessRecord, CatalogError> {
    let cwe_id = id_attribute(node, "Weakness", "ID")?;
    let name = node
        .attribute("Name")
        .ok_or(CatalogError::MissingAttribute { element: "Weakness", attribute: "Name" })?
        .to_string();

    let mut record = WeaknessRecord {
        cwe_id,
        name,
        likelihood_of_exploit: None,
        modes_of_introduction: Vec::new(),
        consequence_entries: Vec::new(),
        related_capec_ids: Vec::new(),
    };

    for child in node.children().filter(Node::is_element) {
        match child.tag_name().name() {
            "Likelihood_Of_Exploit" => {
                record.likelihood_of_exploit = Likelihood::from_label(&element_text(child))?;
            }
            "Modes_Of_Introduction" => {
                for intro in child.children().filter(|n| n.tag_name().name() == "Introduction") {
                    let phase = intro
                        .children()
                        .find(|n| n.tag_name().name() == "Phase")
                        .map(element_text)
                        .unwrap_or_default();
                    record.modes_of_introduction.push(phase);
                }
            }
            "Common_Consequences" => {
                for cons in child.children().filter(|n| n.tag_name().name() == "Consequence") {
                    let impacts = cons
                        .children()
                        .filter(|n| n.tag_name().name() == "Impact")
                        .map(element_text)
                        .collect();
                    record.consequence_entries.push(ConsequenceEntry { impacts });
                }
            }
            "Related_Attack_Patterns" => {
                for rel in child
                    .children()
                    .filter(|n| n.tag_name().name() == "Related_Attack_Pattern")
                {
                    record
                        .related_capec_ids
                        .push(id_attribute(rel, "Related_Attack_Pattern", "CAPEC_ID")?);
                }
            }
            _ => {}
        }
    }
    Ok(record)
}

/// Parses a CAPEC catalog document (any 3.x minor version).
///
/// Deprecated patterns are retained; their "DEPRECATED:" name prefix is
/// preserved verbatim.
pub fn parse_capec_catalog(xml: &[u8]) -> Result<CapecCatalog, CatalogError> {
    let text = std::str::from_utf8(xml)?;
    let doc = Document::parse(text).map_err(|e| xml_error(text, e))?;
    let root = doc.root_element();
    if root.tag_name().name() != "Attack_Pattern_Catalog" {
        return Err(CatalogError::UnexpectedRoot {
            expected: "Attack_Pattern_Catalog",
            found: root.tag_name().name().to_string(),
        });
    }
    let version = root.attribute("Version").unwrap_or_default().to_string();

    let mut patterns = Vec::new();
    let mut seen = BTreeSet::new();
    for node in root
        .descendants()
        .filter(|n| n.tag_name().name() == "Attack_Pattern")
    {
        let record = parse_attack_pattern(node)?;
        if !seen.insert(record.capec_id) {
            return Err(CatalogError::DuplicateId { kind: "CAPEC", id: record.capec_id });
        }
        patterns.push(record);
    }
    Ok(CapecCatalog { version, patterns })
}

fn parse_attack_pattern(node: Node) -> Result<AttackPatternRecord, CatalogError> {
    let capec_id = id_attribute(node, "Attack_Pattern", "ID")?;
    let name = node
        .attribute("Name")
        .ok_or(CatalogError::MissingAttribute { element: "Attack_Pattern", attribute: "Name" })?
        .to_string();

    let mut record = AttackPatternRecord {
        capec_id,
        name,
        likelihood_of_attack: None,
        typical_severity: None,
        related_cwe_ids: Vec::new(),
    };

    for child in node.children().filter(Node::is_element) {
        match child.tag_name().name() {
            "Likelihood_Of_Attack" => {
                record.likelihood_of_attack = Likelihood::from_label(&element_text(child))?;
            }
            "Typical_Severity" => {
                record.typical_severity = Severity::from_label(&element_text(child))?;
            }
            "Related_Weaknesses" => {
                for rel in child.children().filter(|n| n.tag_name().name() == "Related_Weakness") {
                    record
                        .related_cwe_ids
                        .push(id_attribute(rel, "Related_Weakness", "CWE_ID")?);
                }
            }
            _ => {}
        }
    }
    Ok(record)
}
