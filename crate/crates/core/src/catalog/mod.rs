//! CWE/CAPEC catalog ingestion and per-weakness Risk Index computation.
//!
//! The flow is: parse both catalogs ([`parse_cwe_catalog`],
//! [`parse_capec_catalog`]), link them into scored pairs ([`build_pairs`]),
//! apply the shipped manual overrides ([`apply_manual_overrides`]), and
//! normalize per-CWE raw risk to a 0-100 index ([`compute_cwe_risk_index`]).

mod pairs;
mod stats;
mod xml;

pub use pairs::{
    apply_manual_overrides, build_pairs, DiscardReason, DiscardedPair, OverrideRow, OverrideTable,
    PairingOutcome,
};
pub use stats::{catalog_stats, CatalogStats, DistributionStats, ImpactCount};
pub use xml::{parse_capec_catalog, parse_cwe_catalog};

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

/// Ordinal likelihood scale shared by CWE Likelihood-of-Exploit and CAPEC
/// Likelihood-of-Attack. Low/Medium/High map to 1/2/3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Likelihood {
    Low,
    Medium,
    High,
}

impl Likelihood {
    pub fn value(self) -> u32 {
        match self {
            Likelihood::Low => 1,
            Likelihood::Medium => 2,
            Likelihood::High => 3,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Likelihood::Low => "Low",
            Likelihood::Medium => "Medium",
            Likelihood::High => "High",
        }
    }

    /// Maps a catalog label to a level. Empty and "Unknown" labels are
    /// treated as absent, anything else is rejected.
    pub fn from_label(label: &str) -> Result<Option<Self>, CatalogError> {
        match label.trim() {
            "Low" => Ok(Some(Likelihood::Low)),
            "Medium" => Ok(Some(Likelihood::Medium)),
            "High" => Ok(Some(Likelihood::High)),
            "" | "Unknown" => Ok(None),
            other => Err(CatalogError::InvalidValue {
                what: "likelihood",
                value: other.to_string(),
            }),
        }
    }
}

/// Ordinal severity scale for CAPEC Typical Severity. Very Low .. Very High
/// map to 1..5.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Severity {
    VeryLow,
    Low,
    Medium,
    High,
    VeryHigh,
}

impl Severity {
    pub fn value(self) -> u32 {
        match self {
            Severity::VeryLow => 1,
            Severity::Low => 2,
            Severity::Medium => 3,
            Severity::High => 4,
            Severity::VeryHigh => 5,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Severity::VeryLow => "Very Low",
            Severity::Low => "Low",
            Severity::Medium => "Medium",
            Severity::High => "High",
            Severity::VeryHigh => "Very High",
        }
    }

    pub fn from_label(label: &str) -> Result<Option<Self>, CatalogError> {
        match label.trim() {
            "Very Low" => Ok(Some(Severity::VeryLow)),
            "Low" => Ok(Some(Severity::Low)),
            "Medium" => Ok(Some(Severity::Medium)),
            "High" => Ok(Some(Severity::High)),
            "Very High" => Ok(Some(Severity::VeryHigh)),
            "" | "Unknown" => Ok(None),
            other => Err(CatalogError::InvalidValue {
                what: "severity",
                value: other.to_string(),
            }),
        }
    }
}

/// One Common Consequences block of a weakness; a block may carry several
/// impact labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsequenceEntry {
    pub impacts: Vec<String>,
}

/// One CWE entry, as parsed. Absent optional fields stay absent; no
/// defaulting happens at parse time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeaknessRecord {
    pub cwe_id: u32,
    pub name: String,
    pub likelihood_of_exploit: Option<Likelihood>,
    /// Lifecycle-phase labels from Modes_Of_Introduction.
    pub modes_of_introduction: Vec<String>,
    pub consequence_entries: Vec<ConsequenceEntry>,
    pub related_capec_ids: Vec<u32>,
}

impl WeaknessRecord {
    /// MI count used by the likelihood formula.
    pub fn mi_count(&self) -> u32 {
        self.modes_of_introduction.len() as u32
    }

    /// CC count used by the impact formula: consequence blocks, not
    /// individual impact labels.
    pub fn cc_count(&self) -> u32 {
        self.consequence_entries.len() as u32
    }
}

/// One CAPEC entry, as parsed. Deprecated patterns are retained, with the
/// catalog's "DEPRECATED:" name prefix preserved verbatim.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttackPatternRecord {
    pub capec_id: u32,
    pub name: String,
    pub likelihood_of_attack: Option<Likelihood>,
    pub typical_severity: Option<Severity>,
    pub related_cwe_ids: Vec<u32>,
}

/// Parsed CWE catalog with its version metadata.
#[derive(Debug, Clone)]
pub struct CweCatalog {
    pub version: String,
    pub weaknesses: Vec<WeaknessRecord>,
}

impl CweCatalog {
    pub fn get(&self, cwe_id: u32) -> Option<&WeaknessRecord> {
        self.weaknesses.iter().find(|w| w.cwe_id == cwe_id)
    }
}

/// Parsed CAPEC catalog with its version metadata.
#[derive(Debug, Clone)]
pub struct CapecCatalog {
    pub version: String,
    pub patterns: Vec<AttackPatternRecord>,
}

impl CapecCatalog {
    pub fn get(&self, capec_id: u32) -> Option<&AttackPatternRecord> {
        self.patterns.iter().find(|p| p.capec_id == capec_id)
    }
}

/// Records which factors of a scored pair were filled in rather than read
/// straight from the catalogs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ImputationFlag {
    LeFromLa,
    LaFromLe,
    ManualOverride,
}

impl ImputationFlag {
    pub fn label(self) -> &'static str {
        match self {
            ImputationFlag::LeFromLa => "LE_FROM_LA",
            ImputationFlag::LaFromLe => "LA_FROM_LE",
            ImputationFlag::ManualOverride => "MANUAL_OVERRIDE",
        }
    }
}

/// A fully populated CWE-CAPEC scoring pair. Pairs with unresolvable
/// factors are never constructed; they are discarded with a reason instead.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CweCapecPair {
    pub cwe_id: u32,
    /// Absent for manual-override rows that supply no substitute pattern.
    pub capec_id: Option<u32>,
    pub la: u32,
    pub le: u32,
    pub mi: u32,
    pub cc: u32,
    pub ts: u32,
    pub flags: BTreeSet<ImputationFlag>,
}

impl CweCapecPair {
    /// LA * LE * MI.
    pub fn likelihood(&self) -> u32 {
        self.la * self.le * self.mi
    }

    /// TS * CC.
    pub fn impact(&self) -> u32 {
        self.ts * self.cc
    }

    /// likelihood * impact.
    pub fn raw_risk(&self) -> u32 {
        self.likelihood() * self.impact()
    }
}

/// A CWE's scored pairs and final Risk Index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CweRiskEntry {
    pub cwe_id: u32,
    pub pairs: Vec<CweCapecPair>,
    /// Aggregate raw risk: the maximum over this CWE's pairs (worst-case
    /// pattern).
    pub raw_risk: u32,
    /// 100 * raw_risk / max aggregate raw risk over the catalog.
    pub risk_index: f64,
}

impl CweRiskEntry {
    /// Union of the imputation flags across this CWE's pairs.
    pub fn flags(&self) -> BTreeSet<ImputationFlag> {
        self.pairs.iter().flat_map(|p| p.flags.iter().copied()).collect()
    }
}

/// Map from CWE id to its 0-100 Risk Index, the weight `w(c)` used by
/// repository scoring.
pub type RiskIndices = BTreeMap<u32, f64>;

/// Computes per-CWE aggregate raw risk and the ratio-to-maximum Risk Index.
///
/// Exactly one entry attains 100.0 whenever the input is non-empty (ties on
/// the maximum raw risk would each score 100, which the shipped catalogs do
/// not produce); an empty pair list is an error because nothing is scorable.
pub fn compute_cwe_risk_index(
    pairs: &[CweCapecPair],
) -> Result<BTreeMap<u32, CweRiskEntry>, CatalogError> {
    if pairs.is_empty() {
        return Err(CatalogError::NoScorablePairs);
    }
    let mut entries: BTreeMap<u32, CweRiskEntry> = BTreeMap::new();
    for pair in pairs {
        let entry = entries.entry(pair.cwe_id).or_insert_with(|| CweRiskEntry {
            cwe_id: pair.cwe_id,
            pairs: Vec::new(),
            raw_risk: 0,
            risk_index: 0.0,
        });
        entry.raw_risk = entry.raw_risk.max(pair.raw_risk());
        entry.pairs.push(pair.clone());
    }
    for entry in entries.values_mut() {
        entry.pairs.sort_by_key(|p| (p.capec_id, p.raw_risk()));
    }
    let top = entries.values().map(|e| e.raw_risk).max().expect("non-empty");
    for entry in entries.values_mut() {
        entry.risk_index = 100.0 * f64::from(entry.raw_risk) / f64::from(top);
    }
    Ok(entries)
}

/// Extracts the `cwe_id -> risk_index` weight map from computed entries.
pub fn risk_indices(entries: &BTreeMap<u32, CweRiskEntry>) -> RiskIndices {
    entries.iter().map(|(id, e)| (*id, e.risk_index)).collect()
}

#[derive(Debug, thiserror::Error)]
pub enum CatalogError {
    #[error("malformed XML at line {line}, column {col}: {message}")]
    Xml { line: u32, col: u32, message: String },
    #[error("catalog is not valid UTF-8: {0}")]
    Encoding(#[from] std::str::Utf8Error),
    #[error("expected a `{expected}` root element, found `{found}`")]
    UnexpectedRoot { expected: &'static str, found: String },
    #[error("missing attribute `{attribute}` on `{element}`")]
    MissingAttribute { element: &'static str, attribute: &'static str },
    #[error("invalid {what} value `{value}`")]
    InvalidValue { what: &'static str, value: String },
    #[error("duplicate {kind} id {id}")]
    DuplicateId { kind: &'static str, id: u32 },
    #[error("no scorable CWE-CAPEC pairs in the catalog")]
    NoScorablePairs,
    #[error("override references CWE {cwe_id}, which is not in the catalog")]
    OverrideUnknownCwe { cwe_id: u32 },
    #[error("override for CWE {cwe_id} leaves {factor} unresolved")]
    OverrideUnresolved { cwe_id: u32, factor: &'static str },
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(cwe_id: u32, capec_id: u32, factors: [u32; 5]) -> CweCapecPair {
        let [la, le, mi, cc, ts] = factors;
        CweCapecPair {
            cwe_id,
            capec_id: Some(capec_id),
            la,
            le,
            mi,
            cc,
            ts,
            flags: BTreeSet::new(),
        }
    }

    #[test]
    fn ordinal_anchor_values() {
        assert_eq!(Likelihood::High.value(), 3);
        assert_eq!(Likelihood::Low.value(), 1);
        assert_eq!(Severity::VeryHigh.value(), 5);
        assert_eq!(Severity::VeryLow.value(), 1);
    }

    #[test]
    fn unknown_labels_are_absent() {
        assert_eq!(Likelihood::from_label("Unknown").unwrap(), None);
        assert_eq!(Severity::from_label("").unwrap(), None);
        assert!(Likelihood::from_label("Sometimes").is_err());
    }

    #[test]
    fn pair_products() {
        let p = pair(639, 0, [3, 3, 1, 3, 5]);
        assert_eq!(p.likelihood(), 9);
        assert_eq!(p.impact(), 15);
        assert_eq!(p.raw_risk(), 135);
    }

    #[test]
    fn single_pair_self_normalizes_to_100() {
        let entries = compute_cwe_risk_index(&[pair(89, 66, [3, 3, 2, 5, 5])]).unwrap();
        assert_eq!(entries[&89].risk_index, 100.0);
    }

    #[test]
    fn ratio_to_catalog_maximum() {
        let pairs = vec![pair(639, 1, [3, 3, 1, 3, 5]), pair(732, 17, [3, 3, 4, 3, 5])];
        let entries = compute_cwe_risk_index(&pairs).unwrap();
        assert_eq!(entries[&639].raw_risk, 135);
        assert_eq!(entries[&732].raw_risk, 540);
        assert_eq!(entries[&639].risk_index, 25.0);
        assert_eq!(entries[&732].risk_index, 100.0);
    }

    #[test]
    fn aggregate_is_max_over_pairs() {
        let pairs = vec![pair(89, 66, [3, 3, 2, 5, 5]), pair(89, 7, [3, 3, 2, 5, 4])];
        let entries = compute_cwe_risk_index(&pairs).unwrap();
        assert_eq!(entries[&89].raw_risk, 450);
        assert_eq!(entries[&89].pairs.len(), 2);
    }

    #[test]
    fn empty_pairs_is_an_error() {
        assert!(matches!(
            compute_cwe_risk_index(&[]),
            Err(CatalogError::NoScorablePairs)
        ));
    }

    #[test]
    fn index_invariant_under_reordering() {
        let mut pairs = vec![
            pair(89, 66, [3, 3, 2, 5, 5]),
            pair(732, 17, [3, 3, 4, 3, 5]),
            pair(441, 219, [3, 1, 1, 3, 3]),
        ];
        let forward = compute_cwe_risk_index(&pairs).unwrap();
        pairs.reverse();
        let reversed = compute_cwe_risk_index(&pairs).unwrap();
        assert_eq!(forward, reversed);
    }
}
