//! CWE-CAPEC linking, pairwise likelihood imputation, and manual overrides.

use std::collections::{BTreeMap, BTreeSet};

use super::{
    AttackPatternRecord, CatalogError, CweCapecPair, ImputationFlag, Likelihood, WeaknessRecord,
};
use crate::tables::TableError;

/// Why a linked (CWE, CAPEC) candidate did not become a scored pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum DiscardReason {
    /// Neither the weakness LE nor the pattern LA is available.
    BothLikelihoodsMissing,
    /// The pattern has no Typical Severity and no override supplies one.
    SeverityMissing,
    /// The weakness lists no modes of introduction, so the likelihood
    /// product would vanish.
    NoIntroductionModes,
    /// The weakness lists no consequence entries, so the impact product
    /// would vanish.
    NoConsequences,
}

impl DiscardReason {
    pub fn label(self) -> &'static str {
        match self {
            DiscardReason::BothLikelihoodsMissing => "both_likelihoods_missing",
            DiscardReason::SeverityMissing => "severity_missing",
            DiscardReason::NoIntroductionModes => "no_introduction_modes",
            DiscardReason::NoConsequences => "no_consequences",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct DiscardedPair {
    pub cwe_id: u32,
    pub capec_id: u32,
    pub reason: DiscardReason,
}

/// Scored pairs plus the log of discarded link candidates.
#[derive(Debug, Clone)]
pub struct PairingOutcome {
    pub pairs: Vec<CweCapecPair>,
    pub discards: Vec<DiscardedPair>,
}

/// Links the catalogs and scores every resolvable (CWE, CAPEC) pair.
///
/// Links are the union of weakness-side and pattern-side references. A
/// missing LE is imputed from the pair's LA and vice versa; candidates with
/// both likelihoods missing, no severity, or a vanishing MI/CC count are
/// discarded with a reason. Discarding is not an error.
pub fn build_pairs(
    weaknesses: &[WeaknessRecord],
    patterns: &[AttackPatternRecord],
) -> PairingOutcome {
    let by_cwe: BTreeMap<u32, &WeaknessRecord> =
        weaknesses.iter().map(|w| (w.cwe_id, w)).collect();
    let by_capec: BTreeMap<u32, &AttackPatternRecord> =
        patterns.iter().map(|p| (p.capec_id, p)).collect();

    let mut links: BTreeSet<(u32, u32)> = BTreeSet::new();
    for weakness in weaknesses {
        for capec_id in &weakness.related_capec_ids {
            if by_capec.contains_key(capec_id) {
                links.insert((weakness.cwe_id, *capec_id));
            }
        }
    }
    for pattern in patterns {
        for cwe_id in &pattern.related_cwe_ids {
            if by_cwe.contains_key(cwe_id) {
                links.insert((*cwe_id, pattern.capec_id));
            }
        }
    }

    let mut outcome = PairingOutcome { pairs: Vec::new(), discards: Vec::new() };
    for (cwe_id, capec_id) in links {
        let weakness = by_cwe[&cwe_id];
        let pattern = by_capec[&capec_id];
        let mut discard = |reason| {
            outcome.discards.push(DiscardedPair { cwe_id, capec_id, reason });
        };

        let (le, la, flags) = match (weakness.likelihood_of_exploit, pattern.likelihood_of_attack) {
            (None, None) => {
                discard(DiscardReason::BothLikelihoodsMissing);
                continue;
            }
            (Some(le), Some(la)) => (le, la, BTreeSet::new()),
            (None, Some(la)) => (la, la, BTreeSet::from([ImputationFlag::LeFromLa])),
            (Some(le), None) => (le, le, BTreeSet::from([ImputationFlag::LaFromLe])),
        };
        let Some(ts) = pattern.typical_severity else {
            discard(DiscardReason::SeverityMissing);
            continue;
        };
        if weakness.mi_count() == 0 {
            discard(DiscardReason::NoIntroductionModes);
            continue;
        }
        if weakness.cc_count() == 0 {
            discard(DiscardReason::NoConsequences);
            continue;
        }

        outcome.pairs.push(CweCapecPair {
            cwe_id,
            capec_id: Some(capec_id),
            la: la.value(),
            le: le.value(),
            mi: weakness.mi_count(),
            cc: weakness.cc_count(),
            ts: ts.value(),
            flags,
        });
    }
    outcome
}

/// One row of the manual-completion table. Absent factor cells fall back to
/// catalog values for the pair being built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OverrideRow {
    pub cwe_id: u32,
    pub le: Option<u32>,
    pub la: Option<u32>,
    pub mi: Option<u32>,
    pub cc: Option<u32>,
    pub ts: Option<u32>,
    /// Substitute patterns to pair with; empty means one synthetic pair
    /// with no CAPEC id.
    pub capec_ids: Vec<u32>,
    pub note: String,
}

/// The manual-completion table for CWEs whose CAPEC metadata is missing.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OverrideTable {
    pub rows: Vec<OverrideRow>,
}

impl OverrideTable {
    /// The shipped default table.
    pub fn builtin() -> Self {
        Self::parse_csv(include_str!("../../data/overrides.csv"))
            .expect("shipped override table parses")
    }

    /// Parses delimited text with columns
    /// `cwe_id,le,la,mi,cc,ts,capec_ids,note`; `capec_ids` is
    /// semicolon-separated, empty cells mean "take from the catalog".
    pub fn parse_csv(text: &str) -> Result<Self, TableError> {
        let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
        let mut rows = Vec::new();
        for (index, record) in reader.deserialize::<RawOverrideRow>().enumerate() {
            let raw = record.map_err(|e| TableError::Malformed {
                table: "overrides",
                line: index + 2,
                message: e.to_string(),
            })?;
            rows.push(raw.into_row(index + 2)?);
        }
        Ok(OverrideTable { rows })
    }
}

#[derive(Debug, serde::Deserialize)]
struct RawOverrideRow {
    cwe_id: u32,
    le: Option<u32>,
    la: Option<u32>,
    mi: Option<u32>,
    cc: Option<u32>,
    ts: Option<u32>,
    #[serde(default)]
    capec_ids: String,
    #[serde(default)]
    note: String,
}

impl RawOverrideRow {
    fn into_row(self, line: usize) -> Result<OverrideRow, TableError> {
        let mut capec_ids = Vec::new();
        for part in self.capec_ids.split(';').filter(|s| !s.trim().is_empty()) {
            capec_ids.push(part.trim().parse().map_err(|_| TableError::Malformed {
                table: "overrides",
                line,
                message: format!("bad CAPEC id `{part}`"),
            })?);
        }
        for (factor, value, max) in [
            ("le", self.le, 3),
            ("la", self.la, 3),
            ("ts", self.ts, 5),
        ] {
            if let Some(v) = value {
                if v < 1 || v > max {
                    return Err(TableError::Malformed {
                        table: "overrides",
                        line,
                        message: format!("{factor}={v} outside 1..={max}"),
                    });
                }
            }
        }
        Ok(OverrideRow {
            cwe_id: self.cwe_id,
            le: self.le,
            la: self.la,
            mi: self.mi,
            cc: self.cc,
            ts: self.ts,
            capec_ids,
            note: self.note,
        })
    }
}

/// Applies the manual-completion table on top of built pairs.
///
/// Every pair belonging to an overridden CWE is replaced by pairs built
/// from the row: factors come from the row when given, otherwise from the
/// catalogs, with the same pairwise LE/LA imputation as [`build_pairs`].
/// Unresolvable factors and rows naming CWEs outside the catalog are
/// configuration errors.
pub fn apply_manual_overrides(
    pairs: Vec<CweCapecPair>,
    table: &OverrideTable,
    weaknesses: &[WeaknessRecord],
    patterns: &[AttackPatternRecord],
) -> Result<Vec<CweCapecPair>, CatalogError> {
    if table.rows.is_empty() {
        return Ok(pairs);
    }
    let by_cwe: BTreeMap<u32, &WeaknessRecord> =
        weaknesses.iter().map(|w| (w.cwe_id, w)).collect();
    let by_capec: BTreeMap<u32, &AttackPatternRecord> =
        patterns.iter().map(|p| (p.capec_id, p)).collect();
    let overridden: BTreeSet<u32> = table.rows.iter().map(|r| r.cwe_id).collect();

    let mut result: Vec<CweCapecPair> =
        pairs.into_iter().filter(|p| !overridden.contains(&p.cwe_id)).collect();

    for row in &table.rows {
        let weakness = by_cwe
            .get(&row.cwe_id)
            .ok_or(CatalogError::OverrideUnknownCwe { cwe_id: row.cwe_id })?;

        let targets: Vec<Option<u32>> = if row.capec_ids.is_empty() {
            vec![None]
        } else {
            row.capec_ids.iter().map(|id| Some(*id)).collect()
        };
        for capec_id in targets {
            let pattern = capec_id.and_then(|id| by_capec.get(&id).copied());
            let mut flags = BTreeSet::from([ImputationFlag::ManualOverride]);

            let catalog_le = weakness.likelihood_of_exploit.map(Likelihood::value);
            let catalog_la = pattern.and_then(|p| p.likelihood_of_attack).map(Likelihood::value);
            let mut le = row.le.or(catalog_le);
            let mut la = row.la.or(catalog_la);
            match (le, la) {
                (None, None) => {
                    return Err(CatalogError::OverrideUnresolved {
                        cwe_id: row.cwe_id,
                        factor: "likelihood",
                    })
                }
                (None, Some(v)) => {
                    le = Some(v);
                    flags.insert(ImputationFlag::LeFromLa);
                }
                (Some(v), None) => {
                    la = Some(v);
                    flags.insert(ImputationFlag::LaFromLe);
                }
                _ => {}
            }
            let ts = row
                .ts
                .or_else(|| pattern.and_then(|p| p.typical_severity).map(super::Severity::value))
                .ok_or(CatalogError::OverrideUnresolved { cwe_id: row.cwe_id, factor: "ts" })?;
            let mi = row.mi.unwrap_or_else(|| weakness.mi_count());
            let cc = row.cc.unwrap_or_else(|| weakness.cc_count());
            if mi == 0 {
                return Err(CatalogError::OverrideUnresolved { cwe_id: row.cwe_id, factor: "mi" });
            }
            if cc == 0 {
                return Err(CatalogError::OverrideUnresolved { cwe_id: row.cwe_id, factor: "cc" });
            }

            result.push(CweCapecPair {
                cwe_id: row.cwe_id,
                capec_id,
                la: la.expect("resolved above"),
                le: le.expect("resolved above"),
                mi,
                cc,
                ts,
                flags,
            });
        }
    }
    result.sort_by_key(|p| (p.cwe_id, p.capec_id));
    Ok(result)
}
