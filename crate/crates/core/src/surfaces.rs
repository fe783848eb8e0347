//! MCP threat-surface mapping, surface shares, and conditional
//! co-occurrence across repositories.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::catalog::RiskIndices;
use crate::findings::RepoFindingProfile;
use crate::tables::TableError;

/// The four MCP threat surfaces; CWEs outside the shipped mapping report
/// as `Unmapped` rather than being folded into a named surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ThreatSurface {
    Tool,
    Resource,
    Prompt,
    Protocol,
    Unmapped,
}

impl ThreatSurface {
    /// The named surfaces, in matrix axis order.
    pub const NAMED: [ThreatSurface; 4] = [
        ThreatSurface::Tool,
        ThreatSurface::Resource,
        ThreatSurface::Prompt,
        ThreatSurface::Protocol,
    ];

    pub fn label(self) -> &'static str {
        match self {
            ThreatSurface::Tool => "Tool",
            ThreatSurface::Resource => "Resource",
            ThreatSurface::Prompt => "Prompt",
            ThreatSurface::Protocol => "Protocol",
            ThreatSurface::Unmapped => "Unmapped",
        }
    }

    pub fn from_label(label: &str) -> Option<Self> {
        match label.trim() {
            "Tool" => Some(ThreatSurface::Tool),
            "Resource" => Some(ThreatSurface::Resource),
            "Prompt" => Some(ThreatSurface::Prompt),
            "Protocol" => Some(ThreatSurface::Protocol),
            "Unmapped" => Some(ThreatSurface::Unmapped),
            _ => None,
        }
    }
}

/// CWE to threat-surface lookup table.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SurfaceMap {
    map: BTreeMap<u32, ThreatSurface>,
}

impl SurfaceMap {
    /// The shipped mapping.
    pub fn builtin() -> Self {
        Self::parse_csv(include_str!("../data/surface_map.csv"))
            .expect("shipped surface map parses")
    }

    /// Parses two-column delimited text `cwe_id,surface` with a header row.
    pub fn parse_csv(text: &str) -> Result<Self, TableError> {
        let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
        let mut map = BTreeMap::new();
        for (index, record) in reader.records().enumerate() {
            let record = record.map_err(|e| TableError::Malformed {
                table: "surface map",
                line: index + 2,
                message: e.to_string(),
            })?;
            let (Some(cwe), Some(surface)) = (record.get(0), record.get(1)) else {
                return Err(TableError::Malformed {
                    table: "surface map",
                    line: index + 2,
                    message: "expected two columns".into(),
                });
            };
            let cwe_id: u32 = cwe.trim().parse().map_err(|_| TableError::Malformed {
                table: "surface map",
                line: index + 2,
                message: format!("bad CWE id `{cwe}`"),
            })?;
            let surface = ThreatSurface::from_label(surface).ok_or(TableError::Malformed {
                table: "surface map",
                line: index + 2,
                message: format!("unknown surface `{surface}`"),
            })?;
            map.insert(cwe_id, surface);
        }
        Ok(SurfaceMap { map })
    }

    /// Total lookup: CWEs outside the table map to `Unmapped`.
    pub fn surface_of(&self, cwe_id: u32) -> ThreatSurface {
        self.map.get(&cwe_id).copied().unwrap_or(ThreatSurface::Unmapped)
    }

    /// Number of mapped CWEs per named surface.
    pub fn counts(&self) -> BTreeMap<ThreatSurface, usize> {
        let mut counts: BTreeMap<ThreatSurface, usize> =
            ThreatSurface::NAMED.iter().map(|s| (*s, 0)).collect();
        for surface in self.map.values() {
            *counts.entry(*surface).or_insert(0) += 1;
        }
        counts
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, ThreatSurface)> + '_ {
        self.map.iter().map(|(&cwe, &surface)| (cwe, surface))
    }
}

/// One surface's share of corpus findings and of corpus exposure, percent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceShare {
    pub surface: ThreatSurface,
    pub finding_share: f64,
    pub exposure_share: f64,
}

/// Per-surface shares over the whole corpus, covering the four named
/// surfaces plus `Unmapped`. Each column sums to 100.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceShares {
    pub entries: Vec<SurfaceShare>,
}

impl SurfaceShares {
    pub fn get(&self, surface: ThreatSurface) -> Option<&SurfaceShare> {
        self.entries.iter().find(|e| e.surface == surface)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SurfaceError {
    #[error("corpus has no scorable findings")]
    EmptyCorpus,
    #[error("findings reference CWEs with no risk index: {0:?}")]
    MissingRiskIndex(Vec<u32>),
}

/// Corpus-wide finding and exposure shares per surface.
///
/// `finding_share(S) = 100 * sum of f_r(c) over c in S / total findings`;
/// `exposure_share(S)` weighs each term by `w(c)`. Denominators are
/// corpus-wide sums.
pub fn surface_shares(
    profiles: &BTreeMap<String, RepoFindingProfile>,
    indices: &RiskIndices,
    map: &SurfaceMap,
) -> Result<SurfaceShares, SurfaceError> {
    let mut finding_totals: BTreeMap<ThreatSurface, f64> = BTreeMap::new();
    let mut exposure_totals: BTreeMap<ThreatSurface, f64> = BTreeMap::new();
    let mut missing = BTreeSet::new();

    for profile in profiles.values() {
        for (&cwe, &freq) in &profile.frequencies {
            let Some(&weight) = indices.get(&cwe) else {
                missing.insert(cwe);
                continue;
            };
            let surface = map.surface_of(cwe);
            *finding_totals.entry(surface).or_insert(0.0) += f64::from(freq);
            *exposure_totals.entry(surface).or_insert(0.0) += f64::from(freq) * weight;
        }
    }
    if !missing.is_empty() {
        return Err(SurfaceError::MissingRiskIndex(missing.into_iter().collect()));
    }
    let findings_total: f64 = finding_totals.values().sum();
    let exposure_total: f64 = exposure_totals.values().sum();
    if findings_total == 0.0 {
        return Err(SurfaceError::EmptyCorpus);
    }

    let mut entries = Vec::new();
    for surface in ThreatSurface::NAMED.iter().copied().chain([ThreatSurface::Unmapped]) {
        let f = finding_totals.get(&surface).copied().unwrap_or(0.0);
        let e = exposure_totals.get(&surface).copied().unwrap_or(0.0);
        entries.push(SurfaceShare {
            surface,
            finding_share: 100.0 * f / findings_total,
            exposure_share: if exposure_total == 0.0 { 0.0 } else { 100.0 * e / exposure_total },
        });
    }
    Ok(SurfaceShares { entries })
}

/// Conditional co-occurrence of the four named surfaces over repositories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CooccurrenceMatrix {
    /// `cells[i][j]` = percentage of repositories with surface `NAMED[j]`
    /// among those with surface `NAMED[i]`; `None` when no repository has
    /// surface `NAMED[i]`.
    pub cells: [[Option<f64>; 4]; 4],
    /// Number of repositories exhibiting each named surface.
    pub support: BTreeMap<ThreatSurface, u32>,
}

impl CooccurrenceMatrix {
    pub fn cell(&self, from: ThreatSurface, to: ThreatSurface) -> Option<f64> {
        let i = ThreatSurface::NAMED.iter().position(|s| *s == from)?;
        let j = ThreatSurface::NAMED.iter().position(|s| *s == to)?;
        self.cells[i][j]
    }
}

/// Computes the conditional co-occurrence matrix.
///
/// A repository "has" surface S iff any CWE in its profile maps to S. Cell
/// values are unrounded; any rounding is display-only.
pub fn cooccurrence(
    profiles: &BTreeMap<String, RepoFindingProfile>,
    map: &SurfaceMap,
) -> CooccurrenceMatrix {
    let surface_sets: Vec<BTreeSet<ThreatSurface>> = profiles
        .values()
        .map(|p| p.frequencies.keys().map(|&c| map.surface_of(c)).collect())
        .collect();

    let mut support = BTreeMap::new();
    let mut cells = [[None; 4]; 4];
    for (i, a) in ThreatSurface::NAMED.iter().enumerate() {
        let with_a: Vec<&BTreeSet<ThreatSurface>> =
            surface_sets.iter().filter(|s| s.contains(a)).collect();
        support.insert(*a, with_a.len() as u32);
        if with_a.is_empty() {
            continue;
        }
        for (j, b) in ThreatSurface::NAMED.iter().enumerate() {
            let both = with_a.iter().filter(|s| s.contains(b)).count();
            cells[i][j] = Some(100.0 * both as f64 / with_a.len() as f64);
        }
    }
    CooccurrenceMatrix { cells, support }
}

/// A matrix cell at or above the chain threshold, annotated when it matches
/// one of the four recurring exploit chains.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainCell {
    pub from: ThreatSurface,
    pub to: ThreatSurface,
    pub percentage: f64,
    pub chain: Option<&'static ChainNarrative>,
}

/// A recurring multi-stage exploit chain between two surfaces.
#[derive(Debug, PartialEq, Eq, Serialize)]
pub struct ChainNarrative {
    pub id: &'static str,
    pub description: &'static str,
}

const CHAINS: [(ThreatSurface, ThreatSurface, ChainNarrative); 4] = [
    (
        ThreatSurface::Tool,
        ThreatSurface::Protocol,
        ChainNarrative {
            id: "tool-execution-behind-weak-protocol",
            description: "Injection-prone tool handlers become reachable where transport and \
                          session access control is weak.",
        },
    ),
    (
        ThreatSurface::Resource,
        ThreatSurface::Protocol,
        ChainNarrative {
            id: "resource-exposure-behind-weak-protocol",
            description: "Sensitive resource handling sits behind weak access control, opening \
                          direct data-theft paths.",
        },
    ),
    (
        ThreatSurface::Prompt,
        ThreatSurface::Resource,
        ChainNarrative {
            id: "prompt-driven-resource-theft",
            description: "Confused-deputy input handling coincides with sensitive resources the \
                          server can be steered to disclose or modify.",
        },
    ),
    (
        ThreatSurface::Prompt,
        ThreatSurface::Tool,
        ChainNarrative {
            id: "prompt-mediated-tool-execution",
            description: "Crafted inputs steer the server into invoking injection-prone tool \
                          handlers under its own privileges.",
        },
    ),
];

/// Off-diagonal cells at or above `threshold` percent, sorted by value
/// descending, annotated with chain narratives where applicable.
pub fn chain_report(matrix: &CooccurrenceMatrix, threshold: f64) -> Vec<ChainCell> {
    let mut cells = Vec::new();
    for from in ThreatSurface::NAMED {
        for to in ThreatSurface::NAMED {
            if from == to {
                continue;
            }
            let Some(percentage) = matrix.cell(from, to) else { continue };
            if percentage < threshold {
                continue;
            }
            let chain = CHAINS
                .iter()
                .find(|(a, b, _)| *a == from && *b == to)
                .map(|(_, _, narrative)| narrative);
            cells.push(ChainCell { from, to, percentage, chain });
        }
    }
    cells.sort_by(|a, b| {
        b.percentage
            .partial_cmp(&a.percentage)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| (a.from, a.to).cmp(&(b.from, b.to)))
    });
    cells
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn profile(repo_id: &str, freqs: &[(u32, u32)]) -> (String, RepoFindingProfile) {
        let frequencies: BTreeMap<u32, u32> = freqs.iter().copied().collect();
        (
            repo_id.to_string(),
            RepoFindingProfile {
                repo_id: repo_id.into(),
                total: frequencies.values().sum(),
                frequencies,
                skipped: 0,
                provenance: BTreeMap::new(),
            },
        )
    }

    fn corpus(repos: &[(&str, &[(u32, u32)])]) -> BTreeMap<String, RepoFindingProfile> {
        repos.iter().map(|(id, freqs)| profile(id, freqs)).collect()
    }

    #[test]
    fn shipped_map_row_lengths() {
        let map = SurfaceMap::builtin();
        let counts = map.counts();
        assert_eq!(counts[&ThreatSurface::Tool], 11);
        assert_eq!(counts[&ThreatSurface::Resource], 15);
        assert_eq!(counts[&ThreatSurface::Prompt], 9);
        assert_eq!(counts[&ThreatSurface::Protocol], 16);
        assert_eq!(map.len(), 51);
    }

    #[test]
    fn mapping_is_total() {
        let map = SurfaceMap::builtin();
        assert_eq!(map.surface_of(89), ThreatSurface::Tool);
        assert_eq!(map.surface_of(441), ThreatSurface::Prompt);
        assert_eq!(map.surface_of(732), ThreatSurface::Resource);
        assert_eq!(map.surface_of(862), ThreatSurface::Protocol);
        assert_eq!(map.surface_of(99999), ThreatSurface::Unmapped);
    }

    #[test]
    fn shares_on_three_finding_fixture() {
        // Tool@10, Tool@10, Protocol@80
        let profiles = corpus(&[("r1", &[(89, 2), (862, 1)])]);
        let indices: RiskIndices = [(89, 10.0), (862, 80.0)].into_iter().collect();
        let shares = surface_shares(&profiles, &indices, &SurfaceMap::builtin()).unwrap();
        let tool = shares.get(ThreatSurface::Tool).unwrap();
        let protocol = shares.get(ThreatSurface::Protocol).unwrap();
        assert!((tool.finding_share - 66.6667).abs() < 1e-3);
        assert!((protocol.finding_share - 33.3333).abs() < 1e-3);
        assert!((tool.exposure_share - 20.0).abs() < 1e-9);
        assert!((protocol.exposure_share - 80.0).abs() < 1e-9);
    }

    #[test]
    fn shares_sum_to_one_hundred() {
        let profiles = corpus(&[
            ("r1", &[(89, 2), (22, 1), (441, 1)]),
            ("r2", &[(666, 3), (862, 1)]),
        ]);
        let indices: RiskIndices =
            [(89, 83.3), (22, 33.3), (441, 5.0), (666, 13.3), (862, 33.3)]
                .into_iter()
                .collect();
        let shares = surface_shares(&profiles, &indices, &SurfaceMap::builtin()).unwrap();
        let f_sum: f64 = shares.entries.iter().map(|e| e.finding_share).sum();
        let e_sum: f64 = shares.entries.iter().map(|e| e.exposure_share).sum();
        assert!((f_sum - 100.0).abs() < 0.05);
        assert!((e_sum - 100.0).abs() < 0.05);
        // CWE-666 is outside the shipped mapping
        assert!(shares.get(ThreatSurface::Unmapped).unwrap().finding_share > 0.0);
    }

    #[test]
    fn single_surface_corpus_gets_everything() {
        let profiles = corpus(&[("r1", &[(89, 3)])]);
        let indices: RiskIndices = [(89, 50.0)].into_iter().collect();
        let shares = surface_shares(&profiles, &indices, &SurfaceMap::builtin()).unwrap();
        let tool = shares.get(ThreatSurface::Tool).unwrap();
        assert_eq!(tool.finding_share, 100.0);
        assert_eq!(tool.exposure_share, 100.0);
    }

    #[test]
    fn empty_corpus_is_an_error() {
        let profiles = corpus(&[]);
        let indices = RiskIndices::new();
        assert!(matches!(
            surface_shares(&profiles, &indices, &SurfaceMap::builtin()),
            Err(SurfaceError::EmptyCorpus)
        ));
    }

    #[test]
    fn cooccurrence_three_repo_fixture() {
        // r1: Tool+Protocol, r2: Protocol, r3: Tool (89=Tool, 862=Protocol)
        let profiles = corpus(&[
            ("r1", &[(89, 1), (862, 1)]),
            ("r2", &[(862, 1)]),
            ("r3", &[(89, 1)]),
        ]);
        let matrix = cooccurrence(&profiles, &SurfaceMap::builtin());
        assert_eq!(matrix.cell(ThreatSurface::Tool, ThreatSurface::Protocol), Some(50.0));
        assert_eq!(matrix.cell(ThreatSurface::Protocol, ThreatSurface::Tool), Some(50.0));
        assert_eq!(matrix.cell(ThreatSurface::Tool, ThreatSurface::Tool), Some(100.0));
        assert_eq!(matrix.cell(ThreatSurface::Prompt, ThreatSurface::Tool), None);
        assert_eq!(matrix.support[&ThreatSurface::Tool], 2);
        assert_eq!(matrix.support[&ThreatSurface::Prompt], 0);
    }

    #[test]
    fn cooccurrence_is_asymmetric() {
        // 4 repos: Tool in 1, Protocol in 3; the shared repo is r1
        let profiles = corpus(&[
            ("r1", &[(89, 1), (862, 1)]),
            ("r2", &[(862, 1)]),
            ("r3", &[(862, 1)]),
            ("r4", &[(200, 1)]),
        ]);
        let matrix = cooccurrence(&profiles, &SurfaceMap::builtin());
        assert_eq!(matrix.cell(ThreatSurface::Tool, ThreatSurface::Protocol), Some(100.0));
        let reverse = matrix.cell(ThreatSurface::Protocol, ThreatSurface::Tool).unwrap();
        assert!((reverse - 100.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn empty_corpus_yields_absent_cells() {
        let matrix = cooccurrence(&corpus(&[]), &SurfaceMap::builtin());
        assert!(matrix.cells.iter().flatten().all(Option::is_none));
    }

    #[test]
    fn chain_report_threshold_and_annotations() {
        let profiles = corpus(&[
            ("r1", &[(89, 1), (862, 1)]),
            ("r2", &[(862, 1)]),
            ("r3", &[(89, 1), (862, 1)]),
        ]);
        let matrix = cooccurrence(&profiles, &SurfaceMap::builtin());
        // Tool -> Protocol is 100%
        let report = chain_report(&matrix, 85.0);
        assert!(report
            .iter()
            .any(|c| c.from == ThreatSurface::Tool && c.to == ThreatSurface::Protocol));
        let annotated = report
            .iter()
            .find(|c| c.from == ThreatSurface::Tool && c.to == ThreatSurface::Protocol)
            .unwrap();
        assert_eq!(annotated.chain.unwrap().id, "tool-execution-behind-weak-protocol");
        // no diagonals in the report
        assert!(report.iter().all(|c| c.from != c.to));

        assert!(chain_report(&matrix, 101.0).is_empty());
    }

    #[test]
    fn chain_report_sorts_descending() {
        let mut matrix = CooccurrenceMatrix { cells: [[None; 4]; 4], support: BTreeMap::new() };
        matrix.cells[0][3] = Some(90.0); // Tool -> Protocol
        matrix.cells[1][3] = Some(95.0); // Resource -> Protocol
        let report = chain_report(&matrix, 85.0);
        assert_eq!(report.len(), 2);
        assert_eq!(report[0].from, ThreatSurface::Resource);
        assert_eq!(report[1].from, ThreatSurface::Tool);
    }
}
