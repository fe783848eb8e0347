//! Exploratory statistics over the raw (pre-imputation) catalogs.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{AttackPatternRecord, WeaknessRecord};

/// Mean/median/standard deviation and a histogram of an integer count
/// distribution. The standard deviation is the population form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionStats {
    pub mean: f64,
    pub median: f64,
    pub std_dev: f64,
    pub histogram: BTreeMap<u32, u32>,
}

impl DistributionStats {
    fn from_counts(counts: &[u32]) -> Self {
        if counts.is_empty() {
            return DistributionStats { mean: 0.0, median: 0.0, std_dev: 0.0, histogram: BTreeMap::new() };
        }
        let n = counts.len() as f64;
        let mean = counts.iter().map(|&c| f64::from(c)).sum::<f64>() / n;
        let var = counts
            .iter()
            .map(|&c| (f64::from(c) - mean).powi(2))
            .sum::<f64>()
            / n;
        let mut sorted = counts.to_vec();
        sorted.sort_unstable();
        let median = if sorted.len() % 2 == 1 {
            f64::from(sorted[sorted.len() / 2])
        } else {
            f64::from(sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2]) / 2.0
        };
        let mut histogram = BTreeMap::new();
        for &c in counts {
            *histogram.entry(c).or_insert(0) += 1;
        }
        DistributionStats { mean, median, std_dev: var.sqrt(), histogram }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImpactCount {
    pub label: String,
    pub count: u32,
}

/// Coverage and distribution statistics for a parsed catalog pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogStats {
    pub weakness_count: usize,
    pub attack_pattern_count: usize,
    /// Share of weaknesses with no usable Likelihood of Exploit, percent.
    pub le_missing_pct: f64,
    /// Share of patterns with no usable Likelihood of Attack, percent.
    pub la_missing_pct: f64,
    /// Share of patterns with no usable Typical Severity, percent.
    pub ts_missing_pct: f64,
    pub modes_of_introduction: DistributionStats,
    pub consequence_entries: DistributionStats,
    /// Most frequent impact labels over all consequence entries.
    pub top_impacts: Vec<ImpactCount>,
}

const TOP_IMPACTS: usize = 5;

/// Computes [`CatalogStats`] over raw parsed records, before any imputation.
pub fn catalog_stats(
    weaknesses: &[WeaknessRecord],
    patterns: &[AttackPatternRecord],
) -> CatalogStats {
    let pct = |missing: usize, total: usize| {
        if total == 0 {
            0.0
        } else {
            100.0 * missing as f64 / total as f64
        }
    };

    let le_missing = weaknesses.iter().filter(|w| w.likelihood_of_exploit.is_none()).count();
    let la_missing = patterns.iter().filter(|p| p.likelihood_of_attack.is_none()).count();
    let ts_missing = patterns.iter().filter(|p| p.typical_severity.is_none()).count();

    let mi_counts: Vec<u32> = weaknesses.iter().map(WeaknessRecord::mi_count).collect();
    let cc_counts: Vec<u32> = weaknesses.iter().map(WeaknessRecord::cc_count).collect();

    let mut impact_counts: BTreeMap<&str, u32> = BTreeMap::new();
    for weakness in weaknesses {
        for entry in &weakness.consequence_entries {
            for impact in &entry.impacts {
                *impact_counts.entry(impact.as_str()).or_insert(0) += 1;
            }
        }
    }
    let mut top: Vec<ImpactCount> = impact_counts
        .into_iter()
        .map(|(label, count)| ImpactCount { label: label.to_string(), count })
        .collect();
    top.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.label.cmp(&b.label)));
    top.truncate(TOP_IMPACTS);

    CatalogStats {
        weakness_count: weaknesses.len(),
        attack_pattern_count: patterns.len(),
        le_missing_pct: pct(le_missing, weaknesses.len()),
        la_missing_pct: pct(la_missing, patterns.len()),
        ts_missing_pct: pct(ts_missing, patterns.len()),
        modes_of_introduction: DistributionStats::from_counts(&mi_counts),
        consequence_entries: DistributionStats::from_counts(&cc_counts),
        top_impacts: top,
    }
}
