//! Repository-level risk metrics.
//!
//! For a repository `r` with deduplicated CWE frequencies `f_r(c)` and CWE
//! weights `w(c)` (the Risk Indices):
//!
//! * exposure: `R_exp = sum f_r(c) * w(c)`
//! * RMS severity: `R_rms = sqrt(sum f_r(c) * w(c)^2 / N_r)`
//! * overall: `R_overall = R_rms * log10(N_r + 1)`
//! * normalized: min-max over `ln R_overall`, scaled to 0-100
//! * band: fixed 20-point intervals over the normalized score

use serde::{Deserialize, Serialize};

use crate::catalog::RiskIndices;
use crate::findings::RepoFindingProfile;

/// Risk band over the normalized score, in fixed 20-point intervals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RiskBand {
    VeryLow,
    Low,
    Medium,
    High,
    VeryHigh,
}

impl RiskBand {
    pub fn label(self) -> &'static str {
        match self {
            RiskBand::VeryLow => "VeryLow",
            RiskBand::Low => "Low",
            RiskBand::Medium => "Medium",
            RiskBand::High => "High",
            RiskBand::VeryHigh => "VeryHigh",
        }
    }

    pub fn from_label(label: &str) -> Option<Self> {
        match label {
            "VeryLow" => Some(RiskBand::VeryLow),
            "Low" => Some(RiskBand::Low),
            "Medium" => Some(RiskBand::Medium),
            "High" => Some(RiskBand::High),
            "VeryHigh" => Some(RiskBand::VeryHigh),
            _ => None,
        }
    }

    pub const ALL: [RiskBand; 5] = [
        RiskBand::VeryLow,
        RiskBand::Low,
        RiskBand::Medium,
        RiskBand::High,
        RiskBand::VeryHigh,
    ];
}

/// Per-repository raw metrics, before corpus-level normalization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepoMetrics {
    pub repo_id: String,
    pub n_findings: u32,
    pub exposure: f64,
    pub rms: f64,
    pub overall: f64,
}

/// Final per-repository score with normalization and band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepoScore {
    pub repo_id: String,
    pub n_findings: u32,
    pub exposure: f64,
    pub rms: f64,
    pub overall: f64,
    pub ln_overall: f64,
    pub normalized: f64,
    pub band: RiskBand,
}

#[derive(Debug, thiserror::Error)]
pub enum ScoringError {
    #[error("repository `{repo_id}` has findings with no risk index: CWE {cwe_ids:?}")]
    MissingRiskIndex { repo_id: String, cwe_ids: Vec<u32> },
    #[error("repository `{repo_id}` has no findings; score is undefined")]
    UndefinedScore { repo_id: String },
    #[error("repository `{repo_id}` has non-positive overall score {value}")]
    NonPositiveOverall { repo_id: String, value: f64 },
    #[error("no repositories with a positive overall score")]
    NoScoredRepositories,
    #[error("normalized score {0} outside [0,100]")]
    OutOfRange(f64),
}

fn weights_for(
    profile: &RepoFindingProfile,
    indices: &RiskIndices,
) -> Result<Vec<(u32, f64)>, ScoringError> {
    let missing: Vec<u32> = profile
        .frequencies
        .keys()
        .filter(|c| !indices.contains_key(c))
        .copied()
        .collect();
    if !missing.is_empty() {
        return Err(ScoringError::MissingRiskIndex {
            repo_id: profile.repo_id.clone(),
            cwe_ids: missing,
        });
    }
    Ok(profile
        .frequencies
        .iter()
        .map(|(&cwe, &f)| (f, indices[&cwe]))
        .collect())
}

/// Frequency-weighted sum of risk indices. Zero for an empty profile.
pub fn repo_exposure(
    profile: &RepoFindingProfile,
    indices: &RiskIndices,
) -> Result<f64, ScoringError> {
    let terms = weights_for(profile, indices)?;
    Ok(terms.iter().map(|&(f, w)| f64::from(f) * w).sum())
}

/// Frequency-weighted root-mean-square of risk indices. Undefined when the
/// repository has no findings.
pub fn repo_rms(
    profile: &RepoFindingProfile,
    indices: &RiskIndices,
) -> Result<f64, ScoringError> {
    if profile.total == 0 {
        return Err(ScoringError::UndefinedScore { repo_id: profile.repo_id.clone() });
    }
    let terms = weights_for(profile, indices)?;
    let sum_sq: f64 = terms.iter().map(|&(f, w)| f64::from(f) * w * w).sum();
    Ok((sum_sq / f64::from(profile.total)).sqrt())
}

/// RMS severity scaled by the log-dampened finding volume, base-10.
pub fn repo_overall(
    profile: &RepoFindingProfile,
    indices: &RiskIndices,
) -> Result<f64, ScoringError> {
    let rms = repo_rms(profile, indices)?;
    Ok(rms * f64::from(profile.total + 1).log10())
}

/// Computes exposure, RMS, and overall in one pass.
pub fn score_repo(
    profile: &RepoFindingProfile,
    indices: &RiskIndices,
) -> Result<RepoMetrics, ScoringError> {
    Ok(RepoMetrics {
        repo_id: profile.repo_id.clone(),
        n_findings: profile.total,
        exposure: repo_exposure(profile, indices)?,
        rms: repo_rms(profile, indices)?,
        overall: repo_overall(profile, indices)?,
    })
}

/// Min-max normalizes `ln(overall)` over the corpus to 0-100 and assigns
/// bands.
///
/// A degenerate corpus (a single repository, or all repositories sharing
/// one overall value) normalizes to 0 everywhere. Non-positive overall
/// values are an error; they cannot arise from scored repositories with at
/// least one positively weighted finding.
pub fn normalize_scores(metrics: Vec<RepoMetrics>) -> Result<Vec<RepoScore>, ScoringError> {
    if metrics.is_empty() {
        return Err(ScoringError::NoScoredRepositories);
    }
    for m in &metrics {
        if m.overall <= 0.0 {
            return Err(ScoringError::NonPositiveOverall {
                repo_id: m.repo_id.clone(),
                value: m.overall,
            });
        }
    }
    let lns: Vec<f64> = metrics.iter().map(|m| m.overall.ln()).collect();
    let min = lns.iter().copied().fold(f64::INFINITY, f64::min);
    let max = lns.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = max - min;

    metrics
        .into_iter()
        .zip(lns)
        .map(|(m, ln_overall)| {
            // clamp keeps the endpoints exact despite rounding in the division
            let normalized = if range == 0.0 {
                0.0
            } else {
                (100.0 * (ln_overall - min) / range).clamp(0.0, 100.0)
            };
            Ok(RepoScore {
                band: assign_band(normalized)?,
                repo_id: m.repo_id,
                n_findings: m.n_findings,
                exposure: m.exposure,
                rms: m.rms,
                overall: m.overall,
                ln_overall,
                normalized,
            })
        })
        .collect()
}

/// Maps a normalized score in [0,100] onto its 20-point band. Boundaries
/// belong to the upper band; only 100 closes the top interval.
pub fn assign_band(normalized: f64) -> Result<RiskBand, ScoringError> {
    if !(0.0..=100.0).contains(&normalized) {
        return Err(ScoringError::OutOfRange(normalized));
    }
    Ok(if normalized < 20.0 {
        RiskBand::VeryLow
    } else if normalized < 40.0 {
        RiskBand::Low
    } else if normalized < 60.0 {
        RiskBand::Medium
    } else if normalized < 80.0 {
        RiskBand::High
    } else {
        RiskBand::VeryHigh
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn profile(repo_id: &str, freqs: &[(u32, u32)]) -> RepoFindingProfile {
        let frequencies: BTreeMap<u32, u32> = freqs.iter().copied().collect();
        RepoFindingProfile {
            repo_id: repo_id.into(),
            total: frequencies.values().sum(),
            frequencies,
            skipped: 0,
            provenance: BTreeMap::new(),
        }
    }

    fn indices(entries: &[(u32, f64)]) -> RiskIndices {
        entries.iter().copied().collect()
    }

    #[test]
    fn exposure_is_the_weighted_sum() {
        let p = profile("r", &[(1, 2), (2, 1)]);
        let w = indices(&[(1, 10.0), (2, 20.0)]);
        assert_eq!(repo_exposure(&p, &w).unwrap(), 40.0);
    }

    #[test]
    fn exposure_of_empty_profile_is_zero() {
        let p = profile("r", &[]);
        assert_eq!(repo_exposure(&p, &indices(&[])).unwrap(), 0.0);
    }

    #[test]
    fn exposure_single_term() {
        let p = profile("r", &[(89, 1)]);
        let w = indices(&[(89, 33.3)]);
        assert_eq!(repo_exposure(&p, &w).unwrap(), 33.3);
    }

    #[test]
    fn missing_index_lists_offending_cwes() {
        let p = profile("r", &[(1, 1), (7, 1)]);
        let w = indices(&[(1, 10.0)]);
        match repo_exposure(&p, &w).unwrap_err() {
            ScoringError::MissingRiskIndex { cwe_ids, .. } => assert_eq!(cwe_ids, vec![7]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rms_hand_computed() {
        let p = profile("r", &[(1, 2), (2, 1)]);
        let w = indices(&[(1, 10.0), (2, 20.0)]);
        // sqrt((2*100 + 400) / 3) = sqrt(200)
        assert!((repo_rms(&p, &w).unwrap() - 14.1421).abs() < 1e-4);
    }

    #[test]
    fn rms_of_constant_weights_is_the_weight() {
        let p = profile("r", &[(1, 3), (2, 2)]);
        let w = indices(&[(1, 25.0), (2, 25.0)]);
        assert!((repo_rms(&p, &w).unwrap() - 25.0).abs() < 1e-12);
    }

    #[test]
    fn rms_single_finding_is_its_weight() {
        let p = profile("r", &[(89, 1)]);
        let w = indices(&[(89, 83.3)]);
        assert!((repo_rms(&p, &w).unwrap() - 83.3).abs() < 1e-12);
    }

    #[test]
    fn rms_undefined_for_empty_repo() {
        let p = profile("r", &[]);
        assert!(matches!(
            repo_rms(&p, &indices(&[])),
            Err(ScoringError::UndefinedScore { .. })
        ));
    }

    #[test]
    fn overall_hand_computed() {
        let p = profile("r", &[(1, 2), (2, 1)]);
        let w = indices(&[(1, 10.0), (2, 20.0)]);
        // 14.1421 * log10(4)
        assert!((repo_overall(&p, &w).unwrap() - 8.5138).abs() < 1e-3);
    }

    #[test]
    fn overall_single_finding() {
        let p = profile("r", &[(1, 1)]);
        let w = indices(&[(1, 50.0)]);
        assert!((repo_overall(&p, &w).unwrap() - 50.0 * std::f64::consts::LOG10_2).abs() < 1e-9);
    }

    #[test]
    fn normalize_ln_spaced_overalls() {
        let metrics = ["a", "b", "c"]
            .iter()
            .zip([1.0f64, 2.0, 3.0])
            .map(|(id, ln)| RepoMetrics {
                repo_id: (*id).into(),
                n_findings: 1,
                exposure: 1.0,
                rms: 1.0,
                overall: ln.exp(),
            })
            .collect();
        let scores = normalize_scores(metrics).unwrap();
        let norms: Vec<f64> = scores.iter().map(|s| s.normalized).collect();
        assert!((norms[0] - 0.0).abs() < 1e-9);
        assert!((norms[1] - 50.0).abs() < 1e-9);
        assert!((norms[2] - 100.0).abs() < 1e-9);
    }

    #[test]
    fn single_repository_normalizes_to_zero() {
        let metrics = vec![RepoMetrics {
            repo_id: "only".into(),
            n_findings: 2,
            exposure: 5.0,
            rms: 2.5,
            overall: 1.2,
        }];
        let scores = normalize_scores(metrics).unwrap();
        assert_eq!(scores[0].normalized, 0.0);
        assert_eq!(scores[0].band, RiskBand::VeryLow);
    }

    #[test]
    fn non_positive_overall_is_an_error() {
        let metrics = vec![RepoMetrics {
            repo_id: "r".into(),
            n_findings: 1,
            exposure: 0.0,
            rms: 0.0,
            overall: 0.0,
        }];
        assert!(matches!(
            normalize_scores(metrics),
            Err(ScoringError::NonPositiveOverall { .. })
        ));
    }

    #[test]
    fn band_boundaries() {
        assert_eq!(assign_band(0.0).unwrap(), RiskBand::VeryLow);
        assert_eq!(assign_band(19.999).unwrap(), RiskBand::VeryLow);
        assert_eq!(assign_band(20.0).unwrap(), RiskBand::Low);
        assert_eq!(assign_band(47.0).unwrap(), RiskBand::Medium);
        assert_eq!(assign_band(79.999).unwrap(), RiskBand::High);
        assert_eq!(assign_band(80.0).unwrap(), RiskBand::VeryHigh);
        assert_eq!(assign_band(100.0).unwrap(), RiskBand::VeryHigh);
        assert!(assign_band(-0.001).is_err());
        assert!(assign_band(100.001).is_err());
    }
}
