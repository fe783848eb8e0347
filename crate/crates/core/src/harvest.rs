//! Repository harvesting: a client for the code-hosting search endpoint,
//! inclusion filtering, and reproducible snapshot manifests.
//!
//! All tests run against recorded responses via [`ReplayTransport`]; live
//! HTTP is opt-in through [`HttpTransport`] with the token taken from the
//! `MCP_RISK_TOKEN` environment variable.

use std::collections::{BTreeSet, VecDeque};
use std::path::Path;
use std::time::Duration;

use chrono::{DateTime, Utc};
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::tables::TableError;

/// The default search query for candidate MCP server repositories.
pub const DEFAULT_QUERY: &str = "mcp server stars:>100 pushed:>2025-01-01 language:Python";

/// Environment variable holding the search-service token.
pub const TOKEN_ENV: &str = "MCP_RISK_TOKEN";

/// Metadata recorded for one candidate repository.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepoMetadata {
    pub full_name: String,
    pub stars: u64,
    pub description: Option<String>,
    pub url: String,
    pub language: String,
    pub updated_at: DateTime<Utc>,
    pub snapshot_time: DateTime<Utc>,
}

/// One page of search results, in the hosting service's response shape.
#[derive(Debug, Clone, Deserialize)]
pub struct SearchPage {
    #[serde(default)]
    pub total_count: u64,
    #[serde(default)]
    pub incomplete_results: bool,
    pub items: Vec<SearchItem>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct SearchItem {
    pub full_name: String,
    pub stargazers_count: u64,
    pub description: Option<String>,
    pub html_url: String,
    pub language: Option<String>,
    pub updated_at: DateTime<Utc>,
}

/// What one page fetch produced.
#[derive(Debug, Clone)]
pub enum PageResponse {
    Page(SearchPage),
    RateLimited { retry_after: Option<u64> },
}

#[derive(Debug, thiserror::Error)]
pub enum HarvestError {
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("rate limit not lifted after {attempts} attempts")]
    RateLimitExhausted { attempts: u32 },
    #[error("malformed search response: {0}")]
    MalformedResponse(String),
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("snapshot io: {0}")]
    Io(#[from] std::io::Error),
    #[error("snapshot schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("exclusion rules: {0}")]
    Rules(#[from] TableError),
}

/// Fetches one page of search results. Implemented by the live HTTP client
/// and by the recorded-response replayer.
pub trait SearchTransport {
    fn fetch_page(&mut self, query: &str, page: u32) -> Result<PageResponse, HarvestError>;
}

/// Live client for the repository-search endpoint.
pub struct HttpTransport {
    client: reqwest::blocking::Client,
    endpoint: String,
    token: String,
}

impl HttpTransport {
    pub const DEFAULT_ENDPOINT: &'static str = "https://api.github.com/search/repositories";
    const PER_PAGE: u32 = 100;

    /// Builds a live transport; the token comes from `MCP_RISK_TOKEN`.
    pub fn from_env(endpoint: Option<String>) -> Result<Self, HarvestError> {
        let token = std::env::var(TOKEN_ENV)
            .map_err(|_| HarvestError::Auth(format!("{TOKEN_ENV} is not set")))?;
        let client = reqwest::blocking::Client::builder()
            .user_agent(concat!("mcp-risk/", env!("CARGO_PKG_VERSION")))
            .build()
            .map_err(|e| HarvestError::Transport(e.to_string()))?;
        Ok(HttpTransport {
            client,
            endpoint: endpoint.unwrap_or_else(|| Self::DEFAULT_ENDPOINT.to_string()),
            token,
        })
    }
}

impl SearchTransport for HttpTransport {
    fn fetch_page(&mut self, query: &str, page: u32) -> Result<PageResponse, HarvestError> {
        let response = self
            .client
            .get(&self.endpoint)
            .query(&[
                ("q", query),
                ("sort", "stars"),
                ("order", "desc"),
                ("per_page", &Self::PER_PAGE.to_string()),
                ("page", &page.to_string()),
            ])
            .bearer_auth(&self.token)
            .header("Accept", "application/vnd.github+json")
            .send()
            .map_err(|e| HarvestError::Transport(e.to_string()))?;

        let status = response.status();
        if status.as_u16() == 401 {
            return Err(HarvestError::Auth("token rejected".into()));
        }
        if status.as_u16() == 403 || status.as_u16() == 429 {
            let retry_after = response
                .headers()
                .get("retry-after")
                .and_then(|v| v.to_str().ok())
                .and_then(|v| v.parse().ok());
            return Ok(PageResponse::RateLimited { retry_after });
        }
        if !status.is_success() {
            return Err(HarvestError::Transport(format!("status {status}")));
        }
        let page: SearchPage = response
            .json()
            .map_err(|e| HarvestError::MalformedResponse(e.to_string()))?;
        Ok(PageResponse::Page(page))
    }
}

/// Replays recorded responses from a directory of JSON files, in file-name
/// order. A file of the form `{"rate_limited": true, "retry_after": N}`
/// replays a rate-limit response; anything else must be a search payload.
pub struct ReplayTransport {
    responses: VecDeque<PageResponse>,
}

#[derive(Deserialize)]
struct RateLimitMarker {
    rate_limited: bool,
    #[serde(default)]
    retry_after: Option<u64>,
}

impl ReplayTransport {
    pub fn from_dir(dir: &Path) -> Result<Self, HarvestError> {
        let mut names: Vec<std::path::PathBuf> = std::fs::read_dir(dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|ext| ext == "json"))
            .collect();
        names.sort();
        let mut responses = VecDeque::new();
        for path in names {
            let text = std::fs::read_to_string(&path)?;
            if let Ok(marker) = serde_json::from_str::<RateLimitMarker>(&text) {
                if marker.rate_limited {
                    responses.push_back(PageResponse::RateLimited {
                        retry_after: marker.retry_after,
                    });
                    continue;
                }
            }
            let page: SearchPage = serde_json::from_str(&text).map_err(|e| {
                HarvestError::MalformedResponse(format!("{}: {e}", path.display()))
            })?;
            responses.push_back(PageResponse::Page(page));
        }
        Ok(ReplayTransport { responses })
    }
}

impl SearchTransport for ReplayTransport {
    fn fetch_page(&mut self, _query: &str, _page: u32) -> Result<PageResponse, HarvestError> {
        match self.responses.pop_front() {
            Some(response) => Ok(response),
            None => Ok(PageResponse::Page(SearchPage {
                total_count: 0,
                incomplete_results: false,
                items: Vec::new(),
            })),
        }
    }
}

/// Search parameters.
#[derive(Debug, Clone)]
pub struct SearchOptions {
    pub query: String,
    pub page_limit: u32,
    pub max_retries: u32,
    /// Recorded into every result's `snapshot_time`; injected so replayed
    /// searches are reproducible.
    pub snapshot_time: DateTime<Utc>,
}

impl SearchOptions {
    pub fn new(query: impl Into<String>, page_limit: u32, snapshot_time: DateTime<Utc>) -> Self {
        SearchOptions { query: query.into(), page_limit, max_retries: 4, snapshot_time }
    }
}

/// Search results plus warnings for pages that could not be fetched.
#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub repos: Vec<RepoMetadata>,
    pub warnings: Vec<String>,
}

/// Pages through the search endpoint, honoring rate limits with
/// exponential backoff, and returns results sorted by star count
/// descending.
///
/// Rate-limit responses are retried at most `max_retries` times with
/// doubling delays through `sleep`. A failure on a page after the first
/// yields the partial list with a warning; a failure on the first page is
/// an error.
pub fn search_repositories(
    transport: &mut dyn SearchTransport,
    options: &SearchOptions,
    sleep: &mut dyn FnMut(Duration),
) -> Result<SearchOutcome, HarvestError> {
    let mut repos = Vec::new();
    let mut warnings = Vec::new();

    'pages: for page in 1..=options.page_limit {
        let mut attempt = 0;
        let page_result = loop {
            match transport.fetch_page(&options.query, page) {
                Ok(PageResponse::Page(p)) => break Ok(p),
                Ok(PageResponse::RateLimited { retry_after }) => {
                    if attempt >= options.max_retries {
                        break Err(HarvestError::RateLimitExhausted { attempts: attempt });
                    }
                    let base = retry_after.unwrap_or(1);
                    sleep(Duration::from_secs(base << attempt));
                    attempt += 1;
                }
                Err(e) => break Err(e),
            }
        };
        match page_result {
            Ok(p) => {
                let empty = p.items.is_empty();
                for item in p.items {
                    repos.push(RepoMetadata {
                        full_name: item.full_name,
                        stars: item.stargazers_count,
                        description: item.description,
                        url: item.html_url,
                        language: item.language.unwrap_or_default(),
                        updated_at: item.updated_at,
                        snapshot_time: options.snapshot_time,
                    });
                }
                if empty {
                    break 'pages;
                }
            }
            Err(e) if page > 1 => {
                warnings.push(format!("page {page} failed: {e}; returning partial results"));
                break 'pages;
            }
            Err(e) => return Err(e),
        }
    }

    repos.sort_by(|a, b| b.stars.cmp(&a.stars).then_with(|| a.full_name.cmp(&b.full_name)));
    Ok(SearchOutcome { repos, warnings })
}

/// A pattern rule over repository name and description.
#[derive(Debug, Clone)]
pub struct ExclusionRule {
    pub pattern: Regex,
    pub reason: String,
}

/// Pattern rules plus an explicit denylist of full names.
#[derive(Debug, Clone, Default)]
pub struct ExclusionRules {
    pub rules: Vec<ExclusionRule>,
    pub denylist: BTreeSet<String>,
}

impl ExclusionRules {
    /// The shipped default rules.
    pub fn builtin() -> Self {
        Self::parse_csv(include_str!("../data/exclusion_rules.csv"))
            .expect("shipped exclusion rules parse")
    }

    /// Parses two-column delimited text `pattern,reason` with a header row.
    pub fn parse_csv(text: &str) -> Result<Self, TableError> {
        let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
        let mut rules = Vec::new();
        for (index, record) in reader.records().enumerate() {
            let line = index + 2;
            let record = record.map_err(|e| TableError::Malformed {
                table: "exclusion rules",
                line,
                message: e.to_string(),
            })?;
            let (Some(pattern), Some(reason)) = (record.get(0), record.get(1)) else {
                return Err(TableError::Malformed {
                    table: "exclusion rules",
                    line,
                    message: "expected two columns".into(),
                });
            };
            let pattern = Regex::new(pattern).map_err(|e| TableError::Malformed {
                table: "exclusion rules",
                line,
                message: e.to_string(),
            })?;
            rules.push(ExclusionRule { pattern, reason: reason.to_string() });
        }
        Ok(ExclusionRules { rules, denylist: BTreeSet::new() })
    }

    pub fn with_denylist(mut self, names: impl IntoIterator<Item = String>) -> Self {
        self.denylist.extend(names);
        self
    }

    fn exclusion_for(&self, repo: &RepoMetadata) -> Option<String> {
        if self.denylist.contains(&repo.full_name) {
            return Some("denylist".to_string());
        }
        let haystack = match &repo.description {
            Some(d) => format!("{} {}", repo.full_name, d),
            None => repo.full_name.clone(),
        };
        self.rules
            .iter()
            .find(|rule| rule.pattern.is_match(&haystack))
            .map(|rule| rule.reason.clone())
    }
}

/// One excluded repository and the rule that removed it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Exclusion {
    pub full_name: String,
    pub reason: String,
}

/// Applies exclusion rules, returning retained repositories and a log of
/// exclusions. Deterministic and order-preserving.
pub fn filter_repositories(
    repos: Vec<RepoMetadata>,
    rules: &ExclusionRules,
) -> (Vec<RepoMetadata>, Vec<Exclusion>) {
    let mut retained = Vec::new();
    let mut excluded = Vec::new();
    for repo in repos {
        match rules.exclusion_for(&repo) {
            Some(reason) => excluded.push(Exclusion { full_name: repo.full_name, reason }),
            None => retained.push(repo),
        }
    }
    (retained, excluded)
}

/// A reproducible snapshot of one harvest run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnapshotManifest {
    pub query: String,
    pub snapshot_time: DateTime<Utc>,
    pub repos: Vec<RepoMetadata>,
}

pub fn save_snapshot(manifest: &SnapshotManifest, path: &Path) -> Result<(), HarvestError> {
    let json = serde_json::to_string_pretty(manifest)
        .map_err(|e| HarvestError::SchemaMismatch(e.to_string()))?;
    std::fs::write(path, json + "\n")?;
    Ok(())
}

pub fn load_snapshot(path: &Path) -> Result<SnapshotManifest, HarvestError> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| HarvestError::SchemaMismatch(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    fn fixture_dir(name: &str) -> std::path::PathBuf {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/harvest").join(name)
    }

    fn snapshot_time() -> DateTime<Utc> {
        Utc.with_ymd_and_hms(2026, 1, 5, 0, 0, 0).unwrap()
    }

    fn run_search(dir: &str, sleeps: &mut Vec<Duration>) -> SearchOutcome {
        let mut transport = ReplayTransport::from_dir(&fixture_dir(dir)).unwrap();
        let options = SearchOptions::new(DEFAULT_QUERY, 5, snapshot_time());
        search_repositories(&mut transport, &options, &mut |d| sleeps.push(d)).unwrap()
    }

    #[test]
    fn replays_two_pages_star_sorted() {
        let mut sleeps = Vec::new();
        let outcome = run_search("pages", &mut sleeps);
        assert_eq!(outcome.repos.len(), 4);
        let stars: Vec<u64> = outcome.repos.iter().map(|r| r.stars).collect();
        assert_eq!(stars, vec![38167, 9120, 740, 101]);
        assert!(outcome.warnings.is_empty());
        assert!(sleeps.is_empty());
        assert!(outcome.repos.iter().all(|r| r.snapshot_time == snapshot_time()));
        assert!(outcome.repos.iter().all(|r| r.stars > 100));
    }

    #[test]
    fn rate_limit_then_success_retries_once() {
        let mut sleeps = Vec::new();
        let outcome = run_search("ratelimit", &mut sleeps);
        assert_eq!(outcome.repos.len(), 4);
        assert_eq!(sleeps, vec![Duration::from_secs(1)]);
    }

    #[test]
    fn rate_limit_exhaustion_is_an_error() {
        struct AlwaysLimited;
        impl SearchTransport for AlwaysLimited {
            fn fetch_page(&mut self, _: &str, _: u32) -> Result<PageResponse, HarvestError> {
                Ok(PageResponse::RateLimited { retry_after: None })
            }
        }
        let options = SearchOptions::new(DEFAULT_QUERY, 1, snapshot_time());
        let err = search_repositories(&mut AlwaysLimited, &options, &mut |_| {}).unwrap_err();
        assert!(matches!(err, HarvestError::RateLimitExhausted { attempts: 4 }));
    }

    #[test]
    fn later_page_failure_yields_partial_with_warning() {
        struct SecondPageFails(u32);
        impl SearchTransport for SecondPageFails {
            fn fetch_page(&mut self, _: &str, page: u32) -> Result<PageResponse, HarvestError> {
                self.0 += 1;
                if page == 1 {
                    Ok(PageResponse::Page(SearchPage {
                        total_count: 2,
                        incomplete_results: false,
                        items: vec![SearchItem {
                            full_name: "a/b".into(),
                            stargazers_count: 500,
                            description: None,
                            html_url: "https://example/a/b".into(),
                            language: Some("Python".into()),
                            updated_at: Utc::now(),
                        }],
                    }))
                } else {
                    Err(HarvestError::Transport("boom".into()))
                }
            }
        }
        let options = SearchOptions::new(DEFAULT_QUERY, 3, snapshot_time());
        let outcome =
            search_repositories(&mut SecondPageFails(0), &options, &mut |_| {}).unwrap();
        assert_eq!(outcome.repos.len(), 1);
        assert_eq!(outcome.warnings.len(), 1);
    }

    fn repo(full_name: &str, description: Option<&str>) -> RepoMetadata {
        RepoMetadata {
            full_name: full_name.into(),
            stars: 200,
            description: description.map(String::from),
            url: format!("https://example/{full_name}"),
            language: "Python".into(),
            updated_at: snapshot_time(),
            snapshot_time: snapshot_time(),
        }
    }

    #[test]
    fn client_only_rule_excludes_with_reason() {
        let rules = ExclusionRules::builtin();
        let (retained, excluded) = filter_repositories(
            vec![
                repo("x/mcp-tools", Some("mcp client for workspace automation")),
                repo("y/server", Some("an MCP server for files")),
            ],
            &rules,
        );
        assert_eq!(retained.len(), 1);
        assert_eq!(excluded.len(), 1);
        assert_eq!(excluded[0].full_name, "x/mcp-tools");
        assert_eq!(excluded[0].reason, "client-only");
    }

    #[test]
    fn empty_rules_are_identity() {
        let repos = vec![repo("a/b", None), repo("c/d", Some("whatever"))];
        let (retained, excluded) = filter_repositories(repos.clone(), &ExclusionRules::default());
        assert_eq!(retained, repos);
        assert!(excluded.is_empty());
    }

    #[test]
    fn five_repos_two_rules_matched() {
        let rules = ExclusionRules::builtin();
        let (retained, excluded) = filter_repositories(
            vec![
                repo("a/server", Some("MCP server for dashboards")),
                repo("b/bench", Some("benchmark suite for MCP runtimes")),
                repo("c/files", Some("file tools exposed over MCP")),
                repo("d/vuln", Some("intentionally vulnerable MCP server for training")),
                repo("e/notes", None),
            ],
            &rules,
        );
        assert_eq!(retained.len(), 3);
        assert_eq!(excluded.len(), 2);
    }

    #[test]
    fn filtering_is_order_independent() {
        let rules = ExclusionRules::builtin();
        let mut repos = vec![
            repo("a/server", None),
            repo("b/bench", Some("benchmark suite")),
            repo("c/files", None),
        ];
        let (forward, _) = filter_repositories(repos.clone(), &rules);
        repos.reverse();
        let (mut backward, _) = filter_repositories(repos, &rules);
        backward.sort_by(|a, b| a.full_name.cmp(&b.full_name));
        let mut forward_sorted = forward;
        forward_sorted.sort_by(|a, b| a.full_name.cmp(&b.full_name));
        assert_eq!(forward_sorted, backward);
    }

    #[test]
    fn denylist_beats_everything() {
        let rules = ExclusionRules::default().with_denylist(["z/listed".to_string()]);
        let (retained, excluded) = filter_repositories(vec![repo("z/listed", None)], &rules);
        assert!(retained.is_empty());
        assert_eq!(excluded[0].reason, "denylist");
    }

    #[test]
    fn snapshot_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("snapshot.json");
        let manifest = SnapshotManifest {
            query: DEFAULT_QUERY.to_string(),
            snapshot_time: snapshot_time(),
            repos: vec![repo("a/b", Some("desc")), repo("c/d", None)],
        };
        save_snapshot(&manifest, &path).unwrap();
        assert_eq!(load_snapshot(&path).unwrap(), manifest);
    }

    #[test]
    fn truncated_snapshot_is_schema_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("truncated.json");
        std::fs::write(&path, "{\"query\": \"x\", \"repos\": [").unwrap();
        assert!(matches!(load_snapshot(&path).unwrap_err(), HarvestError::SchemaMismatch(_)));
    }
}
