//! Live ingestion from a GitHub REST v3 compatible API.
//!
//! Requests go through a [`Transport`], one at a time, so a single host never
//! sees concurrent calls from one fetch. [`UreqTransport`] talks HTTP;
//! [`RecordedTransport`] replays canned responses from disk.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;
use std::time::Duration;

use chrono::{DateTime, TimeZone, Utc};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use thiserror::Error;

use super::model::{
    EventKind, EventRecord, Project, ProjectId, PullRequestRecord, User, UserId,
};
use super::store::{DiagnosticKind, EventStore, StoreBuilder};
use super::{timestamp, IngestError, ParseMode};

pub const DEFAULT_API_URL: &str = "https://api.github.com";
/// Read when no token is passed explicitly.
pub const TOKEN_ENV: &str = "OPENNESS_TOKEN";

#[derive(Debug, Error)]
pub enum RemoteError {
    #[error("authentication failed ({status}): {message}")]
    Auth { status: u16, message: String },
    #[error("rate limited{}{}", reset_at.map(|t| format!(", resets at {}", timestamp::format(&t))).unwrap_or_default(), retry_after.map(|d| format!(", retry after {}s", d.as_secs())).unwrap_or_default())]
    RateLimited {
        reset_at: Option<DateTime<Utc>>,
        retry_after: Option<Duration>,
    },
    #[error("not found: {0}")]
    NotFound(String),
    #[error("network error: {0}")]
    Network(String),
    #[error("unexpected HTTP status {status} for {url}")]
    Status { status: u16, url: String },
    #[error("could not decode response from {url}: {message}")]
    Decode { url: String, message: String },
    #[error("invalid repository name {0:?}, expected owner/name")]
    InvalidRepo(String),
    #[error(transparent)]
    Ingest(#[from] IngestError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    pub headers: Vec<(String, String)>,
    pub body: String,
}

impl HttpResponse {
    pub fn header(&self, name: &str) -> Option<&str> {
        self.headers
            .iter()
            .find(|(k, _)| k.eq_ignore_ascii_case(name))
            .map(|(_, v)| v.as_str())
    }
}

pub trait Transport {
    fn get(&self, url: &str, headers: &[(&str, String)]) -> Result<HttpResponse, RemoteError>;
}

pub struct UreqTransport {
    agent: ureq::Agent,
}

impl Default for UreqTransport {
    fn default() -> Self {
        let config = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(60)))
            .build();
        UreqTransport {
            agent: ureq::Agent::new_with_config(config),
        }
    }
}

impl Transport for UreqTransport {
    fn get(&self, url: &str, headers: &[(&str, String)]) -> Result<HttpResponse, RemoteError> {
        let mut request = self.agent.get(url);
        for (k, v) in headers {
            request = request.header(*k, v.as_str());
        }
        let mut response = request.call().map_err(|e| RemoteError::Network(e.to_string()))?;
        let status = response.status().as_u16();
        let headers = response
            .headers()
            .iter()
            .map(|(k, v)| (k.as_str().to_owned(), v.to_str().unwrap_or_default().to_owned()))
            .collect();
        let body = response
            .body_mut()
            .read_to_string()
            .map_err(|e| RemoteError::Network(e.to_string()))?;
        Ok(HttpResponse {
            status,
            headers,
            body,
        })
    }
}

/// Replays responses keyed by path and query.
///
/// A recording directory holds `manifest.json`, a list of
/// `{"url", "status", "headers", "body_file"}` entries, plus the body files.
/// Unknown URLs answer 404.
#[derive(Debug, Default)]
pub struct RecordedTransport {
    responses: HashMap<String, HttpResponse>,
}

#[derive(Deserialize)]
struct RecordedEntry {
    url: String,
    #[serde(default = "ok_status")]
    status: u16,
    #[serde(default)]
    headers: BTreeMap<String, String>,
    body_file: Option<String>,
}

fn ok_status() -> u16 {
    200
}

impl RecordedTransport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_dir(dir: impl AsRef<Path>) -> Result<Self, RemoteError> {
        let dir = dir.as_ref();
        let read = |path: &Path| {
            fs::read_to_string(path).map_err(|source| {
                RemoteError::Ingest(IngestError::Io {
                    path: path.to_owned(),
                    source,
                })
            })
        };
        let manifest_path = dir.join("manifest.json");
        let entries: Vec<RecordedEntry> =
            serde_json::from_str(&read(&manifest_path)?).map_err(|e| RemoteError::Decode {
                url: manifest_path.display().to_string(),
                message: e.to_string(),
            })?;
        let mut transport = RecordedTransport::new();
        for entry in entries {
            let body = match &entry.body_file {
                Some(file) => read(&dir.join(file))?,
                None => String::new(),
            };
            transport.insert(
                &entry.url,
                HttpResponse {
                    status: entry.status,
                    headers: entry.headers.into_iter().collect(),
                    body,
                },
            );
        }
        Ok(transport)
    }

    pub fn insert(&mut self, url: &str, response: HttpResponse) {
        self.responses.insert(path_and_query(url).to_owned(), response);
    }
}

impl Transport for RecordedTransport {
    fn get(&self, url: &str, _headers: &[(&str, String)]) -> Result<HttpResponse, RemoteError> {
        Ok(self
            .responses
            .get(path_and_query(url))
            .cloned()
            .unwrap_or(HttpResponse {
                status: 404,
                headers: Vec::new(),
                body: r#"{"message":"Not Found"}"#.to_owned(),
            }))
    }
}

fn path_and_query(url: &str) -> &str {
    match url.find("://") {
        Some(i) => {
            let rest = &url[i + 3..];
            rest.find('/').map(|j| &rest[j..]).unwrap_or("/")
        }
        None => url,
    }
}

/// What to do when the API reports an exhausted quota.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RateLimitPolicy {
    /// Surface [`RemoteError::RateLimited`] immediately.
    Abort,
    /// Sleep until the quota resets if that is no longer than `max_wait`.
    Wait { max_wait: Duration },
}

#[derive(Clone, Debug)]
pub struct FetchConfig {
    pub base_url: String,
    pub token: Option<String>,
    pub since: Option<DateTime<Utc>>,
    pub per_page: u32,
    pub rate_limit: RateLimitPolicy,
    pub mode: ParseMode,
}

impl Default for FetchConfig {
    fn default() -> Self {
        FetchConfig {
            base_url: DEFAULT_API_URL.to_owned(),
            token: None,
            since: None,
            per_page: 100,
            rate_limit: RateLimitPolicy::Abort,
            mode: ParseMode::Lenient,
        }
    }
}

#[derive(Deserialize)]
struct Account {
    id: u64,
    login: String,
}

#[derive(Deserialize)]
struct RepoRef {
    id: u64,
}

#[derive(Deserialize)]
struct Repo {
    id: u64,
    full_name: String,
    owner: Account,
    #[serde(default)]
    parent: Option<RepoRef>,
    created_at: String,
}

#[derive(Deserialize)]
struct Issue {
    number: u64,
    user: Option<Account>,
    created_at: String,
    #[serde(default)]
    pull_request: Option<serde_json::Value>,
}

#[derive(Deserialize)]
struct Branch {
    repo: Option<RepoRef>,
}

#[derive(Deserialize)]
struct Pull {
    number: u64,
    user: Option<Account>,
    created_at: String,
    #[serde(default)]
    updated_at: Option<String>,
    closed_at: Option<String>,
    merged_at: Option<String>,
    head: Branch,
    base: Branch,
}

#[derive(Deserialize)]
struct IssueStub {
    number: u64,
    #[serde(default)]
    pull_request: Option<serde_json::Value>,
}

#[derive(Deserialize)]
struct IssueEvent {
    id: u64,
    actor: Option<Account>,
    event: String,
    created_at: String,
    issue: Option<IssueStub>,
}

#[derive(Deserialize)]
struct GitSignature {
    date: String,
}

#[derive(Deserialize)]
struct GitCommit {
    author: Option<GitSignature>,
}

#[derive(Deserialize)]
struct Commit {
    sha: String,
    author: Option<Account>,
    commit: GitCommit,
}

pub struct Fetcher<T: Transport> {
    transport: T,
    config: FetchConfig,
}

impl Fetcher<UreqTransport> {
    pub fn http(config: FetchConfig) -> Self {
        Fetcher::new(UreqTransport::default(), config)
    }
}

impl<T: Transport> Fetcher<T> {
    pub fn new(transport: T, config: FetchConfig) -> Self {
        Fetcher { transport, config }
    }

    fn headers(&self) -> Vec<(&'static str, String)> {
        let mut headers = vec![
            ("Accept", "application/vnd.github+json".to_owned()),
            ("User-Agent", concat!("openness/", env!("CARGO_PKG_VERSION")).to_owned()),
        ];
        if let Some(token) = &self.config.token {
            headers.push(("Authorization", format!("Bearer {token}")));
        }
        headers
    }

    fn get(&self, url: &str) -> Result<HttpResponse, RemoteError> {
        loop {
            let response = self.transport.get(url, &self.headers())?;
            match classify_response(url, &response) {
                Err(RemoteError::RateLimited {
                    reset_at,
                    retry_after,
                }) => {
                    let wait = retry_after.or_else(|| {
                        reset_at.map(|t| (t - Utc::now()).to_std().unwrap_or_default())
                    });
                    match (self.config.rate_limit, wait) {
                        (RateLimitPolicy::Wait { max_wait }, Some(wait)) if wait <= max_wait => {
                            log::warn!("rate limited, waiting {}s", wait.as_secs());
                            std::thread::sleep(wait);
                        }
                        _ => {
                            return Err(RemoteError::RateLimited {
                                reset_at,
                                retry_after,
                            })
                        }
                    }
                }
                Err(other) => return Err(other),
                Ok(()) => return Ok(response),
            }
        }
    }

    fn get_json<D: DeserializeOwned>(&self, url: &str) -> Result<D, RemoteError> {
        let response = self.get(url)?;
        decode(url, &response.body)
    }

    /// Follows `Link: rel="next"` until exhausted.
    fn get_pages<D: DeserializeOwned>(&self, first: String) -> Result<Vec<D>, RemoteError> {
        let mut items = Vec::new();
        let mut next = Some(first);
        while let Some(url) = next {
            let response = self.get(&url)?;
            let page: Vec<D> = decode(&url, &response.body)?;
            items.extend(page);
            next = response.header("link").and_then(next_link);
        }
        Ok(items)
    }

    pub fn fetch(&self, repo: &str) -> Result<EventStore, RemoteError> {
        let (owner, name) = repo
            .split_once('/')
            .filter(|(o, n)| !o.is_empty() && !n.is_empty() && !n.contains('/'))
            .ok_or_else(|| RemoteError::InvalidRepo(repo.to_owned()))?;
        let base = format!("{}/repos/{owner}/{name}", self.config.base_url.trim_end_matches('/'));
        let per_page = self.config.per_page;
        let since = self
            .config
            .since
            .map(|t| format!("&since={}", timestamp::format(&t)))
            .unwrap_or_default();

        let repo: Repo = self.get_json(&base)?;
        let issues: Vec<Issue> =
            self.get_pages(format!("{base}/issues?state=all&per_page={per_page}{since}"))?;
        let pulls: Vec<Pull> = self.get_pages(format!("{base}/pulls?state=all&per_page={per_page}"))?;
        let issue_events: Vec<IssueEvent> =
            self.get_pages(format!("{base}/issues/events?per_page={per_page}"))?;
        let commits: Vec<Commit> =
            self.get_pages(format!("{base}/commits?per_page={per_page}{since}"))?;

        let mut builder = StoreBuilder::new(self.config.mode.is_strict());
        let mut accounts = BTreeMap::new();
        let mut remember = |a: &Account| {
            accounts.entry(a.id).or_insert_with(|| a.login.clone());
            UserId(a.id)
        };
        let project = ProjectId(repo.id);
        let time = |raw: &str, what: &str| {
            timestamp::parse(raw).ok_or_else(|| {
                RemoteError::Ingest(IngestError::Schema {
                    location: what.to_owned(),
                    field: None,
                    message: format!("invalid timestamp {raw:?}"),
                })
            })
        };
        let after_since = |t: DateTime<Utc>| self.config.since.is_none_or(|s| t >= s);

        builder.add_project(
            Project {
                project_id: project,
                full_name: repo.full_name.clone(),
                owner: remember(&repo.owner),
                forked_from: repo.parent.as_ref().map(|p| ProjectId(p.id)),
                created_at: time(&repo.created_at, "repository")?,
            },
            "repository",
        );

        for issue in issues.iter().filter(|i| i.pull_request.is_none()) {
            let location = format!("issue #{}", issue.number);
            let Some(user) = &issue.user else {
                builder.diagnose(DiagnosticKind::DanglingReference, location, "issue has no author")?;
                continue;
            };
            builder.add_event(
                EventRecord {
                    event_id: format!("issue:{}:opened", issue.number),
                    kind: EventKind::IssueOpened,
                    actor: remember(user),
                    project,
                    subject_id: Some(issue.number.to_string()),
                    at: time(&issue.created_at, &location)?,
                },
                location,
            );
        }

        for pull in &pulls {
            let location = format!("pull #{}", pull.number);
            if let Some(updated) = pull.updated_at.as_deref() {
                if !after_since(time(updated, &location)?) {
                    continue;
                }
            }
            let Some(user) = &pull.user else {
                builder.diagnose(
                    DiagnosticKind::DanglingReference,
                    location,
                    "pull request has no author",
                )?;
                continue;
            };
            let author = remember(user);
            let opened_at = time(&pull.created_at, &location)?;
            let closed_at = pull.closed_at.as_deref().map(|t| time(t, &location)).transpose()?;
            builder.add_pull_request(
                PullRequestRecord {
                    pr_id: pull.number.to_string(),
                    project,
                    author,
                    opened_at,
                    closed_at,
                    merged: pull.merged_at.is_some(),
                    head_project: pull.head.repo.as_ref().map(|r| ProjectId(r.id)),
                    base_project: pull.base.repo.as_ref().map_or(project, |r| ProjectId(r.id)),
                },
                location.clone(),
            );
            builder.add_event(
                EventRecord {
                    event_id: format!("pr:{}:opened", pull.number),
                    kind: EventKind::PullRequestOpened,
                    actor: author,
                    project,
                    subject_id: Some(pull.number.to_string()),
                    at: opened_at,
                },
                location,
            );
        }

        for event in &issue_events {
            let location = format!("issue event {}", event.id);
            let Some(issue) = &event.issue else { continue };
            let is_pr = issue.pull_request.is_some();
            let kind = match (event.event.as_str(), is_pr) {
                ("closed", false) => EventKind::IssueClosed,
                ("reopened", false) => EventKind::IssueReopened,
                ("closed", true) => EventKind::PullRequestClosed,
                ("reopened", true) => EventKind::PullRequestReopened,
                ("merged", _) => EventKind::PullRequestMerged,
                _ => continue,
            };
            let at = time(&event.created_at, &location)?;
            if !after_since(at) {
                continue;
            }
            let Some(actor) = &event.actor else {
                builder.diagnose(DiagnosticKind::DanglingReference, location, "event has no actor")?;
                continue;
            };
            builder.add_event(
                EventRecord {
                    event_id: format!("ev:{}", event.id),
                    kind,
                    actor: remember(actor),
                    project,
                    subject_id: Some(issue.number.to_string()),
                    at,
                },
                location,
            );
        }

        for commit in &commits {
            let location = format!("commit {}", commit.sha);
            let Some(author) = &commit.author else {
                builder.note_unlinked_commit(location)?;
                continue;
            };
            let Some(signature) = &commit.commit.author else {
                builder.diagnose(DiagnosticKind::MalformedRecord, location, "commit has no date")?;
                continue;
            };
            builder.add_event(
                EventRecord {
                    event_id: format!("commit:{}", commit.sha),
                    kind: EventKind::CommitAuthored,
                    actor: remember(author),
                    project,
                    subject_id: Some(commit.sha.clone()),
                    at: time(&signature.date, &location)?,
                },
                location,
            );
        }

        for (id, login) in accounts {
            builder.add_user(User { user_id: UserId(id), login }, "accounts");
        }
        Ok(builder.finish()?)
    }
}

/// Fetches `repo` ("owner/name") from the public API. The token falls back
/// to `$OPENNESS_TOKEN`.
pub fn fetch_remote(
    repo: &str,
    auth: Option<&str>,
    since: Option<DateTime<Utc>>,
) -> Result<EventStore, RemoteError> {
    let token = auth
        .map(str::to_owned)
        .or_else(|| std::env::var(TOKEN_ENV).ok().filter(|t| !t.is_empty()));
    Fetcher::http(FetchConfig {
        token,
        since,
        ..FetchConfig::default()
    })
    .fetch(repo)
}

fn decode<D: DeserializeOwned>(url: &str, body: &str) -> Result<D, RemoteError> {
    serde_json::from_str(body).map_err(|e| RemoteError::Decode {
        url: url.to_owned(),
        message: e.to_string(),
    })
}

fn classify_response(url: &str, response: &HttpResponse) -> Result<(), RemoteError> {
    let status = response.status;
    if (200..300).contains(&status) {
        return Ok(());
    }
    let remaining = response.header("x-ratelimit-remaining").map(str::trim);
    let retry_after = response
        .header("retry-after")
        .and_then(|v| v.trim().parse::<u64>().ok())
        .map(Duration::from_secs);
    if matches!(status, 403 | 429) && (remaining == Some("0") || retry_after.is_some()) {
        let reset_at = response
            .header("x-ratelimit-reset")
            .and_then(|v| v.trim().parse::<i64>().ok())
            .and_then(|secs| Utc.timestamp_opt(secs, 0).single());
        return Err(RemoteError::RateLimited {
            reset_at,
            retry_after,
        });
    }
    let message = serde_json::from_str::<serde_json::Value>(&response.body)
        .ok()
        .and_then(|v| v.get("message").and_then(|m| m.as_str()).map(str::to_owned))
        .unwrap_or_default();
    match status {
        401 | 403 => Err(RemoteError::Auth { status, message }),
        404 => Err(RemoteError::NotFound(url.to_owned())),
        _ => Err(RemoteError::Status {
            status,
            url: url.to_owned(),
        }),
    }
}

/// Extracts the `rel="next"` target of an RFC 8288 `Link` header.
fn next_link(header: &str) -> Option<String> {
    header.split(',').find_map(|part| {
        let (target, params) = part.split_once(';')?;
        let is_next = params
            .split(';')
            .any(|p| matches!(p.trim(), "rel=\"next\"" | "rel=next"));
        let target = target.trim();
        (is_next && target.starts_with('<') && target.ends_with('>'))
            .then(|| target[1..target.len() - 1].to_owned())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn response(status: u16, headers: &[(&str, &str)], body: &str) -> HttpResponse {
        HttpResponse {
            status,
            headers: headers
                .iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
            body: body.to_owned(),
        }
    }

    fn fetcher(transport: RecordedTransport) -> Fetcher<RecordedTransport> {
        Fetcher::new(
            transport,
            FetchConfig {
                base_url: "http://api.test".to_owned(),
                ..FetchConfig::default()
            },
        )
    }

    const REPO: &str = r#"{"id":10,"full_name":"alice/widget","owner":{"id":1,"login":"alice"},"fork":false,"created_at":"2012-01-01T00:00:00Z"}"#;

    fn empty_repo() -> RecordedTransport {
        let mut t = RecordedTransport::new();
        t.insert("/repos/alice/widget", response(200, &[], REPO));
        for path in [
            "/repos/alice/widget/issues?state=all&per_page=100",
            "/repos/alice/widget/pulls?state=all&per_page=100",
            "/repos/alice/widget/issues/events?per_page=100",
            "/repos/alice/widget/commits?per_page=100",
        ] {
            t.insert(path, response(200, &[], "[]"));
        }
        t
    }

    #[test]
    fn empty_repository() {
        let store = fetcher(empty_repo()).fetch("alice/widget").unwrap();
        assert_eq!(store.projects().count(), 1);
        assert_eq!(store.all_events().count(), 0);
        assert_eq!(store.users().count(), 1);
    }

    #[test]
    fn link_header_parsing() {
        let header = r#"<https://api.github.com/x?page=2>; rel="next", <https://api.github.com/x?page=5>; rel="last""#;
        assert_eq!(next_link(header).as_deref(), Some("https://api.github.com/x?page=2"));
        assert_eq!(next_link(r#"<https://a/x?page=1>; rel="prev""#), None);
    }

    #[test]
    fn exhausted_quota_is_rate_limited_with_reset() {
        let mut t = RecordedTransport::new();
        t.insert(
            "/repos/alice/widget",
            response(
                403,
                &[("X-RateLimit-Remaining", "0"), ("X-RateLimit-Reset", "1700000000")],
                r#"{"message":"API rate limit exceeded"}"#,
            ),
        );
        match fetcher(t).fetch("alice/widget") {
            Err(RemoteError::RateLimited { reset_at, .. }) => {
                assert_eq!(reset_at, Utc.timestamp_opt(1_700_000_000, 0).single());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn forbidden_without_rate_headers_is_auth() {
        let mut t = RecordedTransport::new();
        t.insert("/repos/alice/widget", response(403, &[], r#"{"message":"Forbidden"}"#));
        assert!(matches!(
            fetcher(t).fetch("alice/widget"),
            Err(RemoteError::Auth { status: 403, .. })
        ));
        let mut t = RecordedTransport::new();
        t.insert("/repos/alice/widget", response(401, &[], "{}"));
        assert!(matches!(fetcher(t).fetch("alice/widget"), Err(RemoteError::Auth { .. })));
    }

    #[test]
    fn retry_after_waits_when_allowed() {
        struct Flaky(std::cell::Cell<u32>, RecordedTransport);
        impl Transport for Flaky {
            fn get(&self, url: &str, h: &[(&str, String)]) -> Result<HttpResponse, RemoteError> {
                let n = self.0.get();
                self.0.set(n + 1);
                if n == 0 {
                    return Ok(response(429, &[("Retry-After", "0")], ""));
                }
                self.1.get(url, h)
            }
        }
        let config = FetchConfig {
            base_url: "http://api.test".to_owned(),
            rate_limit: RateLimitPolicy::Wait {
                max_wait: Duration::from_secs(1),
            },
            ..FetchConfig::default()
        };
        let store = Fetcher::new(Flaky(Default::default(), empty_repo()), config)
            .fetch("alice/widget")
            .unwrap();
        assert_eq!(store.projects().count(), 1);

        let aborting = fetcher(RecordedTransport::new());
        let flaky = Fetcher::new(Flaky(Default::default(), empty_repo()), aborting.config.clone());
        assert!(matches!(
            flaky.fetch("alice/widget"),
            Err(RemoteError::RateLimited { retry_after: Some(d), .. }) if d.is_zero()
        ));
    }

    #[test]
    fn missing_repository() {
        assert!(matches!(
            fetcher(RecordedTransport::new()).fetch("alice/widget"),
            Err(RemoteError::NotFound(_))
        ));
        assert!(matches!(
            fetcher(RecordedTransport::new()).fetch("widget"),
            Err(RemoteError::InvalidRepo(_))
        ));
    }
}
