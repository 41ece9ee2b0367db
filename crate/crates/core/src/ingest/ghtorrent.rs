//! GHTorrent-style relational dump: one CSV file per table, header row
//! required, `\N`, `NULL` or an empty cell meaning null.
//!
//! | table | columns read |
//! |---|---|
//! | `users` | `id`, `login` |
//! | `projects` | `id`, `owner_id`, `name`, `created_at`, `forked_from` |
//! | `project_members` | `repo_id`, `user_id`, `created_at`? |
//! | `pull_requests` | `id`, `head_repo_id`, `base_repo_id`, `merged`? |
//! | `pull_request_history` | `id`, `pull_request_id`, `created_at`, `action`, `actor_id`? |
//! | `issues` | `id`, `repo_id`, `reporter_id`, `created_at`, `pull_request`?, `pull_request_id`? |
//! | `issue_events` | `event_id`, `issue_id`, `actor_id`, `action`, `created_at` |
//! | `issue_comments` | `comment_id`, `issue_id`, `user_id`, `created_at` |
//! | `commits` | `id`, `sha`, `author_id`, `project_id`, `created_at` |
//!
//! Only `projects` and `users` are mandatory.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use csv::StringRecord;

use super::model::{
    EventKind, EventRecord, MembershipRecord, Project, ProjectId, PullRequestRecord, User, UserId,
};
use super::store::{DiagnosticKind, EventStore, StoreBuilder};
use super::{timestamp, IngestError, ParseMode};

pub const MANDATORY_TABLES: [&str; 2] = ["projects", "users"];
pub const OPTIONAL_TABLES: [&str; 7] = [
    "project_members",
    "pull_requests",
    "pull_request_history",
    "issues",
    "issue_events",
    "issue_comments",
    "commits",
];

struct Table {
    name: &'static str,
    columns: HashMap<String, usize>,
    rows: Vec<StringRecord>,
}

struct Row<'a> {
    table: &'a Table,
    record: &'a StringRecord,
    index: usize,
}

impl<'a> Row<'a> {
    fn location(&self) -> String {
        format!("{}.csv row {}", self.table.name, self.index + 1)
    }

    fn raw(&self, column: &str) -> Option<&'a str> {
        let idx = *self.table.columns.get(column)?;
        let cell = self.record.get(idx)?.trim();
        match cell {
            "" | "\\N" | "NULL" | "null" => None,
            v => Some(v),
        }
    }

    fn schema_error(&self, column: &str, message: &str) -> IngestError {
        IngestError::Schema {
            location: self.location(),
            field: Some(column.to_owned()),
            message: message.to_owned(),
        }
    }

    fn text(&self, column: &str) -> Result<&'a str, IngestError> {
        self.raw(column)
            .ok_or_else(|| self.schema_error(column, "required value is missing"))
    }

    fn id(&self, column: &str) -> Result<u64, IngestError> {
        self.text(column)?
            .parse()
            .map_err(|_| self.schema_error(column, "expected an integer id"))
    }

    fn opt_id(&self, column: &str) -> Result<Option<u64>, IngestError> {
        match self.raw(column) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| self.schema_error(column, "expected an integer id")),
        }
    }

    fn time(&self, column: &str) -> Result<DateTime<Utc>, IngestError> {
        let raw = self.text(column)?;
        timestamp::parse(raw).ok_or_else(|| self.schema_error(column, "unparseable timestamp"))
    }

    fn opt_time(&self, column: &str) -> Result<Option<DateTime<Utc>>, IngestError> {
        match self.raw(column) {
            None => Ok(None),
            Some(raw) => timestamp::parse(raw)
                .map(Some)
                .ok_or_else(|| self.schema_error(column, "unparseable timestamp")),
        }
    }

    fn flag(&self, column: &str) -> bool {
        matches!(self.raw(column), Some("1" | "true" | "t" | "TRUE"))
    }
}

impl Table {
    fn read(dir: &Path, name: &'static str) -> Result<Option<Table>, IngestError> {
        let path = dir.join(format!("{name}.csv"));
        if !path.exists() {
            return Ok(None);
        }
        let io_err = |e: csv::Error, path: &PathBuf| IngestError::Io {
            path: path.clone(),
            source: std::io::Error::other(e),
        };
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .from_path(&path)
            .map_err(|e| io_err(e, &path))?;
        let columns = reader
            .headers()
            .map_err(|e| io_err(e, &path))?
            .iter()
            .enumerate()
            .map(|(i, h)| (h.trim().to_owned(), i))
            .collect();
        let rows = reader
            .records()
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| io_err(e, &path))?;
        Ok(Some(Table {
            name,
            columns,
            rows,
        }))
    }

    fn rows(&self) -> impl Iterator<Item = Row<'_>> {
        self.rows.iter().enumerate().map(move |(index, record)| Row {
            table: self,
            record,
            index,
        })
    }
}

/// Lenient-mode row handling: a malformed row becomes a diagnostic.
fn keep_going<T>(
    builder: &mut StoreBuilder,
    mode: ParseMode,
    result: Result<T, IngestError>,
) -> Result<Option<T>, IngestError> {
    match result {
        Ok(v) => Ok(Some(v)),
        Err(err @ IngestError::Schema { .. }) if mode.is_strict() => Err(err),
        Err(IngestError::Schema {
            location, message, field,
        }) => {
            let message = match field {
                Some(f) => format!("{f}: {message}"),
                None => message,
            };
            builder.diagnose(DiagnosticKind::MalformedRecord, location, message)?;
            Ok(None)
        }
        Err(other) => Err(other),
    }
}

#[derive(Default)]
struct PrLifecycle {
    opened_at: Option<DateTime<Utc>>,
    opener: Option<UserId>,
    last_close: Option<DateTime<Utc>>,
    last_reopen: Option<DateTime<Utc>>,
    merged: bool,
}

pub fn load_ghtorrent_dump(dir: impl AsRef<Path>, mode: ParseMode) -> Result<EventStore, IngestError> {
    let dir = dir.as_ref();
    if !dir.is_dir() {
        return Err(IngestError::FileNotFound(dir.to_owned()));
    }
    let mut tables = HashMap::new();
    for name in MANDATORY_TABLES {
        let table = Table::read(dir, name)?.ok_or_else(|| IngestError::MissingTable(name.to_owned()))?;
        tables.insert(name, table);
    }
    for name in OPTIONAL_TABLES {
        if let Some(table) = Table::read(dir, name)? {
            tables.insert(name, table);
        }
    }
    let table = |name: &str| tables.get(name);
    let mut builder = StoreBuilder::new(mode.is_strict());

    let mut logins = HashMap::new();
    for row in table("users").expect("mandatory").rows() {
        let parsed = (|| -> Result<_, IngestError> { Ok((row.id("id")?, row.text("login")?.to_owned())) })();
        if let Some((id, login)) = keep_going(&mut builder, mode, parsed)? {
            logins.entry(id).or_insert_with(|| login.clone());
            builder.add_user(
                User {
                    user_id: UserId(id),
                    login,
                },
                row.location(),
            );
        }
    }

    for row in table("projects").expect("mandatory").rows() {
        let parsed = (|| -> Result<_, IngestError> {
            let owner = row.id("owner_id")?;
            let name = row.text("name")?;
            let owner_login = logins.get(&owner).map(String::as_str).unwrap_or("?");
            Ok(Project {
                project_id: ProjectId(row.id("id")?),
                full_name: format!("{owner_login}/{name}"),
                owner: UserId(owner),
                forked_from: row.opt_id("forked_from")?.map(ProjectId),
                created_at: row.time("created_at")?,
            })
        })();
        if let Some(project) = keep_going(&mut builder, mode, parsed)? {
            builder.add_project(project, row.location());
        }
    }

    if let Some(members) = table("project_members") {
        for row in members.rows() {
            let parsed = (|| -> Result<_, IngestError> {
                Ok(MembershipRecord {
                    project: ProjectId(row.id("repo_id")?),
                    user: UserId(row.id("user_id")?),
                    recorded_at: row.opt_time("created_at")?,
                })
            })();
            if let Some(m) = keep_going(&mut builder, mode, parsed)? {
                builder.add_membership(m, row.location());
            }
        }
    }

    // Issue rows flagged as pull requests are the PR's discussion thread.
    let mut issue_project: HashMap<u64, ProjectId> = HashMap::new();
    let mut issue_as_pr: HashMap<u64, u64> = HashMap::new();
    let mut pr_reporter: HashMap<u64, UserId> = HashMap::new();
    if let Some(issues) = table("issues") {
        for row in issues.rows() {
            let parsed = (|| -> Result<_, IngestError> {
                Ok((
                    row.id("id")?,
                    ProjectId(row.id("repo_id")?),
                    UserId(row.id("reporter_id")?),
                    row.time("created_at")?,
                    row.opt_id("pull_request_id")?.filter(|_| row.flag("pull_request")),
                ))
            })();
            let Some((id, project, reporter, at, pr)) = keep_going(&mut builder, mode, parsed)? else {
                continue;
            };
            issue_project.insert(id, project);
            if let Some(pr) = pr {
                issue_as_pr.insert(id, pr);
                pr_reporter.insert(pr, reporter);
                continue;
            }
            builder.add_event(
                EventRecord {
                    event_id: format!("issue:{id}"),
                    kind: EventKind::IssueOpened,
                    actor: reporter,
                    project,
                    subject_id: Some(id.to_string()),
                    at,
                },
                row.location(),
            );
        }
    }

    let mut pr_targets: HashMap<u64, (ProjectId, Option<ProjectId>, bool, String)> = HashMap::new();
    if let Some(prs) = table("pull_requests") {
        for row in prs.rows() {
            let parsed = (|| -> Result<_, IngestError> {
                Ok((
                    row.id("id")?,
                    ProjectId(row.id("base_repo_id")?),
                    row.opt_id("head_repo_id")?.map(ProjectId),
                    row.flag("merged"),
                ))
            })();
            if let Some((id, base, head, merged)) = keep_going(&mut builder, mode, parsed)? {
                pr_targets.insert(id, (base, head, merged, row.location()));
            }
        }
    }

    let mut lifecycles: HashMap<u64, PrLifecycle> = HashMap::new();
    if let Some(history) = table("pull_request_history") {
        for row in history.rows() {
            let parsed = (|| -> Result<_, IngestError> {
                Ok((
                    row.id("id")?,
                    row.id("pull_request_id")?,
                    row.time("created_at")?,
                    row.text("action")?.to_owned(),
                    row.opt_id("actor_id")?.map(UserId),
                ))
            })();
            let Some((id, pr, at, action, actor)) = keep_going(&mut builder, mode, parsed)? else {
                continue;
            };
            let kind = match action.as_str() {
                "opened" => EventKind::PullRequestOpened,
                "closed" => EventKind::PullRequestClosed,
                "merged" => EventKind::PullRequestMerged,
                "reopened" => EventKind::PullRequestReopened,
                _ => continue,
            };
            let Some((base, ..)) = pr_targets.get(&pr) else {
                builder.diagnose(
                    DiagnosticKind::DanglingSubject,
                    row.location(),
                    format!("history row names unknown pull request {pr}"),
                )?;
                continue;
            };
            let base = *base;
            let life = lifecycles.entry(pr).or_default();
            match kind {
                EventKind::PullRequestOpened => {
                    if life.opened_at.is_none_or(|t| at < t) {
                        life.opened_at = Some(at);
                        life.opener = actor.or(life.opener);
                    }
                }
                EventKind::PullRequestReopened => {
                    life.last_reopen = life.last_reopen.max(Some(at));
                }
                _ => {
                    life.last_close = life.last_close.max(Some(at));
                    life.merged |= kind == EventKind::PullRequestMerged;
                }
            }
            let actor = match (actor, kind) {
                (Some(a), _) => a,
                (None, EventKind::PullRequestOpened) => match pr_reporter.get(&pr) {
                    Some(&a) => a,
                    None => continue,
                },
                (None, _) => {
                    builder.diagnose(
                        DiagnosticKind::MalformedRecord,
                        row.location(),
                        format!("{action} row has no actor_id"),
                    )?;
                    continue;
                }
            };
            builder.add_event(
                EventRecord {
                    event_id: format!("prh:{id}"),
                    kind,
                    actor,
                    project: base,
                    subject_id: Some(pr.to_string()),
                    at,
                },
                row.location(),
            );
        }
    }

    let mut pr_ids: Vec<_> = pr_targets.keys().copied().collect();
    pr_ids.sort_unstable();
    for pr in pr_ids {
        let (base, head, merged_flag, location) = &pr_targets[&pr];
        let life = lifecycles.remove(&pr).unwrap_or_default();
        let author = life.opener.or_else(|| pr_reporter.get(&pr).copied());
        let (Some(opened_at), Some(author)) = (life.opened_at, author) else {
            builder.diagnose(
                DiagnosticKind::MalformedRecord,
                location.clone(),
                format!("pull request {pr} has no opening history or author"),
            )?;
            continue;
        };
        // Final close wins; a reopen after it leaves the request pending.
        let closed_at = life
            .last_close
            .filter(|&c| life.last_reopen.is_none_or(|r| r <= c));
        builder.add_pull_request(
            PullRequestRecord {
                pr_id: pr.to_string(),
                project: *base,
                author,
                opened_at,
                closed_at,
                merged: (life.merged || *merged_flag) && closed_at.is_some(),
                head_project: *head,
                base_project: *base,
            },
            location.clone(),
        );
    }

    if let Some(events) = table("issue_events") {
        for row in events.rows() {
            let parsed = (|| -> Result<_, IngestError> {
                Ok((
                    row.id("event_id")?,
                    row.id("issue_id")?,
                    UserId(row.id("actor_id")?),
                    row.text("action")?.to_owned(),
                    row.time("created_at")?,
                ))
            })();
            let Some((id, issue, actor, action, at)) = keep_going(&mut builder, mode, parsed)? else {
                continue;
            };
            // Pull request threads are covered by pull_request_history.
            if issue_as_pr.contains_key(&issue) {
                continue;
            }
            let kind = match action.as_str() {
                "closed" => EventKind::IssueClosed,
                "reopened" => EventKind::IssueReopened,
                _ => continue,
            };
            let Some(&project) = issue_project.get(&issue) else {
                builder.diagnose(
                    DiagnosticKind::DanglingSubject,
                    row.location(),
                    format!("issue event names unknown issue {issue}"),
                )?;
                continue;
            };
            builder.add_event(
                EventRecord {
                    event_id: format!("ie:{id}"),
                    kind,
                    actor,
                    project,
                    subject_id: Some(issue.to_string()),
                    at,
                },
                row.location(),
            );
        }
    }

    if let Some(comments) = table("issue_comments") {
        for row in comments.rows() {
            let parsed = (|| -> Result<_, IngestError> {
                Ok((
                    row.id("comment_id")?,
                    row.id("issue_id")?,
                    UserId(row.id("user_id")?),
                    row.time("created_at")?,
                ))
            })();
            let Some((id, issue, actor, at)) = keep_going(&mut builder, mode, parsed)? else {
                continue;
            };
            let Some(&project) = issue_project.get(&issue) else {
                builder.diagnose(
                    DiagnosticKind::DanglingSubject,
                    row.location(),
                    format!("comment names unknown issue {issue}"),
                )?;
                continue;
            };
            let (kind, subject) = match issue_as_pr.get(&issue) {
                Some(pr) => (EventKind::PullRequestComment, pr.to_string()),
                None => (EventKind::IssueComment, issue.to_string()),
            };
            builder.add_event(
                EventRecord {
                    event_id: format!("ic:{id}"),
                    kind,
                    actor,
                    project,
                    subject_id: Some(subject),
                    at,
                },
                row.location(),
            );
        }
    }

    if let Some(commits) = table("commits") {
        for row in commits.rows() {
            let parsed = (|| -> Result<_, IngestError> {
                Ok((
                    row.id("id")?,
                    row.raw("sha").map(str::to_owned),
                    row.opt_id("author_id")?.map(UserId),
                    ProjectId(row.id("project_id")?),
                    row.time("created_at")?,
                ))
            })();
            let Some((id, sha, author, project, at)) = keep_going(&mut builder, mode, parsed)? else {
                continue;
            };
            let Some(author) = author else {
                builder.note_unlinked_commit(row.location())?;
                continue;
            };
            builder.add_event(
                EventRecord {
                    event_id: format!("c:{id}"),
                    kind: EventKind::CommitAuthored,
                    actor: author,
                    project,
                    subject_id: sha,
                    at,
                },
                row.location(),
            );
        }
    }

    builder.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn write(dir: &Path, name: &str, body: &str) {
        fs::write(dir.join(format!("{name}.csv")), body).unwrap();
    }

    fn base_tables(dir: &Path) {
        write(dir, "users", "id,login\n1,alice\n2,bob\n");
        write(
            dir,
            "projects",
            "id,owner_id,name,created_at,forked_from\n10,1,widget,2012-01-01 00:00:00,\\N\n",
        );
    }

    #[test]
    fn projects_and_users_only() {
        let dir = tempfile::tempdir().unwrap();
        base_tables(dir.path());
        let store = load_ghtorrent_dump(dir.path(), ParseMode::Lenient).unwrap();
        assert_eq!(store.projects().count(), 1);
        assert_eq!(store.users().count(), 2);
        assert_eq!(store.all_events().count(), 0);
        assert_eq!(store.project(ProjectId(10)).unwrap().full_name, "alice/widget");
    }

    #[test]
    fn missing_mandatory_table() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "users", "id,login\n1,alice\n");
        let err = load_ghtorrent_dump(dir.path(), ParseMode::Lenient).unwrap_err();
        assert!(matches!(err, IngestError::MissingTable(t) if t == "projects"));
    }

    #[test]
    fn history_rows_populate_lifecycle() {
        let dir = tempfile::tempdir().unwrap();
        base_tables(dir.path());
        write(dir.path(), "pull_requests", "id,head_repo_id,base_repo_id\n7,\\N,10\n");
        write(
            dir.path(),
            "pull_request_history",
            "id,pull_request_id,created_at,action,actor_id\n\
             1,7,2012-02-01 00:00:00,opened,2\n\
             2,7,2012-02-06 00:00:00,merged,1\n\
             3,7,2012-02-06 00:00:00,closed,1\n",
        );
        let store = load_ghtorrent_dump(dir.path(), ParseMode::Lenient).unwrap();
        let pr = store.pull_request(ProjectId(10), "7").unwrap();
        assert_eq!(pr.author, UserId(2));
        assert_eq!(timestamp::format(&pr.opened_at), "2012-02-01T00:00:00Z");
        assert_eq!(timestamp::format(&pr.closed_at.unwrap()), "2012-02-06T00:00:00Z");
        assert!(pr.merged);
        assert_eq!(store.events(ProjectId(10)).len(), 3);
    }

    #[test]
    fn reopen_after_close_is_pending() {
        let dir = tempfile::tempdir().unwrap();
        base_tables(dir.path());
        write(dir.path(), "pull_requests", "id,head_repo_id,base_repo_id\n7,10,10\n");
        write(
            dir.path(),
            "pull_request_history",
            "id,pull_request_id,created_at,action,actor_id\n\
             1,7,2012-02-01 00:00:00,opened,2\n\
             2,7,2012-02-02 00:00:00,closed,1\n\
             3,7,2012-02-03 00:00:00,reopened,1\n",
        );
        let store = load_ghtorrent_dump(dir.path(), ParseMode::Lenient).unwrap();
        let pr = store.pull_request(ProjectId(10), "7").unwrap();
        assert_eq!(pr.closed_at, None);
        assert!(!pr.merged);
        assert!(pr.is_intra_branch());
    }

    #[test]
    fn unlinked_commits_are_counted() {
        let dir = tempfile::tempdir().unwrap();
        base_tables(dir.path());
        write(
            dir.path(),
            "commits",
            "id,sha,author_id,committer_id,project_id,created_at\n\
             1,aaa,2,1,10,2012-03-01 00:00:00\n\
             2,bbb,\\N,1,10,2012-03-02 00:00:00\n",
        );
        let store = load_ghtorrent_dump(dir.path(), ParseMode::Lenient).unwrap();
        let linkage = store.commit_linkage();
        assert_eq!((linkage.linked, linkage.unlinked), (1, 1));
        // committer 1 is not the actor
        assert_eq!(store.events(ProjectId(10))[0].actor, UserId(2));
    }

    #[test]
    fn strict_mode_fails_on_bad_row() {
        let dir = tempfile::tempdir().unwrap();
        base_tables(dir.path());
        write(dir.path(), "project_members", "repo_id,user_id,created_at\nten,2,\\N\n");
        assert!(load_ghtorrent_dump(dir.path(), ParseMode::Lenient).is_ok());
        let err = load_ghtorrent_dump(dir.path(), ParseMode::Strict).unwrap_err();
        assert!(matches!(err, IngestError::Schema { field: Some(f), .. } if f == "repo_id"));
    }

    #[test]
    fn strict_mode_fails_on_unresolved_join() {
        let dir = tempfile::tempdir().unwrap();
        base_tables(dir.path());
        write(dir.path(), "project_members", "repo_id,user_id,created_at\n10,99,\\N\n");
        let err = load_ghtorrent_dump(dir.path(), ParseMode::Strict).unwrap_err();
        assert!(matches!(err, IngestError::Join { .. }));
    }
}
