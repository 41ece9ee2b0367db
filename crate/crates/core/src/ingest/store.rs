use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use chrono::{DateTime, Utc};
use serde::Serialize;

use super::model::{
    EventKind, EventRecord, MembershipRecord, Project, ProjectId, PullRequestRecord, SubjectKind,
    User, UserId,
};
use super::IngestError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticKind {
    /// Unparseable record or a record missing a required field.
    MalformedRecord,
    DuplicateRecord,
    /// Actor, project, user or owner reference that does not resolve.
    DanglingReference,
    /// Issue or pull request named by an event that is not in the store.
    DanglingSubject,
    /// Pull request whose base repository disagrees with its project.
    InconsistentPullRequest,
    /// Commit whose author is not linked to an account.
    UnlinkedCommit,
    /// Kept, but timestamped before the project's creation.
    EventBeforeProjectCreation,
    /// Kept, closed before it was opened.
    InvalidLifecycle,
    /// Kept, marked merged without any closing time; treated as unmerged.
    MergeWithoutClose,
    /// Pull request had no opening event; one was derived from `opened_at`.
    SynthesizedOpenEvent,
}

impl DiagnosticKind {
    /// Whether the offending record was left out of the store.
    pub fn drops_record(self) -> bool {
        use DiagnosticKind::*;
        matches!(
            self,
            MalformedRecord
                | DuplicateRecord
                | DanglingReference
                | DanglingSubject
                | InconsistentPullRequest
                | UnlinkedCommit
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    /// Where the record came from, e.g. `line 7` or `issues.csv row 3`.
    pub location: String,
    pub message: String,
}

/// How many commits could be attributed to an account.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CommitLinkage {
    pub linked: usize,
    pub unlinked: usize,
}

/// Immutable, indexed container for one dataset.
///
/// Events of each project are sorted by `(at, event_id)`. Equality compares
/// the dataset itself; diagnostics and linkage counts describe how it was
/// loaded and are ignored.
#[derive(Clone, Debug, Default)]
pub struct EventStore {
    users: BTreeMap<UserId, User>,
    projects: BTreeMap<ProjectId, Project>,
    memberships: Vec<MembershipRecord>,
    pull_requests: BTreeMap<ProjectId, Vec<PullRequestRecord>>,
    events: BTreeMap<ProjectId, Vec<EventRecord>>,
    diagnostics: Vec<Diagnostic>,
    unlinked_commits: usize,
    pr_index: HashMap<(ProjectId, String), usize>,
    issue_creators: HashMap<(ProjectId, String), UserId>,
}

impl PartialEq for EventStore {
    fn eq(&self, other: &Self) -> bool {
        self.users == other.users
            && self.projects == other.projects
            && self.memberships == other.memberships
            && self.pull_requests == other.pull_requests
            && self.events == other.events
    }
}

impl EventStore {
    pub fn users(&self) -> impl Iterator<Item = &User> {
        self.users.values()
    }

    pub fn user(&self, id: UserId) -> Option<&User> {
        self.users.get(&id)
    }

    pub fn user_by_login(&self, login: &str) -> Option<&User> {
        self.users.values().find(|u| u.login == login)
    }

    pub fn projects(&self) -> impl Iterator<Item = &Project> {
        self.projects.values()
    }

    pub fn project(&self, id: ProjectId) -> Option<&Project> {
        self.projects.get(&id)
    }

    pub fn project_by_name(&self, full_name: &str) -> Option<&Project> {
        self.projects.values().find(|p| p.full_name == full_name)
    }

    pub fn original_projects(&self) -> impl Iterator<Item = &Project> {
        self.projects.values().filter(|p| p.is_original())
    }

    pub fn memberships(&self) -> &[MembershipRecord] {
        &self.memberships
    }

    pub fn members_of(&self, project: ProjectId) -> impl Iterator<Item = &MembershipRecord> {
        self.memberships.iter().filter(move |m| m.project == project)
    }

    /// Events of `project`, ascending by `(at, event_id)`.
    pub fn events(&self, project: ProjectId) -> &[EventRecord] {
        self.events.get(&project).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn all_events(&self) -> impl Iterator<Item = &EventRecord> {
        self.events.values().flatten()
    }

    /// Pull requests targeting `project`, ordered by id.
    pub fn pull_requests(&self, project: ProjectId) -> &[PullRequestRecord] {
        self.pull_requests.get(&project).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn all_pull_requests(&self) -> impl Iterator<Item = &PullRequestRecord> {
        self.pull_requests.values().flatten()
    }

    pub fn pull_request(&self, project: ProjectId, pr_id: &str) -> Option<&PullRequestRecord> {
        let idx = *self.pr_index.get(&(project, pr_id.to_owned()))?;
        self.pull_requests.get(&project).map(|prs| &prs[idx])
    }

    /// Reporter of an issue, i.e. the actor of its earliest `IssueOpened`.
    pub fn issue_creator(&self, project: ProjectId, issue_id: &str) -> Option<UserId> {
        self.issue_creators.get(&(project, issue_id.to_owned())).copied()
    }

    pub fn issue_count(&self) -> usize {
        self.issue_creators.len()
    }

    pub fn diagnostics(&self) -> &[Diagnostic] {
        &self.diagnostics
    }

    pub fn commit_linkage(&self) -> CommitLinkage {
        let linked = self
            .all_events()
            .filter(|e| e.kind == EventKind::CommitAuthored)
            .count();
        CommitLinkage {
            linked,
            unlinked: self.unlinked_commits,
        }
    }

    /// Latest instant mentioned anywhere in the dataset.
    pub fn latest_timestamp(&self) -> Option<DateTime<Utc>> {
        let events = self.all_events().map(|e| e.at);
        let prs = self
            .all_pull_requests()
            .flat_map(|pr| std::iter::once(pr.opened_at).chain(pr.closed_at));
        let projects = self.projects.values().map(|p| p.created_at);
        events.chain(prs).chain(projects).max()
    }

    pub fn is_empty(&self) -> bool {
        self.users.is_empty() && self.projects.is_empty()
    }
}

struct Diagnostics {
    strict: bool,
    list: Vec<Diagnostic>,
}

impl Diagnostics {
    fn push(
        &mut self,
        kind: DiagnosticKind,
        location: &str,
        message: impl Into<String>,
    ) -> Result<(), IngestError> {
        let message = message.into();
        if self.strict && kind.drops_record() {
            return Err(IngestError::Join {
                location: location.to_owned(),
                message,
            });
        }
        log::debug!("{location}: {message}");
        self.list.push(Diagnostic {
            kind,
            location: location.to_owned(),
            message,
        });
        Ok(())
    }
}

/// Collects raw records from any ingestion route and resolves them into an
/// [`EventStore`].
///
/// In strict mode the first record that would be dropped aborts the build
/// with [`IngestError::Join`]; otherwise it becomes a diagnostic.
#[derive(Debug, Default)]
pub struct StoreBuilder {
    strict: bool,
    users: Vec<(User, String)>,
    projects: Vec<(Project, String)>,
    memberships: Vec<(MembershipRecord, String)>,
    pull_requests: Vec<(PullRequestRecord, String)>,
    events: Vec<(EventRecord, String)>,
    diagnostics: Vec<Diagnostic>,
    unlinked_commits: usize,
}

impl StoreBuilder {
    pub fn new(strict: bool) -> Self {
        StoreBuilder {
            strict,
            ..Default::default()
        }
    }

    pub fn strict(&self) -> bool {
        self.strict
    }

    pub fn add_user(&mut self, user: User, location: impl Into<String>) {
        self.users.push((user, location.into()));
    }

    pub fn add_project(&mut self, project: Project, location: impl Into<String>) {
        self.projects.push((project, location.into()));
    }

    pub fn add_membership(&mut self, membership: MembershipRecord, location: impl Into<String>) {
        self.memberships.push((membership, location.into()));
    }

    pub fn add_pull_request(&mut self, pr: PullRequestRecord, location: impl Into<String>) {
        self.pull_requests.push((pr, location.into()));
    }

    pub fn add_event(&mut self, event: EventRecord, location: impl Into<String>) {
        self.events.push((event, location.into()));
    }

    /// Records a problem found by the caller while reading its source.
    pub fn diagnose(
        &mut self,
        kind: DiagnosticKind,
        location: impl Into<String>,
        message: impl Into<String>,
    ) -> Result<(), IngestError> {
        let location = location.into();
        let mut diags = Diagnostics {
            strict: self.strict,
            list: std::mem::take(&mut self.diagnostics),
        };
        let res = diags.push(kind, &location, message);
        self.diagnostics = diags.list;
        res
    }

    pub fn note_unlinked_commit(&mut self, location: impl Into<String>) -> Result<(), IngestError> {
        self.unlinked_commits += 1;
        self.diagnose(
            DiagnosticKind::UnlinkedCommit,
            location,
            "commit author is not linked to an account",
        )
    }

    /// Number of records handed to the builder so far.
    pub fn record_count(&self) -> usize {
        self.users.len()
            + self.projects.len()
            + self.memberships.len()
            + self.pull_requests.len()
            + self.events.len()
    }

    pub fn finish(self) -> Result<EventStore, IngestError> {
        let mut diags = Diagnostics {
            strict: self.strict,
            list: self.diagnostics,
        };

        let mut users = BTreeMap::new();
        let mut logins = HashSet::new();
        for (user, loc) in self.users {
            let slot = match users.entry(user.user_id) {
                Entry::Occupied(_) => {
                    diags.push(
                        DiagnosticKind::DuplicateRecord,
                        &loc,
                        format!("duplicate user id {}", user.user_id),
                    )?;
                    continue;
                }
                Entry::Vacant(slot) => slot,
            };
            if user.login.is_empty() || !logins.insert(user.login.clone()) {
                diags.push(
                    DiagnosticKind::DuplicateRecord,
                    &loc,
                    format!("empty or duplicate login {:?}", user.login),
                )?;
            } else {
                slot.insert(user);
            }
        }

        let mut projects = BTreeMap::new();
        for (project, loc) in self.projects {
            let slot = match projects.entry(project.project_id) {
                Entry::Occupied(_) => {
                    diags.push(
                        DiagnosticKind::DuplicateRecord,
                        &loc,
                        format!("duplicate project id {}", project.project_id),
                    )?;
                    continue;
                }
                Entry::Vacant(slot) => slot,
            };
            if !users.contains_key(&project.owner) {
                diags.push(
                    DiagnosticKind::DanglingReference,
                    &loc,
                    format!(
                        "project {} owner {} is not a known user",
                        project.project_id, project.owner
                    ),
                )?;
            } else {
                slot.insert(project);
            }
        }

        let mut member_pairs = BTreeSet::new();
        let mut memberships = Vec::new();
        for (m, loc) in self.memberships {
            if !projects.contains_key(&m.project) || !users.contains_key(&m.user) {
                diags.push(
                    DiagnosticKind::DanglingReference,
                    &loc,
                    format!("membership ({}, {}) does not resolve", m.project, m.user),
                )?;
            } else if !member_pairs.insert((m.project, m.user)) {
                diags.push(
                    DiagnosticKind::DuplicateRecord,
                    &loc,
                    format!("duplicate membership ({}, {})", m.project, m.user),
                )?;
            } else {
                memberships.push(m);
            }
        }
        memberships.sort_by_key(|m| (m.project, m.user));

        let mut pull_requests: BTreeMap<ProjectId, BTreeMap<String, PullRequestRecord>> =
            projects.keys().map(|&id| (id, BTreeMap::new())).collect();
        let mut pr_locations = HashMap::new();
        for (pr, loc) in self.pull_requests {
            if !projects.contains_key(&pr.project) || !users.contains_key(&pr.author) {
                diags.push(
                    DiagnosticKind::DanglingReference,
                    &loc,
                    format!("pull request {} has an unknown project or author", pr.pr_id),
                )?;
                continue;
            }
            if pr.base_project != pr.project {
                diags.push(
                    DiagnosticKind::InconsistentPullRequest,
                    &loc,
                    format!(
                        "pull request {} targets {} but is filed under {}",
                        pr.pr_id, pr.base_project, pr.project
                    ),
                )?;
                continue;
            }
            let per_project = pull_requests.get_mut(&pr.project).expect("seeded");
            if per_project.contains_key(&pr.pr_id) {
                diags.push(
                    DiagnosticKind::DuplicateRecord,
                    &loc,
                    format!("duplicate pull request {}", pr.pr_id),
                )?;
                continue;
            }
            pr_locations.insert((pr.project, pr.pr_id.clone()), loc);
            per_project.insert(pr.pr_id.clone(), pr);
        }

        // Actor/project resolution first; subject resolution needs the set of
        // issues opened by surviving events.
        let mut event_ids = HashSet::new();
        let mut pending = Vec::with_capacity(self.events.len());
        for (event, loc) in self.events {
            if !event_ids.insert(event.event_id.clone()) {
                diags.push(
                    DiagnosticKind::DuplicateRecord,
                    &loc,
                    format!("duplicate event id {:?}", event.event_id),
                )?;
                continue;
            }
            if !projects.contains_key(&event.project) {
                diags.push(
                    DiagnosticKind::DanglingReference,
                    &loc,
                    format!("event {:?} references unknown project {}", event.event_id, event.project),
                )?;
                continue;
            }
            if !users.contains_key(&event.actor) {
                diags.push(
                    DiagnosticKind::DanglingReference,
                    &loc,
                    format!("event {:?} references unknown actor {}", event.event_id, event.actor),
                )?;
                continue;
            }
            if event.kind.requires_subject() && event.subject_id.is_none() {
                diags.push(
                    DiagnosticKind::MalformedRecord,
                    &loc,
                    format!("{} event {:?} has no subject_id", event.kind, event.event_id),
                )?;
                continue;
            }
            pending.push((event, loc));
        }

        let opened_issues: HashSet<(ProjectId, String)> = pending
            .iter()
            .filter(|(e, _)| e.kind == EventKind::IssueOpened)
            .filter_map(|(e, _)| e.subject_id.clone().map(|s| (e.project, s)))
            .collect();
        let has_pr = |project: ProjectId, id: &str| {
            pull_requests
                .get(&project)
                .is_some_and(|prs| prs.contains_key(id))
        };

        let mut events: BTreeMap<ProjectId, Vec<EventRecord>> =
            projects.keys().map(|&id| (id, Vec::new())).collect();
        for (event, loc) in pending {
            let resolved = match (&event.subject_id, event.kind.subject_kind()) {
                (None, _) | (_, SubjectKind::Commit) => true,
                (Some(s), SubjectKind::Issue) => opened_issues.contains(&(event.project, s.clone())),
                (Some(s), SubjectKind::PullRequest) => has_pr(event.project, s),
                (Some(s), SubjectKind::IssueOrPullRequest) => {
                    opened_issues.contains(&(event.project, s.clone())) || has_pr(event.project, s)
                }
                (Some(s), SubjectKind::User) => s
                    .parse::<u64>()
                    .is_ok_and(|id| users.contains_key(&UserId(id))),
            };
            if !resolved {
                diags.push(
                    DiagnosticKind::DanglingSubject,
                    &loc,
                    format!(
                        "{} event {:?} names unknown subject {:?}",
                        event.kind,
                        event.event_id,
                        event.subject_id.as_deref().unwrap_or("")
                    ),
                )?;
                continue;
            }
            events.get_mut(&event.project).expect("seeded").push(event);
        }

        // A merge event or a merged flag both mark the pull request merged.
        for per_project in events.values() {
            for e in per_project.iter().filter(|e| e.kind == EventKind::PullRequestMerged) {
                let subject = e.subject_id.as_deref().expect("resolved subject");
                let pr = pull_requests
                    .get_mut(&e.project)
                    .and_then(|prs| prs.get_mut(subject))
                    .expect("resolved subject");
                pr.merged = true;
                if pr.closed_at.is_none() {
                    pr.closed_at = Some(e.at);
                }
            }
        }

        let mut opened: HashSet<(ProjectId, &str)> = HashSet::new();
        for e in events.values().flatten() {
            if e.kind == EventKind::PullRequestOpened {
                opened.insert((e.project, e.subject_id.as_deref().expect("resolved subject")));
            }
        }
        let mut synthesized = Vec::new();
        for (project, prs) in &mut pull_requests {
            for pr in prs.values_mut() {
                let loc = pr_locations
                    .get(&(*project, pr.pr_id.clone()))
                    .cloned()
                    .unwrap_or_default();
                if pr.merged && pr.closed_at.is_none() {
                    diags.push(
                        DiagnosticKind::MergeWithoutClose,
                        &loc,
                        format!("pull request {} is marked merged but never closed", pr.pr_id),
                    )?;
                    pr.merged = false;
                }
                if pr.closed_at.is_some_and(|c| c < pr.opened_at) {
                    diags.push(
                        DiagnosticKind::InvalidLifecycle,
                        &loc,
                        format!("pull request {} closes before it opens", pr.pr_id),
                    )?;
                }
                if !opened.contains(&(*project, pr.pr_id.as_str())) {
                    let event_id = format!("pr-opened:{}:{}", project, pr.pr_id);
                    if event_ids.contains(&event_id) {
                        continue;
                    }
                    diags.push(
                        DiagnosticKind::SynthesizedOpenEvent,
                        &loc,
                        format!("pull request {} has no opening event", pr.pr_id),
                    )?;
                    synthesized.push(EventRecord {
                        event_id,
                        kind: EventKind::PullRequestOpened,
                        actor: pr.author,
                        project: *project,
                        subject_id: Some(pr.pr_id.clone()),
                        at: pr.opened_at,
                    });
                }
            }
        }
        for e in synthesized {
            events.get_mut(&e.project).expect("seeded").push(e);
        }

        for (project_id, per_project) in &mut events {
            per_project.sort_by(|a, b| (a.at, &a.event_id).cmp(&(b.at, &b.event_id)));
            let created_at = projects[project_id].created_at;
            for e in per_project.iter().filter(|e| e.at < created_at) {
                diags.push(
                    DiagnosticKind::EventBeforeProjectCreation,
                    &format!("event {}", e.event_id),
                    format!("event at {} precedes project creation at {}", e.at, created_at),
                )?;
            }
        }

        let mut issue_creators = HashMap::new();
        for e in events.values().flatten() {
            if e.kind == EventKind::IssueOpened {
                let subject = e.subject_id.clone().expect("required subject");
                issue_creators.entry((e.project, subject)).or_insert(e.actor);
            }
        }

        let pull_requests: BTreeMap<ProjectId, Vec<PullRequestRecord>> = pull_requests
            .into_iter()
            .map(|(id, prs)| (id, prs.into_values().collect()))
            .collect();
        let pr_index = pull_requests
            .iter()
            .flat_map(|(&project, prs)| {
                prs.iter()
                    .enumerate()
                    .map(move |(i, pr)| ((project, pr.pr_id.clone()), i))
            })
            .collect();

        Ok(EventStore {
            users,
            projects,
            memberships,
            pull_requests,
            events,
            diagnostics: diags.list,
            unlinked_commits: self.unlinked_commits,
            pr_index,
            issue_creators,
        })
    }
}
