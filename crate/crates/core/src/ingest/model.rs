//! Canonical records shared by every ingestion route.

use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::timestamp;

/// Account identifier as assigned by the forge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UserId(pub u64);

/// Repository identifier as assigned by the forge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProjectId(pub u64);

impl fmt::Display for UserId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for ProjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct User {
    pub user_id: UserId,
    pub login: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Project {
    pub project_id: ProjectId,
    /// `owner/name`
    pub full_name: String,
    pub owner: UserId,
    pub forked_from: Option<ProjectId>,
    #[serde(with = "timestamp::serde_utc")]
    pub created_at: DateTime<Utc>,
}

impl Project {
    /// A project is original when it has no fork parent.
    pub fn is_original(&self) -> bool {
        self.forked_from.is_none()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EventKind {
    IssueOpened,
    IssueClosed,
    IssueReopened,
    IssueComment,
    PullRequestOpened,
    PullRequestClosed,
    PullRequestMerged,
    PullRequestReopened,
    PullRequestComment,
    CommitAuthored,
    MemberAdded,
}

/// What an event's `subject_id` points at.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SubjectKind {
    Issue,
    PullRequest,
    /// Issue comments may target the issue thread of a pull request.
    IssueOrPullRequest,
    User,
    Commit,
}

impl EventKind {
    pub const ALL: [EventKind; 11] = [
        EventKind::IssueOpened,
        EventKind::IssueClosed,
        EventKind::IssueReopened,
        EventKind::IssueComment,
        EventKind::PullRequestOpened,
        EventKind::PullRequestClosed,
        EventKind::PullRequestMerged,
        EventKind::PullRequestReopened,
        EventKind::PullRequestComment,
        EventKind::CommitAuthored,
        EventKind::MemberAdded,
    ];

    pub fn requires_subject(self) -> bool {
        self != EventKind::CommitAuthored
    }

    pub fn subject_kind(self) -> SubjectKind {
        use EventKind::*;
        match self {
            IssueOpened | IssueClosed | IssueReopened => SubjectKind::Issue,
            IssueComment => SubjectKind::IssueOrPullRequest,
            PullRequestOpened | PullRequestClosed | PullRequestMerged | PullRequestReopened
            | PullRequestComment => SubjectKind::PullRequest,
            CommitAuthored => SubjectKind::Commit,
            MemberAdded => SubjectKind::User,
        }
    }

    pub fn as_str(self) -> &'static str {
        use EventKind::*;
        match self {
            IssueOpened => "IssueOpened",
            IssueClosed => "IssueClosed",
            IssueReopened => "IssueReopened",
            IssueComment => "IssueComment",
            PullRequestOpened => "PullRequestOpened",
            PullRequestClosed => "PullRequestClosed",
            PullRequestMerged => "PullRequestMerged",
            PullRequestReopened => "PullRequestReopened",
            PullRequestComment => "PullRequestComment",
            CommitAuthored => "CommitAuthored",
            MemberAdded => "MemberAdded",
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One actor/action/timestamp occurrence inside a project.
///
/// `subject_id` names the issue, pull request, commit or (for
/// [`EventKind::MemberAdded`]) the added user's id.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventRecord {
    pub event_id: String,
    pub kind: EventKind,
    pub actor: UserId,
    pub project: ProjectId,
    pub subject_id: Option<String>,
    #[serde(with = "timestamp::serde_utc")]
    pub at: DateTime<Utc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PullRequestRecord {
    pub pr_id: String,
    pub project: ProjectId,
    pub author: UserId,
    #[serde(with = "timestamp::serde_utc")]
    pub opened_at: DateTime<Utc>,
    #[serde(with = "timestamp::serde_utc_opt", default)]
    pub closed_at: Option<DateTime<Utc>>,
    pub merged: bool,
    /// `None` when the head repository no longer exists.
    pub head_project: Option<ProjectId>,
    pub base_project: ProjectId,
}

impl PullRequestRecord {
    /// Head and base live in the same repository.
    pub fn is_intra_branch(&self) -> bool {
        self.head_project == Some(self.base_project)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MembershipRecord {
    pub project: ProjectId,
    pub user: UserId,
    #[serde(with = "timestamp::serde_utc_opt", default)]
    pub recorded_at: Option<DateTime<Utc>>,
}
