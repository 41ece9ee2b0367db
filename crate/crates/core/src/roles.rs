//! Community composition: who in a project is a member, a collaborator, an
//! external contributor or an external user.
//!
//! Collaborators never appear in the data explicitly. They are inferred from
//! management actions, i.e. events that need write access to the repository:
//! merging a pull request, reopening an issue or pull request, closing
//! somebody else's issue or pull request, and opening an intra-branch pull
//! request.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{EventKind, EventRecord, EventStore, Project, ProjectId, UserId};

#[derive(Debug, Error, PartialEq)]
pub enum RolesError {
    #[error("project {0} is not in the store")]
    UnknownProject(ProjectId),
    #[error("project {0} is a fork, only original projects are classified")]
    NotOriginalProject(ProjectId),
    #[error("event {event_id:?} names a subject that cannot be resolved")]
    UnresolvedSubject { event_id: String },
    #[error("no compositions to average")]
    EmptyInput,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Member,
    Collaborator,
    ExternalContributor,
    ExternalUser,
}

impl Role {
    /// Highest precedence first.
    pub const ALL: [Role; 4] = [
        Role::Member,
        Role::Collaborator,
        Role::ExternalContributor,
        Role::ExternalUser,
    ];

    /// Larger wins when a user qualifies for several roles.
    pub fn precedence(self) -> u8 {
        match self {
            Role::Member => 3,
            Role::Collaborator => 2,
            Role::ExternalContributor => 1,
            Role::ExternalUser => 0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Role::Member => "member",
            Role::Collaborator => "collaborator",
            Role::ExternalContributor => "external_contributor",
            Role::ExternalUser => "external_user",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Role::Member => "Project members",
            Role::Collaborator => "Collaborators",
            Role::ExternalContributor => "External contributors",
            Role::ExternalUser => "External users",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssignedReason {
    MembershipTable,
    OwnerOfProject,
    ManagementAction,
    SentPullRequest,
    OtherActivity,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoleAssignment {
    pub user: UserId,
    pub project: ProjectId,
    pub role: Role,
    /// Ids of the events that justify the role, in event order.
    pub evidence: Vec<String>,
    pub assigned_reason: AssignedReason,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RoleOptions {
    /// Also count closing one's own issue or pull request as management.
    pub strict_management: bool,
}

/// Whether `event` needed write access to its project.
pub fn is_management_action(
    event: &EventRecord,
    store: &EventStore,
    options: RoleOptions,
) -> Result<bool, RolesError> {
    let unresolved = || RolesError::UnresolvedSubject {
        event_id: event.event_id.clone(),
    };
    let subject = event.subject_id.as_deref();
    match event.kind {
        EventKind::PullRequestMerged | EventKind::IssueReopened | EventKind::PullRequestReopened => {
            Ok(true)
        }
        EventKind::PullRequestClosed => {
            let pr = subject
                .and_then(|s| store.pull_request(event.project, s))
                .ok_or_else(unresolved)?;
            Ok(options.strict_management || pr.author != event.actor)
        }
        EventKind::IssueClosed => {
            let creator = subject
                .and_then(|s| store.issue_creator(event.project, s))
                .ok_or_else(unresolved)?;
            Ok(options.strict_management || creator != event.actor)
        }
        EventKind::PullRequestOpened => {
            let pr = subject
                .and_then(|s| store.pull_request(event.project, s))
                .ok_or_else(unresolved)?;
            Ok(pr.is_intra_branch())
        }
        _ => Ok(false),
    }
}

/// Role classification of one original project plus the per-user timing
/// facts the other metrics reuse.
#[derive(Clone, Debug)]
pub struct ProjectRoles {
    pub project: ProjectId,
    /// One entry per classified user, ascending by user id.
    pub assignments: Vec<RoleAssignment>,
    /// Earliest event of each active user.
    pub first_action: BTreeMap<UserId, DateTime<Utc>>,
    /// Earliest management action of each user that performed one.
    pub first_management: BTreeMap<UserId, DateTime<Utc>>,
    /// Events left out of management evidence because their subject is unknown.
    pub unresolved_events: Vec<String>,
}

impl ProjectRoles {
    pub fn compute(
        project: ProjectId,
        store: &EventStore,
        options: RoleOptions,
    ) -> Result<Self, RolesError> {
        let meta = original_project(project, store)?;
        let events = store.events(project);
        let members: BTreeSet<UserId> = store.members_of(project).map(|m| m.user).collect();

        let mut first_action = BTreeMap::new();
        let mut first_management = BTreeMap::new();
        let mut management: BTreeMap<UserId, Vec<String>> = BTreeMap::new();
        let mut activity: BTreeMap<UserId, Vec<String>> = BTreeMap::new();
        let mut unresolved_events = Vec::new();
        for event in events {
            first_action.entry(event.actor).or_insert(event.at);
            activity
                .entry(event.actor)
                .or_default()
                .push(event.event_id.clone());
            match is_management_action(event, store, options) {
                Ok(true) => {
                    first_management.entry(event.actor).or_insert(event.at);
                    management
                        .entry(event.actor)
                        .or_default()
                        .push(event.event_id.clone());
                }
                Ok(false) => {}
                Err(RolesError::UnresolvedSubject { event_id }) => {
                    log::warn!("{event_id}: unresolved subject, not counted as management");
                    unresolved_events.push(event_id);
                }
                Err(other) => return Err(other),
            }
        }

        let mut authored: BTreeMap<UserId, HashSet<&str>> = BTreeMap::new();
        for pr in store.pull_requests(project) {
            authored.entry(pr.author).or_default().insert(pr.pr_id.as_str());
        }
        let sent_pull_request = |user: UserId| -> Option<Vec<String>> {
            let prs = authored.get(&user)?;
            Some(
                events
                    .iter()
                    .filter(|e| e.kind == EventKind::PullRequestOpened)
                    .filter(|e| e.subject_id.as_deref().is_some_and(|s| prs.contains(s)))
                    .map(|e| e.event_id.clone())
                    .collect(),
            )
        };

        let users: BTreeSet<UserId> = members
            .iter()
            .copied()
            .chain(std::iter::once(meta.owner))
            .chain(activity.keys().copied())
            .chain(authored.keys().copied())
            .collect();

        let assignments = users
            .into_iter()
            .map(|user| {
                let (role, assigned_reason, evidence) = if user == meta.owner {
                    (Role::Member, AssignedReason::OwnerOfProject, Vec::new())
                } else if members.contains(&user) {
                    (Role::Member, AssignedReason::MembershipTable, Vec::new())
                } else if let Some(ids) = management.get(&user) {
                    (Role::Collaborator, AssignedReason::ManagementAction, ids.clone())
                } else if let Some(ids) = sent_pull_request(user) {
                    (Role::ExternalContributor, AssignedReason::SentPullRequest, ids)
                } else {
                    let ids = activity.get(&user).cloned().unwrap_or_default();
                    (Role::ExternalUser, AssignedReason::OtherActivity, ids)
                };
                RoleAssignment {
                    user,
                    project,
                    role,
                    evidence,
                    assigned_reason,
                }
            })
            .collect();

        Ok(ProjectRoles {
            project,
            assignments,
            first_action,
            first_management,
            unresolved_events,
        })
    }

    pub fn role_of(&self, user: UserId) -> Option<Role> {
        self.assignments
            .binary_search_by_key(&user, |a| a.user)
            .ok()
            .map(|i| self.assignments[i].role)
    }

    pub fn users_with(&self, role: Role) -> impl Iterator<Item = UserId> + '_ {
        self.assignments
            .iter()
            .filter(move |a| a.role == role)
            .map(|a| a.user)
    }
}

pub(crate) fn original_project(project: ProjectId, store: &EventStore) -> Result<&Project, RolesError> {
    let meta = store
        .project(project)
        .ok_or(RolesError::UnknownProject(project))?;
    if !meta.is_original() {
        return Err(RolesError::NotOriginalProject(project));
    }
    Ok(meta)
}

pub fn classify_users(
    project: ProjectId,
    store: &EventStore,
    options: RoleOptions,
) -> Result<Vec<RoleAssignment>, RolesError> {
    Ok(ProjectRoles::compute(project, store, options)?.assignments)
}

/// Role histogram of one project.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommunityComposition {
    pub project: ProjectId,
    pub counts: BTreeMap<Role, u64>,
    /// Share of each role in `[0, 1]`; all zero for an empty community.
    pub percentages: BTreeMap<Role, f64>,
}

impl CommunityComposition {
    pub fn from_assignments(project: ProjectId, assignments: &[RoleAssignment]) -> Self {
        let mut counts: BTreeMap<Role, u64> = Role::ALL.iter().map(|&r| (r, 0)).collect();
        for a in assignments {
            *counts.get_mut(&a.role).expect("seeded") += 1;
        }
        let total = counts.values().sum::<u64>();
        let percentages = counts
            .iter()
            .map(|(&r, &c)| (r, if total == 0 { 0.0 } else { c as f64 / total as f64 }))
            .collect();
        CommunityComposition {
            project,
            counts,
            percentages,
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn share(&self, role: Role) -> f64 {
        self.percentages.get(&role).copied().unwrap_or(0.0)
    }

    /// Members, collaborators and external contributors together.
    pub fn contributing_share(&self) -> f64 {
        1.0 - self.share(Role::ExternalUser)
    }
}

pub fn compose_community(
    project: ProjectId,
    store: &EventStore,
    options: RoleOptions,
) -> Result<CommunityComposition, RolesError> {
    let assignments = classify_users(project, store, options)?;
    Ok(CommunityComposition::from_assignments(project, &assignments))
}

/// Unweighted mean of per-project role shares.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AverageComposition {
    pub projects: usize,
    pub percentages: BTreeMap<Role, f64>,
}

impl AverageComposition {
    pub fn share(&self, role: Role) -> f64 {
        self.percentages.get(&role).copied().unwrap_or(0.0)
    }

    pub fn contributing_share(&self) -> f64 {
        1.0 - self.share(Role::ExternalUser)
    }
}

pub fn average_composition(
    compositions: &[CommunityComposition],
) -> Result<AverageComposition, RolesError> {
    if compositions.is_empty() {
        return Err(RolesError::EmptyInput);
    }
    let n = compositions.len() as f64;
    let percentages = Role::ALL
        .iter()
        .map(|&role| {
            let mut shares: Vec<f64> = compositions.iter().map(|c| c.share(role)).collect();
            shares.sort_by(f64::total_cmp);
            (role, shares.iter().sum::<f64>() / n)
        })
        .collect();
    Ok(AverageComposition {
        projects: compositions.len(),
        percentages,
    })
}
