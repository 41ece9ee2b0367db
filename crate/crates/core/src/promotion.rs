//! Time to become a collaborator.
//!
//! There is no record of when write access is granted, so the promotion is
//! dated by the user's first management action and measured from the user's
//! first recorded action of any kind in the project. Collaborators whose
//! first visible action is already a management action are filtered out:
//! they were never seen as external users.

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{EventStore, ProjectId, UserId};
use crate::roles::{ProjectRoles, Role, RoleOptions, RolesError};
use crate::stats::{self, days_between, BoxplotSummary};

#[derive(Debug, Error, PartialEq)]
pub enum PromotionError {
    #[error(transparent)]
    Roles(#[from] RolesError),
    #[error("user {user} is not a collaborator of project {project}")]
    NotACollaborator { user: UserId, project: ProjectId },
    #[error("no project has a promotion record")]
    EmptyInput,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PromotionRecord {
    pub user: UserId,
    pub project: ProjectId,
    pub first_action_at: DateTime<Utc>,
    pub first_management_at: DateTime<Utc>,
    pub duration_days: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PromotionStats {
    pub project: ProjectId,
    /// `owner/name`, used to label the project in distributions.
    pub project_name: String,
    pub records: Vec<PromotionRecord>,
    /// Collaborators whose first action was already managerial.
    pub filtered: u64,
    pub mean_duration_days: Option<f64>,
}

pub fn first_action(user: UserId, project: ProjectId, store: &EventStore) -> Option<DateTime<Utc>> {
    store
        .events(project)
        .iter()
        .filter(|e| e.actor == user)
        .map(|e| e.at)
        .min()
}

fn record_from_roles(user: UserId, roles: &ProjectRoles) -> Option<PromotionRecord> {
    let first_action_at = *roles.first_action.get(&user)?;
    let first_management_at = *roles.first_management.get(&user)?;
    (first_management_at > first_action_at).then(|| PromotionRecord {
        user,
        project: roles.project,
        first_action_at,
        first_management_at,
        duration_days: days_between(first_action_at, first_management_at),
    })
}

/// `Ok(None)` when the collaborator is filtered.
pub fn promotion_record(
    user: UserId,
    project: ProjectId,
    store: &EventStore,
    options: RoleOptions,
) -> Result<Option<PromotionRecord>, PromotionError> {
    let roles = ProjectRoles::compute(project, store, options)?;
    if roles.role_of(user) != Some(Role::Collaborator) {
        return Err(PromotionError::NotACollaborator { user, project });
    }
    Ok(record_from_roles(user, &roles))
}

pub(crate) fn stats_from_roles(store: &EventStore, roles: &ProjectRoles) -> PromotionStats {
    let mut records = Vec::new();
    let mut filtered = 0;
    for user in roles.users_with(Role::Collaborator) {
        match record_from_roles(user, roles) {
            Some(r) => records.push(r),
            None => filtered += 1,
        }
    }
    let durations: Vec<f64> = records.iter().map(|r| r.duration_days).collect();
    PromotionStats {
        project: roles.project,
        project_name: store
            .project(roles.project)
            .map(|p| p.full_name.clone())
            .unwrap_or_default(),
        records,
        filtered,
        mean_duration_days: stats::mean(&durations).ok(),
    }
}

pub fn project_promotion_stats(
    project: ProjectId,
    store: &EventStore,
    options: RoleOptions,
) -> Result<PromotionStats, PromotionError> {
    let roles = ProjectRoles::compute(project, store, options)?;
    Ok(stats_from_roles(store, &roles))
}

/// Boxplot over per-project mean durations, labeled by project name.
/// Projects without records are left out.
pub fn dataset_promotion_distribution(
    stats: &[PromotionStats],
) -> Result<BoxplotSummary, PromotionError> {
    let sample: Vec<(&str, f64)> = stats
        .iter()
        .filter_map(|s| s.mean_duration_days.map(|m| (s.project_name.as_str(), m)))
        .collect();
    stats::boxplot_summary(&sample).map_err(|_| PromotionError::EmptyInput)
}
