//! External contribution analysis: how many pull requests from external
//! contributors get merged, and how long a decision takes.
//!
//! Pending pull requests are counted but kept out of both the acceptance
//! rate and the latency.

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{EventStore, ProjectId, PullRequestRecord, UserId};
use crate::roles::{ProjectRoles, Role, RoleOptions, RolesError};
use crate::stats::{self, days_between};

#[derive(Debug, Error, PartialEq)]
pub enum ContribError {
    #[error(transparent)]
    Roles(#[from] RolesError),
    #[error("pull request {pr_id} closes before it opens")]
    InvalidLifecycle { pr_id: String },
    #[error("no project has a decided external pull request")]
    EmptyInput,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Accepted,
    Rejected,
    Pending,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PullRequestOutcome {
    pub pr: PullRequestRecord,
    pub outcome: Outcome,
    /// Opening to final close, in days; absent while pending.
    pub decision_days: Option<f64>,
}

pub fn classify_outcome(pr: &PullRequestRecord) -> Result<PullRequestOutcome, ContribError> {
    let (outcome, decision_days) = match pr.closed_at {
        None => (Outcome::Pending, None),
        Some(closed) if closed < pr.opened_at => {
            return Err(ContribError::InvalidLifecycle {
                pr_id: pr.pr_id.clone(),
            })
        }
        Some(closed) => {
            let outcome = if pr.merged {
                Outcome::Accepted
            } else {
                Outcome::Rejected
            };
            (outcome, Some(days_between(pr.opened_at, closed)))
        }
    };
    Ok(PullRequestOutcome {
        pr: pr.clone(),
        outcome,
        decision_days,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ContribOptions {
    pub roles: RoleOptions,
    /// Judge each author by what they were when the pull request was opened
    /// instead of by their role over the whole history.
    pub role_at_pr_time: bool,
}

fn internal_at(
    user: UserId,
    at: DateTime<Utc>,
    store: &EventStore,
    roles: &ProjectRoles,
) -> bool {
    let project = roles.project;
    if store.project(project).is_some_and(|p| p.owner == user) {
        return true;
    }
    let member = store
        .members_of(project)
        .any(|m| m.user == user && m.recorded_at.is_none_or(|t| t <= at));
    member || roles.first_management.get(&user).is_some_and(|&t| t < at)
}

fn select_external<'s>(
    store: &'s EventStore,
    roles: &ProjectRoles,
    options: ContribOptions,
) -> Vec<&'s PullRequestRecord> {
    store
        .pull_requests(roles.project)
        .iter()
        .filter(|pr| !pr.is_intra_branch())
        .filter(|pr| {
            if options.role_at_pr_time {
                !internal_at(pr.author, pr.opened_at, store, roles)
            } else {
                roles.role_of(pr.author) == Some(Role::ExternalContributor)
            }
        })
        .collect()
}

/// Pull requests targeting `project` whose authors are external
/// contributors. Members' and collaborators' requests are left out.
pub fn external_pull_requests(
    project: ProjectId,
    store: &EventStore,
    options: ContribOptions,
) -> Result<Vec<PullRequestRecord>, ContribError> {
    let roles = ProjectRoles::compute(project, store, options.roles)?;
    Ok(select_external(store, &roles, options)
        .into_iter()
        .cloned()
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContributionStats {
    pub project: ProjectId,
    pub total_external_prs: u64,
    pub accepted: u64,
    pub rejected: u64,
    pub pending_excluded: u64,
    /// Requests closing before they open; not part of `total_external_prs`.
    pub invalid_excluded: u64,
    pub acceptance_rate: Option<f64>,
    pub mean_decision_days: Option<f64>,
}

impl ContributionStats {
    pub fn decided(&self) -> u64 {
        self.accepted + self.rejected
    }
}

pub(crate) fn stats_from_roles(
    store: &EventStore,
    roles: &ProjectRoles,
    options: ContribOptions,
) -> ContributionStats {
    let mut stats = ContributionStats {
        project: roles.project,
        total_external_prs: 0,
        accepted: 0,
        rejected: 0,
        pending_excluded: 0,
        invalid_excluded: 0,
        acceptance_rate: None,
        mean_decision_days: None,
    };
    let mut days = Vec::new();
    for pr in select_external(store, roles, options) {
        let outcome = match classify_outcome(pr) {
            Ok(o) => o,
            Err(err) => {
                log::warn!("{err}; excluded");
                stats.invalid_excluded += 1;
                continue;
            }
        };
        stats.total_external_prs += 1;
        match outcome.outcome {
            Outcome::Accepted => stats.accepted += 1,
            Outcome::Rejected => stats.rejected += 1,
            Outcome::Pending => stats.pending_excluded += 1,
        }
        days.extend(outcome.decision_days);
    }
    if stats.decided() > 0 {
        stats.acceptance_rate = Some(stats.accepted as f64 / stats.decided() as f64);
        stats.mean_decision_days = stats::mean(&days).ok();
    }
    stats
}

pub fn contribution_stats(
    project: ProjectId,
    store: &EventStore,
    options: ContribOptions,
) -> Result<ContributionStats, ContribError> {
    let roles = ProjectRoles::compute(project, store, options.roles)?;
    Ok(stats_from_roles(store, &roles, options))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContributionAggregate {
    pub mean_acceptance_rate: f64,
    pub mean_decision_days: f64,
    /// Projects with at least one decided external pull request.
    pub projects_included: usize,
    pub projects_skipped: usize,
    /// Whether pull requests were pooled instead of averaging project means.
    pub pooled: bool,
}

/// Mean over projects of the per-project rate and latency; projects without
/// a decided request are skipped.
pub fn aggregate_contribution(
    stats: &[ContributionStats],
) -> Result<ContributionAggregate, ContribError> {
    let decided: Vec<&ContributionStats> =
        stats.iter().filter(|s| s.acceptance_rate.is_some()).collect();
    if decided.is_empty() {
        return Err(ContribError::EmptyInput);
    }
    let rates: Vec<f64> = decided.iter().filter_map(|s| s.acceptance_rate).collect();
    let days: Vec<f64> = decided.iter().filter_map(|s| s.mean_decision_days).collect();
    Ok(ContributionAggregate {
        mean_acceptance_rate: stats::mean(&rates).map_err(|_| ContribError::EmptyInput)?,
        mean_decision_days: stats::mean(&days).map_err(|_| ContribError::EmptyInput)?,
        projects_included: decided.len(),
        projects_skipped: stats.len() - decided.len(),
        pooled: false,
    })
}

/// Every decided external request weighs the same, regardless of project.
pub fn aggregate_contribution_pooled(
    stats: &[ContributionStats],
) -> Result<ContributionAggregate, ContribError> {
    let decided: Vec<&ContributionStats> = stats.iter().filter(|s| s.decided() > 0).collect();
    let total: u64 = decided.iter().map(|s| s.decided()).sum();
    if total == 0 {
        return Err(ContribError::EmptyInput);
    }
    let accepted: u64 = decided.iter().map(|s| s.accepted).sum();
    let day_sum: f64 = decided
        .iter()
        .map(|s| s.mean_decision_days.unwrap_or(0.0) * s.decided() as f64)
        .sum();
    Ok(ContributionAggregate {
        mean_acceptance_rate: accepted as f64 / total as f64,
        mean_decision_days: day_sum / total as f64,
        projects_included: decided.len(),
        projects_skipped: stats.len() - decided.len(),
        pooled: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::timestamp;

    fn pr(opened: &str, closed: Option<&str>, merged: bool) -> PullRequestRecord {
        PullRequestRecord {
            pr_id: "1".into(),
            project: ProjectId(1),
            author: UserId(2),
            opened_at: timestamp::parse(opened).unwrap(),
            closed_at: closed.map(|c| timestamp::parse(c).unwrap()),
            merged,
            head_project: Some(ProjectId(2)),
            base_project: ProjectId(1),
        }
    }

    #[test]
    fn merged_after_ten_days() {
        let o = classify_outcome(&pr("2012-01-01T00:00Z", Some("2012-01-11T00:00Z"), true)).unwrap();
        assert_eq!(o.outcome, Outcome::Accepted);
        assert_eq!(o.decision_days, Some(10.0));
    }

    #[test]
    fn never_closed_is_pending() {
        let o = classify_outcome(&pr("2012-01-01T00:00Z", None, false)).unwrap();
        assert_eq!(o.outcome, Outcome::Pending);
        assert_eq!(o.decision_days, None);
    }

    #[test]
    fn half_day_rejection() {
        let o = classify_outcome(&pr("2012-01-01T00:00Z", Some("2012-01-01T12:00Z"), false)).unwrap();
        assert_eq!(o.outcome, Outcome::Rejected);
        assert_eq!(o.decision_days, Some(0.5));
    }

    #[test]
    fn closing_before_opening_is_invalid() {
        let err = classify_outcome(&pr("2012-01-02T00:00Z", Some("2012-01-01T00:00Z"), false));
        assert_eq!(err, Err(ContribError::InvalidLifecycle { pr_id: "1".into() }));
    }

    fn with_rate(rate: Option<f64>, days: Option<f64>, accepted: u64, rejected: u64) -> ContributionStats {
        ContributionStats {
            project: ProjectId(1),
            total_external_prs: accepted + rejected,
            accepted,
            rejected,
            pending_excluded: 0,
            invalid_excluded: 0,
            acceptance_rate: rate,
            mean_decision_days: days,
        }
    }

    #[test]
    fn aggregate_examples() {
        let one = aggregate_contribution(&[with_rate(Some(0.9), Some(3.0), 9, 1)]).unwrap();
        assert_eq!(one.mean_acceptance_rate, 0.9);
        let three = aggregate_contribution(&[
            with_rate(Some(0.0), Some(1.0), 0, 2),
            with_rate(Some(0.5), Some(2.0), 1, 1),
            with_rate(Some(1.0), Some(3.0), 2, 0),
            with_rate(None, None, 0, 0),
        ])
        .unwrap();
        assert_eq!(three.mean_acceptance_rate, 0.5);
        assert_eq!(three.mean_decision_days, 2.0);
        assert_eq!((three.projects_included, three.projects_skipped), (3, 1));
        assert_eq!(
            aggregate_contribution(&[with_rate(None, None, 0, 0)]),
            Err(ContribError::EmptyInput)
        );
    }

    #[test]
    fn pooled_weights_requests() {
        let pooled = aggregate_contribution_pooled(&[
            with_rate(Some(1.0), Some(10.0), 3, 0),
            with_rate(Some(0.0), Some(2.0), 0, 1),
        ])
        .unwrap();
        assert_eq!(pooled.mean_acceptance_rate, 0.75);
        assert_eq!(pooled.mean_decision_days, 8.0);
    }
}
