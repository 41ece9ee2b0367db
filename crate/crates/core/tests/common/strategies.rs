//! Random but structurally plausible event stores.

use chrono::{DateTime, Duration, TimeZone, Utc};
use openness::ingest::{
    EventKind, EventRecord, EventStore, MembershipRecord, Project, ProjectId, PullRequestRecord,
    StoreBuilder, User, UserId,
};
use proptest::prelude::*;

fn base() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2012, 1, 1, 0, 0, 0).unwrap()
}

/// Milliseconds after the base instant, within roughly a year and a half.
fn at(offset_ms: i64) -> DateTime<Utc> {
    base() + Duration::milliseconds(offset_ms)
}

const SPAN_MS: i64 = 500 * 86_400_000;

#[derive(Clone, Debug)]
pub struct StoreSpec {
    pub users: usize,
    pub projects: Vec<(usize, bool)>,
    pub memberships: Vec<(usize, usize, Option<i64>)>,
    pub prs: Vec<(usize, usize, i64, Option<i64>, bool, u8)>,
    pub issues: Vec<(usize, usize, i64)>,
    pub events: Vec<(usize, usize, usize, usize, i64)>,
}

pub fn arb_spec() -> impl Strategy<Value = StoreSpec> {
    (2usize..9, 1usize..4)
        .prop_flat_map(|(users, projects)| {
            (
                Just(users),
                prop::collection::vec((0..users, any::<bool>()), projects),
                prop::collection::vec((0..projects, 0..users, prop::option::of(0..SPAN_MS)), 0..4),
                prop::collection::vec(
                    (
                        0..projects,
                        0..users,
                        0..SPAN_MS,
                        prop::option::of(0..60 * 86_400_000i64),
                        any::<bool>(),
                        0u8..3,
                    ),
                    0..10,
                ),
                prop::collection::vec((0..projects, 0..users, 0..SPAN_MS), 0..6),
                prop::collection::vec((0usize..11, 0..users, 0..projects, 0usize..16, 0..SPAN_MS), 0..30),
            )
        })
        .prop_map(|(users, projects, memberships, prs, issues, events)| StoreSpec {
            users,
            projects,
            memberships,
            prs,
            issues,
            events,
        })
}

impl StoreSpec {
    pub fn build(&self) -> EventStore {
        let mut b = StoreBuilder::new(false);
        for u in 0..self.users {
            b.add_user(
                User {
                    user_id: UserId(u as u64 + 1),
                    login: format!("user{u}"),
                },
                "gen",
            );
        }
        let pid = |p: usize| ProjectId(p as u64 + 100);
        let uid = |u: usize| UserId(u as u64 + 1);
        for (p, &(owner, fork)) in self.projects.iter().enumerate() {
            b.add_project(
                Project {
                    project_id: pid(p),
                    full_name: format!("user{owner}/repo{p}"),
                    owner: uid(owner),
                    forked_from: (p > 0 && fork).then(|| pid(0)),
                    created_at: base(),
                },
                "gen",
            );
        }
        for &(p, u, t) in &self.memberships {
            b.add_membership(
                MembershipRecord {
                    project: pid(p),
                    user: uid(u),
                    recorded_at: t.map(at),
                },
                "gen",
            );
        }
        let mut prs_of: Vec<Vec<String>> = vec![Vec::new(); self.projects.len()];
        for (i, &(p, author, open, dur, merged, head)) in self.prs.iter().enumerate() {
            let id = i.to_string();
            prs_of[p].push(id.clone());
            b.add_pull_request(
                PullRequestRecord {
                    pr_id: id,
                    project: pid(p),
                    author: uid(author),
                    opened_at: at(open),
                    closed_at: dur.map(|d| at(open + d)),
                    merged: merged && dur.is_some(),
                    head_project: match head {
                        0 => None,
                        1 => Some(pid(p)),
                        _ => Some(ProjectId(999)),
                    },
                    base_project: pid(p),
                },
                "gen",
            );
        }
        let mut issues_of: Vec<Vec<String>> = vec![Vec::new(); self.projects.len()];
        for (i, &(p, author, t)) in self.issues.iter().enumerate() {
            let id = (1000 + i).to_string();
            issues_of[p].push(id.clone());
            b.add_event(
                EventRecord {
                    event_id: format!("issue-{i}"),
                    kind: EventKind::IssueOpened,
                    actor: uid(author),
                    project: pid(p),
                    subject_id: Some(id),
                    at: at(t),
                },
                "gen",
            );
        }
        for (i, &(k, actor, p, s, t)) in self.events.iter().enumerate() {
            use openness::ingest::SubjectKind;
            let kind = EventKind::ALL[k];
            let pick = |list: &Vec<String>| list.get(s % list.len().max(1)).cloned();
            let subject = match kind.subject_kind() {
                SubjectKind::Issue => pick(&issues_of[p]),
                SubjectKind::PullRequest => pick(&prs_of[p]),
                SubjectKind::IssueOrPullRequest => {
                    if s % 2 == 0 {
                        pick(&issues_of[p])
                    } else {
                        pick(&prs_of[p])
                    }
                }
                SubjectKind::User => Some(((s % self.users) + 1).to_string()),
                SubjectKind::Commit => (s % 3 != 0).then(|| format!("{s:040x}")),
            };
            // Kinds that need a subject but found none are skipped rather
            // than left to the builder's diagnostics.
            if kind.requires_subject() && subject.is_none() {
                continue;
            }
            b.add_event(
                EventRecord {
                    event_id: format!("ev-{i}"),
                    kind,
                    actor: uid(actor),
                    project: pid(p),
                    subject_id: subject,
                    at: at(t),
                },
                "gen",
            );
        }
        b.finish().expect("lenient build")
    }
}

pub fn arb_store() -> impl Strategy<Value = EventStore> {
    arb_spec().prop_map(|s| s.build())
}
